//! Enumeration of perfect matchings and set partitions.
//!
//! Everything here works on zero-based *positions*, never on index values, so
//! a sequence with repeated labels such as `(1,1,2,2)` is paired exactly like
//! `(1,2,3,4)`. Collapsing equal labels is left to the polynomial layer.

use std::fmt;

use itertools::Itertools;

use crate::error::Error;

/// A perfect matching of positions `0..2k`.
///
/// Canonical form: each pair is `(lo, hi)` with `lo < hi`, and pairs are sorted
/// by `lo`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Builds a pairing from arbitrary unordered pairs, canonicalizing them.
    ///
    /// Returns `None` unless the pairs cover `0..2k` exactly once.
    pub fn from_pairs<I>(pairs: I) -> Option<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort_unstable();
        let n = pairs.len() * 2;
        let mut seen = vec![false; n];
        for &(a, b) in &pairs {
            if a == b || b >= n || seen[a] || seen[b] {
                return None;
            }
            seen[a] = true;
            seen[b] = true;
        }
        Some(Pairing { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of positions covered (`2k`).
    pub fn size(&self) -> usize {
        self.pairs.len() * 2
    }

    /// True if the pairing contains the unordered pair `{a, b}`.
    pub fn contains_pair(&self, a: usize, b: usize) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.pairs.binary_search(&key).is_ok()
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in &self.pairs {
            write!(f, "{{{a},{b}}}")?;
        }
        Ok(())
    }
}

/// Lazy stream over all `(n-1)!!` pairings of `n` positions.
///
/// Order: the smallest unpaired position is matched with each later
/// position in increasing order, recursing on the rest. Internally this is a
/// mixed-radix counter with radices `n-1, n-3, ..., 1`.
#[derive(Clone, Debug)]
pub struct Pairings {
    n: usize,
    digits: Vec<usize>,
    done: bool,
}

/// Enumerates every pairing of the positions `0..n`.
///
/// An odd `n` (or `n == 0`) yields nothing; callers treat an odd-sized
/// product as having zero moment.
pub fn enumerate_pairings(n: usize) -> Pairings {
    Pairings {
        n,
        digits: vec![0; n / 2],
        done: n == 0 || n % 2 == 1,
    }
}

impl Pairings {
    fn decode(&self) -> Pairing {
        let mut free: Vec<usize> = (0..self.n).collect();
        let mut pairs = Vec::with_capacity(self.n / 2);
        for &d in &self.digits {
            let first = free.remove(0);
            let partner = free.remove(d);
            pairs.push((first, partner));
        }
        Pairing { pairs }
    }

    fn advance(&mut self) {
        let levels = self.digits.len();
        for level in (0..levels).rev() {
            let radix = self.n - 1 - 2 * level;
            if self.digits[level] + 1 < radix {
                self.digits[level] += 1;
                return;
            }
            self.digits[level] = 0;
        }
        self.done = true;
    }
}

impl Iterator for Pairings {
    type Item = Pairing;

    fn next(&mut self) -> Option<Pairing> {
        if self.done {
            return None;
        }
        let out = self.decode();
        self.advance();
        Some(out)
    }
}

/// A partition of the positions `0..len` into non-empty blocks.
///
/// Canonical form: each block ascending, blocks ordered by their minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block sizes in non-increasing order, e.g. `[3, 2]`.
    pub fn shape(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    fn from_rgs(rgs: &[usize], num_blocks: usize) -> Self {
        let mut blocks = vec![Vec::new(); num_blocks];
        for (pos, &b) in rgs.iter().enumerate() {
            blocks[b].push(pos);
        }
        Partition { blocks }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            write!(f, "{{{}}}", block.iter().join(","))?;
        }
        Ok(())
    }
}

/// Lazy stream over all `Bell(len)` set partitions, in lexicographic order of
/// their restricted growth strings.
#[derive(Clone, Debug)]
pub struct SetPartitions {
    // rgs[i] is the block of position i; max_prefix[i] = max(rgs[..i]).
    rgs: Vec<usize>,
    max_prefix: Vec<usize>,
    first: bool,
    done: bool,
}

/// Enumerates every set partition of `0..len`.
///
/// `len == 0` yields exactly one partition with no blocks, which keeps the
/// empty product well-defined for callers.
pub fn enumerate_set_partitions(len: usize) -> SetPartitions {
    SetPartitions {
        rgs: vec![0; len],
        max_prefix: vec![0; len],
        first: true,
        done: false,
    }
}

impl Iterator for SetPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let len = self.rgs.len();
        if self.first {
            self.first = false;
            return Some(Partition::from_rgs(&self.rgs, usize::from(len > 0)));
        }
        // Find the rightmost position that can still grow.
        let mut i = len;
        loop {
            if i <= 1 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.rgs[i] <= self.max_prefix[i] {
                break;
            }
        }
        self.rgs[i] += 1;
        let top = self.max_prefix[i].max(self.rgs[i]);
        for j in i + 1..len {
            self.rgs[j] = 0;
            self.max_prefix[j] = top;
        }
        Some(Partition::from_rgs(&self.rgs, top + 1))
    }
}

/// Pairings produced by the fix / permute / flip / shift construction for
/// `k` doublets `{0,1}, {2,3}, ..., {2k-2, 2k-1}`.
///
/// The first doublet stays put; the other `k-1` are taken in every order and
/// with every orientation, the resulting `2k` positions are rotated left by
/// one, and consecutive elements are re-paired. That gives `(k-1)! 2^(k-1)`
/// pairings, none of which contains an original doublet.
pub fn enumerate_scheme_pairings(k: usize) -> Result<impl Iterator<Item = Pairing>, Error> {
    if k < 2 {
        return Err(Error::SchemeTooSmall(k));
    }
    let rest = k - 1;
    let iter = (1..k).permutations(rest).flat_map(move |order| {
        (0..1u64 << rest).map(move |flips| {
            let mut seq = Vec::with_capacity(2 * k);
            seq.extend([0, 1]);
            for (slot, &d) in order.iter().enumerate() {
                let (a, b) = (2 * d, 2 * d + 1);
                if flips >> slot & 1 == 1 {
                    seq.extend([b, a]);
                } else {
                    seq.extend([a, b]);
                }
            }
            seq.rotate_left(1);
            Pairing::from_pairs(seq.chunks_exact(2).map(|c| (c[0], c[1])))
                .expect("rotation of a perfect matching sequence is a perfect matching")
        })
    });
    Ok(iter)
}

/// Pairings of `2k` positions that avoid every original doublet
/// `{2j, 2j+1}`. Kept for comparison with [`enumerate_scheme_pairings`]: from
/// `k = 4` on this set also contains matchings that leave the doublets in
/// disconnected clusters.
pub fn pairings_avoiding_doublets(k: usize) -> impl Iterator<Item = Pairing> {
    enumerate_pairings(2 * k).filter(move |p| (0..k).all(|j| !p.contains_pair(2 * j, 2 * j + 1)))
}

/// `(n-1)!!` for even `n`, zero for odd `n`.
pub fn double_factorial_odd(n: usize) -> u128 {
    if n % 2 == 1 {
        return 0;
    }
    (1..n as u128).step_by(2).product()
}

/// Bell numbers via the Bell triangle.
pub fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let prev = *next.last().unwrap();
            next.push(prev + x);
        }
        row = next;
    }
    row[0]
}
