//! Joint cumulants of products of centered Gaussian variables.
//!
//! The general route sums over set partitions of the argument positions
//! with weights `(-1)^(i-1) (i-1)!`, multiplying the moments of the merged
//! blocks. Because every odd-order Gaussian moment is zero, partitions with
//! an odd-sized block are skipped before any moment is computed.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinat::{enumerate_scheme_pairings, enumerate_set_partitions};
use crate::error::Error;
use crate::moments::{moment_memoized, IndexList, MomentCache};
use crate::polyalg::{CovSymbol, Monomial, Poly};
use crate::Index;

/// Default ceiling on the total number of indices in one query.
pub const DEFAULT_MAX_ORDER: usize = 16;

/// One cumulant argument: the product of the listed variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group(Vec<Index>);

impl Group {
    pub fn new<I: IntoIterator<Item = Index>>(indices: I) -> Result<Self, Error> {
        let mut v: Vec<Index> = indices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if v.contains(&0) {
            return Err(Error::ZeroIndex);
        }
        v.sort_unstable();
        Ok(Group(v))
    }

    pub fn singlet(i: Index) -> Result<Self, Error> {
        Group::new([i])
    }

    pub fn indices(&self) -> &[Index] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singlet(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_singlet() {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "({})", self.0.iter().join(","))
        }
    }
}

/// Ordered list of cumulant arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CumulantQuery {
    groups: Vec<Group>,
}

impl CumulantQuery {
    pub fn new(groups: Vec<Group>) -> Result<Self, Error> {
        if groups.is_empty() {
            return Err(Error::EmptyQuery);
        }
        Ok(CumulantQuery { groups })
    }

    /// Convenience constructor from nested index slices.
    pub fn from_slices(groups: &[&[Index]]) -> Result<Self, Error> {
        let groups = groups
            .iter()
            .map(|g| Group::new(g.iter().copied()))
            .collect::<Result<Vec<_>, _>>()?;
        CumulantQuery::new(groups)
    }

    /// The canonical doublets `(1,2), (3,4), ..., (2k-1,2k)`.
    pub fn doublets(k: usize) -> Result<Self, Error> {
        let groups = (0..k as Index)
            .map(|j| Group::new([2 * j + 1, 2 * j + 2]))
            .collect::<Result<Vec<_>, _>>()?;
        CumulantQuery::new(groups)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Total number of indices over all arguments.
    pub fn order(&self) -> usize {
        self.groups.iter().map(Group::len).sum()
    }

    fn merged(&self, block: &[usize]) -> IndexList {
        IndexList::new(block.iter().flat_map(|&g| self.groups[g].0.iter().copied()))
            .expect("group indices are already validated")
    }
}

impl fmt::Display for CumulantQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.groups.iter().join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    /// Largest accepted total index count.
    pub max_order: usize,
    /// Skip partitions with odd blocks. Turning this off gives the plain
    /// reference sum over every set partition.
    pub pruned: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_order: DEFAULT_MAX_ORDER,
            pruned: true,
        }
    }
}

/// Partition-formula cumulant engine with a shared moment cache.
///
/// The partition loop runs on the current rayon pool; the result does not
/// depend on the number of threads.
#[derive(Debug, Default)]
pub struct CumulantEngine {
    config: EngineConfig,
    cache: MomentCache,
}

impl CumulantEngine {
    pub fn new(config: EngineConfig) -> Self {
        CumulantEngine {
            config,
            cache: MomentCache::new(),
        }
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    pub fn moment(&self, ix: &IndexList) -> Result<Poly, Error> {
        self.check_order(ix.len())?;
        Ok((*moment_memoized(ix, &self.cache)).clone())
    }

    pub fn cumulant(&self, q: &CumulantQuery) -> Result<Poly, Error> {
        self.check_order(q.order())?;
        if self.config.pruned {
            Ok(self.cumulant_pruned(q))
        } else {
            Ok(self.cumulant_reference(q))
        }
    }

    fn check_order(&self, order: usize) -> Result<(), Error> {
        if order > self.config.max_order {
            return Err(Error::OrderLimit {
                order,
                limit: self.config.max_order,
            });
        }
        Ok(())
    }

    fn cumulant_pruned(&self, q: &CumulantQuery) -> Poly {
        if q.order() % 2 == 1 {
            return Poly::zero();
        }
        let weights: Vec<usize> = q.groups.iter().map(Group::len).collect();
        // Partitions that merge into the same multiset of index lists give
        // the same product; fold their weights together first.
        let mut products: BTreeMap<Vec<IndexList>, BigInt> = BTreeMap::new();
        for_each_even_partition(&weights, &mut |blocks| {
            let mut key: Vec<IndexList> = blocks.iter().map(|b| q.merged(b)).collect();
            key.sort_unstable();
            *products.entry(key).or_default() += partition_weight(blocks.len());
        });
        products
            .into_par_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(blocks, w)| self.block_product(&blocks).scale(w))
            .reduce(Poly::zero, |a, b| a + b)
    }

    fn cumulant_reference(&self, q: &CumulantQuery) -> Poly {
        let mut total = Poly::zero();
        for partition in enumerate_set_partitions(q.groups.len()) {
            let blocks: Vec<IndexList> = partition.blocks().iter().map(|b| q.merged(b)).collect();
            let term = self.block_product(&blocks).scale(partition_weight(blocks.len()));
            total += &term;
        }
        total
    }

    fn block_product(&self, blocks: &[IndexList]) -> Poly {
        let mut acc = Poly::one();
        for b in blocks {
            let m = moment_memoized(b, &self.cache);
            if m.is_zero() {
                return Poly::zero();
            }
            acc = &acc * &m;
        }
        acc
    }

    /// Finite check of the unit-coefficient property on a distinct-index
    /// query: every coefficient of the cumulant must be 0 or 1.
    pub fn check_unit_coefficients(&self, q: &CumulantQuery) -> Result<UnitCoefficientCheck, Error> {
        let mut seen = HashSet::new();
        for &i in q.groups.iter().flat_map(|g| g.0.iter()) {
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex { index: i });
            }
        }
        let k = self.cumulant(q)?;
        let one = BigInt::one();
        let witness = k
            .terms()
            .find(|(_, c)| **c != one)
            .map(|(m, c)| (m.clone(), c.clone()));
        Ok(UnitCoefficientCheck {
            holds: witness.is_none(),
            term_count: k.term_count(),
            witness,
        })
    }
}

/// Outcome of [`CumulantEngine::check_unit_coefficients`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitCoefficientCheck {
    pub holds: bool,
    pub term_count: usize,
    /// First offending monomial and its coefficient, in display order.
    pub witness: Option<(Monomial, BigInt)>,
}

/// `(-1)^(i-1) (i-1)!` for a partition with `i` blocks.
pub fn partition_weight(blocks: usize) -> BigInt {
    let mut w = BigInt::one();
    for j in 1..blocks {
        w *= BigInt::from(j);
    }
    if blocks.is_multiple_of(2) {
        -w
    } else {
        w
    }
}

// Visits every set partition of 0..weights.len() whose blocks all have even
// total weight. The block holding the smallest unassigned position is chosen
// first, so each partition is produced exactly once.
fn for_each_even_partition(weights: &[usize], visit: &mut dyn FnMut(&[Vec<usize>])) {
    fn recurse(
        remaining: &[usize],
        weights: &[usize],
        blocks: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(&[Vec<usize>]),
    ) {
        let Some((&first, others)) = remaining.split_first() else {
            visit(blocks);
            return;
        };
        for mask in 0u64..1 << others.len() {
            let mut block = vec![first];
            let mut rest = Vec::with_capacity(others.len());
            let mut weight = weights[first];
            for (bit, &pos) in others.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    block.push(pos);
                    weight += weights[pos];
                } else {
                    rest.push(pos);
                }
            }
            if weight % 2 == 1 {
                continue;
            }
            blocks.push(block);
            recurse(&rest, weights, blocks, visit);
            blocks.pop();
        }
    }
    let all: Vec<usize> = (0..weights.len()).collect();
    recurse(&all, weights, &mut Vec::new(), visit);
}

/// Cumulant of the canonical doublets `(1,2), ..., (2k-1,2k)` summed directly
/// over the pairings of the fix / permute / flip / shift construction.
pub fn cumulant_doublets_direct(k: usize) -> Result<Poly, Error> {
    match k {
        0 => Err(Error::EmptyQuery),
        1 => Ok(Poly::symbol(1, 2)),
        _ => Ok(Poly::from_terms(enumerate_scheme_pairings(k)?.map(|p| {
            let factors = p
                .pairs()
                .iter()
                .map(|&(a, b)| CovSymbol::new(a as Index + 1, b as Index + 1));
            (Monomial::from_factors(factors), BigInt::one())
        }))),
    }
}

/// Result of the singlet/doublet shortcut rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixedRule {
    Zero,
    /// Two singlets merged into one doublet; same cumulant as the input.
    Collapsed(CumulantQuery),
    NoRule,
}

/// Shortcut rules for queries made only of singlets and doublets: one or
/// more than two singlets give zero, and exactly two singlets `i`, `j` may be
/// replaced by the doublet `(i,j)`. Queries with any larger group get
/// `NoRule`, since the rules fail there (e.g. one singlet with one triplet).
pub fn apply_mixed_rules(q: &CumulantQuery) -> MixedRule {
    if q.groups.iter().any(|g| g.len() > 2) {
        return MixedRule::NoRule;
    }
    let singlets: Vec<usize> = q.groups.iter().positions(|g| g.is_singlet()).collect();
    match singlets.as_slice() {
        [] => MixedRule::NoRule,
        [a, b] => {
            let merged = Group::new([q.groups[*a].0[0], q.groups[*b].0[0]])
                .expect("two valid indices form a valid group");
            let mut groups = Vec::with_capacity(q.groups.len() - 1);
            for (pos, g) in q.groups.iter().enumerate() {
                if pos == *a {
                    groups.push(merged.clone());
                } else if pos != *b {
                    groups.push(g.clone());
                }
            }
            MixedRule::Collapsed(CumulantQuery { groups })
        }
        _ => MixedRule::Zero,
    }
}

/// Groups the set partitions of an `len`-element set by block-size shape and
/// sums the partition weights per shape. For identical indices these are the
/// coefficients of the moment products in the univariate cumulant, e.g.
/// shape `[3, 2]` gives `-10` at `len = 5`.
pub fn moments_to_cumulants_structural_check(len: usize) -> BTreeMap<Vec<usize>, BigInt> {
    let mut out: BTreeMap<Vec<usize>, BigInt> = BTreeMap::new();
    for p in enumerate_set_partitions(len) {
        *out.entry(p.shape()).or_default() += partition_weight(p.num_blocks());
    }
    out
}

/// Every distinct index used by the query.
pub fn query_indices(q: &CumulantQuery) -> BTreeSet<Index> {
    q.groups.iter().flat_map(|g| g.0.iter().copied()).collect()
}
