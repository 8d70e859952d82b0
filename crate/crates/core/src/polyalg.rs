//! Sparse polynomials in covariance symbols with big-integer coefficients.
//!
//! A [`Poly`] maps canonical [`Monomial`]s to nonzero [`BigInt`]s. Terms are
//! kept in display order (total degree first, then lexicographic on the
//! sorted factor list), so iteration order is stable everywhere.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Index;

/// Covariance symbol `V[lo,hi]`; the pair is unordered so `lo <= hi` always.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CovSymbol {
    lo: Index,
    hi: Index,
}

impl CovSymbol {
    pub fn new(i: Index, j: Index) -> Self {
        if i <= j {
            CovSymbol { lo: i, hi: j }
        } else {
            CovSymbol { lo: j, hi: i }
        }
    }

    pub fn lo(self) -> Index {
        self.lo
    }

    pub fn hi(self) -> Index {
        self.hi
    }

    /// A variance `V[i,i]`.
    pub fn is_diagonal(self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for CovSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V[{},{}]", self.lo, self.hi)
    }
}

/// Product of covariance symbols, stored as a sorted multiset.
/// The empty product is the constant monomial `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<CovSymbol>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn from_factors<I: IntoIterator<Item = CovSymbol>>(factors: I) -> Self {
        let mut factors: Vec<CovSymbol> = factors.into_iter().collect();
        factors.sort_unstable();
        Monomial { factors }
    }

    /// Sorted factors with repetition.
    pub fn factors(&self) -> &[CovSymbol] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Distinct factors with their exponents, in sorted order.
    pub fn powers(&self) -> Vec<(CovSymbol, u32)> {
        let mut out: Vec<(CovSymbol, u32)> = Vec::new();
        for &s in &self.factors {
            match out.last_mut() {
                Some((last, e)) if *last == s => *e += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }

    fn times_symbol(&self, s: CovSymbol) -> Monomial {
        let at = self.factors.partition_point(|&f| f <= s);
        let mut factors = Vec::with_capacity(self.factors.len() + 1);
        factors.extend_from_slice(&self.factors[..at]);
        factors.push(s);
        factors.extend_from_slice(&self.factors[at..]);
        Monomial { factors }
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.factors, &other.factors);
        let mut factors = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                factors.push(a[i]);
                i += 1;
            } else {
                factors.push(b[j]);
                j += 1;
            }
        }
        factors.extend_from_slice(&a[i..]);
        factors.extend_from_slice(&b[j..]);
        Monomial { factors }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Integer-coefficient polynomial in covariance symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c.into());
        p
    }

    /// The single symbol `V[i,j]`.
    pub fn symbol(i: Index, j: Index) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::from_factors([CovSymbol::new(i, j)]), BigInt::one());
        p
    }

    /// Collects `(monomial, coefficient)` pairs, merging duplicates and
    /// dropping zeros.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, BigInt)>,
    {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of monomials with a nonzero coefficient.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in display order.
    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Every index that occurs in some symbol.
    pub fn indices(&self) -> BTreeSet<Index> {
        self.terms
            .keys()
            .flat_map(|m| m.factors.iter().flat_map(|s| [s.lo, s.hi]))
            .collect()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> Poly {
        let c = c.into();
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * &c)).collect(),
        }
    }

    /// `V[i,j] * self`.
    pub fn mul_symbol(&self, s: CovSymbol) -> Poly {
        // Inserting the same symbol into distinct sorted multisets keeps them
        // distinct, so no merging is needed.
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.times_symbol(s), c.clone()))
                .collect(),
        }
    }

    /// Replaces every variance `V[i,i]` by 1, turning covariances into
    /// correlations for standardized variables.
    pub fn substitute_diagonal_one(&self) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let kept = m.factors.iter().copied().filter(|s| !s.is_diagonal());
            (
                Monomial {
                    factors: kept.collect(),
                },
                c.clone(),
            )
        }))
    }

    /// Renames indices inside every symbol. Fails if `map` is undefined on an
    /// index that occurs in the polynomial.
    pub fn relabel<F>(&self, map: F) -> Result<Poly, Error>
    where
        F: Fn(Index) -> Option<Index>,
    {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut factors = Vec::with_capacity(m.degree());
            for s in &m.factors {
                let lo = map(s.lo).ok_or(Error::UnmappedIndex(s.lo))?;
                let hi = map(s.hi).ok_or(Error::UnmappedIndex(s.hi))?;
                factors.push(CovSymbol::new(lo, hi));
            }
            out.add_term(Monomial::from_factors(factors), c.clone());
        }
        Ok(out)
    }

    /// Evaluates with `value(symbol)` substituted for each covariance symbol.
    /// Terms are summed in display order.
    pub fn evaluate<F, E>(&self, mut value: F) -> Result<f64, E>
    where
        F: FnMut(CovSymbol) -> Result<f64, E>,
    {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(if c.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            });
            for (s, e) in m.powers() {
                t *= value(s)?.powi(e as i32);
            }
            total += t;
        }
        Ok(total)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;

    fn add(mut self, rhs: Poly) -> Poly {
        if self.terms.len() < rhs.terms.len() {
            return rhs + self;
        }
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        out
    }
}

/// Plain-text rendering, e.g. `3*V[2,2]*V[2,8]*V[5,5] + 6*V[2,5]^2*V[2,8]`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (n, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let abs = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if m.is_one() || !abs.is_one() {
                parts.push(abs.to_string());
            }
            for (s, e) in m.powers() {
                if e == 1 {
                    parts.push(s.to_string());
                } else {
                    parts.push(format!("{s}^{e}"));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}
