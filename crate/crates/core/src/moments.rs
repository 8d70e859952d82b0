//! Gaussian product moments `E(X_i1 ... X_in)` by Wick pairing.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use num_bigint::BigInt;

use crate::error::Error;
use crate::polyalg::{CovSymbol, Poly};
use crate::Index;

/// Sorted multiset of variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexList(Vec<Index>);

impl IndexList {
    pub fn new<I: IntoIterator<Item = Index>>(indices: I) -> Result<Self, Error> {
        let mut v: Vec<Index> = indices.into_iter().collect();
        if v.contains(&0) {
            return Err(Error::ZeroIndex);
        }
        v.sort_unstable();
        Ok(IndexList(v))
    }

    pub fn as_slice(&self) -> &[Index] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for IndexList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(","))
    }
}

/// Moment by the plain positional recursion: pair the first index with every
/// other position, multiply by the moment of what is left, and sum.
pub fn moment(ix: &IndexList) -> Poly {
    positional(ix.as_slice())
}

fn positional(ix: &[Index]) -> Poly {
    match ix.len() {
        0 => return Poly::one(),
        n if n % 2 == 1 => return Poly::zero(),
        _ => {}
    }
    let first = ix[0];
    let mut rest = Vec::with_capacity(ix.len() - 2);
    let mut total = Poly::zero();
    for i in 1..ix.len() {
        rest.clear();
        rest.extend_from_slice(&ix[1..i]);
        rest.extend_from_slice(&ix[i + 1..]);
        total += &positional(&rest).mul_symbol(CovSymbol::new(first, ix[i]));
    }
    total
}

/// Shared memo table for [`moment_memoized`], keyed on the sorted index
/// multiset. Safe to share between threads; concurrent misses on the same key
/// may both compute, and both store the same value.
#[derive(Debug, Default)]
pub struct MomentCache {
    table: Mutex<HashMap<IndexList, Arc<Poly>>>,
}

impl MomentCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &[Index]) -> Option<Arc<Poly>> {
        // IndexList borrows as a slice only through its field, so build a key.
        self.table.lock().unwrap().get(&IndexList(key.to_vec())).cloned()
    }

    fn insert(&self, key: &[Index], value: Arc<Poly>) {
        self.table.lock().unwrap().insert(IndexList(key.to_vec()), value);
    }
}

/// Same result as [`moment`], computed through `cache`. Partners with equal
/// labels lead to the same sub-moment, so each distinct partner label is
/// visited once and weighted by its multiplicity.
pub fn moment_memoized(ix: &IndexList, cache: &MomentCache) -> Arc<Poly> {
    memoized(ix.as_slice(), cache)
}

fn memoized(ix: &[Index], cache: &MomentCache) -> Arc<Poly> {
    match ix.len() {
        0 => return Arc::new(Poly::one()),
        n if n % 2 == 1 => return Arc::new(Poly::zero()),
        _ => {}
    }
    if let Some(hit) = cache.get(ix) {
        return hit;
    }
    let first = ix[0];
    let tail = &ix[1..];
    let mut total = Poly::zero();
    let mut rest = Vec::with_capacity(ix.len() - 2);
    let mut start = 0;
    while start < tail.len() {
        let label = tail[start];
        let end = start + tail[start..].iter().take_while(|&&x| x == label).count();
        rest.clear();
        rest.extend_from_slice(&tail[..start]);
        rest.extend_from_slice(&tail[start + 1..]);
        let sub = memoized(&rest, cache);
        let term = sub.mul_symbol(CovSymbol::new(first, label));
        let mult = end - start;
        if mult == 1 {
            total += &term;
        } else {
            total += &term.scale(BigInt::from(mult));
        }
        start = end;
    }
    let total = Arc::new(total);
    cache.insert(ix, Arc::clone(&total));
    total
}
