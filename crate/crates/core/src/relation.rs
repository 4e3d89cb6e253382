//! Finite domains, tuples and weighted relations.
//!
//! A weighted relation is a partial map from `D^r` to exact weights. Tuples
//! missing from the table are infeasible; there is no separate infinity
//! value. Tables are kept sorted lexicographically so that iteration and
//! serialization are deterministic.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use num_traits::Zero;

use crate::error::{checked_pow, Error, Result};
use crate::scalar::Scalar;

/// Largest supported domain size (elements are stored as `u8`).
pub const MAX_DOMAIN: usize = 256;

/// The domain `{0, .., d-1}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Domain(usize);

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_DOMAIN {
            return Err(Error::input(format!(
                "domain size must be in 1..={MAX_DOMAIN}, got {size}"
            )));
        }
        Ok(Domain(size))
    }

    pub fn boolean() -> Self {
        Domain(2)
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn contains(self, v: u8) -> bool {
        (v as usize) < self.0
    }

    /// Number of `r`-tuples, `None` on overflow.
    pub fn tuple_count(self, r: usize) -> Option<usize> {
        checked_pow(self.0, r)
    }

    /// Lexicographic rank of `t` among the tuples of its length.
    pub fn rank(self, t: &[u8]) -> usize {
        t.iter().fold(0, |acc, &v| acc * self.0 + v as usize)
    }

    pub fn unrank(self, mut rank: usize, r: usize) -> Tuple {
        let mut out = vec![0u8; r];
        for slot in out.iter_mut().rev() {
            *slot = (rank % self.0) as u8;
            rank /= self.0;
        }
        Tuple(out)
    }

    /// All `r`-tuples in lexicographic order.
    pub fn tuples(self, r: usize) -> TupleIter {
        TupleIter {
            d: self.0 as u8,
            next: Some(vec![0; r]),
        }
    }

    pub(crate) fn check_tuple(self, t: &[u8], arity: usize) -> Result<()> {
        if t.len() != arity {
            return Err(Error::input(format!(
                "tuple {} has arity {}, expected {arity}",
                Tuple::fmt_slice(t),
                t.len()
            )));
        }
        if let Some(v) = t.iter().find(|&&v| !self.contains(v)) {
            return Err(Error::input(format!(
                "element {v} outside domain of size {}",
                self.0
            )));
        }
        Ok(())
    }
}

/// Odometer over `D^r` in lexicographic order.
pub struct TupleIter {
    d: u8,
    next: Option<Vec<u8>>,
}

impl Iterator for TupleIter {
    type Item = Tuple;

    fn next(&mut self) -> Option<Tuple> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.d {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(Tuple(cur))
    }
}

/// A tuple of domain elements. Tuples of equal length compare
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Tuple(pub Vec<u8>);

impl Tuple {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    fn fmt_slice(t: &[u8]) -> String {
        let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

impl Borrow<[u8]> for Tuple {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl Deref for Tuple {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for Tuple {
    fn from(v: Vec<u8>) -> Self {
        Tuple(v)
    }
}

impl From<&[u8]> for Tuple {
    fn from(v: &[u8]) -> Self {
        Tuple(v.to_vec())
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Tuple::fmt_slice(&self.0))
    }
}

/// A partial function `D^r -> S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedRelation<S> {
    domain: Domain,
    arity: usize,
    table: BTreeMap<Tuple, S>,
}

impl<S: Scalar> WeightedRelation<S> {
    /// Builds a relation from its defined tuples. Duplicate tuples are an
    /// input error.
    pub fn new<I, T>(domain: Domain, arity: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, S)>,
        T: Into<Tuple>,
    {
        let mut table = BTreeMap::new();
        for (t, w) in entries {
            let t = t.into();
            domain.check_tuple(&t, arity)?;
            if table.insert(t.clone(), w).is_some() {
                return Err(Error::input(format!("tuple {t} listed twice")));
            }
        }
        Ok(WeightedRelation {
            domain,
            arity,
            table,
        })
    }

    /// Tabulates `f` over all of `D^arity`, in lexicographic order.
    pub fn from_fn(domain: Domain, arity: usize, mut f: impl FnMut(&[u8]) -> Option<S>) -> Self {
        let table = domain
            .tuples(arity)
            .filter_map(|t| f(&t).map(|w| (t, w)))
            .collect();
        WeightedRelation {
            domain,
            arity,
            table,
        }
    }

    /// The relation defined nowhere.
    pub fn empty(domain: Domain, arity: usize) -> Self {
        WeightedRelation {
            domain,
            arity,
            table: BTreeMap::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of defined tuples.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.domain.tuple_count(self.arity) == Some(self.table.len())
    }

    /// True when every defined value is zero.
    pub fn is_crisp(&self) -> bool {
        self.table.values().all(Zero::is_zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &S)> {
        self.table.iter()
    }

    /// Defined tuples in lexicographic order.
    pub fn defined_tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.table.keys()
    }

    pub fn get(&self, t: &[u8]) -> Option<&S> {
        self.table.get(t)
    }

    pub fn is_defined(&self, t: &[u8]) -> bool {
        self.table.contains_key(t)
    }

    /// Weight at `t`, `None` where undefined.
    pub fn eval(&self, t: &[u8]) -> Result<Option<S>> {
        if t.len() != self.arity {
            return Err(Error::input(format!(
                "cannot evaluate arity-{} relation at a tuple of length {}",
                self.arity,
                t.len()
            )));
        }
        Ok(self.table.get(t).cloned())
    }

    /// `x -> self(x at map1) + other(x at map2)` over arity `arity`,
    /// defined where both summands are.
    pub fn add(
        &self,
        other: &WeightedRelation<S>,
        map1: &[usize],
        map2: &[usize],
        arity: usize,
    ) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::input("cannot add relations over different domains"));
        }
        for (map, rel) in [(map1, self), (map2, other)] {
            if map.len() != rel.arity {
                return Err(Error::input(format!(
                    "argument map of length {} for a relation of arity {}",
                    map.len(),
                    rel.arity
                )));
            }
            if let Some(&i) = map.iter().find(|&&i| i >= arity) {
                return Err(Error::input(format!(
                    "argument index {i} out of range for arity {arity}"
                )));
            }
        }
        let pick = |x: &[u8], map: &[usize]| -> Vec<u8> { map.iter().map(|&i| x[i]).collect() };
        Ok(Self::from_fn(self.domain, arity, |x| {
            let a = self.table.get(pick(x, map1).as_slice())?;
            let b = other.table.get(pick(x, map2).as_slice())?;
            Some(a.clone() + b.clone())
        }))
    }

    /// Minimizes over argument `arg`, giving a relation of arity `r - 1`.
    pub fn minimize(&self, arg: usize) -> Result<Self> {
        if self.arity == 0 {
            return Err(Error::input("cannot minimize an arity-0 relation"));
        }
        if arg >= self.arity {
            return Err(Error::input(format!(
                "argument {arg} out of range for arity {}",
                self.arity
            )));
        }
        let mut table: BTreeMap<Tuple, S> = BTreeMap::new();
        for (t, w) in &self.table {
            let mut key = t.0.clone();
            key.remove(arg);
            table
                .entry(Tuple(key))
                .and_modify(|cur| {
                    if w < cur {
                        *cur = w.clone();
                    }
                })
                .or_insert_with(|| w.clone());
        }
        Ok(WeightedRelation {
            domain: self.domain,
            arity: self.arity - 1,
            table,
        })
    }

    /// `alpha * self + beta` with `alpha >= 0`.
    pub fn scale_shift(&self, alpha: &S, beta: &S) -> Result<Self> {
        if alpha.is_negative() {
            return Err(Error::input(format!("scale factor {alpha} is negative")));
        }
        Ok(self.map_values(|w| alpha.clone() * w.clone() + beta.clone()))
    }

    /// The zero-valued relation with the same defined tuples.
    pub fn feasibility(&self) -> Self {
        self.map_values(|_| S::zero())
    }

    fn map_values(&self, f: impl Fn(&S) -> S) -> Self {
        WeightedRelation {
            domain: self.domain,
            arity: self.arity,
            table: self.table.iter().map(|(t, w)| (t.clone(), f(w))).collect(),
        }
    }

    /// Binary relation defined exactly on the diagonal, with weight 0.
    pub fn weighted_equality(domain: Domain) -> Self {
        Self::from_fn(domain, 2, |t| (t[0] == t[1]).then(S::zero))
    }

    /// `0` when both arguments agree, `1` otherwise. Its VCSP is MIN-CUT.
    pub fn soft_equal(domain: Domain) -> Self {
        Self::from_fn(domain, 2, |t| {
            Some(if t[0] == t[1] { S::zero() } else { S::one() })
        })
    }

    /// `0` when the arguments differ, `1` otherwise. Its VCSP is MAX-CUT.
    pub fn soft_not_equal(domain: Domain) -> Self {
        Self::from_fn(domain, 2, |t| {
            Some(if t[0] != t[1] { S::zero() } else { S::one() })
        })
    }

    /// Zero-valued relation defined exactly on `tuples`.
    pub fn crisp<I, T>(domain: Domain, arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Tuple>,
    {
        Self::new(domain, arity, tuples.into_iter().map(|t| (t, S::zero())))
    }

    /// Dense lookup table indexed by tuple rank.
    pub fn dense(&self) -> DenseRelation<S> {
        let n = self
            .domain
            .tuple_count(self.arity)
            .expect("dense table size overflows");
        let mut values = vec![None; n];
        for (t, w) in &self.table {
            values[self.domain.rank(t)] = Some(w.clone());
        }
        DenseRelation {
            domain: self.domain,
            arity: self.arity,
            values,
        }
    }

    pub(crate) fn weights(&self) -> impl Iterator<Item = &S> {
        self.table.values()
    }
}

/// Rank-indexed copy of a weighted relation, for hot evaluation loops.
#[derive(Clone, Debug)]
pub struct DenseRelation<S> {
    domain: Domain,
    arity: usize,
    values: Vec<Option<S>>,
}

impl<S: Scalar> DenseRelation<S> {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn at_rank(&self, rank: usize) -> Option<&S> {
        self.values[rank].as_ref()
    }

    #[inline]
    pub fn get(&self, t: &[u8]) -> Option<&S> {
        self.values[self.domain.rank(t)].as_ref()
    }

    #[inline]
    pub fn defined_at_rank(&self, rank: usize) -> bool {
        self.values[rank].is_some()
    }
}
