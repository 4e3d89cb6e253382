//! Finitary operations, superposition and clones.
//!
//! An [`Operation`] is stored as its full value table, indexed by the
//! lexicographic rank of the input tuple; two operations are the same
//! exactly when their tables agree. Argument positions are 0-based
//! throughout, so `projection(d, k, 0)` is the first projection `e_1`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{checked_pow, Error, Result};
use crate::relation::{Domain, Tuple};

/// A total `k`-ary operation `D^k -> D`, `k >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    domain: Domain,
    arity: usize,
    table: Vec<u8>,
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Op[d={} k={}:", self.domain.size(), self.arity)?;
        for v in &self.table {
            write!(f, " {v}")?;
        }
        write!(f, "]")
    }
}

/// Category of a sharp ternary operation, read off its values on
/// `(x,x,y)`, `(x,y,x)` and `(y,x,x)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TernarySharpKind {
    Majority,
    Minority,
    Pixley,
    Semiprojection,
}

impl Operation {
    pub fn new(domain: Domain, arity: usize, table: Vec<u8>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::input("operations must have arity at least 1"));
        }
        let expected = domain
            .tuple_count(arity)
            .ok_or_else(|| Error::input(format!("arity {arity} too large")))?;
        if table.len() != expected {
            return Err(Error::input(format!(
                "operation table has {} entries, expected {expected}",
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| !domain.contains(v)) {
            return Err(Error::input(format!(
                "operation value {v} outside domain of size {}",
                domain.size()
            )));
        }
        Ok(Operation {
            domain,
            arity,
            table,
        })
    }

    /// Tabulates `f`. Panics if `f` leaves the domain.
    pub fn from_fn(domain: Domain, arity: usize, f: impl Fn(&[u8]) -> u8) -> Self {
        assert!(arity >= 1);
        let table: Vec<u8> = domain.tuples(arity).map(|t| f(&t)).collect();
        assert!(table.iter().all(|&v| domain.contains(v)));
        Operation {
            domain,
            arity,
            table,
        }
    }

    /// The projection onto argument `i` (0-based).
    pub fn projection(domain: Domain, arity: usize, i: usize) -> Result<Self> {
        if i >= arity {
            return Err(Error::input(format!(
                "projection index {i} out of range for arity {arity}"
            )));
        }
        Ok(Self::from_fn(domain, arity, |x| x[i]))
    }

    /// All `arity` projections, in index order.
    pub fn projections(domain: Domain, arity: usize) -> Vec<Self> {
        (0..arity)
            .map(|i| Self::from_fn(domain, arity, |x| x[i]))
            .collect()
    }

    pub fn constant(domain: Domain, arity: usize, value: u8) -> Self {
        Self::from_fn(domain, arity, |_| value)
    }

    pub fn min(domain: Domain) -> Self {
        Self::from_fn(domain, 2, |x| x[0].min(x[1]))
    }

    pub fn max(domain: Domain) -> Self {
        Self::from_fn(domain, 2, |x| x[0].max(x[1]))
    }

    /// Boolean negation `x -> 1 - x`.
    pub fn inversion() -> Self {
        Self::from_fn(Domain::boolean(), 1, |x| 1 - x[0])
    }

    /// The Boolean majority operation.
    pub fn majority() -> Self {
        Self::from_fn(Domain::boolean(), 3, |x| u8::from(x[0] + x[1] + x[2] >= 2))
    }

    /// The Boolean minority operation `x ^ y ^ z`.
    pub fn minority() -> Self {
        Self::from_fn(Domain::boolean(), 3, |x| x[0] ^ x[1] ^ x[2])
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn eval(&self, args: &[u8]) -> u8 {
        debug_assert_eq!(args.len(), self.arity);
        self.table[self.domain.rank(args)]
    }

    #[inline]
    pub fn eval_rank(&self, rank: usize) -> u8 {
        self.table[rank]
    }

    /// `f[g_1, .., g_k]`: the operation `x -> f(g_1(x), .., g_k(x))`.
    pub fn superpose(&self, gs: &[Operation]) -> Result<Operation> {
        if gs.len() != self.arity {
            return Err(Error::input(format!(
                "superposition of an arity-{} operation with {} operations",
                self.arity,
                gs.len()
            )));
        }
        let inner = gs[0].arity;
        if let Some(g) = gs
            .iter()
            .find(|g| g.arity != inner || g.domain != self.domain)
        {
            return Err(Error::input(format!(
                "inner operation {g:?} does not match arity {inner} and the outer domain"
            )));
        }
        Ok(self.superpose_unchecked(gs))
    }

    pub(crate) fn superpose_unchecked(&self, gs: &[Operation]) -> Operation {
        let d = self.domain.size();
        let n = gs[0].table.len();
        let table = (0..n)
            .map(|x| {
                let rank = gs.iter().fold(0, |acc, g| acc * d + g.table[x] as usize);
                self.table[rank]
            })
            .collect();
        Operation {
            domain: self.domain,
            arity: gs[0].arity,
            table,
        }
    }

    /// Coordinatewise application to `k` tuples of equal length.
    pub fn apply_to_tuples(&self, xs: &[&[u8]]) -> Result<Tuple> {
        if xs.len() != self.arity {
            return Err(Error::input(format!(
                "applying an arity-{} operation to {} tuples",
                self.arity,
                xs.len()
            )));
        }
        let r = xs[0].len();
        if xs.iter().any(|x| x.len() != r) {
            return Err(Error::input("tuples of unequal length"));
        }
        let d = self.domain.size();
        Ok(Tuple(
            (0..r)
                .map(|c| {
                    let rank = xs.iter().fold(0, |acc, x| acc * d + x[c] as usize);
                    self.table[rank]
                })
                .collect(),
        ))
    }

    /// The index `i` with `self = e_i`, if any.
    pub fn projection_index(&self) -> Option<usize> {
        (0..self.arity).find(|&i| {
            self.domain
                .tuples(self.arity)
                .zip(&self.table)
                .all(|(x, &v)| x[i] == v)
        })
    }

    pub fn is_projection(&self) -> bool {
        self.projection_index().is_some()
    }

    /// `f(x, .., x) = x` for every `x`.
    pub fn is_idempotent(&self) -> bool {
        (0..self.domain.size() as u8).all(|x| self.eval(&vec![x; self.arity]) == x)
    }

    /// The `(k-1)`-ary operation obtained by feeding argument `i` into
    /// position `j` as well (`i < j < k`).
    pub fn identify(&self, i: usize, j: usize) -> Result<Operation> {
        if !(i < j && j < self.arity) {
            return Err(Error::input(format!(
                "cannot identify positions {i} and {j} of an arity-{} operation",
                self.arity
            )));
        }
        Ok(self.superpose_unchecked(&identification_list(self.domain, self.arity, i, j)))
    }

    /// All identifications `(i, j, result)` with `i < j`.
    pub fn identifications(&self) -> Vec<(usize, usize, Operation)> {
        let mut out = Vec::new();
        for j in 1..self.arity {
            for i in 0..j {
                out.push((i, j, self.identify(i, j).expect("valid positions")));
            }
        }
        out
    }

    /// Not a projection, but every identification of two arguments is.
    pub fn is_sharp(&self) -> Result<bool> {
        if self.arity < 2 {
            return Err(Error::input("sharpness needs arity at least 2"));
        }
        Ok(!self.is_projection()
            && self
                .identifications()
                .iter()
                .all(|(_, _, g)| g.is_projection()))
    }

    pub fn classify_ternary_sharp(&self) -> Result<TernarySharpKind> {
        if self.arity != 3 || !self.is_sharp()? {
            return Err(Error::input(
                "classification needs a sharp ternary operation",
            ));
        }
        let d = self.domain.size() as u8;
        let mut pattern: Option<[bool; 3]> = None;
        for x in 0..d {
            for y in (0..d).filter(|&y| y != x) {
                // true means the value is y, i.e. the "y" row of the table
                let p = [
                    self.eval(&[x, x, y]) == y,
                    self.eval(&[x, y, x]) == y,
                    self.eval(&[y, x, x]) == y,
                ];
                match pattern {
                    None => pattern = Some(p),
                    Some(q) if q != p => {
                        return Err(Error::internal(format!(
                            "sharp operation {self:?} has an inconsistent identification pattern"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let Some(p) = pattern else {
            return Err(Error::input("a one-element domain has no sharp operations"));
        };
        Ok(match p.iter().filter(|&&b| b).count() {
            0 => TernarySharpKind::Majority,
            3 => TernarySharpKind::Minority,
            2 => TernarySharpKind::Pixley,
            _ => TernarySharpKind::Semiprojection,
        })
    }

    /// The index `i` with `f(x) = x_i` on every input with a repeated
    /// value, if one exists.
    fn agreeing_projection_on_repeats(&self) -> Option<usize> {
        let repeats: Vec<(Tuple, u8)> = self
            .domain
            .tuples(self.arity)
            .zip(self.table.iter().copied())
            .filter(|(x, _)| has_repeat(x))
            .collect();
        (0..self.arity).find(|&i| repeats.iter().all(|(x, v)| x[i] == *v))
    }

    pub fn is_semiprojection(&self) -> Result<bool> {
        if self.arity < 3 {
            return Err(Error::input("semiprojections need arity at least 3"));
        }
        Ok(!self.is_projection() && self.agreeing_projection_on_repeats().is_some())
    }

    /// For an operation of arity at least 4 all of whose identifications are
    /// projections, checks that those projections coincide. Always true for
    /// valid input; a `false` would contradict Świerczkowski's lemma.
    pub fn swierczkowski_check(&self) -> Result<bool> {
        if self.arity < 4 {
            return Err(Error::input("the check needs arity at least 4"));
        }
        if let Some((i, j, _)) = self
            .identifications()
            .into_iter()
            .find(|(_, _, g)| !g.is_projection())
        {
            return Err(Error::input(format!(
                "identifying positions {i} and {j} does not give a projection"
            )));
        }
        Ok(self.agreeing_projection_on_repeats().is_some())
    }
}

/// The `(k-1)`-ary projection list whose superposition identifies
/// positions `i < j` of a `k`-ary operation.
pub fn identification_list(domain: Domain, k: usize, i: usize, j: usize) -> Vec<Operation> {
    let proj = Operation::projections(domain, k - 1);
    (0..k)
        .map(|p| match p.cmp(&j) {
            std::cmp::Ordering::Less => proj[p].clone(),
            std::cmp::Ordering::Equal => proj[i].clone(),
            std::cmp::Ordering::Greater => proj[p - 1].clone(),
        })
        .collect()
}

fn has_repeat(x: &[u8]) -> bool {
    (1..x.len()).any(|j| x[..j].contains(&x[j]))
}

/// The slices `C^(1), .., C^(A)` of a clone `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloneSlices {
    domain: Domain,
    slices: Vec<BTreeSet<Operation>>,
}

/// Default cap on the number of operations in one slice.
pub const DEFAULT_MAX_OPS: usize = 1 << 20;

impl CloneSlices {
    /// The projection clone `J_D` up to arity `cap`.
    pub fn projections_only(domain: Domain, cap: usize) -> Self {
        CloneSlices {
            domain,
            slices: (1..=cap)
                .map(|k| Operation::projections(domain, k).into_iter().collect())
                .collect(),
        }
    }

    /// Wraps explicitly given slices (index 0 holds the unary operations).
    /// Each slice must hold operations of its arity and all projections;
    /// closure under superposition is the caller's claim, see
    /// [`CloneSlices::check_closure`].
    pub fn from_slices(domain: Domain, slices: Vec<BTreeSet<Operation>>) -> Result<Self> {
        for (idx, slice) in slices.iter().enumerate() {
            let k = idx + 1;
            if let Some(f) = slice.iter().find(|f| f.arity != k || f.domain != domain) {
                return Err(Error::input(format!("{f:?} does not belong in slice {k}")));
            }
            if Operation::projections(domain, k)
                .iter()
                .any(|e| !slice.contains(e))
            {
                return Err(Error::input(format!("slice {k} is missing a projection")));
            }
        }
        Ok(CloneSlices { domain, slices })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity_cap(&self) -> usize {
        self.slices.len()
    }

    /// The `k`-ary slice, if `1 <= k <= cap`.
    pub fn slice(&self, k: usize) -> Option<&BTreeSet<Operation>> {
        k.checked_sub(1).and_then(|i| self.slices.get(i))
    }

    pub fn contains(&self, f: &Operation) -> bool {
        f.domain == self.domain && self.slice(f.arity).is_some_and(|s| s.contains(f))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.slices.iter().map(BTreeSet::len).collect()
    }

    /// Re-checks closure under superposition among the represented arities
    /// by brute force. Returns the first counterexample.
    pub fn check_closure(&self) -> std::result::Result<(), (Operation, Vec<Operation>)> {
        for outer in &self.slices {
            for f in outer {
                for inner in &self.slices {
                    let pool: Vec<&Operation> = inner.iter().collect();
                    let mut found = None;
                    for_each_tuple(pool.len(), f.arity, |idx| {
                        if found.is_some() {
                            return;
                        }
                        let gs: Vec<Operation> = idx.iter().map(|&i| pool[i].clone()).collect();
                        let h = f.superpose_unchecked(&gs);
                        if !inner.contains(&h) {
                            found = Some(gs);
                        }
                    });
                    if let Some(gs) = found {
                        return Err((f.clone(), gs));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Visits every tuple in `[0, n)^len` in lexicographic order.
pub(crate) fn for_each_tuple(n: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    if len > 0 && n == 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    loop {
        visit(&idx);
        let mut p = len;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < n {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// The slices of arities `1..=arity_cap` of the clone generated by `gens`.
///
/// Each slice is computed as the closure of the projections of that arity
/// under application of the generators, so it is the exact slice of
/// `Clone(gens)` and does not depend on the cap. Slices larger than
/// `max_ops` are a resource error.
pub fn clone_generate(
    domain: Domain,
    gens: &[Operation],
    arity_cap: usize,
    max_ops: usize,
) -> Result<CloneSlices> {
    if arity_cap == 0 {
        return Err(Error::input("arity cap must be at least 1"));
    }
    for g in gens {
        if g.domain != domain {
            return Err(Error::input("generators must share the domain"));
        }
        if g.arity > arity_cap {
            return Err(Error::input(format!(
                "generator of arity {} exceeds the arity cap {arity_cap}",
                g.arity
            )));
        }
    }
    let mut gens: Vec<Operation> = gens.to_vec();
    gens.sort();
    gens.dedup();
    let slices = (1..=arity_cap)
        .map(|l| term_closure(domain, &gens, l, max_ops))
        .collect::<Result<Vec<_>>>()?;
    Ok(CloneSlices { domain, slices })
}

fn term_closure(
    domain: Domain,
    gens: &[Operation],
    arity: usize,
    max_ops: usize,
) -> Result<BTreeSet<Operation>> {
    if checked_pow(domain.size(), arity).is_none() {
        return Err(Error::resource(
            "operation table",
            format!("{}^{arity}", domain.size()),
            max_ops,
        ));
    }
    let mut all = Operation::projections(domain, arity);
    let mut seen: HashSet<Operation> = all.iter().cloned().collect();
    let mut fresh_from = 0;
    loop {
        let end = all.len();
        let mut added = Vec::new();
        for g in gens {
            // tuples over [0, end) with at least one index in [fresh_from, end)
            for first_new in 0..g.arity {
                let ranges: Vec<(usize, usize)> = (0..g.arity)
                    .map(|p| match p.cmp(&first_new) {
                        std::cmp::Ordering::Less => (0, fresh_from),
                        std::cmp::Ordering::Equal => (fresh_from, end),
                        std::cmp::Ordering::Greater => (0, end),
                    })
                    .collect();
                let mut overflow = false;
                for_each_in_ranges(&ranges, |idx| {
                    if overflow {
                        return;
                    }
                    let args: Vec<Operation> = idx.iter().map(|&i| all[i].clone()).collect();
                    let h = g.superpose_unchecked(&args);
                    if seen.insert(h.clone()) {
                        added.push(h);
                        if seen.len() > max_ops {
                            overflow = true;
                        }
                    }
                });
                if overflow {
                    return Err(Error::resource(
                        "clone slice size",
                        format!("more than {max_ops}"),
                        max_ops,
                    ));
                }
            }
        }
        if added.is_empty() {
            break;
        }
        fresh_from = end;
        all.extend(added);
    }
    Ok(all.into_iter().collect())
}

fn for_each_in_ranges(ranges: &[(usize, usize)], mut visit: impl FnMut(&[usize])) {
    if ranges.iter().any(|&(lo, hi)| lo >= hi) {
        return;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        visit(&idx);
        let mut p = ranges.len();
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < ranges[p].1 {
                break;
            }
            idx[p] = ranges[p].0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b() -> Domain {
        Domain::boolean()
    }

    fn d(n: usize) -> Domain {
        Domain::new(n).unwrap()
    }

    #[test]
    fn projection_examples() {
        let e1 = Operation::projection(b(), 2, 0).unwrap();
        assert_eq!(e1.table(), &[0, 0, 1, 1]);
        let id = Operation::projection(b(), 1, 0).unwrap();
        assert_eq!(id.table(), &[0, 1]);
        let e2 = Operation::projection(d(3), 2, 1).unwrap();
        for x in d(3).tuples(2) {
            assert_eq!(e2.eval(&x), x[1]);
        }
        assert!(Operation::projection(b(), 2, 2).is_err());
    }

    #[test]
    fn new_validates() {
        assert!(Operation::new(b(), 2, vec![0, 1, 1]).is_err());
        assert!(Operation::new(b(), 1, vec![0, 2]).is_err());
        assert!(Operation::new(b(), 0, vec![0]).is_err());
        assert!(Operation::new(b(), 1, vec![1, 0]).is_ok());
    }

    #[test]
    fn superposition_examples() {
        let p = Operation::projections(b(), 2);
        let max = Operation::max(b());
        let min = Operation::min(b());
        assert_eq!(p[0].superpose(&[min.clone(), max.clone()]).unwrap(), min);
        assert_eq!(max.superpose(&[p[1].clone(), p[0].clone()]).unwrap(), max);
        let p3 = Operation::projections(b(), 3);
        let m12 = max.superpose(&[p3[0].clone(), p3[1].clone()]).unwrap();
        for x in b().tuples(3) {
            assert_eq!(m12.eval(&x), x[0].max(x[1]));
        }
        assert!(max.superpose(&[p[0].clone()]).is_err());
        assert!(max.superpose(&[p[0].clone(), p3[0].clone()]).is_err());
    }

    #[test]
    fn apply_to_tuples_examples() {
        let min = Operation::min(b());
        assert_eq!(
            min.apply_to_tuples(&[&[0, 1], &[1, 0]]).unwrap().0,
            vec![0, 0]
        );
        let e2 = Operation::projection(b(), 2, 1).unwrap();
        assert_eq!(
            e2.apply_to_tuples(&[&[0, 1], &[1, 0]]).unwrap().0,
            vec![1, 0]
        );
        let mnr = Operation::minority();
        assert_eq!(
            mnr.apply_to_tuples(&[&[0, 0], &[0, 1], &[1, 1]]).unwrap().0,
            vec![1, 0]
        );
        assert!(min.apply_to_tuples(&[&[0, 1]]).is_err());
        assert!(min.apply_to_tuples(&[&[0, 1], &[1]]).is_err());
    }

    #[test]
    fn clone_of_max() {
        let max = Operation::max(b());
        let c2 = clone_generate(b(), std::slice::from_ref(&max), 2, DEFAULT_MAX_OPS).unwrap();
        let s2 = c2.slice(2).unwrap();
        assert_eq!(s2.len(), 3);
        assert!(s2.contains(&max));

        // ternary slice: maxima over nonempty coordinate subsets
        let c3 = clone_generate(b(), &[max], 3, DEFAULT_MAX_OPS).unwrap();
        let expected: BTreeSet<Operation> = (1u8..8)
            .map(|mask| {
                Operation::from_fn(b(), 3, |x| {
                    (0..3)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| x[i])
                        .max()
                        .unwrap()
                })
            })
            .collect();
        assert_eq!(c3.slice(3).unwrap(), &expected);
        assert!(c3.check_closure().is_ok());
    }

    #[test]
    fn clone_of_nothing_is_projections() {
        let c = clone_generate(b(), &[], 2, DEFAULT_MAX_OPS).unwrap();
        assert_eq!(c, CloneSlices::projections_only(b(), 2));
        assert_eq!(c.sizes(), vec![1, 2]);
    }

    #[test]
    fn clone_generate_errors() {
        let maj = Operation::majority();
        assert!(clone_generate(b(), &[maj], 2, DEFAULT_MAX_OPS).is_err());
        let all_binary: Vec<Operation> = (0..16u8)
            .map(|m| Operation::new(b(), 2, (0..4).map(|i| (m >> i) & 1).collect()).unwrap())
            .collect();
        let err = clone_generate(b(), &all_binary, 3, 100).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn lattice_clone_four_ary_slice() {
        // free distributive lattice on 4 generators has 166 elements
        let c = clone_generate(
            b(),
            &[Operation::min(b()), Operation::max(b())],
            4,
            DEFAULT_MAX_OPS,
        )
        .unwrap();
        assert_eq!(c.sizes(), vec![1, 4, 18, 166]);
    }

    #[test]
    fn idempotence() {
        assert!(Operation::max(b()).is_idempotent());
        assert!(!Operation::constant(b(), 1, 0).is_idempotent());
        assert!(Operation::minority().is_idempotent());
    }

    #[test]
    fn sharp_examples() {
        assert!(Operation::max(b()).is_sharp().unwrap());
        assert!(!Operation::projection(b(), 2, 0)
            .unwrap()
            .is_sharp()
            .unwrap());
        assert!(Operation::minority().is_sharp().unwrap());
        assert!(Operation::inversion().is_sharp().is_err());
    }

    #[test]
    fn ternary_classification_examples() {
        assert_eq!(
            Operation::majority().classify_ternary_sharp().unwrap(),
            TernarySharpKind::Majority
        );
        assert_eq!(
            Operation::minority().classify_ternary_sharp().unwrap(),
            TernarySharpKind::Minority
        );
        // (x,x,y) -> x, (x,y,x) -> y, (y,x,x) -> y
        let pixley = Operation::from_fn(b(), 3, |a| {
            if a[0] == a[1] {
                a[0]
            } else if a[0] == a[2] {
                a[1]
            } else {
                a[0]
            }
        });
        assert_eq!(
            pixley.classify_ternary_sharp().unwrap(),
            TernarySharpKind::Pixley
        );
        assert!(Operation::projection(b(), 3, 0)
            .unwrap()
            .classify_ternary_sharp()
            .is_err());
    }

    #[test]
    fn boolean_ternary_sharp_census() {
        let mut counts = std::collections::BTreeMap::new();
        for m in 0u16..256 {
            let f = Operation::new(b(), 3, (0..8).map(|i| ((m >> i) & 1) as u8).collect()).unwrap();
            assert!(!f.is_semiprojection().unwrap());
            if f.is_sharp().unwrap() {
                *counts
                    .entry(f.classify_ternary_sharp().unwrap())
                    .or_insert(0) += 1;
            }
        }
        assert_eq!(counts.get(&TernarySharpKind::Majority), Some(&1));
        assert_eq!(counts.get(&TernarySharpKind::Minority), Some(&1));
        assert_eq!(counts.get(&TernarySharpKind::Pixley), Some(&3));
        assert_eq!(counts.get(&TernarySharpKind::Semiprojection), None);
    }

    #[test]
    fn semiprojection_examples() {
        let f = Operation::from_fn(d(3), 3, |x| if x == [0, 1, 2] { 1 } else { x[0] });
        assert!(f.is_semiprojection().unwrap());
        assert!(f.is_sharp().unwrap());
        assert_eq!(
            f.classify_ternary_sharp().unwrap(),
            TernarySharpKind::Semiprojection
        );
        assert!(!Operation::projection(d(3), 3, 0)
            .unwrap()
            .is_semiprojection()
            .unwrap());
        assert!(Operation::max(b()).is_semiprojection().is_err());
    }

    #[test]
    fn swierczkowski_examples() {
        for n in [2, 3, 5] {
            assert!(Operation::projection(d(n), 4, 1)
                .unwrap()
                .swierczkowski_check()
                .unwrap());
        }
        let semi = Operation::from_fn(d(5), 4, |x| if has_repeat(x) { x[0] } else { x[1] });
        assert!(semi.is_semiprojection().unwrap());
        assert!(semi.swierczkowski_check().unwrap());
        assert!(Operation::majority().swierczkowski_check().is_err());
        let bad = Operation::from_fn(b(), 4, |x| x[0] & x[1]);
        assert!(bad.swierczkowski_check().is_err());
    }

    #[test]
    fn swierczkowski_random_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0;
        for n in [3usize, 5] {
            for _ in 0..300 {
                // mix of two projections on repeated inputs, random elsewhere
                let i = rng.gen_range(0..4);
                let j = rng.gen_range(0..4);
                let flip: u64 = rng.gen();
                let table: Vec<u8> = d(n)
                    .tuples(4)
                    .enumerate()
                    .map(|(r, x)| {
                        if has_repeat(&x) {
                            if (flip >> (r % 64)) & 1 == 1 && rng.gen_bool(0.02) {
                                x[j]
                            } else {
                                x[i]
                            }
                        } else {
                            rng.gen_range(0..n as u8)
                        }
                    })
                    .collect();
                let f = Operation::new(d(n), 4, table).unwrap();
                if f.identifications()
                    .iter()
                    .all(|(_, _, g)| g.is_projection())
                {
                    hits += 1;
                    assert!(f.swierczkowski_check().unwrap());
                }
            }
        }
        assert!(hits > 100);
    }

    fn arb_op(arity: usize) -> impl Strategy<Value = Operation> {
        let n = 1usize << arity;
        proptest::collection::vec(0u8..2, n)
            .prop_map(move |t| Operation::new(Domain::boolean(), arity, t).unwrap())
    }

    proptest! {
        #[test]
        fn projection_absorption(gs in proptest::collection::vec(arb_op(2), 3), i in 0usize..3) {
            let e = Operation::projection(Domain::boolean(), 3, i).unwrap();
            prop_assert_eq!(e.superpose(&gs).unwrap(), gs[i].clone());
        }

        #[test]
        fn superposition_associative(f in arb_op(2), gs in proptest::collection::vec(arb_op(3), 2),
                                     hs in proptest::collection::vec(arb_op(2), 3)) {
            let lhs = f.superpose(&gs).unwrap().superpose(&hs).unwrap();
            let inner: Vec<Operation> = gs.iter().map(|g| g.superpose(&hs).unwrap()).collect();
            prop_assert_eq!(lhs, f.superpose(&inner).unwrap());
        }

        #[test]
        fn generated_slices_are_closed(gens in proptest::collection::vec(arb_op(2), 0..3)) {
            let c = clone_generate(Domain::boolean(), &gens, 2, DEFAULT_MAX_OPS).unwrap();
            prop_assert!(c.check_closure().is_ok());
            for g in &gens {
                prop_assert!(c.contains(g));
            }
        }
    }
}
