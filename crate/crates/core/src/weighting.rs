//! Weightings of clone slices and weighted polymorphisms.
//!
//! A weighting carries its support explicitly: the finite set of `k`-ary
//! operations it is defined on, which always contains the `k` projections.
//! Weights sum to zero, and a [`Weighting`] may be negative only on
//! projections. A [`RawWeighting`] drops the sign condition; superpositions
//! produce raw weightings and [`RawWeighting::into_proper`] is the checked
//! conversion back.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lp::{solve_farkas_lazy, LinearSystem, LpLimits, LpOutcome, Row, RowKind};
use crate::operation::{clone_generate, CloneSlices, Operation};
use crate::polymorphism::{
    for_each_sequence, image_rank, pol_k, polymorphism_violation, sequence_count, PolLimits,
};
use crate::relation::{Domain, Tuple, WeightedRelation};
use crate::scalar::Scalar;

/// A sum-zero weighting with no sign condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawWeighting<S> {
    domain: Domain,
    arity: usize,
    weights: BTreeMap<Operation, S>,
}

impl<S: Scalar> RawWeighting<S> {
    /// Builds a weighting from `(operation, weight)` pairs. Projections not
    /// listed are added with weight zero.
    pub fn new(
        domain: Domain,
        arity: usize,
        entries: impl IntoIterator<Item = (Operation, S)>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::input("weightings must have arity at least 1"));
        }
        let mut weights = BTreeMap::new();
        for (f, w) in entries {
            if f.domain() != domain || f.arity() != arity {
                return Err(Error::input(format!(
                    "{f:?} does not belong to a {arity}-ary weighting on this domain"
                )));
            }
            if weights.insert(f.clone(), w).is_some() {
                return Err(Error::input(format!("{f:?} listed twice")));
            }
        }
        for e in Operation::projections(domain, arity) {
            weights.entry(e).or_insert_with(S::zero);
        }
        let raw = RawWeighting {
            domain,
            arity,
            weights,
        };
        if !raw.total().is_zero() {
            return Err(Error::input(format!(
                "weights sum to {}, not 0",
                raw.total()
            )));
        }
        Ok(raw)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn support(&self) -> impl Iterator<Item = &Operation> {
        self.weights.keys()
    }

    pub fn support_set(&self) -> BTreeSet<Operation> {
        self.weights.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Operation, &S)> {
        self.weights.iter()
    }

    pub fn weight(&self, f: &Operation) -> Option<&S> {
        self.weights.get(f)
    }

    pub fn total(&self) -> S {
        self.weights.values().fold(S::zero(), |a, w| a + w.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.weights.values().all(|w| w.is_zero())
    }

    /// Support operations with negative weight that are not projections.
    pub fn negative_non_projections(&self) -> Vec<Operation> {
        self.weights
            .iter()
            .filter(|(f, w)| w.is_negative() && !f.is_projection())
            .map(|(f, _)| f.clone())
            .collect()
    }

    /// Non-projections with positive weight.
    pub fn positive_non_projections(&self) -> Vec<Operation> {
        self.weights
            .iter()
            .filter(|(f, w)| w.is_positive() && !f.is_projection())
            .map(|(f, _)| f.clone())
            .collect()
    }

    /// The checked conversion to a [`Weighting`].
    pub fn into_proper(self) -> Option<Weighting<S>> {
        self.negative_non_projections()
            .is_empty()
            .then_some(Weighting { raw: self })
    }

    pub fn is_proper(&self) -> bool {
        self.negative_non_projections().is_empty()
    }

    /// Pointwise multiple; any sign is allowed on raw weightings.
    pub fn scaled(&self, c: &S) -> Self {
        RawWeighting {
            domain: self.domain,
            arity: self.arity,
            weights: self
                .weights
                .iter()
                .map(|(f, w)| (f.clone(), c.clone() * w.clone()))
                .collect(),
        }
    }

    /// Pointwise sum; supports must coincide.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.domain != other.domain
            || self.arity != other.arity
            || !self.weights.keys().eq(other.weights.keys())
        {
            return Err(Error::input("weightings have different supports"));
        }
        Ok(RawWeighting {
            domain: self.domain,
            arity: self.arity,
            weights: self
                .weights
                .iter()
                .zip(other.weights.values())
                .map(|((f, a), b)| (f.clone(), a.clone() + b.clone()))
                .collect(),
        })
    }

    /// The same weights on a larger support, zero on the new operations.
    pub fn extend_to(&self, support: &BTreeSet<Operation>) -> Result<Self> {
        if let Some(f) = self.weights.keys().find(|f| !support.contains(f)) {
            return Err(Error::input(format!("{f:?} is not in the new support")));
        }
        let mut weights = self.weights.clone();
        for f in support {
            if f.domain() != self.domain || f.arity() != self.arity {
                return Err(Error::input(format!("{f:?} has the wrong arity or domain")));
            }
            weights.entry(f.clone()).or_insert_with(S::zero);
        }
        Ok(RawWeighting {
            domain: self.domain,
            arity: self.arity,
            weights,
        })
    }

    /// Same non-zero weights, ignoring operations weighted zero.
    pub fn same_values(&self, other: &Self) -> bool {
        let nz = |w: &Self| -> Vec<(Operation, S)> {
            w.weights
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(f, v)| (f.clone(), v.clone()))
                .collect()
        };
        self.domain == other.domain && self.arity == other.arity && nz(self) == nz(other)
    }

    /// `self[g_1, .., g_k]` supported on `target`, which must contain every
    /// `f[g_1, .., g_k]` for `f` in the support.
    pub fn superpose_onto(&self, gs: &[Operation], target: &BTreeSet<Operation>) -> Result<Self> {
        if gs.len() != self.arity {
            return Err(Error::input(format!(
                "superposing a {}-ary weighting with {} operations",
                self.arity,
                gs.len()
            )));
        }
        let l = gs[0].arity();
        if gs
            .iter()
            .any(|g| g.arity() != l || g.domain() != self.domain)
        {
            return Err(Error::input("inner operations must share arity and domain"));
        }
        let mut weights: BTreeMap<Operation, S> = BTreeMap::new();
        for t in target {
            if t.arity() != l || t.domain() != self.domain {
                return Err(Error::input(format!("{t:?} does not fit the target slice")));
            }
            weights.insert(t.clone(), S::zero());
        }
        for e in Operation::projections(self.domain, l) {
            if !weights.contains_key(&e) {
                return Err(Error::input("the target slice is missing a projection"));
            }
        }
        for (f, w) in &self.weights {
            let h = f.superpose_unchecked(gs);
            match weights.get_mut(&h) {
                Some(acc) => *acc = acc.clone() + w.clone(),
                None => {
                    return Err(Error::input(format!(
                        "superposition {h:?} falls outside the target slice"
                    )))
                }
            }
        }
        Ok(RawWeighting {
            domain: self.domain,
            arity: l,
            weights,
        })
    }

    /// `self[g_1, .., g_k]` supported on exactly the images and the
    /// projections of the new arity.
    pub fn superpose_free(&self, gs: &[Operation]) -> Result<Self> {
        let l = gs.first().map(Operation::arity).unwrap_or(0);
        let mut target: BTreeSet<Operation> = Operation::projections(self.domain, l.max(1))
            .into_iter()
            .collect();
        if gs.len() == self.arity && gs.iter().all(|g| g.arity() == l) {
            target.extend(self.weights.keys().map(|f| f.superpose_unchecked(gs)));
        }
        self.superpose_onto(gs, &target)
    }
}

/// A weighting: sum zero, negative only on projections.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weighting<S> {
    raw: RawWeighting<S>,
}

impl<S> Deref for Weighting<S> {
    type Target = RawWeighting<S>;

    fn deref(&self) -> &RawWeighting<S> {
        &self.raw
    }
}

impl<S: Scalar> Weighting<S> {
    pub fn new(
        domain: Domain,
        arity: usize,
        entries: impl IntoIterator<Item = (Operation, S)>,
    ) -> Result<Self> {
        let raw = RawWeighting::new(domain, arity, entries)?;
        match raw.negative_non_projections().first() {
            Some(f) => Err(Error::input(format!(
                "negative weight on the non-projection {f:?}"
            ))),
            None => Ok(Weighting { raw }),
        }
    }

    /// The zero weighting on the given support (projections are added).
    pub fn zero(
        domain: Domain,
        arity: usize,
        support: impl IntoIterator<Item = Operation>,
    ) -> Result<Self> {
        Self::new(domain, arity, support.into_iter().map(|f| (f, S::zero())))
    }

    pub fn as_raw(&self) -> &RawWeighting<S> {
        &self.raw
    }

    pub fn into_raw(self) -> RawWeighting<S> {
        self.raw
    }

    /// Assigns positive weight to some non-projection.
    pub fn is_positive(&self) -> bool {
        !self.positive_non_projections().is_empty()
    }

    pub fn extend_to(&self, support: &BTreeSet<Operation>) -> Result<Self> {
        Ok(Weighting {
            raw: self.raw.extend_to(support)?,
        })
    }
}

/// `c * omega` for `c >= 0`.
pub fn wt_scale<S: Scalar>(omega: &Weighting<S>, c: &S) -> Result<Weighting<S>> {
    if c.is_negative() {
        return Err(Error::input(format!("scale factor {c} is negative")));
    }
    Ok(Weighting {
        raw: omega.raw.scaled(c),
    })
}

/// Pointwise sum of two weightings with the same support.
pub fn wt_add<S: Scalar>(a: &Weighting<S>, b: &Weighting<S>) -> Result<Weighting<S>> {
    Ok(Weighting {
        raw: a.raw.sum(&b.raw)?,
    })
}

/// The superposition `omega[g_1, .., g_k]`, supported on the slice of
/// `slices` of the inner arity.
pub fn wt_superpose<S: Scalar>(
    omega: &RawWeighting<S>,
    gs: &[Operation],
    slices: &CloneSlices,
) -> Result<RawWeighting<S>> {
    let outer = slices
        .slice(omega.arity())
        .ok_or_else(|| Error::input("the weighting's arity exceeds the clone slices"))?;
    if let Some(f) = omega.support().find(|f| !outer.contains(f)) {
        return Err(Error::input(format!(
            "support operation {f:?} is not in the clone"
        )));
    }
    let l = gs.first().map(Operation::arity).unwrap_or(0);
    let inner = slices
        .slice(l)
        .ok_or_else(|| Error::input("the inner arity exceeds the clone slices"))?;
    if let Some(g) = gs.iter().find(|g| !inner.contains(g)) {
        return Err(Error::input(format!(
            "inner operation {g:?} is not in the clone"
        )));
    }
    omega.superpose_onto(gs, inner)
}

/// Outcome of checking one weighting against one relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WpolVerdict<S> {
    Improves,
    /// A support operation maps these defined tuples to an undefined one.
    NotPolymorphism {
        op: Operation,
        tuples: Vec<Tuple>,
    },
    /// The first tuple sequence (in lexicographic order) with a positive sum.
    Violates {
        tuples: Vec<Tuple>,
        sum: S,
    },
}

impl<S> WpolVerdict<S> {
    pub fn improves(&self) -> bool {
        matches!(self, WpolVerdict::Improves)
    }
}

/// Largest relation arity evaluated through a dense rank table.
const DENSE_LIMIT: usize = 1 << 22;

pub(crate) enum Lookup<'a, S> {
    Dense(crate::relation::DenseRelation<S>),
    Sparse(&'a WeightedRelation<S>),
}

impl<'a, S: Scalar> Lookup<'a, S> {
    pub(crate) fn new(rho: &'a WeightedRelation<S>) -> Self {
        match rho.domain().tuple_count(rho.arity()) {
            Some(n) if n <= DENSE_LIMIT => Lookup::Dense(rho.dense()),
            _ => Lookup::Sparse(rho),
        }
    }
}

/// `rho(f(cols))`, `None` when undefined.
pub(crate) fn image_value<S: Scalar>(
    lookup: &Lookup<'_, S>,
    f: &Operation,
    cols: &[usize],
) -> Option<S> {
    match lookup {
        Lookup::Dense(d) => d.at_rank(image_rank(f, cols)).cloned(),
        Lookup::Sparse(r) => {
            let t: Vec<u8> = cols.iter().map(|&c| f.eval_rank(c)).collect();
            r.get(&t).cloned()
        }
    }
}

/// Checks that every support operation of `omega` is a polymorphism of
/// `rho` and that `sum_f omega(f) rho(f(x_1..x_k)) <= 0` for every
/// sequence of defined tuples.
pub fn is_weighted_polymorphism<S: Scalar>(
    omega: &RawWeighting<S>,
    rho: &WeightedRelation<S>,
    max_sequences: usize,
) -> Result<WpolVerdict<S>> {
    if omega.domain() != rho.domain() {
        return Err(Error::input(
            "weighting and relation have different domains",
        ));
    }
    let k = omega.arity();
    sequence_count(rho, k, max_sequences)?;
    for f in omega.support() {
        if let Some(tuples) = polymorphism_violation(f, rho, max_sequences)? {
            return Ok(WpolVerdict::NotPolymorphism {
                op: f.clone(),
                tuples,
            });
        }
    }
    let lookup = Lookup::new(rho);
    let active: Vec<(&Operation, &S)> = omega.iter().filter(|(_, w)| !w.is_zero()).collect();
    let rows: Vec<&Tuple> = rho.defined_tuples().collect();
    let mut bad: Option<(Vec<usize>, S)> = None;
    let mut internal = false;
    for_each_sequence(rho, k, |idx, cols| {
        if bad.is_some() || internal {
            return;
        }
        let mut sum = S::zero();
        for (f, w) in &active {
            match image_value(&lookup, f, cols) {
                Some(v) => sum = sum + (*w).clone() * v,
                None => internal = true,
            }
        }
        if sum.is_positive() {
            bad = Some((idx.to_vec(), sum));
        }
    });
    if internal {
        return Err(Error::internal(
            "image undefined after the polymorphism check",
        ));
    }
    Ok(match bad {
        None => WpolVerdict::Improves,
        Some((idx, sum)) => WpolVerdict::Violates {
            tuples: idx.iter().map(|&i| rows[i].clone()).collect(),
            sum,
        },
    })
}

/// Improves every relation of `gamma`.
pub fn improves_all<S: Scalar>(
    omega: &RawWeighting<S>,
    gamma: &[WeightedRelation<S>],
    max_sequences: usize,
) -> Result<bool> {
    for rho in gamma {
        if !is_weighted_polymorphism(omega, rho, max_sequences)?.improves() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Zero-extends every weighting of `ws` to the matching slice of the clone
/// generated by the union of their supports.
pub fn zero_extend<S: Scalar>(
    domain: Domain,
    ws: &[Weighting<S>],
    arity_cap: usize,
    max_ops: usize,
) -> Result<(CloneSlices, Vec<Weighting<S>>)> {
    if let Some(w) = ws.iter().find(|w| w.domain() != domain) {
        return Err(Error::input(format!(
            "weighting over domain {} in a set over domain {}",
            w.domain().size(),
            domain.size()
        )));
    }
    let cap = ws
        .iter()
        .map(|w| w.arity())
        .max()
        .unwrap_or(1)
        .max(arity_cap);
    let gens: Vec<Operation> = ws
        .iter()
        .flat_map(|w| w.support().filter(|f| !f.is_projection()).cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let slices = clone_generate(domain, &gens, cap, max_ops)?;
    let extended = ws
        .iter()
        .map(|w| w.extend_to(slices.slice(w.arity()).expect("arity within cap")))
        .collect::<Result<Vec<_>>>()?;
    Ok((slices, extended))
}

/// Limits for [`find_positive_wpol`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchLimits {
    pub pol: PolLimits,
    pub lp: LpLimits,
}

/// Searches for a `k`-ary weighted polymorphism of every relation in
/// `gamma` that puts positive total weight on non-projections. The support
/// is all of `Pol^(k)(gamma)` and the non-projection weights are normalized
/// to sum to 1.
pub fn find_positive_wpol<S: Scalar>(
    domain: Domain,
    gamma: &[WeightedRelation<S>],
    k: usize,
    limits: SearchLimits,
) -> Result<Option<Weighting<S>>> {
    let pol: Vec<Operation> = pol_k(domain, gamma, k, limits.pol)?.into_iter().collect();
    if pol.iter().all(Operation::is_projection) {
        return Ok(None);
    }
    // variable layout: one per non-projection, two (+/-) per projection
    let mut var_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(pol.len());
    let mut n = 0;
    for f in &pol {
        if f.is_projection() {
            var_of.push((n, Some(n + 1)));
            n += 2;
        } else {
            var_of.push((n, None));
            n += 1;
        }
    }
    let signed = |coeff: &[(usize, S)]| -> Vec<(usize, S)> {
        let mut out = Vec::new();
        for (p, a) in coeff {
            let (plus, minus) = var_of[*p];
            out.push((plus, a.clone()));
            if let Some(m) = minus {
                out.push((m, -a.clone()));
            }
        }
        out
    };
    let mut sys = LinearSystem::new(n, false);
    let all: Vec<(usize, S)> = (0..pol.len()).map(|p| (p, S::one())).collect();
    sys.push(Row::new(RowKind::Eq, signed(&all), S::zero()))?;
    let nonproj: Vec<(usize, S)> = (0..pol.len())
        .filter(|&p| !pol[p].is_projection())
        .map(|p| (p, S::one()))
        .collect();
    sys.push(Row::new(RowKind::Eq, signed(&nonproj), S::one()))?;

    let mut seen: HashSet<Vec<(usize, S)>> = HashSet::new();
    for rho in gamma {
        sequence_count(rho, k, limits.pol.max_sequences)?;
        let lookup = Lookup::new(rho);
        let mut rows = Vec::new();
        for_each_sequence(rho, k, |_, cols| {
            let coeff: Vec<(usize, S)> = pol
                .iter()
                .enumerate()
                .filter_map(|(p, f)| {
                    let v = image_value(&lookup, f, cols)?;
                    (!v.is_zero()).then(|| (p, -v))
                })
                .collect();
            if !coeff.is_empty() && seen.insert(coeff.clone()) {
                rows.push(coeff);
            }
        });
        for coeff in rows {
            sys.push(Row::new(RowKind::Geq, signed(&coeff), S::zero()))?;
        }
    }

    match solve_farkas_lazy(&sys, limits.lp)? {
        LpOutcome::Certificate { .. } => Ok(None),
        LpOutcome::Solution { x, .. } => {
            let entries = pol.iter().zip(&var_of).map(|(f, (plus, minus))| {
                let w = match minus {
                    Some(m) => x[*plus].clone() - x[*m].clone(),
                    None => x[*plus].clone(),
                };
                (f.clone(), w)
            });
            let omega = Weighting::new(domain, k, entries)
                .map_err(|e| Error::internal(format!("LP produced an invalid weighting: {e}")))?;
            if !improves_all(&omega, gamma, limits.pol.max_sequences)? || !omega.is_positive() {
                return Err(Error::internal("positive weighting failed verification"));
            }
            Ok(Some(omega))
        }
    }
}

/// The nine canonical Boolean weightings.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanonicalTag {
    Const0,
    Const1,
    Inversion,
    MinOnly,
    MaxOnly,
    MinMaxEqual,
    MajorityOnly,
    MinorityOnly,
    MajMin21,
}

impl CanonicalTag {
    pub const ALL: [CanonicalTag; 9] = [
        CanonicalTag::Const0,
        CanonicalTag::Const1,
        CanonicalTag::Inversion,
        CanonicalTag::MinOnly,
        CanonicalTag::MaxOnly,
        CanonicalTag::MinMaxEqual,
        CanonicalTag::MajorityOnly,
        CanonicalTag::MinorityOnly,
        CanonicalTag::MajMin21,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalTag::Const0 => "Const0",
            CanonicalTag::Const1 => "Const1",
            CanonicalTag::Inversion => "Inversion",
            CanonicalTag::MinOnly => "MinOnly",
            CanonicalTag::MaxOnly => "MaxOnly",
            CanonicalTag::MinMaxEqual => "MinMaxEqual",
            CanonicalTag::MajorityOnly => "MajorityOnly",
            CanonicalTag::MinorityOnly => "MinorityOnly",
            CanonicalTag::MajMin21 => "MajMin21",
        }
    }
}

impl fmt::Display for CanonicalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CanonicalTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::input(format!("unknown canonical weighting `{s}`")))
    }
}

/// The Boolean canonical weighting for `tag`.
pub fn canonical_weighting<S: Scalar>(tag: CanonicalTag) -> Weighting<S> {
    let b = Domain::boolean();
    let q = S::from_i64;
    let (arity, named): (usize, Vec<(Operation, S)>) = match tag {
        CanonicalTag::Const0 => (1, vec![(Operation::constant(b, 1, 0), q(1))]),
        CanonicalTag::Const1 => (1, vec![(Operation::constant(b, 1, 1), q(1))]),
        CanonicalTag::Inversion => (1, vec![(Operation::inversion(), q(1))]),
        CanonicalTag::MinOnly => (2, vec![(Operation::min(b), q(2))]),
        CanonicalTag::MaxOnly => (2, vec![(Operation::max(b), q(2))]),
        CanonicalTag::MinMaxEqual => (
            2,
            vec![(Operation::min(b), q(1)), (Operation::max(b), q(1))],
        ),
        CanonicalTag::MajorityOnly => (3, vec![(Operation::majority(), q(3))]),
        CanonicalTag::MinorityOnly => (3, vec![(Operation::minority(), q(3))]),
        CanonicalTag::MajMin21 => (
            3,
            vec![(Operation::majority(), q(2)), (Operation::minority(), q(1))],
        ),
    };
    let entries = Operation::projections(b, arity)
        .into_iter()
        .map(|e| (e, q(-1)))
        .chain(named);
    Weighting::new(b, arity, entries).expect("canonical weightings are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type Rel = WeightedRelation<Rational>;
    type W = Weighting<Rational>;

    const CAP: usize = crate::polymorphism::DEFAULT_MAX_SEQUENCES;

    fn b() -> Domain {
        Domain::boolean()
    }

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn e(k: usize, i: usize) -> Operation {
        Operation::projection(b(), k, i).unwrap()
    }

    fn omega_sub() -> W {
        canonical_weighting(CanonicalTag::MinMaxEqual)
    }

    #[test]
    fn construction_checks() {
        assert!(W::new(b(), 2, [(e(2, 0), q(1))]).is_err());
        assert!(W::new(b(), 2, [(e(2, 0), q(1)), (Operation::max(b()), q(-1))]).is_err());
        assert!(RawWeighting::new(b(), 2, [(e(2, 0), q(1)), (Operation::max(b()), q(-1))]).is_ok());
        let z = W::zero(b(), 2, [Operation::max(b())]).unwrap();
        assert_eq!(z.len(), 3);
        assert!(z.is_zero());
    }

    #[test]
    fn scale_examples() {
        let s = omega_sub();
        let two = wt_scale(&s, &q(2)).unwrap();
        let vals: Vec<Rational> = two.iter().map(|(_, w)| w.clone()).collect();
        let mut sorted = vals.clone();
        sorted.sort();
        assert_eq!(sorted, vec![q(-2), q(-2), q(2), q(2)]);
        assert!(wt_scale(&s, &q(0)).unwrap().is_zero());
        let half = wt_scale(&s, &Rational::from_frac(1, 2)).unwrap();
        assert_eq!(
            half.weight(&Operation::min(b())),
            Some(&Rational::from_frac(1, 2))
        );
        assert!(wt_scale(&s, &q(-1)).is_err());
    }

    #[test]
    fn add_examples() {
        let s = omega_sub();
        assert_eq!(wt_add(&s, &wt_scale(&s, &q(0)).unwrap()).unwrap(), s);
        let support: BTreeSet<Operation> = s.support_set();
        let mn = canonical_weighting::<Rational>(CanonicalTag::MinOnly)
            .extend_to(&support)
            .unwrap();
        let mx = canonical_weighting::<Rational>(CanonicalTag::MaxOnly)
            .extend_to(&support)
            .unwrap();
        let sum = wt_add(&mn, &mx).unwrap();
        assert_eq!(wt_scale(&sum, &Rational::from_frac(1, 2)).unwrap(), s);
        assert!(wt_add(&s, &canonical_weighting(CanonicalTag::MinOnly)).is_err());
    }

    fn max_clone(cap: usize) -> CloneSlices {
        clone_generate(b(), &[Operation::max(b())], cap, 1 << 20).unwrap()
    }

    #[test]
    fn superposition_of_example_weighting() {
        let max = Operation::max(b());
        let omega = W::new(
            b(),
            2,
            [(e(2, 0), q(-1)), (e(2, 1), q(1)), (max.clone(), q(0))],
        )
        .unwrap();
        let out = wt_superpose(&omega, &[e(2, 1), max.clone()], &max_clone(2)).unwrap();
        assert_eq!(out.weight(&e(2, 0)), Some(&q(0)));
        assert_eq!(out.weight(&e(2, 1)), Some(&q(-1)));
        assert_eq!(out.weight(&max), Some(&q(1)));
        assert!(out.is_proper());
    }

    #[test]
    fn identity_superposition() {
        let s = omega_sub();
        let slices =
            clone_generate(b(), &[Operation::min(b()), Operation::max(b())], 2, 1 << 20).unwrap();
        let out = wt_superpose(&s, &[e(2, 0), e(2, 1)], &slices).unwrap();
        assert_eq!(out, *s.as_raw());
    }

    #[test]
    fn superpose_rejects_outside_clone() {
        let s = omega_sub();
        assert!(wt_superpose(&s, &[e(2, 0), e(2, 1)], &max_clone(2)).is_err());
    }

    #[test]
    fn wpol_examples() {
        let s = omega_sub();
        assert!(is_weighted_polymorphism(&s, &Rel::soft_equal(b()), CAP)
            .unwrap()
            .improves());
        match is_weighted_polymorphism(&s, &Rel::soft_not_equal(b()), CAP).unwrap() {
            WpolVerdict::Violates { tuples, sum } => {
                assert_eq!(tuples, vec![Tuple(vec![0, 1]), Tuple(vec![1, 0])]);
                assert_eq!(sum, q(2));
            }
            other => panic!("unexpected {other:?}"),
        }
        let total = Rel::from_fn(b(), 3, |t| Some(q(t.iter().map(|&v| v as i64).sum())));
        let zero = W::zero(b(), 2, [Operation::min(b())]).unwrap();
        assert!(is_weighted_polymorphism(&zero, &total, CAP)
            .unwrap()
            .improves());
    }

    #[test]
    fn wpol_reports_non_polymorphism() {
        let swap = Rel::crisp(b(), 2, [vec![0u8, 1], vec![1, 0]]).unwrap();
        match is_weighted_polymorphism(&omega_sub(), &swap, CAP).unwrap() {
            WpolVerdict::NotPolymorphism { op, .. } => assert!(!op.is_projection()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_library() {
        let s = omega_sub();
        for f in Operation::projections(b(), 2) {
            assert_eq!(s.weight(&f), Some(&q(-1)));
        }
        assert_eq!(s.weight(&Operation::min(b())), Some(&q(1)));
        let mm = canonical_weighting::<Rational>(CanonicalTag::MajMin21);
        assert_eq!(
            mm.weight(&Operation::majority()).unwrap(),
            &(q(2) * mm.weight(&Operation::minority()).unwrap())
        );
        let inv = canonical_weighting::<Rational>(CanonicalTag::Inversion);
        assert_eq!(inv.total(), q(0));
        assert_eq!(inv.len(), 2);
        for t in CanonicalTag::ALL {
            assert_eq!(t.name().parse::<CanonicalTag>().unwrap(), t);
            assert!(canonical_weighting::<Rational>(t).is_positive());
        }
        assert!("Bogus".parse::<CanonicalTag>().is_err());
    }

    #[test]
    fn zero_extend_examples() {
        let (slices, ext) = zero_extend(b(), &[omega_sub()], 2, 1 << 20).unwrap();
        assert_eq!(slices.slice(2).unwrap().len(), 4);
        assert_eq!(ext[0], omega_sub());

        let mn = canonical_weighting::<Rational>(CanonicalTag::MinOnly);
        let mx = canonical_weighting::<Rational>(CanonicalTag::MaxOnly);
        let (slices, ext) = zero_extend(b(), &[mn.clone(), mx], 3, 1 << 20).unwrap();
        assert_eq!(slices.sizes(), vec![1, 4, 18]);
        assert_eq!(ext[0].len(), 4);
        assert_eq!(ext[0].weight(&Operation::max(b())), Some(&q(0)));
        assert_eq!(
            ext[0].weight(&Operation::min(b())),
            mn.weight(&Operation::min(b()))
        );

        let (slices, ext) = zero_extend::<Rational>(b(), &[], 2, 1 << 20).unwrap();
        assert_eq!(slices, CloneSlices::projections_only(b(), 2));
        assert!(ext.is_empty());
    }

    #[test]
    fn positive_search_examples() {
        let lim = SearchLimits::default();
        let w = find_positive_wpol(b(), &[Rel::soft_equal(b())], 2, lim)
            .unwrap()
            .unwrap();
        assert!(w.is_positive());
        let w = find_positive_wpol::<Rational>(b(), &[], 1, lim)
            .unwrap()
            .unwrap();
        assert!(w.is_positive());
        let inv = find_positive_wpol(b(), &[Rel::soft_not_equal(b())], 1, lim)
            .unwrap()
            .unwrap();
        assert_eq!(inv.positive_non_projections(), vec![Operation::inversion()]);
        // the inversion lifts to arity 2 through superposition
        assert!(find_positive_wpol(b(), &[Rel::soft_not_equal(b())], 2, lim)
            .unwrap()
            .is_some());
        let fixed = [
            Rel::soft_not_equal(b()),
            Rel::crisp(b(), 1, [vec![0u8]]).unwrap(),
            Rel::crisp(b(), 1, [vec![1u8]]).unwrap(),
        ];
        assert!(find_positive_wpol(b(), &fixed, 1, lim).unwrap().is_none());
        assert!(find_positive_wpol(b(), &fixed, 2, lim).unwrap().is_none());
    }

    /// Independent oracle for the binary search over `{ϱ≠}` with both
    /// constants fixed: the binary polymorphisms are then idempotent, and
    /// every idempotent non-projection sends `(01, 10)` to a tuple of cost 1
    /// while both projections give cost 0, so no positive combination can
    /// satisfy inequality (2) there.
    #[test]
    fn no_binary_positive_weighting_with_constants() {
        let rho = Rel::soft_not_equal(b());
        let x = [0u8, 1];
        let y = [1u8, 0];
        let mut seen = 0;
        for m in 0u8..16 {
            let f = Operation::new(b(), 2, (0..4).map(|i| (m >> (3 - i)) & 1).collect()).unwrap();
            if f.is_projection() || !f.is_idempotent() {
                continue;
            }
            seen += 1;
            let img = f.apply_to_tuples(&[&x, &y]).unwrap();
            assert_eq!(rho.get(&img), Some(&q(1)), "{f:?}");
        }
        assert_eq!(seen, 2);
    }

    fn arb_rel(arity: usize) -> impl Strategy<Value = Rel> {
        let n = 1usize << arity;
        proptest::collection::vec(proptest::option::weighted(0.8, -3i64..4), n).prop_map(move |w| {
            Rel::from_fn(Domain::boolean(), arity, |t| {
                w[Domain::boolean().rank(t)].map(Rational::from_i64)
            })
        })
    }

    fn arb_raw(k: usize) -> impl Strategy<Value = RawWeighting<Rational>> {
        let ops = 1usize << (1 << k);
        proptest::collection::btree_map(0..ops, -3i64..4, 1..5).prop_map(move |m| {
            let n = 1usize << k;
            let mut entries: BTreeMap<Operation, Rational> = m
                .into_iter()
                .map(|(code, w)| {
                    let t = (0..n).map(|i| ((code >> i) & 1) as u8).collect();
                    (
                        Operation::new(Domain::boolean(), k, t).unwrap(),
                        Rational::from_i64(w),
                    )
                })
                .collect();
            let total: Rational = entries.values().cloned().sum();
            let e0 = Operation::projection(Domain::boolean(), k, 0).unwrap();
            let cur = entries.get(&e0).cloned().unwrap_or_default();
            entries.insert(e0, cur - total);
            RawWeighting::new(Domain::boolean(), k, entries).unwrap()
        })
    }

    fn arb_op(k: usize) -> impl Strategy<Value = Operation> {
        proptest::collection::vec(0u8..2, 1 << k)
            .prop_map(move |t| Operation::new(Domain::boolean(), k, t).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn superposition_preserves_total(w in arb_raw(2), gs in proptest::collection::vec(arb_op(3), 2)) {
            let out = w.superpose_free(&gs).unwrap();
            prop_assert_eq!(out.total(), Rational::from_i64(0));
        }

        #[test]
        fn zero_weighting_improves_total_relations(r in arb_rel(2), ops in proptest::collection::vec(arb_op(2), 0..4)) {
            let r = Rel::from_fn(b(), 2, |t| Some(r.get(t).cloned().unwrap_or_else(|| q(5))));
            let w = W::zero(b(), 2, ops.into_iter().collect::<BTreeSet<_>>()).unwrap();
            prop_assert!(is_weighted_polymorphism(&w, &r, CAP).unwrap().improves());
        }

        #[test]
        fn projection_superposition_is_proper(w in arb_raw(2), i in 0usize..3, j in 0usize..3) {
            if let Some(w) = w.into_proper() {
                let gs = [e(3, i), e(3, j)];
                let out = w.superpose_free(&gs).unwrap();
                prop_assert!(out.is_proper());
            }
        }
    }
}
