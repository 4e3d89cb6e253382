//! Membership deciders for weighted relational clones and weighted clones.
//!
//! Both deciders reduce membership to one exact feasibility system and
//! return either a constructive witness (a gadget, or a recipe of
//! superpositions) or the separating object read off the Farkas
//! certificate. Every answer is re-verified before it is returned.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::classify::WITNESS_ORDER;
use crate::error::{Error, Result};
use crate::lp::{solve_farkas_lazy, LinearSystem, LpLimits, LpOutcome, Row, RowKind, RowSource};
use crate::operation::{for_each_tuple, CloneSlices, Operation};
use crate::polymorphism::{for_each_sequence, pol_k, PolLimits};
use crate::relation::{Domain, Tuple, WeightedRelation};
use crate::scalar::Scalar;
use crate::vcsp::{SolveConfig, VcspInstance, DEFAULT_MAX_ASSIGNMENTS};
use crate::weighting::{
    canonical_weighting, image_value, improves_all, is_weighted_polymorphism, wt_superpose,
    zero_extend, CanonicalTag, Lookup, RawWeighting, Weighting,
};

pub const DEFAULT_MAX_MATCHES: usize = 1_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct GaloisLimits {
    pub pol: PolLimits,
    pub lp: LpLimits,
    /// Cap on LP columns: k-matches, or distinct superpositions.
    pub max_matches: usize,
    /// Cap on assignments enumerated when re-projecting a gadget.
    pub max_assignments: usize,
    /// Try the weighting library before the full system.
    pub fast_path: bool,
}

impl Default for GaloisLimits {
    fn default() -> Self {
        GaloisLimits {
            pol: PolLimits::default(),
            lp: LpLimits::default(),
            max_matches: DEFAULT_MAX_MATCHES,
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
            fast_path: true,
        }
    }
}

/// A `k`-ary polymorphism of the language mapping the target's rows to a
/// tuple outside its support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceFailure {
    pub op: Operation,
    pub image: Tuple,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SeparatorSource {
    /// Zero weighting on the projections and the non-preserving operation.
    Invariance,
    /// A library weighting.
    Library,
    /// Read off the Farkas certificate.
    Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelMembershipResult<S> {
    /// `gadget` projected onto `list` equals the target plus `shift`.
    Member {
        gadget: VcspInstance<S>,
        list: Vec<usize>,
        shift: S,
    },
    /// `separator` improves every relation of the language but not the
    /// target.
    NonMember {
        separator: Weighting<S>,
        source: SeparatorSource,
        invariance: Option<InvarianceFailure>,
    },
}

impl<S> RelMembershipResult<S> {
    pub fn is_member(&self) -> bool {
        matches!(self, RelMembershipResult::Member { .. })
    }
}

/// One term `coeff * W[source][ops]` of a recipe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecipeTerm<S> {
    pub source: usize,
    pub ops: Vec<Operation>,
    pub coeff: S,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CloneMembershipResult<S> {
    /// The target is the pointwise sum of the terms.
    Member { recipe: Vec<RecipeTerm<S>> },
    /// Improved by every weighting of the set but not by the target. The
    /// arity is `d^k`; tuples are operation tables.
    NonMember { separator: WeightedRelation<S> },
}

impl<S> CloneMembershipResult<S> {
    pub fn is_member(&self) -> bool {
        matches!(self, CloneMembershipResult::Member { .. })
    }
}

fn to_scalar<S: Scalar>(v: &BigInt) -> Result<S> {
    S::from_big_rational(&BigRational::from_integer(v.clone()))
        .ok_or_else(|| Error::resource("certificate entry", v.to_string(), 0))
}

/// Variable name for the element of `D^k` with rank `rank`.
pub fn column_name(domain: Domain, k: usize, rank: usize) -> String {
    let t = domain.unrank(rank, k);
    let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
    format!("t{}", parts.join("_"))
}

/// Rows indexed by `k`-ary polymorphisms, columns by `k`-matches.
struct MatchSystem<'a, S> {
    pol: &'a [Operation],
    matches: &'a [(usize, Vec<usize>)],
    lookups: &'a [Lookup<'a, S>],
    target: &'a Lookup<'a, S>,
    target_cols: &'a [usize],
}

impl<S: Scalar> RowSource<S> for MatchSystem<'_, S> {
    fn num_vars(&self) -> usize {
        self.matches.len()
    }

    fn num_rows(&self) -> usize {
        self.pol.len()
    }

    fn with_free_constant(&self) -> bool {
        true
    }

    fn kind(&self, j: usize) -> RowKind {
        if self.pol[j].is_projection() {
            RowKind::Eq
        } else {
            RowKind::Geq
        }
    }

    fn row(&self, j: usize) -> Row<S> {
        let f = &self.pol[j];
        let coeffs = self.matches.iter().enumerate().map(|(i, (g, cols))| {
            let v = image_value(&self.lookups[*g], f, cols).expect("polymorphism image is defined");
            (i, v)
        });
        let rhs = image_value(self.target, f, self.target_cols).expect("target is invariant");
        Row::new(self.kind(j), coeffs, rhs)
    }

    fn residual(&self, j: usize, x: &[(usize, S)], c: &S) -> S {
        let f = &self.pol[j];
        let mut lhs = S::zero();
        for (i, xi) in x {
            let (g, cols) = &self.matches[*i];
            let v = image_value(&self.lookups[*g], f, cols).expect("polymorphism image is defined");
            lhs = lhs + xi.clone() * v;
        }
        let rhs = image_value(self.target, f, self.target_cols).expect("target is invariant");
        lhs - rhs - c.clone()
    }
}

/// Decides whether `target` lies in the weighted relational clone of
/// `gamma`. `library` adds caller-supplied candidate separators to the
/// canonical Boolean ones.
pub fn wrelclone_member<S: Scalar>(
    gamma: &[WeightedRelation<S>],
    target: &WeightedRelation<S>,
    library: &[Weighting<S>],
    limits: GaloisLimits,
) -> Result<RelMembershipResult<S>> {
    let domain = target.domain();
    if gamma.iter().any(|g| g.domain() != domain) {
        return Err(Error::input("relations must share the domain"));
    }
    if target.is_empty() {
        return Err(Error::input("the target relation has no defined tuples"));
    }
    let k = target.len();
    let max_seq = limits.pol.max_sequences;
    let pol: Vec<Operation> = pol_k(domain, gamma, k, limits.pol)?.into_iter().collect();

    let d = domain.size();
    let rows: Vec<&Tuple> = target.defined_tuples().collect();
    let target_cols: Vec<usize> = (0..target.arity())
        .map(|c| rows.iter().fold(0, |acc, t| acc * d + t[c] as usize))
        .collect();
    let target_lookup = Lookup::new(target);

    let invariance = pol.iter().find_map(|f| {
        image_value(&target_lookup, f, &target_cols)
            .is_none()
            .then(|| InvarianceFailure {
                op: f.clone(),
                image: Tuple(target_cols.iter().map(|&c| f.eval_rank(c)).collect()),
            })
    });

    let separates = |w: &Weighting<S>| -> Result<bool> {
        Ok(w.domain() == domain
            && improves_all(w, gamma, max_seq)?
            && !is_weighted_polymorphism(w, target, max_seq)?.improves())
    };

    if limits.fast_path {
        let mut candidates: Vec<Weighting<S>> = library.to_vec();
        if domain.size() == 2 {
            let tags = WITNESS_ORDER.iter().chain([&CanonicalTag::Inversion]);
            candidates.extend(tags.map(|&t| canonical_weighting(t)));
        }
        for w in &candidates {
            if separates(w)? {
                return Ok(RelMembershipResult::NonMember {
                    separator: w.clone(),
                    source: SeparatorSource::Library,
                    invariance,
                });
            }
        }
    }
    if let Some(inv) = invariance {
        let separator = Weighting::zero(domain, k, [inv.op.clone()])?;
        if !separates(&separator)? {
            return Err(Error::internal("invariance separator failed verification"));
        }
        return Ok(RelMembershipResult::NonMember {
            separator,
            source: SeparatorSource::Invariance,
            invariance: Some(inv),
        });
    }

    // columns: all k-matches of every relation
    let mut matches: Vec<(usize, Vec<usize>)> = Vec::new();
    for (gi, g) in gamma.iter().enumerate() {
        let count = crate::error::checked_pow(g.len(), k)
            .filter(|&n| n <= limits.max_matches.saturating_sub(matches.len()))
            .ok_or_else(|| {
                Error::resource("k-matches", format!("{}^{k}", g.len()), limits.max_matches)
            })?;
        matches.reserve(count);
        for_each_sequence(g, k, |_, cols| matches.push((gi, cols.to_vec())));
    }
    let lookups: Vec<Lookup<'_, S>> = gamma.iter().map(Lookup::new).collect();
    let system = MatchSystem {
        pol: &pol,
        matches: &matches,
        lookups: &lookups,
        target: &target_lookup,
        target_cols: &target_cols,
    };

    match solve_farkas_lazy(&system, limits.lp)? {
        LpOutcome::Solution { x, c } => {
            let vars = domain.tuple_count(k).ok_or_else(|| {
                Error::resource("gadget variables", format!("{d}^{k}"), usize::MAX)
            })?;
            let mut gadget = VcspInstance::new(
                domain,
                (0..vars).map(|r| column_name(domain, k, r)).collect(),
            )?;
            for ((gi, cols), xi) in matches.iter().zip(&x) {
                if xi.is_zero() && gamma[*gi].is_total() {
                    continue;
                }
                gadget.add_scaled_constraint(cols.clone(), gamma[*gi].clone(), xi.clone())?;
            }
            let projected = gadget.project(
                &target_cols,
                SolveConfig {
                    max_assignments: limits.max_assignments,
                    max_witnesses: 0,
                },
            )?;
            if projected != target.scale_shift(&S::one(), &c)? {
                return Err(Error::internal("gadget projection differs from the target"));
            }
            Ok(RelMembershipResult::Member {
                gadget,
                list: target_cols,
                shift: c,
            })
        }
        LpOutcome::Certificate { y } => {
            let mut entries = Vec::new();
            for (f, yf) in pol.iter().zip(&y) {
                if !yf.is_zero() {
                    entries.push((f.clone(), to_scalar::<S>(yf)?));
                }
            }
            let separator = Weighting::new(domain, k, entries)
                .map_err(|e| Error::internal(format!("certificate is not a weighting: {e}")))?;
            if !separates(&separator)? {
                return Err(Error::internal("certificate separator failed verification"));
            }
            Ok(RelMembershipResult::NonMember {
                separator,
                source: SeparatorSource::Certificate,
                invariance: None,
            })
        }
    }
}

/// The relation of arity `d^k` defined exactly on the tables of `slice`,
/// with the given values.
fn table_relation<S: Scalar>(
    domain: Domain,
    k: usize,
    entries: impl IntoIterator<Item = (Operation, S)>,
) -> Result<WeightedRelation<S>> {
    let m = domain.tuple_count(k).ok_or_else(|| {
        Error::resource(
            "separator arity",
            format!("{}^{k}", domain.size()),
            usize::MAX,
        )
    })?;
    WeightedRelation::new(
        domain,
        m,
        entries.into_iter().map(|(g, w)| (g.table().to_vec(), w)),
    )
}

/// Decides whether `target` lies in the weighted clone generated by `ws`.
pub fn wclone_member<S: Scalar>(
    ws: &[Weighting<S>],
    target: &Weighting<S>,
    limits: GaloisLimits,
) -> Result<CloneMembershipResult<S>> {
    let domain = target.domain();
    let k = target.arity();
    let (slices, extended) = zero_extend(domain, ws, k, limits.pol.max_ops)?;
    let slice: &BTreeSet<Operation> = slices.slice(k).expect("arity within cap");
    let ops: Vec<&Operation> = slice.iter().collect();

    let verify_separator = |rel: &WeightedRelation<S>| -> Result<bool> {
        let seqs = limits.pol.max_sequences;
        for w in ws {
            if !is_weighted_polymorphism(w, rel, seqs)?.improves() {
                return Ok(false);
            }
        }
        Ok(!is_weighted_polymorphism(target, rel, seqs)?.improves())
    };

    if target.support().any(|f| !slice.contains(f)) {
        let separator = table_relation(domain, k, ops.iter().map(|g| ((*g).clone(), S::zero())))?;
        if !verify_separator(&separator)? {
            return Err(Error::internal("clone separator failed verification"));
        }
        return Ok(CloneMembershipResult::NonMember { separator });
    }
    let goal = target.extend_to(slice)?;

    // columns: distinct superpositions of every weighting by k-ary clone members
    let mut columns: Vec<Vec<S>> = Vec::new();
    let mut origin: Vec<(usize, Vec<Operation>)> = Vec::new();
    let mut seen: HashSet<Vec<S>> = HashSet::new();
    for (wi, w) in extended.iter().enumerate() {
        crate::error::checked_pow(ops.len(), w.arity())
            .filter(|&n| n <= limits.max_matches)
            .ok_or_else(|| {
                Error::resource(
                    "superpositions",
                    format!("{}^{}", ops.len(), w.arity()),
                    limits.max_matches,
                )
            })?;
        let mut failure = None;
        for_each_tuple(ops.len(), w.arity(), |idx| {
            if failure.is_some() {
                return;
            }
            let gs: Vec<Operation> = idx.iter().map(|&i| ops[i].clone()).collect();
            match w.superpose_onto(&gs, slice) {
                Ok(sigma) => {
                    let col: Vec<S> = sigma.iter().map(|(_, v)| v.clone()).collect();
                    if col.iter().any(|v| !v.is_zero()) && seen.insert(col.clone()) {
                        columns.push(col);
                        origin.push((wi, gs));
                    }
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if columns.len() > limits.max_matches {
            return Err(Error::resource(
                "superpositions",
                columns.len(),
                limits.max_matches,
            ));
        }
    }

    let mut sys = LinearSystem::new(columns.len(), false);
    for (row, (_, rhs)) in goal.iter().enumerate() {
        let coeffs = columns
            .iter()
            .enumerate()
            .map(|(i, col)| (i, col[row].clone()));
        sys.push(Row::new(RowKind::Eq, coeffs, rhs.clone()))?;
    }

    match solve_farkas_lazy(&sys, limits.lp)? {
        LpOutcome::Solution { x, .. } => {
            let recipe: Vec<RecipeTerm<S>> = x
                .iter()
                .zip(origin)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, (source, ops))| RecipeTerm {
                    source,
                    ops,
                    coeff: c.clone(),
                })
                .collect();
            let total = evaluate_recipe(ws, &recipe, &slices, k)?;
            if !total.same_values(target) {
                return Err(Error::internal("recipe does not sum to the target"));
            }
            Ok(CloneMembershipResult::Member { recipe })
        }
        LpOutcome::Certificate { y } => {
            let mut entries = Vec::with_capacity(ops.len());
            for (g, z) in ops.iter().zip(&y) {
                entries.push(((*g).clone(), to_scalar::<S>(z)?));
            }
            let separator = table_relation(domain, k, entries)?;
            if !verify_separator(&separator)? {
                return Err(Error::internal("certificate separator failed verification"));
            }
            Ok(CloneMembershipResult::NonMember { separator })
        }
    }
}

/// `sum c * ws[source][ops]` on the `k`-ary slice.
pub fn evaluate_recipe<S: Scalar>(
    ws: &[Weighting<S>],
    recipe: &[RecipeTerm<S>],
    slices: &CloneSlices,
    k: usize,
) -> Result<RawWeighting<S>> {
    let slice = slices
        .slice(k)
        .ok_or_else(|| Error::input("recipe arity exceeds the clone slices"))?;
    let mut acc = RawWeighting::new(
        slices.domain(),
        k,
        slice.iter().map(|f| (f.clone(), S::zero())),
    )?;
    for term in recipe {
        let w = ws
            .get(term.source)
            .ok_or_else(|| Error::input(format!("recipe refers to weighting {}", term.source)))?;
        if term.coeff.is_negative() {
            return Err(Error::input("recipe coefficients must be non-negative"));
        }
        let sigma = wt_superpose(w, &term.ops, slices)?;
        acc = acc.sum(&sigma.scaled(&term.coeff))?;
    }
    Ok(acc)
}

/// Combines `c1 * w1[gs1] + c2 * w2[gs2]` into one weighting superposed
/// by the concatenated list: returns `c1 * w1[e_1..e_k] + c2 *
/// w2[e_{k+1}..e_{k+l}]` of arity `k + l` and `gs1 ++ gs2`.
pub fn combine_superpositions<S: Scalar>(
    c1: &S,
    w1: &Weighting<S>,
    gs1: &[Operation],
    c2: &S,
    w2: &Weighting<S>,
    gs2: &[Operation],
) -> Result<(Weighting<S>, Vec<Operation>)> {
    if c1.is_negative() || c2.is_negative() {
        return Err(Error::input("coefficients must be non-negative"));
    }
    if w1.domain() != w2.domain() {
        return Err(Error::input("weightings have different domains"));
    }
    let (k, l) = (w1.arity(), w2.arity());
    if gs1.len() != k || gs2.len() != l {
        return Err(Error::input(
            "operation lists must match the weighting arities",
        ));
    }
    let m = gs1[0].arity();
    if gs1
        .iter()
        .chain(gs2)
        .any(|g| g.arity() != m || g.domain() != w1.domain())
    {
        return Err(Error::input(
            "all inner operations must share one arity and domain",
        ));
    }
    let domain = w1.domain();
    let n = k + l;
    let proj = Operation::projections(domain, n);
    let a = w1.superpose_free(&proj[..k])?;
    let b = w2.superpose_free(&proj[k..])?;
    let mut sum: BTreeMap<Operation, S> = BTreeMap::new();
    for (f, v) in a.scaled(c1).iter().chain(b.scaled(c2).iter()) {
        let e = sum.entry(f.clone()).or_insert_with(S::zero);
        *e = e.clone() + v.clone();
    }
    let combined = Weighting::new(domain, n, sum)
        .map_err(|e| Error::internal(format!("combination is not a weighting: {e}")))?;
    let list: Vec<Operation> = gs1.iter().chain(gs2).cloned().collect();

    let lhs = combined.superpose_free(&list)?;
    let r1 = w1.superpose_free(gs1)?.scaled(c1);
    let r2 = w2.superpose_free(gs2)?.scaled(c2);
    let mut rhs: BTreeMap<Operation, S> = BTreeMap::new();
    for (f, v) in r1.iter().chain(r2.iter()) {
        let e = rhs.entry(f.clone()).or_insert_with(S::zero);
        *e = e.clone() + v.clone();
    }
    let rhs = RawWeighting::new(domain, m, rhs)?;
    if !lhs.same_values(&rhs) {
        return Err(Error::internal("combined superposition differs pointwise"));
    }
    Ok((combined, list))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operation::clone_generate;
    use crate::vcsp::Constraint;
    use crate::Rational;
    use proptest::prelude::*;

    type Rel = WeightedRelation<Rational>;
    type W = Weighting<Rational>;

    fn b() -> Domain {
        Domain::boolean()
    }

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn e(k: usize, i: usize) -> Operation {
        Operation::projection(b(), k, i).unwrap()
    }

    fn lim() -> GaloisLimits {
        GaloisLimits::default()
    }

    fn no_library() -> GaloisLimits {
        GaloisLimits {
            fast_path: false,
            ..lim()
        }
    }

    fn check_member(gamma: &[Rel], target: &Rel, l: GaloisLimits) {
        match wrelclone_member(gamma, target, &[], l).unwrap() {
            RelMembershipResult::Member {
                gadget,
                list,
                shift,
            } => {
                let p = gadget.project(&list, SolveConfig::default()).unwrap();
                assert_eq!(p, target.scale_shift(&q(1), &shift).unwrap());
                for Constraint { relation, .. } in gadget.constraints() {
                    assert!(gamma.contains(relation));
                }
            }
            other => panic!("expected member, got {other:?}"),
        }
    }

    #[test]
    fn not_equal_expresses_equal() {
        check_member(&[Rel::soft_not_equal(b())], &Rel::soft_equal(b()), lim());
    }

    #[test]
    fn equal_does_not_express_not_equal() {
        let gamma = [Rel::soft_equal(b())];
        let target = Rel::soft_not_equal(b());
        match wrelclone_member(&gamma, &target, &[], lim()).unwrap() {
            RelMembershipResult::NonMember {
                separator, source, ..
            } => {
                assert_eq!(source, SeparatorSource::Library);
                assert_eq!(separator, canonical_weighting(CanonicalTag::MinMaxEqual));
            }
            other => panic!("{other:?}"),
        }
        match wrelclone_member(&gamma, &target, &[], no_library()).unwrap() {
            RelMembershipResult::NonMember {
                separator, source, ..
            } => {
                assert_eq!(source, SeparatorSource::Certificate);
                assert!(improves_all(&separator, &gamma, 1 << 20).unwrap());
                assert!(!is_weighted_polymorphism(&separator, &target, 1 << 20)
                    .unwrap()
                    .improves());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_membership() {
        let rho = Rel::new(
            b(),
            2,
            [
                (vec![0u8, 0], q(2)),
                (vec![0, 1], q(-1)),
                (vec![1, 1], q(0)),
            ],
        )
        .unwrap();
        check_member(std::slice::from_ref(&rho), &rho, no_library());
    }

    #[test]
    fn invariance_rejection() {
        // {0} is not invariant under the unary polymorphisms of the empty language
        let target = Rel::crisp(b(), 1, [vec![0u8]]).unwrap();
        match wrelclone_member(&[], &target, &[], no_library()).unwrap() {
            RelMembershipResult::NonMember {
                separator,
                invariance,
                ..
            } => {
                let inv = invariance.unwrap();
                assert!(!target.is_defined(&inv.image));
                assert!(!is_weighted_polymorphism(&separator, &target, 1 << 20)
                    .unwrap()
                    .improves());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn membership_errors() {
        let empty = Rel::empty(b(), 2);
        assert!(wrelclone_member(&[Rel::soft_equal(b())], &empty, &[], lim()).is_err());
        let d3 = Domain::new(3).unwrap();
        assert!(
            wrelclone_member(&[Rel::soft_equal(d3)], &Rel::soft_equal(b()), &[], lim()).is_err()
        );
        let capped = GaloisLimits {
            max_matches: 3,
            ..no_library()
        };
        let err = wrelclone_member(
            &[Rel::soft_not_equal(b())],
            &Rel::soft_equal(b()),
            &[],
            capped,
        )
        .unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn closure_operations_stay_members() {
        // partial base relation keeps every target at two defined tuples
        let r = Rel::new(b(), 2, [(vec![0u8, 1], q(1)), (vec![1, 0], q(2))]).unwrap();
        let gamma = [r.clone()];
        check_member(&gamma, &r.scale_shift(&q(3), &q(-1)).unwrap(), no_library());
        check_member(&gamma, &r.minimize(0).unwrap(), no_library());
        let sum = r.add(&r, &[0, 1], &[1, 0], 2).unwrap();
        check_member(&gamma, &sum, no_library());
        let ne = Rel::soft_not_equal(b());
        check_member(std::slice::from_ref(&ne), &ne.minimize(0).unwrap(), no_library());
        check_member(&[ne], &Rel::weighted_equality(b()), no_library());
    }

    fn omega_sub() -> W {
        canonical_weighting(CanonicalTag::MinMaxEqual)
    }

    #[test]
    fn clone_membership_of_generator() {
        let w = omega_sub();
        match wclone_member(std::slice::from_ref(&w), &w, lim()).unwrap() {
            CloneMembershipResult::Member { recipe } => {
                assert!(!recipe.is_empty());
                assert!(recipe.iter().all(|t| t.source == 0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clone_membership_of_superposition() {
        let max = Operation::max(b());
        let omega = W::new(
            b(),
            2,
            [(e(2, 0), q(-1)), (e(2, 1), q(1)), (max.clone(), q(0))],
        )
        .unwrap();
        let target = W::new(b(), 2, [(e(2, 1), q(-1)), (max, q(1))]).unwrap();
        assert!(wclone_member(&[omega], &target, lim()).unwrap().is_member());
    }

    #[test]
    fn min_only_is_not_generated_by_omega_sub() {
        let target = canonical_weighting::<Rational>(CanonicalTag::MinOnly);
        match wclone_member(&[omega_sub()], &target, lim()).unwrap() {
            CloneMembershipResult::NonMember { separator } => {
                assert_eq!(separator.arity(), 4);
                assert!(is_weighted_polymorphism(&omega_sub(), &separator, 1 << 20)
                    .unwrap()
                    .improves());
                assert!(!is_weighted_polymorphism(&target, &separator, 1 << 20)
                    .unwrap()
                    .improves());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn support_outside_the_clone() {
        let target = canonical_weighting::<Rational>(CanonicalTag::MinorityOnly);
        match wclone_member(&[omega_sub()], &target, lim()).unwrap() {
            CloneMembershipResult::NonMember { separator } => {
                assert_eq!(separator.arity(), 8);
                assert!(separator.is_crisp());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_set_generates_zero() {
        let zero = W::zero(b(), 2, []).unwrap();
        assert!(wclone_member(&[], &zero, lim()).unwrap().is_member());
        let w = omega_sub();
        assert!(!wclone_member(&[], &w, lim()).unwrap().is_member());
    }

    #[test]
    fn combine_examples() {
        let s = omega_sub();
        let id = [e(2, 0), e(2, 1)];
        let (w, list) = combine_superpositions(&q(1), &s, &id, &q(1), &s, &id).unwrap();
        assert_eq!(w.arity(), 4);
        assert_eq!(list.len(), 4);
        let back = w.superpose_free(&list).unwrap();
        assert!(back.same_values(&s.scaled(&q(2))));

        let (w, _) = combine_superpositions(&q(3), &s, &id, &q(0), &s, &id).unwrap();
        let back = w
            .superpose_free(&[e(2, 0), e(2, 1), e(2, 0), e(2, 1)])
            .unwrap();
        assert!(back.same_values(&s.scaled(&q(3))));
        assert!(combine_superpositions(&q(1), &s, &id[..1], &q(1), &s, &id).is_err());
        assert!(combine_superpositions(&q(-1), &s, &id, &q(1), &s, &id).is_err());
    }

    #[test]
    fn recipe_evaluation() {
        let s = omega_sub();
        let slices =
            clone_generate(b(), &[Operation::min(b()), Operation::max(b())], 2, 1 << 20).unwrap();
        let recipe = vec![RecipeTerm {
            source: 0,
            ops: vec![e(2, 1), e(2, 0)],
            coeff: Rational::from_frac(1, 2),
        }];
        let out = evaluate_recipe(std::slice::from_ref(&s), &recipe, &slices, 2).unwrap();
        assert!(out.same_values(&s.scaled(&Rational::from_frac(1, 2))));
    }

    fn arb_small_rel() -> impl Strategy<Value = Rel> {
        (
            1usize..3,
            proptest::collection::vec(proptest::option::weighted(0.6, -2i64..3), 4),
        )
            .prop_map(|(arity, w)| {
                let mut defined = 0;
                Rel::from_fn(b(), arity, |t| {
                    let v = w[b().rank(t)];
                    if v.is_some() && defined < 3 {
                        defined += 1;
                        v.map(q)
                    } else {
                        None
                    }
                })
            })
            .prop_filter("non-empty", |r| !r.is_empty())
    }

    fn arb_small_weighting() -> impl Strategy<Value = W> {
        let ops = vec![
            Operation::min(b()),
            Operation::max(b()),
            Operation::constant(b(), 2, 0),
        ];
        (
            proptest::sample::subsequence(ops, 1..3),
            proptest::collection::vec(0i64..3, 3),
            0usize..2,
        )
            .prop_map(|(fs, ws, neg)| {
                let mut entries: Vec<(Operation, Rational)> = Vec::new();
                let mut total = 0;
                for (f, w) in fs.into_iter().zip(ws) {
                    total += w;
                    entries.push((f, q(w)));
                }
                entries.push((e(2, neg), q(-total)));
                W::new(b(), 2, entries).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn language_members_are_members(g1 in arb_small_rel(), g2 in arb_small_rel(), pick in 0usize..2) {
            let gamma = [g1, g2];
            let target = gamma[pick].clone();
            let out = wrelclone_member(&gamma, &target, &[], no_library()).unwrap();
            prop_assert!(out.is_member());
        }

        #[test]
        fn generators_are_clone_members(w in arb_small_weighting()) {
            prop_assert!(wclone_member(std::slice::from_ref(&w), &w, lim()).unwrap().is_member());
        }

        #[test]
        fn combination_identity(
            w1 in arb_small_weighting(),
            w2 in arb_small_weighting(),
            c1 in 0i64..4,
            c2 in 0i64..4,
            i1 in proptest::collection::vec(0usize..3, 2),
            i2 in proptest::collection::vec(0usize..3, 2),
        ) {
            let ops = [Operation::min(b()), Operation::max(b()), e(2, 0)];
            let gs1: Vec<Operation> = i1.iter().map(|&i| ops[i].clone()).collect();
            let gs2: Vec<Operation> = i2.iter().map(|&i| ops[i].clone()).collect();
            let (w, list) = combine_superpositions(&q(c1), &w1, &gs1, &q(c2), &w2, &gs2).unwrap();
            // independent evaluation of both sides
            let mut lhs: BTreeMap<Operation, Rational> = BTreeMap::new();
            for (f, v) in w.iter() {
                *lhs.entry(f.superpose(&list).unwrap()).or_insert_with(Rational::zero) += v;
            }
            let mut rhs: BTreeMap<Operation, Rational> = BTreeMap::new();
            for (c, wi, gs) in [(c1, &w1, &gs1), (c2, &w2, &gs2)] {
                for (f, v) in wi.iter() {
                    *rhs.entry(f.superpose(gs).unwrap()).or_insert_with(Rational::zero) += q(c) * v;
                }
            }
            lhs.retain(|_, v| !v.is_zero());
            rhs.retain(|_, v| !v.is_zero());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn enlarging_the_language_keeps_members() {
        let ne = Rel::soft_not_equal(b());
        let unary = Rel::new(b(), 1, [(vec![0u8], q(1)), (vec![1], q(0))]).unwrap();
        check_member(&[ne.clone(), unary], &Rel::soft_equal(b()), no_library());
    }

    #[test]
    fn dimension_names() {
        assert_eq!(column_name(b(), 4, 6), "t0_1_1_0");
    }
}
