//! Polymorphisms: `Pol` and `Inv` checks and exhaustive enumeration of the
//! `k`-ary polymorphisms of a finite language.

use std::collections::{BTreeSet, HashSet};

use crate::error::{checked_pow, Error, Result};
use crate::operation::{for_each_tuple, Operation};
use crate::relation::{Domain, Tuple, WeightedRelation};
use crate::scalar::Scalar;

/// Default cap on `|R(rho)|^k` tuple sequences examined per relation.
pub const DEFAULT_MAX_SEQUENCES: usize = 10_000_000;
/// Default cap on the `d^(d^k)` search space of [`pol_k`].
pub const DEFAULT_MAX_OPS: usize = 1 << 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PolLimits {
    pub max_sequences: usize,
    pub max_ops: usize,
}

impl Default for PolLimits {
    fn default() -> Self {
        PolLimits {
            max_sequences: DEFAULT_MAX_SEQUENCES,
            max_ops: DEFAULT_MAX_OPS,
        }
    }
}

/// Number of `k`-sequences of defined tuples, or a resource error.
pub(crate) fn sequence_count<S: Scalar>(
    rho: &WeightedRelation<S>,
    k: usize,
    cap: usize,
) -> Result<usize> {
    match checked_pow(rho.len(), k) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::resource("tuple sequences", n, cap)),
        None => Err(Error::resource(
            "tuple sequences",
            format!("{}^{k}", rho.len()),
            cap,
        )),
    }
}

/// For every `k`-sequence of defined tuples (lexicographic in the sequence
/// of tuple indices), calls `visit(indices, column_ranks)` where
/// `column_ranks[c]` is the rank in `D^k` of column `c` of the `k x r`
/// matrix whose rows are the chosen tuples.
pub(crate) fn for_each_sequence<S: Scalar>(
    rho: &WeightedRelation<S>,
    k: usize,
    mut visit: impl FnMut(&[usize], &[usize]),
) {
    let rows: Vec<&Tuple> = rho.defined_tuples().collect();
    let d = rho.domain().size();
    let r = rho.arity();
    let mut cols = vec![0usize; r];
    for_each_tuple(rows.len(), k, |idx| {
        for (c, col) in cols.iter_mut().enumerate() {
            *col = idx.iter().fold(0, |acc, &i| acc * d + rows[i][c] as usize);
        }
        visit(idx, &cols);
    });
}

/// Rank in `D^r` of the tuple `(f(col_0), .., f(col_{r-1}))`.
#[inline]
pub(crate) fn image_rank(f: &Operation, cols: &[usize]) -> usize {
    let d = f.domain().size();
    cols.iter()
        .fold(0, |acc, &c| acc * d + f.eval_rank(c) as usize)
}

fn check_domain<S: Scalar>(f: &Operation, rho: &WeightedRelation<S>) -> Result<()> {
    if f.domain() != rho.domain() {
        return Err(Error::input(
            "operation and relation have different domains",
        ));
    }
    Ok(())
}

/// The first sequence of defined tuples (lexicographic) whose image under
/// `f` is undefined, if any.
pub fn polymorphism_violation<S: Scalar>(
    f: &Operation,
    rho: &WeightedRelation<S>,
    max_sequences: usize,
) -> Result<Option<Vec<Tuple>>> {
    check_domain(f, rho)?;
    if rho.is_total() {
        return Ok(None);
    }
    sequence_count(rho, f.arity(), max_sequences)?;
    let dense = rho
        .domain()
        .tuple_count(rho.arity())
        .filter(|&n| n <= 1 << 22)
        .map(|_| rho.dense());
    let rows: Vec<&Tuple> = rho.defined_tuples().collect();
    let mut found = None;
    for_each_sequence(rho, f.arity(), |idx, cols| {
        if found.is_some() {
            return;
        }
        let defined = match &dense {
            Some(t) => t.defined_at_rank(image_rank(f, cols)),
            None => rho.is_defined(&cols.iter().map(|&c| f.eval_rank(c)).collect::<Vec<_>>()),
        };
        if !defined {
            found = Some(idx.iter().map(|&i| rows[i].clone()).collect());
        }
    });
    Ok(found)
}

pub fn is_polymorphism<S: Scalar>(
    f: &Operation,
    rho: &WeightedRelation<S>,
    max_sequences: usize,
) -> Result<bool> {
    Ok(polymorphism_violation(f, rho, max_sequences)?.is_none())
}

/// Every operation of `ops` is a polymorphism of `rho`.
pub fn inv_check<S: Scalar>(
    ops: &[Operation],
    rho: &WeightedRelation<S>,
    max_sequences: usize,
) -> Result<bool> {
    for f in ops {
        if !is_polymorphism(f, rho, max_sequences)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All `k`-ary operations on `domain` preserving every relation of `gamma`.
///
/// Table entries are fixed in rank order; each tuple sequence of a relation
/// is checked as soon as the last table entry it reads is fixed.
pub fn pol_k<S: Scalar>(
    domain: Domain,
    gamma: &[WeightedRelation<S>],
    k: usize,
    limits: PolLimits,
) -> Result<BTreeSet<Operation>> {
    if k == 0 {
        return Err(Error::input("polymorphism arity must be at least 1"));
    }
    if gamma.iter().any(|g| g.domain() != domain) {
        return Err(Error::input("relations must share the domain"));
    }
    let d = domain.size();
    let n = domain
        .tuple_count(k)
        .ok_or_else(|| Error::resource("operation table", format!("{d}^{k}"), limits.max_ops))?;
    match checked_pow(d, n) {
        Some(total) if total <= limits.max_ops => {}
        _ => {
            return Err(Error::resource(
                "operation search space",
                format!("{d}^{n}"),
                limits.max_ops,
            ))
        }
    }

    // checks[p] = (relation, column ranks) triggered once entry p is fixed
    let mut checks: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n];
    let dense = gamma
        .iter()
        .map(|g| {
            if g.is_total() || g.arity() == 0 {
                return Ok(None);
            }
            match g.domain().tuple_count(g.arity()) {
                Some(n) if n <= 1 << 22 => Ok(Some(g.dense())),
                _ => Err(Error::resource(
                    "relation table",
                    format!("{d}^{}", g.arity()),
                    1 << 22,
                )),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for (gi, g) in gamma.iter().enumerate() {
        if g.is_total() || g.arity() == 0 {
            continue;
        }
        sequence_count(g, k, limits.max_sequences)?;
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for_each_sequence(g, k, |_, cols| {
            if seen.insert(cols.to_vec()) {
                let trigger = *cols.iter().max().expect("arity >= 1");
                checks[trigger].push((gi, cols.to_vec()));
            }
        });
    }

    let mut out = BTreeSet::new();
    let mut table = vec![0u8; n];
    let mut pos = 0usize;
    // iterative DFS: table[pos] is the value currently tried at pos
    'search: loop {
        let ok = checks[pos].iter().all(|(gi, cols)| {
            let r = cols.iter().fold(0, |acc, &c| acc * d + table[c] as usize);
            dense[*gi]
                .as_ref()
                .expect("non-total relation")
                .defined_at_rank(r)
        });
        if ok {
            if pos + 1 == n {
                out.insert(Operation::new(domain, k, table.clone())?);
            } else {
                pos += 1;
                table[pos] = 0;
                continue;
            }
        }
        // advance to the next candidate, backtracking as needed
        loop {
            if (table[pos] as usize) + 1 < d {
                table[pos] += 1;
                continue 'search;
            }
            if pos == 0 {
                break 'search;
            }
            pos -= 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operation::clone_generate;
    use crate::Rational;
    use proptest::prelude::*;

    type Rel = WeightedRelation<Rational>;

    fn b() -> Domain {
        Domain::boolean()
    }

    fn swap_rel() -> Rel {
        Rel::crisp(b(), 2, [vec![0u8, 1], vec![1, 0]]).unwrap()
    }

    fn all_ops(k: usize) -> Vec<Operation> {
        let n = 1usize << k;
        (0..1u32 << n)
            .map(|m| {
                Operation::new(b(), k, (0..n).map(|i| ((m >> i) & 1) as u8).collect()).unwrap()
            })
            .collect()
    }

    #[test]
    fn is_polymorphism_examples() {
        let max = Operation::max(b());
        assert!(
            is_polymorphism(&max, &Rel::weighted_equality(b()), DEFAULT_MAX_SEQUENCES).unwrap()
        );
        for f in all_ops(2) {
            assert!(is_polymorphism(&f, &Rel::soft_not_equal(b()), DEFAULT_MAX_SEQUENCES).unwrap());
        }
        let v = polymorphism_violation(&max, &swap_rel(), DEFAULT_MAX_SEQUENCES)
            .unwrap()
            .unwrap();
        assert_eq!(max.apply_to_tuples(&[&v[0], &v[1]]).unwrap().0, vec![1, 1]);
    }

    #[test]
    fn is_polymorphism_rejects_cross_domain() {
        let max3 = Operation::max(Domain::new(3).unwrap());
        assert!(is_polymorphism(&max3, &swap_rel(), DEFAULT_MAX_SEQUENCES).is_err());
    }

    #[test]
    fn sequence_cap_is_enforced() {
        let maj = Operation::majority();
        let err = is_polymorphism(&maj, &swap_rel(), 7).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn pol_k_examples() {
        let total = Rel::from_fn(b(), 2, |_| Some(Rational::from_i64(0)));
        assert_eq!(
            pol_k(b(), &[total], 2, PolLimits::default()).unwrap().len(),
            16
        );

        let unary = pol_k(b(), &[swap_rel()], 1, PolLimits::default()).unwrap();
        let expected: BTreeSet<Operation> = [
            Operation::projection(b(), 1, 0).unwrap(),
            Operation::inversion(),
        ]
        .into();
        assert_eq!(unary, expected);

        let eq = pol_k(b(), &[Rel::weighted_equality(b())], 2, PolLimits::default()).unwrap();
        assert_eq!(eq.len(), 16);
    }

    #[test]
    fn pol_k_matches_filtering() {
        let leq = Rel::crisp(b(), 2, [vec![0u8, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let gamma = vec![leq.clone(), swap_rel()];
        for k in 1..=3 {
            let fast = pol_k(b(), &gamma, k, PolLimits::default()).unwrap();
            let slow: BTreeSet<Operation> = all_ops(k)
                .into_iter()
                .filter(|f| {
                    gamma
                        .iter()
                        .all(|g| is_polymorphism(f, g, DEFAULT_MAX_SEQUENCES).unwrap())
                })
                .collect();
            assert_eq!(fast, slow, "k = {k}");
        }
        let monotone = pol_k(b(), &[leq], 2, PolLimits::default()).unwrap();
        assert_eq!(monotone.len(), 6);
    }

    #[test]
    fn pol_k_cap() {
        let err = pol_k::<Rational>(b(), &[], 5, PolLimits::default()).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn inv_check_examples() {
        let rel = Rel::crisp(b(), 2, [vec![0u8, 1], vec![1, 1]]).unwrap();
        assert!(inv_check(&Operation::projections(b(), 3), &rel, DEFAULT_MAX_SEQUENCES).unwrap());
        let zero_pair = Rel::crisp(b(), 2, [vec![0u8, 0]]).unwrap();
        assert!(!inv_check(&[Operation::inversion()], &zero_pair, DEFAULT_MAX_SEQUENCES).unwrap());
        assert!(inv_check(&[], &zero_pair, DEFAULT_MAX_SEQUENCES).unwrap());
    }

    fn arb_crisp(arity: usize) -> impl Strategy<Value = Rel> {
        let n = 1usize << arity;
        proptest::collection::vec(any::<bool>(), n).prop_map(move |mask| {
            Rel::from_fn(Domain::boolean(), arity, |t| {
                mask[Domain::boolean().rank(t)].then(|| Rational::from_i64(0))
            })
        })
    }

    fn arb_weighted(arity: usize) -> impl Strategy<Value = Rel> {
        let n = 1usize << arity;
        proptest::collection::vec(proptest::option::of(-3i64..4), n).prop_map(move |w| {
            Rel::from_fn(Domain::boolean(), arity, |t| {
                w[Domain::boolean().rank(t)].map(Rational::from_i64)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn contains_projections(g in proptest::collection::vec(arb_crisp(2), 0..3), k in 1usize..4) {
            let pol = pol_k(Domain::boolean(), &g, k, PolLimits::default()).unwrap();
            for e in Operation::projections(Domain::boolean(), k) {
                prop_assert!(pol.contains(&e));
            }
        }

        #[test]
        fn pol_is_a_clone(g in proptest::collection::vec(arb_crisp(2), 1..3)) {
            let p2 = pol_k(Domain::boolean(), &g, 2, PolLimits::default()).unwrap();
            let gens: Vec<Operation> = p2.iter().cloned().collect();
            let c = clone_generate(Domain::boolean(), &gens, 2, 1 << 20).unwrap();
            prop_assert_eq!(c.slice(2).unwrap(), &p2);
            let p1 = pol_k(Domain::boolean(), &g, 1, PolLimits::default()).unwrap();
            for f in &p2 {
                for a in &p1 {
                    for b in &p1 {
                        let h = f.superpose(&[a.clone(), b.clone()]).unwrap();
                        prop_assert!(p1.contains(&h));
                    }
                }
            }
        }

        #[test]
        fn monotone_in_language(a in arb_crisp(2), b in arb_crisp(2)) {
            let small = pol_k(Domain::boolean(), std::slice::from_ref(&a), 2, PolLimits::default()).unwrap();
            let big = pol_k(Domain::boolean(), &[a, b], 2, PolLimits::default()).unwrap();
            prop_assert!(big.is_subset(&small));
        }

        #[test]
        fn weights_do_not_matter(rho in arb_weighted(2), t in proptest::collection::vec(0u8..2, 8)) {
            let f = Operation::new(Domain::boolean(), 3, t).unwrap();
            prop_assert_eq!(
                is_polymorphism(&f, &rho, DEFAULT_MAX_SEQUENCES).unwrap(),
                is_polymorphism(&f, &rho.feasibility(), DEFAULT_MAX_SEQUENCES).unwrap()
            );
        }
    }
}
