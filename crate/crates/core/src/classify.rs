//! Boolean tractability classification and the structure of positive
//! weightings at their least arity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::operation::{identification_list, CloneSlices, Operation, TernarySharpKind};
use crate::polymorphism::pol_k;
use crate::relation::{Domain, WeightedRelation};
use crate::scalar::Scalar;
use crate::weighting::{
    canonical_weighting, find_positive_wpol, improves_all, wt_superpose, CanonicalTag,
    SearchLimits, Weighting,
};

/// Order in which passing tractable weightings are chosen as the witness.
/// Idempotent witnesses come first; the constant ones last.
pub const WITNESS_ORDER: [CanonicalTag; 8] = [
    CanonicalTag::MinOnly,
    CanonicalTag::MaxOnly,
    CanonicalTag::MinMaxEqual,
    CanonicalTag::MajorityOnly,
    CanonicalTag::MinorityOnly,
    CanonicalTag::MajMin21,
    CanonicalTag::Const0,
    CanonicalTag::Const1,
];

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Tractable,
    NpHard,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Tractable => "tractable",
            Status::NpHard => "np-hard",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum NpHardReason {
    /// Only the inversion weighting passes.
    InversionOnly,
    /// None of the nine canonical weightings passes.
    NoPositiveWeighting,
}

impl fmt::Display for NpHardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NpHardReason::InversionOnly => "InversionOnly",
            NpHardReason::NoPositiveWeighting => "NoPositiveWeighting",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanVerdict<S> {
    pub status: Status,
    pub witness: Option<(CanonicalTag, Weighting<S>)>,
    pub reason: Option<NpHardReason>,
    /// Whether each canonical weighting improves the whole language.
    pub types: BTreeMap<CanonicalTag, bool>,
}

/// Classifies a finite Boolean language by the nine canonical weightings.
pub fn classify_boolean<S: Scalar>(
    gamma: &[WeightedRelation<S>],
    max_sequences: usize,
) -> Result<BooleanVerdict<S>> {
    if let Some(g) = gamma.iter().find(|g| g.domain() != Domain::boolean()) {
        return Err(Error::input(format!(
            "Boolean classification of a relation over domain {}",
            g.domain().size()
        )));
    }
    let mut types = BTreeMap::new();
    for tag in CanonicalTag::ALL {
        let w = canonical_weighting::<S>(tag);
        types.insert(tag, improves_all(&w, gamma, max_sequences)?);
    }
    let witness = WITNESS_ORDER
        .iter()
        .find(|t| types[t])
        .map(|&t| (t, canonical_weighting::<S>(t)));
    if let Some((_, w)) = &witness {
        if !improves_all(w, gamma, max_sequences)? || !w.is_positive() {
            return Err(Error::internal("tractability witness failed verification"));
        }
    }
    let (status, reason) = match witness {
        Some(_) => (Status::Tractable, None),
        None if types[&CanonicalTag::Inversion] => {
            (Status::NpHard, Some(NpHardReason::InversionOnly))
        }
        None => (Status::NpHard, Some(NpHardReason::NoPositiveWeighting)),
    };
    Ok(BooleanVerdict {
        status,
        witness,
        reason,
        types,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SharpCategory {
    UnaryNonProjection,
    BinaryIdempotentNonProjection,
    Majority,
    Minority,
    Pixley,
    Semiprojection,
}

impl fmt::Display for SharpCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A positive weighting at the least arity where one exists, with its
/// positively weighted operations sorted into categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharpReport<S> {
    pub arity: usize,
    /// Arities searched were `1..=searched`.
    pub searched: usize,
    pub weighting: Weighting<S>,
    pub categories: BTreeMap<SharpCategory, Vec<Operation>>,
}

impl<S> SharpReport<S> {
    pub fn count(&self, c: SharpCategory) -> usize {
        self.categories.get(&c).map_or(0, Vec::len)
    }
}

/// Finds the least `k <= max_arity` with a positive weighted polymorphism
/// of `gamma` and classifies its positively weighted operations.
///
/// At the least arity every identification of the found weighting lands in
/// a smaller arity without positive weightings, so every positively
/// weighted operation must be sharp. That is re-checked here.
pub fn positive_weighting_report<S: Scalar>(
    domain: Domain,
    gamma: &[WeightedRelation<S>],
    max_arity: usize,
    limits: SearchLimits,
) -> Result<Option<SharpReport<S>>> {
    for k in 1..=max_arity {
        let Some(omega) = find_positive_wpol(domain, gamma, k, limits)? else {
            continue;
        };
        let positive = omega.positive_non_projections();
        if k >= 2 {
            let slices: Vec<BTreeSet<Operation>> = (1..=k)
                .map(|l| pol_k(domain, gamma, l, limits.pol))
                .collect::<Result<_>>()?;
            let slices = CloneSlices::from_slices(domain, slices)?;
            for i in 0..k {
                for j in i + 1..k {
                    let gs = identification_list(domain, k, i, j);
                    let image = wt_superpose(&omega, &gs, &slices)?;
                    if !image.positive_non_projections().is_empty() {
                        return Err(Error::internal(format!(
                            "identification ({i},{j}) keeps positive weight below the least arity"
                        )));
                    }
                }
            }
        }
        let mut categories: BTreeMap<SharpCategory, Vec<Operation>> = BTreeMap::new();
        for f in positive {
            let cat = categorize(&f)?;
            categories.entry(cat).or_default().push(f);
        }
        return Ok(Some(SharpReport {
            arity: k,
            searched: max_arity,
            weighting: omega,
            categories,
        }));
    }
    Ok(None)
}

fn categorize(f: &Operation) -> Result<SharpCategory> {
    let k = f.arity();
    if k == 1 {
        return Ok(SharpCategory::UnaryNonProjection);
    }
    if !f.is_sharp()? {
        return Err(Error::internal(format!(
            "{f:?} is positively weighted but not sharp"
        )));
    }
    Ok(match k {
        2 => {
            if !f.is_idempotent() {
                return Err(Error::internal(format!(
                    "sharp binary {f:?} is not idempotent"
                )));
            }
            SharpCategory::BinaryIdempotentNonProjection
        }
        3 => match f.classify_ternary_sharp()? {
            TernarySharpKind::Majority => SharpCategory::Majority,
            TernarySharpKind::Minority => SharpCategory::Minority,
            TernarySharpKind::Pixley => SharpCategory::Pixley,
            TernarySharpKind::Semiprojection => SharpCategory::Semiprojection,
        },
        _ => {
            if !f.is_semiprojection()? {
                return Err(Error::internal(format!(
                    "sharp {f:?} is not a semiprojection"
                )));
            }
            SharpCategory::Semiprojection
        }
    })
}

/// For a weighting supported on the `k` projections only, whether the
/// pairwise superpositions sending the positively weighted projections to
/// `e_a` and the rest to `e_b` span every sum-zero weighting of the `k`
/// projections. False exactly for the zero weighting.
pub fn jd_weighting_span_check<S: Scalar>(
    domain: Domain,
    k: usize,
    omega: &Weighting<S>,
) -> Result<bool> {
    if omega.domain() != domain || omega.arity() != k {
        return Err(Error::input(
            "weighting does not match the domain and arity",
        ));
    }
    if let Some(f) = omega.support().find(|f| !f.is_projection()) {
        return Err(Error::input(format!("{f:?} is not a projection")));
    }
    let proj = Operation::projections(domain, k);
    let positive: Vec<bool> = proj
        .iter()
        .map(|e| omega.weight(e).is_some_and(|w| w.is_positive()))
        .collect();
    let mut gens: Vec<Vec<S>> = Vec::new();
    for a in 0..k {
        for b in (0..k).filter(|&b| b != a) {
            let gs: Vec<Operation> = positive
                .iter()
                .map(|&p| if p { proj[a].clone() } else { proj[b].clone() })
                .collect();
            let image = omega.superpose_free(&gs)?;
            gens.push(
                proj.iter()
                    .map(|e| image.weight(e).cloned().unwrap_or_else(S::zero))
                    .collect(),
            );
        }
    }
    Ok(k >= 2 && rank(gens) == k - 1)
}

/// Rank of a set of vectors by exact Gaussian elimination.
fn rank<S: Scalar>(mut rows: Vec<Vec<S>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone() / prow[c].clone();
            for j in c..cols {
                row[j] = row[j].clone() - prow[j].clone() * f.clone();
            }
        }
        r += 1;
    }
    r
}
