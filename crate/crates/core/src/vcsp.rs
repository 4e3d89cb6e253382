//! VCSP instances: exact brute-force solving, projection, gadget
//! substitution, the scaling reduction, and the standard encodings.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{ensure_pow_within, Error, Result};
use crate::relation::{Domain, Tuple, WeightedRelation};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ASSIGNMENTS: usize = 10_000_000;
pub const DEFAULT_MAX_WITNESSES: usize = 64;

/// One constraint `<scope, scale * relation>`. The scale is a non-negative
/// multiplier; scale 0 keeps only the feasibility of the relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint<S> {
    pub scope: Vec<usize>,
    pub relation: WeightedRelation<S>,
    pub scale: S,
}

impl<S: Scalar> Constraint<S> {
    /// The relation actually contributing to the cost.
    pub fn effective(&self) -> WeightedRelation<S> {
        if self.scale.is_one() {
            self.relation.clone()
        } else {
            self.relation
                .scale_shift(&self.scale, &S::zero())
                .expect("scale is non-negative")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcspInstance<S> {
    domain: Domain,
    variables: Vec<String>,
    constraints: Vec<Constraint<S>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SolveConfig {
    pub max_assignments: usize,
    pub max_witnesses: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
            max_witnesses: DEFAULT_MAX_WITNESSES,
        }
    }
}

/// Optimum and optimal assignments (lexicographic, capped). `optimum` is
/// `None` exactly when the instance is infeasible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult<S> {
    pub optimum: Option<S>,
    pub witnesses: Vec<Vec<u8>>,
}

impl<S> SolveResult<S> {
    pub fn is_feasible(&self) -> bool {
        self.optimum.is_some()
    }
}

impl<S: Scalar> VcspInstance<S> {
    pub fn new(domain: Domain, variables: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(v) = variables.iter().find(|v| !seen.insert(v.as_str())) {
            return Err(Error::input(format!("variable `{v}` declared twice")));
        }
        Ok(VcspInstance {
            domain,
            variables,
            constraints: Vec::new(),
        })
    }

    /// An instance with variables `v0 .. v{n-1}`.
    pub fn with_vars(domain: Domain, n: usize) -> Self {
        VcspInstance {
            domain,
            variables: (0..n).map(|i| format!("v{i}")).collect(),
            constraints: Vec::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.constraints
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if self.var_index(&name).is_some() {
            return Err(Error::input(format!("variable `{name}` declared twice")));
        }
        self.variables.push(name);
        Ok(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        scope: Vec<usize>,
        relation: WeightedRelation<S>,
    ) -> Result<()> {
        self.add_scaled_constraint(scope, relation, S::one())
    }

    pub fn add_scaled_constraint(
        &mut self,
        scope: Vec<usize>,
        relation: WeightedRelation<S>,
        scale: S,
    ) -> Result<()> {
        if relation.domain() != self.domain {
            return Err(Error::input(
                "constraint relation is over a different domain",
            ));
        }
        if scope.len() != relation.arity() {
            return Err(Error::input(format!(
                "scope of length {} for a relation of arity {}",
                scope.len(),
                relation.arity()
            )));
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= self.variables.len()) {
            return Err(Error::input(format!("unknown variable index {v}")));
        }
        if scale.is_negative() {
            return Err(Error::input(format!("negative constraint scale {scale}")));
        }
        self.constraints.push(Constraint {
            scope,
            relation,
            scale,
        });
        Ok(())
    }

    /// Sum of all constraint values at `s`; `None` if any is undefined.
    pub fn cost(&self, s: &[u8]) -> Result<Option<S>> {
        if s.len() != self.variables.len() {
            return Err(Error::input(format!(
                "assignment of length {} for {} variables",
                s.len(),
                self.variables.len()
            )));
        }
        self.domain.check_tuple(s, s.len())?;
        let mut total = S::zero();
        for c in &self.constraints {
            let t: Vec<u8> = c.scope.iter().map(|&v| s[v]).collect();
            match c.relation.get(&t) {
                Some(w) => total = total + c.scale.clone() * w.clone(),
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    /// Calls `visit` on every feasible assignment, in lexicographic order,
    /// with its cost.
    fn enumerate(&self, cfg: SolveConfig, mut visit: impl FnMut(&[u8], &S)) -> Result<()> {
        let n = self.variables.len();
        let d = self.domain.size();
        ensure_pow_within("assignments", d, n, cfg.max_assignments)?;
        let mut constant = S::zero();
        let mut buckets: Vec<Vec<Table<S>>> = (0..n).map(|_| Vec::new()).collect();
        for c in &self.constraints {
            let table = Table::new(c);
            match c.scope.iter().max() {
                None => match table.lookup(&[]) {
                    Some(w) => constant = constant + w,
                    None => return Ok(()),
                },
                Some(&v) => buckets[v].push(table),
            }
        }
        if n == 0 {
            visit(&[], &constant);
            return Ok(());
        }
        let mut a = vec![0u8; n];
        // partial[v] = cost of the constraints in buckets 0..v
        let mut partial: Vec<S> = vec![S::zero(); n + 1];
        partial[0] = constant;
        let mut v = 0usize;
        'outer: loop {
            let mut acc = Some(partial[v].clone());
            for t in &buckets[v] {
                let Some(cur) = acc else { break };
                let vals: Vec<u8> = t.scope.iter().map(|&x| a[x]).collect();
                acc = t.lookup(&vals).map(|w| cur + w);
            }
            if let Some(c) = acc {
                if v + 1 == n {
                    visit(&a, &c);
                } else {
                    partial[v + 1] = c;
                    v += 1;
                    a[v] = 0;
                    continue;
                }
            }
            loop {
                if (a[v] as usize) + 1 < d {
                    a[v] += 1;
                    continue 'outer;
                }
                if v == 0 {
                    break 'outer;
                }
                v -= 1;
            }
        }
        Ok(())
    }

    /// Exact optimum by exhaustive enumeration.
    pub fn solve(&self, cfg: SolveConfig) -> Result<SolveResult<S>> {
        let mut best: Option<S> = None;
        let mut witnesses: Vec<Vec<u8>> = Vec::new();
        self.enumerate(cfg, |a, c| {
            match &best {
                Some(b) if c > b => return,
                Some(b) if c == b => {}
                _ => {
                    best = Some(c.clone());
                    witnesses.clear();
                }
            }
            if witnesses.len() < cfg.max_witnesses {
                witnesses.push(a.to_vec());
            }
        })?;
        Ok(SolveResult {
            optimum: best,
            witnesses,
        })
    }

    /// The projection onto `list`: at `x`, the least cost of an assignment
    /// agreeing with `x` on `list`.
    pub fn project(&self, list: &[usize], cfg: SolveConfig) -> Result<WeightedRelation<S>> {
        if let Some(&v) = list.iter().find(|&&v| v >= self.variables.len()) {
            return Err(Error::input(format!("unknown variable index {v}")));
        }
        let mut best: BTreeMap<Tuple, S> = BTreeMap::new();
        self.enumerate(cfg, |a, c| {
            let key = Tuple(list.iter().map(|&v| a[v]).collect());
            match best.get_mut(&key) {
                Some(cur) if c < cur => *cur = c.clone(),
                Some(_) => {}
                None => {
                    best.insert(key, c.clone());
                }
            }
        })?;
        WeightedRelation::new(self.domain, list.len(), best)
    }

    /// [`Self::project`] with variables given by name.
    pub fn project_names(&self, names: &[&str], cfg: SolveConfig) -> Result<WeightedRelation<S>> {
        let list = names
            .iter()
            .map(|n| {
                self.var_index(n)
                    .ok_or_else(|| Error::input(format!("unknown variable `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.project(&list, cfg)
    }
}

/// Rank-indexed constraint values for the enumeration loop.
struct Table<S> {
    scope: Vec<usize>,
    dense: Option<Vec<Option<S>>>,
    sparse: WeightedRelation<S>,
    d: usize,
}

impl<S: Scalar> Table<S> {
    fn new(c: &Constraint<S>) -> Self {
        let eff = c.effective();
        let dense = eff
            .domain()
            .tuple_count(eff.arity())
            .filter(|&n| n <= 1 << 20)
            .map(|n| {
                let mut v = vec![None; n];
                for (t, w) in eff.iter() {
                    v[eff.domain().rank(t)] = Some(w.clone());
                }
                v
            });
        Table {
            scope: c.scope.clone(),
            dense,
            d: eff.domain().size(),
            sparse: eff,
        }
    }

    fn lookup(&self, vals: &[u8]) -> Option<S> {
        match &self.dense {
            Some(v) => v[vals.iter().fold(0, |acc, &x| acc * self.d + x as usize)].clone(),
            None => self.sparse.get(vals).cloned(),
        }
    }
}

/// A gadget: an instance and a list of its variables whose projection
/// expresses some relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget<S> {
    pub instance: VcspInstance<S>,
    pub list: Vec<usize>,
}

/// Replaces every constraint whose relation has a gadget by a fresh copy of
/// the gadget. Auxiliary variables of the copy for constraint `i` are named
/// `g<i>_<gadget variable>`. When a gadget variable occurs several times in
/// the list, the matching scope variables are tied with the weighted
/// equality relation.
pub fn substitute_gadgets<S: Scalar>(
    p: &VcspInstance<S>,
    gadgets: &[(WeightedRelation<S>, Gadget<S>)],
) -> Result<VcspInstance<S>> {
    let mut out = VcspInstance::new(p.domain, p.variables.clone())?;
    for (ci, c) in p.constraints.iter().enumerate() {
        let Some((_, g)) = gadgets.iter().find(|(r, _)| *r == c.relation) else {
            out.constraints.push(c.clone());
            continue;
        };
        if g.list.len() != c.scope.len() {
            return Err(Error::input(format!(
                "gadget list of length {} for a scope of length {}",
                g.list.len(),
                c.scope.len()
            )));
        }
        if g.instance.domain != p.domain {
            return Err(Error::input("gadget over a different domain"));
        }
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut ties = Vec::new();
        for (pos, &gv) in g.list.iter().enumerate() {
            match map.get(&gv) {
                Some(&first) if first != c.scope[pos] => ties.push((first, c.scope[pos])),
                Some(_) => {}
                None => {
                    map.insert(gv, c.scope[pos]);
                }
            }
        }
        for gv in 0..g.instance.num_vars() {
            if let std::collections::hash_map::Entry::Vacant(e) = map.entry(gv) {
                let idx = out.add_variable(format!("g{ci}_{}", g.instance.variables[gv]))?;
                e.insert(idx);
            }
        }
        for gc in &g.instance.constraints {
            out.constraints.push(Constraint {
                scope: gc.scope.iter().map(|v| map[v]).collect(),
                relation: gc.relation.clone(),
                scale: gc.scale.clone() * c.scale.clone(),
            });
        }
        for (a, b) in ties {
            out.add_constraint(vec![a, b], WeightedRelation::weighted_equality(p.domain))?;
        }
    }
    Ok(out)
}

/// Declares that `derived = alpha * base + beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance<S> {
    pub derived: WeightedRelation<S>,
    pub base: WeightedRelation<S>,
    pub alpha: S,
    pub beta: S,
}

/// The replication factors used by [`scale_reduction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplicationReport {
    /// Copies of each original constraint, in order.
    pub copies: Vec<usize>,
    /// Product of the denominators of the positive scale factors.
    pub denominator_product: usize,
    /// Extra replication of positive constraints when some `alpha = 0`.
    pub replication: usize,
    /// Number of constraints with `alpha = 0`.
    pub zero_alpha: usize,
    /// Largest weight spread over the `alpha = 0` base relations.
    pub max_spread: BigRational,
    /// Granularity of the positive part of the cost.
    pub min_gap: BigRational,
}

fn to_usize(v: &BigInt, what: &'static str) -> Result<usize> {
    v.to_usize()
        .ok_or_else(|| Error::resource(what, v.to_string(), usize::MAX))
}

/// Rewrites an instance over scaled and shifted relations into one over
/// the base relations by replicating constraints.
///
/// A constraint with `alpha = p/q > 0` gets `p * Q / q` copies, where `Q`
/// is the product of all positive-scale denominators, so positive parts
/// keep their relative weights. Each `alpha = 0` constraint becomes a
/// single copy, and the positive copies are multiplied by
/// `R = ceil(M k / m + 1)`, where `k` counts the `alpha = 0` constraints,
/// `M` bounds how far one of them can move the cost, and `m` is the least
/// positive difference between two values of the positive part. Every
/// optimal assignment of the result is optimal for the input; when all
/// scales are positive the optimal sets coincide.
pub fn scale_reduction<S: Scalar>(
    p: &VcspInstance<S>,
    provenance: &[Provenance<S>],
) -> Result<(VcspInstance<S>, ReplicationReport)> {
    for pv in provenance {
        if pv.alpha.is_negative() {
            return Err(Error::input(format!("negative scale factor {}", pv.alpha)));
        }
        if pv.base.scale_shift(&pv.alpha, &pv.beta)? != pv.derived {
            return Err(Error::input(format!(
                "relation is not {} * base + {}",
                pv.alpha, pv.beta
            )));
        }
    }
    let mut chosen: Vec<&Provenance<S>> = Vec::with_capacity(p.constraints.len());
    for (ci, c) in p.constraints.iter().enumerate() {
        let eff = c.effective();
        let pv = provenance
            .iter()
            .find(|pv| pv.derived == eff)
            .ok_or_else(|| Error::input(format!("no provenance for constraint {ci}")))?;
        chosen.push(pv);
    }

    let alphas: Vec<BigRational> = chosen.iter().map(|pv| pv.alpha.to_big_rational()).collect();
    let mut q_prod = BigInt::one();
    for a in alphas.iter().filter(|a| !a.is_zero()) {
        q_prod *= a.denom();
    }
    let zero_alpha = alphas.iter().filter(|a| a.is_zero()).count();

    let mut spread = BigRational::zero();
    let mut den_lcm = BigInt::one();
    for (pv, a) in chosen.iter().zip(&alphas) {
        let ws: Vec<BigRational> = pv.base.weights().map(|w| w.to_big_rational()).collect();
        if a.is_zero() {
            if let (Some(lo), Some(hi)) = (ws.iter().min(), ws.iter().max()) {
                spread = spread.max(hi - lo);
            }
        } else {
            for w in &ws {
                den_lcm = den_lcm.lcm(w.denom());
            }
        }
    }
    let gap = BigRational::new(BigInt::one(), den_lcm);
    let replication = if zero_alpha > 0 && alphas.iter().any(|a| !a.is_zero()) {
        let r = (&spread * BigRational::from_integer(BigInt::from(zero_alpha)) / &gap
            + BigRational::one())
        .ceil()
        .to_integer();
        to_usize(&r, "replication factor")?.max(1)
    } else {
        1
    };

    let mut out = VcspInstance::new(p.domain, p.variables.clone())?;
    let mut copies = Vec::with_capacity(chosen.len());
    for ((c, pv), a) in p.constraints.iter().zip(&chosen).zip(&alphas) {
        let n = if a.is_zero() {
            1
        } else {
            let per = a.numer() * (&q_prod / a.denom());
            to_usize(&per, "constraint copies")?
                .checked_mul(replication)
                .ok_or_else(|| Error::resource("constraint copies", "overflow", usize::MAX))?
        };
        for _ in 0..n {
            out.add_constraint(c.scope.clone(), pv.base.clone())?;
        }
        copies.push(n);
    }
    Ok((
        out,
        ReplicationReport {
            copies,
            denominator_product: to_usize(&q_prod, "denominator product")?,
            replication,
            zero_alpha,
            max_spread: spread,
            min_gap: gap,
        },
    ))
}

fn check_edges(edges: &[(usize, usize)], n: usize) -> Result<()> {
    match edges.iter().find(|(u, v)| *u >= n || *v >= n) {
        Some((u, v)) => Err(Error::input(format!("edge ({u},{v}) outside 0..{n}"))),
        None => Ok(()),
    }
}

/// MIN-CUT: one soft-equality constraint per edge.
pub fn encode_mincut<S: Scalar>(edges: &[(usize, usize)], n: usize) -> Result<VcspInstance<S>> {
    check_edges(edges, n)?;
    let b = Domain::boolean();
    let mut p = VcspInstance::with_vars(b, n);
    for &(u, v) in edges {
        p.add_constraint(vec![u, v], WeightedRelation::soft_equal(b))?;
    }
    Ok(p)
}

/// MAX-CUT: one soft-disequality constraint per edge; the optimum is
/// `|E|` minus the maximum cut.
pub fn encode_maxcut<S: Scalar>(edges: &[(usize, usize)], n: usize) -> Result<VcspInstance<S>> {
    check_edges(edges, n)?;
    let b = Domain::boolean();
    let mut p = VcspInstance::with_vars(b, n);
    for &(u, v) in edges {
        p.add_constraint(vec![u, v], WeightedRelation::soft_not_equal(b))?;
    }
    Ok(p)
}

/// DIGRAPH MIN-COST-HOM from `G` to `H`: the edge relation of `H` on every
/// edge of `G`, plus the unary cost `costs[u][v]` of mapping `u` to `v`.
pub fn encode_digraph_mch<S: Scalar>(
    g_vertices: usize,
    g_edges: &[(usize, usize)],
    h_vertices: usize,
    h_edges: &[(usize, usize)],
    costs: &[Vec<S>],
) -> Result<VcspInstance<S>> {
    check_edges(g_edges, g_vertices)?;
    check_edges(h_edges, h_vertices)?;
    if costs.len() != g_vertices || costs.iter().any(|row| row.len() != h_vertices) {
        return Err(Error::input("cost table must be |V_G| x |V_H|"));
    }
    let d = Domain::new(h_vertices)?;
    let edge_rel = WeightedRelation::crisp(
        d,
        2,
        h_edges
            .iter()
            .map(|&(a, b)| vec![a as u8, b as u8])
            .collect::<std::collections::BTreeSet<_>>(),
    )?;
    let mut p = VcspInstance::with_vars(d, g_vertices);
    for &(u, v) in g_edges {
        p.add_constraint(vec![u, v], edge_rel.clone())?;
    }
    for (u, row) in costs.iter().enumerate() {
        let unary = WeightedRelation::new(
            d,
            1,
            row.iter()
                .enumerate()
                .map(|(v, w)| (vec![v as u8], w.clone())),
        )?;
        p.add_constraint(vec![u], unary)?;
    }
    Ok(p)
}
