//! Exact feasibility for mixed systems with a Farkas alternative.
//!
//! A system has non-negative variables `x_i`, an optional free constant `C`,
//! and rows `sum_i a[i,j] x_i >= b_j + C` or `= b_j + C`. Exactly one of two
//! things exists: a solution `(x, C)`, or an integer certificate `y` with
//! `sum_j y_j = 0` (only when `C` is present), `y_j >= 0` on `>=` rows,
//! `sum_j y_j a[i,j] <= 0` for every `i`, and `sum_j y_j b_j > 0`.
//!
//! The solver is a dense simplex over fraction-free integer rows with
//! Bland's least-index rule. Only the phase-one problem is solved; its dual
//! gives the certificate. Large row sets are handled lazily through
//! [`RowSource`]: rows are added to the working set only once a candidate
//! solution violates them.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{clear_denominators, primitive_part, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    Geq,
    Eq,
}

/// One constraint row with sparse coefficients (`(variable, a)` pairs with
/// strictly increasing variable indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row<S> {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, S)>,
    pub rhs: S,
}

impl<S: Scalar> Row<S> {
    /// Builds a row from possibly repeated, unsorted pairs; duplicates are
    /// summed and zeros dropped.
    pub fn new(kind: RowKind, coeffs: impl IntoIterator<Item = (usize, S)>, rhs: S) -> Self {
        let mut v: Vec<(usize, S)> = coeffs.into_iter().collect();
        v.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(usize, S)> = Vec::with_capacity(v.len());
        for (i, a) in v {
            match merged.last_mut() {
                Some((j, b)) if *j == i => *b = b.clone() + a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        Row {
            kind,
            coeffs: merged,
            rhs,
        }
    }

    /// `sum a x - (b + c)` for a sparse point `x` sorted by index.
    pub fn residual(&self, x: &[(usize, S)], c: &S) -> S {
        let mut lhs = S::zero();
        for (i, a) in &self.coeffs {
            if let Ok(p) = x.binary_search_by_key(i, |(j, _)| *j) {
                lhs = lhs + a.clone() * x[p].1.clone();
            }
        }
        lhs - self.rhs.clone() - c.clone()
    }
}

/// Read access to a (possibly implicit, very large) system.
pub trait RowSource<S: Scalar> {
    fn num_vars(&self) -> usize;
    fn num_rows(&self) -> usize;
    fn with_free_constant(&self) -> bool;
    fn row(&self, j: usize) -> Row<S>;

    fn kind(&self, j: usize) -> RowKind {
        self.row(j).kind
    }

    /// `lhs - (b_j + c)` at the sparse point `x`.
    fn residual(&self, j: usize, x: &[(usize, S)], c: &S) -> S {
        self.row(j).residual(x, c)
    }
}

/// An explicitly stored system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem<S> {
    num_vars: usize,
    with_free_constant: bool,
    rows: Vec<Row<S>>,
}

impl<S: Scalar> LinearSystem<S> {
    pub fn new(num_vars: usize, with_free_constant: bool) -> Self {
        LinearSystem {
            num_vars,
            with_free_constant,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row<S>) -> Result<usize> {
        if let Some((i, _)) = row.coeffs.iter().find(|(i, _)| *i >= self.num_vars) {
            return Err(Error::input(format!(
                "variable {i} out of range for {} variables",
                self.num_vars
            )));
        }
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    /// Adds a row from a dense coefficient vector.
    pub fn push_dense(&mut self, kind: RowKind, coeffs: &[S], rhs: S) -> Result<usize> {
        if coeffs.len() != self.num_vars {
            return Err(Error::input("coefficient vector has the wrong length"));
        }
        self.push(Row::new(kind, coeffs.iter().cloned().enumerate(), rhs))
    }

    pub fn rows(&self) -> &[Row<S>] {
        &self.rows
    }
}

impl<S: Scalar> RowSource<S> for LinearSystem<S> {
    fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn with_free_constant(&self) -> bool {
        self.with_free_constant
    }

    fn row(&self, j: usize) -> Row<S> {
        self.rows[j].clone()
    }

    fn kind(&self, j: usize) -> RowKind {
        self.rows[j].kind
    }

    fn residual(&self, j: usize, x: &[(usize, S)], c: &S) -> S {
        self.rows[j].residual(x, c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome<S> {
    /// `x` is dense over all variables; `c` is zero without a free constant.
    Solution { x: Vec<S>, c: S },
    /// Dense over all rows; primitive (gcd 1).
    Certificate { y: Vec<BigInt> },
}

impl<S> LpOutcome<S> {
    pub fn is_solution(&self) -> bool {
        matches!(self, LpOutcome::Solution { .. })
    }
}

pub const DEFAULT_MAX_ROWS: usize = 1 << 20;
pub const DEFAULT_MAX_PIVOTS: usize = 2_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct LpLimits {
    /// Cap on the total number of rows of a system.
    pub max_rows: usize,
    /// Cap on simplex pivots over a whole solve.
    pub max_pivots: usize,
    /// Number of violated rows added per round of row generation.
    pub batch: usize,
}

impl Default for LpLimits {
    fn default() -> Self {
        LpLimits {
            max_rows: DEFAULT_MAX_ROWS,
            max_pivots: DEFAULT_MAX_PIVOTS,
            batch: 128,
        }
    }
}

/// Solves an explicit system with default limits.
pub fn solve_farkas<S: Scalar>(sys: &LinearSystem<S>) -> Result<LpOutcome<S>> {
    solve_farkas_lazy(sys, LpLimits::default())
}

/// Solves a system given through a [`RowSource`], generating rows lazily.
/// The outcome is re-verified against the full system before returning.
pub fn solve_farkas_lazy<S: Scalar, R: RowSource<S> + ?Sized>(
    source: &R,
    limits: LpLimits,
) -> Result<LpOutcome<S>> {
    let m = source.num_rows();
    if m > limits.max_rows {
        return Err(Error::resource("LP rows", m, limits.max_rows));
    }
    let n = source.num_vars();
    let free = source.with_free_constant();
    // rows already represented by an identical active row count as covered
    let mut covered = vec![false; m];
    let mut seen: HashSet<Row<S>> = HashSet::new();
    let mut active: Vec<usize> = Vec::new();
    let mut rows: Vec<Row<S>> = Vec::new();
    let mut activate =
        |j: usize, covered: &mut [bool], active: &mut Vec<usize>, rows: &mut Vec<Row<S>>| {
            covered[j] = true;
            let row = source.row(j);
            if seen.insert(row.clone()) {
                active.push(j);
                rows.push(row);
            }
        };
    for j in 0..m {
        if m <= 64 || source.kind(j) == RowKind::Eq {
            activate(j, &mut covered, &mut active, &mut rows);
        }
    }
    let mut pivots_left = limits.max_pivots;

    loop {
        let outcome = match phase_one(&rows, n, free, &mut pivots_left)? {
            PhaseOne::Infeasible { y } => {
                let mut full = vec![BigInt::zero(); m];
                for (p, &j) in active.iter().enumerate() {
                    full[j] = y[p].clone();
                }
                LpOutcome::Certificate { y: full }
            }
            PhaseOne::Feasible { x, c } => {
                let sparse: Vec<(usize, S)> = x
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(i, v)| (i, v.clone()))
                    .collect();
                let mut violated: Vec<(S, usize)> = Vec::new();
                for j in (0..m).filter(|&j| !covered[j]) {
                    let r = source.residual(j, &sparse, &c);
                    let bad = match source.kind(j) {
                        RowKind::Geq => r.is_negative(),
                        RowKind::Eq => !r.is_zero(),
                    };
                    if bad {
                        violated.push((-r.abs(), j));
                    }
                }
                if violated.is_empty() {
                    LpOutcome::Solution { x, c }
                } else {
                    violated.sort();
                    let before = active.len();
                    for (_, j) in violated {
                        activate(j, &mut covered, &mut active, &mut rows);
                        if active.len() - before >= limits.batch.max(1) {
                            break;
                        }
                    }
                    continue;
                }
            }
        };
        if !verify_outcome(source, &outcome) {
            return Err(Error::internal("LP outcome failed verification"));
        }
        return Ok(outcome);
    }
}

enum PhaseOne<S> {
    Feasible { x: Vec<S>, c: S },
    Infeasible { y: Vec<BigInt> },
}

/// One tableau row kept over the integers: entry `j` is `num[j] / den`.
struct IntRow {
    num: Vec<BigInt>,
    den: BigInt,
}

impl IntRow {
    fn from_rationals(vals: Vec<BigRational>) -> Self {
        let den = vals.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let num = vals
            .iter()
            .map(|v| v.numer() * (&den / v.denom()))
            .collect();
        let mut row = IntRow { num, den };
        row.reduce();
        row
    }

    fn value(&self, j: usize) -> BigRational {
        BigRational::new(self.num[j].clone(), self.den.clone())
    }

    fn reduce(&mut self) {
        let mut g = self.den.clone();
        for v in &self.num {
            if g.is_one() {
                return;
            }
            if !v.is_zero() {
                g = g.gcd(v);
            }
        }
        if !g.is_one() {
            for v in self.num.iter_mut().filter(|v| !v.is_zero()) {
                *v /= &g;
            }
            self.den /= &g;
        }
    }
}

/// Minimizes the sum of artificial variables for the given rows.
///
/// Each row carries its own positive denominator so a pivot only touches
/// rows with a nonzero entry in the entering column.
fn phase_one<S: Scalar>(
    rows: &[Row<S>],
    n: usize,
    free: bool,
    pivots_left: &mut usize,
) -> Result<PhaseOne<S>> {
    let m = rows.len();
    let c_cols = if free { 2 } else { 0 };
    let geq: Vec<usize> = (0..m).filter(|&i| rows[i].kind == RowKind::Geq).collect();
    let surplus_base = n + c_cols;
    let art_base = surplus_base + geq.len();
    let ncols = art_base + m;
    let rhs = ncols;

    // rows 0..m are constraints, row m is the reduced-cost row
    let mut t: Vec<IntRow> = Vec::with_capacity(m + 1);
    let mut sigma: Vec<bool> = Vec::with_capacity(m); // true = row negated
    let mut surplus_of = vec![usize::MAX; m];
    for (s, &i) in geq.iter().enumerate() {
        surplus_of[i] = surplus_base + s;
    }
    let one = BigRational::one();
    for (i, row) in rows.iter().enumerate() {
        let neg = row.rhs.is_negative();
        let sgn = |v: BigRational| if neg { -v } else { v };
        let mut r = vec![BigRational::zero(); ncols + 1];
        for (j, a) in &row.coeffs {
            r[*j] = sgn(a.to_big_rational());
        }
        if free {
            r[n] = sgn(-one.clone());
            r[n + 1] = sgn(one.clone());
        }
        if surplus_of[i] != usize::MAX {
            r[surplus_of[i]] = sgn(-one.clone());
        }
        r[art_base + i] = one.clone();
        r[rhs] = sgn(row.rhs.to_big_rational());
        t.push(IntRow::from_rationals(r));
        sigma.push(neg);
    }
    let mut rc = vec![BigRational::zero(); ncols + 1];
    for (j, v) in rc.iter_mut().enumerate() {
        if j < art_base || j == rhs {
            *v = -t
                .iter()
                .fold(BigRational::zero(), |acc, r| acc + r.value(j));
        }
    }
    t.push(IntRow::from_rationals(rc));
    let mut basis: Vec<usize> = (0..m).map(|i| art_base + i).collect();

    while let Some(e) = (0..ncols).find(|&j| t[m].num[j].is_negative()) {
        // the row denominator cancels in the ratio num[rhs] / num[e]
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !t[i].num[e].is_positive() {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    let lhs = &t[i].num[rhs] * &t[l].num[e];
                    let rhs_v = &t[l].num[rhs] * &t[i].num[e];
                    lhs < rhs_v || (lhs == rhs_v && basis[i] < basis[l])
                }
            };
            if better {
                leave = Some(i);
            }
        }
        let Some(r) = leave else {
            return Err(Error::internal("unbounded phase-one problem"));
        };
        if *pivots_left == 0 {
            return Err(Error::resource("simplex pivots", "more", 0));
        }
        *pivots_left -= 1;
        pivot(&mut t, r, e);
        basis[r] = e;
    }

    if t[m].num[rhs].is_zero() {
        let mut x = vec![S::zero(); n];
        let mut cp = BigRational::zero();
        let mut cm = BigRational::zero();
        for (i, &b) in basis.iter().enumerate() {
            let v = t[i].value(rhs);
            if b < n {
                x[b] = S::from_big_rational(&v)
                    .ok_or_else(|| Error::internal("solution value outside the scalar type"))?;
            } else if free && b == n {
                cp = v;
            } else if free && b == n + 1 {
                cm = v;
            }
        }
        let c = S::from_big_rational(&(cp - cm))
            .ok_or_else(|| Error::internal("solution value outside the scalar type"))?;
        return Ok(PhaseOne::Feasible { x, c });
    }

    // duals of the phase-one problem: u_i = 1 - reduced cost of artificial i
    let y: Vec<BigRational> = (0..m)
        .map(|i| {
            let u = BigRational::one() - t[m].value(art_base + i);
            if sigma[i] {
                -u
            } else {
                u
            }
        })
        .collect();
    Ok(PhaseOne::Infeasible {
        y: primitive_part(&clear_denominators(&y)),
    })
}

fn pivot(t: &mut [IntRow], r: usize, e: usize) {
    let (before, rest) = t.split_at_mut(r);
    let (prow, after) = rest.split_first_mut().expect("pivot row");
    let p = prow.num[e].clone();
    let nz: Vec<usize> = (0..prow.num.len())
        .filter(|&j| !prow.num[j].is_zero())
        .collect();
    for row in before.iter_mut().chain(after.iter_mut()) {
        if row.num[e].is_zero() {
            continue;
        }
        // new row = (row * p - f * prow) / (den * p)
        let f = row.num[e].clone();
        if !p.is_one() {
            for v in row.num.iter_mut().filter(|v| !v.is_zero()) {
                *v *= &p;
            }
            row.den *= &p;
        }
        for &j in &nz {
            row.num[j] -= &f * &prow.num[j];
        }
        row.reduce();
    }
    prow.den = p;
    prow.reduce();
}

/// Re-checks an outcome against every row of the system.
pub fn verify_outcome<S: Scalar, R: RowSource<S> + ?Sized>(source: &R, out: &LpOutcome<S>) -> bool {
    let n = source.num_vars();
    let m = source.num_rows();
    match out {
        LpOutcome::Solution { x, c } => {
            if x.len() != n || x.iter().any(|v| v.is_negative()) {
                return false;
            }
            if !source.with_free_constant() && !c.is_zero() {
                return false;
            }
            let sparse: Vec<(usize, S)> = x
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect();
            (0..m).all(|j| {
                let r = source.residual(j, &sparse, c);
                match source.kind(j) {
                    RowKind::Geq => !r.is_negative(),
                    RowKind::Eq => r.is_zero(),
                }
            })
        }
        LpOutcome::Certificate { y } => {
            if y.len() != m {
                return false;
            }
            if source.with_free_constant() && !y.iter().sum::<BigInt>().is_zero() {
                return false;
            }
            let mut col = vec![BigRational::zero(); n];
            let mut yb = BigRational::zero();
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let row = source.row(j);
                if row.kind == RowKind::Geq && yj.is_negative() {
                    return false;
                }
                let yq = BigRational::from_integer(yj.clone());
                for (i, a) in &row.coeffs {
                    col[*i] += &yq * a.to_big_rational();
                }
                yb += &yq * row.rhs.to_big_rational();
            }
            yb.is_positive() && col.iter().all(|v| !v.is_positive())
        }
    }
}

/// Plain-text dump of a system:
///
/// ```text
/// lpsys vars 2 free yes
/// >= 1 : 0=1 1=-1/2
/// = 0 : 1=3
/// ```
pub fn lpsys_dump<S: Scalar, R: RowSource<S> + ?Sized>(source: &R) -> String {
    let mut s = format!(
        "lpsys vars {} free {}\n",
        source.num_vars(),
        if source.with_free_constant() {
            "yes"
        } else {
            "no"
        }
    );
    for j in 0..source.num_rows() {
        let row = source.row(j);
        let rel = match row.kind {
            RowKind::Geq => ">=",
            RowKind::Eq => "=",
        };
        let _ = write!(s, "{rel} {} :", row.rhs);
        for (i, a) in &row.coeffs {
            let _ = write!(s, " {i}={a}");
        }
        s.push('\n');
    }
    s
}

/// Parses the output of [`lpsys_dump`].
pub fn lpsys_parse<S: Scalar>(text: &str) -> Result<LinearSystem<S>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let perr = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty lpsys"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 5 || h[0] != "lpsys" || h[1] != "vars" || h[3] != "free" {
        return Err(perr(hl, "expected `lpsys vars <n> free <yes|no>`"));
    }
    let n: usize = h[2].parse().map_err(|_| perr(hl, "bad variable count"))?;
    let free = match h[4] {
        "yes" => true,
        "no" => false,
        _ => return Err(perr(hl, "free must be yes or no")),
    };
    let mut sys = LinearSystem::new(n, free);
    for (ln, line) in lines {
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| perr(ln, "missing ':'"))?;
        let mut hp = head.split_whitespace();
        let kind = match hp.next() {
            Some(">=") => RowKind::Geq,
            Some("=") => RowKind::Eq,
            _ => return Err(perr(ln, "row must start with >= or =")),
        };
        let rhs = hp
            .next()
            .and_then(S::parse)
            .ok_or_else(|| perr(ln, "bad right-hand side"))?;
        let mut coeffs = Vec::new();
        for tok in tail.split_whitespace() {
            let (i, a) = tok
                .split_once('=')
                .ok_or_else(|| perr(ln, "bad coefficient"))?;
            let i: usize = i.parse().map_err(|_| perr(ln, "bad variable index"))?;
            let a = S::parse(a).ok_or_else(|| perr(ln, "bad coefficient value"))?;
            coeffs.push((i, a));
        }
        sys.push(Row::new(kind, coeffs, rhs))
            .map_err(|e| perr(ln, &e.to_string()))?;
    }
    Ok(sys)
}
