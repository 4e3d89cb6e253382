//! Plain-text formats for relations, operations, weightings and instances.
//!
//! A source holds any number of blocks. Each block starts with a header
//! line (`relation`, `op`, `weighting` or `instance`) followed by its body
//! lines. `#` starts a comment; blank lines are ignored.
//!
//! ```text
//! relation neq domain 2 arity 2
//! 0 0 : 1
//! 0 1 : 0
//! 1 0 : 0
//! 1 1 : 1
//!
//! op max domain 2 arity 2
//! 0 0 : 0
//! 0 1 : 1
//! 1 0 : 1
//! 1 1 : 1
//!
//! weighting w domain 2 arity 2
//! e1 : -1
//! max : 1
//!
//! instance p domain 2 vars a b c
//! constraint neq a b
//! constraint neq b c scale 1/2
//! ```
//!
//! Weightings name projections `e1 .. ek` (1-based) and otherwise refer to
//! operations by name; omitted projections weigh 0. Instances refer to
//! relations by name. Names resolve across every source of a workspace.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::operation::Operation;
use crate::relation::{Domain, Tuple, WeightedRelation};
use crate::scalar::Scalar;
use crate::vcsp::VcspInstance;
use crate::weighting::{RawWeighting, Weighting};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Relation,
    Op,
    Weighting,
    Instance,
}

struct Block<'a> {
    kind: Kind,
    name: String,
    domain: usize,
    /// arity for relations, operations and weightings
    arity: usize,
    vars: Vec<String>,
    header_line: usize,
    body: Vec<(usize, Vec<&'a str>)>,
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| perr(line, format!("expected {what}, found `{tok}`")))
}

fn parse_value(tok: &str, d: usize, line: usize) -> Result<u8> {
    match tok.parse::<usize>() {
        Ok(v) if v < d => Ok(v as u8),
        _ => Err(perr(
            line,
            format!("`{tok}` is not a domain element below {d}"),
        )),
    }
}

fn parse_weight<S: Scalar>(tok: &str, line: usize) -> Result<S> {
    S::parse(tok).ok_or_else(|| perr(line, format!("`{tok}` is not a rational number")))
}

fn blocks(text: &str) -> Result<Vec<Block<'_>>> {
    let mut out: Vec<Block<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let kind = match toks[0] {
            "relation" => Some(Kind::Relation),
            "op" => Some(Kind::Op),
            "weighting" => Some(Kind::Weighting),
            "instance" => Some(Kind::Instance),
            _ => None,
        };
        let Some(kind) = kind else {
            match out.last_mut() {
                Some(b) => b.body.push((line, toks)),
                None => return Err(perr(line, "content before the first block header")),
            }
            continue;
        };
        if toks.len() < 4 || toks[2] != "domain" {
            return Err(perr(line, format!("malformed {} header", toks[0])));
        }
        let name = toks[1].to_string();
        let domain = parse_usize(toks[3], line, "a domain size")?;
        let (arity, vars) = if kind == Kind::Instance {
            if toks.get(4) != Some(&"vars") {
                return Err(perr(line, "instance header needs `vars`"));
            }
            (0, toks[5..].iter().map(|s| s.to_string()).collect())
        } else {
            if toks.len() != 6 || toks[4] != "arity" {
                return Err(perr(line, format!("malformed {} header", toks[0])));
            }
            (parse_usize(toks[5], line, "an arity")?, Vec::new())
        };
        out.push(Block {
            kind,
            name,
            domain,
            arity,
            vars,
            header_line: line,
            body: Vec::new(),
        });
    }
    Ok(out)
}

/// Splits `lhs : rhs` into its two token lists.
fn split_colon<'a>(toks: &[&'a str], line: usize) -> Result<(Vec<&'a str>, &'a str)> {
    let pos = toks
        .iter()
        .position(|t| *t == ":")
        .ok_or_else(|| perr(line, "expected `:`"))?;
    if pos + 2 != toks.len() {
        return Err(perr(line, "expected exactly one value after `:`"));
    }
    Ok((toks[..pos].to_vec(), toks[pos + 1]))
}

fn domain_of(size: usize, line: usize) -> Result<Domain> {
    Domain::new(size).map_err(|e| perr(line, e.to_string()))
}

fn build_relation<S: Scalar>(b: &Block<'_>) -> Result<WeightedRelation<S>> {
    let d = domain_of(b.domain, b.header_line)?;
    let mut entries: Vec<(Tuple, S)> = Vec::new();
    for (line, toks) in &b.body {
        let (lhs, w) = split_colon(toks, *line)?;
        if lhs.len() != b.arity {
            return Err(perr(*line, format!("expected {} tuple entries", b.arity)));
        }
        let t = Tuple(
            lhs.iter()
                .map(|s| parse_value(s, b.domain, *line))
                .collect::<Result<_>>()?,
        );
        if let Some((prev, _)) = entries.last() {
            if *prev >= t {
                return Err(perr(*line, "tuples must be strictly increasing"));
            }
        }
        entries.push((t, parse_weight(w, *line)?));
    }
    WeightedRelation::new(d, b.arity, entries).map_err(|e| perr(b.header_line, e.to_string()))
}

fn build_operation(b: &Block<'_>) -> Result<Operation> {
    let d = domain_of(b.domain, b.header_line)?;
    if b.arity == 0 {
        return Err(perr(b.header_line, "operations need arity at least 1"));
    }
    let n = d
        .tuple_count(b.arity)
        .ok_or_else(|| perr(b.header_line, "operation table too large"))?;
    if b.body.len() != n {
        return Err(perr(
            b.header_line,
            format!("expected {n} table lines, found {}", b.body.len()),
        ));
    }
    let mut table = Vec::with_capacity(n);
    for (rank, (line, toks)) in b.body.iter().enumerate() {
        let (lhs, out) = split_colon(toks, *line)?;
        let input: Vec<u8> = lhs
            .iter()
            .map(|s| parse_value(s, b.domain, *line))
            .collect::<Result<_>>()?;
        if input.len() != b.arity || d.rank(&input) != rank {
            return Err(perr(
                *line,
                "table lines must list every input in lexicographic order",
            ));
        }
        table.push(parse_value(out, b.domain, *line)?);
    }
    Operation::new(d, b.arity, table).map_err(|e| perr(b.header_line, e.to_string()))
}

/// Loaded named objects sharing one domain.
#[derive(Clone, Debug, Default)]
pub struct Workspace<S> {
    domain: Option<Domain>,
    relations: BTreeMap<String, WeightedRelation<S>>,
    operations: BTreeMap<String, Operation>,
    weightings: BTreeMap<String, RawWeighting<S>>,
    instances: BTreeMap<String, VcspInstance<S>>,
}

impl<S: Scalar> Workspace<S> {
    pub fn new() -> Self {
        Workspace {
            domain: None,
            relations: BTreeMap::new(),
            operations: BTreeMap::new(),
            weightings: BTreeMap::new(),
            instances: BTreeMap::new(),
        }
    }

    pub fn load_str(&mut self, text: &str) -> Result<()> {
        self.load_all(&[text])
    }

    /// Loads several sources. Relations and operations of every source are
    /// registered before weightings and instances are resolved.
    pub fn load_all(&mut self, sources: &[&str]) -> Result<()> {
        let parsed: Vec<Vec<Block<'_>>> =
            sources.iter().map(|t| blocks(t)).collect::<Result<_>>()?;
        let all: Vec<&Block<'_>> = parsed.iter().flatten().collect();
        for b in &all {
            self.check_domain(b)?;
            match b.kind {
                Kind::Relation => {
                    let r = build_relation(b)?;
                    insert_unique(&mut self.relations, b, r)?;
                }
                Kind::Op => {
                    let f = build_operation(b)?;
                    insert_unique(&mut self.operations, b, f)?;
                }
                _ => {}
            }
        }
        for b in &all {
            match b.kind {
                Kind::Weighting => {
                    let w = self.build_weighting(b)?;
                    insert_unique(&mut self.weightings, b, w)?;
                }
                Kind::Instance => {
                    let p = self.build_instance(b)?;
                    insert_unique(&mut self.instances, b, p)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn check_domain(&mut self, b: &Block<'_>) -> Result<()> {
        let d = domain_of(b.domain, b.header_line)?;
        match self.domain {
            Some(cur) if cur != d => Err(Error::input(format!(
                "`{}` is over domain {} but the workspace uses domain {}",
                b.name,
                d.size(),
                cur.size()
            ))),
            _ => {
                self.domain = Some(d);
                Ok(())
            }
        }
    }

    fn build_weighting(&self, b: &Block<'_>) -> Result<RawWeighting<S>> {
        let d = domain_of(b.domain, b.header_line)?;
        let k = b.arity;
        let mut entries: Vec<(Operation, S)> = Vec::new();
        for (line, toks) in &b.body {
            let (lhs, w) = split_colon(toks, *line)?;
            let [name] = lhs[..] else {
                return Err(perr(*line, "expected `<operation> : <weight>`"));
            };
            let f = self.resolve_op(name, d, k, *line)?;
            entries.push((f, parse_weight(w, *line)?));
        }
        RawWeighting::new(d, k, entries).map_err(|e| perr(b.header_line, e.to_string()))
    }

    fn resolve_op(&self, name: &str, d: Domain, k: usize, line: usize) -> Result<Operation> {
        if let Some(i) = name.strip_prefix('e').and_then(|s| s.parse::<usize>().ok()) {
            if !self.operations.contains_key(name) {
                if i == 0 || i > k {
                    return Err(perr(
                        line,
                        format!("projection `{name}` out of range for arity {k}"),
                    ));
                }
                return Operation::projection(d, k, i - 1);
            }
        }
        let f = self
            .operations
            .get(name)
            .ok_or_else(|| perr(line, format!("unknown operation `{name}`")))?;
        if f.arity() != k {
            return Err(perr(
                line,
                format!("operation `{name}` has arity {}, not {k}", f.arity()),
            ));
        }
        Ok(f.clone())
    }

    fn build_instance(&self, b: &Block<'_>) -> Result<VcspInstance<S>> {
        let d = domain_of(b.domain, b.header_line)?;
        let mut p =
            VcspInstance::new(d, b.vars.clone()).map_err(|e| perr(b.header_line, e.to_string()))?;
        for (line, toks) in &b.body {
            if toks[0] != "constraint" || toks.len() < 2 {
                return Err(perr(*line, "expected `constraint <relation> <vars..>`"));
            }
            let rel = self
                .relations
                .get(toks[1])
                .ok_or_else(|| perr(*line, format!("unknown relation `{}`", toks[1])))?;
            let mut rest = &toks[2..];
            let mut scale = S::one();
            if rest.len() == rel.arity() + 2 && rest[rest.len() - 2] == "scale" {
                scale = parse_weight(rest[rest.len() - 1], *line)?;
                rest = &rest[..rest.len() - 2];
            }
            if rest.len() != rel.arity() {
                return Err(perr(
                    *line,
                    format!("relation `{}` has arity {}", toks[1], rel.arity()),
                ));
            }
            let scope = rest
                .iter()
                .map(|v| {
                    p.var_index(v)
                        .ok_or_else(|| perr(*line, format!("unknown variable `{v}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            p.add_scaled_constraint(scope, rel.clone(), scale)
                .map_err(|e| perr(*line, e.to_string()))?;
        }
        Ok(p)
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain
    }

    pub fn relation(&self, name: &str) -> Result<&WeightedRelation<S>> {
        lookup(&self.relations, name, "relation")
    }

    pub fn operation(&self, name: &str) -> Result<&Operation> {
        lookup(&self.operations, name, "operation")
    }

    /// A weighting, which must be non-negative off the projections.
    pub fn weighting(&self, name: &str) -> Result<Weighting<S>> {
        lookup(&self.weightings, name, "weighting")?
            .clone()
            .into_proper()
            .ok_or_else(|| {
                Error::input(format!("`{name}` has negative weight on a non-projection"))
            })
    }

    pub fn raw_weighting(&self, name: &str) -> Result<&RawWeighting<S>> {
        lookup(&self.weightings, name, "weighting")
    }

    pub fn instance(&self, name: &str) -> Result<&VcspInstance<S>> {
        lookup(&self.instances, name, "instance")
    }

    pub fn relations(&self) -> &BTreeMap<String, WeightedRelation<S>> {
        &self.relations
    }

    pub fn operations(&self) -> &BTreeMap<String, Operation> {
        &self.operations
    }

    pub fn weightings(&self) -> &BTreeMap<String, RawWeighting<S>> {
        &self.weightings
    }

    pub fn instances(&self) -> &BTreeMap<String, VcspInstance<S>> {
        &self.instances
    }
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, b: &Block<'_>, v: T) -> Result<()> {
    if map.insert(b.name.clone(), v).is_some() {
        return Err(perr(b.header_line, format!("`{}` defined twice", b.name)));
    }
    Ok(())
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, what: &str) -> Result<&'a T> {
    map.get(name)
        .ok_or_else(|| Error::input(format!("no {what} named `{name}`")))
}

fn join(t: &[u8]) -> String {
    t.iter().map(u8::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_relation<S: Scalar>(name: &str, rel: &WeightedRelation<S>) -> String {
    let mut s = format!(
        "relation {name} domain {} arity {}\n",
        rel.domain().size(),
        rel.arity()
    );
    for (t, w) in rel.iter() {
        if t.is_empty() {
            let _ = writeln!(s, ": {w}");
        } else {
            let _ = writeln!(s, "{} : {w}", join(t));
        }
    }
    s
}

pub fn write_operation(name: &str, f: &Operation) -> String {
    let d = f.domain();
    let mut s = format!("op {name} domain {} arity {}\n", d.size(), f.arity());
    for (x, v) in d.tuples(f.arity()).zip(f.table()) {
        let _ = writeln!(s, "{} : {v}", join(&x));
    }
    s
}

/// The weighting block preceded by an `op` block for every support
/// operation that is not a projection, named `<name>_f<i>`. Every support
/// operation is listed, zeros included.
pub fn write_weighting<S: Scalar>(name: &str, w: &RawWeighting<S>) -> String {
    let mut ops = String::new();
    let mut body = String::new();
    let mut i = 0;
    for (f, v) in w.iter() {
        let label = match f.projection_index() {
            Some(p) => format!("e{}", p + 1),
            None => {
                let label = format!("{name}_f{i}");
                i += 1;
                ops.push_str(&write_operation(&label, f));
                ops.push('\n');
                label
            }
        };
        let _ = writeln!(body, "{label} : {v}");
    }
    format!(
        "{ops}weighting {name} domain {} arity {}\n{body}",
        w.domain().size(),
        w.arity()
    )
}

/// The instance block, with relations named by `known` where they match
/// and otherwise emitted as `<name>_r<i>` relation blocks first.
pub fn write_instance_bundle<S: Scalar>(
    name: &str,
    p: &VcspInstance<S>,
    known: &[(String, WeightedRelation<S>)],
) -> String {
    let mut rels = String::new();
    let mut fresh: Vec<(String, &WeightedRelation<S>)> = Vec::new();
    let mut body = String::new();
    for c in p.constraints() {
        let rname = match known.iter().find(|(_, r)| *r == c.relation) {
            Some((n, _)) => n.clone(),
            None => match fresh.iter().find(|(_, r)| **r == c.relation) {
                Some((n, _)) => n.clone(),
                None => {
                    let n = format!("{name}_r{}", fresh.len());
                    rels.push_str(&write_relation(&n, &c.relation));
                    rels.push('\n');
                    fresh.push((n.clone(), &c.relation));
                    n
                }
            },
        };
        let _ = write!(body, "constraint {rname}");
        for &v in &c.scope {
            let _ = write!(body, " {}", p.variables()[v]);
        }
        if !c.scale.is_one() {
            let _ = write!(body, " scale {}", c.scale);
        }
        body.push('\n');
    }
    let mut header = format!("instance {name} domain {} vars", p.domain().size());
    for v in p.variables() {
        header.push(' ');
        header.push_str(v);
    }
    format!("{rels}{header}\n{body}")
}
