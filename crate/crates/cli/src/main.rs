use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wclone::classify::classify_boolean;
use wclone::galois::{wclone_member, wrelclone_member, GaloisLimits};
use wclone::lp::LpLimits;
use wclone::operation::clone_generate;
use wclone::polymorphism::{pol_k, PolLimits, DEFAULT_MAX_OPS, DEFAULT_MAX_SEQUENCES};
use wclone::text::{
    write_instance_bundle, write_operation, write_relation, write_weighting, Workspace,
};
use wclone::vcsp::{SolveConfig, DEFAULT_MAX_ASSIGNMENTS, DEFAULT_MAX_WITNESSES};
use wclone::weighting::{is_weighted_polymorphism, wt_superpose, CanonicalTag, WpolVerdict};
use wclone::{
    CloneMembershipResult, Domain, Error, Operation, Rational, RawWeighting, RelMembershipResult,
    WeightedRelation,
};

#[derive(Parser)]
#[command(
    name = "wclone",
    version,
    about = "Exact valued constraint satisfaction toolkit"
)]
struct Cli {
    #[command(flatten)]
    caps: Caps,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Caps {
    /// Cap on assignments enumerated by the solver.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ASSIGNMENTS)]
    max_assignments: usize,
    /// Cap on operations enumerated per clone or polymorphism slice.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_OPS)]
    max_ops: usize,
    /// Cap on LP columns in the membership deciders.
    #[arg(long, global = true, default_value_t = wclone::galois::DEFAULT_MAX_MATCHES)]
    max_matches: usize,
    /// Cap on LP rows.
    #[arg(long, global = true, default_value_t = wclone::lp::DEFAULT_MAX_ROWS)]
    max_lp_rows: usize,
    /// Cap on tuple sequences checked per weighted polymorphism test.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SEQUENCES)]
    max_sequences: usize,
}

impl Caps {
    fn pol(&self) -> PolLimits {
        PolLimits {
            max_sequences: self.max_sequences,
            max_ops: self.max_ops,
        }
    }

    fn galois(&self, fast_path: bool) -> GaloisLimits {
        GaloisLimits {
            pol: self.pol(),
            lp: LpLimits {
                max_rows: self.max_lp_rows,
                ..LpLimits::default()
            },
            max_matches: self.max_matches,
            max_assignments: self.max_assignments,
            fast_path,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Mode {
    Wrelclone,
    Wclone,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimum total cost of an instance, with optimal assignments.
    Solve {
        files: Vec<PathBuf>,
        #[arg(long)]
        instance: String,
        /// Number of optimal assignments to list.
        #[arg(long, default_value_t = DEFAULT_MAX_WITNESSES)]
        witnesses: usize,
    },
    /// The relation an instance expresses on a list of variables.
    Project {
        files: Vec<PathBuf>,
        #[arg(long)]
        instance: String,
        /// Comma-separated variable names; repeats allowed, "" for arity 0.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, default_value = "projection")]
        name: String,
    },
    /// Membership in a weighted relational clone or a weighted clone.
    Member {
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Comma-separated relation names (wrelclone) or weighting names (wclone).
        #[arg(long, value_delimiter = ',')]
        language: Vec<String>,
        #[arg(long)]
        target: String,
        /// Directory for witness files; without it witnesses go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the canonical separator library and always solve the LP.
        #[arg(long)]
        no_library: bool,
    },
    /// Whether a weighting is a weighted polymorphism of a relation.
    CheckWpol {
        files: Vec<PathBuf>,
        #[arg(long)]
        weighting: String,
        #[arg(long)]
        relation: String,
    },
    /// Tractable or NP-hard verdict for a Boolean language.
    ClassifyBoolean {
        files: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        language: Vec<String>,
    },
    /// Slices of the clone generated by a set of operations.
    CloneGen {
        files: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        generators: Vec<String>,
        #[arg(long)]
        cap: usize,
        /// Domain size when no file fixes it.
        #[arg(long, default_value_t = 2)]
        domain: usize,
        /// Directory for one operation file per slice.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The polymorphisms of a given arity of a language.
    Pol {
        files: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        language: Vec<String>,
        #[arg(long)]
        arity: usize,
        #[arg(long, default_value_t = 2)]
        domain: usize,
        /// File receiving the operations.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Superposition of a weighting by a list of operations.
    Superpose {
        files: Vec<PathBuf>,
        #[arg(long)]
        weighting: String,
        /// Operation names; `e<i>` is the 1-based projection of the inner arity.
        #[arg(long, value_delimiter = ',')]
        ops: Vec<String>,
        /// Inner arity, needed when every listed operation is a projection.
        #[arg(long)]
        arity: Option<usize>,
        /// Clone generators; the result is supported on the clone's slice.
        #[arg(long, value_delimiter = ',')]
        generators: Option<Vec<String>>,
        #[arg(long, default_value = "superposition")]
        name: String,
    },
}

/// Failure of a command, with its exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Parse { .. } => 2,
            Error::Resource { .. } => 3,
            Error::Internal(_) => 1,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

type CmdResult = Result<String, Failure>;

fn load(files: &[PathBuf]) -> Result<Workspace<Rational>, Failure> {
    let mut texts = Vec::with_capacity(files.len());
    for f in files {
        let t = fs::read_to_string(f).map_err(|e| input(format!("{}: {e}", f.display())))?;
        texts.push(t);
    }
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let mut ws = Workspace::new();
    match ws.load_all(&refs) {
        Ok(()) => Ok(ws),
        Err(e @ Error::Parse { .. }) => {
            // name the file: syntax errors reproduce when a file is loaded alone
            let culprit = files.iter().zip(&texts).find(|(_, t)| {
                let mut alone = Workspace::<Rational>::new();
                alone.load_str(t).err().as_ref() == Some(&e)
            });
            let mut f = Failure::from(e);
            if let Some((path, _)) = culprit {
                f.msg = format!("{}: {}", path.display(), f.msg);
            }
            Err(f)
        }
        Err(e) => Err(e.into()),
    }
}

fn names(list: &[String]) -> impl Iterator<Item = &str> {
    list.iter().map(String::as_str).filter(|s| !s.is_empty())
}

fn relations(ws: &Workspace<Rational>, list: &[String]) -> Result<Vec<WeightedRelation>, Failure> {
    names(list)
        .map(|n| ws.relation(n).cloned().map_err(Failure::from))
        .collect()
}

fn domain_of(ws: &Workspace<Rational>, fallback: usize) -> Result<Domain, Failure> {
    match ws.domain() {
        Some(d) => Ok(d),
        None => Ok(Domain::new(fallback)?),
    }
}

fn write_file(dir: &Path, file: &str, text: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(file);
    fs::write(&path, text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Appends `text` to the report, or writes it to `dir/file` and records
/// the path.
fn emit(
    report: &mut String,
    out: &Option<PathBuf>,
    file: &str,
    label: &str,
    text: &str,
) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            let path = write_file(dir, file, text)?;
            let _ = writeln!(report, "{label} {}", path.display());
        }
        None => {
            report.push('\n');
            report.push_str(text);
        }
    }
    Ok(())
}

fn solve(files: &[PathBuf], name: &str, witnesses: usize, caps: &Caps) -> CmdResult {
    let ws = load(files)?;
    let p = ws.instance(name)?;
    let res = p.solve(SolveConfig {
        max_assignments: caps.max_assignments,
        max_witnesses: witnesses,
    })?;
    let Some(opt) = res.optimum else {
        return Ok("infeasible\n".into());
    };
    let mut s = format!("optimum {opt}\n");
    for w in &res.witnesses {
        let parts: Vec<String> = p
            .variables()
            .iter()
            .zip(w)
            .map(|(v, x)| format!("{v}={x}"))
            .collect();
        let _ = writeln!(s, "{}", format!("witness {}", parts.join(" ")).trim_end());
    }
    Ok(s)
}

fn project(
    files: &[PathBuf],
    name: &str,
    vars: &[String],
    out_name: &str,
    caps: &Caps,
) -> CmdResult {
    let ws = load(files)?;
    let p = ws.instance(name)?;
    let list: Vec<&str> = names(vars).collect();
    let rel = p.project_names(
        &list,
        SolveConfig {
            max_assignments: caps.max_assignments,
            max_witnesses: 0,
        },
    )?;
    Ok(write_relation(out_name, &rel))
}

fn member(
    files: &[PathBuf],
    mode: Mode,
    language: &[String],
    target: &str,
    out: &Option<PathBuf>,
    no_library: bool,
    caps: &Caps,
) -> CmdResult {
    let ws = load(files)?;
    let limits = caps.galois(!no_library);
    let mut s = String::new();
    match mode {
        Mode::Wrelclone => {
            let gamma = relations(&ws, language)?;
            let t = ws.relation(target)?;
            match wrelclone_member(&gamma, t, &[], limits)? {
                RelMembershipResult::Member {
                    gadget,
                    list,
                    shift,
                } => {
                    let _ = writeln!(s, "member");
                    let _ = writeln!(s, "shift {shift}");
                    let cols: Vec<&str> = list
                        .iter()
                        .map(|&v| gadget.variables()[v].as_str())
                        .collect();
                    let _ = writeln!(s, "list {}", cols.join(","));
                    let text = write_instance_bundle("gadget", &gadget, &[]);
                    emit(&mut s, out, "gadget.txt", "gadget", &text)?;
                }
                RelMembershipResult::NonMember {
                    separator,
                    source,
                    invariance,
                } => {
                    let _ = writeln!(s, "nonmember");
                    let _ = writeln!(s, "source {source:?}");
                    if let Some(inv) = invariance {
                        let img: Vec<String> = inv.image.iter().map(u8::to_string).collect();
                        let _ = writeln!(s, "undefined-image {}", img.join(" "));
                    }
                    let text = write_weighting("separator", &separator);
                    emit(&mut s, out, "separator.txt", "separator", &text)?;
                }
            }
        }
        Mode::Wclone => {
            let wsets = names(language)
                .map(|n| ws.weighting(n).map_err(Failure::from))
                .collect::<Result<Vec<_>, _>>()?;
            let lang_names: Vec<&str> = names(language).collect();
            let t = ws.weighting(target)?;
            match wclone_member(&wsets, &t, limits)? {
                CloneMembershipResult::Member { recipe } => {
                    let _ = writeln!(s, "member");
                    let mut ops = String::new();
                    for (i, term) in recipe.iter().enumerate() {
                        let mut labels = Vec::new();
                        for (j, g) in term.ops.iter().enumerate() {
                            let label = format!("recipe_t{i}_g{j}");
                            ops.push_str(&write_operation(&label, g));
                            ops.push('\n');
                            labels.push(label);
                        }
                        let _ = writeln!(
                            s,
                            "term {} coeff {} ops {}",
                            lang_names[term.source],
                            term.coeff,
                            labels.join(",")
                        );
                    }
                    if !ops.is_empty() {
                        emit(
                            &mut s,
                            out,
                            "recipe.txt",
                            "recipe",
                            ops.trim_end_matches('\n'),
                        )?;
                        if out.is_none() {
                            s.push('\n');
                        }
                    }
                }
                CloneMembershipResult::NonMember { separator } => {
                    let _ = writeln!(s, "nonmember");
                    let text = write_relation("separator", &separator);
                    emit(&mut s, out, "separator.txt", "separator", &text)?;
                }
            }
        }
    }
    Ok(s)
}

fn check_wpol(files: &[PathBuf], weighting: &str, relation: &str, caps: &Caps) -> CmdResult {
    let ws = load(files)?;
    let w = ws.raw_weighting(weighting)?;
    let r = ws.relation(relation)?;
    let mut s = String::new();
    match is_weighted_polymorphism(w, r, caps.max_sequences)? {
        WpolVerdict::Improves => s.push_str("improves\n"),
        WpolVerdict::Violates { tuples, sum } => {
            let _ = writeln!(s, "violates {sum}");
            for t in tuples {
                let vals: Vec<String> = t.iter().map(u8::to_string).collect();
                let _ = writeln!(s, "tuple {}", vals.join(" "));
            }
        }
        WpolVerdict::NotPolymorphism { op, tuples } => {
            s.push_str("not-polymorphism\n");
            for t in tuples {
                let vals: Vec<String> = t.iter().map(u8::to_string).collect();
                let _ = writeln!(s, "tuple {}", vals.join(" "));
            }
            s.push('\n');
            s.push_str(&write_operation("offending", &op));
        }
    }
    Ok(s)
}

fn classify(files: &[PathBuf], language: &[String], caps: &Caps) -> CmdResult {
    let ws = load(files)?;
    let gamma = relations(&ws, language)?;
    let v = classify_boolean(&gamma, caps.max_sequences)?;
    let mut s = match (&v.witness, v.reason) {
        (Some((tag, _)), _) => format!("{} {tag}\n", v.status),
        (None, Some(reason)) => format!("{} {reason}\n", v.status),
        (None, None) => format!("{}\n", v.status),
    };
    for tag in CanonicalTag::ALL {
        let _ = writeln!(s, "{tag} {}", if v.types[&tag] { "yes" } else { "no" });
    }
    Ok(s)
}

fn operations(ws: &Workspace<Rational>, list: &[String]) -> Result<Vec<Operation>, Failure> {
    names(list)
        .map(|n| ws.operation(n).cloned().map_err(Failure::from))
        .collect()
}

fn clone_gen(
    files: &[PathBuf],
    generators: &[String],
    cap: usize,
    domain: usize,
    out: &Option<PathBuf>,
    caps: &Caps,
) -> CmdResult {
    let ws = load(files)?;
    let d = domain_of(&ws, domain)?;
    let gens = operations(&ws, generators)?;
    let slices = clone_generate(d, &gens, cap, caps.max_ops)?;
    let mut s = String::new();
    for k in 1..=cap {
        let slice = slices.slice(k).expect("slice within cap");
        let _ = writeln!(s, "slice {k} {}", slice.len());
        if let Some(dir) = out {
            let text: Vec<String> = slice
                .iter()
                .enumerate()
                .map(|(i, f)| write_operation(&format!("c{k}_{i}"), f))
                .collect();
            let path = write_file(dir, &format!("clone_{k}.txt"), &text.join("\n"))?;
            let _ = writeln!(s, "wrote {}", path.display());
        }
    }
    Ok(s)
}

fn pol(
    files: &[PathBuf],
    language: &[String],
    arity: usize,
    domain: usize,
    out: &Option<PathBuf>,
    caps: &Caps,
) -> CmdResult {
    let ws = load(files)?;
    let d = domain_of(&ws, domain)?;
    let gamma = relations(&ws, language)?;
    let ops = pol_k(d, &gamma, arity, caps.pol())?;
    let mut s = format!("pol {arity} {}\n", ops.len());
    if let Some(path) = out {
        let text: Vec<String> = ops
            .iter()
            .enumerate()
            .map(|(i, f)| write_operation(&format!("p{arity}_{i}"), f))
            .collect();
        fs::write(path, text.join("\n")).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let _ = writeln!(s, "wrote {}", path.display());
    }
    Ok(s)
}

/// Resolves an operation name, reading `e<i>` as a projection of arity
/// `arity` unless an operation of that name is loaded.
fn resolve_op(
    ws: &Workspace<Rational>,
    name: &str,
    d: Domain,
    arity: Option<usize>,
) -> Result<Operation, Failure> {
    if let Ok(f) = ws.operation(name) {
        return Ok(f.clone());
    }
    if let Some(i) = name.strip_prefix('e').and_then(|i| i.parse::<usize>().ok()) {
        let l = arity.ok_or_else(|| input(format!("`{name}` needs the inner arity")))?;
        if i == 0 {
            return Err(input("projections are numbered from e1"));
        }
        return Ok(Operation::projection(d, l, i - 1)?);
    }
    Err(input(format!("no operation named `{name}`")))
}

fn superpose(
    files: &[PathBuf],
    weighting: &str,
    ops: &[String],
    arity: Option<usize>,
    generators: &Option<Vec<String>>,
    out_name: &str,
    caps: &Caps,
) -> CmdResult {
    let ws = load(files)?;
    let w: &RawWeighting = ws.raw_weighting(weighting)?;
    let d = w.domain();
    let named_arity = names(ops).find_map(|n| ws.operation(n).ok().map(Operation::arity));
    let l = arity.or(named_arity);
    let gs = names(ops)
        .map(|n| resolve_op(&ws, n, d, l))
        .collect::<Result<Vec<_>, _>>()?;
    if gs.len() != w.arity() {
        return Err(input(format!(
            "{} operations given for a weighting of arity {}",
            gs.len(),
            w.arity()
        )));
    }
    let raw = match generators {
        Some(gens) => {
            let gens = operations(&ws, gens)?;
            let cap = w.arity().max(gs[0].arity());
            let slices = clone_generate(d, &gens, cap, caps.max_ops)?;
            wt_superpose(w, &gs, &slices)?
        }
        None => w.superpose_free(&gs)?,
    };
    let mut s = match raw.negative_non_projections().first() {
        None => "proper\n".to_string(),
        Some(f) => {
            let vals: Vec<String> = f.table().iter().map(u8::to_string).collect();
            format!("improper {}\n", vals.join(""))
        }
    };
    s.push('\n');
    s.push_str(&write_weighting(out_name, &raw));
    Ok(s)
}

fn run(cli: &Cli) -> CmdResult {
    let caps = &cli.caps;
    match &cli.cmd {
        Cmd::Solve {
            files,
            instance,
            witnesses,
        } => solve(files, instance, *witnesses, caps),
        Cmd::Project {
            files,
            instance,
            vars,
            name,
        } => project(files, instance, vars, name, caps),
        Cmd::Member {
            files,
            mode,
            language,
            target,
            out,
            no_library,
        } => member(files, *mode, language, target, out, *no_library, caps),
        Cmd::CheckWpol {
            files,
            weighting,
            relation,
        } => check_wpol(files, weighting, relation, caps),
        Cmd::ClassifyBoolean { files, language } => classify(files, language, caps),
        Cmd::CloneGen {
            files,
            generators,
            cap,
            domain,
            out,
        } => clone_gen(files, generators, *cap, *domain, out, caps),
        Cmd::Pol {
            files,
            language,
            arity,
            domain,
            out,
        } => pol(files, language, *arity, *domain, out, caps),
        Cmd::Superpose {
            files,
            weighting,
            ops,
            arity,
            generators,
            name,
        } => superpose(files, weighting, ops, *arity, generators, name, caps),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("wclone: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
