//! The `modgraph` command line: argument parsing, input loading and reports.
//!
//! Exit codes: 0 pass, 1 fail with witnesses, 2 input or usage error.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus;
use crate::elementary::{classify_elementary, factorize};
use crate::graph::{FeynmanGraph, GenusGraph, GraphJson};
use crate::gt::{self, GtPair, ReducedWord};
use crate::morphism::{hom_set, GraphicalMap, MapJson, DEFAULT_BUDGET};
use crate::operad::{builtin, materialize, ModularOperad, OperadJson, OperadRef, TableOperad};
use crate::presheaf::{
    extract_modular_operad, is_strict_inner_kan, is_strict_segal, nerve_presheaf, representable,
    terminal_presheaf, FinPresheaf, PresheafJson, Universe,
};
use crate::profinite::{divisor_closure, FiniteGroup, InverseSystem, ProfiniteInt};
use crate::validate::{validate_modular_operad, ValidateOptions};
use crate::variants::{in_u0, in_ucyc, stable_samples, ust_codegeneracy_check, verify_sieve};

#[derive(Parser, Debug)]
#[command(name = "modgraph", version, about = "Feynman graphs, modular operads and their nerves")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Print the report as one line of JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print nothing; only the exit code is meaningful.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[arg(long, global = true, default_value_t = 4)]
    pub max_degree: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Check a graph and report its invariants.
    GraphValidate { graph: String },
    /// Enumerate graphical maps H → G.
    Homs {
        source: String,
        target: String,
        /// Include every map in the report.
        #[arg(long)]
        maps: bool,
    },
    /// Factor a map (a map file, or every map between two graphs).
    Factorize {
        input: String,
        target: Option<String>,
    },
    /// Check the modular operad axioms.
    OperadValidate {
        operad: String,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        #[arg(long, default_value_t = 3)]
        full_perm_arity: usize,
    },
    /// Build the nerve of an operad on the carried graphs.
    Nerve {
        operad: String,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        /// Write the presheaf JSON here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Check the strict Segal condition.
    SegalCheck {
        presheaf: String,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
    },
    /// Check unique inner horn fillers.
    HornCheck {
        presheaf: String,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
    },
    /// Read a modular operad off a strict Segal presheaf.
    Extract {
        presheaf: String,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        /// Write the operad JSON here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Check that a predicate cuts out a sieve.
    SieveCheck {
        manifest: Option<String>,
        /// u0, ucyc, or the deliberately broken betti-eq-1.
        #[arg(long, default_value = "u0")]
        predicate: String,
    },
    /// Check that stable genus graphs admit no codegeneracies.
    StableCheck {
        manifest: Option<String>,
        #[arg(long, default_value_t = 1)]
        max_genus: u32,
    },
    /// Total genus of a genus graph.
    Genus { graph: String },
    /// Residues of an integer at a divisor-closed level set.
    Zhat {
        #[arg(allow_hyphen_values = true)]
        k: i64,
        /// Comma-separated levels; closed under divisors if --close is given.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<u64>,
        #[arg(long)]
        close: bool,
        #[arg(long, allow_hyphen_values = true)]
        add: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        mul: Option<i64>,
    },
    /// Limit of a finite inverse system.
    Limit { system: String },
    /// Check the GT relations (I) and (II).
    GtCheck {
        #[arg(long, allow_hyphen_values = true)]
        lambda: i64,
        #[arg(long, default_value = "")]
        f: String,
        #[arg(long)]
        quotient: Option<String>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub verb: String,
    pub status: Status,
    pub witnesses: Vec<Value>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

/// An input problem: exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<(Value, Vec<Value>), InputError>;

fn pass(v: Value) -> Outcome {
    Ok((v, vec![]))
}

fn verdict(v: Value, witnesses: Vec<Value>) -> Outcome {
    Ok((v, witnesses))
}

fn verb_name(v: &Verb) -> &'static str {
    match v {
        Verb::GraphValidate { .. } => "graph-validate",
        Verb::Homs { .. } => "homs",
        Verb::Factorize { .. } => "factorize",
        Verb::OperadValidate { .. } => "operad-validate",
        Verb::Nerve { .. } => "nerve",
        Verb::SegalCheck { .. } => "segal-check",
        Verb::HornCheck { .. } => "horn-check",
        Verb::Extract { .. } => "extract",
        Verb::SieveCheck { .. } => "sieve-check",
        Verb::StableCheck { .. } => "stable-check",
        Verb::Genus { .. } => "genus",
        Verb::Zhat { .. } => "zhat",
        Verb::Limit { .. } => "limit",
        Verb::GtCheck { .. } => "gt-check",
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Report {
    let start = Instant::now();
    let outcome = dispatch(&cli.verb, &cli.global);
    let (status, result, witnesses) = match outcome {
        Ok((result, w)) if w.is_empty() => (Status::Pass, result, w),
        Ok((result, w)) => (Status::Fail, result, w),
        Err(InputError(msg)) => (Status::Error, json!({ "error": msg }), vec![]),
    };
    Report {
        verb: verb_name(&cli.verb).to_string(),
        status,
        witnesses,
        result,
        timing_ms: cli.global.timing.then(|| start.elapsed().as_millis()),
    }
}

/// Parses `argv` (program name first) and runs it. Usage errors give an
/// `error` report; `--help` and `--version` give `None` after printing.
pub fn run<I, T>(argv: I) -> Option<(Report, Global)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => Some((execute(&cli), cli.global)),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            None
        }
        Err(e) => {
            let report = Report {
                verb: "usage".into(),
                status: Status::Error,
                witnesses: vec![],
                result: json!({ "error": e.to_string() }),
                timing_ms: None,
            };
            let global = Global {
                json: false,
                quiet: false,
                timing: false,
                max_degree: 4,
                budget: DEFAULT_BUDGET,
            };
            Some((report, global))
        }
    }
}

pub fn render(report: &Report, global: &Global) -> Option<String> {
    if global.quiet {
        return None;
    }
    Some(if global.json {
        serde_json::to_string(report).expect("report serializes")
    } else {
        serde_json::to_string_pretty(report).expect("report serializes")
    })
}

/// Entry point of the binary.
pub fn main_with_args() -> i32 {
    match run(std::env::args_os()) {
        None => 0,
        Some((report, global)) => {
            if let Some(s) = render(&report, &global) {
                // A closed pipe downstream is not our failure.
                let _ = writeln!(std::io::stdout(), "{s}");
            }
            if report.status == Status::Error && global.quiet {
                if let Some(msg) = report.result.get("error").and_then(Value::as_str) {
                    eprintln!("{msg}");
                }
            }
            report.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// Inputs

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{path}: {e}")))
}

fn is_file(s: &str) -> bool {
    Path::new(s).is_file()
}

/// A graph file (optionally with genus), or a corpus name like `star:3`.
fn load_genus_graph(arg: &str) -> Result<GenusGraph, InputError> {
    if is_file(arg) {
        let j: GraphJson = read_json(arg)?;
        return Ok(j.to_genus_graph()?);
    }
    if arg == "genus-figure" {
        return Ok(corpus::genus_figure());
    }
    corpus::by_name(arg)
        .map(GenusGraph::genus_zero)
        .ok_or_else(|| InputError(format!("`{arg}` is neither a file nor a known graph")))
}

fn load_graph(arg: &str) -> Result<FeynmanGraph, InputError> {
    Ok(load_genus_graph(arg)?.graph)
}

fn load_operad(arg: &str, max_arity: usize) -> Result<OperadRef, InputError> {
    if is_file(arg) {
        let j: OperadJson = read_json(arg)?;
        return Ok(Arc::new(TableOperad::from_json(&j)?));
    }
    Ok(builtin(arg, max_arity)?)
}

/// A presheaf file, `nerve:<operad>`, `terminal`, or `representable:<graph>`.
fn load_presheaf(arg: &str, g: &Global, max_arity: usize) -> Result<FinPresheaf, InputError> {
    if is_file(arg) {
        let j: PresheafJson = read_json(arg)?;
        let u = Arc::new(Universe::new(j.max_degree, j.max_arity)?);
        return Ok(FinPresheaf::from_json(&j, u)?);
    }
    let u = Arc::new(Universe::new(g.max_degree, max_arity)?);
    if arg == "terminal" {
        return Ok(terminal_presheaf(u));
    }
    if let Some(op) = arg.strip_prefix("nerve:") {
        let p = load_operad(op, max_arity)?;
        return Ok(nerve_presheaf(p.as_ref(), u)?);
    }
    if let Some(gs) = arg.strip_prefix("representable:") {
        let graph = Arc::new(load_graph(gs)?);
        return Ok(representable(&graph, u)?);
    }
    Err(InputError(format!("`{arg}` is not a presheaf file or source")))
}

/// Either a graph file, a corpus name, or an inline graph object.
#[derive(Deserialize)]
#[serde(untagged)]
enum GraphArg {
    Name(String),
    Inline(GraphJson),
}

impl GraphArg {
    fn load(&self) -> Result<GenusGraph, InputError> {
        match self {
            GraphArg::Name(s) => load_genus_graph(s),
            GraphArg::Inline(j) => Ok(j.to_genus_graph()?),
        }
    }
}

#[derive(Deserialize)]
struct SieveManifest {
    sources: Vec<GraphArg>,
    targets: Vec<GraphArg>,
}

#[derive(Deserialize)]
struct StableManifest {
    samples: Vec<GraphArg>,
}

// ---------------------------------------------------------------------------
// Verbs

fn dispatch(verb: &Verb, g: &Global) -> Outcome {
    match verb {
        Verb::GraphValidate { graph } => graph_validate(graph),
        Verb::Homs { source, target, maps } => homs(source, target, *maps, g),
        Verb::Factorize { input, target } => factorize_verb(input, target.as_deref(), g),
        Verb::OperadValidate {
            operad,
            max_arity,
            full_perm_arity,
        } => {
            let p = load_operad(operad, *max_arity)?;
            let r = validate_modular_operad(
                p.as_ref(),
                &ValidateOptions {
                    max_arity: *max_arity,
                    full_perm_arity: *full_perm_arity,
                },
            );
            let w = r.failures.iter().map(|f| json!(f)).collect();
            verdict(json!({ "operad": p.name(), "report": r }), w)
        }
        Verb::Nerve { operad, max_arity, out } => nerve(operad, *max_arity, out.as_deref(), g),
        Verb::SegalCheck { presheaf, max_arity } => {
            let x = load_presheaf(presheaf, g, *max_arity)?;
            let r = is_strict_segal(&x)?;
            let w = r.failure.iter().map(|f| json!(f)).collect();
            verdict(json!({ "presheaf": x.name, "report": r }), w)
        }
        Verb::HornCheck { presheaf, max_arity } => {
            let x = load_presheaf(presheaf, g, *max_arity)?;
            let r = is_strict_inner_kan(&x)?;
            let w = r.failure.iter().map(|f| json!(f)).collect();
            verdict(json!({ "presheaf": x.name, "report": r }), w)
        }
        Verb::Extract {
            presheaf,
            max_arity,
            out,
        } => extract(presheaf, *max_arity, out.as_deref(), g),
        Verb::SieveCheck { manifest, predicate } => sieve(manifest.as_deref(), predicate, g),
        Verb::StableCheck { manifest, max_genus } => stable(manifest.as_deref(), *max_genus, g),
        Verb::Genus { graph } => {
            let gg = load_genus_graph(graph)?;
            pass(json!({
                "total_genus": gg.total_genus()?,
                "betti": gg.graph.betti()?,
                "vertex_genus": gg.genus,
                "stable": gg.is_stable(),
            }))
        }
        Verb::Zhat {
            k,
            levels,
            close,
            add,
            mul,
        } => zhat(*k, levels, *close, *add, *mul),
        Verb::Limit { system } => limit(system),
        Verb::GtCheck {
            lambda,
            f,
            quotient,
            x,
            y,
        } => gt_check(*lambda, f, quotient.as_deref(), x.as_deref(), y.as_deref()),
    }
}

fn graph_validate(arg: &str) -> Outcome {
    let gg = match load_genus_graph(arg) {
        Ok(gg) => gg,
        // A readable file that does not describe a graph is a failed check.
        Err(InputError(msg)) if is_file(arg) => {
            return verdict(json!({ "valid": false }), vec![json!({ "error": msg })])
        }
        Err(e) => return Err(e),
    };
    let g = &gg.graph;
    pass(json!({
        "valid": true,
        "arcs": g.arc_count(),
        "vertices": g.vertex_count(),
        "edges": g.edges().len(),
        "internal_edges": g.internal_edges().len(),
        "boundary": g.boundary().iter().map(|&b| g.arc_name(b)).collect::<Vec<_>>(),
        "degree": g.degree(),
        "betti": g.betti()?,
        "canonical_code": g.canonical_code(),
    }))
}

fn homs(source: &str, target: &str, with_maps: bool, g: &Global) -> Outcome {
    let (h, t) = (Arc::new(load_graph(source)?), Arc::new(load_graph(target)?));
    let maps = hom_set(&h, &t, g.budget)?;
    let mut out = json!({ "count": maps.len() });
    if with_maps {
        out["maps"] = json!(maps.iter().map(|m| m.to_json(true)).collect::<Vec<MapJson>>());
    }
    pass(out)
}

fn factorize_verb(input: &str, target: Option<&str>, g: &Global) -> Outcome {
    let maps: Vec<GraphicalMap> = match target {
        None => {
            let j: MapJson = read_json(input)?;
            vec![GraphicalMap::from_json(&j, None, None)?]
        }
        Some(t) => {
            let (h, t) = (Arc::new(load_graph(input)?), Arc::new(load_graph(t)?));
            hom_set(&h, &t, g.budget)?
        }
    };
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for (k, m) in maps.iter().enumerate() {
        let f = factorize(m)?;
        let ok = f.recompose()? == *m;
        if !ok {
            witnesses.push(json!({ "map": k, "reason": "recomposition differs" }));
        }
        rows.push(json!({
            "map": k,
            "codegeneracies": f.codegeneracies.len(),
            "cofaces": f.cofaces.iter().map(classify_elementary).collect::<Vec<_>>(),
            "recomposes": ok,
        }));
    }
    verdict(json!({ "count": maps.len(), "factorizations": rows }), witnesses)
}

fn nerve(operad: &str, max_arity: usize, out: Option<&str>, g: &Global) -> Outcome {
    let p = load_operad(operad, max_arity)?;
    let u = Arc::new(Universe::new(g.max_degree, max_arity)?);
    let x = nerve_presheaf(p.as_ref(), u.clone())?;
    let pairs = x.check_functoriality();
    if let Some(path) = out {
        fs::write(path, serde_json::to_string(&x.to_json())?)?;
    }
    let sizes: Vec<Value> = (0..u.len())
        .map(|k| json!({ "graph": u.label(k), "size": x.size(k) }))
        .collect();
    let total: usize = (0..u.len()).map(|k| x.size(k)).sum();
    let result = json!({
        "operad": p.name(),
        "graphs": u.len(),
        "elements": total,
        "values": sizes,
        "functoriality_pairs": pairs.as_ref().ok(),
    });
    match pairs {
        Ok(_) => pass(result),
        Err(e) => verdict(result, vec![json!({ "functoriality": e })]),
    }
}

fn extract(arg: &str, max_arity: usize, out: Option<&str>, g: &Global) -> Outcome {
    let x = load_presheaf(arg, g, max_arity)?;
    let op = match extract_modular_operad(&x) {
        Ok(op) => op,
        Err(e) => return verdict(json!({ "presheaf": x.name }), vec![json!({ "error": e.to_string() })]),
    };
    let arity = op.max_arity();
    let table = materialize(&op, arity);
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(&table)?)?;
    }
    let r = validate_modular_operad(&op, &ValidateOptions { max_arity: arity, full_perm_arity: 3 });
    let w = r.failures.iter().map(|f| json!(f)).collect();
    verdict(
        json!({
            "presheaf": x.name,
            "colours": table.colours,
            "entries": table.entries.values().map(Vec::len).sum::<usize>(),
            "validation": r,
        }),
        w,
    )
}

fn sieve(manifest: Option<&str>, predicate: &str, g: &Global) -> Outcome {
    let pred: fn(&FeynmanGraph) -> bool = match predicate {
        "u0" => in_u0,
        "ucyc" => in_ucyc,
        "betti-eq-1" => |g| g.betti() == Ok(1),
        other => return Err(InputError(format!("unknown predicate `{other}`"))),
    };
    let (sources, targets) = match manifest {
        Some(path) => {
            let m: SieveManifest = read_json(path)?;
            let load = |v: &[GraphArg]| -> Result<Vec<FeynmanGraph>, InputError> {
                v.iter().map(|s| s.load().map(|x| x.graph)).collect()
            };
            (load(&m.sources)?, load(&m.targets)?)
        }
        None => {
            let u = corpus::universe(g.max_degree, 4);
            (u.clone(), u)
        }
    };
    let r = verify_sieve(pred, &sources, &targets, g.budget)?;
    let w = r.counterexample.iter().map(|c| json!(c)).collect();
    verdict(json!({ "predicate": predicate, "sources": sources.len(), "report": r }), w)
}

fn stable(manifest: Option<&str>, max_genus: u32, g: &Global) -> Outcome {
    let samples = match manifest {
        Some(path) => {
            let m: StableManifest = read_json(path)?;
            m.samples.iter().map(GraphArg::load).collect::<Result<Vec<_>, _>>()?
        }
        None => stable_samples(&corpus::universe(g.max_degree, 4), max_genus),
    };
    let r = ust_codegeneracy_check(&samples, g.budget)?;
    let w = r.witness.iter().map(|c| json!(c)).collect();
    verdict(json!({ "report": r }), w)
}

fn zhat(k: i64, levels: &[u64], close: bool, add: Option<i64>, mul: Option<i64>) -> Outcome {
    let levels = if close { divisor_closure(levels) } else { levels.to_vec() };
    let x = ProfiniteInt::from_int(k, &levels)?;
    let mut out = json!({ "k": k, "levels": levels, "residues": x.residues() });
    let mut witnesses = Vec::new();
    for (name, other, op) in [
        ("sum", add, (|a: i64, b: i64| a.checked_add(b)) as fn(i64, i64) -> Option<i64>),
        ("product", mul, |a, b| a.checked_mul(b)),
    ] {
        let Some(j) = other else { continue };
        let y = ProfiniteInt::from_int(j, &levels)?;
        let z = if name == "sum" { x.add(&y)? } else { x.mul(&y)? };
        out[name] = json!(z.residues());
        if let Some(exact) = op(k, j) {
            if ProfiniteInt::from_int(exact, &levels)? != z {
                witnesses.push(json!({ name: exact }));
            }
        }
    }
    verdict(out, witnesses)
}

fn limit(arg: &str) -> Outcome {
    let sys = if let Some(n) = arg.strip_prefix("divisors:") {
        let n: usize = n.parse()?;
        if n == 0 {
            return Err(InputError("divisor tower of 0".into()));
        }
        InverseSystem::divisor_tower(n)
    } else if let Some(path) = arg.strip_prefix("quotients:") {
        let g: FiniteGroup = read_json(path)?;
        InverseSystem::quotient_system(&g).0
    } else {
        read_json(arg)?
    };
    if let Err(e) = sys.validate() {
        return verdict(json!({ "levels": sys.levels }), vec![json!({ "error": e.to_string() })]);
    }
    let lim = sys.limit();
    let mut out = json!({ "levels": sys.levels, "size": lim.len() });
    if lim.len() <= 256 {
        out["tuples"] = json!(lim);
    }
    pass(out)
}

fn gt_check(
    lambda: i64,
    f: &str,
    quotient: Option<&str>,
    x: Option<&str>,
    y: Option<&str>,
) -> Outcome {
    let f = ReducedWord::parse(f)?;
    let w1 = gt::relation_i_word(&f);
    let w2 = gt::relation_ii_word(lambda, &f)?;
    let mut out = json!({
        "lambda": lambda,
        "f": f,
        "exponent_sums": [f.exponent_sum(0), f.exponent_sum(1)],
        "relation_I": w1.is_empty(),
        "relation_II": w2.is_empty(),
    });
    let mut witnesses = Vec::new();
    if !w1.is_empty() {
        witnesses.push(json!({ "relation": "I", "residual": w1 }));
    }
    if !w2.is_empty() {
        witnesses.push(json!({ "relation": "II", "residual": w2 }));
    }
    if let Some(path) = quotient {
        let g: FiniteGroup = read_json(path)?;
        let elt = |s: Option<&str>, which: &str| -> Result<usize, InputError> {
            let s = s.ok_or_else(|| InputError(format!("--{which} is required with --quotient")))?;
            g.element(s).ok_or_else(|| InputError(format!("`{s}` is not an element")))
        };
        let (a, b) = (elt(x, "x")?, elt(y, "y")?);
        let pair = GtPair::new(lambda, f)?;
        let q = gt::induced_endo_on_quotient(&pair, &g, a, b)?;
        if !q.is_bijective {
            witnesses.push(json!({ "quotient": "not bijective", "image_order": q.image_order }));
        }
        out["quotient"] = json!({
            "order": g.order(),
            "image_x": g.name(q.image_x),
            "image_y": g.name(q.image_y),
            "well_defined": q.well_defined,
            "image_order": q.image_order,
            "bijective": q.is_bijective,
        });
    }
    verdict(out, witnesses)
}
