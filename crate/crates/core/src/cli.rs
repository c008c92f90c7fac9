//! Batch front end behind the `qgeom` binary.
//!
//! Human-readable summaries go to the supplied writer; machine outputs
//! (JSON, CSV, graph6) are written only to files named on the command line.
//! Exit codes: 0 success, 2 violation, 3 budget exceeded, 64 usage error,
//! 65 configuration error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::embed::{
    self, all_transversals, analyze, classify_embeddings, search_embeddings, verify_isometric, verify_isometric_with_graphs,
    ClassifyOptions, EmbedError, Embedding, EmbeddingEntry, SearchOptions,
};
use crate::gf::{Field, FieldSpec, DEFAULT_MAX_Q};
use crate::graph::{intersection_numbers, to_edge_csv, to_graph6, SubspaceGraph, DISTANCE_CACHE_LIMIT, ORDERING_VERSION};
use crate::grassmann::{gaussian_binomial, GrassmannError, GrassmannGraph, GrassmannOptions, DEFAULT_ENUM_CAP};
use crate::polar::{build_polar_space_with_cap, dual_polar_graph, FormSpec, PolarError, PolarSpace};
use crate::subspace::{Subspace, SubspaceRows};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CONFIG: i32 = 65;

/// Environment variable overriding the default enumeration cap.
pub const CAP_ENV: &str = "QGEOM_CAP";

#[derive(Debug, Parser)]
#[command(name = "qgeom", version, about = "Grassmann graphs, dual polar graphs and isometric embeddings over GF(q)")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Enumeration cap on the number of subspaces (overrides QGEOM_CAP).
    #[arg(long, global = true)]
    pub cap: Option<u128>,
    /// Largest field order accepted.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_Q)]
    pub max_q: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a field and print its structure.
    Field(FieldArgs),
    /// Build Γ_k(GF(q)^n).
    Grassmann(GrassmannArgs),
    /// Build a polar space and its dual polar graph.
    Polar(PolarArgs),
    /// Construct, verify, analyze, search and classify embeddings.
    #[command(subcommand)]
    Embed(EmbedCommand),
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub field: PathBuf,
    /// Write the operation tables as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GrassmannArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// `g6:PATH`, `csv:PATH` or `json:PATH`; repeatable.
    #[arg(long)]
    pub export: Vec<String>,
    #[arg(long)]
    pub intersection_array: bool,
}

#[derive(Debug, Args)]
pub struct PolarSource {
    /// Form config: `{"field": .., "form": ..}` or a bare form (then `--field` is required).
    #[arg(long)]
    pub polar: PathBuf,
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct PolarArgs {
    #[command(flatten)]
    pub source: PolarSource,
    /// `g6:`, `csv:`, `json:` (dual polar graph) or `points:`, `lines:`, `maximals:`; repeatable.
    #[arg(long)]
    pub export: Vec<String>,
    #[arg(long)]
    pub intersection_array: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub source: PolarSource,
    #[arg(long)]
    pub k: usize,
    /// Machine-readable output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EmbedCommand {
    /// Build `M -> M + U` for the first valid `U`.
    Canonical {
        #[command(flatten)]
        args: EmbedArgs,
        /// Also count every valid `U`.
        #[arg(long)]
        all_transversals: bool,
    },
    /// Check that a table is an isometric embedding.
    Verify {
        #[command(flatten)]
        args: EmbedArgs,
        #[arg(long)]
        table: PathBuf,
    },
    /// Run the structural pipeline (canonical embedding unless `--table`).
    Analyze {
        #[command(flatten)]
        args: EmbedArgs,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Enumerate all isometric embeddings.
    Search {
        #[command(flatten)]
        args: EmbedArgs,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Enumerate and group embeddings up to automorphism.
    Classify {
        #[command(flatten)]
        args: EmbedArgs,
        #[command(flatten)]
        search: SearchFlags,
    },
}

#[derive(Debug, Args)]
pub struct SearchFlags {
    /// Fix the image of the first maximal.
    #[arg(long)]
    pub anchor: bool,
    /// Node budget for the search.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Budget(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Violation(_) => EXIT_VIOLATION,
            CliError::Budget(_) => EXIT_BUDGET,
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::SearchBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            EmbedError::Polar(p) => p.into(),
            EmbedError::Grassmann(g) => g.into(),
            EmbedError::TooLarge(_) | EmbedError::MalformedTable(_) | EmbedError::Subspace(_) => CliError::Config(e.to_string()),
            other => CliError::Violation(format!("{}: {other}", other.code())),
        }
    }
}

impl From<PolarError> for CliError {
    fn from(e: PolarError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<GrassmannError> for CliError {
    fn from(e: GrassmannError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Polar config file: either both field and form, or a bare form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarConfig {
    Full { field: FieldSpec, form: FormSpec },
    FormOnly(FormSpec),
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_output(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] with explicit summary and diagnostic writers.
pub fn run_with_output<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let cap = match resolve_cap(cli.cap) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let ctx = Context { cap, max_q: cli.max_q };
    let result = match cli.workers {
        Some(0) => Err(CliError::Config("--workers must be positive".into())),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| dispatch(&ctx, &cli.command, out, err)),
            Err(e) => Err(CliError::Config(e.to_string())),
        },
        None => dispatch(&ctx, &cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_cap(flag: Option<u128>) -> Result<u128, CliError> {
    let cap = match flag {
        Some(c) => c,
        None => match std::env::var(CAP_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("{CAP_ENV} is not a number: {v}")))?,
            Err(_) => DEFAULT_ENUM_CAP,
        },
    };
    if cap == 0 {
        return Err(CliError::Config("enumeration cap must be positive".into()));
    }
    Ok(cap)
}

struct Context {
    cap: u128,
    max_q: usize,
}

type Out<'a> = &'a mut (dyn Write + Send);

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        let _ = writeln!($out, $($arg)*);
    };
}

fn dispatch(ctx: &Context, command: &Command, out: Out, err: Out) -> Result<i32, CliError> {
    match command {
        Command::Field(a) => cmd_field(ctx, a, out),
        Command::Grassmann(a) => cmd_grassmann(ctx, a, out, err),
        Command::Polar(a) => cmd_polar(ctx, a, out),
        Command::Embed(e) => cmd_embed(ctx, e, out),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn load_field(ctx: &Context, spec: &FieldSpec) -> Result<Field, CliError> {
    Field::new(spec, ctx.max_q).map_err(|e| CliError::Config(e.to_string()))
}

fn load_polar(ctx: &Context, src: &PolarSource) -> Result<PolarSpace, CliError> {
    let config: PolarConfig = read_json(&src.polar)?;
    let (field_spec, form) = match config {
        PolarConfig::Full { field, form } => (field, form),
        PolarConfig::FormOnly(form) => {
            let path = src
                .field
                .as_ref()
                .ok_or_else(|| CliError::Config("bare form config needs --field".into()))?;
            (read_json(path)?, form)
        }
    };
    if form.form_dim > src.n {
        return Err(CliError::Config(format!("form_dim {} exceeds n = {}", form.form_dim, src.n)));
    }
    let field = load_field(ctx, &field_spec)?;
    Ok(build_polar_space_with_cap(&field, src.n, &form, ctx.cap)?)
}

enum Export {
    Graph6(PathBuf),
    Csv(PathBuf),
    Json(PathBuf),
    Points(PathBuf),
    Lines(PathBuf),
    Maximals(PathBuf),
}

fn parse_export(spec: &str, polar: bool) -> Result<Export, CliError> {
    let (kind, path) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("export target {spec:?} is not KIND:PATH")))?;
    let path = PathBuf::from(path);
    Ok(match kind {
        "g6" | "graph6" => Export::Graph6(path),
        "csv" => Export::Csv(path),
        "json" => Export::Json(path),
        "points" if polar => Export::Points(path),
        "lines" if polar => Export::Lines(path),
        "maximals" if polar => Export::Maximals(path),
        _ => return Err(CliError::Config(format!("unknown export kind {kind:?}"))),
    })
}

fn export_graph(g: &SubspaceGraph, target: &Export) -> Result<bool, CliError> {
    match target {
        Export::Graph6(p) => write_file(p, format!("{}\n", to_graph6(g.graph())).as_bytes())?,
        Export::Csv(p) => write_file(p, to_edge_csv(g.graph()).as_bytes())?,
        Export::Json(p) => write_json(p, &g.to_json())?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn subspace_list(list: &[Subspace]) -> serde_json::Value {
    json!({
        "ordering_version": ORDERING_VERSION,
        "count": list.len(),
        "subspaces": list.iter().map(SubspaceRows::from).collect::<Vec<_>>(),
    })
}

fn print_intersection_array(g: &SubspaceGraph, out: Out) -> Result<(), CliError> {
    let numbers = intersection_numbers(g.graph()).map_err(|e| CliError::Violation(format!("not distance-regular: {e}")))?;
    let (b, c) = numbers.intersection_array();
    say!(out, "intersection array: {{{:?}; {:?}}}", b, c);
    Ok(())
}

fn cmd_field(ctx: &Context, a: &FieldArgs, out: Out) -> Result<i32, CliError> {
    let spec: FieldSpec = read_json(&a.field)?;
    let field = load_field(ctx, &spec)?;
    let q = field.order();
    let generator = field
        .nonzero()
        .find(|&g| (1..q - 1).all(|i| field.pow(g, i) != 1))
        .expect("multiplicative group is cyclic");
    say!(out, "field: {}", field.name());
    say!(out, "order: {q} = {}^{}", field.characteristic(), field.degree());
    say!(out, "multiplicative generator: {generator}");
    if let Some(path) = &a.out {
        let elems: Vec<u8> = field.elements().collect();
        let table = |f: &dyn Fn(u8, u8) -> u8| -> Vec<Vec<u8>> {
            elems.iter().map(|&x| elems.iter().map(|&y| f(x, y)).collect()).collect()
        };
        let report = json!({
            "spec": field.spec(),
            "order": q,
            "characteristic": field.characteristic(),
            "degree": field.degree(),
            "add": table(&|x, y| field.add(x, y)),
            "mul": table(&|x, y| field.mul(x, y)),
            "neg": elems.iter().map(|&x| field.neg(x)).collect::<Vec<_>>(),
            "inv": elems.iter().map(|&x| if x == 0 { None } else { Some(field.inv(x)) }).collect::<Vec<_>>(),
            "frobenius": elems.iter().map(|&x| field.frobenius(x, 1)).collect::<Vec<_>>(),
            "coefficients": elems.iter().map(|&x| field.coeffs(x)).collect::<Vec<_>>(),
        });
        write_json(path, &report)?;
    }
    Ok(EXIT_OK)
}

fn cmd_grassmann(ctx: &Context, a: &GrassmannArgs, out: Out, err: Out) -> Result<i32, CliError> {
    let spec: FieldSpec = read_json(&a.field)?;
    let field = load_field(ctx, &spec)?;
    if a.k > a.n {
        return Err(CliError::Config(format!("k = {} exceeds n = {}", a.k, a.n)));
    }
    let exports = a.export.iter().map(|s| parse_export(s, false)).collect::<Result<Vec<_>, _>>()?;
    let degenerate = !(1 < a.k && a.k + 1 < a.n);
    if degenerate {
        say!(err, "warning: k = {} is outside 1 < k < n-1; the graph is complete or trivial", a.k);
    }
    let g = GrassmannGraph::with_options(&field, a.n, a.k, GrassmannOptions { cap: ctx.cap, allow_degenerate: true })?;
    let graph = g.graph();
    say!(out, "ordering: {ORDERING_VERSION}");
    say!(out, "Grassmann graph Γ_{}({}^{})", a.k, field.name(), a.n);
    say!(out, "vertices: {} (gaussian binomial {})", g.order(), gaussian_binomial(a.n, a.k, field.order() as u64));
    say!(out, "edges: {}", graph.edge_count());
    if g.order() > 0 {
        say!(out, "degree: {}", graph.degree(0));
    }
    if g.order() <= DISTANCE_CACHE_LIMIT {
        match graph.diameter() {
            Ok(d) => {
                say!(out, "diameter: {d}");
            }
            Err(e) => {
                say!(out, "diameter: {e}");
            }
        }
    }
    if a.intersection_array {
        print_intersection_array(g.subspace_graph(), out)?;
    }
    for e in &exports {
        export_graph(g.subspace_graph(), e)?;
    }
    Ok(EXIT_OK)
}

fn cmd_polar(ctx: &Context, a: &PolarArgs, out: Out) -> Result<i32, CliError> {
    let exports = a.export.iter().map(|s| parse_export(s, true)).collect::<Result<Vec<_>, _>>()?;
    let ps = load_polar(ctx, &a.source)?;
    let dpg = dual_polar_graph(&ps);
    say!(out, "ordering: {ORDERING_VERSION}");
    say!(out, "polar space: {:?} form on {}^{} (support dimension {})", ps.form().kind(), ps.field().name(), ps.n(), ps.form().dim());
    say!(out, "points: {}", ps.points().len());
    say!(out, "lines: {}", ps.lines().len());
    say!(out, "rank: {}", ps.rank());
    say!(out, "maximals: {}", ps.maximals().len());
    say!(out, "dual polar graph: degree {}, edges {}", dpg.graph().degree(0), dpg.graph().edge_count());
    if let Ok(d) = dpg.graph().diameter() {
        say!(out, "diameter: {d}");
    }
    if a.intersection_array {
        print_intersection_array(&dpg, out)?;
    }
    for e in &exports {
        if !export_graph(&dpg, e)? {
            match e {
                Export::Points(p) => write_json(p, &subspace_list(ps.points()))?,
                Export::Lines(p) => write_json(p, &subspace_list(ps.lines()))?,
                Export::Maximals(p) => write_json(p, &subspace_list(ps.maximals()))?,
                _ => unreachable!("graph exports handled above"),
            }
        }
    }
    Ok(EXIT_OK)
}

fn check_k(ps: &PolarSpace, k: usize) -> Result<(), CliError> {
    if k > ps.n() {
        return Err(CliError::Config(format!("k = {k} exceeds n = {}", ps.n())));
    }
    Ok(())
}

fn load_table(ps: &PolarSpace, path: &Path, k: usize) -> Result<Embedding, CliError> {
    let entries: Vec<EmbeddingEntry> = read_json(path)?;
    Ok(Embedding::from_json(ps, &entries, ps.n(), k)?)
}

fn cmd_embed(ctx: &Context, command: &EmbedCommand, out: Out) -> Result<i32, CliError> {
    match command {
        EmbedCommand::Canonical { args, all_transversals: all } => {
            let ps = load_polar(ctx, &args.source)?;
            check_k(&ps, args.k)?;
            let e = embed::canonical_embedding(&ps, args.k)?;
            let report = verify_isometric(ps.field(), &e)?;
            let u = embed::extract_star_subspace(ps.field(), &e)?.subspace;
            say!(out, "canonical embedding: Γ(Π) -> Γ_{}({}^{})", args.k, ps.field().name(), ps.n());
            say!(out, "U: {:?} (dimension {})", SubspaceRows::from(&u).0, u.dim());
            say!(out, "isometric: {} pairs checked", report.pairs_checked);
            if *all {
                say!(out, "valid transversals: {}", all_transversals(&ps, args.k)?.len());
            }
            if let Some(p) = &args.out {
                write_json(p, &e.to_json())?;
            }
            Ok(EXIT_OK)
        }
        EmbedCommand::Verify { args, table } => {
            let ps = load_polar(ctx, &args.source)?;
            check_k(&ps, args.k)?;
            let e = load_table(&ps, table, args.k)?;
            let count = gaussian_binomial(ps.n(), args.k, ps.field().order() as u64);
            let report = if count <= DISTANCE_CACHE_LIMIT as u128 && count <= ctx.cap {
                let (src, tgt) = embed::graphs_for(&ps, args.k)?;
                verify_isometric_with_graphs(ps.field(), &e, &src, &tgt)?
            } else {
                verify_isometric(ps.field(), &e)?
            };
            say!(out, "isometric: {} pairs checked (BFS cross-check: {})", report.pairs_checked, report.bfs_cross_checked);
            if let Some(p) = &args.out {
                write_json(p, &report)?;
            }
            Ok(EXIT_OK)
        }
        EmbedCommand::Analyze { args, table } => {
            let ps = load_polar(ctx, &args.source)?;
            check_k(&ps, args.k)?;
            let e = match table {
                Some(t) => load_table(&ps, t, args.k)?,
                None => embed::canonical_embedding(&ps, args.k)?,
            };
            verify_isometric(ps.field(), &e)?;
            let report = analyze(&ps, &e)?;
            say!(out, "U dimension: {} (k - m = {})", report.u.dim(), e.k() - e.m());
            say!(out, "W dimension: {}", report.w.dim());
            say!(out, "point map: injective on {} points", report.q_map.images.len());
            say!(out, "lines mapped onto full lines: {}/{}", report.lines.full_lines, report.lines.lines_checked);
            say!(out, "dim W': {}, dim V': {}", report.w_prime.dim(), report.v_prime.dim());
            say!(out, "anomalies: {}", report.anomalies.len());
            if let Some(p) = &args.out {
                write_json(p, &report.to_json(&ps))?;
            }
            Ok(if report.anomalies.is_empty() { EXIT_OK } else { EXIT_VIOLATION })
        }
        EmbedCommand::Search { args, search } => {
            let ps = load_polar(ctx, &args.source)?;
            check_k(&ps, args.k)?;
            let outcome = search_embeddings(&ps, args.k, SearchOptions { anchor: search.anchor, budget: search.budget })?;
            say!(out, "ordering: {ORDERING_VERSION}");
            say!(out, "embeddings found: {}", outcome.len());
            say!(out, "anchored: {}", outcome.anchor.is_some());
            say!(out, "search nodes: {}", outcome.nodes);
            if let Some(p) = &args.out {
                let value = json!({
                    "ordering_version": ORDERING_VERSION,
                    "n": ps.n(),
                    "k": args.k,
                    "anchored": outcome.anchor.is_some(),
                    "anchor": outcome.anchor,
                    "nodes": outcome.nodes,
                    "count": outcome.len(),
                    "sources": ps.maximals().iter().map(SubspaceRows::from).collect::<Vec<_>>(),
                    "target_vertices": outcome.target.vertices().iter().map(SubspaceRows::from).collect::<Vec<_>>(),
                    "tables": outcome.tables,
                });
                write_json(p, &value)?;
            }
            Ok(EXIT_OK)
        }
        EmbedCommand::Classify { args, search } => {
            let ps = load_polar(ctx, &args.source)?;
            check_k(&ps, args.k)?;
            let opts = ClassifyOptions {
                search: SearchOptions { anchor: search.anchor, budget: search.budget },
                ..Default::default()
            };
            let (_, report) = classify_embeddings(&ps, args.k, opts)?;
            say!(out, "ordering: {ORDERING_VERSION}");
            say!(out, "embeddings found: {}", report.embeddings);
            say!(out, "anchored: {}", report.anchored);
            say!(out, "structural pipeline passed: {}/{}", report.pipeline_passed, report.embeddings);
            for (kind, count) in &report.pipeline_failures {
                say!(out, "pipeline failure {kind}: {count}");
            }
            say!(out, "equivalence classes: {}", report.classes);
            say!(out, "class sizes: {:?}", report.class_sizes);
            if !report.classes_exact {
                say!(out, "undecided pairs: {} (class count is an upper bound)", report.inconclusive_pairs);
            }
            say!(out, "witness kinds: {:?}", report.witness_kinds);
            if let Some(p) = &args.out {
                write_json(p, &report)?;
            }
            let unique = report.classes == 1
                && report.classes_exact
                && report.pipeline_passed == report.embeddings
                && report.anomalies == 0;
            Ok(if unique { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}
