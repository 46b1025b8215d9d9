//! The `equipart` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::iterated::{iterated_partition, PartitionType, SiteTree};
use crate::measure::DensityField;
use crate::power::{
    power_cells, solve_weights_detailed, uniform_lambda, SiteConfiguration, WeightSolverOptions, WeightVector,
};
use crate::solver::{solve_nrr, NrrOptions};
use crate::svg::emit_svg;
use crate::wreath::{build_poset, decide_obstruction};

#[derive(Parser, Debug)]
#[command(
    name = "equipart",
    version,
    about = "Equal-measure convex partitions: power-diagram weights, iterated partitions and wreath-group obstructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for power-diagram weights giving prescribed cell measures.
    Weights(WeightsArgs),
    /// Compute the iterated partition of a body for a site tree.
    Partition(PartitionArgs),
    /// Search for an iterated partition with equal leaf perimeters.
    Solve(SolveArgs),
    /// Decide whether the obstructing equivariant map exists.
    Obstruction(ObstructionArgs),
    /// Print the Hasse tree of the partition poset.
    Poset(PosetArgs),
}

#[derive(Args, Debug)]
struct BodyArgs {
    /// Convex body JSON: {"vertices": [[x, y], ...]}.
    #[arg(long)]
    body: PathBuf,
    /// Density JSON; uniform density 1 when omitted.
    #[arg(long)]
    density: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WeightsArgs {
    #[command(flatten)]
    body: BodyArgs,
    /// Sites JSON: {"sites": [[x, y], ...]}.
    #[arg(long)]
    sites: PathBuf,
    /// Target fractions, comma separated; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Starting weights JSON: {"w": [...]}.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Partition type n_1,...,n_k.
    #[arg(long = "type", value_name = "N1,..,NK")]
    ptype: PartitionType,
    #[command(flatten)]
    body: BodyArgs,
    /// Site tree JSON, or a solve report (its best tree is used).
    #[arg(long)]
    tree: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long = "type", value_name = "N1,..,NK")]
    ptype: PartitionType,
    #[command(flatten)]
    body: BodyArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Success threshold on the leaf perimeter spread.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Relative tolerance of the inner weight solves.
    #[arg(long, default_value_t = 1e-12)]
    weight_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ObstructionArgs {
    #[arg(long = "type", value_name = "N1,..,NK")]
    ptype: PartitionType,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PosetFormat {
    Dot,
}

#[derive(Args, Debug)]
struct PosetArgs {
    #[arg(long = "type", value_name = "N1,..,NK")]
    ptype: PartitionType,
    #[arg(long, value_enum, default_value_t = PosetFormat::Dot)]
    format: PosetFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status: 2 for solver non-convergence, 1 for every other failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.residual().is_some() {
        2
    } else {
        1
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_logging() {
        eprintln!("error: {e}");
        return 1;
    }
    let result = match cli.command {
        Command::Weights(a) => cmd_weights(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Obstruction(a) => cmd_obstruction(a),
        Command::Poset(a) => cmd_poset(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn init_logging() -> Result<()> {
    let level = match std::env::var("EQUIPART_LOG").ok().as_deref() {
        None | Some("") => LevelFilter::Warn,
        Some("quiet") => LevelFilter::Off,
        Some("info") => LevelFilter::Info,
        Some("debug") => LevelFilter::Debug,
        Some(other) => {
            return Err(Error::InvalidInput(format!("EQUIPART_LOG must be quiet, info or debug, got {other:?}")))
        }
    };
    let _ = env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).try_init();
    log::set_max_level(level);
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn parse_json<T: DeserializeOwned>(path: &Path, value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_value(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::InvalidInput(format!("{}: malformed JSON: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(path, read_value(path)?)
}

fn read_body(args: &BodyArgs) -> Result<(ConvexPolygon, DensityField)> {
    let body = read_json(&args.body)?;
    let field = match &args.density {
        Some(p) => read_json(p)?,
        None => DensityField::uniform(1.0)?,
    };
    Ok((body, field))
}

/// Sites as {"sites": [...]} or a bare list of points.
fn read_sites(path: &Path) -> Result<SiteConfiguration> {
    match read_value(path)? {
        Value::Object(mut m) if m.contains_key("sites") => parse_json(path, m.remove("sites").expect("present")),
        v => parse_json(path, v),
    }
}

/// A site tree, or the best tree of a solve report.
fn read_tree(path: &Path) -> Result<SiteTree> {
    match read_value(path)? {
        Value::Object(mut m) if m.contains_key("best_tree") => {
            parse_json(path, m.remove("best_tree").expect("present"))
        }
        v => parse_json(path, v),
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn guard_outputs(inputs: &[&Path], outputs: &[Option<&PathBuf>]) -> Result<()> {
    for out in outputs.iter().flatten() {
        if let Some(i) = inputs.iter().find(|i| same_file(i, out)) {
            return Err(Error::InvalidInput(format!("output {} would overwrite input {}", out.display(), i.display())));
        }
    }
    Ok(())
}

fn body_inputs(b: &BodyArgs) -> Vec<&Path> {
    let mut v = vec![b.body.as_path()];
    v.extend(b.density.as_deref());
    v
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(path, &text)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("--tol must be positive, got {tol}")));
    }
    Ok(())
}

fn cmd_weights(a: WeightsArgs) -> Result<i32> {
    check_tol(a.tol)?;
    let mut inputs = body_inputs(&a.body);
    inputs.push(&a.sites);
    inputs.extend(a.init.as_deref());
    guard_outputs(&inputs, &[a.out.as_ref()])?;
    let (body, field) = read_body(&a.body)?;
    let sites = read_sites(&a.sites)?;
    let lambda = a.lambda.unwrap_or_else(|| uniform_lambda(sites.len()));
    let initial: Option<WeightVector> = a.init.as_deref().map(read_json).transpose()?;
    let opts = WeightSolverOptions { tol: a.tol, max_iter: a.max_iter, initial };
    let sol = solve_weights_detailed(&body, &field, &sites, &lambda, &opts)?;
    info!("weights converged in {} iterations, residual {:.3e}", sol.iterations, sol.residual);
    let cells = power_cells(&body, &sites, &sol.weights)?;
    eprintln!(
        "weights: {} cells, relative residual {:.3e}, measures {:?}",
        sites.len(),
        sol.residual,
        cells.measures(&field)
    );
    write_json(a.out.as_ref(), &sol.weights)?;
    Ok(0)
}

fn cmd_partition(a: PartitionArgs) -> Result<i32> {
    check_tol(a.tol)?;
    let mut inputs = body_inputs(&a.body);
    inputs.push(&a.tree);
    guard_outputs(&inputs, &[a.out.as_ref(), a.svg.as_ref()])?;
    let (body, field) = read_body(&a.body)?;
    let tree = read_tree(&a.tree)?;
    tree.check_type(&a.ptype)?;
    let opts = WeightSolverOptions { tol: a.tol, max_iter: a.max_iter, initial: None };
    let partition = iterated_partition(&body, &field, &tree, &opts)?;
    if let Some(svg) = &a.svg {
        emit_svg(&partition, svg)?;
    }
    eprintln!("partition {}: {} leaves", a.ptype, partition.leaves().len());
    write_json(a.out.as_ref(), &partition)?;
    Ok(0)
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    check_tol(a.tol)?;
    check_tol(a.weight_tol)?;
    if a.restarts == 0 || a.budget == 0 || a.jobs == 0 {
        return Err(Error::InvalidInput("--restarts, --budget and --jobs must be >= 1".into()));
    }
    guard_outputs(&body_inputs(&a.body), &[a.out.as_ref(), a.svg.as_ref()])?;
    let (body, field) = read_body(&a.body)?;
    let verdict = decide_obstruction(&a.ptype, 2).ok();
    let opts = NrrOptions {
        seed: a.seed,
        restarts: a.restarts,
        tol: a.tol,
        budget: a.budget,
        jobs: a.jobs,
        weight_tol: a.weight_tol,
    };
    let report = solve_nrr(&body, &field, &a.ptype, &opts)?;
    if let Some(svg) = &a.svg {
        emit_svg(&report.best_partition, svg)?;
    }
    let mut json = serde_json::to_value(&report)?;
    if let (Value::Object(m), Some(v)) = (&mut json, &verdict) {
        m.insert("obstruction".into(), serde_json::to_value(v)?);
    }
    write_json(a.out.as_ref(), &json)?;
    if let Some(v) = &verdict {
        eprintln!(
            "obstruction: exists_map={}{}",
            v.exists_map,
            v.prime.map(|p| format!(", prime={p} (existence guaranteed)")).unwrap_or_default()
        );
    }
    eprintln!(
        "solve {}: {} (spread {:.3e}, residual {:.3e}, {} restarts, {} evaluations)",
        a.ptype,
        if report.success { "success" } else { "no solution within tolerance" },
        report.perimeter_spread,
        report.residual,
        report.restarts_used,
        report.evaluations
    );
    Ok(if report.success { 0 } else { 2 })
}

fn cmd_obstruction(a: ObstructionArgs) -> Result<i32> {
    let v = decide_obstruction(&a.ptype, a.d)?;
    eprintln!(
        "exists_map={} gcd={}{}",
        v.exists_map,
        v.gcd,
        v.prime.map(|p| format!(" prime={p}")).unwrap_or_default()
    );
    write_json(a.out.as_ref(), &v)?;
    Ok(0)
}

fn cmd_poset(a: PosetArgs) -> Result<i32> {
    let poset = build_poset(&a.ptype);
    let text = match a.format {
        PosetFormat::Dot => poset.to_dot(),
    };
    write_output(a.out.as_ref(), &text)?;
    Ok(0)
}
