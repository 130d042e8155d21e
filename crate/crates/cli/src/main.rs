//! `atomembed`: embed graphs into atom registers, certify registers with the
//! exact oracle, benchmark the ancilla overhead and tabulate the four-atom
//! gadget spectrum.

// `!(a < b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use atomembed::bench::run_bench;
use atomembed::numfmt::round_sig;
use atomembed::oracle::{gadget_spectrum, sweep_values, OracleOptions, DEFAULT_ATOM_LIMIT};
use atomembed::register::{DEFAULT_BLOCKADE_RADIUS, DEFAULT_DELTA_GLOBAL};
use atomembed::{certify_embedding, embed, AtomRegister, EmbedConfig, EmbedStats, Graph, GroundStateReport, OracleError};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

/// Global detuning used for the gadget spectrum unless overridden.
const GADGET_DELTA: f64 = 0.2;

#[derive(Parser)]
#[command(name = "atomembed", version, about = "Compile bounded-degree MIS instances into 3D atom registers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a graph and write its register as JSON.
    Embed(EmbedArgs),
    /// Certify that a register's ground states encode an MIS of a graph.
    Verify(VerifyArgs),
    /// Mean augmented size over random graphs, with a linear fit.
    Bench(BenchArgs),
    /// Energies of the four-atom chain over a sweep of ancilla detunings.
    Gadget(GadgetArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Lattice steps per layout unit; raised automatically on failure.
    #[arg(long, default_value_t = atomembed::embed::DEFAULT_SCALE)]
    scale: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Global detuning, in units of U.
    #[arg(long, default_value_t = DEFAULT_DELTA_GLOBAL)]
    delta: f64,
    /// Blockade radius, in lattice steps; must lie in (1, √2).
    #[arg(long, default_value_t = DEFAULT_BLOCKADE_RADIUS)]
    rb: f64,
    #[arg(long, default_value_t = atomembed::layout::DEFAULT_FR_ITERATIONS)]
    fr_iterations: usize,
    /// Additional attempts, one scale step larger each.
    #[arg(long, default_value_t = 4)]
    max_scale_retries: u32,
}

impl PipelineArgs {
    fn config(&self) -> EmbedConfig {
        let mut cfg = EmbedConfig {
            scale: self.scale,
            seed: self.seed,
            fr_iterations: self.fr_iterations,
            max_scale_retries: self.max_scale_retries,
            ..EmbedConfig::default()
        };
        cfg.params.delta_global = self.delta;
        cfg.params.r_b = self.rb;
        cfg
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the atom positions as an XYZ point list.
    #[arg(long)]
    xyz: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    register: PathBuf,
    /// Largest register, in atoms, the oracle will search.
    #[arg(long, default_value_t = DEFAULT_ATOM_LIMIT)]
    limit: usize,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated graph sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Edge probability of the random graphs.
    #[arg(long, default_value_t = 0.15)]
    p: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct GadgetArgs {
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long, default_value_t = GADGET_DELTA)]
    delta: f64,
    /// Ancilla detunings as `lo:hi:step`, in units of U.
    #[arg(long, default_value = "0:1.1:0.001", value_parser = parse_sweep)]
    sweep: (f64, f64, f64),
    #[arg(long)]
    out: PathBuf,
}

fn parse_sweep(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("sweep {s:?} needs lo ≤ hi and a positive step"));
    }
    Ok((lo, hi, step))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::from_json(&read(path)?).with_context(|| format!("parsing graph {}", path.display()))
}

fn stats_json(s: &EmbedStats) -> serde_json::Value {
    json!({
        "n": s.n,
        "edges": s.edges,
        "n_plus": s.n_plus,
        "total_ancillas": s.total_ancillas,
        "max_chain_ancillas": s.max_chain_ancillas,
        "volume": s.volume,
        "scale": s.scale,
        "attempts": s.attempts,
        "runtime_s": round_sig(s.runtime_s),
    })
}

fn cmd_embed(args: &EmbedArgs) -> Result<ExitCode> {
    let g = read_graph(&args.graph)?;
    let e = embed(&g, &args.pipeline.config())?;
    write(&args.out, &e.register.to_json())?;
    info!("wrote {} atoms to {}", e.stats.n_plus, args.out.display());
    if let Some(path) = &args.xyz {
        write(path, &e.register.to_xyz())?;
    }
    println!("{}", serde_json::to_string_pretty(&stats_json(&e.stats))?);
    Ok(ExitCode::SUCCESS)
}

fn report_json(r: &GroundStateReport) -> serde_json::Value {
    json!({
        "certified": r.certified,
        "method": r.method,
        "min_energy": round_sig(r.min_energy),
        "ground_state_count": r.ground_states.len(),
        "truncated": r.truncated,
        "ground_states": r.ground_states,
        "restricted_sets": r.restricted_sets,
        "checks": r.checks,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let g = read_graph(&args.graph)?;
    let text = read(&args.register)?;
    let reg = AtomRegister::from_json(&text).with_context(|| format!("parsing register {}", args.register.display()))?;
    let opts = OracleOptions::with_max_atoms(args.limit);
    let report = match certify_embedding(&g, &reg, &opts) {
        Ok(r) => r,
        Err(e @ (OracleError::AtomLimit { .. } | OracleError::OriginalLimit { .. })) => {
            bail!("{e}; certify a smaller instance or raise --limit")
        }
        Err(e) => return Err(e.into()),
    };
    let checks = report.checks.as_ref().expect("certification fills the checks");
    println!("certified: {}", report.certified);
    println!("MIS(G): {}", checks.mis_size);
    println!("MIS(G+): {} (expected {})", checks.blockade_mis_size, checks.expected_blockade_mis_size);
    println!("ground states: {}{}", report.ground_states.len(), if report.truncated { " (truncated)" } else { "" });
    println!("min energy: {}", round_sig(report.min_energy));
    if let Some(s) = &checks.counterexample {
        println!("counterexample: {s}");
    }
    if let Some(path) = &args.report {
        write(path, &serde_json::to_string_pretty(&report_json(&report))?)?;
    }
    Ok(if report.certified { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode> {
    let report = run_bench(&args.sizes, args.p, args.samples, args.pipeline.seed, &args.pipeline.config())?;
    write(&args.out, &report.to_csv())?;
    match report.fit {
        Some(f) => println!(
            "slope={} intercept={} r_squared={} failures={}",
            round_sig(f.slope),
            round_sig(f.intercept),
            round_sig(f.r_squared),
            report.failures
        ),
        None => println!("too few sizes for a fit; failures={}", report.failures),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gadget(args: &GadgetArgs) -> Result<ExitCode> {
    if !(args.spacing > 0.0) {
        bail!("spacing must be positive, got {}", args.spacing);
    }
    let (lo, hi, step) = args.sweep;
    let spectrum = gadget_spectrum(args.spacing, args.delta, &sweep_values(lo, hi, step));
    write(&args.out, &spectrum.to_csv())?;
    for c in spectrum.crossovers() {
        println!(
            "{} -> {} between {} and {}",
            c.from.join("|"),
            c.to.join("|"),
            round_sig(c.before),
            round_sig(c.after)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Embed(a) => cmd_embed(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gadget(a) => cmd_gadget(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
