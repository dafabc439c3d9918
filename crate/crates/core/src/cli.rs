//! The `girg-lab` command line: `generate`, `analyze`, `experiment` and
//! `export`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid flags, parameters or
//! configuration, 3 an asserted experiment verdict failed.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{self, RunManifest};
use crate::connectivity::{self, CellReport, ComponentSummary};
use crate::error::{Error, Result};
use crate::experiments::{self, Campaign, CampaignKind};
use crate::generator::{self, Engine};
use crate::geometry::{self, GroundSpace};
use crate::model::GirgParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

pub const THREADS_ENV: &str = "GIRG_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "girg-lab", version, about = "Generate and analyze geometric inhomogeneous random graphs")]
struct Cli {
    /// Worker threads (falls back to GIRG_LAB_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a graph and write it as a bundle directory.
    Generate(GenerateArgs),
    /// Report components, the core and optional cell analyses of a bundle.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo campaign from a JSON config.
    Experiment(ExperimentArgs),
    /// Pack a bundle into a zip archive.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: f64,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, default_value = "box")]
    ground_space: GroundSpace,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// `grid` or `oracle`; defaults to grid for T = 0.
    #[arg(long)]
    engine: Option<Engine>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Analyze every full cell of this width.
    #[arg(long)]
    cells: Option<f64>,
    #[arg(long)]
    w_hat: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    fraction_c: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_parser = parse_kind)]
    kind: CampaignKind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_kind(s: &str) -> std::result::Result<CampaignKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = CampaignKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// The JSON written by `analyze`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub params: GirgParams,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub components: ComponentSummary,
    /// Vertices with weight at least `√(n/λ)`; absent for temperate graphs.
    pub core_size: Option<usize>,
    pub expected_core_size: f64,
    /// A non-adjacent core pair, if the core is not a clique.
    pub core_violation: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellReport>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let command_line = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match dispatch(cli, command_line) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error: 1 for I/O, 2 for everything else.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::param("GIRG_LAB_THREADS", format!("`{v}` is not a thread count"))),
        _ => Ok(None),
    }
}

fn dispatch(cli: Cli, command_line: String) -> Result<i32> {
    let threads = thread_count(cli.threads)?;
    if threads == Some(0) {
        return Err(Error::param("threads", "must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let workers = pool.current_num_threads();
    pool.install(|| {
        let started = Instant::now();
        let ctx = Context {
            command_line,
            workers,
            started,
        };
        match cli.command {
            Command::Generate(a) => cmd_generate(a, &ctx),
            Command::Analyze(a) => cmd_analyze(a, &ctx),
            Command::Experiment(a) => cmd_experiment(a, &ctx),
            Command::Export(a) => cmd_export(a, &ctx),
        }
    })
}

struct Context {
    command_line: String,
    workers: usize,
    started: Instant,
}

impl Context {
    fn manifest(&self, params: Option<GirgParams>) -> RunManifest {
        RunManifest::new(self.command_line.clone(), params, self.workers)
    }

    fn finish(&self, mut manifest: RunManifest, path: &Path) -> Result<()> {
        manifest.elapsed_ms = self.started.elapsed().as_millis() as u64;
        bundle::write_json(path, &manifest)
    }
}

/// `report.json` → `report.manifest.json`, beside it.
fn sidecar_manifest(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs, ctx: &Context) -> Result<i32> {
    let params = GirgParams::new(args.n, args.d, args.tau, args.lambda)?
        .with_temperature(args.temperature)?
        .with_ground_space(args.ground_space)
        .with_seed(args.seed);
    let engine = args.engine.unwrap_or_else(|| Engine::default_for(&params));
    let graph = generator::generate(&params, engine)?;
    let files = bundle::write_bundle(&args.out, &graph)?;
    let mut manifest = ctx.manifest(Some(params));
    for f in &files {
        manifest.add_output(f)?;
    }
    ctx.finish(manifest, &args.out.join(bundle::MANIFEST_FILE))?;
    println!(
        "wrote {} vertices and {} edges to {}",
        graph.vertex_count(),
        graph.edge_count(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_analyze(args: AnalyzeArgs, ctx: &Context) -> Result<i32> {
    let graph = bundle::read_bundle(&args.graph)?;
    let params = graph.params().clone();
    let (core_size, core_violation) = match connectivity::core_vertices(&graph) {
        Ok(core) => (Some(core.len()), None),
        Err(Error::CoreNotClique(u, v)) => {
            let w = params.core_weight();
            (Some(graph.vertices().iter().filter(|x| x.weight >= w).count()), Some((u, v)))
        }
        Err(Error::Unsupported(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let cells = match args.cells {
        None => Vec::new(),
        Some(width) => {
            let specs = geometry::full_cells(width, params.d)?;
            if specs.is_empty() {
                return Err(Error::param("cells", format!("width {width} yields no full cell")));
            }
            let w_hat = args.w_hat.unwrap_or_else(|| params.core_weight());
            specs
                .par_iter()
                .map(|cell| connectivity::analyze_cell(&graph, cell, w_hat, args.fraction_c))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let report = AnalysisReport {
        schema_version: experiments::SCHEMA_VERSION,
        vertex_count: graph.vertex_count(),
        edge_count: graph.edge_count(),
        components: connectivity::components(&graph),
        core_size,
        expected_core_size: connectivity::expected_core_size(&params),
        core_violation,
        cells,
        params: params.clone(),
    };
    ensure_parent(&args.report)?;
    bundle::write_json(&args.report, &report)?;
    let mut manifest = ctx.manifest(Some(params));
    for name in bundle::DATA_FILES {
        manifest.add_input(&args.graph.join(name))?;
    }
    manifest.add_output(&args.report)?;
    ctx.finish(manifest, &sidecar_manifest(&args.report))?;
    println!(
        "{} components, largest fraction {}",
        report.components.component_count, report.components.largest_fraction
    );
    Ok(EXIT_OK)
}

fn cmd_experiment(args: ExperimentArgs, ctx: &Context) -> Result<i32> {
    let campaign: Campaign = bundle::read_json(&args.config)?;
    let report = experiments::run_campaign(args.kind, &campaign)?;
    let failed = report.failed_assertions()?;
    ensure_parent(&args.out)?;
    bundle::write_json(&args.out, &report)?;
    let mut manifest = ctx.manifest(None);
    manifest.add_input(&args.config)?;
    manifest.add_output(&args.out)?;
    ctx.finish(manifest, &sidecar_manifest(&args.out))?;
    for v in &report.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.rule, v.detail);
    }
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        for v in failed {
            eprintln!("asserted rule failed: {}", v.rule);
        }
        Ok(EXIT_VERDICT)
    }
}

fn cmd_export(args: ExportArgs, ctx: &Context) -> Result<i32> {
    bundle::export_bundle(&args.graph, &args.out)?;
    let params: GirgParams = bundle::read_json(&args.graph.join(bundle::PARAMS_FILE))?;
    let mut manifest = ctx.manifest(Some(params));
    for name in bundle::DATA_FILES {
        manifest.add_input(&args.graph.join(name))?;
    }
    manifest.add_output(&args.out)?;
    ctx.finish(manifest, &sidecar_manifest(&args.out))?;
    println!("wrote {}", args.out.display());
    Ok(EXIT_OK)
}
