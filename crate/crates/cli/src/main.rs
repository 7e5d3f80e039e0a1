//! Command-line driver for boundary scans.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use conescan::geometry::{exterior_cone_holds, ConeSpec, InteriorMode};
use conescan::oracle::image_cloud;
use conescan::problems::{load_problem, Problem, BUILTINS};
use conescan::scan::{
    read_csv, scan_problem, verify_cloud, write_outputs, OracleParams, ScanConfig, ScanOutcome,
    VerifyReport,
};

#[derive(Parser)]
#[command(version, about = "Trace the boundary of an image set with spherical-cone scalarizations")]
struct Cli {
    /// Override the solver, orient and sampling seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit nonzero when any cell of the sweep failed
    #[arg(long, global = true)]
    strict: bool,
    /// Directory for outputs with relative paths
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep and write the boundary cloud
    Scan { config: PathBuf },
    /// Compare a boundary cloud with the occupancy-grid oracle
    Verify {
        config: PathBuf,
        /// Cloud CSV to check (default: the configured output, scanned
        /// inline when it does not exist)
        #[arg(long)]
        cloud: Option<PathBuf>,
        /// Oracle sample count
        #[arg(long)]
        n: Option<usize>,
        /// Oracle cell size
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        delta_sound: Option<f64>,
        #[arg(long)]
        delta_cover: Option<f64>,
    },
    /// Built-in problems
    Problems {
        #[command(subcommand)]
        action: ProblemsAction,
    },
    /// Probe the exterior cone condition at a point against sampled images
    CheckCone {
        config: PathBuf,
        /// Image point, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        at: Vec<f64>,
        /// Cone orient (unit vector), comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        nu: Vec<f64>,
        /// Image samples
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum ProblemsAction {
    List,
}

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

impl From<conescan::Error> for Failure {
    fn from(error: conescan::Error) -> Self {
        Self {
            code: 1,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(anyhow!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Scan { config } => {
            let (cfg, problem) = load(cli, config)?;
            let outcome = run_scan(&problem, &cfg)?;
            Ok(strict_exit(cli, &outcome))
        }
        Command::Verify {
            config,
            cloud,
            n,
            h,
            delta_sound,
            delta_cover,
        } => {
            let (cfg, problem) = load(cli, config)?;
            let mut params = OracleParams::from_config(&cfg);
            params.n = n.unwrap_or(params.n);
            params.h = h.unwrap_or(params.h);
            params.delta_sound = delta_sound.unwrap_or(params.delta_sound);
            params.delta_cover = delta_cover.unwrap_or(params.delta_cover);
            let images = match (cloud, cfg.output.csv_path()) {
                (Some(path), _) => cloud_from_csv(path)?,
                (None, Some(path)) if path.exists() => cloud_from_csv(&path)?,
                _ => run_scan(&problem, &cfg)?.cloud.images(),
            };
            let report = verify_cloud(&problem, &images, &params)?;
            println!(
                "soundness {:.6} (<= {}) {}",
                report.soundness,
                params.delta_sound,
                verdict(report.sound_pass)
            );
            println!(
                "coverage  {:.6} (<= {}) {}",
                report.coverage,
                params.delta_cover,
                verdict(report.cover_pass)
            );
            for o in &report.unsound {
                println!("  unsound point #{} {:?} at distance {:.6}", o.index, o.point, o.distance);
            }
            if report.uncovered_count > 0 {
                println!("  {} oracle cells uncovered", report.uncovered_count);
            }
            if let Some(path) = cfg.output.report_path() {
                write_json(&path, &report)?;
                println!("report written to {}", path.display());
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Problems {
            action: ProblemsAction::List,
        } => {
            for (name, about) in BUILTINS {
                println!("{name:<10} {about}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckCone { config, at, nu, n } => {
            let (cfg, problem) = load(cli, config)?;
            let resolved = cfg.validate().map_err(Failure::config)?;
            let cone = ConeSpec::new(nu.clone(), resolved.eta, resolved.r, InteriorMode::PartiallyOpen)
                .map_err(Failure::config)?;
            let sample = image_cloud(&problem, *n, cfg.solver.seed);
            let holds = exterior_cone_holds(&sample, at, &cone).map_err(Failure::config)?;
            println!(
                "exterior cone at {at:?} with orient {nu:?}: {}",
                if holds { "holds on the sample" } else { "violated" }
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Reads and validates a config with the global overrides applied.
fn load(cli: &Cli, path: &Path) -> Result<(ScanConfig, Problem), Failure> {
    let mut cfg = ScanConfig::load(path).map_err(Failure::config)?;
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
        cfg.sweep.orients.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output.dir = Some(dir.clone());
    }
    cfg.validate().map_err(Failure::config)?;
    let problem = load_problem(&cfg.problem).map_err(Failure::config)?;
    Ok((cfg, problem))
}

fn run_scan(problem: &Problem, cfg: &ScanConfig) -> Result<ScanOutcome, Failure> {
    let outcome = scan_problem(problem, cfg).map_err(|e| match e {
        conescan::Error::Config(_) => Failure::config(e),
        e => e.into(),
    })?;
    let s = &outcome.stats;
    println!(
        "{} points from {} pairs ({} solves, {} evaluations, {} failed)",
        s.points, s.pairs, s.solves, s.evaluations, s.failed_pairs
    );
    for path in write_outputs(&outcome, cfg, problem.dim_image(), problem.dim_control())? {
        println!("wrote {}", path.display());
    }
    Ok(outcome)
}

fn strict_exit(cli: &Cli, outcome: &ScanOutcome) -> ExitCode {
    if cli.strict && outcome.stats.failed_pairs > 0 {
        eprintln!("{} cells failed (--strict)", outcome.stats.failed_pairs);
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn cloud_from_csv(path: &Path) -> anyhow::Result<Vec<Vec<f64>>> {
    let points = read_csv(path).with_context(|| format!("reading cloud {}", path.display()))?;
    Ok(points.into_iter().map(|p| p.f).collect())
}

fn write_json(path: &Path, value: &VerifyReport) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
