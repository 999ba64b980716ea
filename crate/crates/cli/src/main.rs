//! `gbc`: batch front end for the mass evaluators, verification suites and
//! Penrose checks.
//!
//! Exit codes: 0 success, 1 I/O or spec error, 2 mass not well defined,
//! 3 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gbc_core::horizon::{excised_surfaces, penrose_check};
use gbc_core::mass::{
    default_schedule, evaluate, mass_lower_bound, positivity_audit, volume_grid_degree, Evaluator, MassReport,
    DEFAULT_R_MAX,
};
use gbc_core::profile::{load_spec, MetricDoc, MetricSpec};
use gbc_core::quadrature::{default_degree, RadiusSchedule, SphereGrid};
use gbc_core::report::{flux_csv, to_json};
use gbc_core::verify::{self, VerifyOptions, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "gbc", version, about = "Curvature masses, property suites and Penrose-type checks for metrics e^{-2u} delta")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "GBC_THREADS")]
    threads: Option<usize>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the mass of a metric.
    Mass(MassArgs),
    /// Run the seeded property suites.
    Verify(VerifyArgs),
    /// Check the Penrose-type inequalities on the excised boundary.
    Penrose(PenroseArgs),
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Metric-spec JSON document.
    #[arg(long)]
    metric: PathBuf,

    /// Override the curvature order given in the metric file.
    #[arg(long)]
    k: Option<usize>,

    /// Sphere grid degree (default 15 for n <= 6, 11 above).
    #[arg(long)]
    degree: Option<usize>,

    /// Outer radius of the truncated volume integrals.
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    rmax: f64,
}

#[derive(Debug, Args)]
struct MassArgs {
    #[command(flatten)]
    metric: MetricArgs,

    /// Radius schedule `geometric:<r0>,<rmax>,<count>`; chosen from the decay order by default.
    #[arg(long)]
    radii: Option<String>,

    #[arg(long, default_value = "all")]
    evaluator: String,

    /// Also write `label,evaluator,radius,flux` rows here.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Skip the truncated lower-bound integrals.
    #[arg(long)]
    no_lower_bound: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run only these suites (repeatable).
    #[arg(long = "suite")]
    suites: Vec<String>,

    /// Perturb the first case of every suite to exercise the failure path.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Args)]
struct PenroseArgs {
    #[command(flatten)]
    metric: MetricArgs,
}

#[derive(Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<MetricDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radii: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluators: Option<Vec<&'static str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    suites: Vec<String>,
    seed: u64,
    threads: usize,
}

impl RunConfig {
    fn new(command: &'static str, seed: u64) -> Self {
        Self {
            command,
            metric_path: None,
            metric: None,
            k: None,
            degree: None,
            radii: None,
            evaluators: None,
            r_max: None,
            suites: Vec::new(),
            seed,
            threads: rayon::current_num_threads(),
        }
    }
}

/// Errors carrying a specific exit status.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(Exit(code, _)) = cause.downcast_ref::<Exit>() {
            return *code;
        }
        if let Some(gbc_core::Error::NotWellDefined { .. }) = cause.downcast_ref::<gbc_core::Error>() {
            return 2;
        }
    }
    1
}

struct Loaded {
    spec: MetricSpec,
    grid: SphereGrid,
    degree: usize,
}

fn load(args: &MetricArgs) -> anyhow::Result<Loaded> {
    let mut spec = load_spec(&args.metric)?;
    if let Some(k) = args.k {
        spec = spec.with_k(k)?;
    }
    let degree = args.degree.unwrap_or_else(|| default_degree(spec.n));
    let grid = SphereGrid::new(spec.n, degree)?;
    if !(args.rmax > 0.0 && args.rmax.is_finite()) {
        bail!("--rmax must be a positive finite number, got {}", args.rmax);
    }
    Ok(Loaded { spec, grid, degree })
}

fn metric_config(cfg: &mut RunConfig, args: &MetricArgs, loaded: &Loaded) {
    cfg.metric_path = Some(args.metric.display().to_string());
    cfg.metric = Some(loaded.spec.doc.clone());
    cfg.k = Some(loaded.spec.k);
    cfg.degree = Some(loaded.degree);
    cfg.r_max = Some(args.rmax);
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_mass(cli: &Cli, args: &MassArgs) -> anyhow::Result<()> {
    let loaded = load(&args.metric)?;
    let spec = &loaded.spec;
    let requested = Evaluator::parse(&args.evaluator)?;
    let explicit = requested.len() == 1;
    let evaluators: Vec<Evaluator> = requested.into_iter().filter(|e| explicit || e.applicable(spec)).collect();
    let schedule = match &args.radii {
        Some(text) => RadiusSchedule::parse(text)?,
        None => default_schedule(spec),
    };
    spec.check_well_defined()?;

    let mut cfg = RunConfig::new("mass", cli.seed);
    metric_config(&mut cfg, &args.metric, &loaded);
    cfg.radii = Some(schedule.radii.clone());
    cfg.evaluators = Some(evaluators.iter().map(|e| e.name()).collect());

    let lower_bound = if args.no_lower_bound {
        None
    } else {
        Some(mass_lower_bound(spec, args.metric.rmax, &SphereGrid::new(spec.n, volume_grid_degree(spec.n))?)?)
    };
    let hypotheses = if spec.is_radial() { Some(positivity_audit(spec, args.metric.rmax)?) } else { None };

    let mut reports: Vec<MassReport> = Vec::new();
    for ev in evaluators {
        let mut report = evaluate(spec, ev, &loaded.grid, &schedule)?;
        log::info!("{} {}: mass {} +- {:e}", spec.label, report.evaluator, report.mass, report.error);
        report.lower_bound = lower_bound.clone();
        report.hypotheses = hypotheses.clone();
        reports.push(report);
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, flux_csv(&reports)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    write_output(cli.out.as_deref(), &to_json(&cfg, &reports)?)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> anyhow::Result<()> {
    let opts = VerifyOptions { seed: cli.seed, suites: args.suites.clone(), inject_fault: args.inject_fault };
    let report = verify::run(&opts)?;
    let mut cfg = RunConfig::new("verify", cli.seed);
    cfg.suites = args.suites.clone();
    write_output(cli.out.as_deref(), &to_json(&cfg, &report)?)?;
    if let Some((suite, identity)) = report.first_failure() {
        let f = identity.failure.as_ref().expect("failed identity records its case");
        return Err(anyhow!(Exit(
            3,
            format!(
                "suite `{suite}` failed: {} (violation {:e} > {:e}) at case {} with seed {}; inputs: {}",
                identity.identity, f.violation, identity.tolerance, f.case, f.seed, f.inputs
            )
        )));
    }
    Ok(())
}

fn cmd_penrose(cli: &Cli, args: &PenroseArgs) -> anyhow::Result<()> {
    let loaded = load(&args.metric)?;
    let spec = &loaded.spec;
    let surfaces = excised_surfaces(spec)?;
    if surfaces.is_empty() {
        bail!("metric `{}` has no excised domain; the Penrose check needs boundary surfaces", spec.label);
    }
    spec.check_well_defined()?;
    let mut cfg = RunConfig::new("penrose", cli.seed);
    metric_config(&mut cfg, &args.metric, &loaded);
    let report = penrose_check(spec, &surfaces, &loaded.grid, args.metric.rmax)?;
    log::info!(
        "{}: mass {} rhs {} ({:?}), scalar rhs {:?} ({:?})",
        spec.label,
        report.mass,
        report.rhs_area_total,
        report.verdicts.area.status,
        report.rhs_scalar_total,
        report.verdicts.scalar.status
    );
    write_output(cli.out.as_deref(), &to_json(&cfg, &report)?)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("cannot start thread pool")?;
    }
    match &cli.command {
        Command::Mass(args) => cmd_mass(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Penrose(args) => cmd_penrose(cli, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
