//! Command-line front end for the `mtsim` library: critical-value tables,
//! decisions on p-value files, Monte Carlo error-rate estimates and sweeps,
//! and limiting-FDR evaluations.
//!
//! Every run is deterministic given its flags: estimates derive all
//! randomness from `--seed`, output is emitted in grid order regardless of
//! scheduling, and re-running a command produces byte-identical output.
//! Exit codes: 0 success, 2 usage error, 3 numeric or model error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use mtsim::estimators::{estimate, sweep, Metric, SignalSpec, SweepGrid, SweepRow};
use mtsim::gaussian::{CorrelationModel, HypothesisConfig};
use mtsim::limits::{
    limiting_bh_fdr_with, reference_limit_for_cell, reference_limit_general, stepup_class_bound,
    DEFAULT_GRID_POINTS, DEFAULT_REFINEMENT_TOLERANCE,
};
use mtsim::procedures::{
    step_down, step_up, validate_fwer_cutoffs, CriticalValues, Decider, Family, PValueVector,
    Procedure, StepKind,
};

mod config;
mod error;
mod files;
mod output;

use config::{parse_list, require, ConfigFile};
use error::{CliError, CliResult};

const DEFAULT_REPLICATES: u64 = 100_000;

/// Stepwise multiple-testing procedures: cutoff tables, decisions,
/// Monte Carlo error-rate estimates, and limiting values.
#[derive(Debug, Parser)]
#[command(name = "mtsim", version, max_term_width = 100)]
struct Cli {
    /// TOML config file with one optional section per subcommand;
    /// command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Debug, Subcommand)]
enum Commands {
    /// Print the critical-value table of a cutoff family.
    Cutoffs(CutoffsArgs),
    /// Apply a procedure (or an explicit cutoff vector) to a p-value file.
    Decide(DecideArgs),
    /// Monte Carlo estimate of one error-rate metric for one configuration.
    Estimate(EstimateArgs),
    /// Estimate a metric over a cartesian grid of (n, rho, alpha) cells.
    Sweep(SweepArgs),
    /// Evaluate the limiting FDR of the BH procedure under equicorrelation.
    Limit(LimitArgs),
}

#[derive(Debug, Args)]
struct CutoffsArgs {
    /// Cutoff family: any procedure name except hommel (e.g. holm, bh).
    #[arg(long)]
    family: Option<String>,
    /// Number of hypotheses.
    #[arg(long)]
    n: Option<usize>,
    /// Significance level in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Annotate the table with distribution-free FWER admissibility checks.
    #[arg(long)]
    check_validity: bool,
}

#[derive(Debug, Args)]
struct DecideArgs {
    /// Procedure name; mutually exclusive with --cutoffs.
    #[arg(long, visible_alias = "proc")]
    procedure: Option<String>,
    /// Significance level in (0, 1); required with --procedure.
    #[arg(long)]
    alpha: Option<f64>,
    /// File with one p-value per line.
    #[arg(long, value_name = "FILE")]
    pvalues: Option<PathBuf>,
    /// File with one cutoff per line; mutually exclusive with --procedure.
    #[arg(long, value_name = "FILE")]
    cutoffs: Option<PathBuf>,
    /// How to apply explicit cutoffs: step-down or step-up.
    #[arg(long)]
    kind: Option<String>,
    /// Annotate the decision with distribution-free FWER admissibility checks.
    #[arg(long)]
    check_validity: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Procedure name.
    #[arg(long, visible_alias = "proc")]
    procedure: Option<String>,
    /// Error-rate metric: fwer, fdr, anypwr, or rejectany.
    #[arg(long)]
    metric: Option<String>,
    /// Number of hypotheses (implied by --matrix when that is given).
    #[arg(long)]
    n: Option<usize>,
    /// Equicorrelation in [0, 1); mutually exclusive with --matrix.
    #[arg(long)]
    rho: Option<f64>,
    /// Correlation matrix file: a header line with n, then n rows.
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
    /// Significance level in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of false nulls (the leading coordinates), default 0.
    #[arg(long)]
    n_false: Option<usize>,
    /// Common mean of the false nulls (must be positive when --n-false > 0).
    #[arg(long)]
    mu: Option<f64>,
    /// Monte Carlo replicates (at least 100), default 100000.
    #[arg(long)]
    replicates: Option<u64>,
    /// RNG seed, default 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated procedure names, or `all`.
    #[arg(long)]
    procedures: Option<String>,
    /// Error-rate metric: fwer, fdr, anypwr, or rejectany.
    #[arg(long)]
    metric: Option<String>,
    /// Comma-separated hypothesis counts.
    #[arg(long, value_name = "LIST")]
    n_grid: Option<String>,
    /// Comma-separated equicorrelations in [0, 1).
    #[arg(long, value_name = "LIST")]
    rho_grid: Option<String>,
    /// Comma-separated significance levels in (0, 1).
    #[arg(long, value_name = "LIST")]
    alpha_grid: Option<String>,
    /// Fixed number of false nulls per cell; mutually exclusive with --fraction.
    #[arg(long)]
    n_false: Option<usize>,
    /// Fraction of false nulls per cell (rounded to the nearest count).
    #[arg(long)]
    fraction: Option<f64>,
    /// Common mean of the false nulls; required with --n-false or --fraction.
    #[arg(long)]
    mu: Option<f64>,
    /// Monte Carlo replicates per cell (at least 100), default 100000.
    #[arg(long)]
    replicates: Option<u64>,
    /// Sweep seed; each cell derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LimitArgs {
    /// Significance level in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Equicorrelation in [0, 1].
    #[arg(long)]
    rho: Option<f64>,
    /// Scan resolution (at least 4), default 10000.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Golden-section refinement tolerance, default 1e-10.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    init_thread_pool()?;
    let file = config::load(cli.config.as_deref())?;
    let ConfigFile { cutoffs, decide, estimate, sweep, limit } = file;
    match cli.command {
        Commands::Cutoffs(args) => run_cutoffs(args, cutoffs.unwrap_or_default()),
        Commands::Decide(args) => run_decide(args, decide.unwrap_or_default()),
        Commands::Estimate(args) => run_estimate(args, estimate.unwrap_or_default()),
        Commands::Sweep(args) => run_sweep(args, sweep.unwrap_or_default()),
        Commands::Limit(args) => run_limit(args, limit.unwrap_or_default()),
    }
}

/// Applies `MTSIM_THREADS` (a positive integer) to the global worker pool.
/// Unset means rayon's default (one worker per logical CPU).
fn init_thread_pool() -> CliResult<()> {
    let raw = match std::env::var("MTSIM_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::usage(format!("MTSIM_THREADS: {e}"))),
        Ok(raw) => raw,
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| {
            CliError::usage(format!("MTSIM_THREADS must be a positive integer, got `{raw}`"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot configure the thread pool: {e}")))
}

/// The cutoff family and step direction a named procedure runs with.
/// Hommel is the one rule without a critical-value vector.
fn family_and_kind(procedure: Procedure) -> CliResult<(Family, StepKind)> {
    let pair = match procedure {
        Procedure::Bonferroni => (Family::Bonferroni, StepKind::StepDown),
        Procedure::Sidak => (Family::Sidak, StepKind::StepDown),
        Procedure::Holm => (Family::HolmHochberg, StepKind::StepDown),
        Procedure::BenjaminiLiu1 => (Family::BenjaminiLiu1, StepKind::StepDown),
        Procedure::BenjaminiLiu2 => (Family::BenjaminiLiu2, StepKind::StepDown),
        Procedure::BenjaminiLiu3 => (Family::BenjaminiLiu3, StepKind::StepDown),
        Procedure::Hochberg => (Family::HolmHochberg, StepKind::StepUp),
        Procedure::BenjaminiHochberg => (Family::BenjaminiHochberg, StepKind::StepUp),
        Procedure::Hommel => {
            return Err(CliError::usage(
                "hommel has no critical-value vector; use `decide --procedure hommel`",
            ));
        }
    };
    Ok(pair)
}

/// `# `-prefixed admissibility annotations for a cutoff vector.
fn validity_lines(u: &CriticalValues, alpha: f64, kind: StepKind) -> Vec<String> {
    let violations = validate_fwer_cutoffs(u, alpha, kind);
    if violations.is_empty() {
        return vec![format!(
            "# cutoffs admissible for distribution-free {kind} FWER control at alpha = {alpha}"
        )];
    }
    violations
        .iter()
        .map(|v| {
            format!(
                "# cutoff {} = {} exceeds the {kind} FWER bound {} at alpha = {alpha}",
                v.index,
                output::derived(v.value),
                output::derived(v.bound)
            )
        })
        .collect()
}

fn run_cutoffs(args: CutoffsArgs, file: config::CutoffsSection) -> CliResult<()> {
    let family_name = require(args.family, file.family, "family")?;
    let n = require(args.n, file.n, "n")?;
    let alpha = require(args.alpha, file.alpha, "alpha")?;
    let check = args.check_validity || file.check_validity.unwrap_or(false);

    let procedure: Procedure = family_name.parse()?;
    let (family, kind) = family_and_kind(procedure)?;
    let cutoffs = CriticalValues::from_family(family, n, alpha)?;

    print!("{}", output::cutoff_table(cutoffs.values()));
    if check {
        for line in validity_lines(&cutoffs, alpha, kind) {
            println!("{line}");
        }
    }
    Ok(())
}

fn parse_kind(name: &str) -> CliResult<StepKind> {
    match name.trim().to_ascii_lowercase().as_str() {
        "step-down" | "stepdown" | "down" => Ok(StepKind::StepDown),
        "step-up" | "stepup" | "up" => Ok(StepKind::StepUp),
        other => Err(CliError::usage(format!(
            "--kind must be step-down or step-up, got `{other}`"
        ))),
    }
}

fn run_decide(args: DecideArgs, file: config::DecideSection) -> CliResult<()> {
    let procedure_name = args.procedure.or(file.procedure);
    let cutoff_path = args.cutoffs.or(file.cutoffs);
    let kind_name = args.kind.or(file.kind);
    let alpha = args.alpha.or(file.alpha);
    let check = args.check_validity || file.check_validity.unwrap_or(false);
    let pvalue_path = require(args.pvalues, file.pvalues, "pvalues")?;

    let p = PValueVector::new(files::read_floats(&pvalue_path)?)?;

    let mut annotations = Vec::new();
    let decision = match (procedure_name, cutoff_path) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("--procedure and --cutoffs are mutually exclusive"));
        }
        (None, None) => {
            return Err(CliError::usage("decide needs either --procedure or --cutoffs"));
        }
        (Some(name), None) => {
            let procedure: Procedure = name.parse()?;
            let alpha =
                alpha.ok_or_else(|| CliError::usage("missing required value for --alpha"))?;
            let decider = procedure.decider(p.len(), alpha)?;
            if check {
                match &decider {
                    Decider::StepDown(u) => {
                        annotations = validity_lines(u, alpha, StepKind::StepDown);
                    }
                    Decider::StepUp(u) => {
                        annotations = validity_lines(u, alpha, StepKind::StepUp);
                    }
                    Decider::Hommel { .. } => {
                        annotations =
                            vec!["# hommel has no critical-value vector to validate".to_owned()];
                    }
                }
            }
            decider.decide(&p)?
        }
        (None, Some(path)) => {
            let u = CriticalValues::custom(files::read_floats(&path)?)?;
            if u.len() != p.len() {
                return Err(CliError::usage(format!(
                    "{} cutoffs cannot decide {} p-values",
                    u.len(),
                    p.len()
                )));
            }
            let kind_name = kind_name
                .ok_or_else(|| CliError::usage("--cutoffs needs --kind step-down|step-up"))?;
            let kind = parse_kind(&kind_name)?;
            if check {
                let alpha = alpha.ok_or_else(|| {
                    CliError::usage("--check-validity on explicit cutoffs needs --alpha")
                })?;
                annotations = validity_lines(&u, alpha, kind);
            }
            match kind {
                StepKind::StepDown => step_down(&p, &u)?,
                StepKind::StepUp => step_up(&p, &u)?,
            }
        }
    };

    print!("{}", output::decision_report(&decision));
    for line in annotations {
        println!("{line}");
    }
    Ok(())
}

/// Writes the header plus one line per row, to `path` or stdout.
fn write_csv(path: Option<&Path>, rows: &[SweepRow]) -> CliResult<()> {
    let mut text = String::with_capacity(96 * (rows.len() + 1));
    text.push_str(output::CSV_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&output::csv_row(row));
        text.push('\n');
    }
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_estimate(args: EstimateArgs, file: config::EstimateSection) -> CliResult<()> {
    let procedure: Procedure = require(args.procedure, file.procedure, "procedure")?.parse()?;
    let metric: Metric = require(args.metric, file.metric, "metric")?.parse()?;
    let alpha = require(args.alpha, file.alpha, "alpha")?;
    let n_false = args.n_false.or(file.n_false).unwrap_or(0);
    let mu = args.mu.or(file.mu).unwrap_or(0.0);
    let replicates = args.replicates.or(file.replicates).unwrap_or(DEFAULT_REPLICATES);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let output_path = args.output.or(file.output);
    let n_flag = args.n.or(file.n);

    // Either an equicorrelation level or an explicit matrix, never both. The
    // reference-limit annotation matches: exact cell limits under
    // equicorrelation, the minimum-off-diagonal bounds for a matrix.
    let (n, model, rho_column, reference, bound_rho) =
        match (args.rho.or(file.rho), args.matrix.or(file.matrix)) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage("--rho and --matrix are mutually exclusive"));
            }
            (None, None) => {
                return Err(CliError::usage("estimate needs either --rho or --matrix"));
            }
            (Some(rho), None) => {
                let n = n_flag.ok_or_else(|| {
                    CliError::usage("missing required value for --n")
                })?;
                let model = CorrelationModel::equicorrelated(rho)?;
                let null_fraction = (n.saturating_sub(n_false)) as f64 / n.max(1) as f64;
                let reference =
                    reference_limit_for_cell(procedure, metric, alpha, rho, null_fraction)
                        .ok()
                        .flatten();
                (n, model, rho, reference, Some(rho))
            }
            (None, Some(path)) => {
                let matrix = files::read_matrix(&path)?;
                let n = matrix.n();
                if let Some(flag_n) = n_flag {
                    if flag_n != n {
                        return Err(CliError::usage(format!(
                            "--n {flag_n} disagrees with the {n}x{n} matrix in {}",
                            path.display()
                        )));
                    }
                }
                let delta = matrix.min_offdiagonal();
                let reference = reference_limit_general(procedure, metric, alpha, delta)
                    .ok()
                    .flatten();
                (n, CorrelationModel::General(matrix), delta, reference, None)
            }
        };

    let config = HypothesisConfig::constant_signal(n, n_false, mu, model)?;
    let est = estimate(procedure, alpha, &config, metric, replicates, seed)?;

    // Step-up-class ceiling: meaningful for step-up rules on global-null
    // FWER/FDR cells, and only when the correlation is exactly equicorrelated.
    let class_bound = match bound_rho {
        Some(rho)
            if matches!(metric, Metric::Fwer | Metric::Fdr)
                && n_false == 0
                && matches!(procedure, Procedure::Hochberg | Procedure::BenjaminiHochberg) =>
        {
            stepup_class_bound(alpha, rho).ok()
        }
        _ => None,
    };

    let row = SweepRow {
        procedure,
        metric,
        n,
        rho: rho_column,
        alpha,
        n_false,
        mu,
        replicates,
        seed,
        outcome: Ok(est),
        reference_limit: reference,
        class_bound,
    };
    write_csv(output_path.as_deref(), &[row])
}

fn parse_procedures(raw: &str) -> CliResult<Vec<Procedure>> {
    if raw.trim().eq_ignore_ascii_case("all") {
        return Ok(Procedure::ALL.to_vec());
    }
    parse_list(raw, "procedures")
}

fn run_sweep(args: SweepArgs, file: config::SweepSection) -> CliResult<()> {
    let procedures: Vec<Procedure> = match (args.procedures, file.procedures) {
        (Some(raw), _) => parse_procedures(&raw)?,
        (None, Some(names)) => names
            .iter()
            .map(|s| s.parse::<Procedure>().map_err(CliError::from))
            .collect::<CliResult<_>>()?,
        (None, None) => {
            return Err(CliError::usage("missing required value for --procedures"));
        }
    };
    let metric: Metric = require(args.metric, file.metric, "metric")?.parse()?;
    let ns: Vec<usize> = match (args.n_grid, file.n) {
        (Some(raw), _) => parse_list(&raw, "n-grid")?,
        (None, Some(values)) => values,
        (None, None) => return Err(CliError::usage("missing required value for --n-grid")),
    };
    let rhos: Vec<f64> = match (args.rho_grid, file.rho) {
        (Some(raw), _) => parse_list(&raw, "rho-grid")?,
        (None, Some(values)) => values,
        (None, None) => return Err(CliError::usage("missing required value for --rho-grid")),
    };
    let alphas: Vec<f64> = match (args.alpha_grid, file.alpha) {
        (Some(raw), _) => parse_list(&raw, "alpha-grid")?,
        (None, Some(values)) => values,
        (None, None) => return Err(CliError::usage("missing required value for --alpha-grid")),
    };

    let mu = args.mu.or(file.mu);
    let signal = match (args.n_false.or(file.n_false), args.fraction.or(file.fraction)) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("--n-false and --fraction are mutually exclusive"));
        }
        (None, None) => {
            if mu.is_some() {
                return Err(CliError::usage("--mu needs --n-false or --fraction"));
            }
            SignalSpec::GlobalNull
        }
        (Some(n_false), None) => SignalSpec::ConstantCount {
            n_false,
            mu: mu.ok_or_else(|| CliError::usage("--n-false needs --mu"))?,
        },
        (None, Some(fraction)) => SignalSpec::ConstantFraction {
            fraction,
            mu: mu.ok_or_else(|| CliError::usage("--fraction needs --mu"))?,
        },
    };

    let grid = SweepGrid {
        procedures,
        metric,
        ns,
        rhos,
        alphas,
        signals: vec![signal],
        replicates: args.replicates.or(file.replicates).unwrap_or(DEFAULT_REPLICATES),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    let rows = sweep(&grid)?;
    write_csv(args.output.or(file.output).as_deref(), &rows)
}

fn run_limit(args: LimitArgs, file: config::LimitSection) -> CliResult<()> {
    let alpha = require(args.alpha, file.alpha, "alpha")?;
    let rho = require(args.rho, file.rho, "rho")?;
    let grid_points = args.grid_points.or(file.grid_points).unwrap_or(DEFAULT_GRID_POINTS);
    let tolerance = args.tolerance.or(file.tolerance).unwrap_or(DEFAULT_REFINEMENT_TOLERANCE);
    let result = limiting_bh_fdr_with(alpha, rho, grid_points, tolerance)?;
    print!("{}", output::limit_report(&result));
    Ok(())
}
