//! Monte Carlo estimation of multiple-testing error rates.
//!
//! [`estimate`] draws replicates from a [`HypothesisConfig`], applies a
//! procedure, and averages a per-replicate statistic chosen by [`Metric`]:
//! the family-wise error indicator `1{V ≥ 1}`, the false discovery
//! proportion `V / max(R, 1)`, the any-power indicator `1{S ≥ 1}`, or the
//! any-rejection indicator `1{R ≥ 1}`, where `R`, `V`, and `S` count
//! rejections, false rejections, and true rejections.
//!
//! [`estimate_shared`] evaluates several procedures on *identical* replicate
//! streams (common random numbers), which makes per-realization dominance
//! relations carry over to the estimates and sharpens comparisons.
//! [`sweep`] runs a whole parameter grid, seeding each cell deterministically
//! and annotating rows with known limiting values.
//!
//! Reproducibility contract: a given `(seed, configuration)` produces
//! byte-identical results regardless of thread count. Replicate `k` always
//! uses its own RNG stream, and per-chunk accumulators are merged in a fixed
//! order.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distributions::phi;
use crate::error::{Error, Result};
use crate::gaussian::{replicate_rng, CorrelationModel, HypothesisConfig, Sampler};
use crate::limits::{reference_limit_for_cell, stepup_class_bound, LimitBand};
use crate::procedures::{Decider, Procedure, RejectionSet};

/// Smallest accepted replicate count; below this the normal-approximation
/// interval is meaningless.
pub const MIN_REPLICATES: u64 = 100;

/// Replicates per work unit; accumulators merge in chunk order, so results
/// do not depend on how chunks are scheduled across threads.
const CHUNK: u64 = 1024;

/// Two-sided 97.5% standard-normal quantile, for 95% intervals.
const CI_Z: f64 = 1.959_963_984_540_053_9;

/// Which per-replicate statistic is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Family-wise error rate, `P(V ≥ 1)`.
    Fwer,
    /// False discovery rate, `E[V / max(R, 1)]`.
    Fdr,
    /// Probability of rejecting at least one false null, `P(S ≥ 1)`.
    AnyPwr,
    /// Probability of rejecting anything at all, `P(R ≥ 1)`.
    RejectAny,
}

impl Metric {
    /// All metrics, in display order.
    pub const ALL: [Metric; 4] = [Metric::Fwer, Metric::Fdr, Metric::AnyPwr, Metric::RejectAny];

    /// Canonical lowercase name, as used in CLI arguments and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Fwer => "fwer",
            Metric::Fdr => "fdr",
            Metric::AnyPwr => "anypwr",
            Metric::RejectAny => "rejectany",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fwer" => Ok(Metric::Fwer),
            "fdr" => Ok(Metric::Fdr),
            "anypwr" => Ok(Metric::AnyPwr),
            "rejectany" => Ok(Metric::RejectAny),
            _ => Err(Error::usage(format!(
                "unknown metric `{s}`; expected one of fwer, fdr, anypwr, rejectany"
            ))),
        }
    }
}

/// Rejection counts of one replicate, split by truth of the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionSummary {
    /// Total rejections `R`.
    pub rejections: usize,
    /// Rejections of true nulls `V` (those with `μᵢ = 0`).
    pub false_rejections: usize,
    /// Rejections of false nulls `S` (those with `μᵢ > 0`).
    pub true_rejections: usize,
}

/// Counts a rejection set against the configuration that generated it.
pub fn summarize(decisions: &RejectionSet, config: &HypothesisConfig) -> Result<DecisionSummary> {
    if decisions.len() != config.n() {
        return Err(Error::usage(format!(
            "rejection set has {} entries but the configuration has {} hypotheses",
            decisions.len(),
            config.n()
        )));
    }
    let mut false_rejections = 0;
    let mut true_rejections = 0;
    for (i, flag) in decisions.flags().iter().enumerate() {
        if *flag {
            if config.is_true_null(i) {
                false_rejections += 1;
            } else {
                true_rejections += 1;
            }
        }
    }
    Ok(DecisionSummary {
        rejections: false_rejections + true_rejections,
        false_rejections,
        true_rejections,
    })
}

/// A Monte Carlo estimate with its normal-approximation 95% interval.
///
/// `ci_low ≤ estimate ≤ ci_high` always holds and the interval is clamped to
/// `[0, 1]`. The interval is a large-sample approximation, not an exact
/// binomial interval; at the default replicate counts (`≥ 10⁴`) the
/// difference is negligible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    /// The statistic that was averaged.
    pub metric: Metric,
    /// Sample mean over replicates.
    pub estimate: f64,
    /// Sample standard deviation divided by √replicates.
    pub std_error: f64,
    /// Lower 95% confidence bound, clamped to `[0, 1]`.
    pub ci_low: f64,
    /// Upper 95% confidence bound, clamped to `[0, 1]`.
    pub ci_high: f64,
    /// Number of replicates averaged.
    pub replicates: u64,
    /// Seed the replicate streams were derived from.
    pub seed: u64,
}

/// Welford running mean/variance, with Chan's combination rule so chunks can
/// accumulate independently and merge deterministically.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Welford {
            count,
            mean: self.mean + delta * (other.count as f64 / count as f64),
            m2: self.m2
                + other.m2
                + delta * delta * (self.count as f64 * other.count as f64 / count as f64),
        }
    }

    /// Unbiased sample variance (0 for fewer than two observations).
    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Estimates `metric` for one procedure at significance level `level`.
pub fn estimate(
    procedure: Procedure,
    level: f64,
    config: &HypothesisConfig,
    metric: Metric,
    replicates: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let mut results = estimate_shared(&[(procedure, level)], config, metric, replicates, seed)?;
    Ok(results.pop().expect("one procedure in, one estimate out"))
}

/// Estimates `metric` for several `(procedure, level)` pairs on identical
/// replicate streams (common random numbers).
///
/// Sharing the draws means per-realization dominance relations between
/// procedures survive in the estimates: a procedure that rejects a superset
/// on every replicate gets an estimate at least as large, with no Monte
/// Carlo crossover. Results are returned in input order.
pub fn estimate_shared(
    procedures: &[(Procedure, f64)],
    config: &HypothesisConfig,
    metric: Metric,
    replicates: u64,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate>> {
    if procedures.is_empty() {
        return Err(Error::usage("estimation needs at least one procedure"));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::usage(format!(
            "at least {MIN_REPLICATES} replicates are required, got {replicates}"
        )));
    }
    let deciders = procedures
        .iter()
        .map(|&(procedure, level)| procedure.decider(config.n(), level))
        .collect::<Result<Vec<_>>>()?;
    let sampler = Sampler::new(config)?;

    let n_chunks = replicates.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Welford>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(replicates);
            accumulate_chunk(&sampler, &deciders, config.mu(), metric, seed, lo..hi)
        })
        .collect();

    // Merge in chunk order: the result is independent of thread scheduling.
    let mut totals = vec![Welford::default(); deciders.len()];
    for chunk in per_chunk {
        for (total, part) in totals.iter_mut().zip(chunk) {
            *total = total.merge(part);
        }
    }
    Ok(totals
        .into_iter()
        .map(|w| finalize(metric, w, replicates, seed))
        .collect())
}

/// Runs replicates `range` and accumulates the metric for every decider.
fn accumulate_chunk(
    sampler: &Sampler,
    deciders: &[Decider],
    mu: &[f64],
    metric: Metric,
    seed: u64,
    range: Range<u64>,
) -> Vec<Welford> {
    let n = sampler.n();
    let mut x = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut sorted = vec![0.0; n];
    let mut accs = vec![Welford::default(); deciders.len()];
    for replicate in range {
        let mut rng = replicate_rng(seed, replicate);
        sampler.fill(&mut rng, &mut x);
        for (pi, &xi) in p.iter_mut().zip(&x) {
            *pi = phi(-xi);
        }
        sorted.copy_from_slice(&p);
        sorted.sort_unstable_by(f64::total_cmp);
        for (decider, acc) in deciders.iter().zip(&mut accs) {
            let threshold = decider.rejection_threshold(&sorted);
            acc.push(metric_value(metric, threshold, &p, mu));
        }
    }
    accs
}

/// The per-replicate statistic given the rejection threshold.
fn metric_value(metric: Metric, threshold: f64, p: &[f64], mu: &[f64]) -> f64 {
    if threshold == f64::NEG_INFINITY {
        return 0.0; // nothing rejected: every metric scores zero
    }
    let mut false_rejections = 0u64;
    let mut true_rejections = 0u64;
    for (pi, mui) in p.iter().zip(mu) {
        if *pi <= threshold {
            if *mui == 0.0 {
                false_rejections += 1;
            } else {
                true_rejections += 1;
            }
        }
    }
    let rejections = false_rejections + true_rejections;
    match metric {
        Metric::Fwer => f64::from(false_rejections > 0),
        Metric::Fdr => {
            if rejections == 0 {
                0.0
            } else {
                false_rejections as f64 / rejections as f64
            }
        }
        Metric::AnyPwr => f64::from(true_rejections > 0),
        Metric::RejectAny => f64::from(rejections > 0),
    }
}

fn finalize(metric: Metric, w: Welford, replicates: u64, seed: u64) -> MonteCarloEstimate {
    let estimate = w.mean;
    let std_error = (w.variance() / w.count as f64).sqrt();
    let half_width = CI_Z * std_error;
    MonteCarloEstimate {
        metric,
        estimate,
        std_error,
        ci_low: (estimate - half_width).max(0.0),
        ci_high: (estimate + half_width).min(1.0),
        replicates,
        seed,
    }
}

/// How the mean vector of a sweep cell is built from its `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalSpec {
    /// All means zero.
    GlobalNull,
    /// A fixed number of leading coordinates get mean `mu`.
    ConstantCount { n_false: usize, mu: f64 },
    /// A fixed fraction of coordinates (rounded to nearest) get mean `mu`.
    ConstantFraction { fraction: f64, mu: f64 },
}

impl SignalSpec {
    /// Resolves to `(n_false, mu)` for a cell of size `n`.
    pub fn resolve(&self, n: usize) -> Result<(usize, f64)> {
        match *self {
            SignalSpec::GlobalNull => Ok((0, 0.0)),
            SignalSpec::ConstantCount { n_false, mu } => Ok((n_false, mu)),
            SignalSpec::ConstantFraction { fraction, mu } => {
                if !fraction.is_finite() || !(0.0..=1.0).contains(&fraction) {
                    return Err(Error::domain(format!(
                        "signal fraction must lie in [0, 1], got {fraction}"
                    )));
                }
                Ok(((fraction * n as f64).round() as usize, mu))
            }
        }
    }
}

/// A full sweep request: the cartesian grid of cells and the procedures to
/// run (with shared draws) inside each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub procedures: Vec<Procedure>,
    pub metric: Metric,
    pub ns: Vec<usize>,
    pub rhos: Vec<f64>,
    pub alphas: Vec<f64>,
    pub signals: Vec<SignalSpec>,
    pub replicates: u64,
    pub seed: u64,
}

/// One output row of a sweep: a `(cell, procedure)` pair.
///
/// `outcome` carries the estimate, or the error message if the cell could
/// not run (bad parameters do not abort the rest of the sweep).
/// `reference_limit` is the known limiting value of the metric for this
/// cell, when theory provides one, and `class_bound` is the step-up-class
/// FDR ceiling, attached to step-up procedures on global-null FWER/FDR rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub procedure: Procedure,
    pub metric: Metric,
    pub n: usize,
    pub rho: f64,
    pub alpha: f64,
    pub n_false: usize,
    pub mu: f64,
    pub replicates: u64,
    /// Per-cell seed, derived from the sweep seed and the cell index.
    pub seed: u64,
    pub outcome: std::result::Result<MonteCarloEstimate, String>,
    pub reference_limit: Option<LimitBand>,
    pub class_bound: Option<f64>,
}

/// Runs every cell of `grid` and returns rows in grid order: `n` varies
/// slowest, then `rho`, `alpha`, and signal, with one row per procedure
/// inside each cell.
///
/// Cells are seeded deterministically from `(grid.seed, cell index)`, so
/// inserting or removing grid points does not change the draws of the cells
/// that keep their position, and the whole table is reproducible
/// byte-for-byte. Per-cell failures are recorded in the affected rows and do
/// not abort the sweep.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if grid.procedures.is_empty()
        || grid.ns.is_empty()
        || grid.rhos.is_empty()
        || grid.alphas.is_empty()
        || grid.signals.is_empty()
    {
        return Err(Error::usage("empty sweep grid"));
    }
    if grid.replicates < MIN_REPLICATES {
        return Err(Error::usage(format!(
            "at least {MIN_REPLICATES} replicates are required, got {}",
            grid.replicates
        )));
    }
    let cells = grid.ns.len() * grid.rhos.len() * grid.alphas.len() * grid.signals.len();
    let mut rows = Vec::with_capacity(cells * grid.procedures.len());
    let mut cell_index: u64 = 0;
    for &n in &grid.ns {
        for &rho in &grid.rhos {
            for &alpha in &grid.alphas {
                for signal in &grid.signals {
                    let cell_seed = derive_cell_seed(grid.seed, cell_index);
                    cell_index += 1;
                    run_cell(grid, n, rho, alpha, signal, cell_seed, &mut rows);
                }
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    grid: &SweepGrid,
    n: usize,
    rho: f64,
    alpha: f64,
    signal: &SignalSpec,
    cell_seed: u64,
    rows: &mut Vec<SweepRow>,
) {
    let resolved = signal.resolve(n);
    let (n_false, mu) = *resolved.as_ref().unwrap_or(&(0, 0.0));
    let outcome = resolved.map_err(|e| e.to_string()).and_then(|(n_false, mu)| {
        let model = CorrelationModel::equicorrelated(rho).map_err(|e| e.to_string())?;
        let config =
            HypothesisConfig::constant_signal(n, n_false, mu, model).map_err(|e| e.to_string())?;
        let pairs: Vec<(Procedure, f64)> =
            grid.procedures.iter().map(|&p| (p, alpha)).collect();
        estimate_shared(&pairs, &config, grid.metric, grid.replicates, cell_seed)
            .map_err(|e| e.to_string())
    });
    match outcome {
        Ok(estimates) => {
            let null_fraction = (n - n_false) as f64 / n as f64;
            for (&procedure, est) in grid.procedures.iter().zip(estimates) {
                let reference =
                    reference_limit_for_cell(procedure, grid.metric, alpha, rho, null_fraction)
                        .ok()
                        .flatten();
                let class_bound = if matches!(grid.metric, Metric::Fwer | Metric::Fdr)
                    && n_false == 0
                    && matches!(
                        procedure,
                        Procedure::Hochberg | Procedure::BenjaminiHochberg
                    ) {
                    stepup_class_bound(alpha, rho).ok()
                } else {
                    None
                };
                rows.push(SweepRow {
                    procedure,
                    metric: grid.metric,
                    n,
                    rho,
                    alpha,
                    n_false,
                    mu,
                    replicates: grid.replicates,
                    seed: cell_seed,
                    outcome: Ok(est),
                    reference_limit: reference,
                    class_bound,
                });
            }
        }
        Err(message) => {
            for &procedure in &grid.procedures {
                rows.push(SweepRow {
                    procedure,
                    metric: grid.metric,
                    n,
                    rho,
                    alpha,
                    n_false,
                    mu,
                    replicates: grid.replicates,
                    seed: cell_seed,
                    outcome: Err(message.clone()),
                    reference_limit: None,
                    class_bound: None,
                });
            }
        }
    }
}

/// SplitMix64-style seed derivation: decorrelates per-cell streams even for
/// adjacent cell indices and small master seeds.
pub(crate) fn derive_cell_seed(seed: u64, cell_index: u64) -> u64 {
    let mut z = seed.wrapping_add(cell_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::PValueVector;

    fn equicorrelated(rho: f64) -> CorrelationModel {
        CorrelationModel::equicorrelated(rho).unwrap()
    }

    #[test]
    fn metric_names_round_trip() {
        for metric in Metric::ALL {
            assert_eq!(metric.name().parse::<Metric>().unwrap(), metric);
        }
        assert_eq!("Any-Pwr".parse::<Metric>().unwrap(), Metric::AnyPwr);
        assert_eq!("REJECT_ANY".parse::<Metric>().unwrap(), Metric::RejectAny);
        assert!(matches!(
            "median".parse::<Metric>(),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn summarize_counts_by_truth_of_the_null() {
        let config =
            HypothesisConfig::new(vec![0.5, 0.0, 0.0], equicorrelated(0.0)).unwrap();
        // Nothing rejected.
        let none = RejectionSet::from_flags(vec![false, false, false]);
        assert_eq!(
            summarize(&none, &config).unwrap(),
            DecisionSummary { rejections: 0, false_rejections: 0, true_rejections: 0 }
        );
        // Hypotheses 1 and 3 rejected: one true signal, one true null.
        let some = RejectionSet::from_flags(vec![true, false, true]);
        assert_eq!(
            summarize(&some, &config).unwrap(),
            DecisionSummary { rejections: 2, false_rejections: 1, true_rejections: 1 }
        );
        // All rejected under the global null: everything is a false rejection.
        let null_config = HypothesisConfig::global_null(3, equicorrelated(0.0)).unwrap();
        let all = RejectionSet::from_flags(vec![true, true, true]);
        assert_eq!(
            summarize(&all, &null_config).unwrap(),
            DecisionSummary { rejections: 3, false_rejections: 3, true_rejections: 0 }
        );
    }

    #[test]
    fn summarize_rejects_mismatched_lengths() {
        let config = HypothesisConfig::global_null(3, equicorrelated(0.0)).unwrap();
        let wrong = RejectionSet::from_flags(vec![false, false]);
        assert!(matches!(summarize(&wrong, &config), Err(Error::Usage(_))));
    }

    #[test]
    fn summarize_agrees_with_a_real_decision() {
        let config =
            HypothesisConfig::new(vec![2.0, 0.0, 0.0, 0.0], equicorrelated(0.0)).unwrap();
        let p = PValueVector::new(vec![1e-6, 0.001, 0.8, 0.9]).unwrap();
        let decider = Procedure::Holm.decider(4, 0.05).unwrap();
        let decisions = decider.decide(&p).unwrap();
        let s = summarize(&decisions, &config).unwrap();
        assert_eq!(s.rejections, 2);
        assert_eq!(s.true_rejections, 1); // the μ=2 coordinate
        assert_eq!(s.false_rejections, 1); // the p=0.001 true null
    }

    #[test]
    fn bonferroni_fwer_matches_the_independence_closed_form() {
        // Under independence the exact FWER of Bonferroni at level α with n
        // hypotheses is 1 - (1 - α/n)ⁿ.
        let n = 100;
        let alpha = 0.05;
        let exact = 1.0 - (1.0 - alpha / n as f64).powi(n as i32);
        let config = HypothesisConfig::global_null(n, equicorrelated(0.0)).unwrap();
        let est = estimate(Procedure::Bonferroni, alpha, &config, Metric::Fwer, 20_000, 42)
            .unwrap();
        assert!(
            (est.estimate - exact).abs() <= 3.0 * est.std_error,
            "estimate {} vs exact {exact} (SE {})",
            est.estimate,
            est.std_error
        );
        assert!(est.ci_low <= est.estimate && est.estimate <= est.ci_high);
        assert!(est.ci_low >= 0.0 && est.ci_high <= 1.0);
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn strong_signals_force_near_certain_power() {
        let config =
            HypothesisConfig::constant_signal(10, 10, 10.0, equicorrelated(0.3)).unwrap();
        for procedure in [Procedure::Bonferroni, Procedure::Hommel] {
            let est =
                estimate(procedure, 0.05, &config, Metric::AnyPwr, 500, 9).unwrap();
            assert!(est.estimate >= 0.99, "{procedure}: {}", est.estimate);
        }
    }

    #[test]
    fn bh_fdr_under_independence_matches_the_null_fraction_identity() {
        // With n₀ of n true nulls and independent coordinates, the BH FDR is
        // exactly (n₀/n)·α regardless of the signal strength.
        let config =
            HypothesisConfig::constant_signal(200, 100, 3.0, equicorrelated(0.0)).unwrap();
        let est = estimate(
            Procedure::BenjaminiHochberg,
            0.05,
            &config,
            Metric::Fdr,
            10_000,
            2024,
        )
        .unwrap();
        let want = 0.5 * 0.05;
        assert!(
            (est.estimate - want).abs() <= 3.0 * est.std_error,
            "estimate {} vs {want} (SE {})",
            est.estimate,
            est.std_error
        );
    }

    #[test]
    fn fdr_equals_fwer_under_the_global_null() {
        // With no signals V = R, so V/max(R,1) = 1{V ≥ 1} on every replicate
        // and the two estimates agree to the last bit.
        let config = HypothesisConfig::global_null(50, equicorrelated(0.2)).unwrap();
        let fwer =
            estimate(Procedure::Hochberg, 0.2, &config, Metric::Fwer, 1_000, 5).unwrap();
        let fdr =
            estimate(Procedure::Hochberg, 0.2, &config, Metric::Fdr, 1_000, 5).unwrap();
        assert_eq!(fwer.estimate, fdr.estimate);
        assert_eq!(fwer.std_error, fdr.std_error);
        assert!(fwer.estimate > 0.0, "test should exercise nonzero error rates");
    }

    #[test]
    fn estimates_are_independent_of_thread_count() {
        let config = HypothesisConfig::global_null(10, equicorrelated(0.5)).unwrap();
        let run = || {
            estimate(Procedure::Holm, 0.1, &config, Metric::Fwer, 5_000, 77).unwrap()
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(single, multi);
        assert_eq!(single, run());
    }

    #[test]
    fn shared_streams_preserve_the_dominance_chain() {
        let config = HypothesisConfig::global_null(40, equicorrelated(0.4)).unwrap();
        let procedures = [
            (Procedure::Bonferroni, 0.05),
            (Procedure::Holm, 0.05),
            (Procedure::Hochberg, 0.05),
            (Procedure::Hommel, 0.05),
        ];
        let est =
            estimate_shared(&procedures, &config, Metric::RejectAny, 2_000, 31).unwrap();
        for pair in est.windows(2) {
            assert!(
                pair[0].estimate <= pair[1].estimate,
                "dominance violated: {} > {}",
                pair[0].estimate,
                pair[1].estimate
            );
        }
        assert!(est[0].estimate > 0.0);
    }

    #[test]
    fn estimate_validates_its_inputs() {
        let config = HypothesisConfig::global_null(5, equicorrelated(0.0)).unwrap();
        assert!(matches!(
            estimate(Procedure::Holm, 0.05, &config, Metric::Fwer, 99, 1),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            estimate_shared(&[], &config, Metric::Fwer, 1_000, 1),
            Err(Error::Usage(_))
        ));
        // Invalid level propagates from decider construction.
        assert!(matches!(
            estimate(Procedure::Holm, 1.5, &config, Metric::Fwer, 1_000, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn signal_specs_resolve_against_the_cell_size() {
        assert_eq!(SignalSpec::GlobalNull.resolve(10).unwrap(), (0, 0.0));
        assert_eq!(
            SignalSpec::ConstantCount { n_false: 3, mu: 2.0 }.resolve(10).unwrap(),
            (3, 2.0)
        );
        assert_eq!(
            SignalSpec::ConstantFraction { fraction: 0.1, mu: 2.0 }
                .resolve(1000)
                .unwrap(),
            (100, 2.0)
        );
        assert!(matches!(
            SignalSpec::ConstantFraction { fraction: 1.5, mu: 2.0 }.resolve(10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sweep_emits_rows_in_grid_order_with_annotations() {
        let grid = SweepGrid {
            procedures: vec![Procedure::Bonferroni, Procedure::Hochberg],
            metric: Metric::Fwer,
            ns: vec![5, 10],
            rhos: vec![0.0],
            alphas: vec![0.05],
            signals: vec![SignalSpec::GlobalNull],
            replicates: 200,
            seed: 11,
        };
        let rows = sweep(&grid).unwrap();
        assert_eq!(rows.len(), 4);
        let shape: Vec<(usize, Procedure)> =
            rows.iter().map(|r| (r.n, r.procedure)).collect();
        assert_eq!(
            shape,
            vec![
                (5, Procedure::Bonferroni),
                (5, Procedure::Hochberg),
                (10, Procedure::Bonferroni),
                (10, Procedure::Hochberg),
            ]
        );
        // Procedures inside a cell share the seed; cells differ.
        assert_eq!(rows[0].seed, rows[1].seed);
        assert_ne!(rows[0].seed, rows[2].seed);
        for row in &rows {
            assert!(row.outcome.is_ok(), "{:?}", row.outcome);
        }
        // Independence reference values: point for Bonferroni, interval for
        // Hochberg; the class bound only annotates the step-up rule.
        assert!(matches!(rows[0].reference_limit, Some(LimitBand::Point(_))));
        assert!(matches!(rows[1].reference_limit, Some(LimitBand::Interval(_, _))));
        assert_eq!(rows[0].class_bound, None);
        let bound = rows[1].class_bound.expect("step-up class bound");
        assert_eq!(bound, stepup_class_bound(0.05, 0.0).unwrap());
        // Determinism: the full table reproduces byte-for-byte.
        assert_eq!(rows, sweep(&grid).unwrap());
    }

    #[test]
    fn sweep_records_cell_failures_without_aborting() {
        let grid = SweepGrid {
            procedures: vec![Procedure::Holm],
            metric: Metric::Fwer,
            ns: vec![5],
            rhos: vec![0.0, 1.0], // ρ = 1 is outside the sampler's domain
            alphas: vec![0.05],
            signals: vec![SignalSpec::GlobalNull],
            replicates: 200,
            seed: 3,
        };
        let rows = sweep(&grid).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].outcome.is_ok());
        let err = rows[1].outcome.as_ref().unwrap_err();
        assert!(err.contains("equicorrelation"), "unexpected message: {err}");
        assert_eq!(rows[1].reference_limit, None);
    }

    #[test]
    fn sweep_validates_the_grid_shape() {
        let grid = SweepGrid {
            procedures: vec![],
            metric: Metric::Fwer,
            ns: vec![5],
            rhos: vec![0.0],
            alphas: vec![0.05],
            signals: vec![SignalSpec::GlobalNull],
            replicates: 200,
            seed: 0,
        };
        assert!(matches!(sweep(&grid), Err(Error::Usage(_))));
        let grid = SweepGrid {
            procedures: vec![Procedure::Holm],
            ns: vec![],
            ..grid
        };
        assert!(matches!(sweep(&grid), Err(Error::Usage(_))));
        let grid = SweepGrid {
            ns: vec![5],
            replicates: 10,
            ..grid
        };
        assert!(matches!(sweep(&grid), Err(Error::Usage(_))));
    }

    #[test]
    fn mixed_cells_annotate_power_and_fdr_correctly() {
        let grid = SweepGrid {
            procedures: vec![Procedure::Holm, Procedure::BenjaminiHochberg],
            metric: Metric::AnyPwr,
            ns: vec![20],
            rhos: vec![0.5],
            alphas: vec![0.05],
            signals: vec![SignalSpec::ConstantFraction { fraction: 0.1, mu: 2.0 }],
            replicates: 200,
            seed: 8,
        };
        let rows = sweep(&grid).unwrap();
        assert_eq!(rows[0].n_false, 2);
        assert_eq!(rows[0].mu, 2.0);
        // Power decays to zero for the FWER controllers at positive ρ…
        assert_eq!(rows[0].reference_limit, Some(LimitBand::Point(0.0)));
        // …but no such claim exists for BH power.
        assert_eq!(rows[1].reference_limit, None);
        // Class bounds only apply to FWER/FDR global-null rows.
        assert_eq!(rows[1].class_bound, None);
    }

    #[test]
    fn cell_seeds_are_stable_and_spread_out() {
        let seeds: Vec<u64> = (0..8).map(|i| derive_cell_seed(42, i)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
        assert_eq!(seeds, (0..8).map(|i| derive_cell_seed(42, i)).collect::<Vec<_>>());
        assert_ne!(derive_cell_seed(42, 0), derive_cell_seed(43, 0));
    }
}
