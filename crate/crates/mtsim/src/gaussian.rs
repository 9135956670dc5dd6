//! The correlated Gaussian one-sided testing model and reproducible samplers.
//!
//! Observations are `Xᵢ = μᵢ + εᵢ` with `ε ~ N(0, Σ)`, `Σ` a correlation
//! matrix with nonnegative entries, and hypothesis `i` tests `μᵢ = 0` against
//! `μᵢ > 0` with the upper-tail p-value `pᵢ = 1 - Φ(Xᵢ)`. The equicorrelated
//! case `Σᵢⱼ = ρ` is sampled in O(n) through its one-factor representation
//! `εᵢ = √ρ·θ + √(1-ρ)·Zᵢ`; a general matrix is Cholesky-factorized once and
//! costs O(n²) per draw.
//!
//! Reproducibility: [`replicate_rng`] derives an independent ChaCha stream
//! per `(seed, replicate)` pair, so replicate `r` yields identical bits no
//! matter what order — or on how many threads — replicates are generated.

use crate::distributions;
use crate::error::{Error, Result};
use crate::procedures::PValueVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Symmetric matrix with unit diagonal and nonnegative off-diagonal entries,
/// stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Tolerance for the unit-diagonal and symmetry checks.
const MATRIX_CHECK_TOL: f64 = 1e-12;

/// Diagonal jitter added on a second factorization attempt, to admit
/// matrices that are positive semidefinite but numerically singular.
const CHOLESKY_JITTER: f64 = 1e-10;

impl CorrelationMatrix {
    /// Wraps a dense row-major `n × n` matrix, validating that it is a
    /// correlation matrix with nonnegative entries: finite, unit diagonal
    /// (within `1e-12`), symmetric (within `1e-12`), off-diagonal in `[0, 1]`.
    ///
    /// Positive semidefiniteness is *not* checked here; it surfaces when a
    /// sampler factorizes the matrix.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a correlation matrix needs at least one row"));
        }
        if data.len() != n * n {
            return Err(Error::usage(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        let at = |i: usize, j: usize| data[i * n + j];
        for i in 0..n {
            for j in 0..n {
                let v = at(i, j);
                if !v.is_finite() {
                    return Err(Error::domain(format!(
                        "matrix entry ({}, {}) is not finite: {v}",
                        i + 1,
                        j + 1
                    )));
                }
                if i == j {
                    if (v - 1.0).abs() > MATRIX_CHECK_TOL {
                        return Err(Error::model(format!(
                            "diagonal entry {} must be 1, got {v}",
                            i + 1
                        )));
                    }
                } else {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::model(format!(
                            "off-diagonal entry ({}, {}) must lie in [0, 1], got {v}",
                            i + 1,
                            j + 1
                        )));
                    }
                    if (v - at(j, i)).abs() > MATRIX_CHECK_TOL {
                        return Err(Error::model(format!(
                            "matrix is not symmetric at ({}, {}): {v} vs {}",
                            i + 1,
                            j + 1,
                            at(j, i)
                        )));
                    }
                }
            }
        }
        Ok(CorrelationMatrix { n, data })
    }

    /// The `n × n` equicorrelated matrix with off-diagonal `rho ∈ [0, 1)`.
    pub fn equicorrelated(n: usize, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if n == 0 {
            return Err(Error::domain("a correlation matrix needs at least one row"));
        }
        let mut data = vec![rho; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Ok(CorrelationMatrix { n, data })
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// The smallest off-diagonal entry; `1.0` for a 1×1 matrix (the minimum
    /// over an empty set of constraints).
    pub fn min_offdiagonal(&self) -> f64 {
        let mut min = 1.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    min = min.min(self.get(i, j));
                }
            }
        }
        min
    }

    /// Lower-triangular Cholesky factor (row-major, dense), trying a plain
    /// factorization first and retrying once with `1e-10` diagonal jitter.
    ///
    /// Errors with `Model` naming the leading minor that failed when the
    /// matrix is not positive semidefinite even with the jitter.
    fn cholesky(&self) -> Result<Vec<f64>> {
        match self.try_cholesky(0.0) {
            Ok(l) => Ok(l),
            Err(_) => self.try_cholesky(CHOLESKY_JITTER).map_err(|order| {
                Error::model(format!(
                    "correlation matrix is not positive semidefinite (factorization failed at \
                     leading minor {order}, even with {CHOLESKY_JITTER:e} diagonal jitter)"
                ))
            }),
        }
    }

    fn try_cholesky(&self, jitter: f64) -> std::result::Result<Vec<f64>, usize> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j) + jitter;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !d.is_finite() || d <= 0.0 {
                return Err(j + 1);
            }
            let root = d.sqrt();
            l[j * n + j] = root;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / root;
            }
        }
        Ok(l)
    }
}

/// Correlation structure of the noise vector.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationModel {
    /// Every pair of coordinates correlates at the same `rho ∈ [0, 1)`.
    Equicorrelated { rho: f64 },
    /// An explicit matrix.
    General(CorrelationMatrix),
}

impl CorrelationModel {
    /// Equicorrelated model, validating `rho ∈ [0, 1)`.
    pub fn equicorrelated(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(CorrelationModel::Equicorrelated { rho })
    }

    /// The smallest pairwise correlation the model guarantees.
    pub fn min_offdiagonal(&self) -> f64 {
        match self {
            CorrelationModel::Equicorrelated { rho } => *rho,
            CorrelationModel::General(m) => m.min_offdiagonal(),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && (0.0..1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "equicorrelation must lie in [0, 1), got {rho}"
        )))
    }
}

/// Mean vector plus correlation structure: everything a sampler needs.
///
/// Hypothesis `i` is a true null when `μᵢ = 0` and a false null when
/// `μᵢ > 0`; negative means are rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisConfig {
    mu: Vec<f64>,
    model: CorrelationModel,
}

impl HypothesisConfig {
    /// Builds a configuration, validating the mean vector (nonempty, finite,
    /// nonnegative entries) and that a general matrix matches its length.
    pub fn new(mu: Vec<f64>, model: CorrelationModel) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::domain("a configuration needs at least one hypothesis"));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::domain(format!(
                    "mean {} must be finite and nonnegative, got {m}",
                    i + 1
                )));
            }
        }
        match &model {
            CorrelationModel::Equicorrelated { rho } => check_rho(*rho)?,
            CorrelationModel::General(matrix) => {
                if matrix.n() != mu.len() {
                    return Err(Error::usage(format!(
                        "mean vector has {} entries but the matrix is {}x{}",
                        mu.len(),
                        matrix.n(),
                        matrix.n()
                    )));
                }
            }
        }
        Ok(HypothesisConfig { mu, model })
    }

    /// All-null configuration: every mean zero.
    pub fn global_null(n: usize, model: CorrelationModel) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a configuration needs at least one hypothesis"));
        }
        HypothesisConfig::new(vec![0.0; n], model)
    }

    /// `n_false` leading coordinates at mean `mu > 0`, the rest at zero.
    pub fn constant_signal(
        n: usize,
        n_false: usize,
        mu: f64,
        model: CorrelationModel,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a configuration needs at least one hypothesis"));
        }
        if n_false > n {
            return Err(Error::usage(format!(
                "cannot place {n_false} false nulls among {n} hypotheses"
            )));
        }
        if n_false > 0 && !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!(
                "false-null mean must be positive and finite, got {mu}"
            )));
        }
        let mut means = vec![0.0; n];
        means[..n_false].fill(mu);
        HypothesisConfig::new(means, model)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    /// Whether hypothesis `i` (0-based) is a true null (`μᵢ = 0`).
    pub fn is_true_null(&self, i: usize) -> bool {
        self.mu[i] == 0.0
    }

    /// Number of false nulls (`μᵢ > 0`).
    pub fn n_false(&self) -> usize {
        self.mu.iter().filter(|&&m| m > 0.0).count()
    }

    /// Whether every hypothesis is a true null.
    pub fn is_global_null(&self) -> bool {
        self.n_false() == 0
    }
}

/// One draw from the model: the observations and their p-values.
#[derive(Debug, Clone)]
pub struct Replicate {
    x: Vec<f64>,
    p: PValueVector,
}

impl Replicate {
    /// Observation vector.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Upper-tail p-values `1 - Φ(xᵢ)`.
    pub fn pvalues(&self) -> &PValueVector {
        &self.p
    }
}

/// A configuration prepared for repeated sampling.
///
/// For a general matrix the Cholesky factorization happens once here, so a
/// draw costs O(n²); the equicorrelated case costs O(n) per draw and needs
/// no setup.
#[derive(Debug, Clone)]
pub struct Sampler {
    mu: Vec<f64>,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Equicorrelated { sqrt_rho: f64, sqrt_resid: f64 },
    General { chol: Vec<f64> },
}

impl Sampler {
    /// Prepares a sampler, factorizing a general matrix (this is where a
    /// non-positive-semidefinite matrix is reported).
    pub fn new(config: &HypothesisConfig) -> Result<Self> {
        let kind = match config.model() {
            CorrelationModel::Equicorrelated { rho } => {
                check_rho(*rho)?;
                SamplerKind::Equicorrelated {
                    sqrt_rho: rho.sqrt(),
                    sqrt_resid: (1.0 - rho).sqrt(),
                }
            }
            CorrelationModel::General(matrix) => SamplerKind::General {
                chol: matrix.cholesky()?,
            },
        };
        Ok(Sampler {
            mu: config.mu().to_vec(),
            kind,
        })
    }

    /// Number of hypotheses per draw.
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Draws one replicate.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Replicate {
        let mut x = vec![0.0; self.mu.len()];
        self.fill(rng, &mut x);
        let p = pvalues_of(&x);
        Replicate { x, p }
    }

    /// Fills `x` with one draw of the observation vector; `x.len()` must be
    /// the configured dimension. This is the allocation-free hot path the
    /// estimators use.
    pub(crate) fn fill<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.mu.len());
        match &self.kind {
            SamplerKind::Equicorrelated { sqrt_rho, sqrt_resid } => {
                // One shared factor plus independent residuals. The factor
                // draw happens even at ρ = 0 so that replicate streams line
                // up across ρ values.
                let theta: f64 = sqrt_rho * rng.sample::<f64, _>(StandardNormal);
                for (xi, &mui) in x.iter_mut().zip(&self.mu) {
                    let z: f64 = rng.sample(StandardNormal);
                    *xi = mui + theta + sqrt_resid * z;
                }
            }
            SamplerKind::General { chol } => {
                let n = x.len();
                for xi in x.iter_mut() {
                    *xi = rng.sample(StandardNormal);
                }
                // In-place lower-triangular transform x ← μ + L·x, walking
                // rows bottom-up: row i only reads x[0..=i], which still
                // hold the untransformed standard normals at that point.
                for i in (0..n).rev() {
                    let mut acc = self.mu[i];
                    for k in 0..=i {
                        acc += chol[i * n + k] * x[k];
                    }
                    x[i] = acc;
                }
            }
        }
    }
}

/// p-values of an observation vector: `pᵢ = 1 - Φ(xᵢ)`, computed as `Φ(-xᵢ)`
/// so the upper tail keeps full relative precision.
pub fn pvalues(x: &[f64]) -> Result<PValueVector> {
    if x.is_empty() {
        return Err(Error::domain("a p-value vector needs at least one entry"));
    }
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::domain(format!(
                "observation {} is not finite: {v}",
                i + 1
            )));
        }
    }
    Ok(pvalues_of(x))
}

fn pvalues_of(x: &[f64]) -> PValueVector {
    PValueVector::from_checked(x.iter().map(|&v| distributions::phi(-v)).collect())
}

/// The ChaCha stream for replicate `replicate` of a run keyed by `seed`.
///
/// Every replicate gets its own counter-selected stream of the same keyed
/// cipher, so streams are mutually independent and replicate `r` is
/// reproducible in isolation — the basis for order- and thread-independent
/// Monte Carlo results.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Draws one replicate of an equicorrelated configuration.
///
/// Errors with `Usage` if the configuration carries a general matrix; build
/// a [`Sampler`] (or call [`sample_general`]) for those.
pub fn sample_equicorrelated<R: Rng + ?Sized>(
    config: &HypothesisConfig,
    rng: &mut R,
) -> Result<Replicate> {
    match config.model() {
        CorrelationModel::Equicorrelated { .. } => Ok(Sampler::new(config)?.draw(rng)),
        CorrelationModel::General(_) => Err(Error::usage(
            "sample_equicorrelated needs an equicorrelated configuration",
        )),
    }
}

/// Draws one replicate of a general-matrix configuration.
///
/// Factorizes the matrix on every call; prepare a [`Sampler`] once when
/// drawing repeatedly.
pub fn sample_general<R: Rng + ?Sized>(
    config: &HypothesisConfig,
    rng: &mut R,
) -> Result<Replicate> {
    match config.model() {
        CorrelationModel::General(_) => Ok(Sampler::new(config)?.draw(rng)),
        CorrelationModel::Equicorrelated { .. } => Err(Error::usage(
            "sample_general needs an explicit-matrix configuration",
        )),
    }
}
