//! Large-`n` limiting error rates of the stepwise procedures under the
//! equicorrelated model.
//!
//! The centerpiece is the limiting false-discovery rate of the
//! Benjamini–Hochberg rule under the global null, `1 - Φ(inf_t s(t))` with
//!
//! ```text
//! s(t) = [Φ⁻¹(1-tα) - √(1-ρ)·Φ⁻¹(1-t)] / √ρ,   t ∈ (0, 1),
//! ```
//!
//! which [`limiting_bh_fdr`] evaluates by a dense logit-spaced scan followed
//! by golden-section refinement. The same value bounds the limiting FDR of
//! every step-up procedure whose cutoffs satisfy `uᵢ ≤ iα/n`
//! ([`stepup_class_bound`]), and [`reference_limit`] tabulates the known
//! limiting constants of the named procedures.

use crate::distributions::{phi, phi_inv};
use crate::error::{Error, Result};
use crate::estimators::Metric;
use crate::procedures::Procedure;

/// Result of a limiting-value computation.
///
/// `minimizer_t` and `objective_at_minimizer` are present when the value came
/// from the numerical minimization of `s`; they are `None` for the analytic
/// boundary cases `ρ ∈ {0, 1}`. When present, `value = Φ(-objective)` holds
/// exactly and `minimizer_t` locates the infimum to within
/// `refinement_tolerance` (the minimizer carries no sharper contract: the
/// objective can be extremely flat).
#[derive(Debug, Clone, PartialEq)]
pub struct LimitResult {
    /// The limiting error-rate value, in `[0, 1]`.
    pub value: f64,
    /// Location of the objective's infimum, if minimization ran.
    pub minimizer_t: Option<f64>,
    /// `s(minimizer_t)`, if minimization ran.
    pub objective_at_minimizer: Option<f64>,
    /// Number of scan points requested.
    pub grid_points: usize,
    /// Golden-section bracket-width tolerance in `t`.
    pub refinement_tolerance: f64,
}

/// Default number of logit-spaced scan points.
pub const DEFAULT_GRID_POINTS: usize = 10_000;
/// Default golden-section tolerance in `t`.
pub const DEFAULT_REFINEMENT_TOLERANCE: f64 = 1e-10;

/// Correlations within this distance of 0 or 1 snap to the analytic boundary
/// value (`√ρ → 0` makes the objective numerically unstable).
const RHO_SNAP: f64 = 1e-12;

/// Outermost scan points sit at `t = 1e-10` and `t = 1 - 1e-10`.
const MESH_EDGE: f64 = 1e-10;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && 0.0 < alpha && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must lie strictly inside (0, 1), got {alpha}"
        )))
    }
}

/// Validates `rho ∈ [0, 1]` and snaps values within `1e-12` of a boundary
/// onto it.
fn snap_rho(rho: f64) -> Result<f64> {
    if !rho.is_finite() {
        return Err(Error::domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    if rho.abs() <= RHO_SNAP {
        return Ok(0.0);
    }
    if (rho - 1.0).abs() <= RHO_SNAP {
        return Ok(1.0);
    }
    if (0.0..=1.0).contains(&rho) {
        Ok(rho)
    } else {
        Err(Error::domain(format!("rho must lie in [0, 1], got {rho}")))
    }
}

/// The objective `s(t) = [Φ⁻¹(1-tα) - √(1-ρ)·Φ⁻¹(1-t)] / √ρ`.
///
/// Evaluated in the reflected form `[√(1-ρ)·Φ⁻¹(t) - Φ⁻¹(tα)] / √ρ` so both
/// quantiles stay away from 1, where `1 - tα` would round and lose the tail.
/// Finite for every `t ∈ (0, 1)`; diverges at the boundary, so `t ∈ {0, 1}`
/// (and outside) is a domain error, as are `alpha` and `rho` outside `(0, 1)`.
pub fn s_objective(t: f64, alpha: f64, rho: f64) -> Result<f64> {
    if !(t.is_finite() && 0.0 < t && t < 1.0) {
        return Err(Error::domain(format!(
            "t must lie strictly inside (0, 1), got {t}"
        )));
    }
    check_alpha(alpha)?;
    if !(rho.is_finite() && 0.0 < rho && rho < 1.0) {
        return Err(Error::domain(format!(
            "rho must lie strictly inside (0, 1) for the objective, got {rho}"
        )));
    }
    Ok(s_raw(t, alpha, (1.0 - rho).sqrt(), rho.sqrt()))
}

fn s_raw(t: f64, alpha: f64, sqrt_resid: f64, sqrt_rho: f64) -> f64 {
    // t·α can underflow to zero for subnormal t; clamp to the smallest
    // positive f64 so the quantile stays finite (s is finite on (0,1)).
    let ta = (t * alpha).max(f64::from_bits(1));
    (sqrt_resid * phi_inv(t) - phi_inv(ta)) / sqrt_rho
}

/// Limiting Benjamini–Hochberg false discovery rate under the global null.
///
/// `ρ ∈ {0, 1}` (after snapping) returns `alpha` exactly with no
/// minimization; interior `ρ` scans `s` on a symmetric logit-spaced mesh of
/// [`DEFAULT_GRID_POINTS`] points and refines the best bracket by
/// golden-section search to [`DEFAULT_REFINEMENT_TOLERANCE`] in `t`.
pub fn limiting_bh_fdr(alpha: f64, rho: f64) -> Result<LimitResult> {
    limiting_bh_fdr_with(alpha, rho, DEFAULT_GRID_POINTS, DEFAULT_REFINEMENT_TOLERANCE)
}

/// [`limiting_bh_fdr`] with explicit scan resolution and refinement
/// tolerance.
pub fn limiting_bh_fdr_with(
    alpha: f64,
    rho: f64,
    grid_points: usize,
    refinement_tolerance: f64,
) -> Result<LimitResult> {
    check_alpha(alpha)?;
    let rho = snap_rho(rho)?;
    if grid_points < 4 {
        return Err(Error::usage(format!(
            "the scan needs at least 4 grid points, got {grid_points}"
        )));
    }
    if !(refinement_tolerance.is_finite() && refinement_tolerance > 0.0) {
        return Err(Error::domain(format!(
            "refinement tolerance must be positive, got {refinement_tolerance}"
        )));
    }
    if rho == 0.0 || rho == 1.0 {
        return Ok(LimitResult {
            value: alpha,
            minimizer_t: None,
            objective_at_minimizer: None,
            grid_points,
            refinement_tolerance,
        });
    }

    let sqrt_resid = (1.0 - rho).sqrt();
    let sqrt_rho = rho.sqrt();
    let f = |t: f64| s_raw(t, alpha, sqrt_resid, sqrt_rho);

    // Dense scan on a logit mesh: equal spacing in ln(t/(1-t)) concentrates
    // points near both boundaries, where s diverges, without assuming where
    // the basin sits.
    let span = ((1.0 - MESH_EDGE) / MESH_EDGE).ln();
    let m = grid_points;
    let t_at = |k: usize| {
        let x = span * (2.0 * k as f64 / (m - 1) as f64 - 1.0);
        1.0 / (1.0 + (-x).exp())
    };
    let mut best_k = 0;
    let mut best = f64::INFINITY;
    for k in 0..m {
        let v = f(t_at(k));
        if v < best {
            best = v;
            best_k = k;
        }
    }

    // Refine inside the bracket around the best scan point. Unimodality is
    // not assumed globally — the scan picks the basin, the search only
    // narrows it.
    let lo = t_at(best_k.saturating_sub(1));
    let hi = t_at((best_k + 1).min(m - 1));
    let (mut t_min, mut s_min) = golden_section_min(&f, lo, hi, refinement_tolerance);
    if best < s_min {
        // Defensive: never report a refined point worse than the scan.
        t_min = t_at(best_k);
        s_min = best;
    }

    Ok(LimitResult {
        value: phi(-s_min),
        minimizer_t: Some(t_min),
        objective_at_minimizer: Some(s_min),
        grid_points,
        refinement_tolerance,
    })
}

/// Golden-section minimization of `f` on `[lo, hi]` down to bracket width
/// `tol`; returns the midpoint of the final bracket and its value.
fn golden_section_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < 200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Limiting FDR ceiling for any step-up procedure whose cutoffs satisfy
/// `uᵢ ≤ iα/n`: the same value as [`limiting_bh_fdr`], exposed separately so
/// sweep reports can annotate step-up rows with their theoretical bound.
pub fn stepup_class_bound(alpha: f64, rho: f64) -> Result<f64> {
    Ok(limiting_bh_fdr(alpha, rho)?.value)
}

/// A known limiting value: either a point or an interval that is guaranteed
/// to contain the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitBand {
    Point(f64),
    Interval(f64, f64),
}

/// The known limiting FWER-scale value of `procedure` under the
/// equicorrelated global null at correlation `rho`, where theory pins one
/// down; `None` where it does not.
///
/// * `ρ = 0`: Bonferroni and Hommel → `1 - e^{-α}`; Hochberg → the interval
///   `[1 - e^{-α}, α]`; Benjamini–Hochberg → `α`.
/// * `ρ ∈ (0, 1)`: every step-down procedure → `0`; Hochberg → `0` but only
///   for `α < 1/2` (the zero limit is proved on that domain); Hommel → `0`;
///   Benjamini–Hochberg → the [`limiting_bh_fdr`] value.
/// * `ρ = 1`: step-down procedures → `0`; Benjamini–Hochberg → `α`;
///   Hochberg and Hommel → `None` (at perfect correlation all p-values
///   coincide and both reject at level `α`, so their positive-`ρ` zero
///   limits genuinely stop at `ρ < 1`).
pub fn reference_limit(procedure: Procedure, alpha: f64, rho: f64) -> Result<Option<LimitBand>> {
    check_alpha(alpha)?;
    let rho = snap_rho(rho)?;
    let point = |v: f64| Some(LimitBand::Point(v));
    let one_minus_exp = -(-alpha).exp_m1();
    Ok(if rho == 0.0 {
        match procedure {
            Procedure::Bonferroni | Procedure::Hommel => point(one_minus_exp),
            Procedure::Hochberg => Some(LimitBand::Interval(one_minus_exp, alpha)),
            Procedure::BenjaminiHochberg => point(alpha),
            _ => None,
        }
    } else if rho == 1.0 {
        match procedure {
            Procedure::Bonferroni
            | Procedure::Sidak
            | Procedure::Holm
            | Procedure::BenjaminiLiu1
            | Procedure::BenjaminiLiu2
            | Procedure::BenjaminiLiu3 => point(0.0),
            Procedure::BenjaminiHochberg => point(alpha),
            Procedure::Hochberg | Procedure::Hommel => None,
        }
    } else {
        match procedure {
            Procedure::Bonferroni
            | Procedure::Sidak
            | Procedure::Holm
            | Procedure::BenjaminiLiu1
            | Procedure::BenjaminiLiu2
            | Procedure::BenjaminiLiu3
            | Procedure::Hommel => point(0.0),
            Procedure::Hochberg => {
                if alpha < 0.5 {
                    point(0.0)
                } else {
                    None
                }
            }
            Procedure::BenjaminiHochberg => point(limiting_bh_fdr(alpha, rho)?.value),
        }
    })
}

/// [`reference_limit`] extended to a sweep cell: takes the metric and the
/// fraction of true nulls into account so nonzero limits are only attached
/// where they actually apply.
///
/// * Global null (`null_fraction = 1`): FWER, FDR, and `P(R ≥ 1)` coincide
///   per replicate, so all three inherit [`reference_limit`]; `AnyPwr` has no
///   false nulls to detect and gets no annotation.
/// * Mixed configurations: the zero FWER limits hold for any configuration
///   and carry over to FDR (which never exceeds FWER); `P(R ≥ 1)` keeps the
///   zero limit for the single-step/step-down rules, where it equals
///   `P(P(1) ≤ u₁)` — exactly the quantity the theory sends to zero; the
///   Benjamini–Hochberg FDR at `ρ = 0` is `null_fraction·α` (an exact
///   finite-`n` identity, not just a limit); `AnyPwr` goes to zero at
///   positive `ρ` for all the FWER-controlling procedures, on the same
///   domains as their zero FWER limits.
pub fn reference_limit_for_cell(
    procedure: Procedure,
    metric: Metric,
    alpha: f64,
    rho: f64,
    null_fraction: f64,
) -> Result<Option<LimitBand>> {
    check_alpha(alpha)?;
    let rho = snap_rho(rho)?;
    if !(0.0..=1.0).contains(&null_fraction) {
        return Err(Error::domain(format!(
            "the true-null fraction must lie in [0, 1], got {null_fraction}"
        )));
    }
    let zero = Some(LimitBand::Point(0.0));
    let is_step_down = matches!(
        procedure,
        Procedure::Bonferroni
            | Procedure::Sidak
            | Procedure::Holm
            | Procedure::BenjaminiLiu1
            | Procedure::BenjaminiLiu2
            | Procedure::BenjaminiLiu3
    );
    let hochberg_zero_domain = procedure == Procedure::Hochberg && alpha < 0.5 && rho < 1.0;
    let hommel_zero_domain = procedure == Procedure::Hommel && rho < 1.0;

    Ok(match metric {
        Metric::AnyPwr => {
            if null_fraction >= 1.0 || rho == 0.0 {
                None
            } else if is_step_down || hochberg_zero_domain || hommel_zero_domain {
                zero
            } else {
                None
            }
        }
        Metric::Fwer | Metric::Fdr | Metric::RejectAny => {
            if null_fraction >= 1.0 {
                reference_limit(procedure, alpha, rho)?
            } else if metric == Metric::Fdr
                && procedure == Procedure::BenjaminiHochberg
                && rho == 0.0
            {
                Some(LimitBand::Point(null_fraction * alpha))
            } else if rho == 0.0 {
                None
            } else {
                match metric {
                    Metric::Fwer | Metric::Fdr
                        if is_step_down || hochberg_zero_domain || hommel_zero_domain =>
                    {
                        zero
                    }
                    Metric::RejectAny if is_step_down => zero,
                    _ => None,
                }
            }
        }
    })
}

/// Reference limits for a general correlation matrix with smallest
/// off-diagonal entry `delta`.
///
/// Only the single-step/step-down zero limits are known there, and only for
/// `delta > 0`: FWER (hence FDR) for any configuration, and `P(R ≥ 1)`.
/// Step-up rules and Hommel under a general matrix have no established
/// limit, and neither does power; those return `None`.
pub fn reference_limit_general(
    procedure: Procedure,
    metric: Metric,
    alpha: f64,
    delta: f64,
) -> Result<Option<LimitBand>> {
    check_alpha(alpha)?;
    if !delta.is_finite() || !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain(format!(
            "the smallest off-diagonal correlation must lie in [0, 1], got {delta}"
        )));
    }
    let is_step_down = matches!(
        procedure,
        Procedure::Bonferroni
            | Procedure::Sidak
            | Procedure::Holm
            | Procedure::BenjaminiLiu1
            | Procedure::BenjaminiLiu2
            | Procedure::BenjaminiLiu3
    );
    Ok(
        if delta > 0.0
            && is_step_down
            && matches!(metric, Metric::Fwer | Metric::Fdr | Metric::RejectAny)
        {
            Some(LimitBand::Point(0.0))
        } else {
            None
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_matches_reference_values() {
        // 60-digit reference evaluations of s(t; α, ρ).
        let cases = [
            ((0.5, 0.05, 0.5), 2.771_807_648_699_355_9),
            ((0.3, 0.05, 0.5), 2.544_570_730_847_395_5),
            ((0.2, 0.1, 0.2), 2.909_079_705_743_068_4),
        ];
        for ((t, alpha, rho), want) in cases {
            let got = s_objective(t, alpha, rho).unwrap();
            assert!((got - want).abs() < 1e-12, "s({t}, {alpha}, {rho}) = {got}");
        }
    }

    #[test]
    fn objective_is_finite_across_the_open_square() {
        for i in 1..40 {
            let t = i as f64 / 40.0;
            for j in 1..20 {
                let alpha = j as f64 / 20.0;
                let s = s_objective(t, alpha, 0.3).unwrap();
                assert!(s.is_finite(), "s({t}, {alpha}, 0.3) = {s}");
            }
        }
        // Extreme but in-domain t stays finite.
        assert!(s_objective(1e-300, 0.05, 0.5).unwrap().is_finite());
        assert!(s_objective(1.0 - 1e-16, 0.05, 0.5).unwrap().is_finite());
    }

    #[test]
    fn objective_rejects_boundary_and_out_of_domain_arguments() {
        for t in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(s_objective(t, 0.05, 0.5), Err(Error::Domain(_))), "t = {t}");
        }
        for alpha in [0.0, 1.0, -1.0] {
            assert!(matches!(s_objective(0.5, alpha, 0.5), Err(Error::Domain(_))));
        }
        for rho in [0.0, 1.0, -0.2, 2.0] {
            assert!(matches!(s_objective(0.5, 0.05, rho), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn objective_decreases_in_rho_through_the_residual_coefficient() {
        // For fixed t < 1/2, Φ⁻¹(t) < 0, so a larger ρ (smaller √(1-ρ))
        // raises the first term; the comparison direction below pins the
        // coefficient algebra.
        let s_low = s_objective(0.2, 0.05, 0.3).unwrap();
        let s_high = s_objective(0.2, 0.05, 0.9).unwrap();
        assert!(s_low > s_high);
    }

    #[test]
    fn limit_matches_high_precision_references() {
        // Independently computed by 60-digit minimization of s.
        let cases = [
            ((0.05, 0.25), 8.405_096_936_134_515e-3),
            ((0.05, 0.5), 1.028_770_923_632_396e-2),
            ((0.05, 0.75), 1.395_642_457_347_891_8e-2),
            ((0.1, 0.5), 2.287_321_537_390_017_9e-2),
            ((0.2, 0.9), 9.450_246_873_394_909_6e-2),
        ];
        for ((alpha, rho), want) in cases {
            let got = limiting_bh_fdr(alpha, rho).unwrap();
            assert!(
                (got.value - want).abs() < 1e-7,
                "limit({alpha}, {rho}) = {} want {want}",
                got.value
            );
            assert!(got.minimizer_t.is_some());
        }
    }

    #[test]
    fn limit_reports_a_coherent_minimizer() {
        let r = limiting_bh_fdr(0.05, 0.5).unwrap();
        let t_star = r.minimizer_t.expect("interior rho minimizes");
        let s_star = r.objective_at_minimizer.expect("interior rho minimizes");
        assert!(0.0 < t_star && t_star < 1.0);
        // The reported value is exactly Φ(-objective) at the reported point.
        assert_eq!(r.value, phi(-s_star));
        // And the objective really is s(minimizer): re-evaluate.
        let direct = s_objective(t_star, 0.05, 0.5).unwrap();
        assert!((direct - s_star).abs() < 1e-9);
        // Minimizer locations from the independent high-precision run.
        assert!((t_star - 0.025_13).abs() < 5e-4, "t* = {t_star}");
        let r25 = limiting_bh_fdr(0.05, 0.25).unwrap();
        let t25 = r25.minimizer_t.unwrap();
        assert!((t25 - 4.44e-5).abs() < 5e-6, "t* = {t25}");
    }

    #[test]
    fn limit_boundaries_are_exact() {
        for alpha in [0.01, 0.05, 0.3] {
            let r0 = limiting_bh_fdr(alpha, 0.0).unwrap();
            assert_eq!(r0.value, alpha);
            assert!(r0.minimizer_t.is_none());
            let r1 = limiting_bh_fdr(alpha, 1.0).unwrap();
            assert_eq!(r1.value, alpha);
            assert!(r1.minimizer_t.is_none());
            // Snapping: within 1e-12 of a boundary is the boundary.
            assert_eq!(limiting_bh_fdr(alpha, 1e-13).unwrap().value, alpha);
            assert_eq!(limiting_bh_fdr(alpha, -1e-13).unwrap().value, alpha);
            assert_eq!(limiting_bh_fdr(alpha, 1.0 - 1e-13).unwrap().value, alpha);
            assert_eq!(limiting_bh_fdr(alpha, 1.0 + 1e-13).unwrap().value, alpha);
        }
    }

    #[test]
    fn limit_rejects_out_of_domain_arguments() {
        for alpha in [0.0, 1.0, -0.1, 1.1, f64::NAN] {
            assert!(matches!(limiting_bh_fdr(alpha, 0.5), Err(Error::Domain(_))));
        }
        for rho in [-0.01, 1.01, f64::NAN] {
            assert!(matches!(limiting_bh_fdr(0.05, rho), Err(Error::Domain(_))));
        }
        assert!(matches!(
            limiting_bh_fdr_with(0.05, 0.5, 2, 1e-10),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            limiting_bh_fdr_with(0.05, 0.5, 100, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn limit_is_positive_and_dominates_point_evaluations() {
        for alpha in [0.01, 0.05, 0.1, 0.2] {
            for rho in [0.05, 0.25, 0.5, 0.75, 0.95] {
                let r = limiting_bh_fdr(alpha, rho).unwrap();
                assert!(r.value > 0.0, "limit({alpha}, {rho}) not positive");
                // Minimizing s maximizes Φ(-s): the reported value must sit
                // at or above Φ(-s(t)) for any particular t.
                for t in [1e-6, 1e-3, 0.1, 0.5, 0.9] {
                    let at_t = phi(-s_objective(t, alpha, rho).unwrap());
                    assert!(
                        r.value >= at_t - 1e-15,
                        "limit({alpha}, {rho}) = {} below point value {at_t} at t = {t}",
                        r.value
                    );
                }
            }
        }
    }

    #[test]
    fn halving_the_tolerance_barely_moves_the_value() {
        for alpha in [0.01, 0.05, 0.1, 0.2] {
            for rho in [0.05, 0.25, 0.5, 0.75, 0.95] {
                let a = limiting_bh_fdr_with(alpha, rho, DEFAULT_GRID_POINTS, 1e-10)
                    .unwrap()
                    .value;
                let b = limiting_bh_fdr_with(alpha, rho, DEFAULT_GRID_POINTS, 5e-11)
                    .unwrap()
                    .value;
                assert!(
                    (a - b).abs() < 1e-8,
                    "tolerance sensitivity at ({alpha}, {rho}): {:e}",
                    a - b
                );
            }
        }
    }

    #[test]
    fn brute_force_uniform_scan_agrees() {
        // Two-resolution cross-check: a flat 10⁶-point uniform scan of the
        // objective must land within 1e-6 of the mesh+refinement result,
        // including at ρ = 0.25 where the basin sits near t = 4e-5.
        for rho in [0.25_f64, 0.5] {
            let refined = limiting_bh_fdr(0.05, rho).unwrap().value;
            let sqrt_resid = (1.0 - rho).sqrt();
            let sqrt_rho = rho.sqrt();
            let m = 1_000_000;
            let mut best = f64::INFINITY;
            for k in 1..=m {
                let t = k as f64 / (m + 1) as f64;
                best = best.min(s_raw(t, 0.05, sqrt_resid, sqrt_rho));
            }
            let brute = phi(-best);
            assert!(
                (brute - refined).abs() < 1e-6,
                "rho = {rho}: brute {brute} vs refined {refined}"
            );
        }
    }

    #[test]
    fn class_bound_equals_the_bh_limit() {
        for (alpha, rho) in [(0.05, 0.3), (0.1, 0.7), (0.05, 0.0), (0.2, 1.0)] {
            assert_eq!(
                stepup_class_bound(alpha, rho).unwrap(),
                limiting_bh_fdr(alpha, rho).unwrap().value
            );
        }
    }

    #[test]
    fn reference_limits_at_independence() {
        let one_minus_exp = 4.877_057_549_928_599_4e-2;
        match reference_limit(Procedure::Bonferroni, 0.05, 0.0).unwrap() {
            Some(LimitBand::Point(v)) => assert!((v - one_minus_exp).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        match reference_limit(Procedure::Hommel, 0.05, 0.0).unwrap() {
            Some(LimitBand::Point(v)) => assert!((v - one_minus_exp).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        match reference_limit(Procedure::Hochberg, 0.05, 0.0).unwrap() {
            Some(LimitBand::Interval(lo, hi)) => {
                assert!((lo - one_minus_exp).abs() < 1e-15);
                assert_eq!(hi, 0.05);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            reference_limit(Procedure::BenjaminiHochberg, 0.05, 0.0).unwrap(),
            Some(LimitBand::Point(0.05))
        );
        // The table names no independence limit for the remaining rules.
        assert_eq!(reference_limit(Procedure::Holm, 0.05, 0.0).unwrap(), None);
        assert_eq!(reference_limit(Procedure::Sidak, 0.05, 0.0).unwrap(), None);
    }

    #[test]
    fn reference_limits_at_positive_correlation() {
        for proc in [
            Procedure::Bonferroni,
            Procedure::Sidak,
            Procedure::Holm,
            Procedure::BenjaminiLiu1,
            Procedure::BenjaminiLiu2,
            Procedure::BenjaminiLiu3,
            Procedure::Hommel,
        ] {
            assert_eq!(
                reference_limit(proc, 0.05, 0.5).unwrap(),
                Some(LimitBand::Point(0.0)),
                "{proc}"
            );
        }
        assert_eq!(
            reference_limit(Procedure::Hochberg, 0.05, 0.5).unwrap(),
            Some(LimitBand::Point(0.0))
        );
        // The Hochberg zero limit is only established for α < 1/2.
        assert_eq!(reference_limit(Procedure::Hochberg, 0.6, 0.5).unwrap(), None);
        let bh = reference_limit(Procedure::BenjaminiHochberg, 0.05, 0.5).unwrap();
        assert_eq!(
            bh,
            Some(LimitBand::Point(limiting_bh_fdr(0.05, 0.5).unwrap().value))
        );
    }

    #[test]
    fn reference_limits_at_perfect_correlation() {
        assert_eq!(
            reference_limit(Procedure::Holm, 0.05, 1.0).unwrap(),
            Some(LimitBand::Point(0.0))
        );
        assert_eq!(
            reference_limit(Procedure::BenjaminiHochberg, 0.05, 1.0).unwrap(),
            Some(LimitBand::Point(0.05))
        );
        // All p-values coincide at ρ = 1: Hochberg and Hommel reject at
        // level α there, so their zero limits do not extend.
        assert_eq!(reference_limit(Procedure::Hochberg, 0.05, 1.0).unwrap(), None);
        assert_eq!(reference_limit(Procedure::Hommel, 0.05, 1.0).unwrap(), None);
    }

    #[test]
    fn cell_annotations_respect_metric_and_configuration() {
        use Metric::*;
        // Global null: FWER/FDR/RejectAny all inherit the table.
        for metric in [Fwer, Fdr, RejectAny] {
            assert_eq!(
                reference_limit_for_cell(Procedure::Bonferroni, metric, 0.05, 0.0, 1.0).unwrap(),
                reference_limit(Procedure::Bonferroni, 0.05, 0.0).unwrap()
            );
        }
        // AnyPwr never gets an annotation under the global null.
        assert_eq!(
            reference_limit_for_cell(Procedure::Holm, AnyPwr, 0.05, 0.5, 1.0).unwrap(),
            None
        );
        // Mixed configuration: zero limits survive, constants do not.
        assert_eq!(
            reference_limit_for_cell(Procedure::Holm, Fwer, 0.05, 0.5, 0.9).unwrap(),
            Some(LimitBand::Point(0.0))
        );
        assert_eq!(
            reference_limit_for_cell(Procedure::Bonferroni, Fwer, 0.05, 0.0, 0.9).unwrap(),
            None
        );
        // BH FDR at independence: the exact identity (n₀/n)·α.
        match reference_limit_for_cell(Procedure::BenjaminiHochberg, Fdr, 0.05, 0.0, 0.5).unwrap()
        {
            Some(LimitBand::Point(v)) => assert!((v - 0.025).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        // Power decay at positive correlation for the FWER controllers.
        assert_eq!(
            reference_limit_for_cell(Procedure::Hommel, AnyPwr, 0.05, 0.5, 0.9).unwrap(),
            Some(LimitBand::Point(0.0))
        );
        assert_eq!(
            reference_limit_for_cell(Procedure::BenjaminiHochberg, AnyPwr, 0.05, 0.5, 0.9)
                .unwrap(),
            None
        );
        // RejectAny on a mixed configuration: only the step-down rules.
        assert_eq!(
            reference_limit_for_cell(Procedure::Holm, RejectAny, 0.05, 0.5, 0.9).unwrap(),
            Some(LimitBand::Point(0.0))
        );
        assert_eq!(
            reference_limit_for_cell(Procedure::Hommel, RejectAny, 0.05, 0.5, 0.9).unwrap(),
            None
        );
    }

    #[test]
    fn general_matrix_annotations_only_cover_step_down_rules() {
        assert_eq!(
            reference_limit_general(Procedure::Holm, Metric::Fwer, 0.05, 0.3).unwrap(),
            Some(LimitBand::Point(0.0))
        );
        assert_eq!(
            reference_limit_general(Procedure::Holm, Metric::Fwer, 0.05, 0.0).unwrap(),
            None
        );
        assert_eq!(
            reference_limit_general(Procedure::Hochberg, Metric::Fwer, 0.05, 0.3).unwrap(),
            None
        );
        assert_eq!(
            reference_limit_general(Procedure::Holm, Metric::AnyPwr, 0.05, 0.3).unwrap(),
            None
        );
    }
}
