//! Critical-value families and stepwise decision rules.
//!
//! A stepwise procedure compares the ordered p-values `P(1) ≤ … ≤ P(n)`
//! against a nondecreasing cutoff vector `u₁ ≤ … ≤ uₙ`:
//!
//! * [`step_down`] rejects the `m` smallest p-values, where `m` is the length
//!   of the initial run of indices with `P(i) ≤ uᵢ`;
//! * [`step_up`] rejects the `m` smallest, where `m` is the *largest* index
//!   with `P(m) ≤ uₘ`;
//! * [`hommel`] applies Hommel's closed-testing shortcut at level `α`.
//!
//! All three resolve ties identically: rejection is by thresholding, so equal
//! p-values always share the same fate. Every rule reduces, per realization,
//! to "reject exactly the p-values `≤ t`" for a rule-specific threshold `t`,
//! and that shared reduction is what both the public deciders and the Monte
//! Carlo estimators use, so their decisions can never drift apart.

use crate::error::{Error, Result};

/// The built-in cutoff families.
///
/// `level` below is the nominal level `α` (or `q` for the false-discovery
/// families); `n` is the number of hypotheses and `i` runs from 1 to `n`.
///
/// * `Bonferroni`: constant `α/n`.
/// * `Sidak`: constant `1 - (1-α)^{1/n}`.
/// * `HolmHochberg`: `α/(n-i+1)` — used step-down by Holm's procedure and
///   step-up by Hochberg's.
/// * `BenjaminiHochberg`: `iα/n`.
/// * `BenjaminiLiu1`: `min(1, n·q/(n-i+1)²)`.
/// * `BenjaminiLiu2`: `1 - (1 - min(1, n·q/(n-i+1)))^{1/(n-i+1)}`.
/// * `BenjaminiLiu3`: `1 - (1-q)^{1/(n-i+1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Bonferroni,
    Sidak,
    HolmHochberg,
    BenjaminiHochberg,
    BenjaminiLiu1,
    BenjaminiLiu2,
    BenjaminiLiu3,
    /// Cutoffs supplied directly by the caller.
    Custom,
}

impl Family {
    /// Canonical lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            Family::Bonferroni => "bonferroni",
            Family::Sidak => "sidak",
            Family::HolmHochberg => "holm-hochberg",
            Family::BenjaminiHochberg => "benjamini-hochberg",
            Family::BenjaminiLiu1 => "benjamini-liu-1",
            Family::BenjaminiLiu2 => "benjamini-liu-2",
            Family::BenjaminiLiu3 => "benjamini-liu-3",
            Family::Custom => "custom",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated cutoff vector: every entry in `[0, 1]`, nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValues {
    values: Vec<f64>,
    family: Family,
    level: Option<f64>,
}

impl CriticalValues {
    /// Builds the cutoff vector of `family` for `n` hypotheses at `level`.
    ///
    /// Errors: `Usage` for `n = 0` or `family == Custom` (use
    /// [`CriticalValues::custom`]), `Domain` for a level outside `(0, 1)`.
    pub fn from_family(family: Family, n: usize, level: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("critical values require at least one hypothesis"));
        }
        check_level(level)?;
        let nf = n as f64;
        let values: Vec<f64> = match family {
            Family::Custom => {
                return Err(Error::usage(
                    "custom cutoffs carry no formula; build them with CriticalValues::custom",
                ))
            }
            Family::Bonferroni => vec![level / nf; n],
            // 1-(1-a)^(1/n) through ln_1p/exp_m1 so tiny levels keep full
            // precision instead of rounding through 1-a.
            Family::Sidak => vec![-((-level).ln_1p() / nf).exp_m1(); n],
            Family::HolmHochberg => (1..=n).map(|i| level / (n - i + 1) as f64).collect(),
            Family::BenjaminiHochberg => (1..=n).map(|i| i as f64 * level / nf).collect(),
            Family::BenjaminiLiu1 => (1..=n)
                .map(|i| {
                    let m = (n - i + 1) as f64;
                    (nf * level / (m * m)).min(1.0)
                })
                .collect(),
            Family::BenjaminiLiu2 => (1..=n)
                .map(|i| {
                    let m = (n - i + 1) as f64;
                    let inner = (nf * level / m).min(1.0);
                    -((-inner).ln_1p() / m).exp_m1()
                })
                .collect(),
            Family::BenjaminiLiu3 => (1..=n)
                .map(|i| {
                    let m = (n - i + 1) as f64;
                    -((-level).ln_1p() / m).exp_m1()
                })
                .collect(),
        };
        let cv = CriticalValues {
            values,
            family,
            level: Some(level),
        };
        cv.check_shape()?;
        Ok(cv)
    }

    /// Wraps caller-supplied cutoffs, validating range and monotonicity.
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("critical values require at least one hypothesis"));
        }
        let cv = CriticalValues {
            values,
            family: Family::Custom,
            level: None,
        };
        cv.check_shape()?;
        Ok(cv)
    }

    fn check_shape(&self) -> Result<()> {
        let mut prev = 0.0;
        for (k, &v) in self.values.iter().enumerate() {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::domain(format!(
                    "cutoff {} must lie in [0, 1], got {v}",
                    k + 1
                )));
            }
            if v < prev {
                return Err(Error::domain(format!(
                    "cutoffs must be nondecreasing; entry {} is {v} after {prev}",
                    k + 1
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// The cutoffs `u₁ ≤ … ≤ uₙ`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of hypotheses the cutoffs are sized for.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Which family generated the cutoffs.
    pub fn family(&self) -> Family {
        self.family
    }

    /// The nominal level the cutoffs were built at, if any.
    pub fn level(&self) -> Option<f64> {
        self.level
    }
}

/// A vector of p-values, validated to `[0, 1]` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector(Vec<f64>);

impl PValueVector {
    /// Wraps `values`, checking each lies in `[0, 1]` (NaN is rejected).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("a p-value vector needs at least one entry"));
        }
        for (k, &p) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!(
                    "p-value {} must lie in [0, 1], got {p}",
                    k + 1
                )));
            }
        }
        Ok(PValueVector(values))
    }

    /// Internal constructor for values already guaranteed in range.
    pub(crate) fn from_checked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|p| (0.0..=1.0).contains(p)));
        PValueVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The entries sorted ascending.
    pub(crate) fn sorted(&self) -> Vec<f64> {
        let mut s = self.0.clone();
        s.sort_unstable_by(f64::total_cmp);
        s
    }
}

/// Per-hypothesis accept/reject flags produced by a procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectionSet {
    rejected: Vec<bool>,
    count: usize,
}

impl RejectionSet {
    pub(crate) fn from_flags(rejected: Vec<bool>) -> Self {
        let count = rejected.iter().filter(|&&r| r).count();
        RejectionSet { rejected, count }
    }

    /// Flag for each hypothesis, in input order.
    pub fn flags(&self) -> &[bool] {
        &self.rejected
    }

    /// Number of hypotheses considered.
    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    /// Number of rejections.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Whether hypothesis `i` (0-based) was rejected.
    pub fn is_rejected(&self, i: usize) -> bool {
        self.rejected[i]
    }

    /// 0-based indices of the rejected hypotheses, ascending.
    pub fn rejected_indices(&self) -> Vec<usize> {
        self.rejected
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
            .collect()
    }

    /// Whether every rejection here is also a rejection in `other`.
    pub fn is_subset_of(&self, other: &RejectionSet) -> bool {
        self.rejected.len() == other.rejected.len()
            && self
                .rejected
                .iter()
                .zip(&other.rejected)
                .all(|(&a, &b)| !a || b)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level.is_finite() && 0.0 < level && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "level must lie strictly inside (0, 1), got {level}"
        )))
    }
}

fn check_same_length(p: &PValueVector, u: &CriticalValues) -> Result<()> {
    if p.len() == u.len() {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "p-value vector has {} entries but there are {} cutoffs",
            p.len(),
            u.len()
        )))
    }
}

/// Rejection threshold for the step-down rule on ascending-sorted p-values:
/// the largest initial run with `sorted[i] ≤ u[i]` determines `P(m)`, and the
/// rule rejects exactly the p-values `≤ P(m)`. `NEG_INFINITY` = reject none.
fn step_down_threshold(sorted: &[f64], u: &[f64]) -> f64 {
    let mut m = 0;
    while m < sorted.len() && sorted[m] <= u[m] {
        m += 1;
    }
    if m == 0 {
        f64::NEG_INFINITY
    } else {
        sorted[m - 1]
    }
}

/// Rejection threshold for the step-up rule: `P(m)` for the largest `m` with
/// `sorted[m] ≤ u[m]`. `NEG_INFINITY` = reject none.
fn step_up_threshold(sorted: &[f64], u: &[f64]) -> f64 {
    for i in (0..sorted.len()).rev() {
        if sorted[i] <= u[i] {
            return sorted[i];
        }
    }
    f64::NEG_INFINITY
}

/// Rejection threshold for Hommel's procedure on ascending-sorted p-values.
///
/// The procedure looks for `j`, the largest `i ∈ {1, …, n}` such that the `i`
/// largest p-values all clear their diagonal lines: `Q(m) > (i-m+1)·α/i` for
/// `m = 1, …, i`, where `Q(m)` is the `m`-th *largest* p-value (so
/// `Q(m) = sorted[n-m]`). If no such `i` exists every hypothesis is rejected
/// (threshold `+∞`); otherwise the threshold is `α/j`.
///
/// Rearranging each condition for fixed `m` gives `i < (m-1)·α/(α - Q(m))`
/// whenever `Q(m) < α`, while `Q(m) > α` imposes no constraint and
/// `Q(m) ≤ α` kills every `i ≥ m` when `m = 1` (and `Q(m) = α` none when
/// `m ≥ 2`). The feasible `i` therefore form a prefix cut off by the running
/// minimum of those bounds, which the loop tracks in one O(n) pass.
fn hommel_threshold(sorted: &[f64], alpha: f64) -> f64 {
    let n = sorted.len();
    let mut j = None;
    let mut cap = f64::INFINITY;
    for i in 1..=n {
        let q = sorted[n - i];
        let bound = if q > alpha {
            f64::INFINITY
        } else if i == 1 {
            0.0
        } else if q == alpha {
            f64::INFINITY
        } else {
            (i - 1) as f64 * alpha / (alpha - q)
        };
        cap = cap.min(bound);
        if (i as f64) < cap {
            j = Some(i);
        } else {
            break;
        }
    }
    match j {
        None => f64::INFINITY,
        Some(j) => alpha / j as f64,
    }
}

fn reject_at_threshold(p: &PValueVector, threshold: f64) -> RejectionSet {
    RejectionSet::from_flags(p.values().iter().map(|&pi| pi <= threshold).collect())
}

/// Applies the step-down rule for cutoffs `u` to `p`.
///
/// Rejects the `m` smallest p-values where `m = max{i : P(j) ≤ uⱼ for all
/// j ≤ i}` (zero if `P(1) > u₁`); ties with `P(m)` are rejected too.
pub fn step_down(p: &PValueVector, u: &CriticalValues) -> Result<RejectionSet> {
    check_same_length(p, u)?;
    let sorted = p.sorted();
    Ok(reject_at_threshold(p, step_down_threshold(&sorted, u.values())))
}

/// Applies the step-up rule for cutoffs `u` to `p`.
///
/// Rejects the `m` smallest p-values where `m = max{i : P(i) ≤ uᵢ}` (zero if
/// no index qualifies); ties with `P(m)` are rejected too.
pub fn step_up(p: &PValueVector, u: &CriticalValues) -> Result<RejectionSet> {
    check_same_length(p, u)?;
    let sorted = p.sorted();
    Ok(reject_at_threshold(p, step_up_threshold(&sorted, u.values())))
}

/// Applies Hommel's procedure at level `alpha` to `p`.
///
/// See [`hommel_threshold`] for the decision rule; when the rule's defining
/// maximum does not exist, all hypotheses are rejected.
pub fn hommel(p: &PValueVector, alpha: f64) -> Result<RejectionSet> {
    check_level(alpha)?;
    let sorted = p.sorted();
    Ok(reject_at_threshold(p, hommel_threshold(&sorted, alpha)))
}

/// Which stepwise direction a cutoff vector is intended for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    StepDown,
    StepUp,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::StepDown => "step-down",
            StepKind::StepUp => "step-up",
        }
    }
}

impl std::fmt::Display for StepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A cutoff that exceeds the largest value compatible with distribution-free
/// FWER control at level `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffViolation {
    /// 1-based cutoff index.
    pub index: usize,
    /// The offending cutoff value.
    pub value: f64,
    /// The bound it had to stay within.
    pub bound: f64,
}

/// Checks `u` against the sharp upper bounds that FWER control at `alpha`
/// under arbitrary p-value dependence imposes on stepwise cutoffs:
/// `uᵢ ≤ α/(n-i+1)` for a step-down rule and `uᵢ ≤ iα/n` for a step-up rule.
///
/// Returns the violated positions (empty = the cutoffs are admissible). The
/// Holm/Hochberg and Benjamini–Hochberg families sit exactly on their
/// respective bounds, so they validate clean; Šidák's constant cutoff always
/// exceeds `α/n` at `i = 1` (for `n ≥ 2`), reflecting that it buys its extra
/// power by assuming independence.
pub fn validate_fwer_cutoffs(u: &CriticalValues, alpha: f64, kind: StepKind) -> Vec<CutoffViolation> {
    let n = u.len();
    u.values()
        .iter()
        .enumerate()
        .filter_map(|(k, &value)| {
            let i = k + 1;
            let bound = match kind {
                StepKind::StepDown => alpha / (n - i + 1) as f64,
                StepKind::StepUp => i as f64 * alpha / n as f64,
            };
            (value > bound).then_some(CutoffViolation { index: i, value, bound })
        })
        .collect()
}

/// The named procedures the estimators and CLI know how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedure {
    /// Single-step Bonferroni.
    Bonferroni,
    /// Single-step Šidák.
    Sidak,
    /// Holm's step-down rule.
    Holm,
    /// Step-down with the first Benjamini–Liu cutoff family.
    BenjaminiLiu1,
    /// Step-down with the second Benjamini–Liu cutoff family.
    BenjaminiLiu2,
    /// Step-down with the third Benjamini–Liu cutoff family.
    BenjaminiLiu3,
    /// Hochberg's step-up rule.
    Hochberg,
    /// The Benjamini–Hochberg step-up rule.
    BenjaminiHochberg,
    /// Hommel's procedure.
    Hommel,
}

impl Procedure {
    /// Every named procedure, in display order.
    pub const ALL: [Procedure; 9] = [
        Procedure::Bonferroni,
        Procedure::Sidak,
        Procedure::Holm,
        Procedure::BenjaminiLiu1,
        Procedure::BenjaminiLiu2,
        Procedure::BenjaminiLiu3,
        Procedure::Hochberg,
        Procedure::BenjaminiHochberg,
        Procedure::Hommel,
    ];

    /// Canonical lowercase name (also accepted by `FromStr`).
    pub fn name(self) -> &'static str {
        match self {
            Procedure::Bonferroni => "bonferroni",
            Procedure::Sidak => "sidak",
            Procedure::Holm => "holm",
            Procedure::BenjaminiLiu1 => "benjamini-liu-1",
            Procedure::BenjaminiLiu2 => "benjamini-liu-2",
            Procedure::BenjaminiLiu3 => "benjamini-liu-3",
            Procedure::Hochberg => "hochberg",
            Procedure::BenjaminiHochberg => "benjamini-hochberg",
            Procedure::Hommel => "hommel",
        }
    }

    /// Builds the ready-to-apply decision rule for `n` hypotheses at `level`.
    pub fn decider(self, n: usize, level: f64) -> Result<Decider> {
        let step_down_family = |family| -> Result<Decider> {
            Ok(Decider::StepDown(CriticalValues::from_family(family, n, level)?))
        };
        match self {
            // With a constant cutoff vector, step-down, step-up, and
            // single-step all reject exactly {i : Pᵢ ≤ u}, so running these
            // two as step-down rules is not a choice of procedure, just of
            // code path.
            Procedure::Bonferroni => step_down_family(Family::Bonferroni),
            Procedure::Sidak => step_down_family(Family::Sidak),
            Procedure::Holm => step_down_family(Family::HolmHochberg),
            Procedure::BenjaminiLiu1 => step_down_family(Family::BenjaminiLiu1),
            Procedure::BenjaminiLiu2 => step_down_family(Family::BenjaminiLiu2),
            Procedure::BenjaminiLiu3 => step_down_family(Family::BenjaminiLiu3),
            Procedure::Hochberg => Ok(Decider::StepUp(CriticalValues::from_family(
                Family::HolmHochberg,
                n,
                level,
            )?)),
            Procedure::BenjaminiHochberg => Ok(Decider::StepUp(CriticalValues::from_family(
                Family::BenjaminiHochberg,
                n,
                level,
            )?)),
            Procedure::Hommel => {
                if n == 0 {
                    return Err(Error::domain("critical values require at least one hypothesis"));
                }
                check_level(level)?;
                Ok(Decider::Hommel { alpha: level })
            }
        }
    }
}

impl std::fmt::Display for Procedure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Procedure {
    type Err = Error;

    /// Accepts the canonical names plus the short aliases `bl1`, `bl2`,
    /// `bl3`, and `bh`; matching is case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Ok(match key.as_str() {
            "bonferroni" => Procedure::Bonferroni,
            "sidak" => Procedure::Sidak,
            "holm" => Procedure::Holm,
            "benjamini-liu-1" | "bl1" => Procedure::BenjaminiLiu1,
            "benjamini-liu-2" | "bl2" => Procedure::BenjaminiLiu2,
            "benjamini-liu-3" | "bl3" => Procedure::BenjaminiLiu3,
            "hochberg" => Procedure::Hochberg,
            "benjamini-hochberg" | "bh" => Procedure::BenjaminiHochberg,
            "hommel" => Procedure::Hommel,
            _ => {
                return Err(Error::usage(format!(
                    "unknown procedure {s:?}; expected one of {}",
                    Procedure::ALL.map(|p| p.name()).join(", ")
                )))
            }
        })
    }
}

/// A procedure bound to its cutoffs (or level), ready to apply to p-values.
#[derive(Debug, Clone)]
pub enum Decider {
    StepDown(CriticalValues),
    StepUp(CriticalValues),
    Hommel { alpha: f64 },
}

impl Decider {
    /// Number of hypotheses the decider expects, if it fixes one.
    pub fn expected_len(&self) -> Option<usize> {
        match self {
            Decider::StepDown(u) | Decider::StepUp(u) => Some(u.len()),
            Decider::Hommel { .. } => None,
        }
    }

    /// Applies the rule to `p`.
    pub fn decide(&self, p: &PValueVector) -> Result<RejectionSet> {
        match self {
            Decider::StepDown(u) => step_down(p, u),
            Decider::StepUp(u) => step_up(p, u),
            Decider::Hommel { alpha } => hommel(p, *alpha),
        }
    }

    /// The rule's rejection threshold for one realization, given the
    /// ascending-sorted p-values. Assumes lengths were checked up front.
    pub(crate) fn rejection_threshold(&self, sorted: &[f64]) -> f64 {
        match self {
            Decider::StepDown(u) => step_down_threshold(sorted, u.values()),
            Decider::StepUp(u) => step_up_threshold(sorted, u.values()),
            Decider::Hommel { alpha } => hommel_threshold(sorted, *alpha),
        }
    }
}
