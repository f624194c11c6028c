//! Closed-form reliability of block diagrams under the exponential law.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ensure_valid, InstanceId, Slot, SlotTree, Survival, SystemModel};
use crate::{Error, Result};

/// A nonnegative, finite mission horizon in hours.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MissionTime(f64);

impl MissionTime {
    pub const ZERO: MissionTime = MissionTime(0.0);

    pub fn hours(t: f64) -> Result<Self> {
        if t.is_finite() && t >= 0.0 {
            Ok(MissionTime(t))
        } else {
            Err(Error::Domain(format!("mission time must be finite and >= 0, got {t}")))
        }
    }

    pub fn as_hours(self) -> f64 {
        self.0
    }
}

impl fmt::Display for MissionTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} h", self.0)
    }
}

/// Mean time to failure in hours.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mttf {
    Finite(f64),
    /// The system can never fail (some success path has only λ = 0 elements).
    Infinite,
}

impl Mttf {
    pub fn hours(self) -> Option<f64> {
        match self {
            Mttf::Finite(h) => Some(h),
            Mttf::Infinite => None,
        }
    }
}

fn check_rate(failure_rate: f64) -> Result<()> {
    if failure_rate.is_finite() && failure_rate >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "failure rate must be finite and >= 0, got {failure_rate}"
        )))
    }
}

/// R(t) = e^(−λt).
pub fn component_reliability(failure_rate: f64, t: MissionTime) -> Result<f64> {
    check_rate(failure_rate)?;
    Ok(survival(failure_rate, t.0))
}

#[inline]
pub(crate) fn survival(failure_rate: f64, t: f64) -> f64 {
    (-failure_rate * t).exp()
}

fn check_probabilities(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Domain("at least one reliability value is required".into()));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("reliability {v} is outside [0, 1]")));
    }
    Ok(())
}

/// Product of element reliabilities.
pub fn series_reliability(values: &[f64]) -> Result<f64> {
    check_probabilities(values)?;
    Ok(values.iter().product())
}

/// 1 − ∏(1 − Rᵢ).
pub fn parallel_reliability(values: &[f64]) -> Result<f64> {
    check_probabilities(values)?;
    Ok(1.0 - values.iter().map(|r| 1.0 - r).product::<f64>())
}

/// System reliability at `t`, composing component reliabilities through the
/// block tree. Instances are independent, so the composition is exact.
///
/// Each block's reliability and unreliability are propagated together
/// (complements via `ln_1p`/`expm1`), which keeps small values of either
/// accurate instead of rounding them to a multiple of 2⁻⁵³.
pub fn evaluate(model: &SystemModel, t: MissionTime) -> Result<f64> {
    Ok(survival_with(model, t, &[])?.up)
}

/// Like [`evaluate`], but the listed instances take the given reliability
/// instead of e^(−λt).
pub fn evaluate_with(model: &SystemModel, t: MissionTime, overrides: &[(InstanceId, f64)]) -> Result<f64> {
    Ok(survival_with(model, t, overrides)?.up)
}

fn survival_with(model: &SystemModel, t: MissionTime, overrides: &[(InstanceId, f64)]) -> Result<Survival> {
    let tree = compile_valid(model)?;
    let mut slots = slot_reliabilities(&tree, t.0);
    for (instance, r) in overrides {
        if !(0.0..=1.0).contains(r) {
            return Err(Error::Domain(format!(
                "override for `{instance}` is {r}, outside [0, 1]"
            )));
        }
        let slot = tree
            .slot_of(instance)
            .ok_or_else(|| crate::ModelError::UnknownInstance(instance.to_string()))?;
        slots[slot] = Survival::from_reliability(*r);
    }
    Ok(tree.root.reliability(&slots))
}

/// Reliability of every instance at `t`, in left-to-right order.
pub fn instance_reliabilities(model: &SystemModel, t: MissionTime) -> Result<Vec<(InstanceId, f64)>> {
    let tree = compile_valid(model)?;
    let slots = slot_reliabilities(&tree, t.0);
    Ok(tree
        .instances
        .into_iter()
        .zip(slots.into_iter().map(|s| s.up))
        .collect())
}

/// 1 − R(t), computed directly rather than by subtraction.
pub fn unreliability(model: &SystemModel, t: MissionTime) -> Result<f64> {
    Ok(survival_with(model, t, &[])?.down)
}

pub(crate) fn compile_valid(model: &SystemModel) -> Result<SlotTree> {
    ensure_valid(model)?;
    Ok(model.compile()?)
}

fn slot_reliabilities(tree: &SlotTree, t: f64) -> Vec<Survival> {
    tree.failure_rates
        .iter()
        .map(|&l| Survival::exponential(l, t))
        .collect()
}

/// Tail mass left beyond the quadrature cutoff.
pub const MTTF_TAIL_EPSILON: f64 = 1e-12;
/// Relative tolerance of the adaptive Simpson quadrature.
pub const MTTF_REL_TOL: f64 = 1e-9;

/// Mean time to failure, ∫₀^∞ R(t) dt.
///
/// Pure series trees (arity-1 wrappers ignored) use 1/Σλ; anything else is
/// integrated numerically by [`mttf_by_quadrature`].
pub fn mttf(model: &SystemModel) -> Result<Mttf> {
    let tree = compile_valid(model)?;
    if model.root().is_pure_series() {
        let total: f64 = tree.failure_rates.iter().sum();
        return Ok(if total > 0.0 {
            Mttf::Finite(1.0 / total)
        } else {
            Mttf::Infinite
        });
    }
    quadrature(&tree)
}

/// Mean time to failure by numerical integration regardless of structure.
///
/// Integrates R(t) over [0, −ln(ε)/λ_min] (λ_min over instances with λ > 0)
/// with composite adaptive Simpson.
pub fn mttf_by_quadrature(model: &SystemModel) -> Result<Mttf> {
    quadrature(&compile_valid(model)?)
}

fn quadrature(tree: &SlotTree) -> Result<Mttf> {
    if never_fails(&tree.root, &tree.failure_rates) {
        return Ok(Mttf::Infinite);
    }
    let lambda_min = tree
        .failure_rates
        .iter()
        .copied()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    let t_max = -MTTF_TAIL_EPSILON.ln() / lambda_min;
    let mut slots = vec![Survival::from_reliability(1.0); tree.failure_rates.len()];
    let f = |t: f64| {
        for (s, &l) in slots.iter_mut().zip(&tree.failure_rates) {
            *s = Survival::exponential(l, t);
        }
        tree.root.reliability(&slots).up
    };
    Ok(Mttf::Finite(adaptive_simpson(f, 0.0, t_max, MTTF_REL_TOL)))
}

/// True when the system survives forever: every λ > 0 instance failed and the
/// λ = 0 instances still form a success path.
fn never_fails(root: &Slot, failure_rates: &[f64]) -> bool {
    let immortal: Vec<bool> = failure_rates.iter().map(|&l| l == 0.0).collect();
    root.is_up(&immortal)
}

const SIMPSON_PANELS: usize = 64;
const SIMPSON_MAX_DEPTH: u32 = 40;

/// Composite adaptive Simpson on [a, b] to relative tolerance `rel_tol`.
pub(crate) fn adaptive_simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let h = (b - a) / SIMPSON_PANELS as f64;
    let mut panels = Vec::with_capacity(SIMPSON_PANELS);
    let mut rough = 0.0;
    for k in 0..SIMPSON_PANELS {
        let lo = a + h * k as f64;
        let hi = if k + 1 == SIMPSON_PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let s = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        rough += s;
        panels.push((lo, hi, flo, fmid, fhi, s));
    }
    let abs_tol = rel_tol * rough.abs().max(f64::MIN_POSITIVE);
    let per_panel = abs_tol / SIMPSON_PANELS as f64;
    panels
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, s)| refine(&mut f, lo, hi, flo, fmid, fhi, s, per_panel, SIMPSON_MAX_DEPTH))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
