use crate::error::{Error, Result};
use crate::hybrid::{HybridPlan, ProcessKind};
use crate::quad::{fixed, Integrator};

use super::jfun::{j_functional, Compensated, JQuery};

/// `J(α,κ,b) · E[σ²] · Δ^{2α+1} · L_g(Δ)²` with `Δ = 1/n` the cell width.
pub fn theoretical_mse(plan: &HybridPlan, sigma_sq_mean: f64) -> Result<f64> {
    if !(sigma_sq_mean >= 0.0) {
        return Err(Error::domain(format!("E[sigma^2] = {sigma_sq_mean} must be >= 0")));
    }
    let kernel = plan.kernel();
    let alpha = kernel.alpha();
    let j = j_functional(&JQuery::new(alpha, plan.kappa(), plan.b_rule())?);
    let dt = plan.dt();
    Ok(j * sigma_sq_mean * dt.powf(2.0 * alpha + 1.0) * kernel.lg(dt).powi(2))
}

/// The MSE `E|X(t) - X_n(t)|²` for `σ ≡ 1`, split as
/// `D` (hybrid cells), `D'` (step cells up to `n`), `D''` (step cells beyond
/// `n`) and `D'''` (kernel mass cut off by the truncation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseBreakdown {
    pub hybrid: f64,
    pub near: f64,
    pub far: f64,
    pub truncated: f64,
}

impl MseBreakdown {
    pub fn total(&self) -> f64 {
        (self.hybrid + self.far + self.truncated) + self.near
    }
}

/// Cells integrated adaptively; the rest use one 15-point Kronrod rule.
const ADAPTIVE_CELLS: usize = 64;

/// Exact MSE of the scheme with unit volatility, by quadrature of the
/// squared kernel-approximation error cell by cell.
///
/// For a BSS plan the value does not depend on `t`. For a TBSS plan it is
/// evaluated at the end of the horizon, `t = steps·Δ`.
pub fn analytic_mse(plan: &HybridPlan) -> Result<MseBreakdown> {
    let kernel = *plan.kernel();
    let alpha = kernel.alpha();
    let dt = plan.dt();
    let kappa = plan.kappa();
    let reach = match plan.kind() {
        ProcessKind::Bss => plan.truncation(),
        ProcessKind::Tbss => plan.steps(),
    };
    let split = (plan.n() as usize).min(reach);
    let quad = Integrator::with_rel_tol(1e-12);

    let mut hybrid = Compensated::default();
    for k in 1..=kappa.min(reach) {
        let lk = kernel.lg(k as f64 * dt);
        let (lo, hi) = ((k - 1) as f64 * dt, k as f64 * dt);
        let regular = |x: f64| (kernel.lg(x) - lk).powi(2);
        let v = if k == 1 {
            quad.integrate_left_singular(regular, lo, hi, 2.0 * alpha).value
        } else {
            quad.integrate(|x| x.powf(2.0 * alpha) * regular(x), lo, hi).value
        };
        hybrid.add(v);
    }

    let cell = |k: usize| -> f64 {
        let c = kernel.g(plan.b_rule().eval(alpha, k as u64) * dt);
        let (lo, hi) = ((k - 1) as f64 * dt, k as f64 * dt);
        if k == 1 {
            // (c - x^α L(x))² = x^{2α} (c x^{-α} - L(x))²
            quad.integrate_left_singular(|x| (c * x.powf(-alpha) - kernel.lg(x)).powi(2), lo, hi, 2.0 * alpha)
                .value
        } else if k <= ADAPTIVE_CELLS {
            quad.integrate(|x| (c - kernel.g(x)).powi(2), lo, hi).value
        } else {
            fixed(|x| (c - kernel.g(x)).powi(2), lo, hi)
        }
    };
    let mut near = Compensated::default();
    for k in ((kappa + 1)..=split).rev() {
        near.add(cell(k));
    }
    let mut far = Compensated::default();
    for k in ((split + 1).max(kappa + 1)..=reach).rev() {
        far.add(cell(k));
    }

    let truncated = match plan.kind() {
        ProcessKind::Bss => {
            let edge = reach as f64 * dt;
            let decay = kernel.beta().map(|b| 2.0 * b).unwrap_or(-2.0);
            quad.integrate_tail(|x| kernel.g(x).powi(2), edge, decay).value
        }
        ProcessKind::Tbss => 0.0,
    };
    Ok(MseBreakdown {
        hybrid: hybrid.value(),
        near: near.value(),
        far: far.value(),
        truncated,
    })
}

/// `E|X_n(t)|²` for `σ ≡ 1`: the discretized kernel's squared `L²` norm.
pub fn discretized_second_moment(plan: &HybridPlan) -> Result<f64> {
    let kernel = *plan.kernel();
    let dt = plan.dt();
    let cov = crate::hybrid::innovation_covariance_with_step(kernel.alpha(), dt, plan.kappa())?;
    let reach = match plan.kind() {
        ProcessKind::Bss => plan.truncation(),
        ProcessKind::Tbss => plan.steps(),
    };
    let mut acc = Compensated::default();
    for k in 1..=plan.kappa().min(reach) {
        acc.add(kernel.lg(k as f64 * dt).powi(2) * cov.sigma[(k, k)]);
    }
    for k in (plan.kappa() + 1)..=reach {
        acc.add(kernel.g(plan.b_rule().eval(kernel.alpha(), k as u64) * dt).powi(2) * dt);
    }
    Ok(acc.value())
}
