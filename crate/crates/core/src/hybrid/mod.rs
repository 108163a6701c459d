//! The hybrid discretization scheme.
//!
//! The kernel is replaced by `x^α L_g(k/n)` on the first `κ` cells (whose
//! Wiener integrals are simulated exactly, jointly with the Brownian
//! increment) and by the step value `g(b_k/n)` on the remaining cells. The
//! step part is a discrete convolution evaluated with an FFT.

mod covariance;
mod simulate;

pub use covariance::{innovation_covariance, innovation_covariance_with_step, InnovationCovariance};
pub use simulate::{
    sample_innovations, simulate_bss, simulate_tbss, ConvolutionMethod, HybridSimulator, InnovationMatrix, Volatility,
};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Evaluation points of the step part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BRule {
    /// `b_k = k`: forward Riemann sums.
    Forward,
    /// `b_k = b*_k`, the minimizer of the asymptotic MSE.
    Optimal,
}

impl BRule {
    pub fn name(self) -> &'static str {
        match self {
            BRule::Forward => "forward",
            BRule::Optimal => "optimal",
        }
    }

    pub fn eval(self, alpha: f64, k: u64) -> f64 {
        match self {
            BRule::Forward => k as f64,
            BRule::Optimal => b_optimal(alpha, k),
        }
    }
}

/// `b*_k = ((k^{α+1} - (k-1)^{α+1})/(α+1))^{1/α}`.
pub fn b_optimal(alpha: f64, k: u64) -> f64 {
    let kf = k as f64;
    // k^{p} - (k-1)^{p} without cancellation
    let p = alpha + 1.0;
    let diff = if k == 1 {
        1.0
    } else {
        -kf.powf(p) * (p * (-1.0 / kf).ln_1p()).exp_m1()
    };
    (diff / p).powf(1.0 / alpha)
}

/// Whether the plan discretizes a stationary BSS process or its truncated
/// counterpart started at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    Bss,
    Tbss,
}

/// Discretization parameters of the hybrid scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPlan {
    kernel: KernelSpec,
    kind: ProcessKind,
    n: u64,
    kappa: usize,
    b_rule: BRule,
    gamma_trunc: f64,
    truncation: usize,
    horizon: f64,
    dt: f64,
    steps: usize,
    normalize: bool,
}

/// Default truncation exponent: `N_n = ⌊n^{1.5}⌋`.
pub const DEFAULT_GAMMA: f64 = 0.5;

impl HybridPlan {
    /// Plan for a BSS process on `{0, 1/n, …, ⌊nT⌋/n}` with `N_n = ⌊n^{1.5}⌋`.
    pub fn bss(kernel: KernelSpec, n: u64, horizon: f64, kappa: usize, b_rule: BRule) -> Result<Self> {
        Self::bss_with_gamma(kernel, n, horizon, kappa, b_rule, DEFAULT_GAMMA)
    }

    /// Plan for a BSS process with truncation `N_n = ⌊n^{1+γ}⌋`.
    pub fn bss_with_gamma(
        kernel: KernelSpec,
        n: u64,
        horizon: f64,
        kappa: usize,
        b_rule: BRule,
        gamma: f64,
    ) -> Result<Self> {
        kernel.require_square_integrable()?;
        check_grid(n, horizon)?;
        let steps = (n as f64 * horizon).floor() as usize;
        let plan = Self {
            kernel,
            kind: ProcessKind::Bss,
            n,
            kappa,
            b_rule,
            gamma_trunc: DEFAULT_GAMMA,
            truncation: 0,
            horizon,
            dt: 1.0 / n as f64,
            steps,
            normalize: false,
        };
        plan.with_truncation_exponent(gamma)
    }

    /// Plan for a TBSS process on `{0, 1/n, …, ⌊nT⌋/n}`.
    pub fn tbss(kernel: KernelSpec, n: u64, horizon: f64, kappa: usize, b_rule: BRule) -> Result<Self> {
        check_grid(n, horizon)?;
        let steps = (n as f64 * horizon).floor() as usize;
        Self::tbss_grid(kernel, n, steps, 1.0 / n as f64, kappa, b_rule)
    }

    /// Plan for a TBSS process on `steps` cells of width `horizon/steps`.
    ///
    /// The scheme's formulas are homogeneous in the cell width, so the step
    /// is threaded through the innovation covariance and kernel evaluations
    /// instead of rescaling the output.
    pub fn tbss_over(kernel: KernelSpec, steps: usize, horizon: f64, kappa: usize, b_rule: BRule) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invariant("steps >= 1", "steps = 0"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invariant("T > 0", format!("T = {horizon}")));
        }
        Self::tbss_grid(kernel, steps as u64, steps, horizon / steps as f64, kappa, b_rule)
    }

    fn tbss_grid(kernel: KernelSpec, n: u64, steps: usize, dt: f64, kappa: usize, b_rule: BRule) -> Result<Self> {
        let plan = Self {
            kernel,
            kind: ProcessKind::Tbss,
            n,
            kappa,
            b_rule,
            gamma_trunc: DEFAULT_GAMMA,
            truncation: steps.max(kappa + 1),
            horizon: dt * steps as f64,
            dt,
            steps,
            normalize: false,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Sets `N_n = ⌊n^{1+γ}⌋`.
    pub fn with_truncation_exponent(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invariant("gamma > 0", format!("gamma = {gamma}")));
        }
        self.gamma_trunc = gamma;
        self.truncation = (self.n as f64).powf(1.0 + gamma).floor() as usize;
        self.validate()?;
        Ok(self)
    }

    /// Overrides `N_n` directly; `γ` is updated to `log N / log n - 1`.
    pub fn with_truncation(mut self, truncation: usize) -> Result<Self> {
        self.truncation = truncation;
        if self.n > 1 {
            self.gamma_trunc = (truncation as f64).ln() / (self.n as f64).ln() - 1.0;
        }
        self.validate()?;
        Ok(self)
    }

    /// Rescale output to unit stationary variance (BSS only).
    pub fn with_normalization(mut self, on: bool) -> Self {
        self.normalize = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if (self.kappa as u64) >= self.n.max(1) && self.kind == ProcessKind::Bss {
            return Err(Error::invariant(
                "kappa < n",
                format!("kappa = {}, n = {}", self.kappa, self.n),
            ));
        }
        if self.kind == ProcessKind::Bss {
            if self.truncation < self.kappa + 1 {
                return Err(Error::invariant(
                    "N_n >= kappa + 1",
                    format!("N_n = {}, kappa = {}", self.truncation, self.kappa),
                ));
            }
            if let Some(beta) = self.kernel.beta() {
                let alpha = self.kernel.alpha();
                let bound = -(2.0 * alpha + 1.0) / (2.0 * beta + 1.0);
                if self.gamma_trunc <= bound {
                    return Err(Error::invariant(
                        "gamma > -(2 alpha + 1)/(2 beta + 1)",
                        format!("gamma = {}, bound = {bound}", self.gamma_trunc),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }
    pub fn kind(&self) -> ProcessKind {
        self.kind
    }
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn kappa(&self) -> usize {
        self.kappa
    }
    pub fn b_rule(&self) -> BRule {
        self.b_rule
    }
    pub fn gamma_trunc(&self) -> f64 {
        self.gamma_trunc
    }
    /// `N_n`: number of cells kept in the BSS sum.
    pub fn truncation(&self) -> usize {
        self.truncation
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    /// Number of grid steps; the trajectory has `steps + 1` points.
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn normalize(&self) -> bool {
        self.normalize
    }

    /// Number of innovation vectors one path consumes.
    pub fn innovation_count(&self) -> usize {
        match self.kind {
            ProcessKind::Bss => self.truncation + self.steps,
            ProcessKind::Tbss => self.steps,
        }
    }

    /// Evaluation point `b_k` for `k ≥ κ+1`.
    pub fn b_sequence(&self, k: u64) -> Result<f64> {
        if k < self.kappa as u64 + 1 || k == 0 {
            return Err(Error::domain(format!(
                "b_k requested for k = {k} <= kappa = {}",
                self.kappa
            )));
        }
        Ok(self.b_rule.eval(self.kernel.alpha(), k))
    }
}

fn check_grid(n: u64, horizon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invariant("n >= 1", "n = 0"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invariant("T > 0", format!("T = {horizon}")));
    }
    Ok(())
}
