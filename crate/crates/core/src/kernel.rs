//! Kernel functions `g(x) = x^α L_g(x)` and the second-order quantities
//! derived from them.

use std::fmt;

use crate::error::{Error, Result};
use crate::quad::Integrator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `x^α e^{-λx}`
    Gamma,
    /// `x^α (1+x)^{β-α}`
    PowerLaw,
    /// `c·x^α`; only integrable on bounded intervals, so TBSS use only.
    ScaledPower,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gamma => "gamma",
            KernelFamily::PowerLaw => "power-law",
            KernelFamily::ScaledPower => "scaled-power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Gamma { lambda: f64 },
    PowerLaw { beta: f64 },
    ScaledPower { scale: f64 },
}

/// A validated kernel with roughness index `α ∈ (-1/2, 1/2) \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    alpha: f64,
    shape: Shape,
}

/// Small-lag behaviour `V(h) ~ constant · h^exponent · L_g(h)²` of the variogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariogramAsymptote {
    pub constant: f64,
    pub exponent: f64,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > -0.5 && alpha < 0.5 && alpha != 0.0 {
        Ok(())
    } else {
        Err(Error::invariant(
            "alpha in (-1/2, 1/2) \\ {0}",
            format!("alpha = {alpha}"),
        ))
    }
}

impl KernelSpec {
    pub fn gamma(alpha: f64, lambda: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invariant("lambda > 0", format!("lambda = {lambda}")));
        }
        Ok(Self {
            alpha,
            shape: Shape::Gamma { lambda },
        })
    }

    pub fn power_law(alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(beta < -0.5) || !beta.is_finite() {
            return Err(Error::invariant("beta < -1/2", format!("beta = {beta}")));
        }
        Ok(Self {
            alpha,
            shape: Shape::PowerLaw { beta },
        })
    }

    pub fn scaled_power(alpha: f64, scale: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invariant("scale > 0", format!("scale = {scale}")));
        }
        Ok(Self {
            alpha,
            shape: Shape::ScaledPower { scale },
        })
    }

    /// The rough Bergomi driver kernel `√(2α+1)·x^α`.
    pub fn rbergomi(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::scaled_power(alpha, (2.0 * alpha + 1.0).sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn family(&self) -> KernelFamily {
        match self.shape {
            Shape::Gamma { .. } => KernelFamily::Gamma,
            Shape::PowerLaw { .. } => KernelFamily::PowerLaw,
            Shape::ScaledPower { .. } => KernelFamily::ScaledPower,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.shape {
            Shape::Gamma { lambda } => Some(lambda),
            _ => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.shape {
            Shape::PowerLaw { beta } => Some(beta),
            _ => None,
        }
    }

    pub fn scale(&self) -> Option<f64> {
        match self.shape {
            Shape::ScaledPower { scale } => Some(scale),
            _ => None,
        }
    }

    /// Whether `∫_0^∞ g² < ∞`, i.e. the kernel can drive a stationary BSS process.
    pub fn is_square_integrable(&self) -> bool {
        !matches!(self.shape, Shape::ScaledPower { .. })
    }

    pub(crate) fn require_square_integrable(&self) -> Result<()> {
        if self.is_square_integrable() {
            Ok(())
        } else {
            Err(Error::invariant(
                "kernel square-integrable on (0, inf)",
                format!("{} kernel is admitted for TBSS use only", self.family().name()),
            ))
        }
    }

    /// Kernel value for `x > 0` without argument checks.
    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        x.powf(self.alpha) * self.lg(x)
    }

    /// Slowly varying factor `g(x)/x^α`, extended to all `x > 0`.
    #[inline]
    pub fn lg(&self, x: f64) -> f64 {
        match self.shape {
            Shape::Gamma { lambda } => (-lambda * x).exp(),
            Shape::PowerLaw { beta } => (1.0 + x).powf(beta - self.alpha),
            Shape::ScaledPower { scale } => scale,
        }
    }

    pub fn eval_g(&self, x: f64) -> Result<f64> {
        if x > 0.0 {
            Ok(self.g(x))
        } else {
            Err(Error::domain(format!("kernel evaluated at x = {x} <= 0")))
        }
    }

    pub fn eval_lg(&self, x: f64) -> Result<f64> {
        if x > 0.0 && x <= 1.0 {
            Ok(self.lg(x))
        } else {
            Err(Error::domain(format!("L_g evaluated at x = {x} outside (0, 1]")))
        }
    }

    /// Power of the algebraic decay of `g²` at infinity used to map the tail
    /// integral; exponentially decaying kernels use the plain reciprocal map.
    fn squared_tail_decay(&self) -> f64 {
        match self.shape {
            Shape::PowerLaw { beta } => 2.0 * beta,
            _ => -2.0,
        }
    }

    /// `∫_0^∞ g(x)² dx`.
    pub fn stationary_variance(&self) -> Result<f64> {
        self.require_square_integrable()?;
        let quad = Integrator::with_rel_tol(1e-14);
        let head = quad
            .integrate_left_singular(|x| self.lg(x).powi(2), 0.0, 1.0, 2.0 * self.alpha)
            .value;
        let tail = quad
            .integrate_tail(|x| self.g(x).powi(2), 1.0, self.squared_tail_decay())
            .value;
        Ok(head + tail)
    }

    /// `∫_0^∞ g(x) g(x+h) dx`, the autocovariance at lag `h` of the BSS
    /// process driven by this kernel with unit volatility.
    pub fn autocovariance(&self, h: f64) -> Result<f64> {
        self.require_square_integrable()?;
        if !(h >= 0.0) {
            return Err(Error::domain(format!("negative lag h = {h}")));
        }
        if h == 0.0 {
            return self.stationary_variance();
        }
        let quad = Integrator::with_rel_tol(1e-13);
        // (0, h]: x^α singularity; (x+h)^α is smooth there.
        let near = quad
            .integrate_left_singular(|x| self.lg(x) * self.g(x + h), 0.0, h, self.alpha)
            .value;
        // [h, far]: both factors vary on the scale of x, so integrate in log x.
        let far = (2.0 * h).max(1.0);
        let mid = quad
            .integrate(
                |s: f64| {
                    let x = s.exp();
                    x * self.g(x) * self.g(x + h)
                },
                h.ln(),
                far.ln(),
            )
            .value;
        let tail = quad
            .integrate_tail(|x| self.g(x) * self.g(x + h), far, self.squared_tail_decay())
            .value;
        Ok(near + mid + tail)
    }

    pub fn variogram_asymptote(&self) -> VariogramAsymptote {
        variogram_asymptote(self.alpha)
    }
}

/// `1/(2α+1) + ∫_0^∞ ((y+1)^α - y^α)² dy` together with the exponent `2α+1`.
pub fn variogram_asymptote(alpha: f64) -> VariogramAsymptote {
    let quad = Integrator::with_rel_tol(1e-14);
    let diff = |y: f64| y.powf(alpha) * (alpha * (1.0 / y).ln_1p()).exp_m1();
    let head = if alpha < 0.0 {
        // ((y+1)^α - y^α)² = y^{2α} (1 - y^{-α}(1+y)^α)²
        quad.integrate_left_singular(
            |y| (1.0 - y.powf(-alpha) * (1.0 + y).powf(alpha)).powi(2),
            0.0,
            1.0,
            2.0 * alpha,
        )
        .value
    } else {
        quad.integrate(|y| diff(y).powi(2), 0.0, 1.0).value
    };
    let tail = quad.integrate_tail(|y| diff(y).powi(2), 1.0, 2.0 * alpha - 2.0).value;
    VariogramAsymptote {
        constant: 1.0 / (2.0 * alpha + 1.0) + head + tail,
        exponent: 2.0 * alpha + 1.0,
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::Gamma { lambda } => write!(f, "gamma(alpha={},lambda={})", self.alpha, lambda),
            Shape::PowerLaw { beta } => {
                write!(f, "power-law(alpha={},beta={})", self.alpha, beta)
            }
            Shape::ScaledPower { scale } => {
                write!(f, "scaled-power(alpha={},scale={})", self.alpha, scale)
            }
        }
    }
}
