//! Special functions needed by the innovation covariance and the asymptotic
//! MSE functional.

use crate::error::{Error, Result};
use crate::quad::Integrator;

/// Arguments of `₂F₁(-α, 1; α+2; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricQuery {
    alpha: f64,
    z: f64,
}

impl HypergeometricQuery {
    pub fn new(alpha: f64, z: f64) -> Result<Self> {
        if !(alpha > -0.5 && alpha < 0.5) || alpha == 0.0 {
            return Err(Error::domain(format!(
                "2F1 parameter alpha = {alpha} outside (-1/2, 1/2)\\{{0}}"
            )));
        }
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::domain(format!("2F1 argument z = {z} outside [0, 1]")));
        }
        Ok(Self { alpha, z })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// Arguments of the Hurwitz zeta function `ζ(x, s) = Σ_{k≥0} (k+s)^{-x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzQuery {
    x: f64,
    s: f64,
}

impl HurwitzQuery {
    pub fn new(x: f64, s: f64) -> Result<Self> {
        if !(x > 1.0) || !x.is_finite() {
            return Err(Error::domain(format!("hurwitz zeta needs x > 1, got {x}")));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("hurwitz zeta needs s > 0, got {s}")));
        }
        Ok(Self { x, s })
    }
}

const SERIES_LIMIT: f64 = 0.9;

/// `₂F₁(-α, 1; α+2; z)` on `z ∈ [0, 1]`.
///
/// Power series below `z = 0.9`; above it the Euler integral
/// `(α+1)∫_0^1 u^α (1 - z + z u)^α du`, split at the crossover `u = (1-z)/z`.
pub fn hyp2f1_special(q: &HypergeometricQuery) -> f64 {
    let (alpha, z) = (q.alpha, q.z);
    if z <= SERIES_LIMIT {
        hyp2f1_series(alpha, z)
    } else {
        hyp2f1_euler(alpha, z)
    }
}

/// Validating convenience wrapper around [`hyp2f1_special`].
pub fn hyp2f1(alpha: f64, z: f64) -> Result<f64> {
    HypergeometricQuery::new(alpha, z).map(|q| hyp2f1_special(&q))
}

fn hyp2f1_series(alpha: f64, z: f64) -> f64 {
    // term_{n+1}/term_n = (n - α)/(n + α + 2) · z; every term after the
    // first has the sign of -α, so the partial sums are monotone.
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        term *= (n - alpha) / (n + alpha + 2.0) * z;
        sum += term;
        n += 1.0;
        if term.abs() <= 1e-17 * sum.abs() || n > 5000.0 {
            break;
        }
    }
    sum
}

fn hyp2f1_euler(alpha: f64, z: f64) -> f64 {
    let c = 1.0 - z;
    if c == 0.0 {
        // Gauss summation: Γ(α+2)Γ(2α+1)/(Γ(2α+2)Γ(α+1)).
        return (alpha + 1.0) / (2.0 * alpha + 1.0);
    }
    let quad = Integrator::with_rel_tol(1e-15);
    let knee = c / z;
    let inner = quad
        .integrate_left_singular(|u| (c + z * u).powf(alpha), 0.0, knee, alpha)
        .value;
    let outer = quad
        .integrate(
            |s: f64| {
                let u = s.exp();
                u.powf(alpha + 1.0) * (c + z * u).powf(alpha)
            },
            knee.ln(),
            0.0,
        )
        .value;
    (alpha + 1.0) * (inner + outer)
}

// B_{2j} / (2j)! for j = 1..=8.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

/// Smallest argument at which the Euler–Maclaurin tail is started.
const EM_SHIFT: f64 = 20.0;

/// Hurwitz zeta by direct summation up to argument 20, then Euler–Maclaurin
/// with eight Bernoulli corrections.
pub fn hurwitz_zeta(q: &HurwitzQuery) -> f64 {
    let (x, s) = (q.x, q.s);
    let shift = if s < EM_SHIFT {
        (EM_SHIFT - s).ceil() as usize
    } else {
        0
    };
    let head: f64 = (0..shift).map(|k| (k as f64 + s).powf(-x)).sum();
    let a = s + shift as f64;
    let a_pow = a.powf(-x);
    let mut tail = a * a_pow / (x - 1.0) + 0.5 * a_pow;
    // derivative factor (x)_{2j-1} a^{-x-2j+1}
    let mut deriv = x * a_pow / a;
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        tail += coef * deriv;
        let m = 2.0 * (j as f64 + 1.0);
        deriv *= (x + m - 1.0) * (x + m) / (a * a);
    }
    head + tail
}

/// Validating convenience wrapper around [`hurwitz_zeta`].
pub fn zeta(x: f64, s: f64) -> Result<f64> {
    HurwitzQuery::new(x, s).map(|q| hurwitz_zeta(&q))
}
