use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::check_alpha;
use crate::specfun::{hyp2f1_special, HypergeometricQuery};

/// Covariance `Σ` of the innovation vector
/// `(W_i, W_{i,1}, …, W_{i,κ})`, where `W_i` is the Brownian increment over
/// one cell and `W_{i,j} = ∫_cell ((i+j)Δ - s)^α dW(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationCovariance {
    pub sigma: DMatrix<f64>,
    /// Lower-triangular Cholesky factor of `sigma`.
    pub chol: DMatrix<f64>,
    alpha: f64,
    step: f64,
}

impl InnovationCovariance {
    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn kappa(&self) -> usize {
        self.dim() - 1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

/// `Σ` for cells of width `1/n`.
pub fn innovation_covariance(alpha: f64, n: u64, kappa: usize) -> Result<InnovationCovariance> {
    if n == 0 {
        return Err(Error::invariant("n >= 1", "n = 0"));
    }
    innovation_covariance_with_step(alpha, 1.0 / n as f64, kappa)
}

/// `Σ` for cells of width `step`; every entry is homogeneous in the step.
pub fn innovation_covariance_with_step(alpha: f64, step: f64, kappa: usize) -> Result<InnovationCovariance> {
    check_alpha(alpha)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("cell width {step} must be positive")));
    }
    let dim = kappa + 1;
    let a1 = alpha + 1.0;
    let a2 = 2.0 * alpha + 1.0;
    let mut sigma = DMatrix::<f64>::zeros(dim, dim);
    sigma[(0, 0)] = step;
    // 1-based j in the formulas is `j = idx + 1`; j - 1 = idx, j - 2 = idx - 1.
    for j in 1..dim {
        let jm1 = j as f64;
        let jm2 = (j - 1) as f64;
        let cross = (jm1.powf(a1) - jm2.powf(a1)) * step.powf(a1) / a1;
        sigma[(0, j)] = cross;
        sigma[(j, 0)] = cross;
        sigma[(j, j)] = (jm1.powf(a2) - jm2.powf(a2)) * step.powf(a2) / a2;
    }
    for j in 1..dim {
        for k in (j + 1)..dim {
            let (jm1, km1) = (j as f64, k as f64);
            let upper = jm1.powf(a1) * km1.powf(alpha) * f21(alpha, jm1 / km1)?;
            // The (j-2) term vanishes at j = 2 since 0^{α+1} = 0.
            let lower = if j == 1 {
                0.0
            } else {
                let (jm2, km2) = (jm1 - 1.0, km1 - 1.0);
                jm2.powf(a1) * km2.powf(alpha) * f21(alpha, jm2 / km2)?
            };
            let v = step.powf(a2) / a1 * (upper - lower);
            sigma[(j, k)] = v;
            sigma[(k, j)] = v;
        }
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| {
            Error::Numerical(format!(
                "innovation covariance not positive definite (alpha = {alpha}, kappa = {kappa})"
            ))
        })?
        .l();
    Ok(InnovationCovariance {
        sigma,
        chol,
        alpha,
        step,
    })
}

fn f21(alpha: f64, z: f64) -> Result<f64> {
    Ok(hyp2f1_special(&HypergeometricQuery::new(alpha, z)?))
}
