//! Exact simulation of Gaussian processes on a finite grid by Cholesky
//! factorization of the full covariance matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{check_alpha, KernelSpec};
use crate::rng::{fill_normals, path_rng, PathRng, STREAM_DRIVER};
use crate::specfun::{hyp2f1_special, HypergeometricQuery};
use crate::trajectory::{Trajectory, TrajectoryLabel};

/// Largest matrix dimension accepted by the dense factorization.
pub const MAX_DIM: usize = 8192;

const JITTERS: [f64; 5] = [1e-14, 1e-13, 1e-12, 1e-11, 1e-10];

/// Lower Cholesky factor of `cov`, retrying with diagonal jitter
/// `ε·mean(diag)` for `ε = 1e-14, …, 1e-10`. Returns the factor and the
/// jitter that was added (0 when none was needed).
pub fn cholesky_with_jitter(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let dim = cov.nrows();
    if dim != cov.ncols() {
        return Err(Error::LengthMismatch {
            what: "covariance columns",
            expected: dim,
            got: cov.ncols(),
        });
    }
    if dim > MAX_DIM {
        return Err(Error::invariant(
            "matrix dimension <= 8192",
            format!("dimension = {dim}"),
        ));
    }
    if let Some(c) = cov.clone().cholesky() {
        return Ok((c.l(), 0.0));
    }
    let level = cov.diagonal().mean();
    for eps in JITTERS {
        let jitter = eps * level;
        let mut m = cov.clone();
        for i in 0..dim {
            m[(i, i)] += jitter;
        }
        if let Some(c) = m.cholesky() {
            return Ok((c.l(), jitter));
        }
    }
    Err(Error::Factorization {
        jitter: JITTERS[JITTERS.len() - 1] * level,
    })
}

/// Draws `L z` for a fixed lower-triangular `L` stored row-packed.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSampler {
    dim: usize,
    packed: Vec<f64>,
    jitter: f64,
}

impl GaussianSampler {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        let (l, jitter) = cholesky_with_jitter(cov)?;
        let dim = l.nrows();
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            packed.extend((0..=i).map(|j| l[(i, j)]));
        }
        Ok(Self { dim, packed, jitter })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Row `i` of the factor, entries `0..=i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    /// Applies the factor to standard normals `z`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = dot(self.row(i), &z[..=i]);
        }
    }

    pub fn sample(&self, rng: &mut PathRng) -> Vec<f64> {
        let mut z = vec![0.0; self.dim];
        fill_normals(rng, &mut z);
        let mut out = vec![0.0; self.dim];
        self.apply(&z, &mut out);
        out
    }
}

/// Dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `∫_0^s (s-u)^α (t-u)^α du` for `0 < s ≤ t`.
pub fn power_kernel_covariance(alpha: f64, s: f64, t: f64) -> Result<f64> {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if !(s > 0.0) {
        return Ok(0.0);
    }
    let f = hyp2f1_special(&HypergeometricQuery::new(alpha, s / t)?);
    Ok(s.powf(alpha + 1.0) * t.powf(alpha) / (alpha + 1.0) * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExactKind {
    Bss,
    TbssPower,
}

/// An exact sampler for one of the supported processes on `{i·Δ}`.
#[derive(Debug, Clone)]
pub struct ExactPlan {
    kind: ExactKind,
    sampler: GaussianSampler,
    dt: f64,
    steps: usize,
}

impl ExactPlan {
    /// Stationary BSS process with unit volatility on `{0, 1/n, …, ⌊nT⌋/n}`.
    pub fn bss(kernel: KernelSpec, n: u64, horizon: f64) -> Result<Self> {
        kernel.require_square_integrable()?;
        let (dt, steps) = grid(n, horizon)?;
        let dim = steps + 1;
        if dim > MAX_DIM {
            return Err(Error::invariant(
                "matrix dimension <= 8192",
                format!("dimension = {dim}"),
            ));
        }
        let acov: Vec<f64> = (0..dim)
            .map(|h| kernel.autocovariance(h as f64 * dt))
            .collect::<Result<_>>()?;
        let cov = DMatrix::from_fn(dim, dim, |i, j| acov[i.abs_diff(j)]);
        Ok(Self {
            kind: ExactKind::Bss,
            sampler: GaussianSampler::new(&cov)?,
            dt,
            steps,
        })
    }

    /// TBSS process `∫_0^t c (t-s)^α dW(s)` on `steps` cells of width `T/steps`.
    pub fn tbss_power(alpha: f64, scale: f64, steps: usize, horizon: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if steps == 0 || !(horizon > 0.0) {
            return Err(Error::invariant(
                "steps >= 1 and T > 0",
                format!("steps = {steps}, T = {horizon}"),
            ));
        }
        let dt = horizon / steps as f64;
        let mut cov = DMatrix::zeros(steps, steps);
        for i in 0..steps {
            for j in 0..=i {
                let v = scale * scale * power_kernel_covariance(alpha, (j + 1) as f64 * dt, (i + 1) as f64 * dt)?;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        Ok(Self {
            kind: ExactKind::TbssPower,
            sampler: GaussianSampler::new(&cov)?,
            dt,
            steps,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sampler(&self) -> &GaussianSampler {
        &self.sampler
    }

    /// Path `path` of the ensemble with master seed `seed`.
    pub fn sample_path(&self, seed: u64, path: u64) -> Trajectory {
        let draw = self.sampler.sample(&mut path_rng(seed, path, STREAM_DRIVER));
        let values = match self.kind {
            ExactKind::Bss => draw,
            ExactKind::TbssPower => std::iter::once(0.0).chain(draw).collect(),
        };
        Trajectory {
            values,
            t0: 0.0,
            dt: self.dt,
            seed,
            label: TrajectoryLabel::Exact,
        }
    }
}

fn grid(n: u64, horizon: f64) -> Result<(f64, usize)> {
    if n == 0 || !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invariant("n >= 1 and T > 0", format!("n = {n}, T = {horizon}")));
    }
    Ok((1.0 / n as f64, (n as f64 * horizon).floor() as usize))
}

pub fn exact_bss(kernel: KernelSpec, n: u64, horizon: f64, seed: u64) -> Result<Trajectory> {
    Ok(ExactPlan::bss(kernel, n, horizon)?.sample_path(seed, 0))
}

pub fn exact_tbss_power(alpha: f64, scale: f64, steps: usize, horizon: f64, seed: u64) -> Result<Trajectory> {
    Ok(ExactPlan::tbss_power(alpha, scale, steps, horizon)?.sample_path(seed, 0))
}

/// Joint exact sampler of the Brownian increments `ΔW_0, …, ΔW_{m-1}` and
/// the Volterra process `Y_t = c ∫_0^t (t-s)^α dW(s)` at `t_1, …, t_m`.
///
/// The increments come first in the factorization, so their block of the
/// factor is `√Δ·I` and they coincide with the increments any other scheme
/// draws from the first `m` normals of the same stream.
#[derive(Debug, Clone)]
pub struct JointVolterra {
    sampler: GaussianSampler,
    steps: usize,
    dt: f64,
}

impl JointVolterra {
    pub fn new(alpha: f64, scale: f64, steps: usize, horizon: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if steps == 0 || !(horizon > 0.0) {
            return Err(Error::invariant(
                "steps >= 1 and T > 0",
                format!("steps = {steps}, T = {horizon}"),
            ));
        }
        let dt = horizon / steps as f64;
        let m = steps;
        let a1 = alpha + 1.0;
        let mut cov = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            cov[(j, j)] = dt;
        }
        for i in 0..m {
            let ti = (i + 1) as f64 * dt;
            for j in 0..=i {
                let (lo, hi) = (j as f64 * dt, (j + 1) as f64 * dt);
                let v = scale * ((ti - lo).powf(a1) - (ti - hi).powf(a1)) / a1;
                cov[(m + i, j)] = v;
                cov[(j, m + i)] = v;
            }
            for j in 0..=i {
                let tj = (j + 1) as f64 * dt;
                let v = scale * scale * power_kernel_covariance(alpha, tj, ti)?;
                cov[(m + i, m + j)] = v;
                cov[(m + j, m + i)] = v;
            }
        }
        Ok(Self {
            sampler: GaussianSampler::new(&cov)?,
            steps,
            dt,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Returns `(ΔW, Y)` with `Y[0] = 0` and `Y.len() = steps + 1`.
    pub fn sample(&self, rng: &mut PathRng) -> (Vec<f64>, Vec<f64>) {
        let draw = self.sampler.sample(rng);
        let (dw, y) = draw.split_at(self.steps);
        let y = std::iter::once(0.0).chain(y.iter().copied()).collect();
        (dw.to_vec(), y)
    }
}
