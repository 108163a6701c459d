use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::covariance::{innovation_covariance_with_step, InnovationCovariance};
use super::{HybridPlan, ProcessKind};
use crate::error::{Error, Result};
use crate::rng::{fill_normals, path_rng, PathRng, STREAM_DRIVER};
use crate::trajectory::{Trajectory, TrajectoryLabel};

/// Innovation vectors of one path, stored component-major: component `c` of
/// cell `i` is `data[c·rows + i]`. Component 0 holds the Brownian increments.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl InnovationMatrix {
    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, cell: usize, c: usize) -> f64 {
        self.data[c * self.rows + cell]
    }
}

/// Draws `count` innovation vectors with covariance `cov.sigma`.
///
/// The standard normals are consumed component-major, so the first `j`
/// components do not depend on `κ` as long as `κ ≥ j - 1`: paths simulated
/// with different `κ` from the same stream share their Brownian increments.
pub fn sample_innovations(cov: &InnovationCovariance, count: usize, rng: &mut PathRng) -> InnovationMatrix {
    let cols = cov.dim();
    let mut z = vec![0.0; cols * count];
    fill_normals(rng, &mut z);
    let mut data = vec![0.0; cols * count];
    for c in 0..cols {
        for d in 0..=c {
            let l = cov.chol[(c, d)];
            let (src, dst) = (&z[d * count..(d + 1) * count], c * count);
            for i in 0..count {
                data[dst + i] += l * src[i];
            }
        }
    }
    InnovationMatrix {
        rows: count,
        cols,
        data,
    }
}

/// Volatility values `σ_j` attached to the innovation cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Volatility {
    Unit,
    Constant(f64),
    /// One value per innovation cell, oldest first.
    Path(Vec<f64>),
}

impl Volatility {
    fn check(&self, cells: usize) -> Result<()> {
        match self {
            Volatility::Path(v) if v.len() != cells => Err(Error::LengthMismatch {
                what: "volatility path",
                expected: cells,
                got: v.len(),
            }),
            _ => Ok(()),
        }
    }

    #[inline]
    fn at(&self, j: usize) -> f64 {
        match self {
            Volatility::Unit => 1.0,
            Volatility::Constant(c) => *c,
            Volatility::Path(v) => v[j],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Circular convolution through a zero-padded FFT, `O(L log L)`.
    #[default]
    Fft,
    /// Term-by-term sums in increasing `k`, `O(L)` per grid point.
    Direct,
}

/// A hybrid-scheme simulator with its kernel weights and transforms precomputed.
#[derive(Clone)]
pub struct HybridSimulator {
    plan: HybridPlan,
    cov: InnovationCovariance,
    method: ConvolutionMethod,
    /// `L_g(k·Δ)`, `k = 1..=κ`.
    hybrid_weights: Vec<f64>,
    /// `Γ_k = g(b_k·Δ)` for `κ < k ≤ L`, zero otherwise.
    step_weights: Vec<f64>,
    gamma_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Multiplier applied to every output value.
    scale: f64,
}

impl std::fmt::Debug for HybridSimulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HybridSimulator")
            .field("plan", &self.plan)
            .field("method", &self.method)
            .field("fft_len", &self.gamma_hat.len())
            .finish()
    }
}

impl HybridSimulator {
    pub fn new(plan: HybridPlan) -> Result<Self> {
        let dt = plan.dt();
        let kappa = plan.kappa();
        let kernel = *plan.kernel();
        let cov = innovation_covariance_with_step(kernel.alpha(), dt, kappa)?;
        let hybrid_weights = (1..=kappa).map(|k| kernel.lg(k as f64 * dt)).collect();
        let reach = match plan.kind() {
            ProcessKind::Bss => plan.truncation(),
            ProcessKind::Tbss => plan.steps(),
        };
        let mut step_weights = vec![0.0; reach + 1];
        for (k, w) in step_weights.iter_mut().enumerate().skip(kappa + 1) {
            *w = kernel.g(plan.b_rule().eval(kernel.alpha(), k as u64) * dt);
        }
        if step_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("non-finite kernel weight".into()));
        }
        let fft_len = (reach + plan.steps() + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut gamma_hat = vec![Complex::new(0.0, 0.0); fft_len];
        for (g, w) in gamma_hat.iter_mut().zip(&step_weights) {
            g.re = *w;
        }
        forward.process(&mut gamma_hat);
        let inv_len = 1.0 / fft_len as f64;
        gamma_hat.iter_mut().for_each(|g| *g *= inv_len);
        let scale = if plan.normalize() && plan.kind() == ProcessKind::Bss {
            kernel.stationary_variance()?.sqrt().recip()
        } else {
            1.0
        };
        Ok(Self {
            plan,
            cov,
            method: ConvolutionMethod::Fft,
            hybrid_weights,
            step_weights,
            gamma_hat,
            forward,
            inverse,
            scale,
        })
    }

    pub fn with_method(mut self, method: ConvolutionMethod) -> Self {
        self.method = method;
        self
    }

    pub fn plan(&self) -> &HybridPlan {
        &self.plan
    }

    pub fn covariance(&self) -> &InnovationCovariance {
        &self.cov
    }

    pub fn method(&self) -> ConvolutionMethod {
        self.method
    }

    pub fn hybrid_weights(&self) -> &[f64] {
        &self.hybrid_weights
    }

    pub fn step_weights(&self) -> &[f64] {
        &self.step_weights
    }

    /// Cell index offset: grid point `i` reads cells `i + offset - k`.
    fn offset(&self) -> usize {
        match self.plan.kind() {
            ProcessKind::Bss => self.plan.truncation(),
            ProcessKind::Tbss => 0,
        }
    }

    pub fn draw_innovations(&self, rng: &mut PathRng) -> InnovationMatrix {
        sample_innovations(&self.cov, self.plan.innovation_count(), rng)
    }

    /// Evaluates the scheme on the grid `0..=steps` from given innovations.
    pub fn synthesize(&self, innov: &InnovationMatrix, vol: &Volatility) -> Result<Vec<f64>> {
        self.check_inputs(innov, vol)?;
        let mut out = match self.method {
            ConvolutionMethod::Direct => self.direct(innov, vol),
            ConvolutionMethod::Fft => {
                let mut step = self.fft_pair(innov, None, vol);
                self.add_hybrid(&mut step.0, innov, vol);
                step.0
            }
        };
        self.finish(&mut out);
        Ok(out)
    }

    /// Two paths with one complex FFT: the first in the real part, the
    /// second in the imaginary part.
    pub fn synthesize_pair(
        &self,
        a: &InnovationMatrix,
        b: &InnovationMatrix,
        vol: &Volatility,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_inputs(a, vol)?;
        self.check_inputs(b, vol)?;
        if self.method == ConvolutionMethod::Direct {
            return Ok((self.synthesize(a, vol)?, self.synthesize(b, vol)?));
        }
        let (mut x, y) = self.fft_pair(a, Some(b), vol);
        let mut y = y.unwrap_or_default();
        self.add_hybrid(&mut x, a, vol);
        self.add_hybrid(&mut y, b, vol);
        self.finish(&mut x);
        self.finish(&mut y);
        Ok((x, y))
    }

    fn check_inputs(&self, innov: &InnovationMatrix, vol: &Volatility) -> Result<()> {
        let cells = self.plan.innovation_count();
        if innov.rows != cells {
            return Err(Error::LengthMismatch {
                what: "innovation rows",
                expected: cells,
                got: innov.rows,
            });
        }
        if innov.cols != self.cov.dim() {
            return Err(Error::LengthMismatch {
                what: "innovation components",
                expected: self.cov.dim(),
                got: innov.cols,
            });
        }
        vol.check(cells)
    }

    fn finish(&self, out: &mut [f64]) {
        if self.plan.kind() == ProcessKind::Tbss {
            out[0] = 0.0;
        }
        if self.scale != 1.0 {
            out.iter_mut().for_each(|v| *v *= self.scale);
        }
    }

    fn direct(&self, innov: &InnovationMatrix, vol: &Volatility) -> Vec<f64> {
        let off = self.offset();
        let reach = self.step_weights.len() - 1;
        (0..=self.plan.steps())
            .map(|i| {
                let top = i + off;
                let mut x = 0.0;
                for k in 1..=self.plan.kappa().min(top) {
                    let j = top - k;
                    x += self.hybrid_weights[k - 1] * vol.at(j) * innov.get(j, k);
                }
                for k in (self.plan.kappa() + 1)..=reach.min(top) {
                    let j = top - k;
                    x += self.step_weights[k] * vol.at(j) * innov.get(j, 0);
                }
                x
            })
            .collect()
    }

    fn fft_pair(
        &self,
        a: &InnovationMatrix,
        b: Option<&InnovationMatrix>,
        vol: &Volatility,
    ) -> (Vec<f64>, Option<Vec<f64>>) {
        let len = self.gamma_hat.len();
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        let wa = a.component(0);
        for (j, c) in buf.iter_mut().enumerate().take(a.rows) {
            c.re = vol.at(j) * wa[j];
        }
        if let Some(b) = b {
            let wb = b.component(0);
            for (j, c) in buf.iter_mut().enumerate().take(b.rows) {
                c.im = vol.at(j) * wb[j];
            }
        }
        self.forward.process(&mut buf);
        for (c, g) in buf.iter_mut().zip(&self.gamma_hat) {
            *c *= g;
        }
        self.inverse.process(&mut buf);
        let off = self.offset();
        let range = off..=off + self.plan.steps();
        let x = buf[range.clone()].iter().map(|c| c.re).collect();
        let y = b.map(|_| buf[range].iter().map(|c| c.im).collect());
        (x, y)
    }

    fn add_hybrid(&self, out: &mut [f64], innov: &InnovationMatrix, vol: &Volatility) {
        let off = self.offset();
        for (i, x) in out.iter_mut().enumerate() {
            let top = i + off;
            for k in 1..=self.plan.kappa().min(top) {
                let j = top - k;
                *x += self.hybrid_weights[k - 1] * vol.at(j) * innov.get(j, k);
            }
        }
    }

    fn label(&self) -> TrajectoryLabel {
        match self.plan.kind() {
            ProcessKind::Bss => TrajectoryLabel::Bss,
            ProcessKind::Tbss => TrajectoryLabel::Tbss,
        }
    }

    fn trajectory(&self, values: Vec<f64>, seed: u64) -> Trajectory {
        Trajectory {
            values,
            t0: 0.0,
            dt: self.plan.dt(),
            seed,
            label: self.label(),
        }
    }

    /// Path `path` of the ensemble with master seed `seed`.
    pub fn sample_path(&self, seed: u64, path: u64, vol: &Volatility) -> Result<Trajectory> {
        let innov = self.draw_innovations(&mut path_rng(seed, path, STREAM_DRIVER));
        Ok(self.trajectory(self.synthesize(&innov, vol)?, seed))
    }

    pub fn sample(&self, seed: u64, vol: &Volatility) -> Result<Trajectory> {
        self.sample_path(seed, 0, vol)
    }

    /// Paths `0..paths` of the ensemble with master seed `seed`, in parallel.
    /// The output does not depend on the thread count.
    pub fn sample_batch(&self, seed: u64, paths: usize, vol: &Volatility) -> Result<Vec<Trajectory>> {
        let pairs: Vec<_> = (0..paths.div_ceil(2))
            .into_par_iter()
            .map(|p| -> Result<Vec<Trajectory>> {
                let first = 2 * p as u64;
                let a = self.draw_innovations(&mut path_rng(seed, first, STREAM_DRIVER));
                if 2 * p + 1 == paths {
                    return Ok(vec![self.trajectory(self.synthesize(&a, vol)?, seed)]);
                }
                let b = self.draw_innovations(&mut path_rng(seed, first + 1, STREAM_DRIVER));
                let (x, y) = self.synthesize_pair(&a, &b, vol)?;
                Ok(vec![self.trajectory(x, seed), self.trajectory(y, seed)])
            })
            .collect::<Result<_>>()?;
        Ok(pairs.into_iter().flatten().collect())
    }
}

/// One BSS path with unit volatility.
pub fn simulate_bss(plan: &HybridPlan, seed: u64) -> Result<Trajectory> {
    if plan.kind() != ProcessKind::Bss {
        return Err(Error::invariant("BSS plan", "TBSS plan passed to simulate_bss"));
    }
    HybridSimulator::new(plan.clone())?.sample(seed, &Volatility::Unit)
}

/// One TBSS path with unit volatility; the first value is exactly zero.
pub fn simulate_tbss(plan: &HybridPlan, seed: u64) -> Result<Trajectory> {
    if plan.kind() != ProcessKind::Tbss {
        return Err(Error::invariant("TBSS plan", "BSS plan passed to simulate_tbss"));
    }
    HybridSimulator::new(plan.clone())?.sample(seed, &Volatility::Unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::BRule;
    use crate::kernel::KernelSpec;

    fn naive_bss(kernel: &KernelSpec, n: u64, trunc: usize, steps: usize, b: BRule, w: &[f64]) -> Vec<f64> {
        let dt = 1.0 / n as f64;
        (0..=steps)
            .map(|i| {
                let mut x = 0.0;
                for k in 1..=trunc {
                    let cell = i + trunc - k;
                    x += kernel.g(b.eval(kernel.alpha(), k as u64) * dt) * w[cell];
                }
                x
            })
            .collect()
    }

    #[test]
    fn direct_matches_naive_sum_bit_for_bit() {
        let kernel = KernelSpec::gamma(-0.3, 1.0).unwrap();
        let plan = HybridPlan::bss(kernel, 16, 1.0, 0, BRule::Forward)
            .unwrap()
            .with_truncation(64)
            .unwrap();
        let sim = HybridSimulator::new(plan)
            .unwrap()
            .with_method(ConvolutionMethod::Direct);
        let innov = sim.draw_innovations(&mut path_rng(11, 0, STREAM_DRIVER));
        let got = sim.synthesize(&innov, &Volatility::Unit).unwrap();
        let want = naive_bss(&kernel, 16, 64, 16, BRule::Forward, innov.component(0));
        assert_eq!(got, want);
    }

    #[test]
    fn fft_matches_direct() {
        for &(a, kappa, kind) in &[
            (-0.43, 2usize, ProcessKind::Bss),
            (0.3, 1, ProcessKind::Bss),
            (-0.2, 3, ProcessKind::Tbss),
        ] {
            let kernel = KernelSpec::gamma(a, 0.7).unwrap();
            let plan = match kind {
                ProcessKind::Bss => HybridPlan::bss(kernel, 40, 2.0, kappa, BRule::Optimal),
                ProcessKind::Tbss => HybridPlan::tbss(kernel, 40, 2.0, kappa, BRule::Optimal),
            }
            .unwrap();
            let fft = HybridSimulator::new(plan).unwrap();
            let direct = fft.clone().with_method(ConvolutionMethod::Direct);
            let vol = Volatility::Path((0..plan_cells(&fft)).map(|j| 1.0 + 0.5 * (j as f64).sin()).collect());
            let a1 = fft.draw_innovations(&mut path_rng(3, 0, STREAM_DRIVER));
            let a2 = fft.draw_innovations(&mut path_rng(3, 1, STREAM_DRIVER));
            let (x, y) = fft.synthesize_pair(&a1, &a2, &vol).unwrap();
            let dx = direct.synthesize(&a1, &vol).unwrap();
            let dy = direct.synthesize(&a2, &vol).unwrap();
            for (p, q) in x.iter().zip(&dx).chain(y.iter().zip(&dy)) {
                assert!((p - q).abs() < 1e-10, "{p} vs {q}");
            }
        }
    }

    fn plan_cells(sim: &HybridSimulator) -> usize {
        sim.plan().innovation_count()
    }

    #[test]
    fn tbss_starts_at_zero_and_batches_are_deterministic() {
        let kernel = KernelSpec::rbergomi(-0.43).unwrap();
        let plan = HybridPlan::tbss(kernel, 100, 1.0, 2, BRule::Optimal).unwrap();
        let sim = HybridSimulator::new(plan).unwrap();
        let a = sim.sample_batch(5, 7, &Volatility::Unit).unwrap();
        let b = sim.sample_batch(5, 7, &Volatility::Unit).unwrap();
        assert_eq!(a.len(), 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.values[0] == 0.0 && t.len() == 101));
        let single = sim.sample_path(5, 3, &Volatility::Unit).unwrap();
        for (p, q) in single.values.iter().zip(&a[3].values) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_ne!(a[0].values, a[1].values);
    }

    #[test]
    fn nested_kappa_shares_brownian_increments() {
        let kernel = KernelSpec::gamma(-0.3, 1.0).unwrap();
        let mk =
            |kappa| HybridSimulator::new(HybridPlan::bss(kernel, 50, 1.0, kappa, BRule::Optimal).unwrap()).unwrap();
        let (s1, s2) = (mk(1), mk(2));
        let i1 = s1.draw_innovations(&mut path_rng(9, 0, STREAM_DRIVER));
        let i2 = s2.draw_innovations(&mut path_rng(9, 0, STREAM_DRIVER));
        assert_eq!(i1.component(0), i2.component(0));
        for (p, q) in i1.component(1).iter().zip(i2.component(1)) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn innovations_have_the_target_covariance() {
        let cov = innovation_covariance_with_step(-0.3, 0.1, 2).unwrap();
        let m = sample_innovations(&cov, 200_000, &mut path_rng(1, 0, STREAM_DRIVER));
        for a in 0..3 {
            for b in 0..3 {
                let (xa, xb) = (m.component(a), m.component(b));
                let emp = xa.iter().zip(xb).map(|(p, q)| p * q).sum::<f64>() / m.rows as f64;
                let s = cov.sigma[(a, b)];
                let se = ((cov.sigma[(a, a)] * cov.sigma[(b, b)] + s * s) / m.rows as f64).sqrt();
                assert!((emp - s).abs() < 4.0 * se, "({a},{b}): {emp} vs {s}");
            }
        }
    }

    #[test]
    fn input_checks() {
        let kernel = KernelSpec::gamma(-0.3, 1.0).unwrap();
        let sim = HybridSimulator::new(HybridPlan::bss(kernel, 10, 1.0, 1, BRule::Optimal).unwrap()).unwrap();
        let innov = sim.draw_innovations(&mut path_rng(0, 0, STREAM_DRIVER));
        let short = Volatility::Path(vec![1.0; 3]);
        assert!(matches!(
            sim.synthesize(&innov, &short),
            Err(Error::LengthMismatch { .. })
        ));
        let tbss = HybridPlan::tbss(kernel, 10, 1.0, 1, BRule::Optimal).unwrap();
        assert!(simulate_bss(&tbss, 0).is_err());
        assert!(simulate_tbss(&tbss, 0).is_ok());
    }
}
