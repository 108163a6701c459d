//! Monte Carlo pricing of European calls under the rough Bergomi model
//!
//! `v(t) = ξ exp(η Y(t) - η²/2 · t^{2α+1})`, `Y(t) = √(2α+1) ∫_0^t (t-s)^α dW(s)`,
//! `dS = S √v dZ` with `Z = ρW + √(1-ρ²) W⊥`, zero rates.

use std::fmt;

use rayon::prelude::*;
use roots::{find_root_brent, Convergency};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::exact::JointVolterra;
use crate::hybrid::{BRule, HybridPlan, HybridSimulator, Volatility};
use crate::kernel::KernelSpec;
use crate::rng::{fill_normals, path_rng, STREAM_DRIVER, STREAM_ORTHOGONAL};
use crate::stats::Moments;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RBergomiParams {
    pub s0: f64,
    pub xi: f64,
    pub eta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub maturity: f64,
}

impl RBergomiParams {
    pub fn new(s0: f64, xi: f64, eta: f64, alpha: f64, rho: f64, maturity: f64) -> Result<Self> {
        let checks: [(&'static str, bool, f64); 6] = [
            ("s0 > 0", s0 > 0.0, s0),
            ("xi > 0", xi > 0.0, xi),
            ("eta > 0", eta > 0.0, eta),
            ("alpha in (-1/2, 0)", alpha > -0.5 && alpha < 0.0, alpha),
            ("rho in (-1, 1)", rho > -1.0 && rho < 1.0, rho),
            ("T > 0", maturity > 0.0 && maturity.is_finite(), maturity),
        ];
        for (name, ok, value) in checks {
            if !ok {
                return Err(Error::invariant(name, format!("got {value}")));
            }
        }
        Ok(Self {
            s0,
            xi,
            eta,
            alpha,
            rho,
            maturity,
        })
    }

    /// `S0 = 1, ξ = 0.235², η = 1.9, α = -0.43, ρ = -0.9`.
    pub fn reference(maturity: f64) -> Result<Self> {
        Self::new(1.0, 0.235 * 0.235, 1.9, -0.43, -0.9, maturity)
    }

    pub fn with_maturity(self, maturity: f64) -> Result<Self> {
        Self::new(self.s0, self.xi, self.eta, self.alpha, self.rho, maturity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    HybridK1,
    HybridK2,
    RiemannFwd,
    RiemannOpt,
    Exact,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::HybridK1,
        Scheme::HybridK2,
        Scheme::RiemannFwd,
        Scheme::RiemannOpt,
        Scheme::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::HybridK1 => "hybrid-k1",
            Scheme::HybridK2 => "hybrid-k2",
            Scheme::RiemannFwd => "riemann-fwd",
            Scheme::RiemannOpt => "riemann-opt",
            Scheme::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    fn hybrid(self) -> Option<(usize, BRule)> {
        match self {
            Scheme::HybridK1 => Some((1, BRule::Optimal)),
            Scheme::HybridK2 => Some((2, BRule::Optimal)),
            Scheme::RiemannFwd => Some((0, BRule::Forward)),
            Scheme::RiemannOpt => Some((0, BRule::Optimal)),
            Scheme::Exact => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

enum Driver {
    Hybrid(Box<HybridSimulator>),
    Exact(JointVolterra),
}

/// One simulated path on the grid `t_i = iT/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPath {
    /// `v(t_i)`, `i = 0..=n`.
    pub variance: Vec<f64>,
    /// `S(t_i)`, `i = 0..=n`.
    pub spot: Vec<f64>,
}

/// A prepared simulator for one parameter set, grid and scheme.
pub struct RBergomiEngine {
    params: RBergomiParams,
    steps: usize,
    scheme: Scheme,
    driver: Driver,
    antithetic: bool,
}

impl RBergomiEngine {
    pub fn new(params: RBergomiParams, steps: usize, scheme: Scheme) -> Result<Self> {
        if steps < 2 {
            return Err(Error::invariant("n >= 2", format!("n = {steps}")));
        }
        let driver = match scheme.hybrid() {
            Some((kappa, rule)) => {
                let kernel = KernelSpec::rbergomi(params.alpha)?;
                let plan = HybridPlan::tbss_over(kernel, steps, params.maturity, kappa, rule)?;
                Driver::Hybrid(Box::new(HybridSimulator::new(plan)?))
            }
            None => {
                let scale = (2.0 * params.alpha + 1.0).sqrt();
                Driver::Exact(JointVolterra::new(params.alpha, scale, steps, params.maturity)?)
            }
        };
        Ok(Self {
            params,
            steps,
            scheme,
            driver,
            antithetic: false,
        })
    }

    /// Negates every Gaussian draw; `Y` is linear in them, so this yields the
    /// antithetic path of each seed.
    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    pub fn params(&self) -> &RBergomiParams {
        &self.params
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `(ΔW, Y)` for path `path` of the ensemble with master seed `seed`.
    fn driver_path(&self, seed: u64, path: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rng = path_rng(seed, path, STREAM_DRIVER);
        match &self.driver {
            Driver::Hybrid(sim) => {
                let innov = sim.draw_innovations(&mut rng);
                let y = sim.synthesize(&innov, &Volatility::Unit)?;
                Ok((innov.component(0).to_vec(), y))
            }
            Driver::Exact(joint) => Ok(joint.sample(&mut rng)),
        }
    }

    pub fn sample_path(&self, seed: u64, path: u64) -> Result<ModelPath> {
        let p = &self.params;
        let n = self.steps;
        let dt = p.maturity / n as f64;
        let (mut dw, mut y) = self.driver_path(seed, path)?;
        let mut perp = vec![0.0; n];
        fill_normals(&mut path_rng(seed, path, STREAM_ORTHOGONAL), &mut perp);
        if self.antithetic {
            for v in dw.iter_mut().chain(y.iter_mut()).chain(perp.iter_mut()) {
                *v = -*v;
            }
        }
        let root_dt = dt.sqrt();
        let orth = (1.0 - p.rho * p.rho).sqrt();
        let h2 = 2.0 * p.alpha + 1.0;
        let variance: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 * dt;
                p.xi * (p.eta * y[i] - 0.5 * p.eta * p.eta * t.powf(h2)).exp()
            })
            .collect();
        let mut spot = Vec::with_capacity(n + 1);
        let mut log_s = p.s0.ln();
        spot.push(p.s0);
        for i in 0..n {
            let v = variance[i];
            let dz = p.rho * dw[i] + orth * root_dt * perp[i];
            log_s += v.sqrt() * dz - 0.5 * v * dt;
            spot.push(log_s.exp());
        }
        Ok(ModelPath { variance, spot })
    }

    /// `S(T)` for paths `0..paths`, in path order.
    pub fn terminal_prices(&self, seed: u64, paths: usize) -> Result<Vec<f64>> {
        (0..paths as u64)
            .into_par_iter()
            .map(|p| Ok(*self.sample_path(seed, p)?.spot.last().unwrap_or(&f64::NAN)))
            .collect()
    }
}

pub fn simulate_rbergomi_paths(
    params: &RBergomiParams,
    steps: usize,
    paths: usize,
    scheme: Scheme,
    seed: u64,
) -> Result<Vec<f64>> {
    if paths == 0 {
        return Err(Error::invariant("paths >= 1", "paths = 0"));
    }
    RBergomiEngine::new(*params, steps, scheme)?.terminal_prices(seed, paths)
}

/// Sample mean of `(S(T) - K)⁺` and its standard error.
pub fn price_call(terminal: &[f64], strike: f64) -> Result<(f64, f64)> {
    if terminal.is_empty() {
        return Err(Error::invariant("non-empty sample", "no terminal prices"));
    }
    if !(strike >= 0.0) {
        return Err(Error::domain(format!("strike {strike} must be >= 0")));
    }
    let m: Moments = terminal.iter().map(|s| (s - strike).max(0.0)).collect();
    Ok((m.mean(), m.stderr()))
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Zero-rate Black–Scholes call price.
pub fn black_scholes_call(s0: f64, strike: f64, maturity: f64, sigma: f64) -> f64 {
    let sd = sigma * maturity.sqrt();
    if sd <= 0.0 {
        return (s0 - strike).max(0.0);
    }
    let d1 = ((s0 / strike).ln() + 0.5 * sd * sd) / sd;
    s0 * norm_cdf(d1) - strike * norm_cdf(d1 - sd)
}

/// `∂C/∂σ` of the zero-rate Black–Scholes call.
pub fn black_scholes_vega(s0: f64, strike: f64, maturity: f64, sigma: f64) -> f64 {
    let sd = sigma * maturity.sqrt();
    let d1 = ((s0 / strike).ln() + 0.5 * sd * sd) / sd;
    s0 * (-0.5 * d1 * d1).exp() / (2.0 * std::f64::consts::PI).sqrt() * maturity.sqrt()
}

/// Why a price has no implied volatility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvFailure {
    /// Price at or below `(S0 - K)⁺`.
    BelowIntrinsic,
    /// Price at or above `S0`.
    AboveSpot,
    /// Root not bracketed by `[1e-6, 5]` or search did not converge.
    NoRoot,
}

impl fmt::Display for IvFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IvFailure::BelowIntrinsic => "price at or below intrinsic value",
            IvFailure::AboveSpot => "price at or above spot",
            IvFailure::NoRoot => "no root in [1e-6, 5]",
        })
    }
}

pub const IV_BRACKET: (f64, f64) = (1e-6, 5.0);

struct PriceTolerance(f64);

impl Convergency<f64> for PriceTolerance {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() < self.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() < 1e-14
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter > 200
    }
}

/// Black–Scholes implied volatility of a zero-rate call price.
pub fn implied_vol(price: f64, s0: f64, strike: f64, maturity: f64) -> Result<std::result::Result<f64, IvFailure>> {
    if !(maturity > 0.0) || !(strike > 0.0) || !(s0 > 0.0) {
        return Err(Error::domain(format!(
            "implied volatility needs T, K, S0 > 0 (T = {maturity}, K = {strike}, S0 = {s0})"
        )));
    }
    if price <= (s0 - strike).max(0.0) {
        return Ok(Err(IvFailure::BelowIntrinsic));
    }
    if price >= s0 {
        return Ok(Err(IvFailure::AboveSpot));
    }
    // 1e-10 in price, tightened for prices small enough that it would
    // leave the volatility undetermined.
    let mut tol = PriceTolerance(1e-10_f64.min(1e-6 * price));
    let f = |s: f64| black_scholes_call(s0, strike, maturity, s) - price;
    Ok(find_root_brent(IV_BRACKET.0, IV_BRACKET.1, f, &mut tol).map_err(|_| IvFailure::NoRoot))
}

/// One strike of a Monte Carlo smile.
#[derive(Debug, Clone, PartialEq)]
pub struct SmileRow {
    pub log_strike: f64,
    pub strike: f64,
    pub price: f64,
    pub mc_stderr: f64,
    pub implied_vol: std::result::Result<f64, IvFailure>,
    /// Delta-method standard error `stderr / vega` of the implied volatility.
    pub iv_stderr: Option<f64>,
}

/// Prices and implied volatilities on `log_strikes` from one set of paths.
pub fn smile_from_terminal(params: &RBergomiParams, terminal: &[f64], log_strikes: &[f64]) -> Result<Vec<SmileRow>> {
    log_strikes
        .iter()
        .map(|&k| {
            let strike = params.s0 * k.exp();
            let (price, mc_stderr) = price_call(terminal, strike)?;
            let implied_vol = implied_vol(price, params.s0, strike, params.maturity)?;
            let iv_stderr = implied_vol
                .as_ref()
                .ok()
                .map(|&iv| mc_stderr / black_scholes_vega(params.s0, strike, params.maturity, iv));
            Ok(SmileRow {
                log_strike: k,
                strike,
                price,
                mc_stderr,
                implied_vol,
                iv_stderr,
            })
        })
        .collect()
}

pub fn smile(
    params: &RBergomiParams,
    steps: usize,
    paths: usize,
    scheme: Scheme,
    log_strikes: &[f64],
    seed: u64,
) -> Result<Vec<SmileRow>> {
    let terminal = simulate_rbergomi_paths(params, steps, paths, scheme, seed)?;
    smile_from_terminal(params, &terminal, log_strikes)
}

/// 25 equispaced log-strikes on `[-0.05, 0.03]` for `T < 0.5` and on
/// `[-0.4, 0.2]` otherwise.
pub fn default_log_strikes(maturity: f64) -> Vec<f64> {
    let (lo, hi) = if maturity < 0.5 { (-0.05, 0.03) } else { (-0.4, 0.2) };
    // Rounded to 1e-12 so the at-the-money point is exactly zero.
    (0..25)
        .map(|i| ((lo + (hi - lo) * i as f64 / 24.0) * 1e12).round() / 1e12)
        .collect()
}
