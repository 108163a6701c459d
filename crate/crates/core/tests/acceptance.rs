//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantities and the wall-clock time against each criterion's budget.
//!
//! Runs with `cargo test -p bss-core --test acceptance`. The process exits
//! successfully in report mode; set `ACCEPTANCE_STRICT=1` to turn any FAIL
//! line into a non-zero exit status.

use std::time::{Duration, Instant};

use bss_core::analysis::{
    analytic_mse, cof_experiment, j_functional, rmse_reduction, theoretical_mse, CofExperiment, CofScheme, JQuery,
};
use bss_core::hybrid::{innovation_covariance, ConvolutionMethod, InnovationMatrix};
use bss_core::rbergomi::{default_log_strikes, smile, RBergomiEngine, RBergomiParams, Scheme, SmileRow};
use bss_core::rng::{fill_normals, path_rng, STREAM_DRIVER};
use bss_core::specfun::{hyp2f1, zeta};
use bss_core::stats::Moments;
use bss_core::{b_optimal, BRule, HybridPlan, HybridSimulator, KernelSpec, Volatility};
use quadrature::double_exponential;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let in_time = took <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] {id}. {name}: {} ({:.1} s of {} s budget{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" },
    );
    pass
}

fn main() {
    println!("acceptance suite");
    let results = [
        run(
            1,
            "innovation covariance vs isometry quadrature",
            Duration::from_secs(10),
            covariance_fidelity,
        ),
        run(
            2,
            "RMSE reduction bounds (kappa=1, optimal, N=1e6)",
            Duration::from_secs(120),
            reduction_bounds,
        ),
        run(3, "analytic MSE vs asymptotic rate", Duration::from_secs(300), mse_rate),
        run(4, "COF estimator bias", Duration::from_secs(600), cof_bias),
        run(5, "rough Bergomi smile", Duration::from_secs(900), rbergomi_smile),
        run(6, "property suites", Duration::from_secs(300), property_suites),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < results.len() {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1

/// `∫_0^Δ f_a f_b` with `f_0 = 1`, `f_c(w) = ((c-1)Δ + w)^α`; the singular
/// factor `w^α` of component 1 is removed by `w = Δ·v^{1/(e+1)}`.
fn isometry_oracle(alpha: f64, dt: f64, a: usize, b: usize) -> f64 {
    let e = [a, b].iter().filter(|&&c| c == 1).count() as f64 * alpha;
    let regular = |w: f64| {
        [a, b]
            .iter()
            .map(|&c| {
                if c <= 1 {
                    1.0
                } else {
                    ((c - 1) as f64 * dt + w).powf(alpha)
                }
            })
            .product::<f64>()
    };
    let mapped = |v: f64| regular(dt * v.powf(1.0 / (e + 1.0)));
    dt.powf(e + 1.0) / (e + 1.0) * double_exponential::integrate(mapped, 0.0, 1.0, 1e-15).integral
}

fn covariance_fidelity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    for &alpha in &[-0.43, -0.25, 0.25, 0.49] {
        for &n in &[10u64, 100] {
            for kappa in 1..=3 {
                let cov = match innovation_covariance(alpha, n, kappa) {
                    Ok(c) => c,
                    Err(e) => return Outcome::new(false, format!("alpha {alpha}, n {n}, kappa {kappa}: {e}")),
                };
                let dt = 1.0 / n as f64;
                for a in 0..=kappa {
                    for b in 0..=kappa {
                        let want = isometry_oracle(alpha, dt, a, b);
                        worst = worst.max(((cov.sigma[(a, b)] - want) / want).abs());
                        entries += 1;
                    }
                }
            }
        }
    }
    Outcome::new(
        worst <= 1e-9,
        format!("{entries} entries, max relative error {worst:.2e} (tolerance 1e-9)"),
    )
}

// ---------------------------------------------------------------- 2

fn reduction_bounds() -> Outcome {
    let grid = |lo: f64| -> Vec<f64> { (0..25).map(|i| lo + 0.02 * i as f64).collect() };
    let mut min_neg = f64::INFINITY;
    let mut min_pos = f64::INFINITY;
    let mut at_edge = f64::NAN;
    for (alphas, min) in [(grid(-0.49), &mut min_neg), (grid(0.01), &mut min_pos)] {
        for a in alphas {
            let r = match rmse_reduction(a, 1, BRule::Optimal, 1_000_000) {
                Ok(r) => r,
                Err(e) => return Outcome::new(false, format!("alpha {a}: {e}")),
            };
            *min = min.min(r);
            if (a + 0.49).abs() < 1e-12 {
                at_edge = r;
            }
        }
    }
    Outcome::new(
        min_neg >= 80.0 && min_pos >= 50.0 && at_edge > 95.0,
        format!(
            "min over alpha<0 {min_neg:.2}% (>= 80), min over alpha>0 {min_pos:.2}% (>= 50), \
             at alpha=-0.49 {at_edge:.2}% (> 95)"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn mse_rate() -> Outcome {
    let ns = [256u64, 512, 1024, 2048, 4096];
    let mut pass = true;
    let mut parts = Vec::new();
    for &alpha in &[-0.43, 0.25] {
        let kernel = KernelSpec::gamma(alpha, 1.0).unwrap();
        for kappa in 0..=1 {
            let mut x = Vec::new();
            let mut y = Vec::new();
            let mut ratio = f64::NAN;
            for &n in &ns {
                let plan = HybridPlan::bss(kernel, n, 1.0, kappa, BRule::Optimal).unwrap();
                let mse = match analytic_mse(&plan) {
                    Ok(b) => b.total(),
                    Err(e) => return Outcome::new(false, format!("alpha {alpha}, n {n}: {e}")),
                };
                let lg = kernel.lg(1.0 / n as f64);
                x.push((n as f64).ln());
                y.push((mse / (lg * lg)).ln());
                if n == 4096 {
                    ratio = mse / theoretical_mse(&plan, 1.0).unwrap();
                }
            }
            let slope = ols_slope(&x, &y);
            let target = -(2.0 * alpha + 1.0);
            let ok = (0.8..=1.2).contains(&ratio) && (slope - target).abs() <= 0.05;
            pass &= ok;
            parts.push(format!(
                "a={alpha} k={kappa}: ratio {ratio:.4}, slope {slope:.4} vs {target:.2}{}",
                if ok { "" } else { " [out of tolerance]" }
            ));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------- 4

fn cof_bias() -> Outcome {
    let run = |alpha: f64, scheme: CofScheme, seed: u64| {
        cof_experiment(&CofExperiment {
            kernel: KernelSpec::gamma(alpha, 1.0).unwrap(),
            scheme,
            m: 500,
            s: 1,
            replications: 1000,
            seed,
        })
    };
    let hybrid = CofScheme::Hybrid {
        kappa: 1,
        b_rule: BRule::Optimal,
    };
    let riemann = CofScheme::Hybrid {
        kappa: 0,
        b_rule: BRule::Forward,
    };
    let rows = (|| -> bss_core::Result<_> {
        Ok((
            run(-0.43, CofScheme::Exact, 31)?,
            run(0.25, CofScheme::Exact, 32)?,
            run(-0.43, hybrid, 33)?,
            run(-0.43, riemann, 34)?,
        ))
    })();
    let (ex_neg, ex_pos, hy, ri) = match rows {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let pass = ex_neg.bias.abs() <= 0.02
        && ex_pos.bias.abs() <= 0.02
        && hy.bias.abs() <= 0.03
        && ri.bias > 0.0
        && ri.bias >= 3.0 * hy.bias.abs();
    Outcome::new(
        pass,
        format!(
            "exact bias {:+.4} (a=-0.43), {:+.4} (a=0.25); hybrid k=1 {:+.4}; riemann fwd {:+.4} \
             ({:.1}x hybrid); bias stderr ~{:.4}",
            ex_neg.bias,
            ex_pos.bias,
            hy.bias,
            ri.bias,
            ri.bias / hy.bias.abs(),
            hy.bias_stderr
        ),
    )
}

// ---------------------------------------------------------------- 5

/// `|IV_a - IV_b| / √(se_a² + se_b²)` on strikes where both are defined.
fn z_scores(a: &[SmileRow], b: &[SmileRow]) -> Vec<(f64, f64)> {
    a.iter()
        .zip(b)
        .filter_map(
            |(x, y)| match (x.implied_vol, y.implied_vol, x.iv_stderr, y.iv_stderr) {
                (Ok(u), Ok(v), Some(su), Some(sv)) => Some((x.log_strike, (u - v).abs() / (su * su + sv * sv).sqrt())),
                _ => None,
            },
        )
        .collect()
}

fn atm_z(z: &[(f64, f64)]) -> f64 {
    z.iter()
        .min_by(|p, q| p.0.abs().total_cmp(&q.0.abs()))
        .map_or(f64::NAN, |p| p.1)
}

fn rbergomi_smile() -> Outcome {
    const PATHS: usize = 100_000;
    const STEPS: usize = 500;
    const EXACT_SEED: u64 = 20240;
    const HYBRID_SEED: u64 = 20241;
    let mut pass = true;
    let mut parts = Vec::new();
    for &maturity in &[0.041, 1.0] {
        let params = RBergomiParams::reference(maturity).unwrap();
        let ks = default_log_strikes(maturity);
        let sm = |scheme, seed| smile(&params, STEPS, PATHS, scheme, &ks, seed);
        let all = (|| -> bss_core::Result<_> {
            Ok((
                sm(Scheme::Exact, EXACT_SEED)?,
                sm(Scheme::HybridK1, HYBRID_SEED)?,
                sm(Scheme::HybridK1, EXACT_SEED)?,
                sm(Scheme::RiemannFwd, HYBRID_SEED)?,
                sm(Scheme::RiemannOpt, HYBRID_SEED)?,
            ))
        })();
        let (exact, k1, k1_crn, fwd, opt) = match all {
            Ok(r) => r,
            Err(e) => return Outcome::new(false, e.to_string()),
        };
        let zk1 = z_scores(&k1, &exact);
        let worst = zk1.iter().map(|p| p.1).fold(0.0, f64::max);
        let worst_crn = z_scores(&k1_crn, &exact).iter().map(|p| p.1).fold(0.0, f64::max);
        let (zf, zo) = (atm_z(&z_scores(&fwd, &exact)), atm_z(&z_scores(&opt, &exact)));
        let ok = !zk1.is_empty() && worst <= 2.0 && zf > 5.0 && zo > 5.0;
        pass &= ok;
        parts.push(format!(
            "T={maturity}: hybrid k=1 max {worst:.2} SE over {} strikes (same-seed {worst_crn:.2}), \
             riemann ATM fwd {zf:.1} SE, opt {zo:.1} SE",
            zk1.len()
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------- 6

fn hyp2f1_oracle(alpha: f64, z: f64) -> f64 {
    // (α+1)∫_0^1 (1-y)^α (1-zy)^α dy under 1 - y = u^{1/(2α+1)}, which makes
    // the integrand bounded at z = 1. The factor (1 - z + z·w)^α is written
    // as w^α(z + (1-z)/w)^α wherever z·w dominates to avoid underflow of w.
    let q = 1.0 / (2.0 * alpha + 1.0);
    let p = (alpha + 1.0) * q;
    let f = |u: f64| {
        let w = u.powf(q);
        if z * w >= 1.0 - z {
            let rest = if z < 1.0 { (1.0 - z) * u.powf(-q) } else { 0.0 };
            p * u.powf(p - 1.0 + alpha * q) * (z + rest).powf(alpha)
        } else {
            p * u.powf(p - 1.0) * (1.0 - z + z * w).powf(alpha)
        }
    };
    // Split around the crossover z·w = 1 - z.
    let knee = ((1.0 - z) / z.max(1e-300)).powf(2.0 * alpha + 1.0).clamp(1e-300, 1.0);
    let mut total = 0.0;
    let mut lo = 0.0;
    for hi in [knee * 1e-3, knee, knee * 1e3, 1.0] {
        let hi = hi.min(1.0);
        if hi > lo {
            total += double_exponential::integrate(f, lo, hi, 1e-15).integral;
            lo = hi;
        }
    }
    total
}

fn naive_bss(sim: &HybridSimulator, w: &InnovationMatrix) -> Vec<f64> {
    let plan = sim.plan();
    let (kernel, dt, trunc, kappa) = (plan.kernel(), plan.dt(), plan.truncation(), plan.kappa());
    (0..=plan.steps())
        .map(|i| {
            let mut x = 0.0;
            for k in 1..=trunc {
                let cell = i + trunc - k;
                x += if k <= kappa {
                    kernel.lg(k as f64 * dt) * w.get(cell, k)
                } else {
                    kernel.g(plan.b_sequence(k as u64).unwrap() * dt) * w.get(cell, 0)
                };
            }
            x
        })
        .collect()
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let (c, d) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    0.5 * (lo + hi)
}

fn property_suites() -> Outcome {
    let mut failures = Vec::new();
    let mut report = Vec::new();

    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let alpha = -0.49 + 0.98 * i as f64 / 19.0;
        for j in 0..20 {
            let z = j as f64 / 19.0;
            let got = hyp2f1(alpha, z).unwrap();
            worst = worst.max(((got - hyp2f1_oracle(alpha, z)) / got).abs());
        }
    }
    report.push(format!("2F1 {worst:.1e}"));
    if worst > 1e-10 {
        failures.push("2F1 oracle");
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let x = rng.gen_range(1.05..4.0);
        let s = rng.gen_range(0.05..200.0);
        let lhs = zeta(x, s).unwrap();
        let rhs = zeta(x, s + 1.0).unwrap() + s.powf(-x);
        worst = worst.max(((lhs - rhs) / lhs).abs());
    }
    report.push(format!("zeta recurrence {worst:.1e}"));
    if worst > 1e-12 {
        failures.push("Hurwitz recurrence");
    }

    let mut worst: f64 = 0.0;
    for &alpha in &[-0.43, 0.25] {
        let kernel = KernelSpec::gamma(alpha, 1.0).unwrap();
        for &n in &[16u64, 32, 64] {
            for kappa in 0..=2 {
                let plan = HybridPlan::bss(kernel, n, 1.0, kappa, BRule::Optimal)
                    .unwrap()
                    .with_normalization(false);
                let sim = HybridSimulator::new(plan).unwrap();
                let w = sim.draw_innovations(&mut path_rng(n, kappa as u64, STREAM_DRIVER));
                let fft = sim.synthesize(&w, &Volatility::Unit).unwrap();
                for (a, b) in fft.iter().zip(naive_bss(&sim, &w)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    report.push(format!("fft vs naive {worst:.1e}"));
    if worst > 1e-10 {
        failures.push("FFT vs naive");
    }

    let mut worst: f64 = 0.0;
    for &alpha in &[-0.49, -0.43, -0.1, 0.1, 0.25, 0.49] {
        for k in [2u64, 3, 10] {
            let (lo, hi) = ((k - 1) as f64, k as f64);
            let mean = double_exponential::integrate(|y: f64| y.powf(alpha), lo, hi, 1e-15).integral;
            let oracle = golden_section(|c: f64| (c.powf(alpha) - mean).powi(2), lo, hi);
            worst = worst.max((b_optimal(alpha, k) - oracle).abs());
        }
    }
    report.push(format!("b* {worst:.1e}"));
    if worst > 1e-8 {
        failures.push("b* golden section");
    }

    let mut dominated = true;
    for i in 0..10 {
        let alpha = -0.45 + 0.1 * i as f64;
        if alpha.abs() < 1e-9 {
            continue;
        }
        for kappa in 0..=3 {
            let j = |rule| j_functional(&JQuery::new(alpha, kappa, rule).unwrap().with_terms(10_000).unwrap());
            dominated &= j(BRule::Optimal) < j(BRule::Forward);
        }
    }
    report.push(format!("optimal < forward {dominated}"));
    if !dominated {
        failures.push("optimal dominance");
    }

    let (mart_z, logn_z) = rbergomi_martingale();
    report.push(format!("martingale {mart_z:.2} SE, eta->0 lognormal {logn_z:.2} SE"));
    if mart_z > 4.0 {
        failures.push("martingale");
    }
    if logn_z > 4.0 {
        failures.push("eta->0 lognormal");
    }

    let same = determinism();
    report.push(format!("byte-identical reruns {same}"));
    if !same {
        failures.push("determinism");
    }

    let detail = if failures.is_empty() {
        report.join(", ")
    } else {
        format!("{} [failed: {}]", report.join(", "), failures.join(", "))
    };
    Outcome::new(failures.is_empty(), detail)
}

/// Worst martingale z-score over the schemes, and the largest z-score of the
/// near-lognormal moments of `log S(T)` for vanishing `η`.
fn rbergomi_martingale() -> (f64, f64) {
    let params = RBergomiParams::reference(1.0).unwrap();
    let mut mart: f64 = 0.0;
    for scheme in [Scheme::HybridK1, Scheme::RiemannFwd, Scheme::Exact] {
        let steps = if scheme == Scheme::Exact { 100 } else { 200 };
        let s: Moments = RBergomiEngine::new(params, steps, scheme)
            .unwrap()
            .terminal_prices(71, 20_000)
            .unwrap()
            .into_iter()
            .collect();
        mart = mart.max((s.mean() - params.s0).abs() / s.stderr());
    }
    let flat = RBergomiParams::new(1.0, 0.04, 1e-8, -0.43, -0.9, 1.0).unwrap();
    let logs: Moments = RBergomiEngine::new(flat, 200, Scheme::HybridK1)
        .unwrap()
        .terminal_prices(72, 20_000)
        .unwrap()
        .into_iter()
        .map(f64::ln)
        .collect();
    let n = logs.count() as f64;
    let var = flat.xi * flat.maturity;
    let mean_z = (logs.mean() + 0.5 * var).abs() / (var / n).sqrt();
    // Var of the sample variance of a normal sample: 2σ⁴/(n-1).
    let var_z = (logs.variance() - var).abs() / (2.0 * var * var / (n - 1.0)).sqrt();
    (mart, mean_z.max(var_z))
}

fn determinism() -> bool {
    let plan = HybridPlan::bss(KernelSpec::gamma(-0.43, 1.0).unwrap(), 256, 1.0, 2, BRule::Optimal).unwrap();
    let bytes = |method| {
        let sim = HybridSimulator::new(plan.clone()).unwrap().with_method(method);
        let mut out = Vec::new();
        for t in sim.sample_batch(99, 7, &Volatility::Unit).unwrap() {
            t.write_raw(&mut out).unwrap();
        }
        out
    };
    let smile_bytes = || {
        let p = RBergomiParams::reference(0.041).unwrap();
        smile(&p, 100, 2000, Scheme::HybridK2, &default_log_strikes(0.041), 5)
            .unwrap()
            .iter()
            .flat_map(|r| r.price.to_le_bytes())
            .collect::<Vec<u8>>()
    };
    let mut z = vec![0.0; 16];
    fill_normals(&mut path_rng(1, 2, STREAM_DRIVER), &mut z);
    let mut z2 = vec![0.0; 16];
    fill_normals(&mut path_rng(1, 2, STREAM_DRIVER), &mut z2);
    bytes(ConvolutionMethod::Fft) == bytes(ConvolutionMethod::Fft)
        && bytes(ConvolutionMethod::Direct) == bytes(ConvolutionMethod::Direct)
        && smile_bytes() == smile_bytes()
        && z == z2
}
