//! Model-level checks of the rough Bergomi simulator.

use bss_core::rbergomi::{implied_vol, price_call, smile_from_terminal, IvFailure, RBergomiEngine};
use bss_core::stats::Moments;
use bss_core::{RBergomiParams, Scheme};

fn reference() -> RBergomiParams {
    RBergomiParams::reference(1.0).unwrap()
}

#[test]
fn forward_variance_is_flat() {
    let p = reference();
    for scheme in [Scheme::HybridK1, Scheme::Exact] {
        let engine = RBergomiEngine::new(p, 100, scheme).unwrap();
        let paths: Vec<_> = (0..20_000).map(|i| engine.sample_path(301, i).unwrap()).collect();
        for idx in [25, 50, 100] {
            let v: Moments = paths.iter().map(|m| m.variance[idx]).collect();
            let z = (v.mean() - p.xi) / v.stderr();
            assert!(
                z.abs() < 4.0,
                "{scheme} at step {idx}: {} vs {}, z = {z}",
                v.mean(),
                p.xi
            );
        }
    }
}

#[test]
fn spot_is_a_martingale() {
    let p = reference();
    for scheme in Scheme::ALL {
        let steps = if scheme == Scheme::Exact { 100 } else { 300 };
        let s: Moments = RBergomiEngine::new(p, steps, scheme)
            .unwrap()
            .terminal_prices(302, 40_000)
            .unwrap()
            .into_iter()
            .collect();
        let z = (s.mean() - p.s0) / s.stderr();
        assert!(z.abs() < 4.0, "{scheme}: z = {z}");
    }
}

#[test]
fn vanishing_vol_of_vol_is_lognormal() {
    let p = RBergomiParams::new(1.0, 0.04, 1e-8, -0.43, -0.9, 2.0).unwrap();
    let logs: Moments = RBergomiEngine::new(p, 100, Scheme::HybridK2)
        .unwrap()
        .terminal_prices(303, 40_000)
        .unwrap()
        .into_iter()
        .map(f64::ln)
        .collect();
    let var = p.xi * p.maturity;
    let n = logs.count() as f64;
    assert!(((logs.mean() + 0.5 * var) / (var / n).sqrt()).abs() < 4.0);
    assert!(((logs.variance() - var) / (2.0 * var * var / (n - 1.0)).sqrt()).abs() < 4.0);
    // Flat variance: every path has v ≡ ξ to the precision of η.
    let path = RBergomiEngine::new(p, 100, Scheme::HybridK2)
        .unwrap()
        .sample_path(303, 0)
        .unwrap();
    assert!(path.variance.iter().all(|v| (v - p.xi).abs() < 1e-6));
}

#[test]
fn antithetic_paths_mirror_the_draws() {
    let p = reference();
    let plain = RBergomiEngine::new(p, 200, Scheme::HybridK1).unwrap();
    let anti = RBergomiEngine::new(p, 200, Scheme::HybridK1)
        .unwrap()
        .with_antithetic(true);
    let a = plain.sample_path(304, 9).unwrap();
    let b = anti.sample_path(304, 9).unwrap();
    assert_ne!(a.spot, b.spot);
    // log v_t - log ξ + η²t^{2α+1}/2 = ηY_t flips sign.
    let drift = |i: usize| {
        let t = i as f64 / 200.0;
        0.5 * p.eta * p.eta * t.powf(2.0 * p.alpha + 1.0)
    };
    for i in 0..=200 {
        let ya = (a.variance[i] / p.xi).ln() + drift(i);
        let yb = (b.variance[i] / p.xi).ln() + drift(i);
        assert!((ya + yb).abs() < 1e-9, "step {i}: {ya} vs {yb}");
    }
    let pooled: Moments = plain
        .terminal_prices(304, 20_000)
        .unwrap()
        .into_iter()
        .chain(anti.terminal_prices(304, 20_000).unwrap())
        .collect();
    // Antithetic pairs are negatively correlated, so the i.i.d. SE is conservative.
    assert!(((pooled.mean() - p.s0) / pooled.stderr()).abs() < 4.0);
}

#[test]
fn call_prices_are_monotone_convex_and_skewed() {
    let p = reference();
    let terminal = RBergomiEngine::new(p, 200, Scheme::HybridK1)
        .unwrap()
        .terminal_prices(305, 40_000)
        .unwrap();
    let strikes: Vec<f64> = (0..21).map(|i| -0.4 + 0.03 * i as f64).collect();
    let prices: Vec<f64> = strikes
        .iter()
        .map(|k| price_call(&terminal, p.s0 * k.exp()).unwrap().0)
        .collect();
    for w in prices.windows(2) {
        assert!(w[1] <= w[0]);
    }
    let ks: Vec<f64> = strikes.iter().map(|k| p.s0 * k.exp()).collect();
    for i in 1..ks.len() - 1 {
        // Convexity on a non-uniform grid: the chord lies above the price.
        let lam = (ks[i + 1] - ks[i]) / (ks[i + 1] - ks[i - 1]);
        let chord = lam * prices[i - 1] + (1.0 - lam) * prices[i + 1];
        assert!(prices[i] <= chord + 1e-12, "strike {}", ks[i]);
    }
    let rows = smile_from_terminal(&p, &terminal, &[-0.1, 0.1]).unwrap();
    let (lo, hi) = (rows[0].implied_vol.unwrap(), rows[1].implied_vol.unwrap());
    assert!(lo > hi, "IV(-0.1) = {lo}, IV(0.1) = {hi}");
}

#[test]
fn implied_vol_boundaries() {
    assert!(implied_vol(0.5, 1.0, 1.0, 1.0).unwrap().is_ok());
    assert_eq!(implied_vol(1.2, 1.0, 1.0, 1.0).unwrap(), Err(IvFailure::AboveSpot));
    assert_eq!(
        implied_vol(-1.0, 1.0, 1.0, 1.0).unwrap(),
        Err(IvFailure::BelowIntrinsic)
    );
    assert!(implied_vol(0.1, 1.0, 0.0, 1.0).is_err());
}
