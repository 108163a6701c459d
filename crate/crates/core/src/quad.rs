//! Adaptive Gauss–Kronrod quadrature and the variable substitutions used to
//! tame algebraic endpoint singularities and slowly decaying tails.
//!
//! Every integral in this crate that has no closed form goes through here:
//! kernel variances and autocovariances, the variogram constant, cell-wise
//! discretization errors and the near-unit branch of the hypergeometric
//! function.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Tolerance settings for [`Integrator::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
            max_intervals: 4000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 15-point Kronrod rule; returns (kronrod, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

impl Integrator {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Globally adaptive bisection on the interval with the largest error estimate.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Estimate {
        if a == b {
            return Estimate {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            };
        }
        let (value, error) = gk15(&f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });
        let mut total = value;
        let mut total_err = error;
        while heap.len() < self.max_intervals {
            if total_err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                break;
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                break;
            }
            let (lv, le) = gk15(&f, worst.a, mid);
            let (rv, re) = gk15(&f, mid, worst.b);
            total += lv + rv - worst.value;
            total_err += le + re - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: lv,
                error: le,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: rv,
                error: re,
            });
        }
        // Re-add from the leaves to shed the running-sum drift.
        let intervals = heap.len();
        let (value, error) = heap
            .into_iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        Estimate {
            value,
            error,
            intervals,
        }
    }

    /// `∫_a^b (x - a)^exponent · regular(x) dx` for `exponent > -1`.
    ///
    /// Substitutes `x = a + (b - a)·u^{1/(exponent+1)}`, which turns the
    /// algebraic factor into a constant Jacobian.
    pub fn integrate_left_singular<F: Fn(f64) -> f64>(&self, regular: F, a: f64, b: f64, exponent: f64) -> Estimate {
        debug_assert!(exponent > -1.0);
        let p = exponent + 1.0;
        let width = b - a;
        let scale = width.powf(p) / p;
        let inv_p = 1.0 / p;
        let est = self.integrate(|u| regular(a + width * u.powf(inv_p)), 0.0, 1.0);
        Estimate {
            value: est.value * scale,
            error: est.error * scale,
            intervals: est.intervals,
        }
    }

    /// `∫_a^∞ f(x) dx` for `a > 0` where `f(x) = O(x^decay)` with `decay < -1`.
    ///
    /// Maps `x = a·w^{-q}` with `q = 1/(-decay-1)`, so that an exact power
    /// tail becomes a constant on `(0, 1]`. Exponentially decaying integrands
    /// may pass any `decay < -1`; `-2` gives the plain `x = a/w` map.
    pub fn integrate_tail<F: Fn(f64) -> f64>(&self, f: F, a: f64, decay: f64) -> Estimate {
        debug_assert!(a > 0.0 && decay < -1.0);
        let q = 1.0 / (-decay - 1.0);
        self.integrate(
            |w| {
                let x = a * w.powf(-q);
                let jac = a * q * w.powf(-q - 1.0);
                let v = f(x) * jac;
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }
}

/// Shorthand for [`Integrator::integrate`] with default tolerances.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    Integrator::default().integrate(f, a, b).value
}

/// Fixed 15-point Kronrod rule, for cells where the integrand is smooth.
pub fn fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    gk15(&f, a, b).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_on_low_degree_polynomials() {
        for k in 0..=22 {
            let got = fixed(|x| x.powi(k), 0.0, 1.0);
            let want = 1.0 / (k as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "degree {k}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_handles_interior_kink() {
        let got = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0);
        assert!((got - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn left_singular_substitution() {
        // ∫_0^1 x^{-0.86} e^{-x} dx = γ(0.14, 1)
        let got = Integrator::default()
            .integrate_left_singular(|x| (-x).exp(), 0.0, 1.0, -0.86)
            .value;
        let plain = Integrator::default()
            .integrate(|x: f64| x.powf(-0.86) * (-x).exp(), 0.0, 1.0)
            .value;
        assert!((got - plain).abs() < 1e-8 * got, "{got} {plain}");
        let power = Integrator::default()
            .integrate_left_singular(|_| 1.0, 2.0, 3.0, -0.5)
            .value;
        assert!((power - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tail_maps_power_and_exponential_decay() {
        let got = Integrator::default()
            .integrate_tail(|x: f64| x.powf(-1.5), 4.0, -1.5)
            .value;
        assert!((got - 1.0).abs() < 1e-13);
        let got = Integrator::default()
            .integrate_tail(|x: f64| (-x).exp(), 1.0, -2.0)
            .value;
        assert!((got - (-1.0f64).exp()).abs() < 1e-13);
    }
}
