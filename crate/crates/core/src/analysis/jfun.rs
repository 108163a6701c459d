use crate::error::{Error, Result};
use crate::hybrid::{b_optimal, BRule};
use crate::kernel::check_alpha;
use crate::specfun::{hurwitz_zeta, HurwitzQuery};

/// Series cutoff used when none is given.
pub const DEFAULT_TERMS: u64 = 1_000_000;

/// Parameters of the asymptotic MSE constant `J(α, κ, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JQuery {
    alpha: f64,
    kappa: usize,
    b_rule: BRule,
    terms: u64,
}

impl JQuery {
    pub fn new(alpha: f64, kappa: usize, b_rule: BRule) -> Result<Self> {
        check_alpha(alpha)?;
        Self {
            alpha,
            kappa,
            b_rule,
            terms: DEFAULT_TERMS,
        }
        .with_terms(DEFAULT_TERMS)
    }

    pub fn with_terms(mut self, terms: u64) -> Result<Self> {
        if terms < self.kappa as u64 + 1 {
            return Err(Error::invariant(
                "N_terms >= kappa + 1",
                format!("N_terms = {terms}, kappa = {}", self.kappa),
            ));
        }
        self.terms = terms;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn kappa(&self) -> usize {
        self.kappa
    }
    pub fn b_rule(&self) -> BRule {
        self.b_rule
    }
    pub fn terms(&self) -> u64 {
        self.terms
    }
}

/// `∫_{k-1}^k (y^α - b^α)² dy` in closed form.
pub fn cell_error(alpha: f64, k: u64, b: f64) -> f64 {
    let (a, b2) = cell_moments(alpha, k);
    let c = b.powf(alpha);
    a - 2.0 * c * b2 + c * c
}

/// `(∫_{k-1}^k y^{2α} dy, ∫_{k-1}^k y^α dy)`.
fn cell_moments(alpha: f64, k: u64) -> (f64, f64) {
    let kf = k as f64;
    let km = kf - 1.0;
    let p1 = alpha + 1.0;
    let p2 = 2.0 * alpha + 1.0;
    ((kf.powf(p2) - km.powf(p2)) / p2, (kf.powf(p1) - km.powf(p1)) / p1)
}

/// Index from which summands are evaluated by the expansion in `1/k`.
const SERIES_FROM: u64 = 16;
const SERIES_ORDER: usize = 24;

/// Large-`k` evaluation of the summand without cancellation.
///
/// With `y = k(1 - εu)`, `ε = 1/k`, `u ~ U(0,1)`, the summand equals
/// `k^{2α} (Var[(1-εu)^α] + (E[(1-εu)^α] - (b/k)^α)²)`. Both moments are
/// power series in `ε` with coefficients `C_j = (-1)^j binom(α, j)`.
struct Expansion {
    alpha: f64,
    /// Coefficient of `ε^m` in the variance, `m = 0..=2·ORDER`.
    variance: Vec<f64>,
    /// Coefficient of `ε^j` in `E[(1-εu)^α] - 1`.
    mean_excess: Vec<f64>,
}

impl Expansion {
    fn new(alpha: f64) -> Self {
        let mut c = [1.0; SERIES_ORDER + 1];
        for j in 1..=SERIES_ORDER {
            c[j] = c[j - 1] * (j as f64 - 1.0 - alpha) / j as f64;
        }
        let mut variance = vec![0.0; 2 * SERIES_ORDER + 1];
        for i in 1..=SERIES_ORDER {
            for j in 1..=SERIES_ORDER {
                let (fi, fj) = (i as f64, j as f64);
                let cov = 1.0 / (fi + fj + 1.0) - 1.0 / ((fi + 1.0) * (fj + 1.0));
                variance[i + j] += c[i] * c[j] * cov;
            }
        }
        let mut mean_excess = vec![0.0; SERIES_ORDER + 1];
        for j in 1..=SERIES_ORDER {
            mean_excess[j] = c[j] / (j as f64 + 1.0);
        }
        Self {
            alpha,
            variance,
            mean_excess,
        }
    }

    fn summand(&self, k: u64, rule: BRule) -> f64 {
        let eps = 1.0 / k as f64;
        let var = horner(&self.variance, eps);
        // b* matches the cell mean exactly; b_k = k leaves the mean excess.
        let bias = match rule {
            BRule::Optimal => 0.0,
            BRule::Forward => horner(&self.mean_excess, eps),
        };
        (k as f64).powf(2.0 * self.alpha) * (var + bias * bias)
    }
}

fn horner(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// The `k`-th term `∫_{k-1}^k (y^α - b_k^α)² dy` of `J`.
pub fn j_summand(alpha: f64, k: u64, rule: BRule) -> f64 {
    if k < SERIES_FROM {
        small_summand(alpha, k, rule)
    } else {
        Expansion::new(alpha).summand(k, rule)
    }
}

fn small_summand(alpha: f64, k: u64, rule: BRule) -> f64 {
    match rule {
        BRule::Forward => cell_error(alpha, k, k as f64),
        BRule::Optimal => {
            let (a, b) = cell_moments(alpha, k);
            // b*^α is the cell mean, so the cross terms collapse.
            a - b * b
        }
    }
}

/// `J_N(α, κ, b)`, plus `(α²/3)ζ(2-2α, N+1)` (forward) or
/// `(α²/12)ζ(2-2α, N+1)` (optimal) for `α > 0`.
pub fn j_functional(q: &JQuery) -> f64 {
    let alpha = q.alpha;
    let expansion = Expansion::new(alpha);
    let first = q.kappa as u64 + 1;
    let mut acc = Compensated::default();
    for k in (first.max(SERIES_FROM)..=q.terms).rev() {
        acc.add(expansion.summand(k, q.b_rule));
    }
    for k in (first..SERIES_FROM.min(q.terms + 1)).rev() {
        acc.add(small_summand(alpha, k, q.b_rule));
    }
    if alpha > 0.0 {
        let weight = match q.b_rule {
            BRule::Forward => alpha * alpha / 3.0,
            BRule::Optimal => alpha * alpha / 12.0,
        };
        let tail = HurwitzQuery::new(2.0 - 2.0 * alpha, q.terms as f64 + 1.0)
            .map(|h| hurwitz_zeta(&h))
            .unwrap_or(0.0);
        acc.add(weight * tail);
    }
    acc.value()
}

/// `J̃(α) = 1/(2α+1) - 2/(α+1) + 1`.
pub fn j_tilde(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(1.0 / (2.0 * alpha + 1.0) - 2.0 / (alpha + 1.0) + 1.0)
}

/// Reduction in asymptotic RMSE, in percent, relative to `κ = 0` forward sums.
pub fn rmse_reduction(alpha: f64, kappa: usize, b_rule: BRule, terms: u64) -> Result<f64> {
    let base = j_functional(&JQuery::new(alpha, 0, BRule::Forward)?.with_terms(terms)?);
    let j = j_functional(&JQuery::new(alpha, kappa, b_rule)?.with_terms(terms)?);
    Ok(-(j.sqrt() - base.sqrt()) / base.sqrt() * 100.0)
}

/// `b_k` for the given rule.
pub fn evaluation_point(alpha: f64, k: u64, rule: BRule) -> f64 {
    match rule {
        BRule::Forward => k as f64,
        BRule::Optimal => b_optimal(alpha, k),
    }
}
