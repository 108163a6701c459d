use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::ExactPlan;
use crate::hybrid::{BRule, HybridPlan, HybridSimulator, ProcessKind, Volatility};
use crate::kernel::KernelSpec;
use crate::stats::Moments;

use super::cof::{cof_estimate, subsample};
use super::jfun::{j_functional, JQuery};
use super::mse::{analytic_mse, discretized_second_moment, theoretical_mse};

/// A row type that can be written as one CSV record.
pub trait Tabular {
    fn columns() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

/// Writes `# key=value` comment lines, a header row and one record per row.
pub fn write_table<T: Tabular, W: Write>(mut w: W, comments: &[(String, String)], rows: &[T]) -> io::Result<()> {
    for (k, v) in comments {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "{}", T::columns().join(","))?;
    for row in rows {
        writeln!(w, "{}", row.record().join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JRow {
    pub alpha: f64,
    pub kappa: usize,
    pub b_rule: BRule,
    pub terms: u64,
    pub j: f64,
    /// Percentage reduction in asymptotic RMSE relative to `κ = 0`, forward.
    pub reduction: f64,
}

impl Tabular for JRow {
    fn columns() -> &'static [&'static str] {
        &["alpha", "kappa", "b_rule", "N", "J", "rmse_reduction_pct"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.alpha.to_string(),
            self.kappa.to_string(),
            self.b_rule.name().to_string(),
            self.terms.to_string(),
            self.j.to_string(),
            self.reduction.to_string(),
        ]
    }
}

/// `J` and RMSE reductions over the product of the given grids.
pub fn j_table(alphas: &[f64], kappas: &[usize], rules: &[BRule], terms: u64) -> Result<Vec<JRow>> {
    let bases: Vec<f64> = alphas
        .par_iter()
        .map(|&a| Ok(j_functional(&JQuery::new(a, 0, BRule::Forward)?.with_terms(terms)?)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize, BRule)> = (0..alphas.len())
        .flat_map(|i| kappas.iter().flat_map(move |&k| rules.iter().map(move |&r| (i, k, r))))
        .collect();
    cells
        .par_iter()
        .map(|&(i, kappa, b_rule)| {
            let alpha = alphas[i];
            let j = j_functional(&JQuery::new(alpha, kappa, b_rule)?.with_terms(terms)?);
            let base = bases[i];
            Ok(JRow {
                alpha,
                kappa,
                b_rule,
                terms,
                j,
                reduction: -(j.sqrt() - base.sqrt()) / base.sqrt() * 100.0,
            })
        })
        .collect()
}

/// MSE validation over a list of resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct MseExperiment {
    pub kernel: KernelSpec,
    pub kind: ProcessKind,
    pub kappa: usize,
    pub b_rule: BRule,
    pub ns: Vec<u64>,
    /// Monte Carlo paths used to check `E|X_n(T)|²` by simulation; 0 skips it.
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseRow {
    pub alpha: f64,
    pub kappa: usize,
    pub b_rule: BRule,
    pub n: u64,
    pub analytic: f64,
    pub theoretical: f64,
    pub ratio: f64,
    /// `E|X_n(T)|²` from the discretized kernel.
    pub second_moment: f64,
    /// Sample mean of `X_n(T)²` and its standard error.
    pub mc_second_moment: Option<(f64, f64)>,
}

impl Tabular for MseRow {
    fn columns() -> &'static [&'static str] {
        &[
            "alpha",
            "kappa",
            "b_rule",
            "n",
            "analytic_mse",
            "theoretical_mse",
            "ratio",
            "second_moment",
            "mc_second_moment",
            "mc_stderr",
        ]
    }

    fn record(&self) -> Vec<String> {
        let (mc, se) = match self.mc_second_moment {
            Some((m, s)) => (m.to_string(), s.to_string()),
            None => (String::new(), String::new()),
        };
        vec![
            self.alpha.to_string(),
            self.kappa.to_string(),
            self.b_rule.name().to_string(),
            self.n.to_string(),
            self.analytic.to_string(),
            self.theoretical.to_string(),
            self.ratio.to_string(),
            self.second_moment.to_string(),
            mc,
            se,
        ]
    }
}

pub fn empirical_mse_experiment(exp: &MseExperiment) -> Result<Vec<MseRow>> {
    exp.ns
        .iter()
        .map(|&n| {
            let plan = match exp.kind {
                ProcessKind::Bss => HybridPlan::bss(exp.kernel, n, 1.0, exp.kappa, exp.b_rule)?,
                ProcessKind::Tbss => HybridPlan::tbss(exp.kernel, n, 1.0, exp.kappa, exp.b_rule)?,
            };
            let analytic = analytic_mse(&plan)?.total();
            let theoretical = theoretical_mse(&plan, 1.0)?;
            let mc_second_moment = if exp.replications > 0 {
                let sim = HybridSimulator::new(plan.clone())?;
                let paths = sim.sample_batch(exp.seed, exp.replications, &Volatility::Unit)?;
                let m: Moments = paths.iter().map(|p| p.values[p.values.len() - 1].powi(2)).collect();
                Some((m.mean(), m.stderr()))
            } else {
                None
            };
            Ok(MseRow {
                alpha: exp.kernel.alpha(),
                kappa: exp.kappa,
                b_rule: exp.b_rule,
                n,
                analytic,
                theoretical,
                ratio: analytic / theoretical,
                second_moment: discretized_second_moment(&plan)?,
                mc_second_moment,
            })
        })
        .collect()
}

/// Path generator used in the estimator experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CofScheme {
    Exact,
    Hybrid { kappa: usize, b_rule: BRule },
}

impl CofScheme {
    pub fn label(&self) -> String {
        match self {
            CofScheme::Exact => "exact".into(),
            CofScheme::Hybrid { kappa, b_rule } => format!("hybrid-k{kappa}-{}", b_rule.name()),
        }
    }
}

/// Bias of the COF estimator on `m` observations subsampled with step `s`
/// from paths with `n = m·s` steps on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CofExperiment {
    pub kernel: KernelSpec,
    pub scheme: CofScheme,
    pub m: usize,
    pub s: usize,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CofRow {
    pub scheme: String,
    pub alpha: f64,
    pub m: usize,
    pub s: usize,
    pub replications: usize,
    pub mean_alpha_hat: f64,
    pub bias: f64,
    pub stdev: f64,
    pub bias_stderr: f64,
}

impl Tabular for CofRow {
    fn columns() -> &'static [&'static str] {
        &[
            "scheme",
            "alpha",
            "m",
            "s",
            "reps",
            "mean_alpha_hat",
            "bias",
            "stdev",
            "bias_stderr",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.scheme.clone(),
            self.alpha.to_string(),
            self.m.to_string(),
            self.s.to_string(),
            self.replications.to_string(),
            self.mean_alpha_hat.to_string(),
            self.bias.to_string(),
            self.stdev.to_string(),
            self.bias_stderr.to_string(),
        ]
    }
}

pub fn cof_experiment(exp: &CofExperiment) -> Result<CofRow> {
    if exp.replications == 0 || exp.s == 0 {
        return Err(Error::invariant(
            "replications >= 1 and s >= 1",
            format!("replications = {}, s = {}", exp.replications, exp.s),
        ));
    }
    let n = (exp.m * exp.s) as u64;
    let estimates: Vec<f64> = match exp.scheme {
        CofScheme::Exact => {
            let plan = ExactPlan::bss(exp.kernel, n, 1.0)?;
            (0..exp.replications as u64)
                .into_par_iter()
                .map(|p| estimate(&plan.sample_path(exp.seed, p).values, exp))
                .collect::<Result<_>>()?
        }
        CofScheme::Hybrid { kappa, b_rule } => {
            let plan = HybridPlan::bss(exp.kernel, n, 1.0, kappa, b_rule)?;
            let sim = HybridSimulator::new(plan)?;
            sim.sample_batch(exp.seed, exp.replications, &Volatility::Unit)?
                .iter()
                .map(|p| estimate(&p.values, exp))
                .collect::<Result<_>>()?
        }
    };
    let mom: Moments = estimates.iter().copied().collect();
    Ok(CofRow {
        scheme: exp.scheme.label(),
        alpha: exp.kernel.alpha(),
        m: exp.m,
        s: exp.s,
        replications: exp.replications,
        mean_alpha_hat: mom.mean(),
        bias: mom.mean() - exp.kernel.alpha(),
        stdev: mom.std_dev(),
        bias_stderr: mom.stderr(),
    })
}

fn estimate(values: &[f64], exp: &CofExperiment) -> Result<f64> {
    Ok(cof_estimate(&subsample(values, exp.s)?, exp.m)?.alpha_hat)
}
