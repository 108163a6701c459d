use std::io::Write;

use bss_core::analysis::{
    cof_experiment, empirical_mse_experiment, j_table, write_table, CofExperiment, CofScheme, MseExperiment, Tabular,
};
use bss_core::exact::ExactPlan;
use bss_core::hybrid::innovation_covariance;
use bss_core::rbergomi::{default_log_strikes, smile, SmileRow};
use bss_core::{
    BRule, HybridPlan, HybridSimulator, KernelSpec, ProcessKind, RBergomiParams, Scheme, Trajectory, Volatility,
};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::args::{
    CovmatArgs, EstimateArgs, Format, JtableArgs, KernelArgs, KernelName, MethodName, MseArgs, ProcessName, RuleName,
    SimulateArgs, SmileArgs,
};
use crate::error::CliError;
use crate::grid::{parse_grid, parse_list};

pub type Entries = Vec<(String, String)>;

/// What a command produced: the bytes to write and a row count for the summary.
pub struct Output {
    pub bytes: Vec<u8>,
    pub rows: usize,
}

/// The spelling clap accepts for an enum flag value.
fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map_or_else(String::new, |p| p.get_name().to_string())
}

fn entry(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn rule(r: RuleName) -> BRule {
    match r {
        RuleName::Forward => BRule::Forward,
        RuleName::Optimal => BRule::Optimal,
    }
}

fn process(p: ProcessName) -> ProcessKind {
    match p {
        ProcessName::Bss => ProcessKind::Bss,
        ProcessName::Tbss => ProcessKind::Tbss,
    }
}

fn kernel_spec(k: &KernelArgs) -> Result<KernelSpec, CliError> {
    Ok(match k.kernel {
        KernelName::Gamma => KernelSpec::gamma(k.alpha, k.lambda)?,
        KernelName::PowerLaw => KernelSpec::power_law(k.alpha, k.beta)?,
        KernelName::ScaledPower => match k.scale {
            Some(s) => KernelSpec::scaled_power(k.alpha, s)?,
            None => KernelSpec::rbergomi(k.alpha)?,
        },
    })
}

fn kernel_entries(k: &KernelArgs, spec: &KernelSpec) -> Entries {
    let mut out = vec![entry("kernel", spec.family().name()), entry("alpha", k.alpha)];
    match k.kernel {
        KernelName::Gamma => out.push(entry("lambda", k.lambda)),
        KernelName::PowerLaw => out.push(entry("beta", k.beta)),
        KernelName::ScaledPower => out.push(entry("scale", spec.scale().unwrap_or(f64::NAN))),
    }
    out
}

fn csv_only(format: Format, command: &str) -> Result<(), CliError> {
    match format {
        Format::Csv => Ok(()),
        Format::Raw => Err(CliError::config(format!(
            "--format raw applies to trajectories only, not to `{command}`"
        ))),
    }
}

fn table<T: Tabular>(entries: &Entries, rows: &[T]) -> Result<Output, CliError> {
    let mut bytes = Vec::new();
    write_table(&mut bytes, entries, rows).map_err(|e| CliError::io("buffer", e))?;
    Ok(Output {
        bytes,
        rows: rows.len(),
    })
}

pub fn simulate(a: &SimulateArgs, seed: u64, entries: &mut Entries) -> Result<Output, CliError> {
    if a.paths == 0 {
        return Err(CliError::config("--paths must be at least 1"));
    }
    let kernel = kernel_spec(&a.kernel)?;
    entries.extend(kernel_entries(&a.kernel, &kernel));
    entries.extend([
        entry("n", a.n),
        entry("T", a.horizon),
        entry("kappa", a.kappa),
        entry("b", rule(a.b_rule).name()),
        entry("process", value_name(a.process)),
        entry("gamma", a.gamma),
        entry("method", value_name(a.method)),
        entry("paths", a.paths),
        entry("normalize", a.normalize),
    ]);
    let paths: Vec<Trajectory> = match (a.method, a.process) {
        (MethodName::Hybrid, p) => {
            let plan = match p {
                ProcessName::Bss => {
                    HybridPlan::bss_with_gamma(kernel, a.n, a.horizon, a.kappa, rule(a.b_rule), a.gamma)?
                }
                ProcessName::Tbss => HybridPlan::tbss(kernel, a.n, a.horizon, a.kappa, rule(a.b_rule))?,
            };
            HybridSimulator::new(plan.with_normalization(a.normalize))?.sample_batch(
                seed,
                a.paths,
                &Volatility::Unit,
            )?
        }
        (MethodName::Exact, ProcessName::Bss) => {
            let plan = ExactPlan::bss(kernel, a.n, a.horizon)?;
            let var = kernel.stationary_variance()?;
            (0..a.paths as u64)
                .into_par_iter()
                .map(|p| {
                    let mut t = plan.sample_path(seed, p);
                    if a.normalize {
                        t.normalize(var);
                    }
                    t
                })
                .collect()
        }
        (MethodName::Exact, ProcessName::Tbss) => {
            let scale = kernel
                .scale()
                .ok_or_else(|| CliError::config("exact TBSS simulation needs --kernel scaled-power"))?;
            let steps = (a.n as f64 * a.horizon).floor() as usize;
            let plan = ExactPlan::tbss_power(kernel.alpha(), scale, steps, steps as f64 / a.n as f64)?;
            (0..a.paths as u64)
                .into_par_iter()
                .map(|p| plan.sample_path(seed, p))
                .collect()
        }
    };
    entries.push(entry("seed", seed));
    entries.push(entry("format", value_name(a.common.format)));

    let mut bytes = Vec::new();
    let w = &mut bytes;
    let res = match a.common.format {
        Format::Raw => paths.iter().try_for_each(|t| t.write_raw(&mut *w)),
        Format::Csv if paths.len() == 1 => paths[0].write_csv(&mut *w, entries),
        Format::Csv => write_wide(w, entries, &paths),
    };
    res.map_err(|e| CliError::io("buffer", e))?;
    Ok(Output {
        bytes,
        rows: paths[0].len(),
    })
}

/// Several paths side by side: `t,path_0,path_1,…`.
fn write_wide(w: &mut Vec<u8>, entries: &Entries, paths: &[Trajectory]) -> std::io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "# {k}={v}")?;
    }
    let names: Vec<String> = (0..paths.len()).map(|p| format!("path_{p}")).collect();
    writeln!(w, "t,{}", names.join(","))?;
    for (i, t) in paths[0].times().enumerate() {
        write!(w, "{t}")?;
        for p in paths {
            write!(w, ",{}", p.values[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn covmat(a: &CovmatArgs, entries: &mut Entries) -> Result<Output, CliError> {
    csv_only(a.common.format, "covmat")?;
    let cov = innovation_covariance(a.alpha, a.n, a.kappa)?;
    entries.extend([entry("alpha", a.alpha), entry("n", a.n), entry("kappa", a.kappa)]);
    struct Cell(usize, usize, f64, f64);
    impl Tabular for Cell {
        fn columns() -> &'static [&'static str] {
            &["j", "k", "sigma", "chol"]
        }
        fn record(&self) -> Vec<String> {
            vec![
                self.0.to_string(),
                self.1.to_string(),
                self.2.to_string(),
                self.3.to_string(),
            ]
        }
    }
    let d = cov.dim();
    let cells: Vec<Cell> = (0..d)
        .flat_map(|j| (0..d).map(move |k| (j, k)))
        .map(|(j, k)| Cell(j + 1, k + 1, cov.sigma[(j, k)], cov.chol[(j, k)]))
        .collect();
    table(entries, &cells)
}

pub fn jtable(a: &JtableArgs, entries: &mut Entries) -> Result<Output, CliError> {
    csv_only(a.common.format, "jtable")?;
    let alphas = parse_grid(&a.alpha_grid).map_err(CliError::Config)?;
    let kappas = parse_list::<usize>(&a.kappa).map_err(CliError::Config)?;
    let rules = parse_list::<String>(&a.b_rule)
        .map_err(CliError::Config)?
        .iter()
        .map(|r| match r.as_str() {
            "forward" => Ok(BRule::Forward),
            "optimal" => Ok(BRule::Optimal),
            other => Err(CliError::config(format!("unknown b rule `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    entries.extend([
        entry("alpha-grid", &a.alpha_grid),
        entry("kappa", &a.kappa),
        entry("b", &a.b_rule),
        entry("N", a.terms),
    ]);
    let rows = j_table(&alphas, &kappas, &rules, a.terms)?;
    table(entries, &rows)
}

pub fn mse(a: &MseArgs, seed: u64, entries: &mut Entries) -> Result<Output, CliError> {
    csv_only(a.common.format, "mse")?;
    let kernel = kernel_spec(&a.kernel)?;
    let ns = parse_list::<u64>(&a.ns).map_err(CliError::Config)?;
    entries.extend(kernel_entries(&a.kernel, &kernel));
    entries.extend([
        entry("process", value_name(a.process)),
        entry("kappa", a.kappa),
        entry("b", rule(a.b_rule).name()),
        entry("ns", &a.ns),
        entry("reps", a.reps),
        entry("seed", seed),
    ]);
    let rows = empirical_mse_experiment(&MseExperiment {
        kernel,
        kind: process(a.process),
        kappa: a.kappa,
        b_rule: rule(a.b_rule),
        ns,
        replications: a.reps,
        seed,
    })?;
    table(entries, &rows)
}

fn cof_scheme(name: &str) -> Result<CofScheme, CliError> {
    let hybrid = |kappa, b_rule| CofScheme::Hybrid { kappa, b_rule };
    Ok(match name {
        "exact" => CofScheme::Exact,
        "riemann-fwd" => hybrid(0, BRule::Forward),
        "riemann-opt" => hybrid(0, BRule::Optimal),
        _ => match name.strip_prefix("hybrid-k").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if k >= 1 => hybrid(k, BRule::Optimal),
            _ => return Err(CliError::config(format!("unknown scheme `{name}`"))),
        },
    })
}

pub fn estimate(a: &EstimateArgs, seed: u64, entries: &mut Entries) -> Result<Output, CliError> {
    csv_only(a.common.format, "estimate")?;
    let kernel = kernel_spec(&a.kernel)?;
    let steps = parse_list::<usize>(&a.s).map_err(CliError::Config)?;
    let schemes = parse_list::<String>(&a.schemes)
        .map_err(CliError::Config)?
        .iter()
        .map(|s| cof_scheme(s))
        .collect::<Result<Vec<_>, _>>()?;
    entries.extend(kernel_entries(&a.kernel, &kernel));
    entries.extend([
        entry("m", a.m),
        entry("s", &a.s),
        entry("reps", a.reps),
        entry("schemes", &a.schemes),
        entry("seed", seed),
    ]);
    let mut rows = Vec::new();
    for &s in &steps {
        for &scheme in &schemes {
            rows.push(cof_experiment(&CofExperiment {
                kernel,
                scheme,
                m: a.m,
                s,
                replications: a.reps,
                seed,
            })?);
        }
    }
    table(entries, &rows)
}

struct SmileRecord<'a> {
    row: &'a SmileRow,
    scheme: Scheme,
    maturity: f64,
    n: usize,
    paths: usize,
    seed: u64,
}

impl Tabular for SmileRecord<'_> {
    fn columns() -> &'static [&'static str] {
        &[
            "k",
            "K",
            "price",
            "stderr",
            "implied_vol",
            "iv_stderr",
            "scheme",
            "T",
            "n",
            "paths",
            "seed",
        ]
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.row.log_strike.to_string(),
            self.row.strike.to_string(),
            self.row.price.to_string(),
            self.row.mc_stderr.to_string(),
            opt(self.row.implied_vol.ok()),
            opt(self.row.iv_stderr),
            self.scheme.to_string(),
            self.maturity.to_string(),
            self.n.to_string(),
            self.paths.to_string(),
            self.seed.to_string(),
        ]
    }
}

pub fn smile_cmd(a: &SmileArgs, seed: u64, entries: &mut Entries) -> Result<Output, CliError> {
    csv_only(a.common.format, "smile")?;
    let params = RBergomiParams::new(a.s0, a.xi, a.eta, a.alpha, a.rho, a.maturity)?;
    let scheme = Scheme::parse(&a.scheme).ok_or_else(|| CliError::config(format!("unknown scheme `{}`", a.scheme)))?;
    let strikes = match &a.log_strikes {
        Some(g) => parse_grid(g).map_err(CliError::Config)?,
        None => default_log_strikes(a.maturity),
    };
    let strike_text: Vec<String> = strikes.iter().map(f64::to_string).collect();
    entries.extend([
        entry("T", a.maturity),
        entry("n", a.n),
        entry("paths", a.paths),
        entry("scheme", scheme),
        entry("log-strikes", strike_text.join(",")),
        entry("s0", a.s0),
        entry("xi", a.xi),
        entry("eta", a.eta),
        entry("alpha", a.alpha),
        entry("rho", a.rho),
        entry("seed", seed),
    ]);
    let rows = smile(&params, a.n, a.paths, scheme, &strikes, seed)?;
    let records: Vec<SmileRecord> = rows
        .iter()
        .map(|row| SmileRecord {
            row,
            scheme,
            maturity: a.maturity,
            n: a.n,
            paths: a.paths,
            seed,
        })
        .collect();
    table(entries, &records)
}
