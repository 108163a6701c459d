use crate::error::{Error, Result};

/// Change-of-frequency statistic and the roughness estimate derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CofResult {
    pub cof: f64,
    pub alpha_hat: f64,
}

/// Ratio of the realized quadratic variations of second differences at
/// lags 2 and 1, over observations `X(k/m)`, `k = 0..=m` (`values[k]`).
pub fn cof_estimate(values: &[f64], m: usize) -> Result<CofResult> {
    if m < 5 {
        return Err(Error::invariant("m >= 5", format!("m = {m}")));
    }
    if values.len() < m + 1 {
        return Err(Error::LengthMismatch {
            what: "observations",
            expected: m + 1,
            got: values.len(),
        });
    }
    let x = &values[..=m];
    let num: f64 = (5..=m).map(|k| (x[k] - 2.0 * x[k - 2] + x[k - 4]).powi(2)).sum();
    let den: f64 = (3..=m).map(|k| (x[k] - 2.0 * x[k - 1] + x[k - 2]).powi(2)).sum();
    if den == 0.0 || !den.is_finite() || !num.is_finite() {
        return Err(Error::Numerical(
            "second differences vanish: COF statistic undefined".into(),
        ));
    }
    let cof = num / den;
    if cof == 0.0 {
        return Err(Error::Numerical("COF statistic is zero".into()));
    }
    Ok(CofResult {
        cof,
        alpha_hat: cof.ln() / (2.0 * std::f64::consts::LN_2) - 0.5,
    })
}

/// Keeps every `s`-th value; requires `s | len - 1`.
pub fn subsample(values: &[f64], s: usize) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::invariant("s >= 1", "s = 0"));
    }
    if values.is_empty() || (values.len() - 1) % s != 0 {
        return Err(Error::invariant(
            "s divides len - 1",
            format!("len = {}, s = {s}", values.len()),
        ));
    }
    Ok(values.iter().step_by(s).copied().collect())
}
