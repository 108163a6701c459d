//! Value lists on the command line: `start:stop:step` ranges (inclusive of
//! `stop` within half a step) or comma-separated values.

use std::str::FromStr;

/// Parses `start:stop:step`, `a,b,c` or a single number.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => parse_list(single),
        [start, stop, step] => {
            let num = |p: &str| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{p}` is not a number in grid `{s}`"))
            };
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if h.is_nan() || h <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
                return Err(format!("grid `{s}` needs step > 0 and start <= stop"));
            }
            let count = ((b - a) / h + 0.5).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("grid `{s}` has {count} points"));
            }
            Ok((0..count).map(|i| tidy(a + i as f64 * h)).collect())
        }
        _ => Err(format!("grid `{s}` must be start:stop:step or a comma list")),
    }
}

/// Comma-separated values of any parseable type.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    let out: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("`{p}` is not a valid value in `{s}`")))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(format!("empty list `{s}`"));
    }
    Ok(out)
}

/// Rounds away accumulated representation noise, so `-0.49 + 24·0.02`
/// prints as `-0.01`.
fn tidy(x: f64) -> f64 {
    format!("{x:.12}").parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_range() {
        let g = parse_grid("-0.49:0.49:0.02").unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], -0.49);
        assert_eq!(g[24], -0.01);
        assert_eq!(g[49], 0.49);
    }

    #[test]
    fn half_step_tolerance() {
        assert_eq!(parse_grid("0:1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(parse_grid("0:1.1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9, 1.2]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_grid("1, 2,5").unwrap(), vec![1.0, 2.0, 5.0]);
        assert_eq!(parse_list::<usize>("0,1,2,3").unwrap(), vec![0, 1, 2, 3]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_list::<usize>("1,x").is_err());
        assert!(parse_list::<usize>("").is_err());
    }
}
