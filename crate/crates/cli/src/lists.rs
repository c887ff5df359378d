//! `start:stop[:step]` ranges and comma lists on the command line.

use anyhow::{bail, Context, Result};

/// Inclusive integer range (`6:14`, `10:100:10`), comma list, or single value.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let out = if s.contains(':') {
        let parts = range_parts(s)?;
        let num = |x: &str| x.trim().parse::<usize>().with_context(|| format!("bad integer `{x}` in `{s}`"));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let step = parts.get(2).map(|x| num(x)).transpose()?.unwrap_or(1);
        if step == 0 || stop < start {
            bail!("empty range `{s}`");
        }
        (start..=stop).step_by(step).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad integer `{x}` in `{s}`")))
            .collect::<Result<Vec<_>>>()?
    };
    if out.is_empty() {
        bail!("empty list `{s}`");
    }
    Ok(out)
}

/// Inclusive real range (`0:1:0.1`), comma list, or single value. Range
/// points are `start + i·step`, rounded to 12 decimals.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let num = |x: &str| x.trim().parse::<f64>().with_context(|| format!("bad number `{x}` in `{s}`"));
    let out = if s.contains(':') {
        let parts = range_parts(s)?;
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let step = match parts.get(2) {
            Some(x) => num(x)?,
            None => 1.0,
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("empty range `{s}`");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if out.iter().any(|x| !x.is_finite()) {
        bail!("non-finite value in `{s}`");
    }
    Ok(out)
}

fn range_parts(s: &str) -> Result<Vec<&str>> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        bail!("range `{s}` must be start:stop or start:stop:step");
    }
    Ok(parts)
}

/// Probabilities must lie in `[0, 1]`.
pub fn parse_probability_list(s: &str) -> Result<Vec<f64>> {
    let v = parse_f64_list(s)?;
    if let Some(p) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        bail!("probability {p} outside [0, 1]");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_ranges() {
        assert_eq!(parse_usize_list("6:14").unwrap(), (6..=14).collect::<Vec<_>>());
        assert_eq!(parse_usize_list("10:100:10").unwrap().len(), 10);
        assert_eq!(parse_usize_list("15:40:5").unwrap(), vec![15, 20, 25, 30, 35, 40]);
        assert_eq!(parse_usize_list("3, 5,8").unwrap(), vec![3, 5, 8]);
        assert_eq!(parse_usize_list("20").unwrap(), vec![20]);
        assert!(parse_usize_list("5:2").is_err());
        assert!(parse_usize_list("1:5:0").is_err());
        assert!(parse_usize_list("1:2:3:4").is_err());
        assert!(parse_usize_list("x").is_err());
    }

    #[test]
    fn real_ranges() {
        let v = parse_f64_list("0:1:0.1").unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(v[3], 0.3);
        assert_eq!(v[10], 1.0);
        assert_eq!(parse_f64_list("0.6,0.9,1").unwrap(), vec![0.6, 0.9, 1.0]);
        assert!(parse_probability_list("0.5,1.5").is_err());
        assert!(parse_f64_list("nan").is_err());
    }
}
