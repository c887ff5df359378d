//! Scaling-law fits over experiment tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleResult;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Model {
    /// `y = a / log₂ N`
    LogPrefactor,
    /// `y = b · √N`
    SqrtPrefactor,
    /// `y = a`
    Constant,
    /// `y = k · N^α`, fitted in log-log space
    PowerLaw,
}

impl Model {
    fn basis(self, n: f64) -> f64 {
        match self {
            Model::LogPrefactor => 1.0 / n.log2(),
            Model::SqrtPrefactor => n.sqrt(),
            Model::Constant => 1.0,
            Model::PowerLaw => unreachable!("power law is not a one-parameter projection"),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::LogPrefactor => "LOG_PREFACTOR",
            Model::SqrtPrefactor => "SQRT_PREFACTOR",
            Model::Constant => "CONSTANT",
            Model::PowerLaw => "POWER_LAW",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "log" | "log_prefactor" => Ok(Model::LogPrefactor),
            "sqrt" | "sqrt_prefactor" => Ok(Model::SqrtPrefactor),
            "constant" | "const" => Ok(Model::Constant),
            "power" | "power_law" => Ok(Model::PowerLaw),
            _ => Err(Error::Fit(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: Model,
    /// `[a]`, `[b]`, `[a]` or `[k, α]`.
    pub coefficients: Vec<f64>,
    /// Root-mean-square relative error of the fitted curve.
    pub residual: f64,
    pub n_points: usize,
    pub size_range: (f64, f64),
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        match self.model {
            Model::PowerLaw => self.coefficients[0] * n.powf(self.coefficients[1]),
            m => self.coefficients[0] * m.basis(n),
        }
    }

    /// The prefactor, or the exponent for a power law.
    pub fn leading(&self) -> f64 {
        match self.model {
            Model::PowerLaw => self.coefficients[1],
            _ => self.coefficients[0],
        }
    }
}

/// Least-squares fit of `model` to `(N, y)` points.
///
/// One-parameter models use the closed form `a = Σ yᵢxᵢ / Σ xᵢ²` with `xᵢ`
/// the basis value at `Nᵢ`; the power law is ordinary least squares on
/// `(ln N, ln y)`.
pub fn fit(model: Model, points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(&(n, _)) = points.iter().find(|(n, _)| !n.is_finite() || *n < 2.0) {
        return Err(Error::Fit(format!("size {n} below 2")));
    }
    if let Some(&(_, y)) = points.iter().find(|(_, y)| !y.is_finite() || *y <= 0.0) {
        return Err(Error::Fit(format!("non-positive value {y}")));
    }

    let coefficients = match model {
        Model::PowerLaw => {
            let m = points.len() as f64;
            let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), &(n, y)| (sx + n.ln(), sy + y.ln()));
            let (mx, my) = (sx / m, sy / m);
            let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(n, y)| {
                let dx = n.ln() - mx;
                (sxy + dx * (y.ln() - my), sxx + dx * dx)
            });
            if sxx == 0.0 {
                return Err(Error::Fit("power law needs at least two distinct sizes".into()));
            }
            let alpha = sxy / sxx;
            vec![(my - alpha * mx).exp(), alpha]
        }
        _ => {
            let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), &(n, y)| {
                let x = model.basis(n);
                (num + y * x, den + x * x)
            });
            vec![num / den]
        }
    };

    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut out = ScalingFit { model, coefficients, residual: 0.0, n_points: points.len(), size_range: (lo, hi) };
    let mse = points.iter().map(|&(n, y)| ((out.predict(n) - y) / y).powi(2)).sum::<f64>() / points.len() as f64;
    out.residual = mse.sqrt();
    Ok(out)
}

/// Fit over the sizes left after dropping the smallest third.
pub fn fit_large_n(model: Model, points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let drop = (sorted.len() / 3).min(sorted.len().saturating_sub(2));
    fit(model, &sorted[drop..])
}

/// Fits per value of a sweep parameter (tunnelling probability, depth, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefactorSweep<K> {
    pub series: Vec<(K, ScalingFit)>,
    /// Parameters whose group contained a failed run.
    pub excluded: Vec<K>,
}

/// A sweep parameter with its `(N, y)` points; `y = None` is a failed run.
pub type Group<K> = (K, Vec<(f64, Option<f64>)>);

/// One fit per group of `(N, y)` points; `y = None` marks a failed run and
/// excludes the whole group.
pub fn prefactor_sweep<K: Clone + fmt::Debug>(
    groups: &[Group<K>],
    model: Model,
) -> Result<PrefactorSweep<K>> {
    let mut series = Vec::new();
    let mut excluded = Vec::new();
    for (param, pts) in groups {
        if pts.is_empty() {
            return Err(Error::Fit(format!("empty group at {param:?}")));
        }
        let clean: Option<Vec<(f64, f64)>> = pts.iter().map(|&(n, y)| y.map(|y| (n, y))).collect();
        match clean {
            Some(points) => series.push((param.clone(), fit(model, &points)?)),
            None => excluded.push(param.clone()),
        }
    }
    Ok(PrefactorSweep { series, excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSeries {
    pub series: Vec<(f64, ScalingFit)>,
    /// Percolation probabilities with fewer than three usable sizes.
    pub skipped: Vec<f64>,
}

/// Power-law exponent of the aggregated time against `N`, per percolation
/// probability.
pub fn alpha_vs_p(results: &[EnsembleResult]) -> Result<AlphaSeries> {
    let mut by_p: BTreeMap<u64, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
    for r in results {
        let key = r.percolation_probability.to_bits();
        let entry = by_p.entry(key).or_insert((r.percolation_probability, Vec::new()));
        if let Some(t) = r.aggregated_time {
            entry.1.push((r.base_size() as f64, t));
        }
    }
    let mut groups: Vec<_> = by_p.into_values().collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut series = Vec::new();
    let mut skipped = Vec::new();
    for (p, pts) in groups {
        if pts.len() < 3 {
            skipped.push(p);
        } else {
            series.push((p, fit(Model::PowerLaw, &pts)?));
        }
    }
    Ok(AlphaSeries { series, skipped })
}
