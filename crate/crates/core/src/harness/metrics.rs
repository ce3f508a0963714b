//! Aggregation over seeds, rate fitting and empirical diameter and gradient bounds.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `log v = a + slope * log t`
    PowerLaw,
    /// `v = a + slope * log t`
    LogLinear,
    /// `log v = a + t * log(ratio)`
    Geometric,
}

impl std::str::FromStr for RateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power_law" => Ok(Self::PowerLaw),
            "log_linear" => Ok(Self::LogLinear),
            "geometric" => Ok(Self::Geometric),
            other => Err(Error::Config(format!("unknown rate model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Slope for the power-law and log-linear models, per-step ratio for
    /// the geometric model.
    pub rate: f64,
    /// Coefficient of determination of the underlying linear fit.
    pub fit_quality: f64,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Ordinary least squares `y = a + b x`; returns `(b, R^2)`.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Fit `curve` (pairs `(t, value)`) to `model`.
pub fn fit_rate(curve: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if curve.len() < MIN_FIT_POINTS {
        return Err(Error::Domain(format!(
            "need at least {MIN_FIT_POINTS} points to fit a rate, got {}",
            curve.len()
        )));
    }
    let log_t = matches!(model, RateModel::PowerLaw | RateModel::LogLinear);
    let log_v = matches!(model, RateModel::PowerLaw | RateModel::Geometric);
    let mut points = Vec::with_capacity(curve.len());
    for &(t, v) in curve {
        if !(t.is_finite() && v.is_finite()) {
            return Err(Error::Domain(format!("non-finite point ({t}, {v})")));
        }
        if log_t && t <= 0.0 {
            return Err(Error::Domain(format!("t = {t} must be positive for a log-t fit")));
        }
        if log_v && v <= 0.0 {
            return Err(Error::Domain(format!("value {v} at t = {t} must be positive")));
        }
        points.push((
            if log_t { t.ln() } else { t },
            if log_v { v.ln() } else { v },
        ));
    }
    if points.iter().all(|p| p.0 == points[0].0) {
        return Err(Error::Domain("all t values coincide".into()));
    }
    let (slope, fit_quality) = linear_fit(&points);
    let rate = match model {
        RateModel::Geometric => slope.exp(),
        _ => slope,
    };
    Ok(RateFit { rate, fit_quality })
}

/// Points of `curve` with `lo <= t <= hi`.
pub fn window(curve: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    curve.iter().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect()
}

/// Replace values below `floor` by `floor` before a log-domain fit.
pub fn clamp_below(curve: &[(f64, f64)], floor: f64) -> Vec<(f64, f64)> {
    curve.iter().map(|&(t, v)| (t, v.max(floor))).collect()
}

/// Which recorded quantity to average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Objective,
    Subopt,
    RegretPartial,
    GradEvals,
    Eta,
}

impl std::str::FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "objective" => Ok(Self::Objective),
            "subopt" => Ok(Self::Subopt),
            "regret_partial" => Ok(Self::RegretPartial),
            "grad_evals" => Ok(Self::GradEvals),
            "eta" => Ok(Self::Eta),
            other => Err(Error::Config(format!("unknown trace column `{other}`"))),
        }
    }
}

/// Mean of `column` over traces at every `t` present in all of them, sorted
/// by `t`.
pub fn mean_curve(traces: &[Trace], column: Column) -> Result<Vec<(f64, f64)>> {
    if traces.is_empty() {
        return Err(Error::Usage("no traces to aggregate".into()));
    }
    let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for trace in traces {
        for r in &trace.records {
            let v = match column {
                Column::Objective => r.objective,
                Column::Subopt => r.subopt,
                Column::RegretPartial => r.regret_partial,
                Column::GradEvals => r.grad_evals,
                Column::Eta => r.eta,
            };
            let e = sums.entry(r.t).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    Ok(sums
        .into_iter()
        .filter(|(_, (_, count))| *count == traces.len())
        .map(|(t, (sum, count))| (t as f64, sum / count as f64))
        .collect())
}

/// Seed-averaged cumulative regret of online-mode traces.
pub fn regret_curve(traces: &[Trace]) -> Result<Vec<(f64, f64)>> {
    if traces.iter().any(|t| !t.online) {
        return Err(Error::Usage("regret needs online-mode traces only".into()));
    }
    mean_curve(traces, Column::RegretPartial)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsDiagnostics {
    /// Largest distance between two retained iterates of one trajectory or
    /// between an iterate and the reference point.
    pub d_emp: f64,
    /// Largest observed norm of a sampled smooth-loss gradient.
    pub rf_emp: f64,
}

fn dist(a: &ndarray::Array1<f64>, b: &ndarray::Array1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Empirical diameter and gradient bound over the retained iterates.
pub fn empirical_bounds(traces: &[Trace], x_star: &ndarray::Array1<f64>) -> Result<BoundsDiagnostics> {
    if traces.is_empty() {
        return Err(Error::Usage("no traces to measure".into()));
    }
    let mut d_emp: f64 = 0.0;
    let mut rf_emp: f64 = 0.0;
    for trace in traces {
        let pts = &trace.iterates;
        for (k, a) in pts.iter().enumerate() {
            d_emp = d_emp.max(dist(a, x_star));
            for b in &pts[k + 1..] {
                d_emp = d_emp.max(dist(a, b));
            }
        }
        rf_emp = rf_emp.max(trace.max_grad_norm);
    }
    Ok(BoundsDiagnostics { d_emp, rf_emp })
}

/// The convex online regret bound `J ((sqrt(T) + L) / 2 * D^2 + sqrt(T) * R^2)`
/// evaluated with measured constants.
pub fn convex_regret_bound(num_blocks: usize, lipschitz: f64, rounds: u64, d: f64, r: f64) -> f64 {
    let st = (rounds as f64).sqrt();
    num_blocks as f64 * ((st + lipschitz) / 2.0 * d * d + st * r * r)
}
