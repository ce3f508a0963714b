//! Per-seed trajectory records.

use ndarray::Array1;

/// One retained iteration of a run. `t` counts completed steps (outer
/// stages for the variance-reduced solvers); `t = 0` is the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub seed: u64,
    pub t: u64,
    /// Cumulative cost in single-batch full-gradient evaluations.
    pub grad_evals: f64,
    /// Step parameter of the last step (NaN before the first one).
    pub eta: f64,
    pub objective: f64,
    pub subopt: f64,
    /// Cumulative online regret against the reference point; NaN outside
    /// online mode.
    pub regret_partial: f64,
}

/// Records of one seed plus the iterates retained at the same points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub online: bool,
    pub records: Vec<TraceRecord>,
    pub iterates: Vec<Array1<f64>>,
    /// Largest norm of the sampled smooth-loss gradient seen along the run.
    pub max_grad_norm: f64,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// Whether step `t` of a `total`-step run is retained: every step up to 100,
/// then about 100 per decade, and always the last one.
pub fn keep_record(t: u64, total: u64) -> bool {
    if t <= 100 || t == total {
        return true;
    }
    let bucket = |s: u64| (100.0 * (s as f64).log10()).floor() as i64;
    bucket(t) != bucket(t - 1)
}
