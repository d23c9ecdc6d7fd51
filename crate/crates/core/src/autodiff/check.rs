//! Central finite-difference gradient checking.

use super::params::{Gradients, ParamId, ParamSet};

/// Relative error with a floor on the denominator, so coordinates whose true
/// gradient is ~0 are compared absolutely.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-4);
    (analytic - numeric).abs() / denom
}

#[derive(Debug, Clone)]
pub struct CoordinateMismatch {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone)]
pub struct FiniteDiffReport {
    pub max_relative_error: f64,
    pub checked: usize,
    pub failing: Vec<CoordinateMismatch>,
}

impl FiniteDiffReport {
    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Compares `analytic` against central differences of `f` at every
/// coordinate of every parameter in `only` (all parameters when `None`).
pub fn finite_diff_check(
    f: impl Fn(&ParamSet) -> f64,
    params: &ParamSet,
    analytic: &Gradients,
    step: f64,
    tolerance: f64,
    only: Option<&[ParamId]>,
) -> FiniteDiffReport {
    assert!(step > 0.0, "finite-difference step must be positive");
    let ids: Vec<ParamId> = match only {
        Some(ids) => ids.to_vec(),
        None => params.ids().collect(),
    };
    let mut work = params.clone();
    let mut report = FiniteDiffReport {
        max_relative_error: 0.0,
        checked: 0,
        failing: Vec::new(),
    };
    for id in ids {
        for k in 0..params.get(id).len() {
            let original = params.get(id).data[k];
            work.get_mut(id).data[k] = original + step;
            let up = f(&work);
            work.get_mut(id).data[k] = original - step;
            let down = f(&work);
            work.get_mut(id).data[k] = original;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic.get(id).data[k];
            let err = relative_error(a, numeric);
            report.checked += 1;
            report.max_relative_error = report.max_relative_error.max(err);
            if err > tolerance || !err.is_finite() {
                report.failing.push(CoordinateMismatch {
                    param: params.name(id).to_string(),
                    index: k,
                    analytic: a,
                    numeric,
                });
            }
        }
    }
    report
}
