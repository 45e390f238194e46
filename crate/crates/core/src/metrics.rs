//! Relative gap, convergence AUC and summary statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::search::TracePoint;

/// `(length - reference) / reference`.
pub fn final_gap(length: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) || !reference.is_finite() {
        return Err(Error::invalid(format!(
            "reference length must be positive and finite, got {reference}"
        )));
    }
    if !length.is_finite() {
        return Err(Error::invalid(format!("tour length must be finite, got {length}")));
    }
    Ok((length - reference) / reference)
}

/// Trapezoidal area under the best-so-far gap curve on normalized time
/// `iteration / budget`. A single-point trace returns that point's gap.
pub fn convergence_auc(trace: &[TracePoint], reference: f64, budget: usize) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::invalid("convergence AUC needs a non-empty trace"));
    }
    if budget == 0 {
        return Err(Error::invalid("convergence AUC needs a positive budget"));
    }
    let first = final_gap(trace[0].best_length, reference)?;
    if trace.len() == 1 {
        return Ok(first);
    }
    let b = budget as f64;
    let mut area = 0.0;
    let mut prev_x = trace[0].iteration as f64 / b;
    let mut prev_g = first;
    for p in &trace[1..] {
        let x = p.iteration as f64 / b;
        let g = final_gap(p.best_length, reference)?;
        if x < prev_x {
            return Err(Error::invalid("trace iterations must be non-decreasing"));
        }
        area += 0.5 * (prev_g + g) * (x - prev_x);
        prev_x = x;
        prev_g = g;
    }
    Ok(area)
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        if count == 1 {
            return Self { mean, se: 0.0, count };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        Self { mean, se: (var / count as f64).sqrt(), count }
    }
}

/// Fraction of iterations spent on each operator; all zero when nothing ran.
pub fn operator_shares(counts: &[u64; 4]) -> [f64; 4] {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return [0.0; 4];
    }
    counts.map(|c| c as f64 / total as f64)
}
