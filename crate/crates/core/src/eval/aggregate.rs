use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for a single run.
    pub std: f64,
    pub runs: usize,
}

pub fn aggregate_runs(values: &[f64]) -> Result<Summary, EvalError> {
    if values.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        mean,
        std,
        runs: values.len(),
    })
}
