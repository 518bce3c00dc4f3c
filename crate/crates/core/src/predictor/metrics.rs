use serde::Serialize;

use super::{PredictorError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub n: usize,
    /// `None` when the reference values are constant.
    pub r2: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
}

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(PredictorError::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(PredictorError::TooFewRows { needed: 1, got: 0 });
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok((pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64).sqrt())
}

/// Coefficient of determination, 1 − SSE/SST.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    if truth.len() < 2 {
        return Err(PredictorError::TooFewRows {
            needed: 2,
            got: truth.len(),
        });
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let sst: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(PredictorError::ZeroVariance);
    }
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(1.0 - sse / sst)
}

pub fn metrics(pred: &[f64], truth: &[f64]) -> Result<Metrics> {
    Ok(Metrics {
        n: pred.len(),
        r2: r_squared(pred, truth).ok(),
        mae: mae(pred, truth)?,
        rmse: rmse(pred, truth)?,
    })
}
