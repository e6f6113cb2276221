use crate::error::{Error, Result};

/// Root mean squared error.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    Ok((sum_squared_error(predictions, truths)? / predictions.len() as f64).sqrt())
}

pub fn sum_squared_error(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::CountMismatch {
            expected: truths.len(),
            actual: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    Ok(predictions
        .iter()
        .zip(truths)
        .map(|(p, r)| (p - r) * (p - r))
        .sum())
}
