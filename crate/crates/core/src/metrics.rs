//! Accuracy, repeat aggregation and ROC/AUC.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Percentage of `predictions` equal to `truth`.
pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::config("accuracy of an empty prediction set"));
    }
    if predictions.len() != truth.len() {
        return Err(Error::config(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let correct = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * correct as f64 / predictions.len() as f64)
}

/// Mean and population standard deviation (divisor `N`), single pass.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::config("mean of an empty list"));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    Ok((mean, (m2 / values.len() as f64).max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Samples scoring at or above this value are called positive.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// From threshold `+∞` at `(0, 0)` down to the lowest score at `(1, 1)`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve for binary labels (1 = positive) by sweeping the threshold over the
/// distinct scores, highest first. Tied scores move the curve in one diagonal step,
/// which gives them half credit in the trapezoidal area.
pub fn roc_auc(scores: &[f64], truth: &[usize]) -> Result<RocCurve> {
    if scores.len() != truth.len() {
        return Err(Error::config(format!(
            "{} scores for {} labels",
            scores.len(),
            truth.len()
        )));
    }
    if let Some(bad) = truth.iter().find(|&&t| t > 1) {
        return Err(Error::config(format!("ROC needs binary labels, found {bad}")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::config("ROC scores contain NaN"));
    }
    let positives = truth.iter().filter(|&&t| t == 1).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::config("ROC needs both classes present"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));

    let (p, n) = (positives as f64, negatives as f64);
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if truth[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().unwrap();
        let next = RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
            threshold,
        };
        auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
        points.push(next);
    }
    Ok(RocCurve { points, auc })
}

/// Aggregate over repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Percent.
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub final_loss_mean: f64,
    pub auc: Option<f64>,
}

impl RunSummary {
    pub fn from_runs(final_accuracies: &[f64], final_losses: &[f64], auc: Option<f64>) -> Result<Self> {
        let (accuracy_mean, accuracy_std) = mean_std(final_accuracies)?;
        let (final_loss_mean, _) = mean_std(final_losses)?;
        Ok(Self {
            accuracy_mean,
            accuracy_std,
            final_loss_mean,
            auc,
        })
    }
}
