//! Pooling of the fitted models and the support diagnostics.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::design::{destandardize, StandardizedDesign};
use crate::error::{dims, Result};
use crate::objective::CoefficientBundle;

/// The equally weighted average of the G models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedModel {
    pub beta_star: Array1<f64>,
    pub intercept: f64,
}

/// `β*_j = (1/G) Σ_g β_j^g`, with zero intercept.
pub fn average_coefficients(bundle: &CoefficientBundle) -> AveragedModel {
    AveragedModel { beta_star: bundle.row_means(), intercept: 0.0 }
}

impl AveragedModel {
    /// Averaged model in the raw units of the data `design` was built from.
    pub fn in_raw_units(bundle: &CoefficientBundle, design: &StandardizedDesign) -> Result<AveragedModel> {
        let (coef, intercepts) = destandardize(bundle, design)?;
        let g = coef.ncols() as f64;
        Ok(AveragedModel {
            beta_star: coef.sum_axis(ndarray::Axis(1)) / g,
            intercept: intercepts.sum() / g,
        })
    }

    pub fn num_features(&self) -> usize {
        self.beta_star.len()
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        predict(self, x)
    }

    /// One prediction per row of `x`.
    pub fn predict_rows(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.num_features() {
            return Err(dims(format!("{} columns", self.num_features()), format!("{} columns", x.ncols())));
        }
        Ok(x.dot(&self.beta_star) + self.intercept)
    }
}

pub fn predict(model: &AveragedModel, x: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != model.num_features() {
        return Err(dims(format!("{} features", model.num_features()), format!("{} features", x.len())));
    }
    Ok(model.intercept + x.dot(&model.beta_star))
}

/// Overlap between the models: the mean, over features active somewhere,
/// of the fraction of models using that feature. Zero when all models are empty.
pub fn overlap(bundle: &CoefficientBundle) -> f64 {
    let g = bundle.num_models() as f64;
    let (sum, active) = bundle
        .beta()
        .rows()
        .into_iter()
        .map(|row| row.iter().filter(|&&b| b != 0.0).count())
        .filter(|&count| count > 0)
        .fold((0.0, 0usize), |(s, a), count| (s + count as f64 / g, a + 1));
    if active == 0 {
        0.0
    } else {
        sum / active as f64
    }
}

/// Precision and recall of an estimated support; `None` where the
/// denominator (estimated or true support) is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub fn precision_recall(beta_hat: ArrayView1<'_, f64>, beta_true: ArrayView1<'_, f64>) -> Result<PrecisionRecall> {
    if beta_hat.len() != beta_true.len() {
        return Err(dims(format!("length {}", beta_true.len()), format!("length {}", beta_hat.len())));
    }
    let (mut hits, mut selected, mut relevant) = (0usize, 0usize, 0usize);
    for (&est, &truth) in beta_hat.iter().zip(beta_true.iter()) {
        let (e, t) = (est != 0.0, truth != 0.0);
        hits += (e && t) as usize;
        selected += e as usize;
        relevant += t as usize;
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(PrecisionRecall { precision: ratio(hits, selected), recall: ratio(hits, relevant) })
}
