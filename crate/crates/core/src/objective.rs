//! Penalty configuration, the coefficient bundle and the joint objective.

use ndarray::{Array1, Array2, ArrayView1, Axis, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::design::StandardizedDesign;
use crate::error::{dims, Error, Result};

/// Penalty strengths and the number of jointly fitted models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub alpha: f64,
    pub lambda_s: f64,
    pub lambda_d: f64,
    pub num_models: usize,
}

impl PenaltySpec {
    pub fn new(alpha: f64, lambda_s: f64, lambda_d: f64, num_models: usize) -> Result<Self> {
        let spec = PenaltySpec { alpha, lambda_s, lambda_d, num_models };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter { name: "alpha", reason: format!("{} is outside [0, 1]", self.alpha) });
        }
        if !(self.lambda_s >= 0.0 && self.lambda_s.is_finite()) {
            return Err(Error::InvalidParameter { name: "lambda_s", reason: format!("{} is not a finite value >= 0", self.lambda_s) });
        }
        if !(self.lambda_d >= 0.0 && self.lambda_d.is_finite()) {
            return Err(Error::InvalidParameter { name: "lambda_d", reason: format!("{} is not a finite value >= 0", self.lambda_d) });
        }
        if self.num_models == 0 {
            return Err(Error::InvalidParameter { name: "num_models", reason: "at least one model is required".into() });
        }
        Ok(())
    }

    pub fn with_lambda_s(self, lambda_s: f64) -> Self {
        PenaltySpec { lambda_s, ..self }
    }

    pub fn with_lambda_d(self, lambda_d: f64) -> Self {
        PenaltySpec { lambda_d, ..self }
    }

    /// Ridge denominator `1 + (1 - α) λs` of the coordinate update.
    pub fn ridge_denominator(&self) -> f64 {
        1.0 + (1.0 - self.alpha) * self.lambda_s
    }
}

/// The p × G matrix whose columns are the coefficients of the G models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBundle {
    beta: Array2<f64>,
    on_standardized_scale: bool,
}

impl CoefficientBundle {
    pub fn zeros(p: usize, num_models: usize) -> Self {
        CoefficientBundle { beta: Array2::zeros((p, num_models).f()), on_standardized_scale: true }
    }

    /// Wraps a standardized-scale p × G matrix.
    pub fn from_matrix(beta: Array2<f64>) -> Result<Self> {
        Self::from_matrix_on_scale(beta, true)
    }

    pub fn from_matrix_on_scale(beta: Array2<f64>, on_standardized_scale: bool) -> Result<Self> {
        if beta.ncols() == 0 {
            return Err(Error::InvalidParameter { name: "beta", reason: "bundle has no models".into() });
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficient bundle"));
        }
        let mut stored = Array2::zeros(beta.raw_dim().f());
        stored.assign(&beta);
        Ok(CoefficientBundle { beta: stored, on_standardized_scale })
    }

    /// G copies of the same coefficient vector.
    pub fn repeated(column: ArrayView1<'_, f64>, num_models: usize) -> Self {
        let mut bundle = Self::zeros(column.len(), num_models);
        for mut c in bundle.beta.columns_mut() {
            c.assign(&column);
        }
        bundle
    }

    pub fn beta(&self) -> &Array2<f64> {
        &self.beta
    }

    pub(crate) fn beta_mut(&mut self) -> &mut Array2<f64> {
        &mut self.beta
    }

    pub fn num_features(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_models(&self) -> usize {
        self.beta.ncols()
    }

    pub fn on_standardized_scale(&self) -> bool {
        self.on_standardized_scale
    }

    pub fn model(&self, g: usize) -> ArrayView1<'_, f64> {
        self.beta.column(g)
    }

    pub fn get(&self, j: usize, g: usize) -> f64 {
        self.beta[[j, g]]
    }

    /// Row means, `(1/G) Σ_g β_j^g`.
    pub fn row_means(&self) -> Array1<f64> {
        self.beta.mean_axis(Axis(1)).expect("bundle has at least one model")
    }

    pub fn is_null(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }

    /// Number of exactly nonzero coefficients in each model.
    pub fn nonzero_counts(&self) -> Vec<usize> {
        self.beta.columns().into_iter().map(|c| c.iter().filter(|&&b| b != 0.0).count()).collect()
    }

    /// True when no feature is active in more than one model.
    pub fn is_disjoint(&self) -> bool {
        self.beta.rows().into_iter().all(|row| row.iter().filter(|&&b| b != 0.0).count() <= 1)
    }
}

/// Total diversity term without `λd`: `(1/2) Σ_g Σ_{h≠g} Σ_j |β_j^g||β_j^h|`.
pub fn diversity_penalty(bundle: &CoefficientBundle) -> f64 {
    // Per row, Σ_{g≠h} |a_g||a_h| = (Σ|a|)² - Σ a².
    bundle
        .beta()
        .rows()
        .into_iter()
        .map(|row| {
            let l1: f64 = row.iter().map(|b| b.abs()).sum();
            let l2: f64 = row.iter().map(|b| b * b).sum();
            0.5 * (l1 * l1 - l2)
        })
        .sum()
}

/// Elastic-net penalty `(1-α)/2 ‖b‖² + α ‖b‖₁` of a single model.
pub fn elastic_net_penalty(coef: ArrayView1<'_, f64>, alpha: f64) -> f64 {
    let l2: f64 = coef.iter().map(|b| b * b).sum();
    let l1: f64 = coef.iter().map(|b| b.abs()).sum();
    0.5 * (1.0 - alpha) * l2 + alpha * l1
}

/// Joint objective summed over the G models.
pub fn objective(design: &StandardizedDesign, bundle: &CoefficientBundle, spec: &PenaltySpec) -> Result<f64> {
    check_dims(design, bundle, spec)?;
    let n = design.n() as f64;
    let y = design.y();
    let mut total = 0.0;
    for g in 0..bundle.num_models() {
        let coef = bundle.model(g);
        let resid = y - &design.x().dot(&coef);
        total += resid.dot(&resid) / (2.0 * n) + spec.lambda_s * elastic_net_penalty(coef, spec.alpha);
    }
    Ok(total + spec.lambda_d * diversity_penalty(bundle))
}

pub(crate) fn check_dims(design: &StandardizedDesign, bundle: &CoefficientBundle, spec: &PenaltySpec) -> Result<()> {
    if bundle.num_features() != design.p() {
        return Err(dims(format!("{} features", design.p()), format!("{} features", bundle.num_features())));
    }
    if bundle.num_models() != spec.num_models {
        return Err(dims(format!("{} models", spec.num_models), format!("{} models", bundle.num_models())));
    }
    Ok(())
}
