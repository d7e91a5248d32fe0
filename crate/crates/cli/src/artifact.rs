//! JSON artifacts written by `fit` and `cv`.

use anyhow::{bail, Result};
use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};
use splitreg::design::destandardize;
use splitreg::{objective, overlap, AveragedModel, CoefficientBundle, PenaltySpec, StandardizedDesign, TuningResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub column_center: Vec<f64>,
    pub column_scale: Vec<f64>,
    pub response_center: f64,
    pub response_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ovp: f64,
    pub converged: bool,
    pub cycles: Option<usize>,
    /// Objective on the standardized scale.
    pub objective: f64,
    pub nonzero_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub schema_version: u32,
    pub response: String,
    pub feature_names: Vec<String>,
    pub penalty: PenaltySpec,
    /// Raw-unit coefficients, one vector per model.
    pub coefficients: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub averaged: Averaged,
    pub standardization: Standardization,
    /// Standardized-scale coefficients, one vector per model.
    pub standardized_coefficients: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
    /// In-sample predictions of the averaged model.
    pub fitted_values: Vec<f64>,
    pub provenance: Provenance,
}

pub struct FitContext<'a> {
    pub feature_names: &'a [String],
    pub response: &'a str,
    pub x_raw: ArrayView2<'a, f64>,
    pub design: &'a StandardizedDesign,
    pub input_sha256: &'a str,
    pub seed: Option<u64>,
}

fn per_model(m: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    m.columns().into_iter().map(|c| c.to_vec()).collect()
}

impl FitArtifact {
    pub fn build(ctx: &FitContext<'_>, spec: &PenaltySpec, bundle: &CoefficientBundle, converged: bool, cycles: Option<usize>) -> Result<FitArtifact> {
        let (raw, intercepts) = destandardize(bundle, ctx.design)?;
        let pooled = AveragedModel::in_raw_units(bundle, ctx.design)?;
        let fitted = pooled.predict_rows(ctx.x_raw)?;
        Ok(FitArtifact {
            schema_version: SCHEMA_VERSION,
            response: ctx.response.to_string(),
            feature_names: ctx.feature_names.to_vec(),
            penalty: *spec,
            coefficients: per_model(&raw),
            intercepts: intercepts.to_vec(),
            averaged: Averaged { coefficients: pooled.beta_star.to_vec(), intercept: pooled.intercept },
            standardization: Standardization {
                column_center: ctx.design.col_center().to_vec(),
                column_scale: ctx.design.col_scale().to_vec(),
                response_center: ctx.design.y_center(),
                response_scale: ctx.design.y_scale(),
            },
            standardized_coefficients: per_model(bundle.beta()),
            diagnostics: Diagnostics {
                ovp: overlap(bundle),
                converged,
                cycles,
                objective: objective(ctx.design, bundle, spec)?,
                nonzero_counts: bundle.nonzero_counts(),
            },
            fitted_values: fitted.to_vec(),
            provenance: Provenance { input_sha256: ctx.input_sha256.to_string(), seed: ctx.seed, version: env!("CARGO_PKG_VERSION").to_string() },
        })
    }

    pub fn averaged_model(&self) -> AveragedModel {
        AveragedModel { beta_star: Array1::from(self.averaged.coefficients.clone()), intercept: self.averaged.intercept }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        Ok(self.averaged_model().predict_rows(x)?)
    }

    pub fn from_json(text: &str) -> Result<FitArtifact> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => bail!("unsupported artifact schema_version {v} (this build reads {SCHEMA_VERSION})"),
            None => bail!("not a fit artifact: missing schema_version"),
        }
        Ok(serde_json::from_value(value)?)
    }
}

/// Summary of one candidate `G` in a CV report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub num_models: usize,
    pub cv_mspe: Option<f64>,
    pub lambda_s: Option<f64>,
    pub lambda_d: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub schema_version: u32,
    pub folds: usize,
    pub seed: u64,
    pub candidates: Vec<CandidateSummary>,
    pub selected: TuningResult,
    pub provenance: Provenance,
}
