//! Cyclic coordinate descent for a fixed penalty configuration.
//!
//! Each coordinate `β_j^g` solves a one-dimensional elastic-net problem whose
//! ℓ₁ weight grows with the magnitude of feature `j` in the other models:
//!
//! ```text
//! β_j^g ← soft(z_jg, αλs + λd Σ_{h≠g} |β_j^h|) / (1 + (1-α)λs)
//! z_jg  = (1/n) Σ_i x_ij (y_i - ŷ_i^{(-j),g})
//! ```
//!
//! Coordinates of model 1 are visited in ascending feature order, then model 2
//! and so on. After every full cycle the solver compares the averaged
//! coefficients: convergence is declared once
//! `max_j (β̄_j^new - β̄_j^old)² < δ`.

use ndarray::{Array2, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::design::StandardizedDesign;
use crate::error::{Error, Result};
use crate::objective::{check_dims, objective, CoefficientBundle, PenaltySpec};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_CYCLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Threshold δ on the squared change of the averaged coefficients.
    pub tolerance: f64,
    pub max_cycles: usize,
    /// Starting point; all zeros when absent.
    pub initial_bundle: Option<CoefficientBundle>,
    /// Record the objective after every cycle (costs one O(npG) pass per cycle).
    pub record_objective: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: DEFAULT_TOLERANCE,
            max_cycles: DEFAULT_MAX_CYCLES,
            initial_bundle: None,
            record_objective: false,
        }
    }
}

impl SolverSettings {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_cycles(mut self, max_cycles: usize) -> Self {
        self.max_cycles = max_cycles;
        self
    }

    pub fn with_initial_bundle(mut self, bundle: Option<CoefficientBundle>) -> Self {
        self.initial_bundle = bundle;
        self
    }

    pub fn recording_objective(mut self) -> Self {
        self.record_objective = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter { name: "tolerance", reason: format!("{} is not > 0", self.tolerance) });
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidParameter { name: "max_cycles", reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

/// Result of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub bundle: CoefficientBundle,
    pub converged: bool,
    pub cycles: usize,
    /// Objective after each full cycle, index 0 being the starting point.
    /// Empty unless [`SolverSettings::record_objective`] was set.
    pub objective_trace: Vec<f64>,
}

/// Per-model residuals `y - Xβ^g`, kept in sync with the bundle.
#[derive(Debug, Clone)]
pub struct ResidualState {
    residuals: Array2<f64>,
}

impl ResidualState {
    pub fn new(design: &StandardizedDesign, bundle: &CoefficientBundle) -> Self {
        let g = bundle.num_models();
        let mut residuals = Array2::zeros((design.n(), g).f());
        let fitted = design.x().dot(bundle.beta());
        for (mut r, f) in residuals.columns_mut().into_iter().zip(fitted.columns()) {
            r.assign(&(design.y() - &f));
        }
        ResidualState { residuals }
    }

    pub fn residual(&self, g: usize) -> &[f64] {
        self.residuals.column(g).to_slice().expect("residuals are column-major")
    }

    fn residual_mut(&mut self, g: usize) -> &mut [f64] {
        self.residuals.column_mut(g).into_slice().expect("residuals are column-major")
    }
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// ℓ₁ weight applied at `(j, g)`: `αλs + λd Σ_{h≠g} |β_j^h|`.
pub fn l1_weight(bundle: &CoefficientBundle, spec: &PenaltySpec, j: usize, g: usize) -> f64 {
    let others: f64 = bundle
        .beta()
        .row(j)
        .iter()
        .enumerate()
        .filter(|&(h, _)| h != g)
        .map(|(_, b)| b.abs())
        .sum();
    spec.alpha * spec.lambda_s + spec.lambda_d * others
}

/// Partial correlation `(1/n) Σ_i x_ij (y_i - ŷ_i^{(-j),g})`.
pub fn partial_correlation(design: &StandardizedDesign, bundle: &CoefficientBundle, j: usize, g: usize, state: &ResidualState) -> f64 {
    let x = design.column(j);
    let r = state.residual(g);
    let dot: f64 = x.iter().zip(r).map(|(a, b)| a * b).sum();
    // Columns have unit second moment, so adding back β_j^g x_j contributes β_j^g.
    dot / design.n() as f64 + bundle.get(j, g)
}

/// Minimizes the objective over `β_j^g` with everything else held fixed.
///
/// Writes the new value into `bundle`, patches the residuals of model `g`
/// and returns the new coefficient.
pub fn coordinate_update(
    design: &StandardizedDesign,
    bundle: &mut CoefficientBundle,
    spec: &PenaltySpec,
    j: usize,
    g: usize,
    state: &mut ResidualState,
) -> f64 {
    let z = partial_correlation(design, bundle, j, g, state);
    let weight = l1_weight(bundle, spec, j, g);
    let updated = soft_threshold(z, weight) / spec.ridge_denominator();
    let previous = bundle.get(j, g);
    if updated != previous {
        let delta = updated - previous;
        let x = design.column(j);
        for (r, xi) in state.residual_mut(g).iter_mut().zip(x) {
            *r -= delta * xi;
        }
        bundle.beta_mut()[[j, g]] = updated;
    }
    updated
}

/// Fits the G models jointly by cyclic coordinate descent.
///
/// When `max_cycles` runs out the last iterate is returned with
/// `converged = false`.
pub fn fit(design: &StandardizedDesign, spec: &PenaltySpec, settings: &SolverSettings) -> Result<FitOutcome> {
    spec.validate()?;
    settings.validate()?;
    let mut bundle = match &settings.initial_bundle {
        Some(start) => {
            if !start.on_standardized_scale() {
                return Err(Error::InvalidParameter { name: "initial_bundle", reason: "warm start must be on the standardized scale".into() });
            }
            start.clone()
        }
        None => CoefficientBundle::zeros(design.p(), spec.num_models),
    };
    check_dims(design, &bundle, spec)?;

    let mut state = ResidualState::new(design, &bundle);
    let mut objective_trace = Vec::new();
    if settings.record_objective {
        objective_trace.push(objective(design, &bundle, spec)?);
    }

    let (p, num_models) = (design.p(), spec.num_models);
    let mut old_means = bundle.row_means();
    for cycle in 1..=settings.max_cycles {
        for g in 0..num_models {
            for j in 0..p {
                coordinate_update(design, &mut bundle, spec, j, g, &mut state);
            }
        }
        let new_means = bundle.row_means();
        let change = new_means
            .iter()
            .zip(old_means.iter())
            .map(|(a, b)| (a - b).powi(2))
            .fold(0.0, f64::max);
        old_means = new_means;
        if settings.record_objective {
            objective_trace.push(objective(design, &bundle, spec)?);
        }
        if !change.is_finite() {
            return Err(Error::NonFinite("coordinate descent iterate"));
        }
        if change < settings.tolerance {
            return Ok(FitOutcome { bundle, converged: true, cycles: cycle, objective_trace });
        }
    }
    Ok(FitOutcome { bundle, converged: false, cycles: settings.max_cycles, objective_trace })
}
