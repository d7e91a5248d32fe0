//! # SplitReg
//!
//! Split regularized regression fits `G` linear models at once. Each model
//! carries an elastic-net penalty, and a diversity penalty
//! `λd Σ_{g<h} Σ_j |β_j^g||β_j^h|` pushes the models toward using different
//! predictors. Predictions come from the equally weighted average of the
//! models.
//!
//! ```
//! use ndarray::array;
//! use splitreg::{fit, standardize, PenaltySpec, SolverSettings, average_coefficients};
//!
//! let x = array![[1.0, 0.2], [2.0, -0.1], [3.0, 0.4], [4.0, 0.0], [5.0, -0.3]];
//! let y = array![1.1, 2.3, 2.8, 4.2, 5.1];
//! let design = standardize(x.view(), y.view())?;
//! let spec = PenaltySpec::new(0.75, 0.01, 0.5, 2)?;
//! let out = fit(&design, &spec, &SolverSettings::default())?;
//! assert!(out.converged);
//! let pooled = average_coefficients(&out.bundle);
//! assert_eq!(pooled.beta_star.len(), 2);
//! # Ok::<(), splitreg::Error>(())
//! ```
//!
//! The modules follow the workflow: [`design`] standardizes data,
//! [`objective`] and [`solver`] define and minimize the criterion,
//! [`tuning`] picks the penalties by cross-validation, [`ensemble`] pools
//! the models, [`oracles`] holds closed-form reference solutions and
//! [`simulate`] generates the benchmark scenarios.

pub mod design;
pub mod ensemble;
pub mod error;
pub mod objective;
pub mod oracles;
pub mod simulate;
pub mod solver;
pub mod tuning;

pub use design::{destandardize, standardize, StandardizedDesign};
pub use ensemble::{average_coefficients, overlap, precision_recall, predict, AveragedModel, PrecisionRecall};
pub use error::{Error, Result};
pub use objective::{diversity_penalty, objective, CoefficientBundle, PenaltySpec};
pub use solver::{coordinate_update, fit, soft_threshold, FitOutcome, ResidualState, SolverSettings};
pub use tuning::{
    best_candidate, build_grid, cv_mspe, lambda_d_max, lambda_s_max, select_num_models, tune, tune_candidates, CvPlan, PenaltyGrid, TuningResult,
    TuningSettings,
};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/closed_forms.md")]
    mod closed_forms {}
    #[doc = include_str!("../../../book/src/tuning.md")]
    mod tuning {}
    #[doc = include_str!("../../../book/src/ensemble.md")]
    mod ensemble {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
