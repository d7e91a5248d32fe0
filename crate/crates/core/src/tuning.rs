//! Penalty grids, K-fold cross-validation and the alternating search over
//! `λs` and `λd`.
//!
//! The search starts at `λd = 0`. It sweeps the `λs` grid from the largest
//! value down with warm starts and keeps the best CV MSPE. At that `λs` it
//! rebuilds the `λd` grid (zero included), sweeps it the same way, and then
//! goes back to `λs`. The loop stops as soon as a sweep fails to lower the
//! best CV MSPE by a relative margin of [`TuningSettings::relative_tolerance`].
//! Because the first sweep runs at `λd = 0`, the plain elastic-net path is
//! always among the candidates.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::StandardizedDesign;
use crate::ensemble::AveragedModel;
use crate::error::{Error, Result};
use crate::objective::{CoefficientBundle, PenaltySpec};
use crate::solver::{fit, FitOutcome, SolverSettings};

pub const GRID_POINTS: usize = 100;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_ALPHA: f64 = 0.75;
/// Number of evenly spaced points used to refine a bracketed penalty search.
pub const REFINE_POINTS: usize = 20;
const MAX_BRACKET_STEPS: usize = 64;

/// Descending candidate values for one penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyGrid {
    pub values: Vec<f64>,
    pub max_value: f64,
    /// Ratio of the smallest nonzero value to `max_value`.
    pub epsilon: f64,
    pub includes_zero: bool,
}

/// `GRID_POINTS` log-equispaced values from `max_value` down to
/// `ε · max_value`, with `ε = 1e-4` when `p < n` and `1e-2` otherwise.
pub fn build_grid(max_value: f64, p: usize, n: usize, include_zero: bool) -> Result<PenaltyGrid> {
    if !(max_value > 0.0 && max_value.is_finite()) {
        return Err(Error::InvalidParameter { name: "max_value", reason: format!("{max_value} is not a positive finite value") });
    }
    let epsilon: f64 = if p < n { 1e-4 } else { 1e-2 };
    let log_max = max_value.ln();
    let log_span = epsilon.ln();
    let last = (GRID_POINTS - 1) as f64;
    let mut values: Vec<f64> = (0..GRID_POINTS)
        .map(|k| if k == 0 { max_value } else { (log_max + log_span * k as f64 / last).exp() })
        .collect();
    if include_zero {
        values.push(0.0);
    }
    Ok(PenaltyGrid { values, max_value, epsilon, includes_zero: include_zero })
}

/// Assignment of observations to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub num_folds: usize,
    pub fold_assignment: Vec<usize>,
    pub seed: u64,
}

impl CvPlan {
    /// Shuffles `0..n` with `seed` and deals the observations round-robin,
    /// so fold sizes differ by at most one.
    pub fn new(n: usize, num_folds: usize, seed: u64) -> Result<Self> {
        if num_folds < 2 {
            return Err(Error::InvalidParameter { name: "num_folds", reason: format!("need at least 2 folds, got {num_folds}") });
        }
        if num_folds > n {
            return Err(Error::InvalidParameter { name: "num_folds", reason: format!("{num_folds} folds for {n} observations") });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut fold_assignment = vec![0; n];
        for (position, &row) in order.iter().enumerate() {
            fold_assignment[row] = position % num_folds;
        }
        Ok(CvPlan { num_folds, fold_assignment, seed })
    }

    /// Uses an explicit assignment; fold ids must cover `0..num_folds`.
    pub fn from_assignment(fold_assignment: Vec<usize>, seed: u64) -> Result<Self> {
        let num_folds = fold_assignment.iter().max().map_or(0, |m| m + 1);
        if num_folds < 2 {
            return Err(Error::InvalidParameter { name: "fold_assignment", reason: "need at least 2 folds".into() });
        }
        for k in 0..num_folds {
            if !fold_assignment.contains(&k) {
                return Err(Error::InvalidParameter { name: "fold_assignment", reason: format!("fold {k} is empty") });
            }
        }
        Ok(CvPlan { num_folds, fold_assignment, seed })
    }

    pub fn n(&self) -> usize {
        self.fold_assignment.len()
    }

    /// `(training rows, held-out rows)` of fold `k`.
    pub fn split(&self, k: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.n()).partition(|&i| self.fold_assignment[i] != k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningSettings {
    pub solver: SolverSettings,
    pub max_outer_iterations: usize,
    pub relative_tolerance: f64,
    /// Sweep each grid sequentially, seeding every fit with the previous
    /// solution. When off, all grid points are fitted from zero in parallel.
    pub warm_starts: bool,
}

impl Default for TuningSettings {
    fn default() -> Self {
        TuningSettings { solver: SolverSettings::default(), max_outer_iterations: 10, relative_tolerance: 1e-4, warm_starts: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    LambdaS,
    LambdaD,
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub outer_iteration: usize,
    pub sweep: SweepKind,
    pub lambda_s: f64,
    pub lambda_d: f64,
    pub cv_mspe: f64,
    /// Whether every fold fit at this point converged.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub alpha: f64,
    pub lambda_s_opt: f64,
    pub lambda_d_opt: f64,
    pub num_models: usize,
    pub cv_mspe: f64,
    /// Fit on the full design at the selected penalties (standardized scale).
    pub bundle: CoefficientBundle,
    pub final_fit_converged: bool,
    pub trace: Vec<TracePoint>,
    pub nonconverged_fits: usize,
    pub outer_iterations: usize,
}

impl TuningResult {
    pub fn spec(&self) -> PenaltySpec {
        PenaltySpec { alpha: self.alpha, lambda_s: self.lambda_s_opt, lambda_d: self.lambda_d_opt, num_models: self.num_models }
    }
}

/// Training design and held-out rows of one fold.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: StandardizedDesign,
    test_x: Array2<f64>,
    test_y: Array1<f64>,
}

impl Fold {
    /// Sum of squared held-out errors of the averaged model; `bundle` lives on
    /// the training fold's scale, errors are in the units of the parent design.
    fn held_out_sse(&self, bundle: &CoefficientBundle) -> Result<f64> {
        let model = AveragedModel::in_raw_units(bundle, &self.train)?;
        let pred = model.predict_rows(self.test_x.view())?;
        Ok((&pred - &self.test_y).mapv(|e| e * e).sum())
    }
}

/// Re-standardizes every training fold separately.
pub fn prepare_folds(design: &StandardizedDesign, plan: &CvPlan) -> Result<Vec<Fold>> {
    if plan.n() != design.n() {
        return Err(crate::error::dims(format!("plan for {} observations", design.n()), format!("{}", plan.n())));
    }
    (0..plan.num_folds)
        .map(|k| {
            let (train_rows, test_rows) = plan.split(k);
            if train_rows.len() < 2 {
                return Err(Error::TooFewObservations { required: 2, got: train_rows.len() });
            }
            let train = design.restandardize_rows(&train_rows).map_err(|e| match e {
                Error::ConstantColumn { column } => Error::DegenerateFold { fold: k, column },
                other => other,
            })?;
            Ok(Fold {
                train,
                test_x: design.x().select(Axis(0), &test_rows),
                test_y: design.y().select(Axis(0), &test_rows),
            })
        })
        .collect()
}

/// `(cv_mspe, all folds converged)` for each spec of a sweep.
fn cv_sweep(folds: &[Fold], specs: &[PenaltySpec], settings: &TuningSettings) -> Result<Vec<(f64, bool)>> {
    let n: usize = folds.iter().map(|f| f.test_y.len()).sum();
    let per_fold: Vec<Vec<(f64, bool)>> = if settings.warm_starts {
        folds
            .par_iter()
            .map(|fold| {
                path(&fold.train, specs, &settings.solver)?
                    .iter()
                    .map(|out| Ok((fold.held_out_sse(&out.bundle)?, out.converged)))
                    .collect()
            })
            .collect::<Result<_>>()?
    } else {
        let cold = settings.solver.clone().with_initial_bundle(None);
        folds
            .par_iter()
            .map(|fold| {
                specs
                    .par_iter()
                    .map(|spec| {
                        let out = fit(&fold.train, spec, &cold)?;
                        Ok((fold.held_out_sse(&out.bundle)?, out.converged))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?
    };
    Ok((0..specs.len())
        .map(|k| {
            let sse: f64 = per_fold.iter().map(|f| f[k].0).sum();
            (sse / n as f64, per_fold.iter().all(|f| f[k].1))
        })
        .collect())
}

/// Warm-started path: the first spec is fitted from `settings.initial_bundle`,
/// each later one from its predecessor's solution.
pub fn path(design: &StandardizedDesign, specs: &[PenaltySpec], settings: &SolverSettings) -> Result<Vec<FitOutcome>> {
    let mut outcomes: Vec<FitOutcome> = Vec::with_capacity(specs.len());
    let mut current = settings.clone();
    for spec in specs {
        let out = fit(design, spec, &current)?;
        current.initial_bundle = Some(out.bundle.clone());
        outcomes.push(out);
    }
    Ok(outcomes)
}

/// Cold-start CV mean squared prediction error of the averaged model.
pub fn cv_mspe(design: &StandardizedDesign, spec: &PenaltySpec, plan: &CvPlan, settings: &SolverSettings) -> Result<f64> {
    spec.validate()?;
    let folds = prepare_folds(design, plan)?;
    let tuning = TuningSettings { solver: settings.clone().with_initial_bundle(None), warm_starts: false, ..Default::default() };
    Ok(cv_sweep(&folds, std::slice::from_ref(spec), &tuning)?[0].0)
}

/// Closed-form null-model threshold at `λd = 0`: `max_j |Σ_i x_ij y_i| / (nα)`.
pub fn lambda_s_max_closed_form(design: &StandardizedDesign, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(if alpha == 0.0 { Error::ZeroAlpha } else { Error::InvalidParameter { name: "alpha", reason: format!("{alpha} is outside (0, 1]") } });
    }
    let n = design.n() as f64;
    let largest = design
        .x()
        .columns()
        .into_iter()
        .map(|c| c.dot(design.y()).abs())
        .fold(0.0, f64::max);
    Ok(largest / (n * alpha))
}

/// Smallest `λs` at which every model is null.
///
/// Exact at `λd = 0`; otherwise a grid search: double from the closed-form
/// value until the fit is null, then walk down a [`REFINE_POINTS`]-point grid
/// toward half that value while fits stay null.
pub fn lambda_s_max(design: &StandardizedDesign, alpha: f64, lambda_d: f64, num_models: usize, settings: &SolverSettings) -> Result<f64> {
    let closed = lambda_s_max_closed_form(design, alpha)?;
    if lambda_d == 0.0 || num_models == 1 || closed == 0.0 {
        return Ok(closed);
    }
    let cold = settings.clone().with_initial_bundle(None);
    let is_null = |lambda_s: f64| -> Result<bool> {
        let spec = PenaltySpec::new(alpha, lambda_s, lambda_d, num_models)?;
        Ok(fit(design, &spec, &cold)?.bundle.is_null())
    };
    let mut hi = closed;
    let mut steps = 0;
    while !is_null(hi)? {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS {
            return Err(Error::SearchFailed("lambda_s_max"));
        }
    }
    let step = hi / 2.0 / REFINE_POINTS as f64;
    let mut best = hi;
    for k in 1..=REFINE_POINTS {
        let candidate = hi - step * k as f64;
        if !is_null(candidate)? {
            break;
        }
        best = candidate;
    }
    Ok(best)
}

/// Smallest `λd` on a search grid at which the models are pairwise disjoint.
///
/// Brackets by doubling (or halving) from the `λs` scale, then scans
/// [`REFINE_POINTS`] evenly spaced points inside the bracket.
pub fn lambda_d_max(design: &StandardizedDesign, spec: &PenaltySpec, settings: &SolverSettings) -> Result<f64> {
    spec.validate()?;
    if spec.num_models == 1 {
        return Ok(0.0);
    }
    let cold = settings.clone().with_initial_bundle(None);
    if fit(design, &spec.with_lambda_d(0.0), &cold)?.bundle.is_null() {
        return Err(Error::NullFit);
    }
    let disjoint = |lambda_d: f64| -> Result<bool> { Ok(fit(design, &spec.with_lambda_d(lambda_d), &cold)?.bundle.is_disjoint()) };

    let mut hi = spec.lambda_s.max(1e-3);
    let mut lo;
    let mut steps = 0;
    if disjoint(hi)? {
        loop {
            let half = hi / 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Ok(hi);
            }
            if disjoint(half)? {
                hi = half;
            } else {
                lo = half;
                break;
            }
        }
    } else {
        loop {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::SearchFailed("lambda_d_max"));
            }
            if disjoint(hi)? {
                break;
            }
        }
    }
    let step = (hi - lo) / REFINE_POINTS as f64;
    for k in 1..REFINE_POINTS {
        let candidate = lo + step * k as f64;
        if disjoint(candidate)? {
            return Ok(candidate);
        }
    }
    Ok(hi)
}

struct Best {
    cv_mspe: f64,
    specs: Vec<PenaltySpec>,
    index: usize,
}

/// Alternating CV search over `λs` and `λd` for fixed `α` and `G`.
pub fn tune(design: &StandardizedDesign, alpha: f64, num_models: usize, plan: &CvPlan, settings: &TuningSettings) -> Result<TuningResult> {
    PenaltySpec::new(alpha, 0.0, 0.0, num_models)?;
    let folds = prepare_folds(design, plan)?;
    let (n, p) = (design.n(), design.p());
    let base_settings = settings.solver.clone().with_initial_bundle(None);
    let sweep_settings = TuningSettings { solver: base_settings.clone(), ..settings.clone() };

    let mut trace = Vec::new();
    let mut nonconverged_fits = 0;
    let mut best: Option<Best> = None;
    let mut lambda_d_opt = 0.0;
    let mut outer_iterations = 0;

    // Runs one sweep, records it and reports whether it improved the best.
    let mut run_sweep = |outer: usize, kind: SweepKind, specs: Vec<PenaltySpec>, best: &mut Option<Best>| -> Result<(bool, PenaltySpec)> {
        let results = cv_sweep(&folds, &specs, &sweep_settings)?;
        let mut argmin = 0;
        for (k, (spec, &(mspe, converged))) in specs.iter().zip(&results).enumerate() {
            nonconverged_fits += (!converged) as usize * folds.len();
            trace.push(TracePoint { outer_iteration: outer, sweep: kind, lambda_s: spec.lambda_s, lambda_d: spec.lambda_d, cv_mspe: mspe, converged });
            if mspe < results[argmin].0 {
                argmin = k;
            }
        }
        let mspe = results[argmin].0;
        let chosen = specs[argmin];
        // Any decrease updates the best; only a relative decrease above the
        // tolerance keeps the search going.
        let (lower, improved) = match best {
            None => (true, true),
            Some(b) => (mspe < b.cv_mspe, mspe < b.cv_mspe * (1.0 - settings.relative_tolerance)),
        };
        if lower {
            *best = Some(Best { cv_mspe: mspe, specs, index: argmin });
        }
        Ok((improved, chosen))
    };

    for outer in 0..settings.max_outer_iterations.max(1) {
        outer_iterations = outer + 1;
        let ls_max = lambda_s_max(design, alpha, lambda_d_opt, num_models, &base_settings)?;
        let grid = build_grid(ls_max, p, n, false)?;
        let specs = grid.values.iter().map(|&ls| PenaltySpec { alpha, lambda_s: ls, lambda_d: lambda_d_opt, num_models }).collect();
        let (improved, chosen) = run_sweep(outer, SweepKind::LambdaS, specs, &mut best)?;
        if !improved || num_models == 1 {
            break;
        }
        let lambda_s_opt = chosen.lambda_s;

        let ld_max = match lambda_d_max(design, &chosen.with_lambda_d(0.0), &base_settings) {
            Ok(v) if v > 0.0 => v,
            Ok(_) | Err(Error::NullFit) => break,
            Err(e) => return Err(e),
        };
        let grid = build_grid(ld_max, p, n, true)?;
        let specs = grid.values.iter().map(|&ld| PenaltySpec { alpha, lambda_s: lambda_s_opt, lambda_d: ld, num_models }).collect();
        let (improved, chosen) = run_sweep(outer, SweepKind::LambdaD, specs, &mut best)?;
        if !improved {
            break;
        }
        lambda_d_opt = chosen.lambda_d;
    }

    let best = best.expect("at least one sweep runs");
    let selected = best.specs[best.index];
    let final_fit = if settings.warm_starts {
        path(design, &best.specs[..=best.index], &base_settings)?.pop().expect("non-empty path")
    } else {
        fit(design, &selected, &base_settings)?
    };
    Ok(TuningResult {
        alpha,
        lambda_s_opt: selected.lambda_s,
        lambda_d_opt: selected.lambda_d,
        num_models,
        cv_mspe: best.cv_mspe,
        bundle: final_fit.bundle,
        final_fit_converged: final_fit.converged,
        trace,
        nonconverged_fits,
        outer_iterations,
    })
}

/// Runs [`tune`] for every distinct candidate `G`, in increasing order.
pub fn tune_candidates(
    design: &StandardizedDesign,
    candidates: &[usize],
    alpha: f64,
    plan: &CvPlan,
    settings: &TuningSettings,
) -> Vec<(usize, Result<TuningResult>)> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.into_iter().map(|g| (g, tune(design, alpha, g, plan, settings))).collect()
}

/// Result with the smallest CV MSPE; ties go to the earliest (smallest G).
pub fn best_candidate(results: Vec<(usize, Result<TuningResult>)>) -> Result<TuningResult> {
    if results.is_empty() {
        return Err(Error::InvalidParameter { name: "candidates", reason: "no candidate model counts".into() });
    }
    let mut best: Option<TuningResult> = None;
    let mut last_err = None;
    for (_, outcome) in results {
        match outcome {
            Ok(result) => {
                if best.as_ref().is_none_or(|b| result.cv_mspe < b.cv_mspe) {
                    best = Some(result);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| Error::AllCandidatesFailed(Box::new(last_err.expect("a candidate failed"))))
}

/// Tunes each candidate number of models and keeps the lowest CV MSPE; ties
/// go to the smaller G.
pub fn select_num_models(design: &StandardizedDesign, candidates: &[usize], alpha: f64, plan: &CvPlan, settings: &TuningSettings) -> Result<TuningResult> {
    best_candidate(tune_candidates(design, candidates, alpha, plan, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::standardize;
    use ndarray::Array2;
    use rand_distr::{Distribution, StandardNormal};

    fn random_design(n: usize, p: usize, seed: u64) -> StandardizedDesign {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| StandardNormal.sample(&mut rng));
        let noise: Array1<f64> = Array1::from_shape_fn(n, |_| StandardNormal.sample(&mut rng));
        let y = x.column(0).to_owned() * 2.0 - x.column(1).to_owned() + noise;
        standardize(x.view(), y.view()).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = build_grid(1.0, 10, 100, false).unwrap();
        assert_eq!(g.values.len(), 100);
        assert_eq!(g.values[0], 1.0);
        assert!((g.values[99] - 1e-4).abs() < 1e-16);
        let ratio = g.values[1] / g.values[0];
        for w in g.values.windows(2) {
            assert!(w[1] < w[0]);
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
        let g = build_grid(1.0, 200, 100, false).unwrap();
        assert!((g.values[99] - 1e-2).abs() < 1e-15);
        assert_eq!(g.epsilon, 1e-2);
        let g = build_grid(2.0, 10, 100, true).unwrap();
        assert_eq!(g.values.len(), 101);
        assert_eq!(*g.values.last().unwrap(), 0.0);
        assert!(build_grid(0.0, 10, 100, false).is_err());
    }

    #[test]
    fn plan_balances_and_reproduces() {
        let a = CvPlan::new(23, 5, 7).unwrap();
        let b = CvPlan::new(23, 5, 7).unwrap();
        assert_eq!(a, b);
        let mut sizes = [0; 5];
        for &k in &a.fold_assignment {
            sizes[k] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_ne!(a, CvPlan::new(23, 5, 8).unwrap());
        assert!(CvPlan::new(3, 1, 0).is_err());
        assert!(CvPlan::new(3, 4, 0).is_err());
        assert!(CvPlan::from_assignment(vec![0, 0, 2], 0).is_err());
    }

    #[test]
    fn closed_form_lambda_max() {
        let d = random_design(30, 6, 1);
        let one = lambda_s_max_closed_form(&d, 1.0).unwrap();
        let r = d.marginal_correlations();
        assert!((one - r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).abs() < 1e-12);
        assert!((lambda_s_max_closed_form(&d, 0.5).unwrap() - 2.0 * one).abs() < 1e-12);
        assert_eq!(lambda_s_max_closed_form(&d, 0.0).unwrap_err(), Error::ZeroAlpha);
        assert_eq!(lambda_s_max(&d, 1.0, 0.0, 2, &SolverSettings::default()).unwrap(), one);
    }

    #[test]
    fn lambda_s_max_brackets_with_diversity() {
        let d = random_design(30, 6, 2);
        let s = SolverSettings::default();
        let v = lambda_s_max(&d, 0.75, 0.4, 3, &s).unwrap();
        let at = |ls: f64| fit(&d, &PenaltySpec::new(0.75, ls, 0.4, 3).unwrap(), &s).unwrap().bundle;
        assert!(at(v).is_null());
        assert!(!at(0.9 * v).is_null());
    }

    #[test]
    fn lambda_d_max_single_model_and_null() {
        let d = random_design(30, 6, 3);
        let s = SolverSettings::default();
        assert_eq!(lambda_d_max(&d, &PenaltySpec::new(1.0, 0.01, 0.0, 1).unwrap(), &s).unwrap(), 0.0);
        let big = lambda_s_max_closed_form(&d, 1.0).unwrap() * 2.0;
        assert_eq!(lambda_d_max(&d, &PenaltySpec::new(1.0, big, 0.0, 2).unwrap(), &s).unwrap_err(), Error::NullFit);
        let v = lambda_d_max(&d, &PenaltySpec::new(1.0, 0.05, 0.0, 3).unwrap(), &s).unwrap();
        assert!(fit(&d, &PenaltySpec::new(1.0, 0.05, v, 3).unwrap(), &s).unwrap().bundle.is_disjoint());
    }

    #[test]
    fn null_model_cv_error_near_variance() {
        let d = random_design(40, 5, 4);
        let plan = CvPlan::new(40, 5, 11).unwrap();
        let ls = 2.0 * lambda_s_max_closed_form(&d, 1.0).unwrap();
        let mspe = cv_mspe(&d, &PenaltySpec::new(1.0, ls, 0.0, 2).unwrap(), &plan, &SolverSettings::default()).unwrap();
        // Null models predict the training-fold mean of y.
        let mut sse = 0.0;
        for k in 0..plan.num_folds {
            let (train, test) = plan.split(k);
            let mean = train.iter().map(|&i| d.y()[i]).sum::<f64>() / train.len() as f64;
            sse += test.iter().map(|&i| (d.y()[i] - mean).powi(2)).sum::<f64>();
        }
        assert!((mspe - sse / 40.0).abs() < 1e-12);
        assert!((mspe - 1.0).abs() < 0.25, "{mspe}");
    }

    #[test]
    fn fold_relabeling_invariance() {
        let d = random_design(24, 4, 5);
        let plan = CvPlan::new(24, 4, 3).unwrap();
        let relabeled = CvPlan::from_assignment(plan.fold_assignment.iter().map(|&k| 3 - k).collect(), 3).unwrap();
        let spec = PenaltySpec::new(0.75, 0.05, 0.1, 2).unwrap();
        let s = SolverSettings::default().with_tolerance(1e-14);
        let a = cv_mspe(&d, &spec, &plan, &s).unwrap();
        let b = cv_mspe(&d, &spec, &relabeled, &s).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fold_is_reported() {
        // Column 1 is nonzero in a single row; a fold without it leaves it constant.
        let mut x = Array2::<f64>::zeros((6, 2));
        for i in 0..6 {
            x[[i, 0]] = i as f64;
        }
        x[[0, 1]] = 1.0;
        let y = ndarray::array![1.0, 0.0, 2.0, 1.5, -1.0, 0.3];
        let d = standardize(x.view(), y.view()).unwrap();
        let plan = CvPlan::from_assignment(vec![0, 0, 0, 1, 1, 1], 0).unwrap();
        let err = cv_mspe(&d, &PenaltySpec::new(1.0, 0.1, 0.0, 1).unwrap(), &plan, &SolverSettings::default()).unwrap_err();
        assert_eq!(err, Error::DegenerateFold { fold: 0, column: 1 });
    }
}
