//! Synthetic benchmark scenarios and the Monte-Carlo experiment runner.
//!
//! Three covariance structures are available. With `p₀ = ⌊pζ⌋` active
//! coefficients:
//!
//! * scenario 1: every pair of predictors has correlation ρ; the first `p₀`
//!   coefficients are active;
//! * scenario 2: two independent equicorrelated blocks split after
//!   `b = ⌊p₀/2⌋ + ⌈(p-p₀)/2⌉`; the first `⌊p₀/2⌋` coefficients of each
//!   block are active;
//! * scenario 3: only the leading `p₀` predictors are correlated, and those
//!   are the active ones.
//!
//! Active coefficients are `(-1)^u (a + |z|)` with `u ~ Bernoulli(0.2)`,
//! `z ~ N(0, 1)` and `a = 5 ln n / √n`. The noise level is set from the
//! signal-to-noise ratio `β₀ᵀΣβ₀ / σ²`.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::standardize;
use crate::ensemble::{overlap, precision_recall, AveragedModel};
use crate::error::{Error, Result};
use crate::tuning::{select_num_models, CvPlan, TuningSettings};

/// Eigenvalues above `-EIGEN_CLAMP` are clamped to zero when factorizing.
const EIGEN_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    Equicorrelated = 1,
    TwoBlocks = 2,
    CorrelatedActive = 3,
}

impl TryFrom<u8> for Scenario {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Scenario::Equicorrelated),
            2 => Ok(Scenario::TwoBlocks),
            3 => Ok(Scenario::CorrelatedActive),
            other => Err(format!("unknown scenario {other}, expected 1, 2 or 3")),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub p: usize,
    pub n: usize,
    pub rho: f64,
    /// Proportion of active predictors.
    pub zeta: f64,
    pub snr: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("{} is outside [0, 1)", self.rho) });
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(Error::InvalidParameter { name: "zeta", reason: format!("{} is outside (0, 1)", self.zeta) });
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::InvalidParameter { name: "snr", reason: format!("{} is not > 0", self.snr) });
        }
        if self.n < 2 {
            return Err(Error::TooFewObservations { required: 2, got: self.n });
        }
        if self.num_active() == 0 {
            return Err(Error::InvalidParameter { name: "zeta", reason: format!("floor(p * zeta) = 0 for p = {}", self.p) });
        }
        Ok(())
    }

    /// `p₀ = ⌊pζ⌋`.
    pub fn num_active(&self) -> usize {
        // Nudge so that e.g. 150 * 0.2 is not floored to 29.
        (self.p as f64 * self.zeta * (1.0 + 1e-12)).floor() as usize
    }

    /// First index (0-based) of the second block in scenario 2.
    pub fn block_boundary(&self) -> usize {
        let p0 = self.num_active();
        p0 / 2 + (self.p - p0).div_ceil(2)
    }

    /// 0-based positions of the active coefficients.
    pub fn active_positions(&self) -> Vec<usize> {
        let p0 = self.num_active();
        match self.scenario {
            Scenario::Equicorrelated | Scenario::CorrelatedActive => (0..p0).collect(),
            Scenario::TwoBlocks => {
                let b = self.block_boundary();
                (0..p0 / 2).chain(b..b + (p0 - p0 / 2)).collect()
            }
        }
    }

    /// Index ranges that are equicorrelated with correlation ρ.
    fn correlated_blocks(&self) -> Vec<std::ops::Range<usize>> {
        match self.scenario {
            Scenario::Equicorrelated => vec![0..self.p],
            Scenario::TwoBlocks => {
                let b = self.block_boundary();
                vec![0..b, b..self.p]
            }
            Scenario::CorrelatedActive => vec![0..self.num_active()],
        }
    }
}

/// Covariance matrix and a factor `F` with `F Fᵀ = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    pub sigma: Array2<f64>,
    pub factor: Array2<f64>,
}

pub fn covariance_matrix(spec: &ScenarioSpec) -> Array2<f64> {
    let mut sigma = Array2::eye(spec.p);
    for block in spec.correlated_blocks() {
        for i in block.clone() {
            for j in block.clone() {
                if i != j {
                    sigma[[i, j]] = spec.rho;
                }
            }
        }
    }
    sigma
}

/// Symmetric square root of a PSD matrix via its eigendecomposition.
pub fn psd_factor(sigma: &Array2<f64>) -> Result<Array2<f64>> {
    let p = sigma.nrows();
    let m = DMatrix::from_fn(p, p, |i, j| sigma[[i, j]]);
    let eig = SymmetricEigen::new(m);
    let mut roots = Vec::with_capacity(p);
    for &value in eig.eigenvalues.iter() {
        if value < -EIGEN_CLAMP {
            return Err(Error::NotPositiveSemiDefinite(value));
        }
        roots.push(value.max(0.0).sqrt());
    }
    let v = &eig.eigenvectors;
    Ok(Array2::from_shape_fn((p, p), |(i, j)| (0..p).map(|k| v[(i, k)] * roots[k] * v[(j, k)]).sum()))
}

/// Symmetric square root of the `m × m` equicorrelation matrix:
/// `√(1-ρ) I + (√(1-ρ+mρ) - √(1-ρ))/m · 11ᵀ`.
fn equicorrelation_root(m: usize, rho: f64) -> (f64, f64) {
    let base = (1.0 - rho).sqrt();
    let top = (1.0 - rho + m as f64 * rho).sqrt();
    (base, (top - base) / m as f64)
}

pub fn build_covariance(spec: &ScenarioSpec) -> Result<Covariance> {
    if !(0.0..1.0).contains(&spec.rho) {
        return Err(Error::InvalidParameter { name: "rho", reason: format!("{} is outside [0, 1)", spec.rho) });
    }
    let sigma = covariance_matrix(spec);
    let mut factor = Array2::eye(spec.p);
    for block in spec.correlated_blocks() {
        let (diag, off) = equicorrelation_root(block.len(), spec.rho);
        for i in block.clone() {
            for j in block.clone() {
                factor[[i, j]] = off + if i == j { diag } else { 0.0 };
            }
        }
    }
    Ok(Covariance { sigma, factor })
}

/// `a = 5 ln n / √n`.
pub fn coefficient_floor(n: usize) -> f64 {
    5.0 * (n as f64).ln() / (n as f64).sqrt()
}

pub fn generate_beta0<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Array1<f64> {
    let a = coefficient_floor(spec.n);
    let negative = Bernoulli::new(0.2).expect("valid probability");
    let mut beta = Array1::zeros(spec.p);
    for j in spec.active_positions() {
        let flip = negative.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        let magnitude = a + z.abs();
        beta[j] = if flip { -magnitude } else { magnitude };
    }
    beta
}

/// `σ = √(β₀ᵀΣβ₀ / SNR)`.
pub fn sigma_from_snr(beta0: &Array1<f64>, sigma: &Array2<f64>, snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::InvalidParameter { name: "snr", reason: format!("{snr} is not > 0") });
    }
    let signal = beta0.dot(&sigma.dot(beta0));
    if !(signal > 0.0) {
        return Err(Error::NullSignal);
    }
    Ok((signal / snr).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeModel {
    pub factor: Array2<f64>,
    pub beta0: Array1<f64>,
    pub sigma: f64,
}

impl GenerativeModel {
    pub fn from_spec<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let cov = build_covariance(spec)?;
        let beta0 = generate_beta0(spec, rng);
        let sigma = sigma_from_snr(&beta0, &cov.sigma, spec.snr)?;
        Ok(GenerativeModel { factor: cov.factor, beta0, sigma })
    }

    /// Noiseless mean `Xβ₀`.
    pub fn signal(&self, x: &Array2<f64>) -> Array1<f64> {
        x.dot(&self.beta0)
    }
}

/// Rows `x_i = F g_i` with standard normal `g_i`; `y_i = x_iᵀβ₀ + σ ε_i`.
pub fn sample_dataset<R: Rng + ?Sized>(model: &GenerativeModel, n: usize, rng: &mut R) -> (Array2<f64>, Array1<f64>) {
    let p = model.beta0.len();
    let gaussian = Array2::from_shape_fn((n, p), |_| StandardNormal.sample(rng));
    let x = gaussian.dot(&model.factor.t());
    let noise = Array1::from_shape_fn(n, |_| -> f64 { StandardNormal.sample(rng) });
    let y = model.signal(&x) + noise * model.sigma;
    (x, y)
}

/// Test-set mean squared prediction error divided by `σ²`.
pub fn mspe(predictions: &Array1<f64>, y_test: &Array1<f64>, sigma: f64) -> f64 {
    let mse = (predictions - y_test).mapv(|e| e * e).mean().unwrap_or(f64::NAN);
    mse / (sigma * sigma)
}

/// A CV-tuned estimator: elastic net when `num_models = [1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub label: String,
    pub alpha: f64,
    /// Candidate model counts, chosen by cross-validation.
    pub num_models: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub num_folds: usize,
    pub tuning: TuningSettings,
    /// Run replications concurrently. Results are identical either way.
    pub parallel: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings { num_folds: crate::tuning::DEFAULT_FOLDS, tuning: TuningSettings::default(), parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub method: String,
    pub num_models: usize,
    pub lambda_s: f64,
    pub lambda_d: f64,
    pub mspe_over_sigma2: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub ovp: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedFit {
    pub replication: usize,
    pub method: String,
    pub error: String,
}

/// Mean and standard error (`sd / √count`) of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> MeanSe {
        let count = values.len();
        if count == 0 {
            return MeanSe { mean: f64::NAN, se: f64::NAN, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let se = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        MeanSe { mean, se, count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mspe: MeanSe,
    pub precision: MeanSe,
    pub recall: MeanSe,
    pub ovp: MeanSe,
    pub num_models: MeanSe,
    pub wall_time_s: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ScenarioSpec,
    pub records: Vec<ReplicationRecord>,
    pub failures: Vec<FailedFit>,
    pub summary: Vec<MethodSummary>,
}

/// Recomputes per-method summaries from the records, in `methods` order.
pub fn summarize(records: &[ReplicationRecord], methods: &[MethodConfig]) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|m| {
            let rows: Vec<&ReplicationRecord> = records.iter().filter(|r| r.method == m.label).collect();
            let col = |f: &dyn Fn(&ReplicationRecord) -> Option<f64>| -> MeanSe { MeanSe::of(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>()) };
            MethodSummary {
                method: m.label.clone(),
                mspe: col(&|r| Some(r.mspe_over_sigma2)),
                precision: col(&|r| r.precision),
                recall: col(&|r| r.recall),
                ovp: col(&|r| Some(r.ovp)),
                num_models: col(&|r| Some(r.num_models as f64)),
                wall_time_s: col(&|r| Some(r.wall_time_s)),
            }
        })
        .collect()
}

/// RNG stream of one replication, independent of execution order.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

fn run_method(
    method: &MethodConfig,
    replication: usize,
    train: (&Array2<f64>, &Array1<f64>),
    test: (&Array2<f64>, &Array1<f64>),
    model: &GenerativeModel,
    cv_seed: u64,
    settings: &ExperimentSettings,
) -> Result<ReplicationRecord> {
    let start = Instant::now();
    let design = standardize(train.0.view(), train.1.view())?;
    let plan = CvPlan::new(design.n(), settings.num_folds, cv_seed)?;
    let tuned = select_num_models(&design, &method.num_models, method.alpha, &plan, &settings.tuning)?;
    let averaged = AveragedModel::in_raw_units(&tuned.bundle, &design)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let predictions = averaged.predict_rows(test.0.view())?;
    let pr = precision_recall(averaged.beta_star.view(), model.beta0.view())?;
    Ok(ReplicationRecord {
        replication,
        method: method.label.clone(),
        num_models: tuned.num_models,
        lambda_s: tuned.lambda_s_opt,
        lambda_d: tuned.lambda_d_opt,
        mspe_over_sigma2: mspe(&predictions, test.1, model.sigma),
        precision: pr.precision,
        recall: pr.recall,
        ovp: overlap(&tuned.bundle),
        wall_time_s,
    })
}

type ReplicationOutput = (Vec<ReplicationRecord>, Vec<FailedFit>);

/// Fits every method on a training copy and scores it on an independent test copy.
pub fn run_experiment(spec: &ScenarioSpec, methods: &[MethodConfig], replications: usize, settings: &ExperimentSettings) -> Result<ExperimentResult> {
    spec.validate()?;
    if replications == 0 {
        return Err(Error::InvalidParameter { name: "replications", reason: "must be at least 1".into() });
    }
    if methods.is_empty() {
        return Err(Error::InvalidParameter { name: "methods", reason: "no methods configured".into() });
    }
    let one = |rep: usize| -> Result<ReplicationOutput> {
        let mut rng = replication_rng(spec.seed, rep);
        let model = GenerativeModel::from_spec(spec, &mut rng)?;
        let train = sample_dataset(&model, spec.n, &mut rng);
        let test = sample_dataset(&model, spec.n, &mut rng);
        let cv_seed: u64 = rng.random();
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for method in methods {
            match run_method(method, rep, (&train.0, &train.1), (&test.0, &test.1), &model, cv_seed, settings) {
                Ok(r) => records.push(r),
                Err(e) => failures.push(FailedFit { replication: rep, method: method.label.clone(), error: e.to_string() }),
            }
        }
        Ok((records, failures))
    };
    let outputs: Vec<ReplicationOutput> = if settings.parallel {
        (0..replications).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..replications).map(one).collect::<Result<_>>()?
    };
    let (mut records, mut failures) = (Vec::new(), Vec::new());
    for (r, f) in outputs {
        records.extend(r);
        failures.extend(f);
    }
    let summary = summarize(&records, methods);
    Ok(ExperimentResult { spec: *spec, records, failures, summary })
}
