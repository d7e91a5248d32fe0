//! `simulate`: TOML experiment configs and their delimited-text outputs.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use splitreg::simulate::{run_experiment, ExperimentResult, ExperimentSettings, MethodConfig, Scenario, ScenarioSpec};

use crate::data::sha256_hex;
use crate::output::write_atomically;

pub const BUNDLED: &[(&str, &str)] = &[
    ("scenario2_p150_n75_snr10", include_str!("../configs/scenario2_p150_n75_snr10.toml")),
    ("g_sweep_scenario2_p200_n100", include_str!("../configs/g_sweep_scenario2_p200_n100.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub label: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub num_models: Vec<usize>,
}

fn default_alpha() -> f64 {
    splitreg::tuning::DEFAULT_ALPHA
}

fn default_folds() -> usize {
    splitreg::tuning::DEFAULT_FOLDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: u8,
    pub p: usize,
    pub n: usize,
    pub rho: Vec<f64>,
    pub snr: Vec<f64>,
    pub zeta: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub methods: Vec<MethodEntry>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig = toml::from_str(text).context("invalid experiment config")?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            bail!("invalid experiment config: replications must be at least 1");
        }
        if self.methods.is_empty() {
            bail!("invalid experiment config: no [[methods]] entries");
        }
        for (key, list) in [("rho", &self.rho), ("snr", &self.snr), ("zeta", &self.zeta)] {
            if list.is_empty() {
                bail!("invalid experiment config: '{key}' needs at least one value");
            }
        }
        let mut labels: Vec<&str> = self.methods.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            bail!("invalid experiment config: method labels must be distinct");
        }
        for spec in self.cells()? {
            spec.validate().with_context(|| format!("invalid experiment config cell rho={} snr={} zeta={}", spec.rho, spec.snr, spec.zeta))?;
        }
        Ok(())
    }

    /// Every `(ρ, SNR, ζ)` combination, all driven by the same seed.
    pub fn cells(&self) -> Result<Vec<ScenarioSpec>> {
        let scenario = Scenario::try_from(self.scenario).map_err(|e| anyhow::anyhow!("invalid experiment config: {e}"))?;
        let mut out = Vec::new();
        for &rho in &self.rho {
            for &snr in &self.snr {
                for &zeta in &self.zeta {
                    out.push(ScenarioSpec { scenario, p: self.p, n: self.n, rho, zeta, snr, seed: self.seed });
                }
            }
        }
        Ok(out)
    }

    pub fn methods(&self) -> Vec<MethodConfig> {
        self.methods.iter().map(|m| MethodConfig { label: m.label.clone(), alpha: m.alpha, num_models: m.num_models.clone() }).collect()
    }
}

/// Reads `source` as a path, falling back to the bundled config of that name.
pub fn load_config_text(source: &str) -> Result<String> {
    let path = Path::new(source);
    if path.exists() {
        return std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()));
    }
    if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| *name == source) {
        return Ok(text.to_string());
    }
    let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
    bail!("config '{source}' is neither a file nor a bundled config ({})", names.join(", "))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RECORD_HEADER: &str =
    "scenario,p,n,rho,snr,zeta,replication,method,num_models,lambda_s,lambda_d,mspe_over_sigma2,precision,recall,ovp,wall_time_s";
pub const SUMMARY_HEADER: &str = "scenario,p,n,rho,snr,zeta,method,count,mspe_mean,mspe_se,precision_mean,precision_se,recall_mean,recall_se,ovp_mean,ovp_se,num_models_mean,wall_time_mean,wall_time_se";

fn cell_prefix(s: &ScenarioSpec) -> String {
    format!("{},{},{},{},{},{}", u8::from(s.scenario), s.p, s.n, s.rho, s.snr, s.zeta)
}

pub fn records_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for res in results {
        let prefix = cell_prefix(&res.spec);
        for r in &res.records {
            let _ = writeln!(
                out,
                "{prefix},{},{},{},{},{},{},{},{},{},{}",
                r.replication,
                r.method,
                r.num_models,
                r.lambda_s,
                r.lambda_d,
                r.mspe_over_sigma2,
                opt(r.precision),
                opt(r.recall),
                r.ovp,
                r.wall_time_s
            );
        }
    }
    out
}

pub fn summary_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for res in results {
        let prefix = cell_prefix(&res.spec);
        for s in &res.summary {
            let _ = writeln!(
                out,
                "{prefix},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.method,
                s.mspe.count,
                s.mspe.mean,
                s.mspe.se,
                s.precision.mean,
                s.precision.se,
                s.recall.mean,
                s.recall.se,
                s.ovp.mean,
                s.ovp.se,
                s.num_models.mean,
                s.wall_time_s.mean,
                s.wall_time_s.se
            );
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    version: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a ExperimentConfig,
    cells: usize,
    records: usize,
    failures: Vec<FailureEntry>,
    files: [&'a str; 2],
}

#[derive(Debug, Serialize)]
struct FailureEntry {
    rho: f64,
    snr: f64,
    zeta: f64,
    replication: usize,
    method: String,
    error: String,
}

pub fn run(config_source: &str, out_dir: &Path) -> Result<Vec<ExperimentResult>> {
    let text = load_config_text(config_source)?;
    let config = ExperimentConfig::parse(&text)?;
    let settings = ExperimentSettings { num_folds: config.folds, ..Default::default() };
    let methods = config.methods();
    let mut results = Vec::new();
    for spec in config.cells()? {
        eprintln!("running scenario {} rho={} snr={} zeta={} ({} replications)", config.scenario, spec.rho, spec.snr, spec.zeta, config.replications);
        results.push(run_experiment(&spec, &methods, config.replications, &settings)?);
    }

    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    write_atomically(&out_dir.join("records.csv"), records_csv(&results).as_bytes())?;
    write_atomically(&out_dir.join("summary.csv"), summary_csv(&results).as_bytes())?;
    let failures = results
        .iter()
        .flat_map(|r| {
            r.failures.iter().map(move |f| FailureEntry {
                rho: r.spec.rho,
                snr: r.spec.snr,
                zeta: r.spec.zeta,
                replication: f.replication,
                method: f.method.clone(),
                error: f.error.clone(),
            })
        })
        .collect();
    let manifest = Manifest {
        schema_version: crate::artifact::SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config_sha256: sha256_hex(text.as_bytes()),
        config: &config,
        cells: results.len(),
        records: results.iter().map(|r| r.records.len()).sum(),
        failures,
        files: ["records.csv", "summary.csv"],
    };
    write_atomically(&out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(results)
}
