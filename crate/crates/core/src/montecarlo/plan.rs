//! Simulation plan documents and flat result reports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    expand_preset, random_param_sets, run_with_workers, SimConfig, SimMode, SimResult, Truth,
};
use crate::error::{Error, Result};
use crate::inference::TestMethod;
use crate::intervals::CiMethod;
use crate::model::{CommonDiffParams, CommonStratumParams, StratumSizes, DEFAULT_SMOOTHING};

/// Per-scenario overrides of the plan defaults.
struct Overrides<'a> {
    replicates: Option<usize>,
    alpha: Option<f64>,
    tests: &'a [TestMethod],
    intervals: &'a [CiMethod],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    /// Preset expression such as `C2 N1 d1 g1 p1` or `T8 d1 g* p1`.
    pub name: String,
    /// Bilateral group size for type I and power presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    /// Unilateral group size for type I and power presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestMethod>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<CiMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub mode: SimMode,
    pub strata: usize,
    /// Number of random parameter sets.
    pub count: usize,
    pub n: f64,
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tests: Vec<TestMethod>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<CiMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioSpec {
    Preset(PresetSpec),
    Random(RandomSpec),
    /// A complete config; its own seed, replicates and alpha are used as is.
    Config(SimConfig),
}

fn default_replicates() -> usize {
    10_000
}

fn default_alpha() -> f64 {
    0.05
}

fn default_smoothing() -> f64 {
    DEFAULT_SMOOTHING
}

/// A batch of scenarios sharing one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimPlan {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    pub scenarios: Vec<ScenarioSpec>,
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    Error::config(
        if path.is_empty() { ".".into() } else { path },
        e.into_inner().to_string(),
    )
}

macro_rules! overrides {
    ($spec:expr) => {
        Overrides {
            replicates: $spec.replicates,
            alpha: $spec.alpha,
            tests: &$spec.tests,
            intervals: &$spec.intervals,
        }
    };
}

impl SimPlan {
    /// Parses a JSON plan. A document without a `scenarios` key is read as a
    /// single [`SimConfig`] and wrapped in a one-scenario plan.
    pub fn from_json(text: &str) -> Result<SimPlan> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let is_plan = value
            .as_object()
            .is_some_and(|o| o.contains_key("scenarios"));
        if is_plan {
            serde_path_to_error::deserialize(value).map_err(parse_error)
        } else {
            let config: SimConfig = serde_path_to_error::deserialize(value).map_err(parse_error)?;
            Ok(SimPlan {
                seed: config.seed,
                replicates: config.replicates,
                alpha: config.alpha,
                smoothing: config.smoothing,
                scenarios: vec![ScenarioSpec::Config(config)],
            })
        }
    }

    /// Replaces the seed and/or replicate count of every scenario.
    pub fn override_all(&mut self, seed: Option<u64>, replicates: Option<usize>) {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(n) = replicates {
            self.replicates = n;
        }
        for spec in &mut self.scenarios {
            match spec {
                ScenarioSpec::Preset(p) => p.replicates = replicates.or(p.replicates),
                ScenarioSpec::Random(r) => r.replicates = replicates.or(r.replicates),
                ScenarioSpec::Config(c) => {
                    c.seed = seed.unwrap_or(c.seed);
                    c.replicates = replicates.unwrap_or(c.replicates);
                }
            }
        }
    }

    fn apply(&self, mut config: SimConfig, o: &Overrides<'_>) -> SimConfig {
        config.seed = self.seed;
        config.replicates = o.replicates.unwrap_or(self.replicates);
        config.alpha = o.alpha.unwrap_or(self.alpha);
        config.smoothing = self.smoothing;
        config.tests = o.tests.to_vec();
        config.intervals = o.intervals.to_vec();
        config
    }

    /// Resolves every scenario into concrete configs, validating each.
    pub fn expand(&self) -> Result<Vec<SimConfig>> {
        let mut out = Vec::new();
        for (i, spec) in self.scenarios.iter().enumerate() {
            let at = |e: Error| match e {
                Error::Config { path, message } => {
                    Error::config(format!("scenarios[{i}].{path}"), message)
                }
                other => other,
            };
            match spec {
                ScenarioSpec::Preset(p) => {
                    let sizes = match (p.n, p.m) {
                        (Some(n), Some(m)) => Some((n, m)),
                        (None, None) => None,
                        _ => return Err(at(Error::config("n", "n and m must be given together"))),
                    };
                    for s in expand_preset(&p.name, sizes).map_err(at)? {
                        out.push(self.apply(s.config, &overrides!(p)));
                    }
                }
                ScenarioSpec::Random(r) => {
                    if r.strata == 0 {
                        return Err(at(Error::config("strata", "must be at least 1")));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    rng.set_stream(u64::MAX - i as u64);
                    let common = r.mode != SimMode::Power;
                    let sample = random_param_sets(r.strata, r.count, common, &mut rng);
                    let sizes = vec![StratumSizes::new(r.n, r.n, r.m, r.m); r.strata];
                    for (k, params) in sample.sets.into_iter().enumerate() {
                        let truth = if common {
                            Truth::Common(CommonDiffParams::new(
                                params.strata[0].risk_difference(),
                                params
                                    .strata
                                    .iter()
                                    .map(|p| CommonStratumParams {
                                        pi1: p.pi1,
                                        gamma: p.gamma,
                                    })
                                    .collect(),
                            ))
                        } else {
                            Truth::Full(params)
                        };
                        let mut c = SimConfig::new(r.mode, sizes.clone(), truth);
                        c.label = format!("random {} S{} #{}", r.mode, r.strata, k + 1);
                        out.push(self.apply(c, &overrides!(r)));
                    }
                }
                ScenarioSpec::Config(c) => out.push(c.clone()),
            }
        }
        for (i, c) in out.iter().enumerate() {
            c.validate().map_err(|e| match e {
                Error::Config { path, message } => {
                    Error::config(format!("config {} ({}).{path}", i, c.label), message)
                }
                other => other,
            })?;
        }
        Ok(out)
    }

    /// Runs every scenario with `workers` threads (0 = rayon default).
    pub fn run(&self, workers: usize) -> Result<SimReport> {
        let configs = self.expand()?;
        let results = configs
            .iter()
            .map(|c| run_with_workers(c, workers))
            .collect::<Result<Vec<_>>>()?;
        Ok(SimReport::new(self, results))
    }
}

/// One line of the flat results table: a configuration × method pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub mode: SimMode,
    pub method: String,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Replicates that produced a usable statistic or interval.
    pub valid: usize,
    pub degenerate: usize,
    pub smoothed: usize,
    /// Rejection rate for tests, coverage fraction for intervals.
    pub rate: f64,
    /// Mean interval width; empty for tests.
    pub mean_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducibility {
    pub seed: u64,
    pub version: String,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub reproducibility: Reproducibility,
    pub rows: Vec<ResultRow>,
    pub results: Vec<SimResult>,
}

impl SimReport {
    pub fn new(plan: &SimPlan, results: Vec<SimResult>) -> SimReport {
        let mut rows = Vec::new();
        for r in &results {
            for t in &r.tests {
                rows.push(ResultRow {
                    scenario: r.label.clone(),
                    mode: r.mode,
                    method: t.method.label().to_string(),
                    replicates: r.replicates,
                    alpha: r.alpha,
                    seed: r.seed,
                    valid: t.rejections + t.accepts,
                    degenerate: t.degenerate,
                    smoothed: r.smoothed,
                    rate: t.rate,
                    mean_length: None,
                });
            }
            for c in &r.intervals {
                rows.push(ResultRow {
                    scenario: r.label.clone(),
                    mode: r.mode,
                    method: c.method.label().to_string(),
                    replicates: r.replicates,
                    alpha: r.alpha,
                    seed: r.seed,
                    valid: c.covered + c.missed,
                    degenerate: c.degenerate,
                    smoothed: r.smoothed,
                    rate: c.coverage,
                    mean_length: Some(c.mean_length),
                });
            }
        }
        SimReport {
            reproducibility: Reproducibility {
                seed: plan.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                replicates: plan.replicates,
            },
            rows,
            results,
        }
    }

    /// The flat results table as CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::Internal(format!("csv export: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Internal(format!("csv export: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_round_trip_and_expand() {
        let text = r#"{
            "seed": 11, "replicates": 3,
            "scenarios": [
                {"preset": {"name": "C2 N1 d1 g* p1", "intervals": ["W1", "SC"]}},
                {"preset": {"name": "T2 d1 g1 p1", "n": 25, "m": 15, "tests": ["SC"]}},
                {"random": {"mode": "power", "strata": 3, "count": 2, "n": 20, "m": 10}}
            ]
        }"#;
        let plan = SimPlan::from_json(text).unwrap();
        let configs = plan.expand().unwrap();
        assert_eq!(configs.len(), 2 + 1 + 2);
        assert!(configs.iter().all(|c| c.seed == 11 && c.replicates == 3));
        assert_eq!(configs[0].intervals, vec![CiMethod::W1, CiMethod::Sc]);
        assert_eq!(configs[3].num_strata(), 3);
        let again = SimPlan::from_json(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(again, plan);
    }

    #[test]
    fn single_config_document() {
        let text = r#"{"mode": "type1", "replicates": 2, "seed": 5,
            "sizes": [{"n1": 10, "n2": 10, "m1": 5, "m2": 5}, {"n1": 10, "n2": 10, "m1": 5, "m2": 5}],
            "truth": {"common": {"d": 0.0, "strata": [{"pi1": 0.5, "gamma": 0.5}, {"pi1": 0.5, "gamma": 0.5}]}}}"#;
        let plan = SimPlan::from_json(text).unwrap();
        let report = plan.run(1).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.reproducibility.seed, 5);
        assert!(report
            .to_csv()
            .unwrap()
            .starts_with("scenario,mode,method,"));
    }

    #[test]
    fn errors_carry_field_paths() {
        let text =
            r#"{"scenarios": [{"preset": {"name": "C2 N1 d1 g1 p1", "replicates": "many"}}]}"#;
        match SimPlan::from_json(text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "scenarios[0].preset.replicates"),
            other => panic!("{other:?}"),
        }
        let text = r#"{"mode": "type1", "sizes": [], "truth": {"common": {"d": 0, "strata": []}}, "colour": 1}"#;
        assert!(matches!(
            SimPlan::from_json(text),
            Err(Error::Config { .. })
        ));
        assert!(matches!(SimPlan::from_json("{"), Err(Error::Parse { .. })));
        let text = r#"{"scenarios": [{"preset": {"name": "C2 N1 d1 g1 p1", "n": 3}}]}"#;
        match SimPlan::from_json(text).unwrap().expand() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "scenarios[0].n"),
            other => panic!("{other:?}"),
        }
    }
}
