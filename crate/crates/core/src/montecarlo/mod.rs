//! Seeded simulation of type I error, power, and interval coverage.
//!
//! Each replicate draws from its own ChaCha stream keyed by
//! `(seed, replicate index)`, so results are bit-identical whatever the
//! number of worker threads. Per-replicate outcomes are gathered in index
//! order and summed sequentially.

mod plan;
mod presets;
mod sampling;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_constrained, fit_unconstrained};
use crate::inference::{lr_from_fits, rejects, score_from_fit, wald_from_fit, TestMethod};
use crate::intervals::{
    profile_from_fit, score_from_fit as score_ci_from_fit, wald_constrained_from_fit,
    wald_unconstrained_from_fit, CiMethod, Weighting,
};
use crate::model::{
    smooth_zero_cells, CommonDiffParams, FullParams, StratumSizes, StudyData, DEFAULT_SMOOTHING,
};

pub use plan::{
    PresetSpec, RandomSpec, Reproducibility, ResultRow, ScenarioSpec, SimPlan, SimReport,
};
pub use presets::{expand_preset, PresetScenario};
pub use sampling::{
    params_in_region, random_param_sets, region_acceptance_rate, sample_group, sample_stratum,
    sample_study, ParamSample,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Type1,
    Power,
    Coverage,
}

impl std::fmt::Display for SimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimMode::Type1 => "type1",
            SimMode::Power => "power",
            SimMode::Coverage => "coverage",
        })
    }
}

/// True parameters generating the simulated studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    Common(CommonDiffParams),
    Full(FullParams),
}

impl Truth {
    pub fn to_full(&self) -> FullParams {
        match self {
            Truth::Common(c) => c.to_full(),
            Truth::Full(f) => f.clone(),
        }
    }

    pub fn num_strata(&self) -> usize {
        match self {
            Truth::Common(c) => c.strata.len(),
            Truth::Full(f) => f.strata.len(),
        }
    }

    pub fn common_difference(&self) -> Option<f64> {
        match self {
            Truth::Common(c) => Some(c.d),
            Truth::Full(_) => None,
        }
    }
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub label: String,
    pub mode: SimMode,
    pub sizes: Vec<StratumSizes>,
    pub truth: Truth,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Tests to run in type1/power mode; empty means all three.
    #[serde(default)]
    pub tests: Vec<TestMethod>,
    /// Intervals to build in coverage mode; empty means all five.
    #[serde(default)]
    pub intervals: Vec<CiMethod>,
    /// Added to every cell of a simulated study that has a zero cell.
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
}

impl SimConfig {
    pub fn new(mode: SimMode, sizes: Vec<StratumSizes>, truth: Truth) -> Self {
        SimConfig {
            label: String::new(),
            mode,
            sizes,
            truth,
            replicates: default_replicates(),
            alpha: default_alpha(),
            seed: 0,
            tests: Vec::new(),
            intervals: Vec::new(),
            smoothing: default_smoothing(),
        }
    }

    pub fn num_strata(&self) -> usize {
        self.sizes.len()
    }

    pub fn selected_tests(&self) -> Vec<TestMethod> {
        if self.tests.is_empty() {
            TestMethod::ALL.to_vec()
        } else {
            self.tests.clone()
        }
    }

    pub fn selected_intervals(&self) -> Vec<CiMethod> {
        if self.intervals.is_empty() {
            CiMethod::ALL.to_vec()
        } else {
            self.intervals.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("alpha", "must lie in [0, 1]"));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::config("smoothing", "must be finite and nonnegative"));
        }
        if self.sizes.is_empty() {
            return Err(Error::config("sizes", "need at least one stratum"));
        }
        for (i, sz) in self.sizes.iter().enumerate() {
            for (name, v) in [("n1", sz.n1), ("n2", sz.n2), ("m1", sz.m1), ("m2", sz.m2)] {
                if !(v >= 0.0 && v.fract() == 0.0 && v <= 1e9) {
                    return Err(Error::config(
                        format!("sizes[{i}].{name}"),
                        format!("must be a nonnegative integer, got {v}"),
                    ));
                }
            }
        }
        if self.truth.num_strata() != self.sizes.len() {
            return Err(Error::config(
                "truth",
                format!(
                    "has {} strata but sizes has {}",
                    self.truth.num_strata(),
                    self.sizes.len()
                ),
            ));
        }
        for (i, p) in self.truth.to_full().strata.iter().enumerate() {
            if !p.is_valid() {
                return Err(Error::config(
                    format!("truth.strata[{i}]"),
                    format!("cell probabilities outside [0, 1] for {p:?}"),
                ));
            }
        }
        match self.mode {
            SimMode::Type1 | SimMode::Coverage if self.truth.common_difference().is_none() => {
                Err(Error::config(
                    "truth",
                    format!("{} mode needs a common-difference truth", self.mode),
                ))
            }
            SimMode::Type1 | SimMode::Power if self.sizes.len() < 2 => Err(Error::config(
                "sizes",
                "homogeneity tests need at least 2 strata",
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestTally {
    pub method: TestMethod,
    pub rejections: usize,
    pub accepts: usize,
    /// Replicates where the statistic could not be computed.
    pub degenerate: usize,
    /// Rejections over non-degenerate replicates.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiTally {
    pub method: CiMethod,
    pub covered: usize,
    pub missed: usize,
    pub degenerate: usize,
    /// Fraction of non-degenerate intervals containing the true difference.
    pub coverage: f64,
    pub mean_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub label: String,
    pub mode: SimMode,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tests: Vec<TestTally>,
    pub intervals: Vec<CiTally>,
    /// Replicates whose sampled study had a zero cell and was smoothed.
    pub smoothed: usize,
}

enum Outcome {
    Tests(Vec<Option<bool>>),
    Intervals(Vec<Option<(bool, f64)>>),
}

struct Replicate {
    smoothed: bool,
    outcome: Outcome,
}

/// The random stream for one replicate.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw_study(config: &SimConfig, truth: &FullParams, index: usize) -> (StudyData, bool) {
    let mut rng = replicate_rng(config.seed, index);
    let data = sample_study(&config.sizes, truth, &mut rng);
    if config.smoothing > 0.0 && data.has_zero_cell() {
        (smooth_zero_cells(&data, config.smoothing), true)
    } else {
        (data, false)
    }
}

fn test_outcomes(data: &StudyData, methods: &[TestMethod], alpha: f64) -> Vec<Option<bool>> {
    let ha = fit_unconstrained(data);
    let h0 = fit_constrained(data);
    let df = data.num_strata() - 1;
    methods
        .iter()
        .map(|m| {
            let stat = match m {
                TestMethod::LikelihoodRatio => {
                    if !(ha.converged && h0.converged) {
                        return None;
                    }
                    lr_from_fits(data, h0.clone(), ha.clone())
                }
                TestMethod::Score => {
                    if !h0.converged {
                        return None;
                    }
                    score_from_fit(data, h0.clone())
                }
                TestMethod::Wald => {
                    if !ha.converged {
                        return None;
                    }
                    wald_from_fit(data, ha.clone())
                }
            };
            match stat {
                Ok(r) if r.statistic.is_finite() => Some(rejects(r.statistic, df, alpha)),
                _ => None,
            }
        })
        .collect()
}

fn interval_outcomes(
    data: &StudyData,
    methods: &[CiMethod],
    alpha: f64,
    d0: f64,
) -> Vec<Option<(bool, f64)>> {
    if alpha >= 1.0 {
        return vec![Some((false, 0.0)); methods.len()];
    }
    if alpha <= 0.0 {
        return vec![Some((true, 2.0)); methods.len()];
    }
    let needs_unc = methods
        .iter()
        .any(|m| matches!(m, CiMethod::W1 | CiMethod::W2));
    let needs_con = methods
        .iter()
        .any(|m| matches!(m, CiMethod::W3 | CiMethod::Pro | CiMethod::Sc));
    let ha = needs_unc
        .then(|| fit_unconstrained(data))
        .filter(|f| f.converged);
    let h0 = needs_con
        .then(|| fit_constrained(data))
        .filter(|f| f.converged);
    methods
        .iter()
        .map(|m| {
            let ci = match m {
                CiMethod::W1 => {
                    wald_unconstrained_from_fit(data, ha.as_ref()?, Weighting::Sample, alpha)
                }
                CiMethod::W2 => {
                    wald_unconstrained_from_fit(data, ha.as_ref()?, Weighting::Uniform, alpha)
                }
                CiMethod::W3 => wald_constrained_from_fit(data, h0.as_ref()?, alpha),
                CiMethod::Pro => Ok(profile_from_fit(data, h0.as_ref()?, alpha)),
                CiMethod::Sc => Ok(score_ci_from_fit(data, h0.as_ref()?, alpha)),
            };
            match ci {
                Ok(c) if c.width.is_finite() => Some((c.contains(d0), c.width)),
                _ => None,
            }
        })
        .collect()
}

fn run_replicate(config: &SimConfig, truth: &FullParams, index: usize) -> Replicate {
    let (data, smoothed) = draw_study(config, truth, index);
    let outcome = match config.mode {
        SimMode::Type1 | SimMode::Power => {
            Outcome::Tests(test_outcomes(&data, &config.selected_tests(), config.alpha))
        }
        SimMode::Coverage => {
            let d0 = config.truth.common_difference().unwrap_or(f64::NAN);
            Outcome::Intervals(interval_outcomes(
                &data,
                &config.selected_intervals(),
                config.alpha,
                d0,
            ))
        }
    };
    Replicate { smoothed, outcome }
}

fn aggregate(config: &SimConfig, reps: &[Replicate]) -> SimResult {
    let mut result = SimResult {
        label: config.label.clone(),
        mode: config.mode,
        replicates: config.replicates,
        alpha: config.alpha,
        seed: config.seed,
        tests: Vec::new(),
        intervals: Vec::new(),
        smoothed: reps.iter().filter(|r| r.smoothed).count(),
    };
    match config.mode {
        SimMode::Type1 | SimMode::Power => {
            for (k, method) in config.selected_tests().into_iter().enumerate() {
                let (mut rej, mut acc, mut deg) = (0, 0, 0);
                for r in reps {
                    if let Outcome::Tests(v) = &r.outcome {
                        match v[k] {
                            Some(true) => rej += 1,
                            Some(false) => acc += 1,
                            None => deg += 1,
                        }
                    }
                }
                let valid = rej + acc;
                result.tests.push(TestTally {
                    method,
                    rejections: rej,
                    accepts: acc,
                    degenerate: deg,
                    rate: if valid > 0 {
                        rej as f64 / valid as f64
                    } else {
                        f64::NAN
                    },
                });
            }
        }
        SimMode::Coverage => {
            for (k, method) in config.selected_intervals().into_iter().enumerate() {
                let (mut cov, mut miss, mut deg) = (0, 0, 0);
                let mut length = 0.0;
                for r in reps {
                    if let Outcome::Intervals(v) = &r.outcome {
                        match v[k] {
                            Some((hit, w)) => {
                                if hit {
                                    cov += 1;
                                } else {
                                    miss += 1;
                                }
                                length += w;
                            }
                            None => deg += 1,
                        }
                    }
                }
                let valid = cov + miss;
                result.intervals.push(CiTally {
                    method,
                    covered: cov,
                    missed: miss,
                    degenerate: deg,
                    coverage: if valid > 0 {
                        cov as f64 / valid as f64
                    } else {
                        f64::NAN
                    },
                    mean_length: if valid > 0 {
                        length / valid as f64
                    } else {
                        f64::NAN
                    },
                });
            }
        }
    }
    result
}

/// Runs a simulation on the current rayon pool.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let truth = config.truth.to_full();
    let reps: Vec<Replicate> = (0..config.replicates)
        .into_par_iter()
        .map(|i| run_replicate(config, &truth, i))
        .collect();
    Ok(aggregate(config, &reps))
}

/// Runs a simulation on a dedicated pool of `workers` threads (0 means the
/// rayon default). The result does not depend on `workers`.
pub fn run_with_workers(config: &SimConfig, workers: usize) -> Result<SimResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| run(config))
}

fn require_mode(config: &SimConfig, allowed: &[SimMode]) -> Result<()> {
    if allowed.contains(&config.mode) {
        Ok(())
    } else {
        Err(Error::config(
            "mode",
            format!("unexpected mode {}", config.mode),
        ))
    }
}

pub fn run_type1(config: &SimConfig) -> Result<SimResult> {
    require_mode(config, &[SimMode::Type1])?;
    run(config)
}

pub fn run_power(config: &SimConfig) -> Result<SimResult> {
    require_mode(config, &[SimMode::Power])?;
    run(config)
}

pub fn run_coverage(config: &SimConfig) -> Result<SimResult> {
    require_mode(config, &[SimMode::Coverage])?;
    run(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CommonStratumParams;

    fn small_config(mode: SimMode) -> SimConfig {
        let truth = CommonDiffParams::new(
            0.0,
            vec![
                CommonStratumParams {
                    pi1: 0.5,
                    gamma: 0.5
                };
                2
            ],
        );
        let mut c = SimConfig::new(
            mode,
            vec![StratumSizes::new(30.0, 30.0, 20.0, 20.0); 2],
            Truth::Common(truth),
        );
        c.replicates = 40;
        c.seed = 7;
        c
    }

    #[test]
    fn alpha_one_always_rejects() {
        let mut c = small_config(SimMode::Type1);
        c.alpha = 1.0;
        let r = run(&c).unwrap();
        for t in &r.tests {
            assert_eq!(t.rate, 1.0, "{t:?}");
        }
    }

    #[test]
    fn alpha_zero_never_rejects() {
        let mut c = small_config(SimMode::Power);
        c.alpha = 0.0;
        let r = run(&c).unwrap();
        assert!(r.tests.iter().all(|t| t.rate == 0.0));
    }

    #[test]
    fn coverage_alpha_one_is_empty() {
        let mut c = small_config(SimMode::Coverage);
        c.alpha = 1.0;
        c.replicates = 5;
        let r = run(&c).unwrap();
        for t in &r.intervals {
            assert_eq!((t.coverage, t.mean_length), (0.0, 0.0));
        }
    }

    #[test]
    fn tallies_sum_to_replicates() {
        let c = small_config(SimMode::Coverage);
        let r = run(&c).unwrap();
        for t in &r.intervals {
            assert_eq!(t.covered + t.missed + t.degenerate, c.replicates);
        }
    }

    #[test]
    fn validation_reports_paths() {
        let mut c = small_config(SimMode::Type1);
        c.sizes[1].m2 = 2.5;
        match c.validate() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "sizes[1].m2"),
            other => panic!("{other:?}"),
        }
        let mut c = small_config(SimMode::Coverage);
        c.truth = Truth::Full(c.truth.to_full());
        assert!(c.validate().is_err());
        let mut c = small_config(SimMode::Type1);
        c.replicates = 0;
        assert!(c.validate().is_err());
    }
}
