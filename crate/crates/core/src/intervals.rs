//! Confidence intervals for a common risk difference: two unconstrained
//! Wald intervals (sample and uniform stratum weights), a constrained Wald
//! interval, and profile-likelihood and score intervals found by a
//! direction-reversing step search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    fit_conditional_from, fit_constrained, fit_unconstrained, FitOptions, FitResult,
};
use crate::inference::fisher_blocks;
use crate::model::{score_wrt_d, CommonDiffParams, StratumSizes, StudyData};
use crate::numkit::{
    chi2_quantile, dense_inverse, normal_quantile, symmetric_pseudo_inverse, Matrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CiMethod {
    W1,
    W2,
    W3,
    #[serde(rename = "PRO")]
    Pro,
    #[serde(rename = "SC")]
    Sc,
}

impl CiMethod {
    pub const ALL: [CiMethod; 5] = [
        CiMethod::W1,
        CiMethod::W2,
        CiMethod::W3,
        CiMethod::Pro,
        CiMethod::Sc,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CiMethod::W1 => "W1",
            CiMethod::W2 => "W2",
            CiMethod::W3 => "W3",
            CiMethod::Pro => "PRO",
            CiMethod::Sc => "SC",
        }
    }
}

impl std::fmt::Display for CiMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "W1" => Ok(CiMethod::W1),
            "W2" => Ok(CiMethod::W2),
            "W3" => Ok(CiMethod::W3),
            "PRO" => Ok(CiMethod::Pro),
            "SC" => Ok(CiMethod::Sc),
            other => Err(Error::domain(format!("unknown interval method `{other}`"))),
        }
    }
}

/// Stratum weights for the unconstrained Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Proportional to stratum size (`N_s + M_s`).
    Sample,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiResult {
    pub method: CiMethod,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub center_estimate: f64,
    pub alpha: f64,
    /// Boundary estimate, regularized information, or truncated search.
    pub flagged: bool,
}

impl CiResult {
    fn new(
        method: CiMethod,
        lower: f64,
        upper: f64,
        center: f64,
        alpha: f64,
        flagged: bool,
    ) -> Self {
        let lower = lower.clamp(-1.0, 1.0);
        let upper = upper.clamp(-1.0, 1.0);
        CiResult {
            method,
            lower,
            upper,
            width: upper - lower,
            center_estimate: center,
            alpha,
            flagged,
        }
    }

    pub fn contains(&self, d: f64) -> bool {
        self.lower <= d && d <= self.upper
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Expected information of `(d, π_11, γ_1, …, π_S1, γ_S)` under a common
/// difference: a first row/column coupling `d` to every stratum plus 2×2
/// diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonInfoMatrix {
    pub id: f64,
    /// `(I*_{s1}, I*_{s2})`: coupling of `d` with `π_s1` and `γ_s`.
    pub coupling: Vec<(f64, f64)>,
    /// `(I*_{s,11}, I*_{s,12}, I*_{s,22})`.
    pub blocks: Vec<(f64, f64, f64)>,
}

impl CommonInfoMatrix {
    pub fn dim(&self) -> usize {
        2 * self.blocks.len() + 1
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        m[(0, 0)] = self.id;
        for (s, (&(c1, c2), &(b11, b12, b22))) in self.coupling.iter().zip(&self.blocks).enumerate()
        {
            let (i, j) = (1 + 2 * s, 2 + 2 * s);
            m[(0, i)] = c1;
            m[(i, 0)] = c1;
            m[(0, j)] = c2;
            m[(j, 0)] = c2;
            m[(i, i)] = b11;
            m[(i, j)] = b12;
            m[(j, i)] = b12;
            m[(j, j)] = b22;
        }
        m
    }

    /// `(I_0⁻¹)_{1,1}` as the ratio of the product of block determinants to
    /// the first-row cofactor expansion of `det I_0`.
    pub fn ab_variance(&self) -> f64 {
        let dets: Vec<f64> = self.blocks.iter().map(|&(a, b, c)| a * c - b * b).collect();
        let s_count = dets.len();
        // prefix[s] = ∏_{j<s} det_j, suffix[s] = ∏_{j≥s} det_j
        let mut prefix = vec![1.0; s_count + 1];
        let mut suffix = vec![1.0; s_count + 1];
        for s in 0..s_count {
            prefix[s + 1] = prefix[s] * dets[s];
        }
        for s in (0..s_count).rev() {
            suffix[s] = suffix[s + 1] * dets[s];
        }
        let a = prefix[s_count];
        let mut b = self.id * a;
        for s in 0..s_count {
            let (c1, c2) = self.coupling[s];
            let (b11, b12, b22) = self.blocks[s];
            let term = -c1 * (c1 * b22 - c2 * b12) + c2 * (c1 * b12 - c2 * b11);
            b += term * prefix[s] * suffix[s + 1];
        }
        a / b
    }

    /// `(I_0⁻¹)_{1,1}` by dense inversion, falling back to a pseudo-inverse
    /// when singular. The flag reports the fallback.
    pub fn variance_d(&self) -> (f64, bool) {
        let dense = self.to_dense();
        match dense_inverse(&dense) {
            Ok(inv) => (inv[(0, 0)], false),
            Err(_) => (symmetric_pseudo_inverse(&dense, 1e-12)[(0, 0)], true),
        }
    }
}

/// Expected information in the common-difference parametrization.
pub fn common_info(sizes: &[StratumSizes], cparams: &CommonDiffParams) -> Result<CommonInfoMatrix> {
    if sizes.len() != cparams.strata.len() {
        return Err(Error::domain("stratum count mismatch"));
    }
    if !cparams.is_interior() {
        return Err(Error::domain(
            "common-difference information requires strictly interior parameters",
        ));
    }
    let d = cparams.d;
    let mut id = 0.0;
    let mut coupling = Vec::with_capacity(sizes.len());
    let mut blocks = Vec::with_capacity(sizes.len());
    for (sz, sp) in sizes.iter().zip(&cparams.strata) {
        let StratumSizes { n1, n2, m1, m2 } = *sz;
        let (p, g) = (sp.pi1, sp.gamma);
        let x = d - p;
        let q1 = g * p - 2.0 * p + 1.0;
        let q2 = 2.0 * d - 2.0 * p - d * g + g * p + 1.0;
        let dd = m2 / (x + 1.0) - m2 / x + n2 * (2.0 * p - 2.0 * d + 2.0 * g * x) / (x * x)
            - g * n2 / x
            + n2 * (g - 2.0).powi(2) * (2.0 * d - 2.0 * p - g * x + 1.0) / (q2 * q2);
        id += dd;
        let c1 = m2 / x - m2 / (x + 1.0) - n2 * (2.0 * p - 2.0 * d + 2.0 * g * x) / (x * x)
            + g * n2 / x
            - n2 * (g - 2.0).powi(2) * (2.0 * d - 2.0 * p - g * x + 1.0) / (q2 * q2);
        let c2 = n2 / q2;
        let b11 = m1 / p - m2 / x + m2 / (x + 1.0) - m1 / (p - 1.0) + g * n1 / p
            - g * n2 / x
            - 2.0 * n1 * (g - 1.0) / p
            + 2.0 * n2 * (g - 1.0) / x
            + n2 * (g - 2.0).powi(2) / q2
            + n1 * (g - 2.0).powi(2) / q1;
        let b12 = -(n1 + n2 + 2.0 * d * n1 - 2.0 * n1 * p - 2.0 * n2 * p - d * g * n1
            + g * n1 * p
            + g * n2 * p)
            / (q1 * q2);
        let b22 = n1 * p / g - n2 * x / g + n1 * p * p / q1 - 2.0 * n1 * p / (g - 1.0)
            + n2 * x * x / q2
            + 2.0 * n2 * x / (g - 1.0);
        coupling.push((c1, c2));
        blocks.push((b11, b12, b22));
    }
    Ok(CommonInfoMatrix {
        id,
        coupling,
        blocks,
    })
}

pub fn ci_wald_unconstrained(
    data: &StudyData,
    weighting: Weighting,
    alpha: f64,
) -> Result<CiResult> {
    check_alpha(alpha)?;
    let fit = fit_unconstrained(data).require_converged("unconstrained")?;
    wald_unconstrained_from_fit(data, &fit, weighting, alpha)
}

pub fn wald_unconstrained_from_fit(
    data: &StudyData,
    fit: &FitResult<crate::model::FullParams>,
    weighting: Weighting,
    alpha: f64,
) -> Result<CiResult> {
    let sizes = data.sizes();
    let total: f64 = sizes.iter().map(StratumSizes::total).sum();
    let s_count = sizes.len() as f64;
    let weights: Vec<f64> = match weighting {
        Weighting::Sample if total > 0.0 => sizes.iter().map(|z| z.total() / total).collect(),
        _ => vec![1.0 / s_count; sizes.len()],
    };
    let blocks = fisher_blocks(data, &fit.params)?;
    let mut center = 0.0;
    let mut var = 0.0;
    let mut flagged = fit.boundary;
    for ((w, block), d) in weights
        .iter()
        .zip(&blocks)
        .zip(fit.params.risk_differences())
    {
        let (v, ridge) = block.difference_variance()?;
        flagged |= ridge;
        center += w * d;
        var += w * w * v;
    }
    let half = normal_quantile(1.0 - alpha / 2.0) * var.max(0.0).sqrt();
    let method = match weighting {
        Weighting::Sample => CiMethod::W1,
        Weighting::Uniform => CiMethod::W2,
    };
    Ok(CiResult::new(
        method,
        center - half,
        center + half,
        center,
        alpha,
        flagged,
    ))
}

pub fn ci_wald_constrained(data: &StudyData, alpha: f64) -> Result<CiResult> {
    check_alpha(alpha)?;
    let fit = fit_constrained(data).require_converged("constrained")?;
    wald_constrained_from_fit(data, &fit, alpha)
}

pub fn wald_constrained_from_fit(
    data: &StudyData,
    fit: &FitResult<CommonDiffParams>,
    alpha: f64,
) -> Result<CiResult> {
    let info = common_info(&data.sizes(), &fit.params)?;
    let (var, pseudo) = info.variance_d();
    let half = normal_quantile(1.0 - alpha / 2.0) * var.max(0.0).sqrt();
    let d = fit.params.d;
    Ok(CiResult::new(
        CiMethod::W3,
        d - half,
        d + half,
        d,
        alpha,
        fit.boundary || pseudo,
    ))
}

const SEARCH_START_STEP: f64 = 0.1;
const SEARCH_MIN_STEP: f64 = 1e-4;
const SEARCH_MAX_PROBES: usize = 10_000;

/// Walks from `start` in `direction`, turning back and dividing the step by
/// π each time the probe crosses between the accepted and rejected sides.
/// Returns the outermost accepted probe once the step drops below 1e-4.
pub fn boundary_search(
    start: f64,
    direction: f64,
    mut rejects: impl FnMut(f64) -> bool,
) -> (f64, bool) {
    let mut d = start;
    let mut inside = start;
    let mut step = SEARCH_START_STEP;
    let mut flag = direction;
    let mut probes = 0;
    while step >= SEARCH_MIN_STEP {
        if probes == SEARCH_MAX_PROBES {
            return (inside, true);
        }
        probes += 1;
        d += flag * step;
        let out = !(d.abs() < 1.0) || rejects(d);
        let want = if out { -direction } else { direction };
        if want != flag {
            flag = want;
            step /= std::f64::consts::PI;
        }
        if !out && (d - inside) * direction > 0.0 {
            inside = d;
        }
    }
    (inside, false)
}

/// Likelihood-ratio statistic for `d = d0` against the constrained fit.
pub fn profile_statistic(
    data: &StudyData,
    fit: &FitResult<CommonDiffParams>,
    d0: f64,
) -> Result<f64> {
    let cond = fit_conditional_from(data, d0, &fit.params, &FitOptions::default())?;
    Ok(2.0 * (fit.loglik - cond.loglik))
}

/// Score statistic `(∂l/∂d)² (I_0⁻¹)_{1,1}` at the conditional MLE for `d0`.
pub fn score_statistic(
    data: &StudyData,
    fit: &FitResult<CommonDiffParams>,
    d0: f64,
) -> Result<f64> {
    let cond = fit_conditional_from(data, d0, &fit.params, &FitOptions::default())?;
    let u = score_wrt_d(data, &cond.params)?;
    let info = common_info(&data.sizes(), &cond.params)?;
    let (var, _) = info.variance_d();
    Ok(u * u * var)
}

fn search_interval(
    method: CiMethod,
    data: &StudyData,
    fit: &FitResult<CommonDiffParams>,
    alpha: f64,
    stat: fn(&StudyData, &FitResult<CommonDiffParams>, f64) -> Result<f64>,
) -> CiResult {
    let crit = chi2_quantile(1.0 - alpha, 1);
    let rejects = |d0: f64| match stat(data, fit, d0) {
        Ok(t) => !(t < crit),
        Err(_) => true,
    };
    let d = fit.params.d;
    let (upper, cut_u) = boundary_search(d, 1.0, rejects);
    let (lower, cut_l) = boundary_search(d, -1.0, rejects);
    CiResult::new(
        method,
        lower,
        upper,
        d,
        alpha,
        fit.boundary || cut_u || cut_l,
    )
}

pub fn ci_profile_likelihood(data: &StudyData, alpha: f64) -> Result<CiResult> {
    check_alpha(alpha)?;
    let fit = fit_constrained(data).require_converged("constrained")?;
    Ok(profile_from_fit(data, &fit, alpha))
}

pub fn profile_from_fit(
    data: &StudyData,
    fit: &FitResult<CommonDiffParams>,
    alpha: f64,
) -> CiResult {
    search_interval(CiMethod::Pro, data, fit, alpha, profile_statistic)
}

pub fn ci_score(data: &StudyData, alpha: f64) -> Result<CiResult> {
    check_alpha(alpha)?;
    let fit = fit_constrained(data).require_converged("constrained")?;
    Ok(score_from_fit(data, &fit, alpha))
}

pub fn score_from_fit(data: &StudyData, fit: &FitResult<CommonDiffParams>, alpha: f64) -> CiResult {
    search_interval(CiMethod::Sc, data, fit, alpha, score_statistic)
}

pub fn confidence_interval(data: &StudyData, method: CiMethod, alpha: f64) -> Result<CiResult> {
    match method {
        CiMethod::W1 => ci_wald_unconstrained(data, Weighting::Sample, alpha),
        CiMethod::W2 => ci_wald_unconstrained(data, Weighting::Uniform, alpha),
        CiMethod::W3 => ci_wald_constrained(data, alpha),
        CiMethod::Pro => ci_profile_likelihood(data, alpha),
        CiMethod::Sc => ci_score(data, alpha),
    }
}
