//! Data layout, cell-probability mapping, and log-likelihood with analytic
//! derivatives for stratified combined bilateral/unilateral binary data
//! under Dallal's constant-conditional-probability model.
//!
//! Within stratum `s` and group `g`, a bilateral subject shows 0, 1 or 2
//! responses with probabilities
//!
//! ```text
//! P0 = 1 - 2π + πγ,   P1 = 2π(1 - γ),   P2 = πγ
//! ```
//!
//! and a unilateral subject responds with probability `π`. Both groups of a
//! stratum share `γ`. Counts are stored as `f64` so that zero-cell smoothing
//! composes with every downstream operation; integrality is enforced only at
//! ingestion (see [`crate::table`]).
//!
//! Log-likelihoods omit the multinomial/binomial normalizing constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Slack allowed on probability constraints before a point is rejected.
pub const VALIDITY_TOL: f64 = 1e-12;

/// Distance from the parameter-space boundary at which boundary estimates
/// are represented.
pub const BOUNDARY_EPS: f64 = 1e-10;

/// Default zero-cell smoothing increment.
pub const DEFAULT_SMOOTHING: f64 = 1e-4;

/// Outcome counts for one group of one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    /// Bilateral subjects with 0, 1, 2 responses.
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    /// Unilateral subjects with 0, 1 responses.
    pub m0: f64,
    pub m1: f64,
}

impl GroupCounts {
    pub fn new(n0: f64, n1: f64, n2: f64, m0: f64, m1: f64) -> Self {
        GroupCounts { n0, n1, n2, m0, m1 }
    }

    pub fn bilateral_total(&self) -> f64 {
        self.n0 + self.n1 + self.n2
    }

    pub fn unilateral_total(&self) -> f64 {
        self.m0 + self.m1
    }

    pub fn cells(&self) -> [f64; 5] {
        [self.n0, self.n1, self.n2, self.m0, self.m1]
    }

    pub fn is_empty(&self) -> bool {
        self.cells().iter().all(|&c| c == 0.0)
    }

    pub fn has_zero_cell(&self) -> bool {
        self.cells().contains(&0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells().iter().all(|c| c.is_finite() && *c >= 0.0) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "counts must be finite and nonnegative: {:?}",
                self.cells()
            )))
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let [n0, n1, n2, m0, m1] = self.cells().map(|c| c * k);
        GroupCounts { n0, n1, n2, m0, m1 }
    }

    /// Expected cell counts for `n` bilateral and `m` unilateral subjects.
    pub fn expected(n: f64, m: f64, pi: f64, gamma: f64) -> Self {
        let p = raw_cells(pi, gamma);
        GroupCounts {
            n0: n * p[0],
            n1: n * p[1],
            n2: n * p[2],
            m0: m * p[3],
            m1: m * p[4],
        }
    }

    /// This group's log-likelihood contribution. Returns `-inf` when a
    /// positive count sits on a zero-probability cell or the parameters are
    /// outside the valid region.
    pub fn log_likelihood(&self, pi: f64, gamma: f64) -> f64 {
        if !is_valid(pi, gamma) {
            return f64::NEG_INFINITY;
        }
        raw_cells(pi, gamma)
            .iter()
            .zip(self.cells())
            .map(|(&p, c)| xlogy(c, p))
            .sum()
    }

    /// First and second derivatives of [`Self::log_likelihood`]. Only
    /// meaningful at interior points.
    pub fn derivatives(&self, pi: f64, gamma: f64) -> GroupDerivatives {
        let q = 1.0 - 2.0 * pi + pi * gamma;
        let responders = self.n1 + self.n2 + self.m1;
        GroupDerivatives {
            d_pi: ratio(responders, pi) - ratio(self.m0, 1.0 - pi)
                + ratio(self.n0 * (gamma - 2.0), q),
            d_gamma: ratio(self.n2, gamma) - ratio(self.n1, 1.0 - gamma) + ratio(self.n0 * pi, q),
            d_pi_pi: -ratio(responders, pi * pi)
                - ratio(self.m0, (1.0 - pi) * (1.0 - pi))
                - ratio(self.n0 * (gamma - 2.0) * (gamma - 2.0), q * q),
            d_pi_gamma: ratio(self.n0, q * q),
            d_gamma_gamma: -ratio(self.n2, gamma * gamma)
                - ratio(self.n1, (1.0 - gamma) * (1.0 - gamma))
                - ratio(self.n0 * pi * pi, q * q),
        }
    }
}

/// Partial derivatives of one group's log-likelihood in `(π, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupDerivatives {
    pub d_pi: f64,
    pub d_gamma: f64,
    pub d_pi_pi: f64,
    pub d_pi_gamma: f64,
    pub d_gamma_gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StratumCounts {
    pub group1: GroupCounts,
    pub group2: GroupCounts,
}

impl StratumCounts {
    pub fn new(group1: GroupCounts, group2: GroupCounts) -> Self {
        StratumCounts { group1, group2 }
    }

    pub fn sizes(&self) -> StratumSizes {
        StratumSizes {
            n1: self.group1.bilateral_total(),
            n2: self.group2.bilateral_total(),
            m1: self.group1.unilateral_total(),
            m2: self.group2.unilateral_total(),
        }
    }

    pub fn swapped(&self) -> Self {
        StratumCounts {
            group1: self.group2,
            group2: self.group1,
        }
    }

    pub fn groups(&self) -> [&GroupCounts; 2] {
        [&self.group1, &self.group2]
    }

    pub fn log_likelihood(&self, pi1: f64, pi2: f64, gamma: f64) -> f64 {
        self.group1.log_likelihood(pi1, gamma) + self.group2.log_likelihood(pi2, gamma)
    }
}

/// Per-stratum sample sizes: bilateral (`n`) and unilateral (`m`) subjects
/// in each group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StratumSizes {
    pub n1: f64,
    pub n2: f64,
    pub m1: f64,
    pub m2: f64,
}

impl StratumSizes {
    pub fn new(n1: f64, n2: f64, m1: f64, m2: f64) -> Self {
        StratumSizes { n1, n2, m1, m2 }
    }

    pub fn total(&self) -> f64 {
        self.n1 + self.n2 + self.m1 + self.m2
    }

    pub fn scaled(&self, k: f64) -> Self {
        StratumSizes::new(self.n1 * k, self.n2 * k, self.m1 * k, self.m2 * k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyData {
    strata: Vec<StratumCounts>,
}

impl StudyData {
    pub fn new(strata: Vec<StratumCounts>) -> Result<Self> {
        if strata.is_empty() {
            return Err(Error::infeasible("study needs at least one stratum"));
        }
        for s in &strata {
            s.group1.validate()?;
            s.group2.validate()?;
        }
        Ok(StudyData { strata })
    }

    pub fn strata(&self) -> &[StratumCounts] {
        &self.strata
    }

    pub fn num_strata(&self) -> usize {
        self.strata.len()
    }

    pub fn sizes(&self) -> Vec<StratumSizes> {
        self.strata.iter().map(StratumCounts::sizes).collect()
    }

    pub fn has_zero_cell(&self) -> bool {
        self.strata
            .iter()
            .any(|s| s.group1.has_zero_cell() || s.group2.has_zero_cell())
    }

    /// Exchanges the roles of group 1 and group 2 in every stratum.
    pub fn swap_groups(&self) -> Self {
        StudyData {
            strata: self.strata.iter().map(StratumCounts::swapped).collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        StudyData {
            strata: self
                .strata
                .iter()
                .map(|s| StratumCounts::new(s.group1.scaled(k), s.group2.scaled(k)))
                .collect(),
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        StudyData {
            strata: order.iter().map(|&i| self.strata[i]).collect(),
        }
    }

    pub fn require_tests(&self) -> Result<()> {
        if self.num_strata() < 2 {
            Err(Error::infeasible("df = 0: need S ≥ 2"))
        } else {
            Ok(())
        }
    }
}

/// Unrestricted per-stratum parameters `(π_s1, π_s2, γ_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumParams {
    pub pi1: f64,
    pub pi2: f64,
    pub gamma: f64,
}

impl StratumParams {
    pub fn new(pi1: f64, pi2: f64, gamma: f64) -> Self {
        StratumParams { pi1, pi2, gamma }
    }

    pub fn risk_difference(&self) -> f64 {
        self.pi1 - self.pi2
    }

    pub fn is_valid(&self) -> bool {
        is_valid(self.pi1, self.gamma) && is_valid(self.pi2, self.gamma)
    }

    pub fn is_interior(&self) -> bool {
        is_interior(self.pi1, self.gamma) && is_interior(self.pi2, self.gamma)
    }
}

/// The full parameter vector under the alternative: one [`StratumParams`]
/// per stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullParams {
    pub strata: Vec<StratumParams>,
}

impl FullParams {
    pub fn new(strata: Vec<StratumParams>) -> Self {
        FullParams { strata }
    }

    pub fn risk_differences(&self) -> Vec<f64> {
        self.strata
            .iter()
            .map(StratumParams::risk_difference)
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.strata.iter().all(StratumParams::is_valid)
    }

    pub fn is_interior(&self) -> bool {
        self.strata.iter().all(StratumParams::is_interior)
    }

    /// Flattened `(π_11, π_12, γ_1, …, π_S1, π_S2, γ_S)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.strata
            .iter()
            .flat_map(|p| [p.pi1, p.pi2, p.gamma])
            .collect()
    }

    pub fn from_slice(values: &[f64]) -> Self {
        assert_eq!(values.len() % 3, 0);
        FullParams::new(
            values
                .chunks(3)
                .map(|c| StratumParams::new(c[0], c[1], c[2]))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonStratumParams {
    pub pi1: f64,
    pub gamma: f64,
}

/// Parameters under a common risk difference: `(d, π_11, γ_1, …, π_S1, γ_S)`
/// with `π_s2 = π_s1 − d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonDiffParams {
    pub d: f64,
    pub strata: Vec<CommonStratumParams>,
}

impl CommonDiffParams {
    pub fn new(d: f64, strata: Vec<CommonStratumParams>) -> Self {
        CommonDiffParams { d, strata }
    }

    pub fn to_full(&self) -> FullParams {
        FullParams::new(
            self.strata
                .iter()
                .map(|p| StratumParams::new(p.pi1, p.pi1 - self.d, p.gamma))
                .collect(),
        )
    }

    pub fn is_valid(&self) -> bool {
        self.to_full().is_valid()
    }

    pub fn is_interior(&self) -> bool {
        self.to_full().is_interior()
    }

    /// Flattened `(d, π_11, γ_1, …, π_S1, γ_S)`.
    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.d)
            .chain(self.strata.iter().flat_map(|p| [p.pi1, p.gamma]))
            .collect()
    }

    pub fn from_slice(values: &[f64]) -> Self {
        assert_eq!(values.len() % 2, 1);
        CommonDiffParams::new(
            values[0],
            values[1..]
                .chunks(2)
                .map(|c| CommonStratumParams {
                    pi1: c[0],
                    gamma: c[1],
                })
                .collect(),
        )
    }
}

/// Cell probabilities for one group: bilateral 0/1/2 and unilateral 0/1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellProbs {
    pub pb0: f64,
    pub pb1: f64,
    pub pb2: f64,
    pub pu0: f64,
    pub pu1: f64,
}

impl CellProbs {
    pub fn as_array(&self) -> [f64; 5] {
        [self.pb0, self.pb1, self.pb2, self.pu0, self.pu1]
    }
}

/// Upper bound on `π` for a given `γ` keeping every cell probability in [0, 1].
pub fn pi_upper_bound(gamma: f64) -> f64 {
    1.0 / (2.0 - gamma)
}

pub fn is_valid(pi: f64, gamma: f64) -> bool {
    pi.is_finite()
        && gamma.is_finite()
        && (-VALIDITY_TOL..=1.0 + VALIDITY_TOL).contains(&gamma)
        && pi >= -VALIDITY_TOL
        && pi <= pi_upper_bound(gamma.min(1.0)) + VALIDITY_TOL
}

/// Strictly inside the parameter space (every cell probability positive).
pub fn is_interior(pi: f64, gamma: f64) -> bool {
    gamma > 0.0 && gamma < 1.0 && pi > 0.0 && pi < 1.0 && 1.0 - 2.0 * pi + pi * gamma > 0.0
}

fn raw_cells(pi: f64, gamma: f64) -> [f64; 5] {
    [
        (1.0 - 2.0 * pi + pi * gamma).max(0.0),
        (2.0 * pi * (1.0 - gamma)).max(0.0),
        (pi * gamma).max(0.0),
        (1.0 - pi).max(0.0),
        pi.max(0.0),
    ]
}

fn xlogy(count: f64, p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        count * p.ln()
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn cell_probabilities(pi: f64, gamma: f64) -> Result<CellProbs> {
    if !is_valid(pi, gamma) {
        return Err(Error::domain(format!(
            "π = {pi} outside [0, 1/(2−γ)] for γ = {gamma}"
        )));
    }
    let [pb0, pb1, pb2, pu0, pu1] = raw_cells(pi, gamma);
    Ok(CellProbs {
        pb0,
        pb1,
        pb2,
        pu0,
        pu1,
    })
}

/// Log-likelihood under the alternative (multinomial constants omitted).
pub fn log_likelihood(data: &StudyData, params: &FullParams) -> f64 {
    assert_eq!(
        data.num_strata(),
        params.strata.len(),
        "stratum count mismatch"
    );
    data.strata
        .iter()
        .zip(&params.strata)
        .map(|(s, p)| s.log_likelihood(p.pi1, p.pi2, p.gamma))
        .sum()
}

pub fn log_likelihood_common(data: &StudyData, params: &CommonDiffParams) -> f64 {
    log_likelihood(data, &params.to_full())
}

fn require_interior(params: &FullParams) -> Result<()> {
    if params.is_interior() {
        Ok(())
    } else {
        Err(Error::domain(
            "derivatives require strictly interior parameters",
        ))
    }
}

/// `(∂l/∂π_11, ∂l/∂π_12, ∂l/∂γ_1, …)`.
pub fn score_vector(data: &StudyData, params: &FullParams) -> Result<Vec<f64>> {
    require_interior(params)?;
    Ok(data
        .strata
        .iter()
        .zip(&params.strata)
        .flat_map(|(s, p)| {
            let d1 = s.group1.derivatives(p.pi1, p.gamma);
            let d2 = s.group2.derivatives(p.pi2, p.gamma);
            [d1.d_pi, d2.d_pi, d1.d_gamma + d2.d_gamma]
        })
        .collect())
}

/// Observed Hessian of [`log_likelihood`], block-diagonal with 3×3 blocks.
pub fn hessian(data: &StudyData, params: &FullParams) -> Result<Matrix> {
    require_interior(params)?;
    let s_count = data.num_strata();
    let mut h = Matrix::zeros(3 * s_count, 3 * s_count);
    for (s, (st, p)) in data.strata.iter().zip(&params.strata).enumerate() {
        let d1 = st.group1.derivatives(p.pi1, p.gamma);
        let d2 = st.group2.derivatives(p.pi2, p.gamma);
        let o = 3 * s;
        h[(o, o)] = d1.d_pi_pi;
        h[(o + 1, o + 1)] = d2.d_pi_pi;
        h[(o + 2, o + 2)] = d1.d_gamma_gamma + d2.d_gamma_gamma;
        h[(o, o + 2)] = d1.d_pi_gamma;
        h[(o + 2, o)] = d1.d_pi_gamma;
        h[(o + 1, o + 2)] = d2.d_pi_gamma;
        h[(o + 2, o + 1)] = d2.d_pi_gamma;
    }
    Ok(h)
}

/// `∂l/∂d` for the reparametrization `π_s2 = π_s1 − d`.
pub fn score_wrt_d(data: &StudyData, cparams: &CommonDiffParams) -> Result<f64> {
    let full = cparams.to_full();
    require_interior(&full)?;
    Ok(-data
        .strata
        .iter()
        .zip(&full.strata)
        .map(|(s, p)| s.group2.derivatives(p.pi2, p.gamma).d_pi)
        .sum::<f64>())
}

/// Score in the common-difference parametrization,
/// `(∂l/∂d, ∂l/∂π_11, ∂l/∂γ_1, …, ∂l/∂π_S1, ∂l/∂γ_S)`.
pub fn common_score_vector(data: &StudyData, cparams: &CommonDiffParams) -> Result<Vec<f64>> {
    let full = cparams.to_full();
    require_interior(&full)?;
    let mut out = vec![0.0];
    for (s, p) in data.strata.iter().zip(&full.strata) {
        let d1 = s.group1.derivatives(p.pi1, p.gamma);
        let d2 = s.group2.derivatives(p.pi2, p.gamma);
        out[0] -= d2.d_pi;
        out.push(d1.d_pi + d2.d_pi);
        out.push(d1.d_gamma + d2.d_gamma);
    }
    Ok(out)
}

/// Observed Hessian in the common-difference parametrization (arrow
/// structure, dimension 2S+1).
pub fn common_hessian(data: &StudyData, cparams: &CommonDiffParams) -> Result<Matrix> {
    let full = cparams.to_full();
    require_interior(&full)?;
    let dim = 2 * data.num_strata() + 1;
    let mut h = Matrix::zeros(dim, dim);
    for (s, (st, p)) in data.strata.iter().zip(&full.strata).enumerate() {
        let d1 = st.group1.derivatives(p.pi1, p.gamma);
        let d2 = st.group2.derivatives(p.pi2, p.gamma);
        let (i, j) = (1 + 2 * s, 2 + 2 * s);
        h[(0, 0)] += d2.d_pi_pi;
        h[(0, i)] = -d2.d_pi_pi;
        h[(i, 0)] = -d2.d_pi_pi;
        h[(0, j)] = -d2.d_pi_gamma;
        h[(j, 0)] = -d2.d_pi_gamma;
        h[(i, i)] = d1.d_pi_pi + d2.d_pi_pi;
        h[(i, j)] = d1.d_pi_gamma + d2.d_pi_gamma;
        h[(j, i)] = h[(i, j)];
        h[(j, j)] = d1.d_gamma_gamma + d2.d_gamma_gamma;
    }
    Ok(h)
}

/// Adds `epsilon` to every cell of every group.
pub fn smooth_zero_cells(data: &StudyData, epsilon: f64) -> StudyData {
    let bump = |g: &GroupCounts| {
        GroupCounts::new(
            g.n0 + epsilon,
            g.n1 + epsilon,
            g.n2 + epsilon,
            g.m0 + epsilon,
            g.m1 + epsilon,
        )
    };
    StudyData {
        strata: data
            .strata
            .iter()
            .map(|s| StratumCounts::new(bump(&s.group1), bump(&s.group2)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_stratum(g1: [f64; 5], g2: [f64; 5]) -> StudyData {
        let g = |c: [f64; 5]| GroupCounts::new(c[0], c[1], c[2], c[3], c[4]);
        StudyData::new(vec![StratumCounts::new(g(g1), g(g2))]).unwrap()
    }

    #[test]
    fn cell_probabilities_examples() {
        let c = cell_probabilities(0.0, 0.5).unwrap();
        assert_eq!(c.as_array(), [1.0, 0.0, 0.0, 1.0, 0.0]);
        let c = cell_probabilities(0.5, 0.5).unwrap();
        assert_eq!(c.as_array(), [0.25, 0.5, 0.25, 0.5, 0.5]);
        let c = cell_probabilities(0.5, 1.0).unwrap();
        assert_eq!(c.as_array(), [0.5, 0.0, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn cell_probabilities_rejects_outside_region() {
        // π above 1/(2−γ) makes P0 negative.
        assert!(cell_probabilities(0.7, 0.2).is_err());
        assert!(cell_probabilities(-0.01, 0.5).is_err());
        assert!(cell_probabilities(0.3, 1.2).is_err());
        // within tolerance of the bound is accepted
        assert!(cell_probabilities(1.0 / 1.8 + 1e-13, 0.2).is_ok());
    }

    #[test]
    fn empty_data_has_zero_loglik() {
        let data = one_stratum([0.0; 5], [0.0; 5]);
        let p = FullParams::new(vec![StratumParams::new(0.3, 0.4, 0.6)]);
        assert_eq!(log_likelihood(&data, &p), 0.0);
        assert_eq!(score_vector(&data, &p).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_cell_loglik() {
        let data = one_stratum([0.0, 0.0, 1.0, 0.0, 0.0], [0.0; 5]);
        let p = FullParams::new(vec![StratumParams::new(0.5, 0.3, 0.5)]);
        assert!((log_likelihood(&data, &p) - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn positive_count_on_zero_cell_is_neg_infinity() {
        let data = one_stratum([0.0, 1.0, 0.0, 0.0, 0.0], [0.0; 5]);
        // γ = 1 gives P1 = 0
        let p = FullParams::new(vec![StratumParams::new(0.5, 0.3, 1.0)]);
        assert_eq!(log_likelihood(&data, &p), f64::NEG_INFINITY);
        // zero count on zero cell contributes nothing
        let data = one_stratum([1.0, 0.0, 1.0, 0.0, 0.0], [0.0; 5]);
        assert!(log_likelihood(&data, &p).is_finite());
    }

    #[test]
    fn derivatives_reject_boundary() {
        let data = one_stratum([1.0; 5], [1.0; 5]);
        let p = FullParams::new(vec![StratumParams::new(0.0, 0.3, 0.5)]);
        assert!(matches!(score_vector(&data, &p), Err(Error::Domain(_))));
        let c = CommonDiffParams::new(
            0.3,
            vec![CommonStratumParams {
                pi1: 0.3,
                gamma: 0.5,
            }],
        );
        assert!(score_wrt_d(&data, &c).is_err());
    }

    #[test]
    fn smoothing() {
        let data = one_stratum([1.0, 2.0, 3.0, 4.0, 5.0], [7.0, 0.0, 0.0, 0.0, 0.0]);
        let sm = smooth_zero_cells(&data, 1e-4);
        let g1 = sm.strata()[0].group1;
        assert!((g1.n0 - 1.0001).abs() < 1e-15 && (g1.m1 - 5.0001).abs() < 1e-15);
        assert!(!sm.has_zero_cell());
        assert_eq!(smooth_zero_cells(&data, 0.0), data);
    }

    #[test]
    fn study_requires_a_stratum() {
        assert!(StudyData::new(vec![]).is_err());
        let bad = GroupCounts::new(-1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(StudyData::new(vec![StratumCounts::new(bad, bad)]).is_err());
    }

    #[test]
    fn common_params_roundtrip() {
        let c = CommonDiffParams::from_slice(&[0.1, 0.4, 0.5, 0.6, 0.7]);
        assert_eq!(c.to_vec(), vec![0.1, 0.4, 0.5, 0.6, 0.7]);
        let full = c.to_full();
        assert!((full.strata[1].pi2 - 0.5).abs() < 1e-15);
    }
}
