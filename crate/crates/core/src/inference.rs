//! Fisher information under the alternative and the likelihood-ratio,
//! score, and Wald tests of a common risk difference across strata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_constrained, fit_unconstrained, FitResult};
use crate::model::{is_interior, CommonDiffParams, FullParams, StratumSizes, StudyData};
use crate::numkit::{dense_inverse, Matrix};

pub use crate::numkit::{chi2_quantile, chi2_sf};

/// Distinct entries of one stratum's 3×3 expected information in
/// `(π_s1, π_s2, γ_s)`. The `(1, 2)` entry is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FisherBlock {
    pub i11: f64,
    pub i13: f64,
    pub i22: f64,
    pub i23: f64,
    pub i33: f64,
}

impl FisherBlock {
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_rows(&[
            vec![self.i11, 0.0, self.i13],
            vec![0.0, self.i22, self.i23],
            vec![self.i13, self.i23, self.i33],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.i11 + self.i22 + self.i33
    }

    pub fn determinant(&self) -> f64 {
        self.i11 * (self.i22 * self.i33 - self.i23 * self.i23) - self.i22 * self.i13 * self.i13
    }

    /// Adjugate inverse. Fails when the determinant is not safely positive.
    pub fn inverse(&self) -> Result<Matrix> {
        let det = self.determinant();
        let scale = self.i11.abs().max(self.i22.abs()).max(self.i33.abs());
        if !(det.is_finite() && det > 1e-13 * scale.powi(3)) {
            return Err(Error::Singular(format!(
                "information block determinant {det:e}"
            )));
        }
        let (a, b, c, e, f) = (self.i11, self.i22, self.i13, self.i23, self.i33);
        let i11 = (b * f - e * e) / det;
        let i12 = c * e / det;
        let i13 = -b * c / det;
        let i22 = (a * f - c * c) / det;
        let i23 = -a * e / det;
        let i33 = a * b / det;
        Ok(Matrix::from_rows(&[
            vec![i11, i12, i13],
            vec![i12, i22, i23],
            vec![i13, i23, i33],
        ]))
    }

    /// [`Self::inverse`], falling back to a ridge of `1e-10 · trace` on the
    /// diagonal. The flag reports whether the ridge was needed.
    pub fn inverse_regularized(&self) -> Result<(Matrix, bool)> {
        match self.inverse() {
            Ok(m) => Ok((m, false)),
            Err(_) => {
                let ridge = 1e-10 * self.trace().abs().max(f64::MIN_POSITIVE);
                let bumped = FisherBlock {
                    i11: self.i11 + ridge,
                    i22: self.i22 + ridge,
                    i33: self.i33 + ridge,
                    ..*self
                };
                let m = bumped
                    .inverse()
                    .or_else(|_| dense_inverse(&bumped.to_matrix()))?;
                Ok((m, true))
            }
        }
    }

    /// `C_u I⁻¹ C_uᵀ` with `C_u = (1, −1, 0)`: the variance of `π̂_s1 − π̂_s2`.
    pub fn difference_variance(&self) -> Result<(f64, bool)> {
        let (inv, ridge) = self.inverse_regularized()?;
        Ok((inv[(0, 0)] - 2.0 * inv[(0, 1)] + inv[(1, 1)], ridge))
    }
}

/// Expected information of one stratum under the alternative.
pub fn fisher_block(sizes: &StratumSizes, pi1: f64, pi2: f64, gamma: f64) -> Result<FisherBlock> {
    if !(is_interior(pi1, gamma) && is_interior(pi2, gamma)) {
        return Err(Error::domain(
            "Fisher information requires strictly interior parameters",
        ));
    }
    let StratumSizes { n1, n2, m1, m2 } = *sizes;
    let g = gamma;
    let q1 = g * pi1 - 2.0 * pi1 + 1.0;
    let q2 = g * pi2 - 2.0 * pi2 + 1.0;
    let pi_entry = |n: f64, m: f64, p: f64, q: f64| {
        -(m + 2.0 * n - g * n - 2.0 * m * p - 2.0 * n * p + g * m * p + g * n * p)
            / (p * (p - 1.0) * q)
    };
    Ok(FisherBlock {
        i11: pi_entry(n1, m1, pi1, q1),
        i13: -n1 / q1,
        i22: pi_entry(n2, m2, pi2, q2),
        i23: -n2 / q2,
        i33: n1 * pi1 / g + n2 * pi2 / g + n1 * pi1 * pi1 / q1 + n2 * pi2 * pi2 / q2
            - 2.0 * n1 * pi1 / (g - 1.0)
            - 2.0 * n2 * pi2 / (g - 1.0),
    })
}

/// Per-stratum information blocks at a full parameter vector.
pub fn fisher_blocks(data: &StudyData, params: &FullParams) -> Result<Vec<FisherBlock>> {
    data.sizes()
        .iter()
        .zip(&params.strata)
        .map(|(sz, p)| fisher_block(sz, p.pi1, p.pi2, p.gamma))
        .collect()
}

/// Inverse of a symmetric tridiagonal matrix with diagonal `a` and
/// off-diagonal `b` (`b.len() == a.len() − 1`) via the θ/φ recurrences.
pub fn tridiag_inverse(a: &[f64], b: &[f64]) -> Result<Matrix> {
    let n = a.len();
    if n == 0 || b.len() + 1 != n {
        return Err(Error::domain(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
            n,
            b.len()
        )));
    }
    // theta[i] is the leading principal minor of order i.
    let mut theta = vec![0.0; n + 1];
    theta[0] = 1.0;
    theta[1] = a[0];
    for i in 2..=n {
        theta[i] = a[i - 1] * theta[i - 1] - b[i - 2] * b[i - 2] * theta[i - 2];
    }
    // phi[i] (1-based) is the trailing principal minor starting at row i.
    let mut phi = vec![0.0; n + 2];
    phi[n + 1] = 1.0;
    phi[n] = a[n - 1];
    for i in (1..n).rev() {
        phi[i] = a[i - 1] * phi[i + 1] - b[i - 1] * b[i - 1] * phi[i + 2];
    }
    let det = theta[n];
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    if !det.is_finite() || det.abs() <= 1e-300 || det.abs() <= 1e-14 * scale.powi(n as i32) {
        return Err(Error::Singular(format!("tridiagonal determinant {det:e}")));
    }
    let mut inv = Matrix::zeros(n, n);
    for i in 1..=n {
        let mut prod = 1.0;
        for j in i..=n {
            if j > i {
                prod *= b[j - 2];
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let v = sign * prod * theta[i - 1] * phi[j + 1] / det;
            inv[(i - 1, j - 1)] = v;
            inv[(j - 1, i - 1)] = v;
        }
    }
    Ok(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TestFlags {
    /// An estimate sat on the parameter-space boundary.
    pub boundary: bool,
    /// A singular information block was regularized.
    pub regularized: bool,
    /// The tridiagonal fast path failed and a dense inverse was used.
    pub dense_fallback: bool,
}

#[derive(Debug, Clone)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub fit_h0: Option<FitResult<CommonDiffParams>>,
    pub fit_ha: Option<FitResult<FullParams>>,
    pub flags: TestFlags,
}

impl TestResult {
    fn new(statistic: f64, df: usize, flags: TestFlags) -> Self {
        TestResult {
            statistic,
            df,
            p_value: chi2_sf(statistic, df as u32),
            fit_h0: None,
            fit_ha: None,
            flags,
        }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        rejects(self.statistic, self.df, alpha)
    }
}

/// Level-`alpha` decision against the χ²(df) critical value.
pub fn rejects(statistic: f64, df: usize, alpha: f64) -> bool {
    if alpha >= 1.0 {
        true
    } else if alpha <= 0.0 {
        false
    } else {
        statistic > chi2_quantile(1.0 - alpha, df as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestMethod {
    #[serde(rename = "LR")]
    LikelihoodRatio,
    #[serde(rename = "SC")]
    Score,
    #[serde(rename = "W")]
    Wald,
}

impl TestMethod {
    pub const ALL: [TestMethod; 3] = [
        TestMethod::Score,
        TestMethod::LikelihoodRatio,
        TestMethod::Wald,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            TestMethod::LikelihoodRatio => "LR",
            TestMethod::Score => "SC",
            TestMethod::Wald => "W",
        }
    }
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for TestMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LR" => Ok(TestMethod::LikelihoodRatio),
            "SC" | "SCORE" => Ok(TestMethod::Score),
            "W" | "WALD" => Ok(TestMethod::Wald),
            other => Err(Error::domain(format!("unknown test method `{other}`"))),
        }
    }
}

pub fn run_test(data: &StudyData, method: TestMethod) -> Result<TestResult> {
    match method {
        TestMethod::LikelihoodRatio => lr_test(data),
        TestMethod::Score => score_test(data),
        TestMethod::Wald => wald_test(data),
    }
}

pub fn lr_test(data: &StudyData) -> Result<TestResult> {
    data.require_tests()?;
    let ha = fit_unconstrained(data).require_converged("unconstrained")?;
    let h0 = fit_constrained(data).require_converged("constrained")?;
    lr_from_fits(data, h0, ha)
}

/// LR statistic from fits computed elsewhere.
pub fn lr_from_fits(
    data: &StudyData,
    h0: FitResult<CommonDiffParams>,
    ha: FitResult<FullParams>,
) -> Result<TestResult> {
    data.require_tests()?;
    let raw = 2.0 * (ha.loglik - h0.loglik);
    if !raw.is_finite() || raw < -1e-8 {
        return Err(Error::Internal(format!(
            "likelihood-ratio statistic {raw:e} is negative"
        )));
    }
    let flags = TestFlags {
        boundary: ha.boundary || h0.boundary,
        ..TestFlags::default()
    };
    let mut r = TestResult::new(raw.max(0.0), data.num_strata() - 1, flags);
    r.fit_h0 = Some(h0);
    r.fit_ha = Some(ha);
    Ok(r)
}

pub fn score_test(data: &StudyData) -> Result<TestResult> {
    data.require_tests()?;
    let h0 = fit_constrained(data).require_converged("constrained")?;
    score_from_fit(data, h0)
}

pub fn score_from_fit(data: &StudyData, h0: FitResult<CommonDiffParams>) -> Result<TestResult> {
    data.require_tests()?;
    let full = h0.params.to_full();
    let score = crate::model::score_vector(data, &full)?;
    let blocks = fisher_blocks(data, &full)?;
    let mut stat = 0.0;
    let mut regularized = false;
    for (s, block) in blocks.iter().enumerate() {
        let (inv, ridge) = block.inverse_regularized()?;
        regularized |= ridge;
        stat += inv.quadratic_form(&score[3 * s..3 * s + 3]);
    }
    let flags = TestFlags {
        boundary: h0.boundary,
        regularized,
        ..TestFlags::default()
    };
    let mut r = TestResult::new(stat.max(0.0), data.num_strata() - 1, flags);
    r.fit_h0 = Some(h0);
    Ok(r)
}

pub fn wald_test(data: &StudyData) -> Result<TestResult> {
    data.require_tests()?;
    let ha = fit_unconstrained(data).require_converged("unconstrained")?;
    wald_from_fit(data, ha)
}

pub fn wald_from_fit(data: &StudyData, ha: FitResult<FullParams>) -> Result<TestResult> {
    data.require_tests()?;
    let blocks = fisher_blocks(data, &ha.params)?;
    let mut regularized = false;
    let mut v = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let (var, ridge) = block.difference_variance()?;
        regularized |= ridge;
        v.push(var);
    }
    let diffs = ha.params.risk_differences();
    let k = diffs.len() - 1;
    let a: Vec<f64> = (0..k).map(|s| v[s] + v[s + 1]).collect();
    let b: Vec<f64> = (0..k.saturating_sub(1)).map(|s| -v[s + 1]).collect();
    let delta: Vec<f64> = (0..k).map(|s| diffs[s] - diffs[s + 1]).collect();
    let (inv, dense_fallback) = match tridiag_inverse(&a, &b) {
        Ok(m) => (m, false),
        Err(_) => (dense_inverse(&tridiagonal(&a, &b))?, true),
    };
    let stat = inv.quadratic_form(&delta);
    let flags = TestFlags {
        boundary: ha.boundary,
        regularized,
        dense_fallback,
    };
    let mut r = TestResult::new(stat.max(0.0), k, flags);
    r.fit_ha = Some(ha);
    Ok(r)
}

/// Dense form of a symmetric tridiagonal matrix.
pub fn tridiagonal(a: &[f64], b: &[f64]) -> Matrix {
    let n = a.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = a[i];
        if i + 1 < n {
            m[(i, i + 1)] = b[i];
            m[(i + 1, i)] = b[i];
        }
    }
    m
}
