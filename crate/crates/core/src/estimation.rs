//! Maximum-likelihood fitting under the alternative (stratum-specific risk
//! differences), under a common risk difference, and with the common
//! difference held at a fixed value.

use crate::error::{Error, Result};
use crate::model::{
    is_interior, pi_upper_bound, CommonDiffParams, CommonStratumParams, FullParams, GroupCounts,
    StratumCounts, StratumParams, StudyData, BOUNDARY_EPS,
};
use crate::numkit::{dense_solve, real_roots_cubic, real_roots_quadratic, Cubic, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    pub param_tol: f64,
    pub score_tol: f64,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 10_000,
            param_tol: 1e-10,
            score_tol: 1e-8,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<P> {
    pub params: P,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Some estimate sits on (within `BOUNDARY_EPS` of) the boundary, or a
    /// parameter was unidentified and left at its starting value.
    pub boundary: bool,
    /// Max-norm of the score over the free interior parameters.
    pub score_norm: f64,
}

impl<P> FitResult<P> {
    pub fn require_converged(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence(format!(
                "{what} fit stopped after {} iterations (score norm {:.3e})",
                self.iterations, self.score_norm
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiRoot {
    pub pi: f64,
    pub interior: bool,
}

/// Maximizes one group's log-likelihood over `π` at fixed `γ` by solving
/// the quadratic score equation.
pub fn solve_pi_quadratic(g: &GroupCounts, gamma: f64) -> PiRoot {
    let upper = pi_upper_bound(gamma);
    let (lo, hi) = (BOUNDARY_EPS, upper - BOUNDARY_EPS);
    if g.is_empty() {
        return PiRoot {
            pi: 0.5 * upper,
            interior: false,
        };
    }
    let size = g.bilateral_total() + g.unilateral_total();
    let a = (gamma - 2.0) * size;
    let b = g.m0 + 3.0 * g.m1 + 2.0 * g.n0 + 3.0 * g.n1 + 3.0 * g.n2
        - gamma * (g.m1 + g.n0 + g.n1 + g.n2);
    let c = -(g.n1 + g.n2 + g.m1);
    let roots = real_roots_quadratic(a, b, c).unwrap_or_default();
    let best = roots
        .into_iter()
        .filter(|&r| r > 0.0 && r < upper)
        .map(|r| (r, g.log_likelihood(r.clamp(lo, hi), gamma)))
        .max_by(|x, y| x.1.total_cmp(&y.1));
    match best {
        Some((r, _)) => {
            let pi = r.clamp(lo, hi);
            PiRoot {
                pi,
                interior: pi == r,
            }
        }
        None => {
            // Concave in π, so the score keeps one sign across the interval.
            let slope = g.derivatives(0.5 * upper, gamma).d_pi;
            PiRoot {
                pi: if slope > 0.0 { hi } else { lo },
                interior: false,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaStep {
    pub gamma: f64,
    pub flagged: bool,
}

/// One undamped Newton update of the shared `γ` of a stratum.
pub fn newton_gamma_step(stratum: &StratumCounts, pi1: f64, pi2: f64, gamma: f64) -> GammaStep {
    let d1 = stratum.group1.derivatives(pi1, gamma);
    let d2 = stratum.group2.derivatives(pi2, gamma);
    let grad = d1.d_gamma + d2.d_gamma;
    let curv = d1.d_gamma_gamma + d2.d_gamma_gamma;
    if curv == 0.0 || !curv.is_finite() || !grad.is_finite() {
        return GammaStep {
            gamma,
            flagged: true,
        };
    }
    let raw = gamma - grad / curv;
    let clamped = raw.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS);
    GammaStep {
        gamma: clamped,
        flagged: clamped != raw,
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.01, 0.99)
}

fn moment_pi(g: &GroupCounts) -> f64 {
    let den = 2.0 * g.bilateral_total() + 2.0 * g.unilateral_total();
    if den > 0.0 {
        clamp_unit((g.n1 + 2.0 * g.n2 + 2.0 * g.m1) / den)
    } else {
        0.5
    }
}

fn moment_gamma(s: &StratumCounts) -> f64 {
    let num = 2.0 * (s.group1.n2 + s.group2.n2);
    let den = s.group1.n1 + 2.0 * s.group1.n2 + s.group2.n1 + 2.0 * s.group2.n2;
    if den > 0.0 {
        clamp_unit(num / den)
    } else {
        0.5
    }
}

fn near_boundary(pi: f64, gamma: f64) -> bool {
    let q = 1.0 - 2.0 * pi + pi * gamma;
    pi <= 2.0 * BOUNDARY_EPS
        || q <= 2.0 * BOUNDARY_EPS
        || gamma <= 2.0 * BOUNDARY_EPS
        || gamma >= 1.0 - 2.0 * BOUNDARY_EPS
}

fn has_bilateral(s: &StratumCounts) -> bool {
    s.group1.bilateral_total() + s.group2.bilateral_total() > 0.0
}

struct StratumFit<P> {
    params: P,
    iterations: usize,
    converged: bool,
    boundary: bool,
    score_norm: f64,
}

fn unconstrained_score_norm(s: &StratumCounts, p: &StratumParams) -> f64 {
    let d1 = s.group1.derivatives(p.pi1, p.gamma);
    let d2 = s.group2.derivatives(p.pi2, p.gamma);
    let mut norm: f64 = 0.0;
    if !s.group1.is_empty() && free_pi(p.pi1, p.gamma) {
        norm = norm.max(d1.d_pi.abs());
    }
    if !s.group2.is_empty() && free_pi(p.pi2, p.gamma) {
        norm = norm.max(d2.d_pi.abs());
    }
    if has_bilateral(s) && free_gamma(p.gamma) {
        norm = norm.max((d1.d_gamma + d2.d_gamma).abs());
    }
    norm
}

fn free_pi(pi: f64, gamma: f64) -> bool {
    pi > 2.0 * BOUNDARY_EPS && pi < pi_upper_bound(gamma) - 2.0 * BOUNDARY_EPS
}

fn free_gamma(gamma: f64) -> bool {
    gamma > 2.0 * BOUNDARY_EPS && gamma < 1.0 - 2.0 * BOUNDARY_EPS
}

/// Damped Newton step in `(π_s1, π_s2, γ_s)` jointly. Cyclic updates crawl
/// when the maximum sits on a curved ridge near the validity boundary; this
/// step is kept only if it stays interior and does not lower the likelihood.
fn joint_newton_step(s: &StratumCounts, p: StratumParams, opts: &FitOptions) -> StratumParams {
    let d1 = s.group1.derivatives(p.pi1, p.gamma);
    let d2 = s.group2.derivatives(p.pi2, p.gamma);
    let neg_h = Matrix::from_rows(&[
        vec![-d1.d_pi_pi, 0.0, -d1.d_pi_gamma],
        vec![0.0, -d2.d_pi_pi, -d2.d_pi_gamma],
        vec![
            -d1.d_pi_gamma,
            -d2.d_pi_gamma,
            -(d1.d_gamma_gamma + d2.d_gamma_gamma),
        ],
    ]);
    if !neg_h.is_positive_definite() {
        return p;
    }
    let Ok(step) = dense_solve(&neg_h, &[d1.d_pi, d2.d_pi, d1.d_gamma + d2.d_gamma]) else {
        return p;
    };
    let base = s.log_likelihood(p.pi1, p.pi2, p.gamma);
    for k in 0..=opts.max_halvings {
        let f = f64::powi(0.5, k as i32);
        let cand = StratumParams::new(
            p.pi1 + f * step[0],
            p.pi2 + f * step[1],
            p.gamma + f * step[2],
        );
        if is_interior(cand.pi1, cand.gamma)
            && is_interior(cand.pi2, cand.gamma)
            && s.log_likelihood(cand.pi1, cand.pi2, cand.gamma) >= base
        {
            return cand;
        }
    }
    p
}

fn fit_stratum_unconstrained(s: &StratumCounts, opts: &FitOptions) -> StratumFit<StratumParams> {
    let mut p = StratumParams::new(moment_pi(&s.group1), moment_pi(&s.group2), moment_gamma(s));
    let mut unidentified = s.group1.is_empty() || s.group2.is_empty() || !has_bilateral(s);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let old = p;
        let r1 = solve_pi_quadratic(&s.group1, p.gamma);
        let r2 = solve_pi_quadratic(&s.group2, p.gamma);
        if !s.group1.is_empty() {
            p.pi1 = r1.pi;
        }
        if !s.group2.is_empty() {
            p.pi2 = r2.pi;
        }
        let base = s.log_likelihood(p.pi1, p.pi2, p.gamma);
        let step = newton_gamma_step(s, p.pi1, p.pi2, p.gamma);
        unidentified |= step.flagged && !has_bilateral(s);
        let delta = step.gamma - p.gamma;
        for k in 0..=opts.max_halvings {
            let cand = p.gamma + delta / f64::powi(2.0, k as i32);
            if is_interior(p.pi1, cand)
                && is_interior(p.pi2, cand)
                && s.log_likelihood(p.pi1, p.pi2, cand) >= base
            {
                p.gamma = cand;
                break;
            }
        }
        if !unidentified {
            p = joint_newton_step(s, p, opts);
        }
        let change = (p.pi1 - old.pi1)
            .abs()
            .max((p.pi2 - old.pi2).abs())
            .max((p.gamma - old.gamma).abs());
        if change < opts.param_tol || unconstrained_score_norm(s, &p) < opts.score_tol {
            converged = true;
            break;
        }
    }
    StratumFit {
        boundary: unidentified || near_boundary(p.pi1, p.gamma) || near_boundary(p.pi2, p.gamma),
        score_norm: unconstrained_score_norm(s, &p),
        params: p,
        iterations,
        converged,
    }
}

pub fn fit_unconstrained(data: &StudyData) -> FitResult<FullParams> {
    fit_unconstrained_with(data, &FitOptions::default())
}

pub fn fit_unconstrained_with(data: &StudyData, opts: &FitOptions) -> FitResult<FullParams> {
    let fits: Vec<_> = data
        .strata()
        .iter()
        .map(|s| fit_stratum_unconstrained(s, opts))
        .collect();
    let params = FullParams::new(fits.iter().map(|f| f.params).collect());
    FitResult {
        loglik: crate::model::log_likelihood(data, &params),
        iterations: fits.iter().map(|f| f.iterations).max().unwrap_or(0),
        converged: fits.iter().all(|f| f.converged),
        boundary: fits.iter().any(|f| f.boundary),
        score_norm: fits.iter().map(|f| f.score_norm).fold(0.0, f64::max),
        params,
    }
}

/// Open interval of `π_s1` keeping both groups of a stratum strictly valid
/// when `π_s2 = π_s1 − d`.
fn pi1_interval(d: f64, gamma: f64) -> (f64, f64) {
    let u = pi_upper_bound(gamma);
    (d.max(0.0), u.min(u + d))
}

fn stratum_ll(s: &StratumCounts, d: f64, p: &CommonStratumParams) -> f64 {
    s.log_likelihood(p.pi1, p.pi1 - d, p.gamma)
}

fn common_interior(d: f64, p: &CommonStratumParams) -> bool {
    is_interior(p.pi1, p.gamma) && is_interior(p.pi1 - d, p.gamma)
}

/// Moves a starting point into the strict interior of the region for a
/// given `d`, raising `γ` if the region would otherwise be empty.
fn project_start(d: f64, p: &CommonStratumParams) -> CommonStratumParams {
    let mut gamma = p.gamma.clamp(0.01, 0.99);
    let needed = 2.0 - 1.0 / d.abs().max(1e-300);
    if needed >= gamma - 1e-6 {
        gamma = 0.5 * (needed.max(0.0) + 1.0);
    }
    let (lo, hi) = pi1_interval(d, gamma);
    let width = hi - lo;
    let t = ((p.pi1 - lo) / width).clamp(0.05, 0.95);
    CommonStratumParams {
        pi1: lo + t * width,
        gamma,
    }
}

fn stratum_common_grad(s: &StratumCounts, d: f64, p: &CommonStratumParams) -> [f64; 5] {
    let d1 = s.group1.derivatives(p.pi1, p.gamma);
    let d2 = s.group2.derivatives(p.pi1 - d, p.gamma);
    [
        d1.d_pi + d2.d_pi,
        d1.d_gamma + d2.d_gamma,
        d1.d_pi_pi + d2.d_pi_pi,
        d1.d_pi_gamma + d2.d_pi_gamma,
        d1.d_gamma_gamma + d2.d_gamma_gamma,
    ]
}

/// Tries `current + step / 2^k` for k = 0, 1, … and keeps the first
/// interior candidate that does not lower the stratum log-likelihood.
fn damped_update(
    s: &StratumCounts,
    d: f64,
    current: CommonStratumParams,
    step: (f64, f64),
    opts: &FitOptions,
) -> CommonStratumParams {
    let base = stratum_ll(s, d, &current);
    for k in 0..=opts.max_halvings {
        let f = f64::powi(0.5, k as i32);
        let cand = CommonStratumParams {
            pi1: current.pi1 + f * step.0,
            gamma: current.gamma + f * step.1,
        };
        if common_interior(d, &cand) && stratum_ll(s, d, &cand) >= base {
            return cand;
        }
    }
    current
}

fn common_score_norm(data: &StudyData, p: &CommonDiffParams, include_d: bool) -> f64 {
    let mut norm: f64 = 0.0;
    let mut grad_d = 0.0;
    let mut d_free = true;
    for (s, sp) in data.strata().iter().zip(&p.strata) {
        let pi2 = sp.pi1 - p.d;
        let d1 = s.group1.derivatives(sp.pi1, sp.gamma);
        let d2 = s.group2.derivatives(pi2, sp.gamma);
        grad_d -= d2.d_pi;
        let (lo, hi) = pi1_interval(p.d, sp.gamma);
        let pi_free = sp.pi1 > lo + 2.0 * BOUNDARY_EPS && sp.pi1 < hi - 2.0 * BOUNDARY_EPS;
        d_free &= pi_free;
        if pi_free && !(s.group1.is_empty() && s.group2.is_empty()) {
            norm = norm.max((d1.d_pi + d2.d_pi).abs());
        }
        if has_bilateral(s) && free_gamma(sp.gamma) {
            norm = norm.max((d1.d_gamma + d2.d_gamma).abs());
        }
    }
    if include_d && d_free {
        norm = norm.max(grad_d.abs());
    }
    norm
}

fn common_boundary(data: &StudyData, p: &CommonDiffParams) -> bool {
    data.strata().iter().zip(&p.strata).any(|(s, sp)| {
        s.group1.is_empty()
            || s.group2.is_empty()
            || !has_bilateral(s)
            || near_boundary(sp.pi1, sp.gamma)
            || near_boundary(sp.pi1 - p.d, sp.gamma)
    })
}

fn max_change(a: &CommonDiffParams, b: &CommonDiffParams) -> f64 {
    a.to_vec()
        .iter()
        .zip(b.to_vec())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Damped joint Newton step in `(d, π_s1, γ_s)` over all strata, or in
/// `(π_s1, γ_s)` with `d` held fixed. Same acceptance rule as the cyclic
/// updates: interior and no loss of likelihood.
fn joint_common_step(
    data: &StudyData,
    p: &CommonDiffParams,
    with_d: bool,
    opts: &FitOptions,
) -> Option<CommonDiffParams> {
    let k = data.num_strata();
    let off = usize::from(with_d);
    let n = off + 2 * k;
    let mut h = vec![vec![0.0; n]; n];
    let mut g = vec![0.0; n];
    for (i, (s, sp)) in data.strata().iter().zip(&p.strata).enumerate() {
        let d1 = s.group1.derivatives(sp.pi1, sp.gamma);
        let d2 = s.group2.derivatives(sp.pi1 - p.d, sp.gamma);
        let (a, b) = (off + 2 * i, off + 2 * i + 1);
        g[a] = d1.d_pi + d2.d_pi;
        g[b] = d1.d_gamma + d2.d_gamma;
        h[a][a] = -(d1.d_pi_pi + d2.d_pi_pi);
        h[a][b] = -(d1.d_pi_gamma + d2.d_pi_gamma);
        h[b][a] = h[a][b];
        h[b][b] = -(d1.d_gamma_gamma + d2.d_gamma_gamma);
        if with_d {
            g[0] -= d2.d_pi;
            h[0][0] -= d2.d_pi_pi;
            h[0][a] = d2.d_pi_pi;
            h[a][0] = d2.d_pi_pi;
            h[0][b] = d2.d_pi_gamma;
            h[b][0] = d2.d_pi_gamma;
        }
    }
    let neg_h = Matrix::from_rows(&h);
    if !g.iter().all(|x| x.is_finite()) || !neg_h.is_positive_definite() {
        return None;
    }
    let step = dense_solve(&neg_h, &g).ok()?;
    let base = crate::model::log_likelihood_common(data, p);
    for j in 0..=opts.max_halvings {
        let f = f64::powi(0.5, j as i32);
        let d = if with_d { p.d + f * step[0] } else { p.d };
        let strata: Vec<_> = p
            .strata
            .iter()
            .enumerate()
            .map(|(i, sp)| CommonStratumParams {
                pi1: sp.pi1 + f * step[off + 2 * i],
                gamma: sp.gamma + f * step[off + 2 * i + 1],
            })
            .collect();
        let cand = CommonDiffParams::new(d, strata);
        if cand.strata.iter().all(|sp| common_interior(d, sp))
            && crate::model::log_likelihood_common(data, &cand) >= base
        {
            return Some(cand);
        }
    }
    None
}

pub fn fit_constrained(data: &StudyData) -> FitResult<CommonDiffParams> {
    fit_constrained_with(data, &FitOptions::default())
}

pub fn fit_constrained_with(data: &StudyData, opts: &FitOptions) -> FitResult<CommonDiffParams> {
    let unc = fit_unconstrained_with(data, opts);
    let diffs = unc.params.risk_differences();
    let mut d = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let starts: Vec<_> = unc
        .params
        .strata
        .iter()
        .map(|p| CommonStratumParams {
            pi1: p.pi1,
            gamma: p.gamma,
        })
        .collect();
    // Shrink the starting difference until every stratum admits it.
    while d.abs() > 1e-12
        && starts
            .iter()
            .any(|p| d.abs() >= pi_upper_bound(p.gamma.clamp(0.01, 0.99)) * 0.98)
    {
        d *= 0.5;
    }
    let mut p = CommonDiffParams::new(d, starts.iter().map(|sp| project_start(d, sp)).collect());

    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let old = p.clone();
        // Per-stratum Newton in (π_s1, γ_s) at the current d.
        for (s, sp) in data.strata().iter().zip(p.strata.iter_mut()) {
            let [gp, gg, hpp, hpg, hgg] = stratum_common_grad(s, p.d, sp);
            let det = hpp * hgg - hpg * hpg;
            let step = if hpp < 0.0 && det > 0.0 {
                ((-hgg * gp + hpg * gg) / det, (hpg * gp - hpp * gg) / det)
            } else {
                let a = if hpp < 0.0 { -gp / hpp } else { 0.0 };
                let b = if hgg < 0.0 { -gg / hgg } else { 0.0 };
                (a, b)
            };
            *sp = damped_update(s, p.d, *sp, step, opts);
        }
        // Pooled Newton in d.
        let (mut grad, mut curv) = (0.0, 0.0);
        for (s, sp) in data.strata().iter().zip(&p.strata) {
            let d2 = s.group2.derivatives(sp.pi1 - p.d, sp.gamma);
            grad -= d2.d_pi;
            curv += d2.d_pi_pi;
        }
        if curv < 0.0 && grad.is_finite() {
            let step = -grad / curv;
            let base = crate::model::log_likelihood_common(data, &p);
            for k in 0..=opts.max_halvings {
                let cand_d = p.d + step * f64::powi(0.5, k as i32);
                let cand = CommonDiffParams::new(cand_d, p.strata.clone());
                if cand.strata.iter().all(|sp| common_interior(cand_d, sp))
                    && crate::model::log_likelihood_common(data, &cand) >= base
                {
                    p = cand;
                    break;
                }
            }
        }
        if let Some(q) = joint_common_step(data, &p, true, opts) {
            p = q;
        }
        if max_change(&old, &p) < opts.param_tol
            || common_score_norm(data, &p, true) < opts.score_tol
        {
            converged = true;
            break;
        }
    }
    FitResult {
        loglik: crate::model::log_likelihood_common(data, &p),
        boundary: common_boundary(data, &p),
        score_norm: common_score_norm(data, &p, true),
        params: p,
        iterations,
        converged,
    }
}

/// Coefficients (ascending) of the cubic whose roots are the stationary
/// points in `γ` of one stratum at fixed `π_s1`, `π_s2`.
pub fn gamma_cubic(s: &StratumCounts, pi1: f64, pi2: f64) -> Cubic {
    fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    let q1 = [1.0 - 2.0 * pi1, pi1];
    let q2 = [1.0 - 2.0 * pi2, pi2];
    let q12 = mul(&q1, &q2);
    let (g1, g2) = (&s.group1, &s.group2);
    let big_n2 = g1.n2 + g2.n2;
    let big_n1 = g1.n1 + g2.n1;
    let t1 = mul(&[big_n2, -big_n2], &q12);
    let t2 = mul(&[0.0, -big_n1], &q12);
    let t3 = mul(&[0.0, g1.n0 * pi1, -g1.n0 * pi1], &q2);
    let t4 = mul(&[0.0, g2.n0 * pi2, -g2.n0 * pi2], &q1);
    let mut c = [0.0; 4];
    for t in [t1, t2, t3, t4] {
        for (k, v) in t.iter().enumerate() {
            c[k] += v;
        }
    }
    Cubic::from_ascending(&c)
}

/// Maximizes a stratum's log-likelihood over `γ` with `π_s1`, `π_s2` fixed.
/// The flag is set when no interior stationary point exists.
pub fn solve_gamma_cubic(s: &StratumCounts, pi1: f64, pi2: f64, gamma: f64) -> GammaStep {
    let lower = [0.0, 2.0 - 1.0 / pi1, 2.0 - 1.0 / pi2]
        .into_iter()
        .fold(0.0, f64::max)
        + BOUNDARY_EPS;
    let upper = 1.0 - BOUNDARY_EPS;
    let cubic = gamma_cubic(s, pi1, pi2);
    let roots = match real_roots_cubic(&cubic) {
        Ok(r) => r,
        Err(_) => {
            return GammaStep {
                gamma,
                flagged: true,
            }
        }
    };
    let ll = |g: f64| s.log_likelihood(pi1, pi2, g);
    let best = roots
        .into_iter()
        .filter(|&r| (lower - BOUNDARY_EPS..=1.0).contains(&r))
        .map(|r| r.clamp(lower, upper))
        .map(|r| (r, ll(r)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((r, _)) => GammaStep {
            gamma: r,
            flagged: r == lower || r == upper,
        },
        None => {
            let pick = if ll(upper) >= ll(lower) { upper } else { lower };
            GammaStep {
                gamma: pick,
                flagged: true,
            }
        }
    }
}

/// Conditional MLE with the common difference fixed at `d0`, started from
/// the constrained MLE.
pub fn fit_conditional(data: &StudyData, d0: f64) -> Result<FitResult<CommonDiffParams>> {
    let start = fit_constrained(data);
    fit_conditional_from(data, d0, &start.params, &FitOptions::default())
}

pub fn fit_conditional_from(
    data: &StudyData,
    d0: f64,
    start: &CommonDiffParams,
    opts: &FitOptions,
) -> Result<FitResult<CommonDiffParams>> {
    if !(d0.abs() < 1.0) {
        return Err(Error::infeasible(format!(
            "risk difference {d0} leaves an empty parameter region"
        )));
    }
    if start.strata.len() != data.num_strata() {
        return Err(Error::domain("start point has the wrong number of strata"));
    }
    let mut p = CommonDiffParams::new(
        d0,
        start
            .strata
            .iter()
            .map(|sp| project_start(d0, sp))
            .collect(),
    );
    let mut converged = false;
    let mut iterations = 0;
    let mut flagged = false;
    for it in 1..=opts.max_iter {
        iterations = it;
        let old = p.clone();
        flagged = false;
        for (s, sp) in data.strata().iter().zip(p.strata.iter_mut()) {
            let [gp, _, hpp, _, _] = stratum_common_grad(s, d0, sp);
            if hpp < 0.0 {
                *sp = damped_update(s, d0, *sp, (-gp / hpp, 0.0), opts);
            }
            if has_bilateral(s) {
                let g = solve_gamma_cubic(s, sp.pi1, sp.pi1 - d0, sp.gamma);
                let cand = CommonStratumParams {
                    pi1: sp.pi1,
                    gamma: g.gamma,
                };
                if common_interior(d0, &cand) && stratum_ll(s, d0, &cand) >= stratum_ll(s, d0, sp) {
                    *sp = cand;
                }
                flagged |= g.flagged;
            }
        }
        if let Some(q) = joint_common_step(data, &p, false, opts) {
            p = q;
        }
        if max_change(&old, &p) < opts.param_tol
            || common_score_norm(data, &p, false) < opts.score_tol
        {
            converged = true;
            break;
        }
    }
    Ok(FitResult {
        loglik: crate::model::log_likelihood_common(data, &p),
        boundary: flagged || common_boundary(data, &p),
        score_norm: common_score_norm(data, &p, false),
        params: p,
        iterations,
        converged,
    })
}
