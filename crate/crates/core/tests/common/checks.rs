//! Property checks shared by the property tests and the acceptance run.
//! Each takes one generated case and fails with a message on violation.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use riskdiff::estimation::{fit_conditional, fit_constrained, fit_unconstrained};
use riskdiff::inference::{
    fisher_block, fisher_blocks, score_from_fit, tridiag_inverse, tridiagonal,
};
use riskdiff::intervals::{
    common_info, confidence_interval, profile_statistic, score_statistic, CiMethod,
};
use riskdiff::model::*;
use riskdiff::numkit::chi2_quantile;

use super::{dataset, full_params, sizes, stratum_params, to_na};

type Check = Result<(), TestCaseError>;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

pub fn dataset_and_point() -> impl Strategy<Value = (StudyData, FullParams)> {
    dataset(4).prop_flat_map(|d| {
        let s = d.num_strata();
        (Just(d), full_params(s..=s))
    })
}

pub fn score_matches_finite_differences(data: &StudyData, params: &FullParams) -> Check {
    let u = score_vector(data, params).unwrap();
    let x = params.to_vec();
    let h = 1e-6;
    for k in 0..x.len() {
        let mut up = x.clone();
        let mut dn = x.clone();
        up[k] += h;
        dn[k] -= h;
        let fd = (log_likelihood(data, &FullParams::from_slice(&up))
            - log_likelihood(data, &FullParams::from_slice(&dn)))
            / (2.0 * h);
        prop_assert!(rel_close(u[k], fd, 1e-5), "component {k}: {} vs {fd}", u[k]);
    }
    Ok(())
}

/// Expected counts for one group, from the cell probabilities written out here.
fn expected(n: f64, m: f64, pi: f64, gamma: f64) -> GroupCounts {
    GroupCounts::new(
        n * (1.0 - 2.0 * pi + pi * gamma),
        n * 2.0 * pi * (1.0 - gamma),
        n * pi * gamma,
        m * (1.0 - pi),
        m * pi,
    )
}

pub fn expected_study(sizes: &[StratumSizes], p: &FullParams) -> StudyData {
    StudyData::new(
        sizes
            .iter()
            .zip(&p.strata)
            .map(|(sz, sp)| {
                StratumCounts::new(
                    expected(sz.n1, sz.m1, sp.pi1, sp.gamma),
                    expected(sz.n2, sz.m2, sp.pi2, sp.gamma),
                )
            })
            .collect(),
    )
    .unwrap()
}

pub fn block_diag_info(data: &StudyData, p: &FullParams) -> DMatrix<f64> {
    let s = data.num_strata();
    let mut info = DMatrix::zeros(3 * s, 3 * s);
    for (k, b) in fisher_blocks(data, p).unwrap().iter().enumerate() {
        let m = to_na(&b.to_matrix());
        info.view_mut((3 * k, 3 * k), (3, 3)).copy_from(&m);
    }
    info
}

pub fn fisher_block_case() -> impl Strategy<Value = (Vec<StratumSizes>, StratumParams)> {
    (sizes(1), stratum_params())
}

pub fn fisher_block_is_expected_negative_hessian(sz: &[StratumSizes], p: StratumParams) -> Check {
    let params = FullParams::new(vec![p]);
    let oracle = -to_na(&hessian(&expected_study(sz, &params), &params).unwrap());
    let block = to_na(
        &fisher_block(&sz[0], p.pi1, p.pi2, p.gamma)
            .unwrap()
            .to_matrix(),
    );
    prop_assert!(rel_diff(&block, &oracle) < 1e-8, "{block} vs {oracle}");
    Ok(())
}

pub fn common_info_case() -> impl Strategy<Value = (FullParams, f64, u64)> {
    (full_params(1..=6), -0.3f64..0.3, any::<u64>())
}

/// Common-difference information against the expected negative Hessian,
/// and both variance formulas for `d` against a dense inverse.
pub fn common_info_is_expected_negative_hessian(p: &FullParams, d: f64, seed: u64) -> Check {
    let s = p.strata.len();
    let cp = CommonDiffParams::new(
        d,
        p.strata
            .iter()
            .map(|x| CommonStratumParams {
                pi1: x.pi1,
                gamma: x.gamma,
            })
            .collect(),
    );
    prop_assume!(cp.is_interior());
    let sz: Vec<StratumSizes> = (0..s)
        .map(|k| {
            let v = (seed >> (8 * (k % 8))) & 0xff;
            StratumSizes::new(
                10.0 + (v % 40) as f64,
                12.0 + (v % 31) as f64,
                5.0 + (v % 17) as f64,
                3.0 + (v % 23) as f64,
            )
        })
        .collect();
    let data = expected_study(&sz, &cp.to_full());
    let oracle = -to_na(&common_hessian(&data, &cp).unwrap());
    let info = common_info(&sz, &cp).unwrap();
    let dense = to_na(&info.to_dense());
    prop_assert!(rel_diff(&dense, &oracle) < 1e-8);

    let inv = dense.clone().try_inverse().unwrap();
    let v = info.ab_variance();
    prop_assert!(
        (v - inv[(0, 0)]).abs() <= 1e-9 * inv[(0, 0)].abs(),
        "{v} vs {}",
        inv[(0, 0)]
    );
    let (vd, pseudo) = info.variance_d();
    prop_assert!(!pseudo);
    prop_assert!((vd - inv[(0, 0)]).abs() <= 1e-9 * inv[(0, 0)].abs());
    Ok(())
}

pub fn tridiagonal_case() -> impl Strategy<Value = (usize, Vec<(f64, f64)>)> {
    (
        1usize..12,
        prop::collection::vec((0.5f64..3.0, -1.0f64..1.0), 12),
    )
}

pub fn tridiagonal_inverse_matches_dense(n: usize, raw: &[(f64, f64)]) -> Check {
    let a: Vec<f64> = raw[..n].iter().map(|r| r.0 + 2.0).collect();
    let b: Vec<f64> = raw[..n - 1].iter().map(|r| r.1).collect();
    let fast = to_na(&tridiag_inverse(&a, &b).unwrap());
    let dense = to_na(&tridiagonal(&a, &b)).try_inverse().unwrap();
    prop_assert!((fast - &dense).amax() < 1e-10 * dense.amax().max(1.0));
    Ok(())
}

pub fn score_statistic_matches_dense_form(data: &StudyData) -> Check {
    let h0 = fit_constrained(data);
    prop_assume!(h0.converged && !h0.boundary);
    let full = h0.params.to_full();
    let u = DVector::from_vec(score_vector(data, &full).unwrap());
    let info = block_diag_info(data, &full);
    let dense = (u.transpose() * info.try_inverse().unwrap() * &u)[(0, 0)];
    let stat = score_from_fit(data, h0).unwrap().statistic;
    prop_assert!(
        (stat - dense).abs() <= 1e-10 * dense.abs().max(1.0),
        "{stat} vs {dense}"
    );
    Ok(())
}

/// |T(endpoint) − χ²₁ critical value| for the profile and score intervals.
pub fn interval_endpoints_sit_on_critical_value(data: &StudyData) -> Check {
    let alpha = 0.05;
    let fit = fit_constrained(data);
    let crit = chi2_quantile(1.0 - alpha, 1);
    for (method, stat) in [
        (CiMethod::Pro, profile_statistic as fn(_, _, _) -> _),
        (CiMethod::Sc, score_statistic),
    ] {
        let ci = confidence_interval(data, method, alpha).unwrap();
        for end in [ci.lower, ci.upper] {
            if end.abs() < 0.99 {
                let t: f64 = stat(data, &fit, end).unwrap();
                prop_assert!((t - crit).abs() < 0.02, "{method} at {end}: {t}");
            }
        }
    }
    Ok(())
}

pub fn nesting_case() -> impl Strategy<Value = (StudyData, f64)> {
    (dataset(5), -0.3f64..0.3)
}

pub fn likelihoods_are_nested(data: &StudyData, shift: f64) -> Check {
    let ha = fit_unconstrained(data);
    let h0 = fit_constrained(data);
    prop_assert!(ha.converged && h0.converged);
    let tol = 1e-8 * ha.loglik.abs().max(1.0);
    prop_assert!(
        ha.loglik >= h0.loglik - tol,
        "{} < {}",
        ha.loglik,
        h0.loglik
    );
    let d0 = (h0.params.d + shift).clamp(-0.9, 0.9);
    if let Ok(cond) = fit_conditional(data, d0) {
        prop_assert!(cond.converged);
        prop_assert!(
            h0.loglik >= cond.loglik - tol,
            "{} < {}",
            h0.loglik,
            cond.loglik
        );
    }
    Ok(())
}

/// Brute-force maximizer of one stratum's log-likelihood on a grid of step
/// `h` in γ ∈ [0, 1] and, per group, π ∈ [0, 1/(2−γ)]. Given γ the two groups
/// separate, so each π is maximized on its own.
pub fn grid_mle(s: &StratumCounts, h: f64) -> (f64, f64, f64, f64) {
    let cell_ll = |g: &GroupCounts, pi: f64, gamma: f64| -> f64 {
        let probs = [
            1.0 - 2.0 * pi + pi * gamma,
            2.0 * pi * (1.0 - gamma),
            pi * gamma,
            1.0 - pi,
            pi,
        ];
        let mut ll = 0.0;
        for (c, p) in g.cells().iter().zip(probs) {
            if *c > 0.0 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += c * p.ln();
            }
        }
        ll
    };
    let steps = (1.0 / h).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for i in 0..=steps {
        let gamma = i as f64 * h;
        let upper = 1.0 / (2.0 - gamma);
        let best_pi = |g: &GroupCounts| {
            let mut b = (f64::NEG_INFINITY, 0.0);
            let mut pi = 0.0;
            while pi <= upper + 1e-12 {
                let v = cell_ll(g, pi.min(upper), gamma);
                if v > b.0 {
                    b = (v, pi.min(upper));
                }
                pi += h;
            }
            b
        };
        let (l1, p1) = best_pi(&s.group1);
        let (l2, p2) = best_pi(&s.group2);
        if l1 + l2 > best.0 {
            best = (l1 + l2, p1, p2, gamma);
        }
    }
    best
}

pub fn grid_case() -> impl Strategy<Value = (StratumParams, (u32, u32, u32, u32), u64)> {
    (
        stratum_params(),
        (30u32..80, 30u32..80, 20u32..60, 20u32..60),
        any::<u64>(),
    )
}

pub fn unconstrained_mle_matches_grid(
    p: StratumParams,
    sz: (u32, u32, u32, u32),
    seed: u64,
) -> Check {
    let sizes = [StratumSizes::new(
        sz.0 as f64,
        sz.1 as f64,
        sz.2 as f64,
        sz.3 as f64,
    )];
    let raw = {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        riskdiff::montecarlo::sample_study(&sizes, &FullParams::new(vec![p]), &mut rng)
    };
    let fit = fit_unconstrained(&raw);
    prop_assert!(fit.converged);
    let f = fit.params.strata[0];
    let (ll_grid, p1, p2, gamma) = grid_mle(&raw.strata()[0], 5e-4);
    prop_assert!(
        fit.loglik >= ll_grid - 1e-9,
        "fit below grid: {} < {ll_grid}",
        fit.loglik
    );
    prop_assert!((f.pi1 - p1).abs() < 1e-3, "pi1 {} vs {p1}", f.pi1);
    prop_assert!((f.pi2 - p2).abs() < 1e-3, "pi2 {} vs {p2}", f.pi2);
    prop_assert!(
        (f.gamma - gamma).abs() < 1e-3,
        "gamma {} vs {gamma}",
        f.gamma
    );
    Ok(())
}
