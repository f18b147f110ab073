mod common;

use common::checks::{self, dataset_and_point};
use common::*;
use proptest::prelude::*;
use riskdiff::model::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn score_matches_finite_differences((data, params) in dataset_and_point()) {
        checks::score_matches_finite_differences(&data, &params)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hessian_matches_score_differences((data, params) in dataset_and_point()) {
        let hess = hessian(&data, &params).unwrap();
        let x = params.to_vec();
        let h = 1e-6;
        for j in 0..x.len() {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[j] += h;
            dn[j] -= h;
            let su = score_vector(&data, &FullParams::from_slice(&up)).unwrap();
            let sd = score_vector(&data, &FullParams::from_slice(&dn)).unwrap();
            for i in 0..x.len() {
                let fd = (su[i] - sd[i]) / (2.0 * h);
                prop_assert!(rel_close(hess[(i, j)], fd, 1e-5), "({i},{j}): {} vs {fd}", hess[(i, j)]);
            }
        }
    }

    #[test]
    fn common_derivatives_match_finite_differences(
        (data, params) in dataset_and_point(),
        d in -0.2f64..0.2,
    ) {
        let cp = CommonDiffParams::new(
            d,
            params.strata.iter().map(|p| CommonStratumParams { pi1: p.pi1, gamma: p.gamma }).collect(),
        );
        prop_assume!(cp.to_full().strata.iter().all(|p| {
            [p.pi1, p.pi2].iter().all(|&pi| {
                cell_probabilities(pi, p.gamma).is_ok_and(|c| c.as_array().iter().all(|&x| x > 0.01))
            })
        }));
        let u = common_score_vector(&data, &cp).unwrap();
        let hess = common_hessian(&data, &cp).unwrap();
        let x = cp.to_vec();
        let h = 1e-6;
        for j in 0..x.len() {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[j] += h;
            dn[j] -= h;
            let (pu, pd) = (CommonDiffParams::from_slice(&up), CommonDiffParams::from_slice(&dn));
            let fd = (log_likelihood_common(&data, &pu) - log_likelihood_common(&data, &pd)) / (2.0 * h);
            prop_assert!(rel_close(u[j], fd, 1e-5), "score {j}: {} vs {fd}", u[j]);
            let su = common_score_vector(&data, &pu).unwrap();
            let sd = common_score_vector(&data, &pd).unwrap();
            for i in 0..x.len() {
                let fd = (su[i] - sd[i]) / (2.0 * h);
                prop_assert!(rel_close(hess[(i, j)], fd, 1e-5), "hess ({i},{j}): {} vs {fd}", hess[(i, j)]);
            }
        }
        prop_assert!(rel_close(score_wrt_d(&data, &cp).unwrap(), u[0], 1e-12));
    }

    #[test]
    fn cell_probabilities_sum_to_one(pi in 0.0f64..1.0, gamma in 0.0f64..=1.0) {
        prop_assume!(is_valid(pi, gamma));
        let c = cell_probabilities(pi, gamma).unwrap();
        let [b0, b1, b2, u0, u1] = c.as_array();
        prop_assert!((b0 + b1 + b2 - 1.0).abs() < 1e-12);
        prop_assert!((u0 + u1 - 1.0).abs() < 1e-15);
        prop_assert!([b0, b1, b2, u0, u1].iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
        // marginal response probability of each organ is π
        prop_assert!((0.5 * b1 + b2 - pi).abs() < 1e-12);
    }
}

#[test]
fn loglik_matches_cell_by_cell_oracle() {
    let data = example1();
    // unconstrained estimates printed to four decimals
    let params = FullParams::new(vec![
        StratumParams::new(0.3958, 0.2018, 0.8115),
        StratumParams::new(0.6881, 0.4346, 0.8321),
        StratumParams::new(0.6522, 0.6720, 0.9184),
    ]);
    let mut oracle = 0.0;
    for (s, p) in data.strata().iter().zip(&params.strata) {
        for (g, pi) in [(&s.group1, p.pi1), (&s.group2, p.pi2)] {
            let gamma = p.gamma;
            let probs = [
                1.0 - 2.0 * pi + pi * gamma,
                2.0 * pi * (1.0 - gamma),
                pi * gamma,
                1.0 - pi,
                pi,
            ];
            for (count, prob) in g.cells().iter().zip(probs) {
                if *count > 0.0 {
                    oracle += count * prob.ln();
                }
            }
        }
    }
    let got = log_likelihood(&data, &params);
    assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
}

#[test]
fn swapping_groups_mirrors_parameters() {
    let data = example1();
    let p = FullParams::new(vec![
        StratumParams::new(0.4, 0.2, 0.8),
        StratumParams::new(0.7, 0.4, 0.8),
        StratumParams::new(0.6, 0.65, 0.9),
    ]);
    let swapped = FullParams::new(
        p.strata
            .iter()
            .map(|s| StratumParams::new(s.pi2, s.pi1, s.gamma))
            .collect(),
    );
    let a = log_likelihood(&data, &p);
    let b = log_likelihood(&data.swap_groups(), &swapped);
    assert!((a - b).abs() < 1e-12);
}
