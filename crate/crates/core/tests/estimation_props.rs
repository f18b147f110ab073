mod common;

use common::checks::{self, grid_mle};
use common::*;
use proptest::prelude::*;
use riskdiff::estimation::*;
use riskdiff::model::*;

#[test]
fn example1_stratum1_matches_grid() {
    let s = example1().strata()[0];
    let data = StudyData::new(vec![s]).unwrap();
    let fit = fit_unconstrained(&data);
    let p = fit.params.strata[0];
    let (_, p1, p2, gamma) = grid_mle(&s, 5e-4);
    assert!(
        (p.pi1 - p1).abs() < 1e-3 && (p.pi2 - p2).abs() < 1e-3 && (p.gamma - gamma).abs() < 1e-3
    );
    assert!(
        (p.pi1 - 0.3958).abs() < 1e-3
            && (p.pi2 - 0.2018).abs() < 1e-3
            && (p.gamma - 0.8115).abs() < 1e-3
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn unconstrained_mle_matches_grid((p, sz, seed) in checks::grid_case()) {
        checks::unconstrained_mle_matches_grid(p, sz, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn likelihoods_are_nested((data, shift) in checks::nesting_case()) {
        checks::likelihoods_are_nested(&data, shift)?;
    }

    #[test]
    fn swapping_groups_negates_differences(data in dataset(4)) {
        let a = fit_constrained(&data);
        let b = fit_constrained(&data.swap_groups());
        prop_assert!((a.params.d + b.params.d).abs() < 1e-6, "{} vs {}", a.params.d, b.params.d);
        prop_assert!((a.loglik - b.loglik).abs() < 1e-8 * a.loglik.abs().max(1.0));
        let u = fit_unconstrained(&data);
        let v = fit_unconstrained(&data.swap_groups());
        for (x, y) in u.params.risk_differences().iter().zip(v.params.risk_differences()) {
            prop_assert!((x + y).abs() < 1e-6);
        }
    }

    #[test]
    fn scaling_counts_keeps_estimates(data in dataset(3)) {
        let a = fit_constrained(&data);
        let b = fit_constrained(&data.scaled(3.0));
        prop_assert!((a.params.d - b.params.d).abs() < 1e-6);
    }
}

#[test]
fn example1_fits_are_stationary() {
    let data = example1();
    let ha = fit_unconstrained(&data);
    let u = score_vector(&data, &ha.params).unwrap();
    assert!(u.iter().all(|x| x.abs() < 1e-6), "{u:?}");
    let h0 = fit_constrained(&data);
    let u = common_score_vector(&data, &h0.params).unwrap();
    assert!(u.iter().all(|x| x.abs() < 1e-6), "{u:?}");
}

#[test]
fn conditional_fit_is_stationary_in_nuisance_parameters() {
    let data = example1();
    let cond = fit_conditional(&data, 0.10).unwrap();
    assert_eq!(cond.params.d, 0.10);
    let u = common_score_vector(&data, &cond.params).unwrap();
    assert!(u[1..].iter().all(|x| x.abs() < 1e-8), "{u:?}");
    let at_zero = fit_conditional(&data, 0.0).unwrap();
    let h0 = fit_constrained(&data);
    assert!(at_zero.loglik < h0.loglik);
}

#[test]
fn conditional_rejects_impossible_difference() {
    assert!(matches!(
        fit_conditional(&example1(), 1.0),
        Err(riskdiff::Error::Infeasible(_))
    ));
}
