mod common;

use common::checks;
use common::*;
use proptest::prelude::*;
use riskdiff::estimation::fit_constrained;
use riskdiff::intervals::*;

const ALPHA: f64 = 0.05;

#[test]
fn example1_endpoints_sit_on_the_critical_value() {
    checks::interval_endpoints_sit_on_critical_value(&example1()).unwrap();
}

#[test]
fn example1_matches_published_intervals() {
    let expected = [
        (CiMethod::W1, 0.0504, 0.2940, 0.2436),
        (CiMethod::W2, 0.0155, 0.2696, 0.2542),
        (CiMethod::W3, 0.0526, 0.2957, 0.2431),
        (CiMethod::Pro, 0.0502, 0.2953, 0.2451),
        (CiMethod::Sc, 0.0486, 0.2954, 0.2468),
    ];
    for (m, lo, hi, width) in expected {
        let ci = confidence_interval(&example1(), m, ALPHA).unwrap();
        assert!(
            (ci.lower - lo).abs() <= 1e-3 && (ci.upper - hi).abs() <= 1e-3,
            "{m}: {ci:?}"
        );
        assert!((ci.width - width).abs() <= 2e-3, "{m}: {ci:?}");
    }
}

#[test]
fn search_brackets_a_known_threshold() {
    for t in [-0.73, -0.1, 0.0, 0.2345, 0.9] {
        let (up, cut) = boundary_search(-0.95, 1.0, |d| d > t);
        assert!(!cut && up <= t && t - up < 1e-4, "{t}: {up}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn intervals_contain_the_estimate(data in dataset(4)) {
        let fit = fit_constrained(&data);
        for m in CiMethod::ALL {
            let ci = confidence_interval(&data, m, ALPHA).unwrap();
            prop_assert!(ci.lower <= ci.upper);
            if matches!(m, CiMethod::W3 | CiMethod::Pro | CiMethod::Sc) {
                prop_assert!(ci.contains(fit.params.d), "{m}: {ci:?} vs {}", fit.params.d);
            }
        }
    }

    #[test]
    fn likelihood_endpoints_sit_on_the_critical_value(data in dataset(3)) {
        checks::interval_endpoints_sit_on_critical_value(&data)?;
    }

    #[test]
    fn smaller_alpha_widens(data in dataset(3)) {
        for m in CiMethod::ALL {
            let a = confidence_interval(&data, m, 0.10).unwrap();
            let b = confidence_interval(&data, m, 0.01).unwrap();
            prop_assert!(b.width >= a.width - 2e-4, "{m}: {} < {}", b.width, a.width);
        }
    }
}

#[test]
fn quadrupling_sizes_halves_mean_widths() {
    use riskdiff::model::{CommonDiffParams, CommonStratumParams, StratumSizes};
    use riskdiff::montecarlo::{run, SimConfig, SimMode, Truth};
    let truth = Truth::Common(CommonDiffParams::new(
        0.1,
        vec![
            CommonStratumParams {
                pi1: 0.4,
                gamma: 0.5,
            },
            CommonStratumParams {
                pi1: 0.5,
                gamma: 0.7,
            },
        ],
    ));
    let mean_widths = |k: f64| {
        let sizes = vec![StratumSizes::new(40.0 * k, 40.0 * k, 30.0 * k, 30.0 * k); 2];
        let mut cfg = SimConfig::new(SimMode::Coverage, sizes, truth.clone());
        cfg.replicates = 400;
        cfg.seed = 7;
        run(&cfg).unwrap().intervals
    };
    for (a, b) in mean_widths(1.0).iter().zip(mean_widths(4.0)) {
        let ratio = b.mean_length / a.mean_length;
        assert!((ratio - 0.5).abs() < 0.05, "{}: {ratio}", a.method);
    }
}
