mod common;

use common::to_na;
use nalgebra::DMatrix;
use proptest::prelude::*;
use riskdiff::numkit::*;

/// Real eigenvalues of the companion matrix of a monic cubic.
fn companion_real_roots(c: &Cubic) -> Vec<f64> {
    let (a2, a1, a0) = (c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3);
    let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, -a0, 1.0, 0.0, -a1, 0.0, 1.0, -a2]);
    let mut r: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-7)
        .map(|z| z.re)
        .collect();
    r.sort_by(f64::total_cmp);
    r
}

fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn separated(v: &[f64], gap: f64) -> bool {
    v.iter()
        .enumerate()
        .all(|(i, x)| v[i + 1..].iter().all(|y| (x - y).abs() > gap))
}

fn spd(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let b = DMatrix::from_row_slice(n, n, &v);
        let a = &b * b.transpose() + DMatrix::identity(n, n) * 0.5;
        Matrix::from_rows(
            &(0..n)
                .map(|i| (0..n).map(|j| a[(i, j)]).collect())
                .collect::<Vec<_>>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn cubic_with_three_real_roots(
        lead in prop_oneof![-5.0f64..-0.2, 0.2f64..5.0],
        r in prop::collection::vec(-5.0f64..5.0, 3).prop_filter("separated", |r| separated(r, 0.05)),
    ) {
        let c = Cubic::new(
            lead,
            -lead * (r[0] + r[1] + r[2]),
            lead * (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]),
            -lead * r[0] * r[1] * r[2],
        );
        let ours = real_roots_cubic(&c).unwrap();
        let oracle = companion_real_roots(&c);
        prop_assert_eq!(ours.len(), 3);
        prop_assert_eq!(oracle.len(), 3);
        prop_assert!(hausdorff(&ours, &oracle) < 1e-8, "{:?} vs {:?}", ours, oracle);
    }

    #[test]
    fn cubic_with_one_real_root(
        lead in prop_oneof![-5.0f64..-0.2, 0.2f64..5.0],
        r in -5.0f64..5.0, re in -5.0f64..5.0, im in 0.1f64..5.0,
    ) {
        // lead · (x − r)(x² − 2·re·x + re² + im²)
        let q = re * re + im * im;
        let c = Cubic::new(lead, lead * (-2.0 * re - r), lead * (q + 2.0 * re * r), -lead * r * q);
        let ours = real_roots_cubic(&c).unwrap();
        let oracle = companion_real_roots(&c);
        prop_assert_eq!(ours.len(), 1);
        prop_assert!(hausdorff(&ours, &oracle) < 1e-8, "{:?} vs {:?}", ours, oracle);
    }

    #[test]
    fn cubic_roots_vanish(c in prop::array::uniform4(-10.0f64..10.0)) {
        prop_assume!(c[0].abs() > 1e-3);
        let cubic = Cubic::new(c[0], c[1], c[2], c[3]);
        for x in real_roots_cubic(&cubic).unwrap() {
            prop_assert!(cubic.eval(x).abs() < 1e-9 * cubic.max_coeff() * (1.0 + x.abs()).powi(3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spd_inverse_matches_nalgebra(a in spd(7)) {
        let ours = dense_inverse(&a).unwrap();
        let oracle = to_na(&a).try_inverse().unwrap();
        prop_assert!((to_na(&ours) - oracle).abs().max() < 1e-9);
        prop_assert!(a.is_positive_definite());
    }

    #[test]
    fn dense_solve_residual(a in spd(5), b in prop::collection::vec(-10.0f64..10.0, 5)) {
        let x = dense_solve(&a, &b).unwrap();
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            prop_assert!((ri - bi).abs() < 1e-10 * (1.0 + bi.abs()));
        }
    }

    #[test]
    fn normal_quantile_inverts_cdf(p in 1e-10f64..(1.0 - 1e-10)) {
        let z = normal_quantile(p);
        prop_assert!((normal_cdf(z) - p).abs() < 1e-12 + 1e-9 * p.min(1.0 - p));
    }

    #[test]
    fn chi2_quantile_inverts_cdf(p in 1e-6f64..(1.0 - 1e-6), df in 1u32..40) {
        let x = chi2_quantile(p, df);
        prop_assert!((chi2_cdf(x, df) - p).abs() < 1e-9, "df {df}: {} vs {p}", chi2_cdf(x, df));
        prop_assert!((chi2_cdf(x, df) + chi2_sf(x, df) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn reference_quantiles() {
    assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
    assert!((chi2_quantile(0.95, 1) - 3.841458820694124).abs() < 1e-9);
    assert!((chi2_quantile(0.95, 7) - 14.067140449340169).abs() < 1e-9);
    assert!(dense_solve(
        &Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
        &[1.0, 1.0]
    )
    .is_err());
}
