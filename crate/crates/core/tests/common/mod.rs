#![allow(dead_code)]

pub mod checks;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riskdiff::model::{
    smooth_zero_cells, FullParams, GroupCounts, StratumCounts, StratumParams, StratumSizes,
    StudyData,
};
use riskdiff::montecarlo::{params_in_region, sample_study};
use riskdiff::numkit::Matrix;

pub fn g(c: [f64; 5]) -> GroupCounts {
    GroupCounts::new(c[0], c[1], c[2], c[3], c[4])
}

/// Otitis media trial, three age strata; group 1 cefaclor, group 2 amoxicillin.
pub fn example1() -> StudyData {
    StudyData::new(vec![
        StratumCounts::new(g([8., 2., 8., 9., 3.]), g([11., 2., 2., 10., 2.])),
        StratumCounts::new(g([6., 6., 10., 7., 24.]), g([3., 1., 5., 22., 14.])),
        StratumCounts::new(g([0., 1., 3., 8., 11.]), g([1., 0., 6., 7., 11.])),
    ])
    .unwrap()
}

/// Ortho-k study, female and male strata; group 1 CRT, group 2 VST.
pub fn example2_raw() -> StudyData {
    StudyData::new(vec![
        StratumCounts::new(g([7., 0., 0., 0., 0.]), g([9., 3., 7., 2., 1.])),
        StratumCounts::new(g([6., 2., 2., 0., 0.]), g([11., 4., 3., 1., 2.])),
    ])
    .unwrap()
}

pub fn example2_smoothed() -> StudyData {
    smooth_zero_cells(&example2_raw(), 1e-4)
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Interior stratum parameters with every cell probability in (0.1, 1).
pub fn stratum_params() -> impl Strategy<Value = StratumParams> {
    (0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95)
        .prop_map(|(a, b, g)| StratumParams::new(a, b, g))
        .prop_filter("cells in (0.1, 1)", |p| {
            params_in_region(&FullParams::new(vec![*p]))
        })
}

pub fn full_params(strata: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = FullParams> {
    prop::collection::vec(stratum_params(), strata).prop_map(FullParams::new)
}

pub fn sizes(count: usize) -> impl Strategy<Value = Vec<StratumSizes>> {
    prop::collection::vec(
        (10u32..60, 10u32..60, 5u32..40, 5u32..40)
            .prop_map(|(a, b, c, d)| StratumSizes::new(a as f64, b as f64, c as f64, d as f64)),
        count,
    )
}

/// A dataset drawn from `params`, smoothed if it has a zero cell.
pub fn draw(sizes: &[StratumSizes], params: &FullParams, seed: u64) -> StudyData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sample_study(sizes, params, &mut rng);
    if d.has_zero_cell() {
        smooth_zero_cells(&d, 1e-4)
    } else {
        d
    }
}

/// Random simulated dataset with 2..=max_strata strata.
pub fn dataset(max_strata: usize) -> impl Strategy<Value = StudyData> {
    full_params(2..=max_strata)
        .prop_flat_map(|p| {
            let s = p.strata.len();
            (Just(p), sizes(s), any::<u64>())
        })
        .prop_map(|(p, sz, seed)| draw(&sz, &p, seed))
}
