//! Drawing study tables and random parameter sets.
//!
//! Multinomial draws use sequential binomial conditioning. Binomials come
//! from `rand_distr::Binomial`, which uses inversion when
//! `n·min(p, 1−p) < 10` and BTPE otherwise; bit-level reproducibility is
//! therefore tied to the `rand_distr` version pinned in the lockfile.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::model::{
    cell_probabilities, FullParams, GroupCounts, StratumCounts, StratumParams, StratumSizes,
    StudyData,
};

fn binomial<R: Rng + ?Sized>(n: f64, p: f64, rng: &mut R) -> f64 {
    let n = n as u64;
    if n == 0 || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return n as f64;
    }
    Binomial::new(n, p)
        .expect("p checked in (0, 1)")
        .sample(rng) as f64
}

/// One group's counts: `(n0, n1, n2) ~ Multinomial(n; pb0, pb1, pb2)` and
/// `m1 ~ Binomial(m; π)`. Parameters must be valid.
pub fn sample_group<R: Rng + ?Sized>(
    n: f64,
    m: f64,
    pi: f64,
    gamma: f64,
    rng: &mut R,
) -> GroupCounts {
    let p = cell_probabilities(pi, gamma).expect("sampling needs valid parameters");
    let n0 = binomial(n, p.pb0, rng);
    let rest = 1.0 - p.pb0;
    let n1 = if rest > 0.0 {
        binomial(n - n0, (p.pb1 / rest).min(1.0), rng)
    } else {
        0.0
    };
    let n2 = n - n0 - n1;
    let m1 = binomial(m, p.pu1, rng);
    GroupCounts::new(n0, n1, n2, m - m1, m1)
}

pub fn sample_stratum<R: Rng + ?Sized>(
    sizes: &StratumSizes,
    params: &StratumParams,
    rng: &mut R,
) -> StratumCounts {
    let g1 = sample_group(sizes.n1, sizes.m1, params.pi1, params.gamma, rng);
    let g2 = sample_group(sizes.n2, sizes.m2, params.pi2, params.gamma, rng);
    StratumCounts::new(g1, g2)
}

pub fn sample_study<R: Rng + ?Sized>(
    sizes: &[StratumSizes],
    truth: &FullParams,
    rng: &mut R,
) -> StudyData {
    let strata = sizes
        .iter()
        .zip(&truth.strata)
        .map(|(sz, p)| sample_stratum(sz, p, rng))
        .collect();
    StudyData::new(strata).expect("sampled counts are valid")
}

/// Accepted parameter sets plus the number of proposals drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSample {
    pub sets: Vec<FullParams>,
    pub proposals: u64,
}

const CELL_FLOOR: f64 = 0.1;

fn cells_ok(pi: f64, gamma: f64) -> bool {
    match cell_probabilities(pi, gamma) {
        Ok(p) => p.as_array().iter().all(|&c| c > CELL_FLOOR && c < 1.0),
        Err(_) => false,
    }
}

/// True when all ten cell probabilities of every stratum lie in (0.1, 1).
pub fn params_in_region(params: &FullParams) -> bool {
    params
        .strata
        .iter()
        .all(|p| cells_ok(p.pi1, p.gamma) && cells_ok(p.pi2, p.gamma))
}

// Every point of the region has π, π − d ∈ (0.1, 0.9) (unilateral cells),
// γ > 1/9 (πγ > 0.1 with π < 0.9) and γ < 17/18 (2π(1−γ) > 0.1 with
// π < 0.9). Proposing from this box instead of the unit box leaves the
// accepted distribution uniform on the region and cuts the rejection cost
// by about 1.5× per stratum.
const PI_BOX: (f64, f64) = (0.1, 0.9);
const GAMMA_BOX: (f64, f64) = (1.0 / 9.0, 17.0 / 18.0);
const D_BOX: (f64, f64) = (-0.8, 0.8);

fn propose<R: Rng + ?Sized>(rng: &mut R, d: f64) -> StratumParams {
    let gamma = rng.random_range(GAMMA_BOX.0..GAMMA_BOX.1);
    let pi1 = rng.random_range(PI_BOX.0..PI_BOX.1);
    StratumParams::new(pi1, pi1 - d, gamma)
}

fn stratum_ok(p: &StratumParams) -> bool {
    cells_ok(p.pi1, p.gamma) && cells_ok(p.pi2, p.gamma)
}

/// Draws `count` parameter sets for `strata` strata, uniform on the region
/// where every cell probability lies in (0.1, 1).
///
/// With `common_d` one difference is shared by all strata and the whole set
/// is accepted or rejected together. Otherwise strata are independent, so
/// each is drawn by its own rejection loop; this has the same distribution
/// as rejecting whole sets but stays cheap for many strata. `proposals`
/// counts single-stratum proposals from the bounding box above.
pub fn random_param_sets<R: Rng + ?Sized>(
    strata: usize,
    count: usize,
    common_d: bool,
    rng: &mut R,
) -> ParamSample {
    let mut sets = Vec::with_capacity(count);
    let mut proposals = 0u64;
    while sets.len() < count {
        if common_d {
            let d = rng.random_range(D_BOX.0..D_BOX.1);
            let mut set = Vec::with_capacity(strata);
            for _ in 0..strata {
                proposals += 1;
                let p = propose(rng, d);
                if !stratum_ok(&p) {
                    break;
                }
                set.push(p);
            }
            if set.len() == strata {
                sets.push(FullParams::new(set));
            }
        } else {
            let set = (0..strata)
                .map(|_| loop {
                    proposals += 1;
                    let d = rng.random_range(D_BOX.0..D_BOX.1);
                    let p = propose(rng, d);
                    if stratum_ok(&p) {
                        break p;
                    }
                })
                .collect();
            sets.push(FullParams::new(set));
        }
    }
    ParamSample { sets, proposals }
}

/// Fraction of `proposals` draws from the unit box (`γ, π_s1 ~ U(0,1)`,
/// `d ~ U(−1,1)`, shared or per stratum) that land in the region.
pub fn region_acceptance_rate<R: Rng + ?Sized>(
    strata: usize,
    proposals: u64,
    common_d: bool,
    rng: &mut R,
) -> f64 {
    let mut accepted = 0u64;
    for _ in 0..proposals {
        let shared = rng.random_range(-1.0..1.0);
        let params = FullParams::new(
            (0..strata)
                .map(|_| {
                    let gamma: f64 = rng.random_range(0.0..1.0);
                    let pi1: f64 = rng.random_range(0.0..1.0);
                    let d = if common_d {
                        shared
                    } else {
                        rng.random_range(-1.0..1.0)
                    };
                    StratumParams::new(pi1, pi1 - d, gamma)
                })
                .collect(),
        );
        if params_in_region(&params) {
            accepted += 1;
        }
    }
    accepted as f64 / proposals as f64
}
