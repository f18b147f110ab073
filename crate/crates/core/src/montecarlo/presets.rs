//! Named parameter configurations from the published simulation grids.
//!
//! A preset is written `<kind><S> <factor><index> ...`, for example
//! `C2 N1 d1 g1 p1`. Kinds: `T` (type I error, common d), `P` (power,
//! per-stratum d), `C` (coverage, per-stratum sizes). Factors: `N` (sizes,
//! coverage only), `d`, `g`/`gamma`, `p`/`pi`. An index of `*` expands to
//! every row of that factor. Type I and power presets carry no sizes; the
//! caller supplies `n_s1` and `m_s1`, which are used for every group.

use super::{SimConfig, SimMode, Truth};
use crate::error::{Error, Result};
use crate::model::{
    CommonDiffParams, CommonStratumParams, FullParams, StratumParams, StratumSizes,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    N,
    D,
    Gamma,
    Pi,
}

impl Factor {
    fn letter(self) -> &'static str {
        match self {
            Factor::N => "N",
            Factor::D => "d",
            Factor::Gamma => "g",
            Factor::Pi => "p",
        }
    }
}

struct Row {
    kind: char,
    strata: usize,
    factor: Factor,
    index: usize,
    values: &'static [f64],
    /// Unilateral sizes for `N` rows.
    extra: &'static [f64],
}

const fn row(
    kind: char,
    strata: usize,
    factor: Factor,
    index: usize,
    values: &'static [f64],
    extra: &'static [f64],
) -> Row {
    Row {
        kind,
        strata,
        factor,
        index,
        values,
        extra,
    }
}

#[rustfmt::skip]
static ROWS: &[Row] = &[
    row('T', 2, Factor::D, 1, &[0.0], &[]),
    row('T', 2, Factor::D, 2, &[0.05], &[]),
    row('T', 2, Factor::D, 3, &[0.1], &[]),
    row('T', 2, Factor::D, 4, &[0.15], &[]),
    row('T', 2, Factor::Gamma, 1, &[0.4, 0.4], &[]),
    row('T', 2, Factor::Gamma, 2, &[0.5, 0.5], &[]),
    row('T', 2, Factor::Gamma, 3, &[0.6, 0.6], &[]),
    row('T', 2, Factor::Gamma, 4, &[0.7, 0.7], &[]),
    row('T', 2, Factor::Gamma, 5, &[0.4, 0.5], &[]),
    row('T', 2, Factor::Gamma, 6, &[0.5, 0.6], &[]),
    row('T', 2, Factor::Gamma, 7, &[0.6, 0.7], &[]),
    row('T', 2, Factor::Pi, 1, &[0.5, 0.5], &[]),
    row('T', 2, Factor::Pi, 2, &[0.45, 0.45], &[]),
    row('T', 2, Factor::Pi, 3, &[0.45, 0.5], &[]),
    row('T', 2, Factor::Pi, 4, &[0.5, 0.45], &[]),
    row('T', 4, Factor::D, 1, &[0.0], &[]),
    row('T', 4, Factor::D, 2, &[0.05], &[]),
    row('T', 4, Factor::D, 3, &[0.1], &[]),
    row('T', 4, Factor::D, 4, &[0.15], &[]),
    row('T', 4, Factor::Gamma, 1, &[0.4, 0.4, 0.4, 0.4], &[]),
    row('T', 4, Factor::Gamma, 2, &[0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 4, Factor::Gamma, 3, &[0.6, 0.6, 0.6, 0.6], &[]),
    row('T', 4, Factor::Gamma, 4, &[0.7, 0.7, 0.7, 0.7], &[]),
    row('T', 4, Factor::Gamma, 5, &[0.4, 0.4, 0.5, 0.5], &[]),
    row('T', 4, Factor::Gamma, 6, &[0.4, 0.4, 0.6, 0.6], &[]),
    row('T', 4, Factor::Gamma, 7, &[0.4, 0.4, 0.7, 0.7], &[]),
    row('T', 4, Factor::Gamma, 8, &[0.5, 0.5, 0.6, 0.6], &[]),
    row('T', 4, Factor::Gamma, 9, &[0.5, 0.5, 0.7, 0.7], &[]),
    row('T', 4, Factor::Gamma, 10, &[0.6, 0.6, 0.7, 0.7], &[]),
    row('T', 4, Factor::Pi, 1, &[0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 4, Factor::Pi, 2, &[0.45, 0.45, 0.45, 0.45], &[]),
    row('T', 4, Factor::Pi, 3, &[0.45, 0.45, 0.5, 0.5], &[]),
    row('T', 4, Factor::Pi, 4, &[0.45, 0.5, 0.45, 0.5], &[]),
    row('T', 6, Factor::D, 1, &[0.0], &[]),
    row('T', 6, Factor::D, 2, &[0.05], &[]),
    row('T', 6, Factor::D, 3, &[0.1], &[]),
    row('T', 6, Factor::D, 4, &[0.15], &[]),
    row('T', 6, Factor::Gamma, 1, &[0.4, 0.4, 0.4, 0.4, 0.4, 0.4], &[]),
    row('T', 6, Factor::Gamma, 2, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 6, Factor::Gamma, 3, &[0.6, 0.6, 0.6, 0.6, 0.6, 0.6], &[]),
    row('T', 6, Factor::Gamma, 4, &[0.7, 0.7, 0.7, 0.7, 0.7, 0.7], &[]),
    row('T', 6, Factor::Gamma, 5, &[0.4, 0.4, 0.5, 0.5, 0.6, 0.6], &[]),
    row('T', 6, Factor::Gamma, 6, &[0.5, 0.5, 0.6, 0.6, 0.7, 0.7], &[]),
    row('T', 6, Factor::Gamma, 7, &[0.4, 0.4, 0.4, 0.5, 0.5, 0.5], &[]),
    row('T', 6, Factor::Gamma, 8, &[0.5, 0.5, 0.5, 0.6, 0.6, 0.6], &[]),
    row('T', 6, Factor::Gamma, 9, &[0.6, 0.6, 0.6, 0.7, 0.7, 0.7], &[]),
    row('T', 6, Factor::Gamma, 10, &[0.4, 0.4, 0.4, 0.6, 0.6, 0.6], &[]),
    row('T', 6, Factor::Gamma, 11, &[0.5, 0.5, 0.5, 0.7, 0.7, 0.7], &[]),
    row('T', 6, Factor::Gamma, 12, &[0.4, 0.4, 0.4, 0.7, 0.7, 0.7], &[]),
    row('T', 6, Factor::Pi, 1, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 6, Factor::Pi, 2, &[0.45, 0.45, 0.45, 0.45, 0.45, 0.45], &[]),
    row('T', 6, Factor::Pi, 3, &[0.45, 0.45, 0.5, 0.5, 0.45, 0.45], &[]),
    row('T', 6, Factor::Pi, 4, &[0.45, 0.5, 0.45, 0.5, 0.45, 0.5], &[]),
    row('T', 8, Factor::D, 1, &[0.0], &[]),
    row('T', 8, Factor::D, 2, &[0.05], &[]),
    row('T', 8, Factor::D, 3, &[0.1], &[]),
    row('T', 8, Factor::D, 4, &[0.15], &[]),
    row('T', 8, Factor::Gamma, 1, &[0.4, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4], &[]),
    row('T', 8, Factor::Gamma, 2, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 8, Factor::Gamma, 3, &[0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6], &[]),
    row('T', 8, Factor::Gamma, 4, &[0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7], &[]),
    row('T', 8, Factor::Gamma, 5, &[0.4, 0.4, 0.5, 0.5, 0.6, 0.6, 0.7, 0.7], &[]),
    row('T', 8, Factor::Gamma, 6, &[0.4, 0.4, 0.4, 0.4, 0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 8, Factor::Gamma, 7, &[0.4, 0.4, 0.4, 0.4, 0.6, 0.6, 0.6, 0.6], &[]),
    row('T', 8, Factor::Gamma, 8, &[0.4, 0.4, 0.4, 0.4, 0.7, 0.7, 0.7, 0.7], &[]),
    row('T', 8, Factor::Gamma, 9, &[0.5, 0.5, 0.5, 0.5, 0.6, 0.6, 0.6, 0.6], &[]),
    row('T', 8, Factor::Gamma, 10, &[0.5, 0.5, 0.5, 0.5, 0.7, 0.7, 0.7, 0.7], &[]),
    row('T', 8, Factor::Gamma, 11, &[0.6, 0.6, 0.6, 0.6, 0.7, 0.7, 0.7, 0.7], &[]),
    row('T', 8, Factor::Pi, 1, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('T', 8, Factor::Pi, 2, &[0.45, 0.45, 0.45, 0.45, 0.45, 0.45, 0.45, 0.45], &[]),
    row('T', 8, Factor::Pi, 3, &[0.45, 0.45, 0.5, 0.5, 0.45, 0.45, 0.5, 0.5], &[]),
    row('T', 8, Factor::Pi, 4, &[0.45, 0.5, 0.45, 0.5, 0.45, 0.5, 0.45, 0.5], &[]),
    row('T', 8, Factor::Pi, 5, &[0.45, 0.45, 0.45, 0.5, 0.5, 0.45, 0.45, 0.45], &[]),
    row('P', 2, Factor::D, 1, &[0.0, 0.05], &[]),
    row('P', 2, Factor::D, 2, &[0.0, 0.1], &[]),
    row('P', 2, Factor::D, 3, &[0.0, 0.15], &[]),
    row('P', 2, Factor::D, 4, &[0.05, 0.1], &[]),
    row('P', 2, Factor::D, 5, &[0.05, 0.15], &[]),
    row('P', 2, Factor::D, 6, &[0.1, 0.15], &[]),
    row('P', 2, Factor::Gamma, 1, &[0.4, 0.4], &[]),
    row('P', 2, Factor::Gamma, 2, &[0.5, 0.5], &[]),
    row('P', 2, Factor::Gamma, 3, &[0.6, 0.6], &[]),
    row('P', 2, Factor::Gamma, 4, &[0.7, 0.7], &[]),
    row('P', 2, Factor::Gamma, 5, &[0.4, 0.5], &[]),
    row('P', 2, Factor::Gamma, 6, &[0.5, 0.6], &[]),
    row('P', 2, Factor::Gamma, 7, &[0.6, 0.7], &[]),
    row('P', 2, Factor::Pi, 1, &[0.5, 0.5], &[]),
    row('P', 2, Factor::Pi, 2, &[0.45, 0.45], &[]),
    row('P', 2, Factor::Pi, 3, &[0.5, 0.45], &[]),
    row('P', 4, Factor::D, 1, &[0.0, 0.05, 0.0, 0.05], &[]),
    row('P', 4, Factor::D, 2, &[0.0, 0.1, 0.0, 0.1], &[]),
    row('P', 4, Factor::D, 3, &[0.0, 0.15, 0.0, 0.15], &[]),
    row('P', 4, Factor::D, 4, &[0.0, 0.05, 0.1, 0.15], &[]),
    row('P', 4, Factor::Gamma, 1, &[0.4, 0.4, 0.4, 0.4], &[]),
    row('P', 4, Factor::Gamma, 2, &[0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 4, Factor::Gamma, 3, &[0.6, 0.6, 0.6, 0.6], &[]),
    row('P', 4, Factor::Gamma, 4, &[0.7, 0.7, 0.7, 0.7], &[]),
    row('P', 4, Factor::Gamma, 5, &[0.4, 0.4, 0.5, 0.5], &[]),
    row('P', 4, Factor::Gamma, 6, &[0.4, 0.4, 0.6, 0.6], &[]),
    row('P', 4, Factor::Gamma, 7, &[0.4, 0.4, 0.7, 0.7], &[]),
    row('P', 4, Factor::Gamma, 8, &[0.5, 0.5, 0.6, 0.6], &[]),
    row('P', 4, Factor::Gamma, 9, &[0.5, 0.5, 0.7, 0.7], &[]),
    row('P', 4, Factor::Gamma, 10, &[0.6, 0.6, 0.7, 0.7], &[]),
    row('P', 4, Factor::Gamma, 11, &[0.4, 0.5, 0.6, 0.7], &[]),
    row('P', 4, Factor::Pi, 1, &[0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 4, Factor::Pi, 2, &[0.45, 0.45, 0.45, 0.45], &[]),
    row('P', 4, Factor::Pi, 3, &[0.5, 0.45, 0.5, 0.45], &[]),
    row('P', 6, Factor::D, 1, &[0.0, 0.05, 0.0, 0.05, 0.0, 0.05], &[]),
    row('P', 6, Factor::D, 2, &[0.0, 0.1, 0.0, 0.1, 0.0, 0.1], &[]),
    row('P', 6, Factor::D, 3, &[0.0, 0.15, 0.0, 0.15, 0.0, 0.15], &[]),
    row('P', 6, Factor::D, 4, &[0.0, 0.05, 0.1, 0.15, 0.1, 0.05], &[]),
    row('P', 6, Factor::Gamma, 1, &[0.4, 0.4, 0.4, 0.4, 0.4, 0.4], &[]),
    row('P', 6, Factor::Gamma, 2, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 6, Factor::Gamma, 3, &[0.6, 0.6, 0.6, 0.6, 0.6, 0.6], &[]),
    row('P', 6, Factor::Gamma, 4, &[0.7, 0.7, 0.7, 0.7, 0.7, 0.7], &[]),
    row('P', 6, Factor::Gamma, 5, &[0.4, 0.4, 0.5, 0.5, 0.6, 0.6], &[]),
    row('P', 6, Factor::Gamma, 6, &[0.5, 0.5, 0.6, 0.6, 0.7, 0.7], &[]),
    row('P', 6, Factor::Gamma, 7, &[0.4, 0.5, 0.6, 0.7, 0.4, 0.5], &[]),
    row('P', 6, Factor::Gamma, 8, &[0.4, 0.5, 0.6, 0.7, 0.6, 0.7], &[]),
    row('P', 6, Factor::Pi, 1, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 6, Factor::Pi, 2, &[0.45, 0.45, 0.45, 0.45, 0.45, 0.45], &[]),
    row('P', 6, Factor::Pi, 3, &[0.5, 0.5, 0.5, 0.45, 0.45, 0.45], &[]),
    row('P', 8, Factor::D, 1, &[0.0, 0.05, 0.0, 0.05, 0.0, 0.05, 0.0, 0.05], &[]),
    row('P', 8, Factor::D, 2, &[0.0, 0.1, 0.0, 0.1, 0.0, 0.1, 0.0, 0.1], &[]),
    row('P', 8, Factor::D, 3, &[0.0, 0.15, 0.0, 0.15, 0.0, 0.15, 0.0, 0.15], &[]),
    row('P', 8, Factor::D, 4, &[0.0, 0.05, 0.1, 0.15, 0.15, 0.1, 0.05, 0.0], &[]),
    row('P', 8, Factor::Gamma, 1, &[0.4, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4, 0.4], &[]),
    row('P', 8, Factor::Gamma, 2, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 8, Factor::Gamma, 3, &[0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6], &[]),
    row('P', 8, Factor::Gamma, 4, &[0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7], &[]),
    row('P', 8, Factor::Gamma, 5, &[0.4, 0.4, 0.4, 0.4, 0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 8, Factor::Gamma, 6, &[0.4, 0.4, 0.4, 0.4, 0.6, 0.6, 0.6, 0.6], &[]),
    row('P', 8, Factor::Gamma, 7, &[0.4, 0.4, 0.4, 0.4, 0.7, 0.7, 0.7, 0.7], &[]),
    row('P', 8, Factor::Gamma, 8, &[0.5, 0.5, 0.5, 0.5, 0.6, 0.6, 0.6, 0.6], &[]),
    row('P', 8, Factor::Gamma, 9, &[0.5, 0.5, 0.5, 0.5, 0.7, 0.7, 0.7, 0.7], &[]),
    row('P', 8, Factor::Gamma, 10, &[0.6, 0.6, 0.6, 0.6, 0.7, 0.7, 0.7, 0.7], &[]),
    row('P', 8, Factor::Gamma, 11, &[0.4, 0.4, 0.5, 0.5, 0.6, 0.6, 0.7, 0.7], &[]),
    row('P', 8, Factor::Pi, 1, &[0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], &[]),
    row('P', 8, Factor::Pi, 2, &[0.45, 0.45, 0.45, 0.45, 0.45, 0.45, 0.45, 0.45], &[]),
    row('P', 8, Factor::Pi, 3, &[0.5, 0.5, 0.5, 0.5, 0.45, 0.45, 0.45, 0.45], &[]),
    row('C', 2, Factor::N, 1, &[35.0, 40.0], &[15.0, 20.0]),
    row('C', 2, Factor::N, 2, &[60.0, 80.0], &[30.0, 40.0]),
    row('C', 2, Factor::N, 3, &[90.0, 100.0], &[80.0, 90.0]),
    row('C', 2, Factor::D, 1, &[0.0], &[]),
    row('C', 2, Factor::D, 2, &[0.1], &[]),
    row('C', 2, Factor::D, 3, &[0.15], &[]),
    row('C', 2, Factor::Gamma, 1, &[0.4, 0.5], &[]),
    row('C', 2, Factor::Gamma, 2, &[0.6, 0.7], &[]),
    row('C', 2, Factor::Pi, 1, &[0.45, 0.45], &[]),
    row('C', 2, Factor::Pi, 2, &[0.5, 0.5], &[]),
    row('C', 4, Factor::N, 1, &[35.0, 35.0, 40.0, 40.0], &[15.0, 15.0, 20.0, 20.0]),
    row('C', 4, Factor::N, 2, &[60.0, 60.0, 80.0, 80.0], &[30.0, 30.0, 40.0, 40.0]),
    row('C', 4, Factor::N, 3, &[90.0, 90.0, 100.0, 100.0], &[80.0, 80.0, 90.0, 90.0]),
    row('C', 4, Factor::D, 1, &[0.0], &[]),
    row('C', 4, Factor::D, 2, &[0.1], &[]),
    row('C', 4, Factor::D, 3, &[0.15], &[]),
    row('C', 4, Factor::Gamma, 1, &[0.4, 0.4, 0.5, 0.5], &[]),
    row('C', 4, Factor::Gamma, 2, &[0.4, 0.5, 0.6, 0.7], &[]),
    row('C', 4, Factor::Pi, 1, &[0.45, 0.45, 0.5, 0.5], &[]),
    row('C', 4, Factor::Pi, 2, &[0.45, 0.5, 0.45, 0.5], &[]),
    row('C', 6, Factor::N, 1, &[35.0, 35.0, 35.0, 40.0, 40.0, 40.0], &[25.0, 25.0, 25.0, 30.0, 30.0, 30.0]),
    row('C', 6, Factor::N, 2, &[40.0, 40.0, 60.0, 60.0, 80.0, 80.0], &[30.0, 30.0, 50.0, 50.0, 70.0, 70.0]),
    row('C', 6, Factor::N, 3, &[80.0, 80.0, 90.0, 90.0, 100.0, 100.0], &[70.0, 70.0, 80.0, 80.0, 90.0, 90.0]),
    row('C', 6, Factor::D, 1, &[0.0], &[]),
    row('C', 6, Factor::D, 2, &[0.1], &[]),
    row('C', 6, Factor::D, 3, &[0.15], &[]),
    row('C', 6, Factor::Gamma, 1, &[0.4, 0.4, 0.5, 0.5, 0.6, 0.6], &[]),
    row('C', 6, Factor::Gamma, 2, &[0.5, 0.5, 0.6, 0.6, 0.7, 0.7], &[]),
    row('C', 6, Factor::Pi, 1, &[0.45, 0.45, 0.5, 0.5, 0.45, 0.45], &[]),
    row('C', 6, Factor::Pi, 2, &[0.45, 0.5, 0.45, 0.5, 0.45, 0.5], &[]),
    row('C', 8, Factor::N, 1, &[35.0, 35.0, 35.0, 35.0, 40.0, 40.0, 40.0, 40.0], &[20.0, 20.0, 20.0, 20.0, 25.0, 25.0, 25.0, 25.0]),
    row('C', 8, Factor::N, 2, &[60.0, 60.0, 60.0, 60.0, 80.0, 80.0, 80.0, 80.0], &[50.0, 50.0, 50.0, 50.0, 40.0, 40.0, 40.0, 40.0]),
    row('C', 8, Factor::N, 3, &[90.0, 90.0, 90.0, 90.0, 100.0, 100.0, 100.0, 100.0], &[80.0, 80.0, 80.0, 80.0, 90.0, 90.0, 90.0, 90.0]),
    row('C', 8, Factor::D, 1, &[0.0], &[]),
    row('C', 8, Factor::D, 2, &[0.1], &[]),
    row('C', 8, Factor::D, 3, &[0.15], &[]),
    row('C', 8, Factor::Gamma, 1, &[0.4, 0.4, 0.5, 0.5, 0.6, 0.6, 0.7, 0.7], &[]),
    row('C', 8, Factor::Pi, 1, &[0.45, 0.45, 0.5, 0.5, 0.45, 0.45, 0.5, 0.5], &[]),
    row('C', 8, Factor::Pi, 2, &[0.45, 0.5, 0.45, 0.5, 0.45, 0.5, 0.45, 0.5], &[]),
];

/// One fully resolved preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetScenario {
    /// Canonical name, e.g. `C2 N1 d1 g1 p1`.
    pub name: String,
    pub config: SimConfig,
}

fn lookup(kind: char, strata: usize, factor: Factor) -> Vec<&'static Row> {
    ROWS.iter()
        .filter(|r| r.kind == kind && r.strata == strata && r.factor == factor)
        .collect()
}

fn parse_factor(token: &str) -> Option<(Factor, &str)> {
    for (prefix, f) in [
        ("gamma", Factor::Gamma),
        ("pi", Factor::Pi),
        ("N", Factor::N),
        ("n", Factor::N),
        ("d", Factor::D),
        ("g", Factor::Gamma),
        ("p", Factor::Pi),
    ] {
        if let Some(rest) = token.strip_prefix(prefix) {
            if !rest.is_empty() && (rest == "*" || rest.chars().all(|c| c.is_ascii_digit())) {
                return Some((f, rest));
            }
        }
    }
    None
}

/// Expands a preset expression into concrete simulation configs.
///
/// `sizes` gives `(n_s1, m_s1)` for type I and power presets and must be
/// `None` for coverage presets, whose sizes come from the `N` factor.
pub fn expand_preset(expr: &str, sizes: Option<(f64, f64)>) -> Result<Vec<PresetScenario>> {
    let bad = |msg: String| Error::config("preset", format!("`{expr}`: {msg}"));
    let mut tokens = expr.split_whitespace();
    let head = tokens.next().ok_or_else(|| bad("empty".into()))?;
    let mut chars = head.chars();
    let kind = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or(' ');
    let strata: usize = chars
        .as_str()
        .parse()
        .map_err(|_| bad(format!("bad head `{head}`, expected e.g. C2")))?;
    if !matches!(kind, 'T' | 'P' | 'C') {
        return Err(bad(format!("unknown kind `{kind}`, expected T, P or C")));
    }
    let needed: &[Factor] = if kind == 'C' {
        &[Factor::N, Factor::D, Factor::Gamma, Factor::Pi]
    } else {
        &[Factor::D, Factor::Gamma, Factor::Pi]
    };
    if lookup(kind, strata, Factor::D).is_empty() {
        return Err(bad(format!("no {kind} grid with {strata} strata")));
    }

    let mut chosen: Vec<Option<Vec<&'static Row>>> = vec![None; needed.len()];
    for token in tokens {
        let (factor, idx) =
            parse_factor(token).ok_or_else(|| bad(format!("bad factor `{token}`")))?;
        let slot = needed
            .iter()
            .position(|&f| f == factor)
            .ok_or_else(|| bad(format!("factor `{token}` does not apply to kind {kind}")))?;
        if chosen[slot].is_some() {
            return Err(bad(format!("factor `{}` given twice", factor.letter())));
        }
        let rows = lookup(kind, strata, factor);
        let picked = if idx == "*" {
            rows
        } else {
            let i: usize = idx
                .parse()
                .map_err(|_| bad(format!("bad index in `{token}`")))?;
            let r = rows
                .into_iter()
                .find(|r| r.index == i)
                .ok_or_else(|| bad(format!("no row `{token}`")))?;
            vec![r]
        };
        chosen[slot] = Some(picked);
    }
    let chosen: Vec<Vec<&'static Row>> = chosen
        .into_iter()
        .zip(needed)
        .map(|(c, f)| c.ok_or_else(|| bad(format!("missing factor `{}`", f.letter()))))
        .collect::<Result<_>>()?;

    match (kind, sizes) {
        ('C', Some(_)) => return Err(bad("coverage presets take sizes from the N factor".into())),
        ('T' | 'P', None) => return Err(bad("type I and power presets need n and m".into())),
        _ => {}
    }

    let mut out = Vec::new();
    let mut combo = vec![0usize; chosen.len()];
    loop {
        let rows: Vec<&Row> = combo.iter().zip(&chosen).map(|(&i, c)| c[i]).collect();
        out.push(build(kind, strata, &rows, sizes));
        // odometer over the factor choices, last factor fastest
        let mut k = combo.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            combo[k] += 1;
            if combo[k] < chosen[k].len() {
                break;
            }
            combo[k] = 0;
        }
    }
}

fn build(kind: char, strata: usize, rows: &[&Row], sizes: Option<(f64, f64)>) -> PresetScenario {
    let name = std::iter::once(format!("{kind}{strata}"))
        .chain(
            rows.iter()
                .map(|r| format!("{}{}", r.factor.letter(), r.index)),
        )
        .collect::<Vec<_>>()
        .join(" ");
    let get = |f: Factor| rows.iter().find(|r| r.factor == f).copied();
    let gamma = get(Factor::Gamma).map(|r| r.values).unwrap_or(&[]);
    let pi = get(Factor::Pi).map(|r| r.values).unwrap_or(&[]);
    let d = get(Factor::D).map(|r| r.values).unwrap_or(&[]);

    let size_list: Vec<StratumSizes> = match (get(Factor::N), sizes) {
        (Some(r), _) => r
            .values
            .iter()
            .zip(r.extra)
            .map(|(&n, &m)| StratumSizes::new(n, n, m, m))
            .collect(),
        (None, Some((n, m))) => vec![StratumSizes::new(n, n, m, m); strata],
        (None, None) => unreachable!("checked by caller"),
    };

    let (mode, truth) = match kind {
        'P' => (
            SimMode::Power,
            Truth::Full(FullParams::new(
                (0..strata)
                    .map(|s| StratumParams::new(pi[s], pi[s] - d[s], gamma[s]))
                    .collect(),
            )),
        ),
        _ => (
            if kind == 'T' {
                SimMode::Type1
            } else {
                SimMode::Coverage
            },
            Truth::Common(CommonDiffParams::new(
                d[0],
                (0..strata)
                    .map(|s| CommonStratumParams {
                        pi1: pi[s],
                        gamma: gamma[s],
                    })
                    .collect(),
            )),
        ),
    };
    let mut config = SimConfig::new(mode, size_list, truth);
    config.label = name.clone();
    PresetScenario { name, config }
}
