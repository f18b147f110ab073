#![no_main]

use libfuzzer_sys::fuzz_target;
use riskdiff::montecarlo::{ScenarioSpec, SimPlan};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(plan) = SimPlan::from_json(text) else {
        return;
    };
    // Expansion draws random parameter sets; skip plans that ask for many.
    let random: usize = plan
        .scenarios
        .iter()
        .map(|s| match s {
            ScenarioSpec::Random(r) => r.count.saturating_mul(r.strata.max(1)),
            _ => 0,
        })
        .sum();
    if random <= 256 {
        let _ = plan.expand();
    }
});
