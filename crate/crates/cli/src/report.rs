//! Human tables and JSON-lines output.

use std::io::Write;

use riskdiff::estimation::{fit_constrained, fit_unconstrained, FitResult};
use riskdiff::inference::{
    chi2_quantile, lr_from_fits, score_from_fit, wald_from_fit, TestMethod, TestResult,
};
use riskdiff::intervals::{confidence_interval, CiMethod};
use riskdiff::model::{CommonDiffParams, FullParams};
use riskdiff::montecarlo::SimReport;
use serde_json::json;

use crate::{Failure, Format, Loaded};

/// Renders rows with the first column left-aligned and the rest right-aligned.
fn render(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i == 0 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for r in rows {
        writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn jl(out: &mut dyn Write, v: serde_json::Value) -> std::io::Result<()> {
    writeln!(out, "{v}")
}

fn smoothing_note(out: &mut dyn Write, loaded: &Loaded) -> std::io::Result<()> {
    if let Some(eps) = loaded.smoothed {
        writeln!(out, "note: zero cells present; added {eps} to every cell")?;
    }
    Ok(())
}

fn mle_tables(
    out: &mut dyn Write,
    loaded: &Loaded,
    ha: &FitResult<FullParams>,
    h0: &FitResult<CommonDiffParams>,
    format: Format,
) -> std::io::Result<()> {
    let full0 = h0.params.to_full();
    match format {
        Format::Table => {
            writeln!(out)?;
            writeln!(out, "Unconstrained MLE")?;
            let rows: Vec<Vec<String>> = loaded
                .labels
                .iter()
                .zip(&ha.params.strata)
                .map(|(l, p)| {
                    vec![
                        l.clone(),
                        f4(p.pi1),
                        f4(p.pi2),
                        f4(p.gamma),
                        f4(p.risk_difference()),
                    ]
                })
                .collect();
            render(out, &["stratum", "pi1", "pi2", "gamma", "d"], &rows)?;
            writeln!(out)?;
            writeln!(out, "Constrained MLE (common d = {})", f4(h0.params.d))?;
            let rows: Vec<Vec<String>> = loaded
                .labels
                .iter()
                .zip(&full0.strata)
                .map(|(l, p)| vec![l.clone(), f4(p.pi1), f4(p.pi2), f4(p.gamma)])
                .collect();
            render(out, &["stratum", "pi1", "pi2", "gamma"], &rows)?;
            if ha.boundary || h0.boundary {
                writeln!(out, "note: an estimate lies on the parameter boundary")?;
            }
        }
        Format::JsonLines => {
            for (l, p) in loaded.labels.iter().zip(&ha.params.strata) {
                jl(
                    out,
                    json!({"record": "mle", "fit": "unconstrained", "stratum": l,
                    "pi1": p.pi1, "pi2": p.pi2, "gamma": p.gamma, "d": p.risk_difference(),
                    "boundary": ha.boundary}),
                )?;
            }
            for (l, p) in loaded.labels.iter().zip(&full0.strata) {
                jl(
                    out,
                    json!({"record": "mle", "fit": "constrained", "stratum": l,
                    "pi1": p.pi1, "pi2": p.pi2, "gamma": p.gamma, "d": h0.params.d,
                    "boundary": h0.boundary}),
                )?;
            }
        }
    }
    Ok(())
}

pub fn tests(
    out: &mut dyn Write,
    loaded: &Loaded,
    methods: &[TestMethod],
    alpha: f64,
    format: Format,
) -> Result<(), Failure> {
    let data = &loaded.data;
    data.require_tests()?;
    let ha = fit_unconstrained(data).require_converged("unconstrained")?;
    let h0 = fit_constrained(data).require_converged("constrained")?;
    let results: Vec<(TestMethod, TestResult)> = methods
        .iter()
        .map(|&m| {
            let r = match m {
                TestMethod::LikelihoodRatio => lr_from_fits(data, h0.clone(), ha.clone()),
                TestMethod::Score => score_from_fit(data, h0.clone()),
                TestMethod::Wald => wald_from_fit(data, ha.clone()),
            };
            r.map(|r| (m, r))
        })
        .collect::<Result<_, _>>()?;
    let df = data.num_strata() - 1;
    match format {
        Format::Table => {
            smoothing_note(out, loaded)?;
            writeln!(
                out,
                "Homogeneity of risk differences: S = {}, df = {df}, alpha = {alpha}, critical value = {}",
                data.num_strata(),
                f4(chi2_quantile(1.0 - alpha, df as u32))
            )?;
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|(m, r)| {
                    vec![
                        m.label().to_string(),
                        f4(r.statistic),
                        r.df.to_string(),
                        f4(r.p_value),
                        if r.rejects(alpha) { "yes" } else { "no" }.to_string(),
                    ]
                })
                .collect();
            render(
                out,
                &["method", "statistic", "df", "p-value", "reject"],
                &rows,
            )?;
            for (m, r) in &results {
                if r.flags.regularized || r.flags.dense_fallback {
                    writeln!(
                        out,
                        "note: {m} used a regularized or dense information inverse"
                    )?;
                }
            }
        }
        Format::JsonLines => {
            jl(
                out,
                json!({"record": "input", "strata": loaded.labels, "smoothing": loaded.smoothed, "alpha": alpha}),
            )?;
            for (m, r) in &results {
                jl(
                    out,
                    json!({"record": "test", "method": m.label(), "statistic": r.statistic,
                    "df": r.df, "p_value": r.p_value, "reject": r.rejects(alpha), "flags": r.flags}),
                )?;
            }
        }
    }
    mle_tables(out, loaded, &ha, &h0, format)?;
    Ok(())
}

pub fn intervals(
    out: &mut dyn Write,
    loaded: &Loaded,
    methods: &[CiMethod],
    alpha: f64,
    format: Format,
) -> Result<(), Failure> {
    let results = methods
        .iter()
        .map(|&m| confidence_interval(&loaded.data, m, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        Format::Table => {
            smoothing_note(out, loaded)?;
            writeln!(
                out,
                "Confidence intervals for the common risk difference: S = {}, level = {}%",
                loaded.data.num_strata(),
                100.0 * (1.0 - alpha)
            )?;
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|c| {
                    vec![
                        c.method.label().to_string(),
                        f4(c.center_estimate),
                        f4(c.lower),
                        f4(c.upper),
                        f4(c.width),
                    ]
                })
                .collect();
            render(
                out,
                &["method", "estimate", "lower", "upper", "width"],
                &rows,
            )?;
            for c in results.iter().filter(|c| c.flagged) {
                writeln!(
                    out,
                    "note: {} hit a boundary or regularized information",
                    c.method
                )?;
            }
        }
        Format::JsonLines => {
            jl(
                out,
                json!({"record": "input", "strata": loaded.labels, "smoothing": loaded.smoothed, "alpha": alpha}),
            )?;
            for c in &results {
                jl(
                    out,
                    json!({"record": "interval", "method": c.method.label(), "estimate": c.center_estimate,
                    "lower": c.lower, "upper": c.upper, "width": c.width, "flagged": c.flagged}),
                )?;
            }
        }
    }
    Ok(())
}

pub fn simulation(out: &mut dyn Write, report: &SimReport, format: Format) -> Result<(), Failure> {
    let r = &report.reproducibility;
    match format {
        Format::Table => {
            writeln!(
                out,
                "seed = {}, replicates = {}, version = {}",
                r.seed, r.replicates, r.version
            )?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.scenario.clone(),
                        row.mode.to_string(),
                        row.method.clone(),
                        row.replicates.to_string(),
                        row.degenerate.to_string(),
                        f4(row.rate),
                        row.mean_length.map(f4).unwrap_or_default(),
                    ]
                })
                .collect();
            render(
                out,
                &[
                    "scenario",
                    "mode",
                    "method",
                    "replicates",
                    "degenerate",
                    "rate",
                    "mean_length",
                ],
                &rows,
            )?;
        }
        Format::JsonLines => {
            jl(
                out,
                json!({"record": "reproducibility", "seed": r.seed, "replicates": r.replicates, "version": r.version}),
            )?;
            for row in &report.rows {
                let mut v = serde_json::to_value(row).expect("row serializes");
                v["record"] = json!("result");
                jl(out, v)?;
            }
        }
    }
    Ok(())
}
