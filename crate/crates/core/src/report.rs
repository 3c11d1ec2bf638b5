//! Aligned plain-text tables for repetition, sweep and comparison results.

use std::fmt::Write as _;

use crate::experiment::{ComparisonReport, RepetitionRow, RepetitionSummary, SweepRow};

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let mut parts = Vec::with_capacity(cells.len());
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                parts.push(format!("{cell:<w$}"));
            } else {
                parts.push(format!("{cell:>w$}"));
            }
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut out, &rule);
    for row in rows {
        line(&mut out, row);
    }
    out
}

fn num(v: f64) -> String {
    format!("{v:.5}")
}

/// Rows labeled `H/rep`, then minimum, maximum and average.
pub fn repetitions_text(
    hidden: usize,
    rows: &[RepetitionRow],
    summary: &RepetitionSummary,
    best_index: usize,
) -> String {
    let mut body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{hidden}/{}", r.repetition),
                num(r.validation),
                num(r.training),
                num(r.testing),
            ]
        })
        .collect();
    for (label, s) in [
        ("Minimum value", &summary.minimum),
        ("Maximum value", &summary.maximum),
        ("Average", &summary.average),
    ] {
        body.push(vec![label.into(), num(s.validation), num(s.training), num(s.testing)]);
    }
    let mut out = String::from("MLP repetitions (performance = MSE, degC^2)\n");
    out.push_str(&table(
        &["Hidden/repetition", "Validation", "Training", "Testing"],
        &body,
    ));
    let _ = writeln!(out, "Selected repetition: {hidden}/{best_index}");
    out
}

pub fn sweep_text(rows: &[SweepRow], selected: usize) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.neurons.to_string(),
                num(r.rmse),
                num(r.r_paper),
                num(r.mae),
                num(r.r_pearson),
            ]
        })
        .collect();
    let mut out = String::from("RBF hidden-neuron sweep (test partition, degC)\n");
    out.push_str(&table(&["Neurons", "RMSE", "R", "MAE", "R (Pearson)"], &body));
    let _ = writeln!(out, "Selected neurons: {selected}");
    out
}

pub fn comparison_text(report: &ComparisonReport) -> String {
    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.model.to_string(),
                num(r.mae),
                num(r.rmse),
                num(r.r_paper),
                num(r.r_pearson),
            ]
        })
        .collect();
    let mut out = format!("Model comparison (test partition, n = {}, degC)\n", report.n);
    out.push_str(&table(&["Network type", "MAE", "RMSE", "R", "R (Pearson)"], &body));
    let _ = writeln!(out, "Winner: {}", report.winner);
    out
}
