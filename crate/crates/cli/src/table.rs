//! Plain-text tables for standard output.

use qmetric::axioms::AxiomReport;
use qmetric::linalg::{CMatrix, C64};
use qmetric::lipschitz::MkDistance;
use qmetric::nogo::NogoReport;
use qmetric::search::SearchOutcome;

fn entry(z: C64) -> String {
    match (z.re, z.im) {
        (re, 0.0) => format!("{}", re + 0.0),
        (0.0, im) => format!("{im}i"),
        (re, im) => format!("{re}{im:+}i"),
    }
}

pub fn matrix(m: &CMatrix) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| entry(m[(r, c)])).collect()).collect();
    let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let padded: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
        out.push_str(&format!("  [ {} ]\n", padded.join("  ")));
    }
    out
}

pub fn report(r: &AxiomReport) -> String {
    let mut out = format!("mode {}  shape {}\n", r.mode, r.shape);
    out.push_str(&format!("  {:<8} {:<44} {:<6} {:>14}\n", "axiom", "condition", "result", "margin"));
    for rec in &r.axioms {
        let verdict = match (rec.passed, rec.indeterminate) {
            (true, _) => "pass",
            (false, true) => "n/a",
            (false, false) => "FAIL",
        };
        out.push_str(&format!(
            "  {:<8} {:<44} {:<6} {:>14.6e}\n",
            rec.axiom.tag(),
            rec.axiom.label(),
            verdict,
            rec.margin + 0.0
        ));
    }
    out.push_str(if r.passed { "all axioms hold\n" } else { "not a metric\n" });
    out
}

pub fn search(o: &SearchOutcome) -> String {
    let mut out = format!(
        "shape {}  mode {}  status {:?}  best residual {:.3e}  seed {}\n",
        o.config.shape, o.mode, o.status, o.best_residual, o.seed_used
    );
    for r in &o.restarts {
        out.push_str(&format!(
            "  restart {:>3}  seed {:>20}  iterations {:>6}  residual {:.3e}{}\n",
            r.index,
            r.seed,
            r.iterations,
            r.best_residual,
            if r.certified { "  certified" } else { "" }
        ));
    }
    if let Some(c) = &o.candidate {
        out.push_str(&report(&c.report));
    }
    out
}

pub fn distance(d: &MkDistance) -> String {
    let upper = match (d.unbounded, d.upper) {
        (true, _) => "unbounded".to_string(),
        (false, Some(u)) => format!("{u:.12}"),
        (false, None) => "unknown".to_string(),
    };
    format!(
        "lower {:.12}  upper {}  method {:?}  iterations {}  converged {}\n",
        d.lower, upper, d.method, d.iterations, d.converged
    )
}

pub fn nogo(reports: &[NogoReport]) -> String {
    let mut out = format!(
        "  {:>8} {:>10} {:>10} {:>8} {:>12} {:>12} {:>12}  failing\n",
        "lambda", "|ΔP_δ|", "|ΔM|", "layout", "identity", "witness", "min eig"
    );
    for r in reports {
        let failing: Vec<&str> = r.report.failing().iter().map(|a| a.tag()).collect();
        out.push_str(&format!(
            "  {:>8} {:>10.1e} {:>10.1e} {:>8} {:>12.1e} {:>12.6} {:>12.6}  {}\n",
            r.lambda,
            r.pdelta_deviation,
            r.defect_deviation,
            r.layout_matches,
            r.identity_max_error,
            r.witness_value,
            r.min_eigenvalue,
            failing.join(",")
        ));
    }
    out
}
