//! Tab-separated report tables.

use std::fmt::Write as _;

use opcalc::bench::{BlowupReport, CrossValidationSummary, PerturbReport};
use opcalc::doi::FunctionalCalculusResult;
use opcalc::linalg::{operator_norm, schatten_1};

use crate::files::format_number;

pub const PERTURB_HEADER: &str = "seed\tn\trank\tdelta_a_s1\tdelta_b_s1\tdelta_f_s1\tbesov\tratio\ta_step_s1\tb_step_s1\tsplit_residual";

pub const BLOWUP_HEADER: &str =
    "n\twitness_ratio\tlipschitz_ratio\tratio_per_log\tsup_norm\tperturbation\tdifference";

pub fn perturb_table(report: &PerturbReport) -> String {
    let mut out = String::from(PERTURB_HEADER);
    out.push('\n');
    for t in &report.trials {
        let m = &t.measures;
        let numbers = [
            m.delta_a,
            m.delta_b,
            m.delta_f,
            t.besov,
            t.ratio,
            m.a_step,
            m.b_step,
            m.split_residual,
        ]
        .map(format_number)
        .join("\t");
        let _ = writeln!(out, "{}\t{}\t{}\t{numbers}", t.seed, t.n, t.rank);
    }
    let c = &report.config;
    let _ = writeln!(
        out,
        "summary\ttrials={}\tn={}\tdegree={}\tepsilon={}\tseed={}",
        report.trials.len(),
        c.n,
        c.degree,
        format_number(c.epsilon),
        c.seed
    );
    let _ = writeln!(
        out,
        "summary\tmax_ratio\t{}\tempirical maximum, not a certified constant",
        format_number(report.max_ratio())
    );
    let _ = writeln!(
        out,
        "summary\tmax_split_residual\t{}",
        format_number(report.max_split_residual())
    );
    out
}

pub fn blowup_table(report: &BlowupReport) -> String {
    let mut out = String::from(BLOWUP_HEADER);
    out.push('\n');
    for r in &report.rows {
        let numbers = [
            r.witness_ratio,
            r.lipschitz_ratio,
            r.ratio_per_log,
            r.sup_norm,
            r.perturbation,
            r.difference,
        ]
        .map(format_number)
        .join("\t");
        let _ = writeln!(out, "{}\t{numbers}", r.n);
    }
    let held = if report.growth_contract_held() {
        "held"
    } else {
        "violated"
    };
    let _ = writeln!(out, "summary\tgrowth_contract\t{held}");
    let _ = writeln!(out, "summary\tmonotone\t{}", report.monotone());
    out
}

/// Norms and spectra accompanying a `funcalc` result.
pub fn funcalc_sidecar(result: &FunctionalCalculusResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dimension\t{}", result.value.rows());
    let _ = writeln!(
        out,
        "operator_norm\t{}",
        format_number(operator_norm(&result.value))
    );
    let _ = writeln!(
        out,
        "trace_norm\t{}",
        format_number(schatten_1(&result.value))
    );
    let _ = writeln!(
        out,
        "frobenius_norm\t{}",
        format_number(result.value.frobenius_norm())
    );
    for (label, values) in [
        ("eigenvalues_a", &result.eigenvalues_a),
        ("eigenvalues_b", &result.eigenvalues_b),
    ] {
        let joined: Vec<String> = values.iter().map(|&x| format_number(x)).collect();
        let _ = writeln!(out, "{label}\t{}", joined.join("\t"));
    }
    out
}

pub fn verify_lines(summary: &CrossValidationSummary) -> String {
    let mut out = String::new();
    for c in &summary.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = write!(
            out,
            "{status}\t{}\tseed={}\tresidual={}\ttolerance={}",
            c.name,
            c.seed,
            format_number(c.residual),
            format_number(c.tolerance)
        );
        if let Some(e) = &c.error {
            let _ = write!(out, "\terror={e}");
        }
        out.push('\n');
    }
    out
}
