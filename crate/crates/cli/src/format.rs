//! CSV rows and text reports. CSV numbers carry 9 significant digits in plain
//! decimal notation; lines end with a single `\n`.

use std::fmt::Write as _;

use cqc_core::harness::{SampleRecord, SearchSummary, WernerSweepRecord};
use cqc_core::CqcReport;

pub const SEARCH_HEADER: &str = "dim_a,dim_b,index,cqc_sum,qmi,gap";
pub const SCATTER_HEADER: &str = "n,family,lambda,epsilon,cqc_sum,qmi";
pub const WERNER_HEADER: &str = "eta,qmi,cqc_sum,berta_bound,residual_a";
pub const BOUNDS_HEADER: &str = "dim_a,dim_b,mi_qq,mi_rr,cqc_sum,qmi,gap,residual_a,residual_b,berta_bound_a,berta_bound_b,eve_bound,eve_bound_tight,key_rate_lower,entanglement_witness,entanglement_margin,steering_witness,steering_margin";

/// Plain decimal with 9 significant digits. Zero (either sign) prints as `0`.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // Let the exponent come from the rounded value so 0.9999999996 → 1.00000000.
    let sci = format!("{v:.8e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific formatting always has an exponent");
    let decimals = (8 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn search_row(r: &SampleRecord) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        r.dim_a,
        r.dim_b,
        r.index,
        sig9(r.mi_sum),
        sig9(r.qmi),
        sig9(r.gap)
    )
}

pub fn scatter_row(r: &SampleRecord) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        r.dim_a,
        r.family.tag(),
        sig9(r.lambda.unwrap_or(f64::NAN)),
        sig9(r.epsilon.unwrap_or(f64::NAN)),
        sig9(r.mi_sum),
        sig9(r.qmi)
    )
}

pub fn werner_csv(rows: &[WernerSweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(WERNER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sig9(r.eta),
            sig9(r.qmi),
            sig9(r.cqc_sum),
            sig9(r.berta_bound),
            sig9(r.residual_a)
        );
    }
    out
}

fn six(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Labelled key-value rendering of a report, one field per line.
pub fn bounds_text(r: &CqcReport, bases_label: &str) -> String {
    let ew = r.entanglement_witness;
    let sw = r.steering_witness;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k:<22}{v}");
    };
    kv("dims", format!("{}x{}", r.dim_a, r.dim_b));
    kv("bases", bases_label.to_string());
    kv("mi_qq", six(r.mi_qq));
    kv("mi_rr", six(r.mi_rr));
    kv("cqc_sum", six(r.mi_sum));
    kv("qmi", six(r.qmi));
    kv("gap", six(r.gap));
    kv("s_a", six(r.entropies.a));
    kv("s_b", six(r.entropies.b));
    kv("s_ab", six(r.entropies.joint));
    kv("residual_a", six(r.residual_a));
    kv("residual_b", six(r.residual_b));
    kv("berta_bound_a", six(r.berta_bound_a));
    kv("berta_bound_b", six(r.berta_bound_b));
    kv("eve_bound", six(r.eve_bound));
    kv("eve_bound_tight", six(r.eve_bound_tight));
    kv("key_rate_lower", six(r.key_rate_lower));
    kv(
        "entanglement_witness",
        format!("{} (margin {}, side {})", ew.fired, six(ew.margin), ew.side),
    );
    kv(
        "steering_witness",
        format!("{} (margin {})", sw.fired, six(sw.margin)),
    );
    kv("counterexample", r.is_counterexample().to_string());
    out.push_str("note: witnesses and key rate are conditional on the CQC conjecture\n");
    out
}

pub fn bounds_csv(r: &CqcReport) -> String {
    let ew = r.entanglement_witness;
    let sw = r.steering_witness;
    let fields = [
        r.dim_a.to_string(),
        r.dim_b.to_string(),
        sig9(r.mi_qq),
        sig9(r.mi_rr),
        sig9(r.mi_sum),
        sig9(r.qmi),
        sig9(r.gap),
        sig9(r.residual_a),
        sig9(r.residual_b),
        sig9(r.berta_bound_a),
        sig9(r.berta_bound_b),
        sig9(r.eve_bound),
        sig9(r.eve_bound_tight),
        sig9(r.key_rate_lower),
        ew.fired.to_string(),
        sig9(ew.margin),
        sw.fired.to_string(),
        sig9(sw.margin),
    ];
    format!("{BOUNDS_HEADER}\n{}\n", fields.join(","))
}

/// Summary block in a fixed field order.
pub fn summary_text(s: &SearchSummary, bases_label: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[summary]");
    let _ = writeln!(out, "mode = {}", s.mode.name());
    let _ = writeln!(out, "master_seed = {}", s.master_seed);
    let _ = writeln!(out, "bases = {bases_label}");
    let _ = writeln!(
        out,
        "violation_threshold = {:e}",
        s.mode.violation_threshold()
    );
    let _ = writeln!(out, "witnesses = conditional on the CQC conjecture");
    for d in &s.per_dim {
        let _ = writeln!(out, "[dim {}x{}]", d.dim_a, d.dim_b);
        let _ = writeln!(out, "samples = {}", d.samples);
        let _ = writeln!(out, "min_gap = {:e}", d.min_gap);
        let _ = writeln!(out, "max_qmi = {}", sig9(d.max_qmi));
        let _ = writeln!(out, "counterexamples = {}", d.counterexamples);
        let _ = writeln!(out, "noise_negatives = {}", d.noise_negatives);
        let _ = writeln!(out, "mean_residual_a = {}", sig9(d.mean_residual_a));
        let _ = writeln!(out, "min_residual_a = {:e}", d.min_residual_a);
        let _ = writeln!(out, "min_residual_b = {:e}", d.min_residual_b);
        let _ = writeln!(out, "witness_positive = {}", d.witness_positive);
        let _ = writeln!(out, "witness_unconfirmed = {}", d.witness_unconfirmed);
    }
    let _ = writeln!(out, "[total]");
    let _ = writeln!(out, "samples = {}", s.samples());
    let _ = writeln!(out, "counterexamples = {}", s.counterexamples());
    let _ = writeln!(out, "wall_clock_seconds = {:.3}", s.wall_clock_secs);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(0.9128711136008072), "0.912871114");
        assert_eq!(sig9(1.0066072709896374), "1.00660727");
        assert_eq!(sig9(2.0), "2.00000000");
        assert_eq!(sig9(0.99999999996), "1.00000000");
        assert_eq!(sig9(-3.5e-8), "-0.0000000350000000");
        assert_eq!(sig9(123.456), "123.456000");
    }

    #[test]
    fn negative_zero_prints_unsigned_in_text() {
        assert_eq!(six(-1e-12), "0.000000");
    }
}
