//! Fixed-layout CSV writers. Numbers carry nine significant digits and rows end in `\n`.

use std::fmt::Write as _;

use super::batch::RunSummary;
use crate::policies::{DPTable, OracleSolution};
use crate::thresholds::ThresholdSchedule;

pub const SIMULATE_HEADER: &str = "policy,L,mean_utility,stderr,mean_tau,regret";
pub const REGRET_HEADER: &str = "policy,L,mean_utility,genie,regret,paired_regret,paired_stderr,regret_over_ln_l";
pub const THRESHOLDS_HEADER: &str = "resource_id,k,lower,upper,center";
pub const ORACLE_HEADER: &str = "resource_id,k,omega,oracle_value,dp_value";

/// Formats `x` with nine significant digits, without exponent for moderate magnitudes.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

pub fn simulate_csv(rows: &[RunSummary]) -> String {
    let mut out = format!("{SIMULATE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.policy,
            r.horizon,
            fmt_sig(r.mean_utility),
            fmt_sig(r.stderr),
            fmt_sig(r.mean_tau),
            fmt_sig(r.regret)
        );
    }
    out
}

pub fn regret_csv(rows: &[RunSummary]) -> String {
    let mut out = format!("{REGRET_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.policy,
            r.horizon,
            fmt_sig(r.mean_utility),
            fmt_sig(r.genie),
            fmt_sig(r.regret),
            fmt_sig(r.paired_regret),
            fmt_sig(r.paired_stderr),
            fmt_sig(r.regret_over_ln_l)
        );
    }
    out
}

pub fn thresholds_csv(schedules: &[ThresholdSchedule]) -> String {
    let mut out = format!("{THRESHOLDS_HEADER}\n");
    for s in schedules {
        for k in 0..s.horizon() {
            let (lo, hi) = s.band(k);
            let _ = writeln!(out, "{},{},{},{},{}", s.resource, k, fmt_sig(lo), fmt_sig(hi), fmt_sig(s.center));
        }
    }
    out
}

/// Per-resource oracle values beside the fine-grid DP at every coarse node.
pub fn oracle_csv(solution: &OracleSolution, tables: &[DPTable]) -> String {
    let mut out = format!("{ORACLE_HEADER}\n");
    let last = (solution.grid - 1) as f64;
    for ((spec, single), table) in solution.specs.iter().zip(&solution.singles).zip(tables) {
        for (k, row) in single.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let w = j as f64 / last;
                let _ = writeln!(out, "{},{},{},{},{}", spec.id, k, fmt_sig(w), fmt_sig(*v), fmt_sig(table.value(w, k)));
            }
        }
    }
    out
}
