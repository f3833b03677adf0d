//! Discrepancy filtering and performance-profile curves.

use super::{ProfileRow, ProfileTable};
use std::collections::BTreeMap;

/// One algorithm's profile curve: for each time ratio tau, the fraction of
/// (problem, draw) cells it solved within tau times the fastest time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub algorithm: String,
    pub points: Vec<(f64, f64)>,
}

fn group_key(r: &ProfileRow) -> (String, u32) {
    (r.problem.clone(), r.draw)
}

/// Drops every (problem, draw) cell whose final objectives disagree by at
/// least `tol` across algorithms (non-converged runs included). Returns the
/// kept table and the fraction of cells rejected.
pub fn discrepancy_filter(table: &ProfileTable, tol: f64) -> (ProfileTable, f64) {
    let mut groups: BTreeMap<(String, u32), Vec<&ProfileRow>> = BTreeMap::new();
    for r in &table.rows {
        groups.entry(group_key(r)).or_default().push(r);
    }
    let total = groups.len();
    let mut kept = Vec::new();
    let mut rejected = 0usize;
    for rows in groups.values() {
        let objectives: Vec<f64> = rows.iter().filter_map(|r| r.final_objective).collect();
        let keep = if objectives.len() < 2 {
            true
        } else {
            let min = objectives.iter().cloned().fold(f64::INFINITY, f64::min);
            objectives.iter().all(|f| (f - min).abs() < tol)
        };
        if keep {
            kept.extend(rows.iter().map(|r| (*r).clone()));
        } else {
            rejected += 1;
        }
    }
    let mut out = ProfileTable { rows: kept };
    out.sort();
    let rate = if total == 0 {
        0.0
    } else {
        rejected as f64 / total as f64
    };
    (out, rate)
}

/// 64 log-spaced ratios from 1 to `tau_max`.
pub fn default_tau_grid(tau_max: f64) -> Vec<f64> {
    assert!(tau_max > 1.0);
    let n = 64;
    (0..n)
        .map(|i| 10f64.powf(tau_max.log10() * i as f64 / (n - 1) as f64))
        .collect()
}

/// Computes one curve per algorithm over the tau grid.
///
/// A cell contributes to algorithm `a` at ratio tau when `a` converged and
/// its time is within tau times the fastest converged time in that cell;
/// non-converged runs never qualify at any ratio. Cells with no converged
/// run at all are skipped.
pub fn performance_profile(table: &ProfileTable, tau_grid: &[f64]) -> Vec<ProfileCurve> {
    let mut algorithms: Vec<String> = table.rows.iter().map(|r| r.algorithm.clone()).collect();
    algorithms.sort();
    algorithms.dedup();

    let mut groups: BTreeMap<(String, u32), Vec<&ProfileRow>> = BTreeMap::new();
    for r in &table.rows {
        groups.entry(group_key(r)).or_default().push(r);
    }
    // (algorithm -> time ratio) per cell; None when not converged.
    let mut ratios: Vec<BTreeMap<&str, Option<f64>>> = Vec::new();
    for rows in groups.values() {
        let best = rows
            .iter()
            .filter(|r| r.converged)
            .filter_map(|r| r.time_ms)
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            continue;
        }
        let mut cell = BTreeMap::new();
        for r in rows {
            let ratio = match (r.converged, r.time_ms) {
                (true, Some(t)) => Some(t / best),
                _ => None,
            };
            cell.insert(r.algorithm.as_str(), ratio);
        }
        ratios.push(cell);
    }
    let denom = ratios.len().max(1) as f64;

    algorithms
        .iter()
        .map(|alg| {
            let points = tau_grid
                .iter()
                .map(|&tau| {
                    let hits = ratios
                        .iter()
                        .filter(|cell| {
                            matches!(cell.get(alg.as_str()), Some(Some(r)) if *r <= tau)
                        })
                        .count();
                    (tau, hits as f64 / denom)
                })
                .collect();
            ProfileCurve {
                algorithm: alg.clone(),
                points,
            }
        })
        .collect()
}
