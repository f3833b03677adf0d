//! CSV and JSON serialization for benchmark tables and profile curves.
//!
//! Floats are written with 17 significant digits so a parse reproduces the
//! table bit for bit; the non-converged time sentinel serializes as an
//! empty CSV field (null in JSON). Row order is the deterministic
//! (problem, draw, algorithm) sort.

use super::{ProfileCurve, ProfileRow, ProfileTable};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const TABLE_HEADER: &str =
    "problem,draw,algorithm,time_ms,maps,grad_evals,obj_evals,converged,final_objective";
pub const CURVES_HEADER: &str = "algorithm,tau,fraction";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// 17-significant-digit float format; round-trips every finite f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn emit_table_csv(table: &ProfileTable, path: &Path) -> Result<(), IoError> {
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.problem,
            r.draw,
            r.algorithm,
            opt_f64(r.time_ms),
            r.maps,
            r.grad_evals,
            r.obj_evals,
            r.converged,
            opt_f64(r.final_objective),
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn emit_table_json(table: &ProfileTable, path: &Path) -> Result<(), IoError> {
    let body = serde_json::to_vec_pretty(&table.rows).expect("rows serialize");
    write_atomic(path, &body)
}

pub fn emit_curves_csv(curves: &[ProfileCurve], path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(CURVES_HEADER);
    out.push('\n');
    for c in curves {
        for &(tau, fraction) in &c.points {
            out.push_str(&format!(
                "{},{},{}\n",
                c.algorithm,
                fmt_f64(tau),
                fmt_f64(fraction)
            ));
        }
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

pub fn read_to_string_err(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Parses a table written by [`emit_table_csv`].
pub fn parse_table_csv(path: &Path) -> Result<ProfileTable, IoError> {
    let text = read_to_string_err(path)?;
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TABLE_HEADER => {}
        Some((_, other)) => {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: 1,
                message: format!("unexpected header '{other}'"),
            })
        }
        None => {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let fail = |message: String| IoError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            message,
        };
        if parts.len() != 9 {
            return Err(fail(format!("expected 9 fields, got {}", parts.len())));
        }
        let parse_opt = |s: &str| -> Result<Option<f64>, std::num::ParseFloatError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some)
            }
        };
        rows.push(ProfileRow {
            problem: parts[0].to_string(),
            draw: parts[1].parse().map_err(|e| fail(format!("draw: {e}")))?,
            algorithm: parts[2].to_string(),
            time_ms: parse_opt(parts[3]).map_err(|e| fail(format!("time_ms: {e}")))?,
            maps: parts[4].parse().map_err(|e| fail(format!("maps: {e}")))?,
            grad_evals: parts[5]
                .parse()
                .map_err(|e| fail(format!("grad_evals: {e}")))?,
            obj_evals: parts[6]
                .parse()
                .map_err(|e| fail(format!("obj_evals: {e}")))?,
            converged: parts[7]
                .parse()
                .map_err(|e| fail(format!("converged: {e}")))?,
            final_objective: parse_opt(parts[8])
                .map_err(|e| fail(format!("final_objective: {e}")))?,
        });
    }
    Ok(ProfileTable { rows })
}
