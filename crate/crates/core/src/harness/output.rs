//! Row tables, aggregates and the CSV/JSON writers.

use std::fmt::{self, Write as _};
use std::io;
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;

/// One CSV field. Floats print as `{:.16e}` (17 significant digits).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(x) => write!(f, "{x}"),
            Cell::Float(x) => write!(f, "{x:.16e}"),
            Cell::Bool(b) => f.write_str(if *b { "1" } else { "0" }),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

/// Per-sweep-point summary of trial rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    /// index into the sweep, matching the `point` CSV column
    pub point: usize,
    pub label: String,
    pub trials: u64,
    pub mean_fidelity: f64,
    /// 1.96·s/√trials with the n−1 sample deviation
    pub ci95_half_width: f64,
    pub success_rate: f64,
    pub accepted_rate: f64,
    /// `None` when no trial was accepted
    pub mean_fidelity_accepted: Option<f64>,
}

/// Mean and 95% half-width, normal approximation.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

/// Folds trial rows (fidelity, success, accepted) into an [`Aggregate`].
pub fn aggregate(point: usize, label: String, fidelity: &[f64], success: &[bool], accepted: &[bool]) -> Aggregate {
    let n = fidelity.len();
    let (mean_fidelity, ci) = mean_ci95(fidelity);
    let acc: Vec<f64> = fidelity.iter().zip(accepted).filter(|(_, a)| **a).map(|(f, _)| *f).collect();
    let rate = |v: &[bool]| v.iter().filter(|b| **b).count() as f64 / n as f64;
    Aggregate {
        point,
        label,
        trials: n as u64,
        mean_fidelity,
        ci95_half_width: ci,
        success_rate: rate(success),
        accepted_rate: rate(accepted),
        mean_fidelity_accepted: (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: RunConfig,
    pub code_version: &'static str,
    pub master_seed: u64,
    pub rng: &'static str,
}

pub const RNG_SCHEME: &str = "ChaCha8Rng::seed_from_u64(master_seed), stream = trial index";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub header: Vec<&'static str>,
    #[serde(skip)]
    pub rows: Vec<Vec<Cell>>,
    pub aggregates: Vec<Aggregate>,
    pub provenance: Provenance,
}

impl RunResult {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{c}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    /// Aggregates plus config echo; rows live in the CSV.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run results serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, csv: Option<&Path>, json: Option<&Path>) -> io::Result<()> {
        if let Some(p) = csv {
            std::fs::write(p, self.to_csv())?;
        }
        if let Some(p) = json {
            std::fs::write(p, self.to_json())?;
        }
        Ok(())
    }

    /// One line for the terminal.
    pub fn summary(&self) -> String {
        let kind = self.provenance.config.kind;
        match self.aggregates.as_slice() {
            [] => format!("{kind}: {} rows", self.rows.len()),
            [a] => format!(
                "{kind}: {} trials, mean fidelity {:.6} ± {:.6}, success rate {:.4}",
                a.trials, a.mean_fidelity, a.ci95_half_width, a.success_rate
            ),
            many => {
                let worst = many.iter().map(|a| a.mean_fidelity).fold(f64::INFINITY, f64::min);
                format!("{kind}: {} points, {} rows, lowest mean fidelity {worst:.6}", many.len(), self.rows.len())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_example() {
        let (m, h) = mean_ci95(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(m, 0.5);
        // s = √(1/3), n = 4
        assert!((h - 1.96 * (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_ci95(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn float_cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.996_5, 1e-300, 6.02e23] {
            let s = Cell::Float(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(Cell::Bool(true).to_string(), "1");
    }
}
