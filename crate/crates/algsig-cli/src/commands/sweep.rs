//! Error ladders over `n` and fitted convergence rates.

use algsig::activation::SigmoidParams;
use algsig::rate::{error_ladder, predicted_exponent, rate_estimate, regime, RateReport};
use serde::Serialize;

use super::Outcome;
use crate::config::{NamedFunction, SweepConfig};
use crate::error::{CliError, Result, Status};
use crate::output::{Artifact, Cell, Table};

#[derive(Debug, Serialize)]
struct SweepEntry {
    function: String,
    m: u32,
    beta: f64,
    /// `None` when no slope could be fitted; see `note`.
    report: Option<RateReport>,
    series: Vec<(u64, f64)>,
    note: Option<String>,
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Outcome> {
    if cfg.n.len() < 3 {
        return Err(CliError::Config(format!("sweep needs at least 3 values of n, got {}", cfg.n.len())));
    }
    let mut ladder = cfg.n.clone();
    ladder.sort_unstable();
    ladder.dedup();
    let cells: Vec<(&NamedFunction, u32)> =
        cfg.functions.iter().flat_map(|f| cfg.m.iter().map(move |&m| (f, m))).collect();
    let series = cfg.run_cells(&cells, |&(f, m)| -> Result<Vec<(u64, f64)>> {
        Ok(error_ladder(&f.f, &cfg.interval, &ladder, SigmoidParams::new(m)?, cfg.grid)?)
    })?;

    let mut entries = Vec::new();
    for (&(f, m), s) in cells.iter().zip(series) {
        let s = s?;
        for &beta in &cfg.beta {
            let (report, note) = match rate_estimate(&s, beta, m) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            entries.push(SweepEntry { function: f.spec.clone(), m, beta, report, series: s.clone(), note });
        }
    }

    let mut table =
        Table::new(["function", "m", "beta", "n", "error", "slope", "predicted_exponent", "regime", "note"]);
    for e in &entries {
        let slope = e.report.as_ref().map(|r| r.slope);
        for &(n, err) in &e.series {
            table.push(vec![
                e.function.as_str().into(),
                e.m.into(),
                e.beta.into(),
                n.into(),
                err.into(),
                slope.into(),
                predicted_exponent(e.beta, e.m).into(),
                regime(e.beta, e.m).to_string().into(),
                e.note.clone().map_or(Cell::Empty, Cell::from),
            ]);
        }
    }
    let json = serde_json::to_value(&entries)?;
    Ok(Outcome { artifact: Artifact { table, json: Some(json) }, status: Status::Success })
}
