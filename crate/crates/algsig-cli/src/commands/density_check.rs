//! Partition-of-unity, tail, denominator and endpoint checks.

use algsig::activation::SigmoidParams;
use algsig::density::{
    denominator_bound, denominator_sum, endpoint_deficit, partition_sum, tail_bound, tail_sum, truncation_radius,
    two_sided_tail_bound, OperatorConfig, RateParams,
};

use super::Outcome;
use crate::config::SweepConfig;
use crate::error::{Result, Status};
use crate::output::{Cell, Table};

/// Allowance on the endpoint inequality.
const ENDPOINT_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
enum Check {
    Partition { m: u32 },
    Tail { m: u32, n: u64, alpha: f64 },
    Denominator { m: u32, n: u64 },
    Endpoint { m: u32, n: u64 },
}

struct Row {
    check: &'static str,
    m: u32,
    n: Option<u64>,
    alpha: Option<f64>,
    measured: f64,
    /// The bound as stated.
    bound: f64,
    /// Two-sided form of the bound, where the stated one counts a single tail.
    corrected_bound: Option<f64>,
    margin: f64,
    hypotheses_ok: bool,
    pass: bool,
    note: String,
}

fn max_over<F: Fn(f64) -> algsig::error::Result<f64>>(xs: &[f64], f: F) -> algsig::error::Result<f64> {
    xs.iter().try_fold(f64::NEG_INFINITY, |acc, &x| Ok(acc.max(f(x)?)))
}

fn run(check: Check, cfg: &SweepConfig, xs: &[f64]) -> Result<Row> {
    let p = |m| SigmoidParams::new(m);
    let on = cfg.interval;
    Ok(match check {
        Check::Partition { m } => {
            let eps = cfg.epsilon_for(m);
            let radius = truncation_radius(eps, p(m)?)?;
            let measured = max_over(xs, |x| Ok((partition_sum(x, p(m)?, radius)? - 1.0).abs()))?;
            let corrected = 2.0 * eps;
            Row {
                check: "partition",
                m,
                n: None,
                alpha: None,
                measured,
                bound: eps,
                corrected_bound: Some(corrected),
                margin: corrected - measured,
                hypotheses_ok: true,
                pass: measured <= corrected + 1e-13,
                note: format!("radius {radius}"),
            }
        }
        Check::Tail { m, n, alpha } => {
            let Ok(rate) = RateParams::new(alpha, n) else {
                return Ok(Row {
                    check: "tail",
                    m,
                    n: Some(n),
                    alpha: Some(alpha),
                    measured: f64::NAN,
                    bound: f64::NAN,
                    corrected_bound: None,
                    margin: f64::NAN,
                    hypotheses_ok: false,
                    pass: false,
                    note: format!("n^(1-alpha) = {} must exceed 2", (n as f64).powf(1.0 - alpha)),
                });
            };
            let measured = max_over(xs, |x| tail_sum(x, rate, p(m)?))?;
            let (stated, corrected) = (tail_bound(rate, p(m)?), two_sided_tail_bound(rate, p(m)?));
            Row {
                check: "tail",
                m,
                n: Some(n),
                alpha: Some(alpha),
                measured,
                bound: stated,
                corrected_bound: Some(corrected),
                margin: corrected - measured,
                hypotheses_ok: true,
                pass: measured < corrected,
                note: if measured >= stated { "exceeds the one-sided bound".into() } else { String::new() },
            }
        }
        Check::Denominator { m, n } => {
            let oc = OperatorConfig::new(on.a(), on.b(), n, p(m)?)?;
            let measured = max_over(xs, |x| Ok(1.0 / denominator_sum(x, &oc)?))?;
            let bound = denominator_bound(p(m)?);
            Row {
                check: "denominator",
                m,
                n: Some(n),
                alpha: None,
                measured,
                bound,
                corrected_bound: None,
                margin: bound - measured,
                hypotheses_ok: true,
                pass: measured < bound,
                note: String::new(),
            }
        }
        Check::Endpoint { m, n } => {
            let oc = OperatorConfig::new(on.a(), on.b(), n, p(m)?)?;
            let measured = endpoint_deficit(&oc)?;
            let bound = p(m)?.density(1.0);
            Row {
                check: "endpoint",
                m,
                n: Some(n),
                alpha: None,
                measured,
                bound,
                corrected_bound: None,
                margin: measured - bound,
                hypotheses_ok: true,
                pass: measured >= bound - ENDPOINT_SLACK,
                note: String::new(),
            }
        }
    })
}

pub fn run_density_check(cfg: &SweepConfig) -> Result<Outcome> {
    let mut checks = Vec::new();
    for &m in &cfg.m {
        checks.push(Check::Partition { m });
        for &n in &cfg.n {
            for &alpha in &cfg.alpha {
                checks.push(Check::Tail { m, n, alpha });
            }
            checks.push(Check::Denominator { m, n });
            checks.push(Check::Endpoint { m, n });
        }
    }
    let xs: Vec<f64> = cfg.interval.grid(cfg.grid).collect();
    let rows = cfg.run_cells(&checks, |&c| run(c, cfg, &xs))?.into_iter().collect::<Result<Vec<_>>>()?;

    let mut table = Table::new([
        "check",
        "m",
        "n",
        "alpha",
        "measured",
        "bound",
        "corrected_bound",
        "margin",
        "hypotheses_ok",
        "pass",
        "note",
    ]);
    let mut status = Status::Success;
    for r in rows {
        status = status.max(if !r.hypotheses_ok {
            Status::Hypothesis
        } else if !r.pass {
            Status::Verification
        } else {
            Status::Success
        });
        table.push(vec![
            r.check.into(),
            r.m.into(),
            r.n.into(),
            r.alpha.into(),
            Cell::Num(r.measured),
            Cell::Num(r.bound),
            r.corrected_bound.into(),
            Cell::Num(r.margin),
            r.hypotheses_ok.into(),
            r.pass.into(),
            r.note.into(),
        ]);
    }
    Ok(Outcome { artifact: table.into(), status })
}
