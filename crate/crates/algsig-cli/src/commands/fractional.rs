//! Tabulates one-sided Caputo derivatives, with closed-form oracles where
//! the function family has one.

use algsig::error::Error;
use algsig::fractional::{
    caputo_iterated, caputo_left, caputo_right, gamma_fn, Direction, FractionalSpec, QuadratureGrid,
};

use super::Outcome;
use crate::config::{NamedFunction, Side, SweepConfig};
use crate::error::{CliError, Result, Status};
use crate::output::{Cell, Table};

/// Oracle agreement required of a row, relative to `max(1, |oracle|)`.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// Closed forms the oracle knows: `s·x + c`, constants and `(x − c)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Affine { slope: f64 },
    Constant,
    Power { center: f64, p: f64 },
}

fn family(spec: &str) -> Option<Family> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<f64> =
        args.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().ok()).collect::<Option<_>>()?;
    let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
    match name.trim() {
        "identity" => Some(Family::Affine { slope: 1.0 }),
        "affine" => Some(Family::Affine { slope: arg(0, 2.0) }),
        "constant" => Some(Family::Constant),
        "power" => Some(Family::Power { center: arg(0, 0.0), p: arg(1, 1.5) }),
        "sqrt" => Some(Family::Power { center: arg(0, 0.0), p: 0.5 }),
        _ => None,
    }
}

/// `D^α` of `(x − a)^q` from the left at anchor `a`, for `x ≥ a`.
fn power_rule(q: f64, alpha: f64, u: f64) -> Option<f64> {
    let order = alpha.ceil();
    if q.fract() == 0.0 && q < order {
        return Some(0.0);
    }
    Some(gamma_fn(q + 1.0).ok()? / gamma_fn(q + 1.0 - alpha).ok()? * u.powf(q - alpha))
}

fn oracle(spec: &str, alpha: f64, dir: Direction, anchor: f64, x: f64) -> Option<f64> {
    let u = match dir {
        Direction::Left => x - anchor,
        Direction::Right => anchor - x,
    };
    if u <= 0.0 {
        return Some(0.0);
    }
    match (family(spec)?, dir) {
        (Family::Constant, _) => Some(0.0),
        (Family::Affine { slope }, Direction::Left) => Some(slope * power_rule(1.0, alpha, u)?),
        // f(t) = slope·t + c seen from the right anchor is −slope·(anchor − t) + const.
        (Family::Affine { slope }, Direction::Right) => Some(-slope * power_rule(1.0, alpha, u)?),
        (Family::Power { center, p }, Direction::Left) if center == anchor => power_rule(p, alpha, u),
        _ => None,
    }
}

fn spec_for(alpha: f64, anchor: f64, dir: Direction, n_bar: u32) -> algsig::error::Result<FractionalSpec> {
    let spec = if alpha.fract() == 0.0 {
        FractionalSpec::integer(alpha as u32, anchor, dir)?
    } else {
        FractionalSpec::new(alpha, anchor, dir)?
    };
    spec.with_iterations(n_bar)
}

struct Point<'a> {
    f: &'a NamedFunction,
    alpha: f64,
    n_bar: u32,
    dir: Direction,
    x: f64,
}

fn evaluate(c: &Point<'_>, anchor: f64) -> algsig::error::Result<Vec<f64>> {
    let spec = spec_for(c.alpha, anchor, c.dir, c.n_bar)?;
    let v = if c.n_bar > 1 {
        caputo_iterated(&c.f.f, &spec, c.x, QuadratureGrid::stage())?.value
    } else {
        let grid = QuadratureGrid::default();
        match c.dir {
            Direction::Left => caputo_left(&c.f.f, &spec, c.x, grid)?,
            Direction::Right => caputo_right(&c.f.f, &spec, c.x, grid)?,
        }
    };
    Ok(v.components().to_vec())
}

fn row_status(e: &Error) -> Status {
    CliError::Numeric(e.clone()).status()
}

pub fn run_fractional(cfg: &SweepConfig) -> Result<Outcome> {
    let dirs: &[Direction] = match cfg.side {
        Side::Left => &[Direction::Left],
        Side::Right => &[Direction::Right],
        Side::Both => &[Direction::Left, Direction::Right],
    };
    let xs: Vec<f64> = cfg.interval.grid(cfg.grid).collect();
    let mut cells = Vec::new();
    for f in &cfg.functions {
        for &alpha in &cfg.frac_alpha {
            for &n_bar in &cfg.n_bar {
                for &dir in dirs {
                    cells.extend(xs.iter().map(|&x| Point { f, alpha, n_bar, dir, x }));
                }
            }
        }
    }
    let (a, b) = (cfg.interval.a(), cfg.interval.b());
    let anchor = |dir| if dir == Direction::Left { a } else { b };
    let values = cfg.run_cells(&cells, |c| evaluate(c, anchor(c.dir)))?;

    let dim = cfg.functions.iter().map(|f| f.f.dim()).max().unwrap_or(1);
    let mut header: Vec<String> = ["function", "alpha", "nbar", "side", "anchor", "x"].map(String::from).to_vec();
    header.extend((1..=dim).map(|i| format!("d{i}")));
    header.extend(["oracle", "abs_diff", "flag"].map(String::from));
    let mut table = Table::new(header);
    let mut status = Status::Success;
    for (c, v) in cells.iter().zip(values) {
        let side = if c.dir == Direction::Left { "left" } else { "right" };
        let mut row: Vec<Cell> = vec![
            c.f.spec.as_str().into(),
            c.alpha.into(),
            c.n_bar.into(),
            side.into(),
            anchor(c.dir).into(),
            c.x.into(),
        ];
        match v {
            Ok(v) => {
                let truth = if c.n_bar == 1 && v.len() == 1 {
                    oracle(&c.f.spec, c.alpha, c.dir, anchor(c.dir), c.x)
                } else {
                    None
                };
                let diff = truth.map(|t| (v[0] - t).abs());
                let bad = matches!((truth, diff), (Some(t), Some(d)) if d.is_nan() || d > ORACLE_TOLERANCE * t.abs().max(1.0));
                if bad {
                    status = status.max(Status::Verification);
                }
                row.extend(v.iter().map(|&x| Cell::Num(x)));
                row.resize(6 + dim, Cell::Empty);
                row.extend([truth.into(), diff.into(), if bad { "oracle mismatch".into() } else { Cell::Empty }]);
            }
            Err(e) => {
                status = status.max(row_status(&e));
                row.resize(8 + dim, Cell::Empty);
                row.push(e.to_string().into());
            }
        }
        table.push(row);
    }
    Ok(Outcome { artifact: table.into(), status })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_values() {
        let half = oracle("identity", 0.5, Direction::Left, 0.0, 1.0).unwrap();
        assert!((half - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        // The right derivative of 1 − x at anchor 1 mirrors the left one of x.
        let mirrored = oracle("affine:-1,1", 0.5, Direction::Right, 1.0, 0.75).unwrap();
        assert!((mirrored - oracle("identity", 0.5, Direction::Left, 0.0, 0.25).unwrap()).abs() < 1e-15);
        assert_eq!(oracle("power:0,2", 1.5, Direction::Left, 0.0, -1.0), Some(0.0));
        assert_eq!(oracle("power:0,1", 1.5, Direction::Left, 0.0, 0.5), Some(0.0));
        assert_eq!(oracle("power:0.5,2", 0.5, Direction::Left, 0.0, 0.7), None);
        assert_eq!(oracle("sin", 0.5, Direction::Left, 0.0, 0.7), None);
    }
}
