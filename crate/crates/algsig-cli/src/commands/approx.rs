//! Tabulates `f`, its operator image and the pointwise error.

use algsig::activation::SigmoidParams;
use algsig::density::OperatorConfig;
use algsig::operators::{a_bar, a_n};
use algsig::vector::NormKind;

use super::{single, Outcome};
use crate::config::SweepConfig;
use crate::error::{Result, Status};
use crate::output::{Cell, Table};

pub fn run_approx(cfg: &SweepConfig) -> Result<Outcome> {
    let f = single("function", &cfg.functions)?;
    let n = *single("n", &cfg.n)?;
    let m = *single("m", &cfg.m)?;
    let p = SigmoidParams::new(m)?;
    let op = OperatorConfig::new(cfg.interval.a(), cfg.interval.b(), n, p)?;
    let eps = cfg.epsilon_for(m);
    let d = f.f.dim();

    let xs: Vec<f64> = cfg.interval.grid(cfg.grid).collect();
    let rows = cfg.run_cells(&xs, |&x| -> Result<Vec<Cell>> {
        let fx = f.f.eval(x)?;
        let r = if cfg.whole_line { a_bar(f.f.as_ref(), x, n, p, eps)? } else { a_n(f.f.as_ref(), x, &op)? };
        let err = r.value.sub(&fx).norm(NormKind::Euclidean);
        let mut row = vec![Cell::Num(x)];
        row.extend(fx.components().iter().map(|&v| Cell::Num(v)));
        row.extend(r.value.components().iter().map(|&v| Cell::Num(v)));
        row.extend([Cell::Num(err), Cell::Num(r.denominator)]);
        Ok(row)
    })?;

    let mut header = vec!["x".to_string()];
    header.extend((1..=d).map(|i| format!("f{i}")));
    header.extend((1..=d).map(|i| format!("a{i}")));
    header.extend(["error".into(), "denominator".into()]);
    let mut table = Table::new(header);
    for row in rows {
        table.push(row?);
    }
    Ok(Outcome { artifact: table.into(), status: Status::Success })
}
