//! One bound report per (theorem, function, parameters).

use algsig::activation::SigmoidParams;
use algsig::certify::{
    bound_t11, bound_t12, bound_t14, bound_t30, bound_t31_c32, bound_t37_c38, BoundParams, BoundReport, CertifyOptions,
    FirstOrderVariant, FractionalMode, IteratedVariant, Mode, TheoremId,
};
use algsig::density::OperatorConfig;
use algsig::error::Error;

use super::Outcome;
use crate::config::{NamedFunction, SweepConfig};
use crate::error::{Result, Status};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy)]
struct Job<'a> {
    id: TheoremId,
    f: &'a NamedFunction,
    n: u64,
    m: u32,
    alpha: Option<f64>,
    beta: Option<f64>,
    frac_alpha: Option<f64>,
    order: Option<u32>,
    n_bar: Option<u32>,
    x: Option<f64>,
}

impl Job<'_> {
    fn params(&self, cfg: &SweepConfig) -> BoundParams {
        BoundParams {
            function: self.f.f.name(),
            n: self.n,
            m: self.m,
            a: cfg.interval.a(),
            b: cfg.interval.b(),
            alpha: self.alpha.or(self.frac_alpha),
            beta: self.beta,
            order: self.order,
            n_bar: self.n_bar,
            delta: if self.id == TheoremId::T37 { cfg.delta } else { None },
            x: self.x,
            epsilon: (self.id == TheoremId::T12).then(|| cfg.epsilon_for(self.m)),
        }
    }

    fn run(&self, cfg: &SweepConfig, opts: &CertifyOptions) -> algsig::error::Result<BoundReport> {
        let f = &self.f.f;
        let p = SigmoidParams::new(self.m)?;
        let oc = OperatorConfig::new(cfg.interval.a(), cfg.interval.b(), self.n, p)?;
        let mode = self.x.map_or(Mode::Uniform, Mode::Point);
        let (alpha, beta, frac) = (self.alpha.unwrap_or(0.5), self.beta.unwrap_or(0.5), self.frac_alpha.unwrap_or(0.5));
        use TheoremId::*;
        match self.id {
            T11 => bound_t11(f, &oc, alpha, opts),
            T12 => bound_t12(f, &cfg.interval, self.n, alpha, p, cfg.epsilon_for(self.m), opts),
            T14Point | T14Uniform => bound_t14(f, &oc, alpha, self.order.unwrap_or(1), mode, opts),
            T30I | T30Ii | T30Iii | T30Iv => {
                let fm = match self.id {
                    T30I => FractionalMode::I,
                    T30Ii => FractionalMode::Ii,
                    T30Iii => FractionalMode::Iii,
                    _ => FractionalMode::Iv,
                };
                bound_t30(f, &oc, beta, frac, fm, self.x, opts)
            }
            T31I | T31Ii => bound_t31_c32(f, &oc, beta, FirstOrderVariant::T31 { alpha: frac }, mode, opts),
            C32I | C32Ii => bound_t31_c32(f, &oc, beta, FirstOrderVariant::C32, mode, opts),
            T37 | C38 => {
                let (variant, delta) =
                    if self.id == T37 { (IteratedVariant::T37, cfg.delta) } else { (IteratedVariant::C38, None) };
                let x = self.x.unwrap_or(cfg.interval.a());
                bound_t37_c38(f, &oc, frac, self.n_bar.unwrap_or(1), x, delta, variant, opts)
            }
        }
    }
}

/// A report for a run the library refused. Hypothesis-type refusals are
/// recorded as such; anything else counts as a failed verification.
fn refused(job: &Job<'_>, cfg: &SweepConfig, e: &Error) -> BoundReport {
    let hypotheses_ok =
        !matches!(e, Error::Precondition(_) | Error::Capability(_) | Error::InvalidParameter(_) | Error::Domain(_));
    BoundReport {
        theorem_id: job.id,
        params: job.params(cfg),
        rhs: f64::INFINITY,
        empirical: f64::NAN,
        slack: f64::NAN,
        pass: false,
        hypotheses_ok,
        uncertainty: 0.0,
        advisory: false,
        dominator: None,
        notes: vec![e.to_string()],
    }
}

fn jobs(cfg: &SweepConfig) -> Vec<Job<'_>> {
    use TheoremId::*;
    let mut out = Vec::new();
    for &id in &cfg.theorems {
        for f in &cfg.functions {
            for &n in &cfg.n {
                for &m in &cfg.m {
                    let base = Job {
                        id,
                        f,
                        n,
                        m,
                        alpha: None,
                        beta: None,
                        frac_alpha: None,
                        order: None,
                        n_bar: None,
                        x: None,
                    };
                    let pointwise = matches!(id, T14Point | T30I | T30Ii | T30Iii | T31I | C32I | T37 | C38);
                    let xs: Vec<Option<f64>> =
                        if pointwise { cfg.points.iter().copied().map(Some).collect() } else { vec![None] };
                    let mut variants = Vec::new();
                    match id {
                        T11 | T12 => variants.extend(cfg.alpha.iter().map(|&a| Job { alpha: Some(a), ..base })),
                        T14Point | T14Uniform => {
                            for &a in &cfg.alpha {
                                variants.extend(cfg.order.iter().map(|&o| Job {
                                    alpha: Some(a),
                                    order: Some(o),
                                    ..base
                                }));
                            }
                        }
                        T30I | T30Ii | T30Iii | T30Iv | T31I | T31Ii => {
                            for &b in &cfg.beta {
                                variants.extend(cfg.frac_alpha.iter().map(|&q| Job {
                                    beta: Some(b),
                                    frac_alpha: Some(q),
                                    ..base
                                }));
                            }
                        }
                        C32I | C32Ii => variants.extend(cfg.beta.iter().map(|&b| Job {
                            beta: Some(b),
                            frac_alpha: Some(0.5),
                            ..base
                        })),
                        T37 | C38 => {
                            for &q in &cfg.frac_alpha {
                                variants.extend(cfg.n_bar.iter().map(|&k| Job {
                                    frac_alpha: Some(q),
                                    n_bar: Some(k),
                                    ..base
                                }));
                            }
                        }
                    }
                    for v in variants {
                        out.extend(xs.iter().map(|&x| Job { x, ..v }));
                    }
                }
            }
        }
    }
    out
}

pub fn run_certify(cfg: &SweepConfig) -> Result<Outcome> {
    let opts = CertifyOptions { grid_points: cfg.grid, ..CertifyOptions::default() };
    let jobs = jobs(cfg);
    let reports: Vec<BoundReport> =
        cfg.run_cells(&jobs, |j| j.run(cfg, &opts).unwrap_or_else(|e| refused(j, cfg, &e)))?;

    let eligible: Vec<&BoundReport> = reports.iter().filter(|r| r.hypotheses_ok && !r.advisory).collect();
    let status = if eligible.iter().any(|r| !r.pass) {
        Status::Verification
    } else if !reports.iter().any(|r| r.hypotheses_ok) {
        Status::Hypothesis
    } else {
        Status::Success
    };

    let mut table = Table::new([
        "theorem",
        "function",
        "n",
        "m",
        "a",
        "b",
        "alpha",
        "beta",
        "order",
        "n_bar",
        "delta",
        "x",
        "epsilon",
        "rhs",
        "empirical",
        "slack",
        "uncertainty",
        "dominator",
        "hypotheses_ok",
        "advisory",
        "pass",
        "notes",
    ]);
    for r in &reports {
        let p = &r.params;
        table.push(vec![
            r.theorem_id.as_str().into(),
            p.function.clone().into(),
            p.n.into(),
            p.m.into(),
            p.a.into(),
            p.b.into(),
            p.alpha.into(),
            p.beta.into(),
            p.order.into(),
            p.n_bar.into(),
            p.delta.into(),
            p.x.into(),
            p.epsilon.into(),
            Cell::Num(r.rhs),
            Cell::Num(r.empirical),
            Cell::Num(r.slack),
            Cell::Num(r.uncertainty),
            r.dominator.into(),
            r.hypotheses_ok.into(),
            r.advisory.into(),
            r.pass.into(),
            r.notes.join("; ").into(),
        ]);
    }
    let json = serde_json::to_value(&reports)?;
    Ok(Outcome { artifact: crate::output::Artifact { table, json: Some(json) }, status })
}
