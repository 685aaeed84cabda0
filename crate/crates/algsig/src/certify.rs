//! Error-bound certificates: each report pairs the right-hand side of an
//! approximation estimate with the measured error of the operator.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::SigmoidParams;
use crate::density::OperatorConfig;
use crate::error::{ensure_finite, Error, Result};
use crate::fractional::{gamma, remark29_bound, Direction, FractionalSpec, TwoSidedTables};
use crate::operators::{a_bar_deviation, a_n_deviation, a_n_moment};
use crate::vector::{
    derivative, modulus_of_continuity, sup_norm_estimate, FunctionRef, Interval, NormKind, VectorValue,
};

/// Relative part of the pass tolerance.
pub const PASS_RELATIVE: f64 = 1e-9;
/// Absolute part of the pass tolerance.
pub const PASS_ABSOLUTE: f64 = 1e-12;

const NORM: NormKind = NormKind::Euclidean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T11,
    T12,
    #[serde(rename = "T14-point")]
    T14Point,
    #[serde(rename = "T14-uniform")]
    T14Uniform,
    #[serde(rename = "T30-i")]
    T30I,
    #[serde(rename = "T30-ii")]
    T30Ii,
    #[serde(rename = "T30-iii")]
    T30Iii,
    #[serde(rename = "T30-iv")]
    T30Iv,
    #[serde(rename = "T31-i")]
    T31I,
    #[serde(rename = "T31-ii")]
    T31Ii,
    #[serde(rename = "C32-i")]
    C32I,
    #[serde(rename = "C32-ii")]
    C32Ii,
    T37,
    C38,
}

impl TheoremId {
    pub const ALL: [TheoremId; 14] = [
        TheoremId::T11,
        TheoremId::T12,
        TheoremId::T14Point,
        TheoremId::T14Uniform,
        TheoremId::T30I,
        TheoremId::T30Ii,
        TheoremId::T30Iii,
        TheoremId::T30Iv,
        TheoremId::T31I,
        TheoremId::T31Ii,
        TheoremId::C32I,
        TheoremId::C32Ii,
        TheoremId::T37,
        TheoremId::C38,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T11 => "T11",
            TheoremId::T12 => "T12",
            TheoremId::T14Point => "T14-point",
            TheoremId::T14Uniform => "T14-uniform",
            TheoremId::T30I => "T30-i",
            TheoremId::T30Ii => "T30-ii",
            TheoremId::T30Iii => "T30-iii",
            TheoremId::T30Iv => "T30-iv",
            TheoremId::T31I => "T31-i",
            TheoremId::T31Ii => "T31-ii",
            TheoremId::C32I => "C32-i",
            TheoremId::C32Ii => "C32-ii",
            TheoremId::T37 => "T37",
            TheoremId::C38 => "C38",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id {s:?}")))
    }
}

/// Inputs a report was produced from; unused entries stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub function: String,
    pub n: u64,
    pub m: u32,
    pub a: f64,
    pub b: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub order: Option<u32>,
    pub n_bar: Option<u32>,
    pub delta: Option<f64>,
    pub x: Option<f64>,
    pub epsilon: Option<f64>,
}

impl BoundParams {
    fn new(f: &FunctionRef, n: u64, m: u32, a: f64, b: f64) -> Self {
        Self {
            function: f.name(),
            n,
            m,
            a,
            b,
            alpha: None,
            beta: None,
            order: None,
            n_bar: None,
            delta: None,
            x: None,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    pub params: BoundParams,
    /// `+∞` (serialized as `null`) when the hypotheses leave it undefined.
    pub rhs: f64,
    pub empirical: f64,
    pub slack: f64,
    pub pass: bool,
    pub hypotheses_ok: bool,
    /// Allowance added to the pass test (truncation `ε`, quadrature error).
    pub uncertainty: f64,
    /// Some ingredient of `rhs` is a grid estimate rather than a certified value.
    pub advisory: bool,
    /// The right-hand side with a-priori caps substituted for the measured
    /// fractional moduli and norms, where such caps exist.
    pub dominator: Option<f64>,
    pub notes: Vec<String>,
}

/// `empirical ≤ rhs(1 + 1e−9) + 1e−12 + uncertainty`.
pub fn within_bound(empirical: f64, rhs: f64, uncertainty: f64) -> bool {
    empirical <= rhs * (1.0 + PASS_RELATIVE) + PASS_ABSOLUTE + uncertainty
}

struct Draft {
    id: TheoremId,
    params: BoundParams,
    hypotheses_ok: bool,
    advisory: bool,
    uncertainty: f64,
    dominator: Option<f64>,
    notes: Vec<String>,
}

impl Draft {
    fn new(id: TheoremId, params: BoundParams) -> Self {
        Self { id, params, hypotheses_ok: true, advisory: false, uncertainty: 0.0, dominator: None, notes: Vec::new() }
    }

    fn violated(&mut self, why: impl Into<String>) {
        self.hypotheses_ok = false;
        self.notes.push(why.into());
    }

    fn finish(self, rhs: f64, empirical: f64) -> BoundReport {
        let rhs = if self.hypotheses_ok && rhs.is_finite() { rhs.max(0.0) } else { f64::INFINITY };
        let pass = self.hypotheses_ok && within_bound(empirical, rhs, self.uncertainty);
        BoundReport {
            theorem_id: self.id,
            params: self.params,
            rhs,
            empirical,
            slack: rhs - empirical,
            pass,
            hypotheses_ok: self.hypotheses_ok,
            uncertainty: self.uncertainty,
            advisory: self.advisory,
            dominator: self.dominator,
            notes: self.notes,
        }
    }
}

/// Resolution of the numerical parts of a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Grid for empirical sup-norms; refined once by doubling.
    pub grid_points: usize,
    /// Grid for moduli and norms that have no declared value.
    pub modulus_grid: usize,
    /// Panels of each fractional-derivative table.
    pub table_panels: u32,
    /// Anchors sampled for suprema over `x` of one-sided fractional quantities.
    pub anchor_points: usize,
    /// Tolerance for numerically checked vanishing conditions.
    pub hypothesis_tolerance: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_points: 1001,
            modulus_grid: 10_001,
            table_panels: 512,
            anchor_points: 33,
            hypothesis_tolerance: 1e-4,
        }
    }
}

/// Grid sup of an error function, with its once-refined value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupMeasurement {
    pub coarse: f64,
    pub refined: f64,
}

impl SupMeasurement {
    /// The refined value moved by more than 1%.
    pub fn unsettled(&self) -> bool {
        self.refined > 1.01 * self.coarse
    }
}

/// `max ‖e(x)‖` on `points` equispaced nodes of `on` and on the doubled grid.
pub fn grid_sup<E>(on: &Interval, points: usize, error: E) -> Result<SupMeasurement>
where
    E: Fn(f64) -> Result<f64> + Sync,
{
    if points < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
    }
    let nodes: Vec<f64> = on.grid(points).collect();
    let coarse = nodes.par_iter().map(|&x| error(x)).collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
    let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let fine = mids.par_iter().map(|&x| error(x)).collect::<Result<Vec<f64>>>()?.into_iter().fold(coarse, f64::max);
    Ok(SupMeasurement { coarse, refined: fine })
}

fn record_sup(draft: &mut Draft, s: SupMeasurement) -> f64 {
    if s.unsettled() {
        draft.notes.push(format!("grid sup moved from {:e} to {:e} under refinement", s.coarse, s.refined));
    }
    s.refined
}

/// `(1 + 4^m)^{1/(2m)}`.
fn growth(m: u32) -> f64 {
    0.5 * crate::density::denominator_bound(SigmoidParams::new(m).expect("m comes from valid parameters"))
}

/// `1/(T − 2)^{2m}`; infinite when `T ≤ 2`.
fn tail_factor(threshold: f64, m: u32) -> f64 {
    if threshold <= 2.0 {
        f64::INFINITY
    } else {
        (threshold - 2.0).powi(-(2 * m as i32))
    }
}

fn interval_of(cfg: &OperatorConfig) -> Result<Interval> {
    Interval::new(cfg.a(), cfg.b())
}

fn check_rate(draft: &mut Draft, exponent: f64, n: u64, name: &str) -> f64 {
    let threshold = (n as f64).powf(1.0 - exponent);
    if !(exponent > 0.0 && exponent < 1.0) {
        draft.violated(format!("{name} = {exponent} is outside (0, 1)"));
    } else if threshold <= 2.0 {
        draft.violated(format!("n^(1-{name}) = {threshold} is not above 2"));
    }
    threshold
}

fn modulus_of(draft: &mut Draft, f: &FunctionRef, delta: f64, on: &Interval, opts: &CertifyOptions) -> Result<f64> {
    let w = modulus_of_continuity(f.as_ref(), delta, on, opts.modulus_grid, NORM)?;
    if !w.is_analytic {
        draft.advisory = true;
        draft.notes.push(format!("modulus of {} is a grid estimate", f.name()));
    }
    Ok(w.lower)
}

fn sup_of(draft: &mut Draft, f: &FunctionRef, on: &Interval, opts: &CertifyOptions) -> Result<f64> {
    let s = sup_norm_estimate(f.as_ref(), on, opts.modulus_grid, NORM)?;
    if !s.is_analytic {
        draft.advisory = true;
        draft.notes.push(format!("sup-norm of {} is a grid estimate", f.name()));
    }
    Ok(s.value)
}

fn uniform_error(f: &FunctionRef, cfg: &OperatorConfig, opts: &CertifyOptions) -> Result<SupMeasurement> {
    let on = interval_of(cfg)?;
    grid_sup(&on, opts.grid_points, |x| Ok(a_n_deviation(f.as_ref(), x, cfg)?.norm(NORM)))
}

/// `λ₁ = (1+4^m)^{1/(2m)}[2ω₁(f, n^{−α}) + ‖f‖∞/(m(n^{1−α}−2)^{2m})]`
/// against the grid sup of `‖A_n f − f‖`.
pub fn bound_t11(f: &FunctionRef, cfg: &OperatorConfig, alpha: f64, opts: &CertifyOptions) -> Result<BoundReport> {
    let m = cfg.m();
    let mut params = BoundParams::new(f, cfg.n(), m, cfg.a(), cfg.b());
    params.alpha = Some(alpha);
    let mut d = Draft::new(TheoremId::T11, params);
    let on = interval_of(cfg)?;
    let threshold = check_rate(&mut d, alpha, cfg.n(), "alpha");
    let delta = (cfg.n() as f64).powf(-alpha);
    let rhs = if d.hypotheses_ok {
        let w = modulus_of(&mut d, f, delta, &on, opts)?;
        let s = sup_of(&mut d, f, &on, opts)?;
        growth(m) * (2.0 * w + s * tail_factor(threshold, m) / f64::from(m))
    } else {
        f64::INFINITY
    };
    let e = uniform_error(f, cfg, opts)?;
    let empirical = record_sup(&mut d, e);
    Ok(d.finish(rhs, empirical))
}

fn whole_line_probe(on: &Interval) -> Result<Interval> {
    let r = on.a().abs().max(on.b().abs()) + 1e3;
    Interval::new(-r, r)
}

/// `λ₂ = ω₁(f, n^{−α}) + ‖f‖∞/(2m(n^{1−α}−2)^{2m})` for the whole-line
/// operator, measured on `on`; the truncation `ε` is the report's uncertainty.
pub fn bound_t12(
    f: &FunctionRef,
    on: &Interval,
    n: u64,
    alpha: f64,
    p: SigmoidParams,
    epsilon: f64,
    opts: &CertifyOptions,
) -> Result<BoundReport> {
    let m = p.m();
    let mut params = BoundParams::new(f, n, m, on.a(), on.b());
    params.alpha = Some(alpha);
    params.epsilon = Some(epsilon);
    let mut d = Draft::new(TheoremId::T12, params);
    d.uncertainty = epsilon;
    if !f.domain().is_whole_line() {
        d.violated(format!("{} is not defined on the whole line", f.name()));
    }
    let sup = f.analytic_sup_norm(None, NORM);
    if sup.is_none() {
        d.violated(format!("{} declares no bound on the whole line", f.name()));
    }
    let threshold = check_rate(&mut d, alpha, n, "alpha");
    if !d.hypotheses_ok {
        return Ok(d.finish(f64::INFINITY, f64::NAN));
    }
    let delta = (n as f64).powf(-alpha);
    let w = modulus_of(&mut d, f, delta, &whole_line_probe(on)?, opts)?;
    let rhs = w + sup.unwrap_or(f64::INFINITY) * tail_factor(threshold, m) / f64::from(2 * m);
    let e = grid_sup(on, opts.grid_points, |x| Ok(a_bar_deviation(f.as_ref(), x, n, p, epsilon)?.norm(NORM)))?;
    let empirical = record_sup(&mut d, e);
    Ok(d.finish(rhs, empirical))
}

/// Evaluation mode of the pointwise/uniform theorems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Point(f64),
    Uniform,
}

/// Smooth-`f` estimate with derivatives up to order `N`. At a point where
/// all of `f', …, f^{(N)}` vanish the derivative sum drops out by itself.
pub fn bound_t14(
    f: &FunctionRef,
    cfg: &OperatorConfig,
    alpha: f64,
    order: u32,
    mode: Mode,
    opts: &CertifyOptions,
) -> Result<BoundReport> {
    let m = cfg.m();
    let n = cfg.n();
    let mut params = BoundParams::new(f, n, m, cfg.a(), cfg.b());
    params.alpha = Some(alpha);
    params.order = Some(order);
    let id = match mode {
        Mode::Point(x) => {
            params.x = Some(x);
            TheoremId::T14Point
        }
        Mode::Uniform => TheoremId::T14Uniform,
    };
    let mut d = Draft::new(id, params);
    let on = interval_of(cfg)?;
    if order == 0 {
        return Err(Error::InvalidParameter("order N must be at least 1".into()));
    }
    if let Mode::Point(x) = mode {
        cfg.check_point(x)?;
    }
    let threshold = check_rate(&mut d, alpha, n, "alpha");
    let delta = (n as f64).powf(-alpha);
    if on.len() <= delta {
        d.violated(format!("b - a = {} does not exceed n^-alpha = {delta}", on.len()));
    }
    if !f.smoothness().at_least(order) {
        d.violated(format!("{} is not of class C^{order}", f.name()));
    }
    let rhs = if d.hypotheses_ok {
        let tail = tail_factor(threshold, m);
        let len = on.len();
        let mut sum = 0.0;
        let mut factorial = 1.0;
        let mut last = None;
        for j in 1..=order {
            factorial *= f64::from(j);
            let dj = match f.analytic_derivative(j) {
                Some(g) => g,
                None => {
                    d.advisory = true;
                    d.notes.push(format!("derivative {j} of {} is a finite difference", f.name()));
                    derivative(f, j)?
                }
            };
            let size = match mode {
                Mode::Point(x) => dj.eval(x)?.norm(NORM),
                Mode::Uniform => sup_of(&mut d, &dj, &on, opts)?,
            };
            sum += size / factorial * (2.0 * delta.powi(j as i32) + len.powi(j as i32) * tail / f64::from(2 * m));
            last = Some((dj, factorial));
        }
        let (top, nfact) = last.expect("order is at least 1");
        let w = modulus_of(&mut d, &top, delta, &on, opts)?;
        let s = sup_of(&mut d, &top, &on, opts)?;
        let remainder =
            w * 2.0 * delta.powi(order as i32) / nfact + s * len.powi(order as i32) * tail / (nfact * f64::from(m));
        growth(m) * (sum + remainder)
    } else {
        f64::INFINITY
    };
    let empirical = match mode {
        Mode::Point(x) => a_n_deviation(f.as_ref(), x, cfg)?.norm(NORM),
        Mode::Uniform => {
            let e = uniform_error(f, cfg, opts)?;
            record_sup(&mut d, e)
        }
    };
    Ok(d.finish(rhs, empirical))
}

/// The four displays of the fractional estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FractionalMode {
    /// Error with the Taylor-moment correction removed.
    I,
    /// Plain error when `f^{(j)}(x) = 0` for `j < N`.
    Ii,
    /// Plain pointwise error.
    Iii,
    /// Uniform error.
    Iv,
}

/// One-sided fractional moduli and norms at an anchor `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SideTerms {
    /// `ω₁(D_{x−}^α f, δ)_{[a,x]}`, `ω₁(D_{*x}^α f, δ)_{[x,b]}`.
    modulus: [f64; 2],
    /// `‖D_{x−}^α f‖_{∞,[a,x]}`, `‖D_{*x}^α f‖_{∞,[x,b]}`.
    norm: [f64; 2],
    disagreement: f64,
}

fn side_terms(t: &TwoSidedTables, delta: f64) -> SideTerms {
    SideTerms {
        modulus: [t.right.modulus(delta, NORM), t.left.modulus(delta, NORM)],
        norm: [t.right.sup_norm(NORM), t.left.sup_norm(NORM)],
        disagreement: t.disagreement(),
    }
}

struct FractionalSetup {
    alpha: f64,
    beta: f64,
    order: u32,
    threshold: f64,
    delta: f64,
}

fn fractional_draft(
    id: TheoremId,
    f: &FunctionRef,
    cfg: &OperatorConfig,
    beta: f64,
    alpha: f64,
    x: Option<f64>,
) -> Result<(Draft, FractionalSetup)> {
    let mut params = BoundParams::new(f, cfg.n(), cfg.m(), cfg.a(), cfg.b());
    params.alpha = Some(alpha);
    params.beta = Some(beta);
    params.x = x;
    let mut d = Draft::new(id, params);
    if let Some(x) = x {
        cfg.check_point(x)?;
    }
    if !(alpha > 0.0 && alpha.is_finite()) || alpha.fract() == 0.0 {
        d.violated(format!("fractional order {alpha} is not a positive non-integer"));
    }
    let order = alpha.ceil().max(1.0) as u32;
    d.params.order = Some(order);
    if !f.smoothness().at_least(order) {
        d.violated(format!("{} is not of class C^{order}", f.name()));
    }
    let threshold = check_rate(&mut d, beta, cfg.n(), "beta");
    let delta = (cfg.n() as f64).powf(-beta);
    d.params.delta = Some(delta);
    Ok((d, FractionalSetup { alpha, beta, order, threshold, delta }))
}

/// `Σ_{j=1}^{N−1} c_j/j! · (1/n^{βj} + (b−a)^j/(4m(T−2)^{2m}))` for sizes `c_j`.
fn taylor_sum(sizes: &[f64], s: &FractionalSetup, len: f64, m: u32) -> f64 {
    let tail = tail_factor(s.threshold, m) / f64::from(4 * m);
    let mut factorial = 1.0;
    let mut sum = 0.0;
    for (i, c) in sizes.iter().enumerate() {
        let j = (i + 1) as i32;
        factorial *= f64::from(j);
        sum += c / factorial * (s.delta.powi(j) + len.powi(j) * tail);
    }
    sum
}

/// Bracket `(ω_L + ω_R)/n^{αβ} + (‖D_L‖(x−a)^α + ‖D_R‖(b−x)^α)/(4m(T−2)^{2m})`.
fn fractional_bracket(t: &SideTerms, s: &FractionalSetup, lengths: [f64; 2], n: u64, m: u32) -> f64 {
    let tail = tail_factor(s.threshold, m) / f64::from(4 * m);
    (t.modulus[0] + t.modulus[1]) / (n as f64).powf(s.alpha * s.beta)
        + tail * (t.norm[0] * lengths[0].powf(s.alpha) + t.norm[1] * lengths[1].powf(s.alpha))
}

fn inflate(t: &SideTerms) -> SideTerms {
    let e = t.disagreement;
    SideTerms {
        modulus: [t.modulus[0] + 2.0 * e, t.modulus[1] + 2.0 * e],
        norm: [t.norm[0] + e, t.norm[1] + e],
        disagreement: e,
    }
}

fn derivative_values(
    f: &FunctionRef,
    upto: u32,
    at: Option<f64>,
    on: &Interval,
    d: &mut Draft,
    opts: &CertifyOptions,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for j in 1..upto {
        let g = derivative(f, j)?;
        out.push(match at {
            Some(x) => g.eval(x)?.norm(NORM),
            None => sup_of(d, &g, on, opts)?,
        });
    }
    Ok(out)
}

fn cap_terms(f: &FunctionRef, s: &FractionalSetup, on: &Interval, d: &mut Draft) -> Option<SideTerms> {
    let spec = FractionalSpec::new(s.alpha, on.a(), Direction::Left).ok()?;
    match remark29_bound(f, &spec, on, NORM) {
        Ok(c) => Some(SideTerms { modulus: [c.modulus_cap; 2], norm: [c.sup_cap; 2], disagreement: 0.0 }),
        Err(e) => {
            d.notes.push(format!("no a-priori cap: {e}"));
            None
        }
    }
}

fn check_caps(d: &mut Draft, measured: &SideTerms, caps: &SideTerms) {
    for i in 0..2 {
        if measured.norm[i] > caps.norm[i] * (1.0 + 1e-6) + 1e-12
            || measured.modulus[i] > caps.modulus[i] * (1.0 + 1e-6) + 1e-12
        {
            d.advisory = true;
            d.notes.push("tabulated fractional derivative exceeds its a-priori cap".into());
            return;
        }
    }
}

/// Fractional estimate for `f ∈ C^N`, `N = ⌈α⌉`, at rate `n^{−β}`.
///
/// The one-sided moduli and norms of `D_{x−}^α f` and `D_{*x}^α f` come
/// from graded tables; in the uniform mode their suprema over `x` are taken
/// over `anchor_points` equispaced anchors.
pub fn bound_t30(
    f: &FunctionRef,
    cfg: &OperatorConfig,
    beta: f64,
    frac_alpha: f64,
    mode: FractionalMode,
    x: Option<f64>,
    opts: &CertifyOptions,
) -> Result<BoundReport> {
    let id = match mode {
        FractionalMode::I => TheoremId::T30I,
        FractionalMode::Ii => TheoremId::T30Ii,
        FractionalMode::Iii => TheoremId::T30Iii,
        FractionalMode::Iv => TheoremId::T30Iv,
    };
    fractional_report(id, f, cfg, beta, frac_alpha, mode, x, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstOrderVariant {
    /// General `0 < α < 1`.
    T31 { alpha: f64 },
    /// `α = 1/2`.
    C32,
}

/// First-order (`N = 1`) fractional estimate.
pub fn bound_t31_c32(
    f: &FunctionRef,
    cfg: &OperatorConfig,
    beta: f64,
    variant: FirstOrderVariant,
    mode: Mode,
    opts: &CertifyOptions,
) -> Result<BoundReport> {
    let (alpha, point_id, uniform_id) = match variant {
        FirstOrderVariant::T31 { alpha } => (alpha, TheoremId::T31I, TheoremId::T31Ii),
        FirstOrderVariant::C32 => (0.5, TheoremId::C32I, TheoremId::C32Ii),
    };
    let (id, fm, x) = match mode {
        Mode::Point(x) => (point_id, FractionalMode::Iii, Some(x)),
        Mode::Uniform => (uniform_id, FractionalMode::Iv, None),
    };
    let mut r = fractional_report(id, f, cfg, beta, alpha, fm, x, opts)?;
    if alpha >= 1.0 && r.hypotheses_ok {
        r.hypotheses_ok = false;
        r.pass = false;
        r.rhs = f64::INFINITY;
        r.notes.push(format!("first-order estimate needs alpha < 1, got {alpha}"));
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn fractional_report(
    id: TheoremId,
    f: &FunctionRef,
    cfg: &OperatorConfig,
    beta: f64,
    alpha: f64,
    mode: FractionalMode,
    x: Option<f64>,
    opts: &CertifyOptions,
) -> Result<BoundReport> {
    let uniform = mode == FractionalMode::Iv;
    if !uniform && x.is_none() {
        return Err(Error::InvalidParameter("pointwise fractional estimates need x".into()));
    }
    let x = if uniform { None } else { x };
    let (mut d, s) = fractional_draft(id, f, cfg, beta, alpha, x)?;
    let on = interval_of(cfg)?;
    let (m, n) = (cfg.m(), cfg.n());
    if !d.hypotheses_ok {
        let empirical = match x {
            Some(x) => a_n_deviation(f.as_ref(), x, cfg)?.norm(NORM),
            None => f64::NAN,
        };
        return Ok(d.finish(f64::INFINITY, empirical));
    }
    let sizes = derivative_values(f, s.order, x, &on, &mut d, opts)?;
    let g = growth(m);
    let caps = cap_terms(f, &s, &on, &mut d);
    let (rhs, inflated, empirical) = match x {
        Some(x) => {
            let tables = TwoSidedTables::new(f, x, alpha, 1, &on, opts.table_panels)?;
            let terms = side_terms(&tables, s.delta);
            if let Some(c) = &caps {
                check_caps(&mut d, &terms, c);
            }
            let lengths = [x - on.a(), on.b() - x];
            let frac = |t: &SideTerms| 2.0 * g / gamma(alpha + 1.0) * fractional_bracket(t, &s, lengths, n, m);
            let taylor = 2.0 * g * taylor_sum(&sizes, &s, on.len(), m);
            let with = |t: &SideTerms| match mode {
                FractionalMode::I | FractionalMode::Ii => frac(t),
                _ => taylor + frac(t),
            };
            if let Some(c) = &caps {
                d.dominator = Some(with(c));
            }
            let deviation = a_n_deviation(f.as_ref(), x, cfg)?;
            let empirical = match mode {
                FractionalMode::I => {
                    let mut corrected = deviation;
                    for j in 1..s.order {
                        let coef = derivative(f, j)?.eval(x)?.scale(1.0 / factorial(j));
                        corrected = corrected.sub(&coef.scale(a_n_moment(x, j, cfg)?));
                    }
                    corrected.norm(NORM)
                }
                FractionalMode::Ii => {
                    let scale = f.eval(x)?.norm(NORM).max(1.0);
                    if sizes.iter().any(|&c| c > 1e-10 * scale) {
                        d.violated("lower derivatives do not vanish at x");
                    }
                    deviation.norm(NORM)
                }
                _ => deviation.norm(NORM),
            };
            (with(&terms), with(&inflate(&terms)), empirical)
        }
        None => {
            let anchors: Vec<f64> = on.grid(opts.anchor_points.max(2)).collect();
            let terms = anchors
                .par_iter()
                .map(|&x0| {
                    TwoSidedTables::new(f, x0, alpha, 1, &on, opts.table_panels).map(|t| side_terms(&t, s.delta))
                })
                .collect::<Result<Vec<_>>>()?;
            let sup =
                terms.iter().fold(SideTerms { modulus: [0.0; 2], norm: [0.0; 2], disagreement: 0.0 }, |acc, t| {
                    SideTerms {
                        modulus: [acc.modulus[0].max(t.modulus[0]), acc.modulus[1].max(t.modulus[1])],
                        norm: [acc.norm[0].max(t.norm[0]), acc.norm[1].max(t.norm[1])],
                        disagreement: acc.disagreement.max(t.disagreement),
                    }
                });
            if let Some(c) = &caps {
                check_caps(&mut d, &sup, c);
            }
            let len = on.len();
            let with = |t: &SideTerms| {
                let tail = tail_factor(s.threshold, m) / f64::from(4 * m);
                let frac = (t.modulus[0] + t.modulus[1]) / (n as f64).powf(alpha * beta)
                    + len.powf(alpha) * tail * (t.norm[0] + t.norm[1]);
                let taylor = taylor_sum(&sizes, &s, len, m);
                2.0 * g * (taylor + frac / gamma(alpha + 1.0))
            };
            if let Some(c) = &caps {
                d.dominator = Some(with(c));
            }
            let e = uniform_error(f, cfg, opts)?;
            let empirical = record_sup(&mut d, e);
            (with(&sup), with(&inflate(&sup)), empirical)
        }
    };
    d.uncertainty = (inflated - rhs).max(0.0);
    Ok(d.finish(rhs, empirical))
}

fn factorial(j: u32) -> f64 {
    (1..=j).map(f64::from).product()
}

/// Outcome of a numerically checked vanishing condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisStatus {
    Satisfied,
    Violated,
    Unverified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IteratedVariant {
    T37,
    C38,
}

/// The `δ` that turns the second bracket's prefactor into 1.
pub fn c38_delta(alpha: f64, n_bar: u32) -> f64 {
    1.0 / ((f64::from(n_bar) + 1.0) * alpha + 1.0)
}

/// Right-hand side of the iterated-derivative estimate given the combined
/// modulus `ω₁(D_x^{(n̄+1)α} f, δ)`.
pub fn t37_rhs(omega: f64, alpha: f64, n_bar: u32, delta: f64, n: u64, m: u32, len: f64) -> f64 {
    let q = (f64::from(n_bar) + 1.0) * alpha;
    let tail = tail_factor((n as f64).powf(1.0 - alpha), m) / f64::from(4 * m);
    let nf = n as f64;
    let first = nf.powf(-q * alpha) + len.powf(q) * tail;
    let second = (nf.powf(-alpha * (q + 1.0)) + len.powf(q + 1.0) * tail) / (delta * (q + 1.0));
    2.0 * growth(m) * omega / gamma(q + 1.0) * (first + second)
}

/// Estimate through `n̄+1` composed order-`α` derivatives at `x`, for scalar
/// `f`. The vanishing of the iterates of orders `2α, …, (n̄+1)α` at `x` is
/// checked on both sides from the tables.
#[allow(clippy::too_many_arguments)]
pub fn bound_t37_c38(
    f: &FunctionRef,
    cfg: &OperatorConfig,
    frac_alpha: f64,
    n_bar: u32,
    x: f64,
    delta: Option<f64>,
    variant: IteratedVariant,
    opts: &CertifyOptions,
) -> Result<BoundReport> {
    ensure_finite(x, "x")?;
    cfg.check_point(x)?;
    let (m, n) = (cfg.m(), cfg.n());
    let id = match variant {
        IteratedVariant::T37 => TheoremId::T37,
        IteratedVariant::C38 => TheoremId::C38,
    };
    let delta = match variant {
        IteratedVariant::C38 => c38_delta(frac_alpha, n_bar),
        IteratedVariant::T37 => delta.unwrap_or((n as f64).powf(-frac_alpha)),
    };
    let mut params = BoundParams::new(f, n, m, cfg.a(), cfg.b());
    params.alpha = Some(frac_alpha);
    params.n_bar = Some(n_bar);
    params.delta = Some(delta);
    params.x = Some(x);
    let mut d = Draft::new(id, params);
    if n_bar == 0 {
        return Err(Error::InvalidParameter("n_bar must be at least 1".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if f.dim() != 1 {
        d.violated("the iterated estimate is for scalar functions");
    }
    if !f.smoothness().at_least(1) {
        d.violated(format!("{} is not of class C^1", f.name()));
    }
    check_rate(&mut d, frac_alpha, n, "alpha");
    let empirical = a_n_deviation(f.as_ref(), x, cfg)?.norm(NORM);
    if !d.hypotheses_ok {
        return Ok(d.finish(f64::INFINITY, empirical));
    }
    let on = interval_of(cfg)?;
    let top = TwoSidedTables::new(f, x, frac_alpha, n_bar + 1, &on, opts.table_panels)?;
    let mut status = HypothesisStatus::Satisfied;
    for i in 2..=n_bar + 1 {
        let t = if i == n_bar + 1 {
            top.clone()
        } else {
            TwoSidedTables::new(f, x, frac_alpha, i, &on, opts.table_panels)?
        };
        for side in [&t.left, &t.right] {
            if side.positions.len() < 2 {
                continue;
            }
            let probes: Vec<f64> = side.near_anchor.iter().map(|v: &VectorValue| v.norm(NORM)).collect();
            let tol = opts.hypothesis_tolerance;
            let s = if probes.iter().all(|&p| p <= tol) {
                HypothesisStatus::Satisfied
            } else if probes.iter().all(|&p| p > tol) {
                HypothesisStatus::Violated
            } else {
                HypothesisStatus::Unverified
            };
            status = match (status, s) {
                (HypothesisStatus::Violated, _) | (_, HypothesisStatus::Violated) => HypothesisStatus::Violated,
                (HypothesisStatus::Unverified, _) | (_, HypothesisStatus::Unverified) => HypothesisStatus::Unverified,
                _ => HypothesisStatus::Satisfied,
            };
        }
    }
    let omega = top.modulus(delta, NORM);
    let rhs = t37_rhs(omega, frac_alpha, n_bar, delta, n, m, on.len());
    d.uncertainty = t37_rhs(omega + 2.0 * top.disagreement(), frac_alpha, n_bar, delta, n, m, on.len()) - rhs;
    d.notes.push(format!("iterate vanishing at x: {}", serde_plain(status)));
    if status != HypothesisStatus::Satisfied {
        // The bound is still evaluated so that it can be inspected.
        d.hypotheses_ok = false;
        let mut r = d.finish(rhs, empirical);
        r.rhs = rhs;
        r.slack = rhs - empirical;
        return Ok(r);
    }
    Ok(d.finish(rhs, empirical))
}

fn serde_plain(s: HypothesisStatus) -> &'static str {
    match s {
        HypothesisStatus::Satisfied => "satisfied",
        HypothesisStatus::Violated => "violated",
        HypothesisStatus::Unverified => "unverified",
    }
}
