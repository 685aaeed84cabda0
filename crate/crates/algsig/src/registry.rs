//! Builtin test functions with closed-form derivatives, moduli of continuity
//! and sup-norms, plus tabulated and combined functions.
//!
//! Builtins are addressed by name, optionally with comma-separated
//! parameters after a colon: `sin`, `abs:0.5`, `power:0,1.5`,
//! `constant:1,-2`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::{check_domain, Domain, FunctionRef, Interval, NormKind, Smoothness, VectorFunction, VectorValue};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] =
    &["identity", "affine", "abs", "sin", "cos", "exp", "sqrt", "runge", "constant", "sincos", "power"];

/// Resolves a builtin by name.
pub fn builtin(spec: &str) -> Result<FunctionRef> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), parse_args(a)?),
        None => (spec.trim(), Vec::new()),
    };
    let arity = |lo: usize, hi: usize| -> Result<()> {
        if args.len() < lo || args.len() > hi {
            return Err(Error::InvalidParameter(format!("`{name}` takes {lo}..={hi} parameters, got {}", args.len())));
        }
        Ok(())
    };
    let f: FunctionRef = match name {
        "identity" => {
            arity(0, 0)?;
            Arc::new(Affine::new(1.0, 0.0))
        }
        "affine" => {
            arity(0, 2)?;
            Arc::new(Affine::new(*args.first().unwrap_or(&2.0), *args.get(1).unwrap_or(&1.0)))
        }
        "abs" => {
            arity(0, 1)?;
            Arc::new(AbsShift::new(*args.first().unwrap_or(&0.5)))
        }
        "sin" => {
            arity(0, 0)?;
            Arc::new(Sine::new(0))
        }
        "cos" => {
            arity(0, 0)?;
            Arc::new(Sine::new(1))
        }
        "exp" => {
            arity(0, 0)?;
            Arc::new(Exp)
        }
        "sqrt" => {
            arity(0, 1)?;
            Arc::new(Power::new(1.0, *args.first().unwrap_or(&0.0), 0.5)?)
        }
        "runge" => {
            arity(0, 0)?;
            Arc::new(Runge)
        }
        "constant" => {
            let c = if args.is_empty() { vec![1.0] } else { args.clone() };
            Arc::new(Constant::new(VectorValue::new(&c)?))
        }
        "sincos" => {
            arity(0, 0)?;
            Arc::new(SinCos::new(0))
        }
        "power" => {
            arity(0, 2)?;
            Arc::new(Power::new(1.0, *args.first().unwrap_or(&0.0), *args.get(1).unwrap_or(&1.5))?)
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown function `{name}`; builtins are {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}

fn parse_args(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v: f64 =
                t.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad function parameter `{t}`")))?;
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("function parameter `{t}` is not finite")));
            }
            Ok(v)
        })
        .collect()
}

fn window(delta: f64, on: &Interval) -> f64 {
    delta.min(on.len())
}

/// Exact `ω₁(g, δ)` of a continuous scalar `g` on `[s, t]`.
///
/// The window oscillation `u ↦ max g − min g` over `[u, u+ℓ]` is piecewise
/// smooth; its maxima sit at the ends of the admissible range, where a
/// critical point enters or leaves the window, or at the `extra` starts
/// where `g′(u) = g′(u+ℓ)`.
fn window_modulus(g: impl Fn(f64) -> f64, crit: &[f64], extra: &[f64], on: &Interval, delta: f64) -> f64 {
    let (s, t) = (on.a(), on.b());
    let l = window(delta, on);
    let osc = |u: f64| {
        let u = u.clamp(s, t - l);
        let v = u + l;
        let (gu, gv) = (g(u), g(v));
        let (mut hi, mut lo) = (gu.max(gv), gu.min(gv));
        for &c in crit.iter().filter(|&&c| c >= u && c <= v) {
            let gc = g(c);
            hi = hi.max(gc);
            lo = lo.min(gc);
        }
        hi - lo
    };
    let mut best = osc(s).max(osc(t - l));
    for &c in crit {
        best = best.max(osc(c)).max(osc(c - l));
    }
    for &u in extra {
        best = best.max(osc(u));
    }
    best
}

/// `slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    slope: f64,
    intercept: f64,
}

impl Affine {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }
}

impl VectorFunction for Affine {
    fn name(&self) -> String {
        if self.slope == 1.0 && self.intercept == 0.0 {
            "identity".into()
        } else {
            format!("affine:{},{}", self.slope, self.intercept)
        }
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        Ok(VectorValue::scalar(self.slope.mul_add(x, self.intercept)))
    }
    fn analytic_derivative(&self, order: u32) -> Option<FunctionRef> {
        let c = if order == 1 { self.slope } else { 0.0 };
        Some(Arc::new(Constant::new(VectorValue::scalar(c))))
    }
    fn analytic_modulus(&self, delta: f64, on: &Interval, _norm: NormKind) -> Option<f64> {
        Some(self.slope.abs() * window(delta, on))
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        match on {
            Some(i) => {
                Some((self.slope * i.a() + self.intercept).abs().max((self.slope * i.b() + self.intercept).abs()))
            }
            None => (self.slope == 0.0).then(|| self.intercept.abs()),
        }
    }
}

/// A constant vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    value: VectorValue,
}

impl Constant {
    pub fn new(value: VectorValue) -> Self {
        Self { value }
    }
}

impl VectorFunction for Constant {
    fn name(&self) -> String {
        let parts: Vec<String> = self.value.components().iter().map(|c| c.to_string()).collect();
        format!("constant:{}", parts.join(","))
    }
    fn dim(&self) -> usize {
        self.value.dim()
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        Ok(self.value.clone())
    }
    fn analytic_derivative(&self, _order: u32) -> Option<FunctionRef> {
        Some(Arc::new(Constant::new(VectorValue::zeros(self.dim()))))
    }
    fn analytic_modulus(&self, _delta: f64, _on: &Interval, _norm: NormKind) -> Option<f64> {
        Some(0.0)
    }
    fn analytic_sup_norm(&self, _on: Option<&Interval>, norm: NormKind) -> Option<f64> {
        Some(self.value.norm(norm))
    }
}

/// `|x − c|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsShift {
    center: f64,
}

impl AbsShift {
    pub fn new(center: f64) -> Self {
        Self { center }
    }
}

impl VectorFunction for AbsShift {
    fn name(&self) -> String {
        format!("abs:{}", self.center)
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        Ok(VectorValue::scalar((x - self.center).abs()))
    }
    fn analytic_modulus(&self, delta: f64, on: &Interval, _norm: NormKind) -> Option<f64> {
        let l = window(delta, on);
        let c = self.center;
        if on.contains(c) {
            Some(l.min((on.b() - c).max(c - on.a())))
        } else {
            Some(l)
        }
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        on.map(|i| (i.a() - self.center).abs().max((i.b() - self.center).abs()))
    }
}

/// `sin(x + kπ/2)`, i.e. the `k`-th derivative of `sin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sine {
    shift: u32,
}

impl Sine {
    pub fn new(shift: u32) -> Self {
        Self { shift: shift % 4 }
    }

    fn phase(&self) -> f64 {
        f64::from(self.shift) * FRAC_PI_2
    }

    fn value(&self, x: f64) -> f64 {
        match self.shift {
            0 => x.sin(),
            1 => x.cos(),
            2 => -x.sin(),
            _ => -x.cos(),
        }
    }

    /// Points `x` in `[lo, hi]` with `x + phase ∈ offset + πℤ`.
    fn lattice(&self, offset: f64, lo: f64, hi: f64) -> Vec<f64> {
        let base = offset - self.phase();
        let j0 = ((lo - base) / PI).floor() as i64;
        let j1 = ((hi - base) / PI).ceil() as i64;
        (j0..=j1).map(|j| base + j as f64 * PI).filter(|x| (lo..=hi).contains(x)).collect()
    }
}

impl VectorFunction for Sine {
    fn name(&self) -> String {
        ["sin", "cos", "-sin", "-cos"][self.shift as usize].into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        Ok(VectorValue::scalar(self.value(x)))
    }
    fn analytic_derivative(&self, order: u32) -> Option<FunctionRef> {
        Some(Arc::new(Sine::new(self.shift + order % 4)))
    }
    fn analytic_modulus(&self, delta: f64, on: &Interval, _norm: NormKind) -> Option<f64> {
        let l = window(delta, on);
        let crit = self.lattice(FRAC_PI_2, on.a(), on.b());
        // Steepest windows are centred on zeros of the function.
        let extra: Vec<f64> = self.lattice(0.0, on.a() - l, on.b() + l).into_iter().map(|z| z - 0.5 * l).collect();
        Some(window_modulus(|x| self.value(x), &crit, &extra, on, delta))
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        let Some(i) = on else { return Some(1.0) };
        let mut best = self.value(i.a()).abs().max(self.value(i.b()).abs());
        if !self.lattice(FRAC_PI_2, i.a(), i.b()).is_empty() {
            best = 1.0;
        }
        Some(best)
    }
}

/// `e^x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp;

impl VectorFunction for Exp {
    fn name(&self) -> String {
        "exp".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        let v = x.exp();
        if !v.is_finite() {
            return Err(Error::Domain(format!("exp({x}) overflows")));
        }
        Ok(VectorValue::scalar(v))
    }
    fn analytic_derivative(&self, _order: u32) -> Option<FunctionRef> {
        Some(Arc::new(Exp))
    }
    fn analytic_modulus(&self, delta: f64, on: &Interval, _norm: NormKind) -> Option<f64> {
        Some(-on.b().exp() * (-window(delta, on)).exp_m1())
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        on.map(|i| i.b().exp())
    }
}

/// `1/(1 + 25x²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Runge;

impl Runge {
    /// `max |g′| = 15√3/8`, attained at `x = ±1/(5√3)`.
    pub const LIPSCHITZ: f64 = 3.247_595_264_191_645;

    fn value(x: f64) -> f64 {
        1.0 / (1.0 + 25.0 * x * x)
    }
}

impl VectorFunction for Runge {
    fn name(&self) -> String {
        "runge".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        Ok(VectorValue::scalar(Self::value(x)))
    }
    /// Upper value `min(Lδ, osc)`: the Lipschitz bound capped by the total
    /// oscillation on the interval.
    fn analytic_modulus(&self, delta: f64, on: &Interval, _norm: NormKind) -> Option<f64> {
        let top = Self::value(0.0f64.clamp(on.a(), on.b()));
        let bottom = Self::value(on.a()).min(Self::value(on.b()));
        Some((Self::LIPSCHITZ * window(delta, on)).min(top - bottom))
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        Some(match on {
            Some(i) => Self::value(0.0f64.clamp(i.a(), i.b())),
            None => 1.0,
        })
    }
}

/// `coef·(x − c)^p` on `[c, ∞)`, `p ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    coef: f64,
    center: f64,
    p: f64,
}

impl Power {
    pub fn new(coef: f64, center: f64, p: f64) -> Result<Self> {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("power exponent must be nonnegative, got {p}")));
        }
        Ok(Self { coef, center, p })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    fn value(&self, x: f64) -> f64 {
        let u = x - self.center;
        if self.p == 0.0 {
            self.coef
        } else if u == 0.0 {
            0.0
        } else {
            self.coef * u.powf(self.p)
        }
    }

    fn is_integer(&self) -> bool {
        self.p.fract() == 0.0
    }
}

impl VectorFunction for Power {
    fn name(&self) -> String {
        if self.coef == 1.0 && self.p == 0.5 {
            return format!("sqrt:{}", self.center);
        }
        if self.coef == 1.0 {
            return format!("power:{},{}", self.center, self.p);
        }
        format!("{}*power:{},{}", self.coef, self.center, self.p)
    }
    fn dim(&self) -> usize {
        1
    }
    fn domain(&self) -> Domain {
        Domain::From(self.center)
    }
    fn smoothness(&self) -> Smoothness {
        if self.is_integer() {
            Smoothness::Infinite
        } else {
            Smoothness::C(self.p.floor() as u32)
        }
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        Ok(VectorValue::scalar(self.value(x)))
    }
    fn analytic_derivative(&self, order: u32) -> Option<FunctionRef> {
        let k = f64::from(order);
        if self.is_integer() && k > self.p {
            return Some(Arc::new(Power::new(0.0, self.center, 0.0).ok()?));
        }
        if k > self.p {
            return None;
        }
        let falling: f64 = (0..order).map(|i| self.p - f64::from(i)).product();
        Some(Arc::new(Power::new(self.coef * falling, self.center, self.p - k).ok()?))
    }
    fn analytic_modulus(&self, delta: f64, on: &Interval, _norm: NormKind) -> Option<f64> {
        if !self.domain().covers(on) {
            return None;
        }
        let l = window(delta, on);
        let g = |x: f64| self.value(x);
        // Monotone: convex (p ≥ 1) increments peak at the right end,
        // concave (p < 1) at the left.
        let inc = if self.p >= 1.0 { g(on.b()) - g(on.b() - l) } else { g(on.a() + l) - g(on.a()) };
        Some(inc.abs())
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        if self.p == 0.0 {
            return Some(self.coef.abs());
        }
        let i = on?;
        if !self.domain().covers(i) {
            return None;
        }
        Some(self.value(i.a()).abs().max(self.value(i.b()).abs()))
    }
}

/// `(sin(x + kπ/2), cos(x + kπ/2))` in `ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCos {
    shift: u32,
}

impl SinCos {
    pub fn new(shift: u32) -> Self {
        Self { shift: shift % 4 }
    }
}

impl VectorFunction for SinCos {
    fn name(&self) -> String {
        if self.shift == 0 {
            "sincos".into()
        } else {
            format!("d{}[sincos]", self.shift)
        }
    }
    fn dim(&self) -> usize {
        2
    }
    fn domain(&self) -> Domain {
        Domain::WholeLine
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        let (s, c) = (x + f64::from(self.shift) * FRAC_PI_2).sin_cos();
        Ok(VectorValue::from_components(smallvec::smallvec![s, c]))
    }
    fn analytic_derivative(&self, order: u32) -> Option<FunctionRef> {
        Some(Arc::new(SinCos::new(self.shift + order % 4)))
    }
    /// Exact in the Euclidean norm (`2 sin(h/2)` for chord length `h ≤ π`);
    /// the sup and one-norm values are the norm-equivalence upper values.
    fn analytic_modulus(&self, delta: f64, on: &Interval, norm: NormKind) -> Option<f64> {
        let chord = 2.0 * (0.5 * window(delta, on).min(PI)).sin();
        Some(match norm {
            NormKind::Euclidean | NormKind::Sup => chord,
            NormKind::One => std::f64::consts::SQRT_2 * chord,
        })
    }
    fn analytic_sup_norm(&self, _on: Option<&Interval>, norm: NormKind) -> Option<f64> {
        Some(match norm {
            NormKind::Euclidean | NormKind::Sup => 1.0,
            NormKind::One => std::f64::consts::SQRT_2,
        })
    }
}

/// Piecewise-linear interpolant through samples `(x_i, v_i)`.
///
/// Carries no analytic modulus: every estimate taken from it is a grid
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    name: String,
    xs: Vec<f64>,
    values: Vec<VectorValue>,
}

impl Tabulated {
    pub fn new(name: impl Into<String>, xs: Vec<f64>, values: Vec<VectorValue>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "tabulated function needs at least 2 samples with one value each (got {} x, {} values)",
                xs.len(),
                values.len()
            )));
        }
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("sample abscissae must be finite and strictly increasing".into()));
        }
        let d = values[0].dim();
        if values.iter().any(|v| v.dim() != d) {
            return Err(Error::InvalidParameter("sample values differ in dimension".into()));
        }
        Ok(Self { name: name.into(), xs, values })
    }
}

impl VectorFunction for Tabulated {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.values[0].dim()
    }
    fn domain(&self) -> Domain {
        Domain::Interval(Interval::new(self.xs[0], *self.xs.last().unwrap()).expect("validated"))
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        let i = self.xs.partition_point(|&t| t <= x).clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let w = (x - x0) / (x1 - x0);
        let (v0, v1) = (&self.values[i - 1], &self.values[i]);
        Ok(VectorValue::from_components(
            v0.components().iter().zip(v1.components()).map(|(a, b)| a + w * (b - a)).collect(),
        ))
    }
}

/// `Σ c_i f_i`.
#[derive(Debug, Clone)]
pub struct Combination {
    terms: Vec<(f64, FunctionRef)>,
    domain: Domain,
}

impl Combination {
    pub fn new(terms: Vec<(f64, FunctionRef)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidParameter("empty combination".into()));
        };
        let d = first.dim();
        if terms.iter().any(|(c, f)| f.dim() != d || !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "combination terms must share a dimension and have finite weights".into(),
            ));
        }
        let mut domain = first.domain();
        for (_, f) in &terms[1..] {
            domain = intersect(domain, f.domain())
                .ok_or_else(|| Error::InvalidParameter("combination terms have disjoint domains".into()))?;
        }
        Ok(Self { terms, domain })
    }
}

fn intersect(p: Domain, q: Domain) -> Option<Domain> {
    use Domain::*;
    let interval = |a: f64, b: f64| crate::vector::Interval::new(a, b).ok().map(Domain::Interval);
    match (p, q) {
        (WholeLine, d) | (d, WholeLine) => Some(d),
        (From(s), From(t)) => Some(From(s.max(t))),
        (From(s), Interval(i)) | (Interval(i), From(s)) => interval(i.a().max(s), i.b()),
        (Interval(i), Interval(j)) => interval(i.a().max(j.a()), i.b().min(j.b())),
    }
}

impl VectorFunction for Combination {
    fn name(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(c, f)| format!("{c}*{}", f.name())).collect();
        parts.join(" + ")
    }
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn smoothness(&self) -> Smoothness {
        self.terms.iter().map(|(_, f)| f.smoothness()).fold(Smoothness::Infinite, |acc, s| match (acc, s) {
            (Smoothness::Infinite, s) => s,
            (a, Smoothness::Infinite) => a,
            (Smoothness::C(a), Smoothness::C(b)) => Smoothness::C(a.min(b)),
        })
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        let mut acc = vec![0.0; self.dim()];
        for (c, f) in &self.terms {
            for (a, v) in acc.iter_mut().zip(f.eval(x)?.components()) {
                *a += c * v;
            }
        }
        Ok(VectorValue::from_components(acc.into_iter().collect()))
    }
    fn analytic_derivative(&self, order: u32) -> Option<FunctionRef> {
        let terms = self
            .terms
            .iter()
            .map(|(c, f)| f.analytic_derivative(order).map(|d| (*c, d)))
            .collect::<Option<Vec<_>>>()?;
        Some(Arc::new(Combination::new(terms).ok()?))
    }
    /// Triangle-inequality upper value `Σ |c_i| ω₁(f_i, δ)`.
    fn analytic_modulus(&self, delta: f64, on: &Interval, norm: NormKind) -> Option<f64> {
        self.terms.iter().map(|(c, f)| f.analytic_modulus(delta, on, norm).map(|w| c.abs() * w)).sum()
    }
    fn analytic_sup_norm(&self, on: Option<&Interval>, norm: NormKind) -> Option<f64> {
        self.terms.iter().map(|(c, f)| f.analytic_sup_norm(on, norm).map(|s| c.abs() * s)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{derivative, grid_modulus, grid_sup_norm, modulus_of_continuity, sup_norm_estimate};

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn brute_modulus(f: &dyn VectorFunction, on: &Interval, delta: f64, points: usize) -> f64 {
        let values: Vec<VectorValue> = on.grid(points).map(|x| f.eval(x).unwrap()).collect();
        grid_modulus(&values, on.step(points), delta, NormKind::Euclidean)
    }

    #[test]
    fn resolves_names() {
        for name in BUILTIN_NAMES {
            let f = builtin(name).unwrap();
            assert!(f.dim() >= 1);
        }
        assert_eq!(builtin("abs:0.25").unwrap().eval(1.0).unwrap().as_scalar(), Some(0.75));
        assert_eq!(builtin("constant:1,-2").unwrap().dim(), 2);
        assert!(matches!(builtin("tanh"), Err(Error::InvalidParameter(_))));
        assert!(builtin("sin:3").is_err());
        assert!(builtin("power:0,x").is_err());
    }

    #[test]
    fn spec_examples() {
        let id = builtin("identity").unwrap();
        let m = modulus_of_continuity(id.as_ref(), 0.1, &iv(0.0, 1.0), 1001, NormKind::Sup).unwrap();
        assert!(m.is_analytic && (m.lower - 0.1).abs() < 1e-15);
        let abs = builtin("abs:0.5").unwrap();
        let m = modulus_of_continuity(abs.as_ref(), 0.2, &iv(0.0, 1.0), 1001, NormKind::Sup).unwrap();
        assert!((m.lower - 0.2).abs() < 1e-15);
        assert_eq!(sup_norm_estimate(id.as_ref(), &iv(0.0, 1.0), 1001, NormKind::Sup).unwrap().value, 1.0);
        let g = grid_sup_norm(builtin("sin").unwrap().as_ref(), &iv(0.0, PI), 10001, NormKind::Sup).unwrap();
        assert!((g - 1.0).abs() < 1e-7);
        let sqrt = builtin("sqrt").unwrap();
        let w = sqrt.analytic_modulus(0.01, &iv(0.0, 1.0), NormKind::Sup).unwrap();
        assert!((w - 0.1).abs() < 1e-15);
        let grid = brute_modulus(sqrt.as_ref(), &iv(0.0, 1.0), 0.01, 10_001);
        assert!((grid - 0.1).abs() < 2e-3);
    }

    #[test]
    fn analytic_moduli_dominate_and_match_grids() {
        let cases: Vec<(FunctionRef, Interval)> = vec![
            (builtin("sin").unwrap(), iv(0.0, 1.0)),
            (builtin("sin").unwrap(), iv(-PI, PI)),
            (builtin("cos").unwrap(), iv(-0.3, 4.0)),
            (Arc::new(Sine::new(3)), iv(1.0, 9.0)),
            (builtin("exp").unwrap(), iv(-1.0, 2.0)),
            (builtin("abs:0.3").unwrap(), iv(0.0, 1.0)),
            (builtin("runge").unwrap(), iv(-1.0, 1.0)),
            (builtin("power:0,1.5").unwrap(), iv(0.0, 1.0)),
            (builtin("sqrt:-1").unwrap(), iv(-1.0, 2.0)),
            (builtin("sincos").unwrap(), iv(0.0, 5.0)),
        ];
        for (f, on) in cases {
            for delta in [0.001, 0.05, 0.3, 1.7, 4.0, 20.0] {
                let exact = f.analytic_modulus(delta, &on, NormKind::Euclidean).unwrap();
                let points = if f.dim() == 1 { 20_001 } else { 1_001 };
                let grid = brute_modulus(f.as_ref(), &on, delta, points);
                assert!(grid <= exact * (1.0 + 1e-12) + 1e-14, "{} δ={delta}: grid {grid} > {exact}", f.name());
                if f.name() != "runge" && !f.name().starts_with("sqrt") {
                    let slack = 2e-3 * exact + 10.0 * on.step(points);
                    assert!(exact - grid <= slack, "{} δ={delta}: {exact} vs {grid}", f.name());
                }
            }
        }
    }

    #[test]
    fn sine_modulus_spot_values() {
        let w = Sine::new(0).analytic_modulus(0.1, &iv(-PI, PI), NormKind::Sup).unwrap();
        assert!((w - 2.0 * 0.05f64.sin()).abs() < 1e-16);
        let w = Sine::new(0).analytic_modulus(0.1, &iv(0.0, 1.0), NormKind::Sup).unwrap();
        assert!((w - 0.1f64.sin()).abs() < 1e-16);
        let w = Sine::new(0).analytic_modulus(7.0, &iv(0.0, 10.0), NormKind::Sup).unwrap();
        assert_eq!(w, 2.0);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let h = 1e-5;
        for name in ["sin", "exp", "identity", "power:0,2.5", "power:0,1.5", "sincos"] {
            let f = builtin(name).unwrap();
            let d = f.analytic_derivative(1).unwrap();
            for x in [0.3, 0.7, 1.9] {
                let fd = f.eval(x + h).unwrap().sub(&f.eval(x - h).unwrap()).scale(0.5 / h);
                let an = d.eval(x).unwrap();
                let err = fd.sub(&an).norm(NormKind::Sup);
                assert!(err <= 1e-5 * an.norm(NormKind::Sup).max(1.0), "{name} at {x}");
            }
        }
    }

    #[test]
    fn derivative_fallbacks() {
        let sq = Arc::new(Power::new(1.0, 0.0, 2.0).unwrap()) as FunctionRef;
        assert_eq!(derivative(&sq, 1).unwrap().eval(3.0).unwrap().as_scalar(), Some(6.0));
        let runge = builtin("runge").unwrap();
        let d2 = derivative(&runge, 2).unwrap();
        // g″(0) = −50.
        assert!((d2.eval(0.0).unwrap().as_scalar().unwrap() + 50.0).abs() < 1e-3);
        let d1 = derivative(&runge, 1).unwrap();
        let exact = |x: f64| -50.0 * x / (1.0 + 25.0 * x * x).powi(2);
        assert!((d1.eval(0.2).unwrap().as_scalar().unwrap() - exact(0.2)).abs() < 1e-8);
        assert!(matches!(derivative(&runge, 5), Err(Error::Capability(_))));
        let c = builtin("constant:2,3").unwrap();
        assert_eq!(derivative(&c, 3).unwrap().eval(1.0).unwrap(), VectorValue::zeros(2));
        // Near a domain edge the stencil turns one-sided.
        let tab = Tabulated::new(
            "t",
            vec![0.0, 1.0, 2.0],
            vec![VectorValue::scalar(0.0), VectorValue::scalar(1.0), VectorValue::scalar(4.0)],
        )
        .unwrap();
        let tab: FunctionRef = Arc::new(tab);
        let d = derivative(&tab, 1).unwrap();
        assert!((d.eval(0.0).unwrap().as_scalar().unwrap() - 1.0).abs() < 1e-6);
        let wrapped: FunctionRef =
            Arc::new(Combination::new(vec![(1.0, builtin("sin").unwrap()), (0.0, tab.clone())]).unwrap());
        // Second derivative of sin at 0 through the numerical path.
        let fd2 = derivative(&(Arc::new(NoDerivative(builtin("sin").unwrap())) as FunctionRef), 2).unwrap();
        assert!(fd2.eval(0.0).unwrap().as_scalar().unwrap().abs() < 1e-5);
        assert!(wrapped.analytic_derivative(1).is_none());
    }

    #[derive(Debug)]
    struct NoDerivative(FunctionRef);
    impl VectorFunction for NoDerivative {
        fn name(&self) -> String {
            self.0.name()
        }
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn domain(&self) -> Domain {
            self.0.domain()
        }
        fn eval(&self, x: f64) -> Result<VectorValue> {
            self.0.eval(x)
        }
    }

    #[test]
    fn power_family() {
        let p = Power::new(1.0, 0.0, 1.5).unwrap();
        assert_eq!(p.smoothness(), Smoothness::C(1));
        assert!(p.analytic_derivative(2).is_none());
        let d = p.analytic_derivative(1).unwrap();
        assert!((d.eval(0.25).unwrap().as_scalar().unwrap() - 0.75).abs() < 1e-15);
        let cube = Power::new(1.0, 0.0, 3.0).unwrap();
        assert_eq!(cube.analytic_derivative(4).unwrap().eval(2.0).unwrap().as_scalar(), Some(0.0));
        assert_eq!(cube.analytic_derivative(3).unwrap().eval(2.0).unwrap().as_scalar(), Some(6.0));
        assert!(p.eval(-0.1).is_err());
    }

    #[test]
    fn tabulated_interpolates() {
        let t = Tabulated::new(
            "tab",
            vec![0.0, 1.0, 3.0],
            vec![
                VectorValue::new(&[0.0, 1.0]).unwrap(),
                VectorValue::new(&[2.0, 1.0]).unwrap(),
                VectorValue::new(&[2.0, -3.0]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(t.eval(0.5).unwrap().components(), &[1.0, 1.0]);
        assert_eq!(t.eval(2.0).unwrap().components(), &[2.0, -1.0]);
        assert_eq!(t.eval(3.0).unwrap().components(), &[2.0, -3.0]);
        assert!(t.eval(3.5).is_err());
        assert!(t.analytic_modulus(0.1, &iv(0.0, 3.0), NormKind::Sup).is_none());
        assert!(Tabulated::new("bad", vec![0.0, 0.0], vec![VectorValue::scalar(1.0); 2]).is_err());
    }

    #[test]
    fn subadditive_moduli() {
        let on = iv(-1.0, 2.0);
        for name in ["sin", "exp", "abs:0.5", "runge", "sqrt:-1", "power:-1,1.5", "identity", "sincos"] {
            let f = builtin(name).unwrap();
            for (d1, d2) in [(0.01, 0.02), (0.1, 0.35), (0.7, 1.1), (1.5, 2.0)] {
                let w = |d| f.analytic_modulus(d, &on, NormKind::Euclidean).unwrap();
                assert!(w(d1 + d2) <= w(d1) + w(d2) + 1e-15, "{name}");
                assert!(w(d1) <= w(d1 + d2) + 1e-15, "{name}");
            }
        }
    }

    #[test]
    fn combination_bounds() {
        let f = Combination::new(vec![(2.0, builtin("sin").unwrap()), (-1.0, builtin("identity").unwrap())]).unwrap();
        let on = iv(0.0, 1.0);
        let w = f.analytic_modulus(0.1, &on, NormKind::Sup).unwrap();
        assert!(brute_modulus(&f, &on, 0.1, 10_001) <= w);
        assert!((f.eval(0.5).unwrap().as_scalar().unwrap() - (2.0 * 0.5f64.sin() - 0.5)).abs() < 1e-15);
        assert!(Combination::new(vec![]).is_err());
    }
}
