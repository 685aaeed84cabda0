//! Vector-valued functions `f: [a,b] → ℝ^d` (or `ℝ → ℝ^d`) with a selectable
//! norm, plus grid estimates of sup-norms and moduli of continuity.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{ensure_finite, Error, Result};

type Components = SmallVec<[f64; 4]>;

/// A point of `ℝ^d`, `d ≥ 1`, with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VectorValue(Components);

impl VectorValue {
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("vector dimension must be at least 1".into()));
        }
        for (i, c) in components.iter().enumerate() {
            ensure_finite(*c, &format!("component {i}"))?;
        }
        Ok(Self(components.into()))
    }

    pub fn scalar(x: f64) -> Self {
        Self(smallvec::smallvec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        Self(smallvec::smallvec![0.0; dim.max(1)])
    }

    pub(crate) fn from_components(c: Components) -> Self {
        debug_assert!(!c.is_empty());
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// The single component of a `d = 1` value.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.0.len() == 1).then(|| self.0[0])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        norm(self, kind)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |x, y| x - y)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |x, y| x + y)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| c * x).collect())
    }

    fn zip(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self(self.0.iter().zip(other.0.iter()).map(|(x, y)| op(*x, *y)).collect())
    }
}

impl TryFrom<Vec<f64>> for VectorValue {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<VectorValue> for Vec<f64> {
    fn from(v: VectorValue) -> Self {
        v.0.into_vec()
    }
}

impl fmt::Display for VectorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(x) = self.as_scalar() {
            return write!(f, "{x}");
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Sup,
    #[default]
    Euclidean,
    One,
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "max" | "inf" => Ok(Self::Sup),
            "euclidean" | "l2" | "2" => Ok(Self::Euclidean),
            "one" | "l1" | "1" => Ok(Self::One),
            _ => Err(Error::InvalidParameter(format!("unknown norm `{s}`"))),
        }
    }
}

pub fn norm(v: &VectorValue, kind: NormKind) -> f64 {
    let c = v.components();
    match kind {
        NormKind::Sup => c.iter().fold(0.0, |acc, x| acc.max(x.abs())),
        NormKind::One => c.iter().map(|x| x.abs()).sum(),
        NormKind::Euclidean => match c {
            [x] => x.abs(),
            [x, y] => x.hypot(*y),
            _ => {
                // Scaled to avoid overflow in the squares.
                let s = c.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
                if s == 0.0 {
                    0.0
                } else {
                    s * c.iter().map(|x| (x / s) * (x / s)).sum::<f64>().sqrt()
                }
            }
        },
    }
}

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_finite(a, "interval start")?;
        ensure_finite(b, "interval end")?;
        if a >= b {
            return Err(Error::InvalidParameter(format!("need a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn len(&self) -> f64 {
        self.b - self.a
    }
    pub fn contains(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }

    /// `points` equispaced nodes, first `a`, last exactly `b`.
    pub fn grid(&self, points: usize) -> impl ExactSizeIterator<Item = f64> + Clone {
        let (a, b) = (self.a, self.b);
        let last = points.saturating_sub(1).max(1);
        let h = (b - a) / last as f64;
        (0..points).map(move |i| if i == last { b } else { a + i as f64 * h })
    }

    pub fn step(&self, points: usize) -> f64 {
        self.len() / (points.saturating_sub(1).max(1)) as f64
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Interval(Interval),
    /// `[start, ∞)`.
    From(f64),
    WholeLine,
}

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Domain::Interval(i) => i.contains(x),
            Domain::From(s) => x >= *s,
            Domain::WholeLine => x.is_finite(),
        }
    }

    pub fn covers(&self, on: &Interval) -> bool {
        self.contains(on.a()) && self.contains(on.b())
    }

    pub fn is_whole_line(&self) -> bool {
        matches!(self, Domain::WholeLine)
    }
}

/// Classical differentiability class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C(u32),
    Infinite,
}

impl Smoothness {
    pub fn at_least(&self, order: u32) -> bool {
        match self {
            Smoothness::C(k) => *k >= order,
            Smoothness::Infinite => true,
        }
    }

    pub fn lowered(&self, by: u32) -> Smoothness {
        match self {
            Smoothness::C(k) => Smoothness::C(k.saturating_sub(by)),
            Smoothness::Infinite => Smoothness::Infinite,
        }
    }
}

pub type FunctionRef = Arc<dyn VectorFunction>;

/// An evaluable `f: D → ℝ^d`.
///
/// `analytic_modulus` and `analytic_sup_norm` return certified upper values
/// (exact where the closed form is available); they are what the bound
/// certificates consume.
pub trait VectorFunction: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn domain(&self) -> Domain;
    /// Evaluates at `x`; points outside the domain are a domain error.
    fn eval(&self, x: f64) -> Result<VectorValue>;

    fn smoothness(&self) -> Smoothness {
        Smoothness::C(0)
    }

    fn analytic_derivative(&self, _order: u32) -> Option<FunctionRef> {
        None
    }

    /// `ω₁(f, δ)` over `on`.
    fn analytic_modulus(&self, _delta: f64, _on: &Interval, _norm: NormKind) -> Option<f64> {
        None
    }

    /// `sup ‖f‖` over `on`, or over the whole domain when `on` is `None`.
    fn analytic_sup_norm(&self, _on: Option<&Interval>, _norm: NormKind) -> Option<f64> {
        None
    }
}

pub(crate) fn check_domain(f: &dyn VectorFunction, x: f64) -> Result<()> {
    ensure_finite(x, "x")?;
    if !f.domain().contains(x) {
        return Err(Error::Domain(format!("x = {x} outside the domain of {}", f.name())));
    }
    Ok(())
}

pub(crate) fn check_covers(f: &dyn VectorFunction, on: &Interval) -> Result<()> {
    if !f.domain().covers(on) {
        return Err(Error::Domain(format!("{} is not defined on all of {on}", f.name())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormEstimate {
    pub value: f64,
    pub is_analytic: bool,
}

/// `sup_{x ∈ on} ‖f(x)‖`: the declared value when `f` has one, otherwise the
/// maximum over `grid_points` equispaced nodes (a lower estimate).
pub fn sup_norm_estimate(
    f: &dyn VectorFunction,
    on: &Interval,
    grid_points: usize,
    kind: NormKind,
) -> Result<SupNormEstimate> {
    if let Some(v) = f.analytic_sup_norm(Some(on), kind) {
        return Ok(SupNormEstimate { value: v, is_analytic: true });
    }
    Ok(SupNormEstimate { value: grid_sup_norm(f, on, grid_points, kind)?, is_analytic: false })
}

pub(crate) fn grid_sup_norm(f: &dyn VectorFunction, on: &Interval, grid_points: usize, kind: NormKind) -> Result<f64> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
    }
    check_covers(f, on)?;
    let mut best: f64 = 0.0;
    for x in on.grid(grid_points) {
        best = best.max(f.eval(x)?.norm(kind));
    }
    Ok(best)
}

/// `ω₁(f, δ)` with provenance. A grid value is only a lower estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub lower: f64,
    pub is_analytic: bool,
}

pub fn modulus_of_continuity(
    f: &dyn VectorFunction,
    delta: f64,
    on: &Interval,
    grid_points: usize,
    kind: NormKind,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if let Some(v) = f.analytic_modulus(delta, on, kind) {
        return Ok(ModulusEstimate { delta, lower: v, is_analytic: true });
    }
    if grid_points < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
    }
    check_covers(f, on)?;
    let values = on.grid(grid_points).map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    Ok(ModulusEstimate { delta, lower: grid_modulus(&values, on.step(grid_points), delta, kind), is_analytic: false })
}

/// `max ‖v_j − v_i‖` over index pairs with `(j − i)·step ≤ δ`.
pub fn grid_modulus(values: &[VectorValue], step: f64, delta: f64, kind: NormKind) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let window = ((delta / step) * (1.0 + 1e-12)).floor().min((values.len() - 1) as f64) as usize;
    if window == 0 {
        return 0.0;
    }
    if values.iter().all(|v| v.dim() == 1) {
        let scalars: Vec<f64> = values.iter().map(|v| v.components()[0]).collect();
        return scalar_window_oscillation(&scalars, window);
    }
    let mut best: f64 = 0.0;
    for i in 0..values.len() {
        for j in (i + 1)..values.len().min(i + window + 1) {
            best = best.max(values[j].sub(&values[i]).norm(kind));
        }
    }
    best
}

/// Largest `max − min` over windows of `window + 1` consecutive samples,
/// via monotone deques.
pub(crate) fn scalar_window_oscillation(v: &[f64], window: usize) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for j in 0..v.len() {
        while maxq.back().is_some_and(|&i| v[i] <= v[j]) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i| v[i] >= v[j]) {
            minq.pop_back();
        }
        minq.push_back(j);
        let start = j.saturating_sub(window);
        while maxq.front().is_some_and(|&i| i < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i < start) {
            minq.pop_front();
        }
        best = best.max(v[maxq[0]] - v[minq[0]]);
    }
    best
}

/// Highest order the finite-difference fallback supports.
pub const MAX_FD_ORDER: u32 = 4;

/// `f^{(order)}`: the analytic derivative when `f` declares one, otherwise a
/// finite-difference evaluable (orders up to 4).
pub fn derivative(f: &FunctionRef, order: u32) -> Result<FunctionRef> {
    if order == 0 {
        return Ok(Arc::clone(f));
    }
    if let Some(d) = f.analytic_derivative(order) {
        return Ok(d);
    }
    if order > MAX_FD_ORDER {
        return Err(Error::Capability(format!(
            "{} has no analytic derivative of order {order}; finite differences stop at {MAX_FD_ORDER}",
            f.name()
        )));
    }
    Ok(Arc::new(FiniteDifference { inner: Arc::clone(f), order }))
}

/// Numerical derivative of `inner`.
///
/// Step `h = ε^{1/(order+2)}·max(1, |x|)`, which balances the `O(h²)`
/// truncation of a central stencil against the `ε/h^order` roundoff. Near a
/// domain edge the stencil is shifted inward and widened by one node to keep
/// second order.
#[derive(Debug, Clone)]
pub struct FiniteDifference {
    inner: FunctionRef,
    order: u32,
}

impl FiniteDifference {
    pub fn step(order: u32, x: f64) -> f64 {
        f64::EPSILON.powf(1.0 / f64::from(order + 2)) * x.abs().max(1.0)
    }

    fn stencil(&self, x: f64, h: f64) -> Vec<f64> {
        let half = (self.order as i32 + 1) / 2;
        let centered: Vec<f64> = (-half..=half).map(f64::from).collect();
        let domain = self.inner.domain();
        let fits = |offsets: &[f64]| offsets.iter().all(|o| domain.contains(x + o * h));
        if fits(&centered) {
            return centered;
        }
        let n = self.order as i32 + 2;
        let forward: Vec<f64> = (0..n).map(f64::from).collect();
        if fits(&forward) {
            return forward;
        }
        (0..n).map(|i| -f64::from(i)).collect()
    }
}

impl VectorFunction for FiniteDifference {
    fn name(&self) -> String {
        format!("d{}[{}]", self.order, self.inner.name())
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn domain(&self) -> Domain {
        self.inner.domain()
    }
    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness().lowered(self.order)
    }
    fn eval(&self, x: f64) -> Result<VectorValue> {
        check_domain(self, x)?;
        let h = Self::step(self.order, x);
        let offsets = self.stencil(x, h);
        let weights = fornberg_weights(&offsets, self.order as usize);
        let mut acc = vec![0.0; self.dim()];
        for (o, w) in offsets.iter().zip(&weights) {
            if *w == 0.0 {
                continue;
            }
            let v = self.inner.eval(x + o * h)?;
            for (a, c) in acc.iter_mut().zip(v.components()) {
                *a += w * c;
            }
        }
        let scale = h.powi(self.order as i32);
        Ok(VectorValue::from_components(acc.into_iter().map(|a| a / scale).collect()))
    }
}

/// Weights of the `order`-th derivative at 0 on the given nodes (unit spacing
/// units), by Fornberg's recursion.
pub(crate) fn fornberg_weights(nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let v = VectorValue::new(&[3.0, -4.0]).unwrap();
        assert_eq!(v.norm(NormKind::Euclidean), 5.0);
        assert_eq!(v.norm(NormKind::Sup), 4.0);
        assert_eq!(v.norm(NormKind::One), 7.0);
        let z = VectorValue::zeros(3);
        for k in [NormKind::Sup, NormKind::Euclidean, NormKind::One] {
            assert_eq!(z.norm(k), 0.0);
        }
        let w = VectorValue::new(&[1e200, 1e200, 1e200]).unwrap();
        assert!((w.norm(NormKind::Euclidean) / (1e200 * 3f64.sqrt()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vector_value_validation() {
        assert!(VectorValue::new(&[]).is_err());
        assert!(VectorValue::new(&[1.0, f64::NAN]).is_err());
        let v: VectorValue = serde_json::from_str("[1.5, 2]").unwrap();
        assert_eq!(v.components(), &[1.5, 2.0]);
        assert!(serde_json::from_str::<VectorValue>("[]").is_err());
    }

    #[test]
    fn interval_grid_hits_both_ends() {
        let i = Interval::new(0.1, 0.7).unwrap();
        let g: Vec<f64> = i.grid(7).collect();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[6], 0.7);
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fornberg_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = fornberg_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 4);
        assert_eq!(w, vec![1.0, -4.0, 6.0, -4.0, 1.0]);
        let w = fornberg_weights(&[0.0, 1.0, 2.0], 1);
        assert_eq!(w, vec![-1.5, 2.0, -0.5]);
    }

    #[test]
    fn window_oscillation_matches_pairwise_scan() {
        let v: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.37).sin() * (1.0 + (i % 7) as f64)).collect();
        for window in [1, 3, 10, 57, 199, 500] {
            let mut brute: f64 = 0.0;
            for i in 0..v.len() {
                for j in i..v.len().min(i + window + 1) {
                    brute = brute.max((v[j] - v[i]).abs());
                }
            }
            assert_eq!(scalar_window_oscillation(&v, window), brute);
        }
    }
}
