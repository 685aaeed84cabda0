//! Structural properties of the density `Φ`: partition of unity over integer
//! shifts, the polynomial tail bound, the lower bound on the normalizing
//! denominator over a finite window, and the unit integral.

use serde::{Deserialize, Serialize};

use crate::activation::SigmoidParams;
use crate::error::{ensure_finite, Error, Result};
use crate::quadrature;
use crate::summation::{center_out, CompensatedSum};

/// Interval `[a, b]`, sample density `n` and sigmoid order, together with the
/// index window `⌈na⌉..=⌊nb⌋` the finite operators sum over.
///
/// The window uses plain IEEE `ceil`/`floor` of `n·a` and `n·b`; no epsilon
/// nudging is applied to endpoints that land next to an integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    a: f64,
    b: f64,
    n: u64,
    sigmoid: SigmoidParams,
    k_lo: i64,
    k_hi: i64,
}

impl OperatorConfig {
    pub fn new(a: f64, b: f64, n: u64, sigmoid: SigmoidParams) -> Result<Self> {
        ensure_finite(a, "a")?;
        ensure_finite(b, "b")?;
        if a >= b {
            return Err(Error::InvalidParameter(format!("need a < b, got [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let nf = n as f64;
        let lo = (nf * a).ceil();
        let hi = (nf * b).floor();
        let limit = 2f64.powi(62);
        if lo.abs() > limit || hi.abs() > limit {
            return Err(Error::Capacity(format!("index window for n={n} on [{a}, {b}] overflows")));
        }
        let (k_lo, k_hi) = (lo as i64, hi as i64);
        if k_lo > k_hi {
            return Err(Error::Precondition(format!("empty index window: ceil(n a) = {k_lo} > floor(n b) = {k_hi}")));
        }
        Ok(Self { a, b, n, sigmoid, k_lo, k_hi })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn sigmoid(&self) -> SigmoidParams {
        self.sigmoid
    }
    pub fn m(&self) -> u32 {
        self.sigmoid.m()
    }
    pub fn k_lo(&self) -> i64 {
        self.k_lo
    }
    pub fn k_hi(&self) -> i64 {
        self.k_hi
    }
    pub fn len(&self) -> f64 {
        self.b - self.a
    }
    pub fn terms(&self) -> u64 {
        (self.k_hi - self.k_lo + 1) as u64
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }

    pub(crate) fn check_point(&self, x: f64) -> Result<()> {
        ensure_finite(x, "x")?;
        if !self.contains(x) {
            return Err(Error::Domain(format!("x = {x} outside [{}, {}]", self.a, self.b)));
        }
        Ok(())
    }

    /// Indices of the window, nearest to `n x` first.
    pub(crate) fn indices_from(&self, x: f64) -> impl Iterator<Item = i64> {
        center_out(self.k_lo, self.k_hi, self.n as f64 * x)
    }
}

/// Rate-splitting exponent `α ∈ (0, 1)` and density `n` with `n^{1−α} > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    alpha: f64,
    n: u64,
}

impl RateParams {
    pub fn new(alpha: f64, n: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("rate exponent must lie in (0, 1), got {alpha}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let threshold = (n as f64).powf(1.0 - alpha);
        if threshold <= 2.0 {
            return Err(Error::Precondition(format!(
                "n^(1-alpha) = {threshold} must exceed 2 (n = {n}, alpha = {alpha})"
            )));
        }
        Ok(Self { alpha, n })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `n^{1−α}`, the distance beyond which `Φ(nx − k)` counts as tail.
    pub fn threshold(&self) -> f64 {
        (self.n as f64).powf(1.0 - self.alpha)
    }

    /// `1/n^α`, the local window in `x`.
    pub fn delta(&self) -> f64 {
        (self.n as f64).powf(-self.alpha)
    }
}

/// `1/(4m(T − 2)^{2m})`: bound on `Σ_{|z−k| ≥ T} Φ(z − k)` for `T > 2`.
pub(crate) fn tail_majorant(threshold: f64, p: SigmoidParams) -> f64 {
    let m = f64::from(p.m());
    1.0 / (4.0 * m * (threshold - 2.0).powi(2 * p.m() as i32))
}

/// Truncated partition of unity `Σ_{i=⌈x⌉−r}^{⌊x⌋+r} Φ(x − i)`.
pub fn partition_sum(x: f64, p: SigmoidParams, radius: u64) -> Result<f64> {
    ensure_finite(x, "x")?;
    if radius == 0 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    let r = i64::try_from(radius).map_err(|_| Error::Capacity(format!("radius {radius} too large")))?;
    let lo = (x.ceil() as i64).checked_sub(r);
    let hi = (x.floor() as i64).checked_add(r);
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::Capacity(format!("radius {radius} overflows around x = {x}")));
    };
    let mut acc = CompensatedSum::new();
    for i in center_out(lo, hi, x) {
        acc += p.density(x - i as f64);
    }
    Ok(acc.value())
}

const TERM_FLOOR: f64 = 1e-18;
const REMAINDER_FLOOR: f64 = 1e-16;
const MAX_DIRECT_TERMS: u64 = 1 << 16;

/// `Σ_{j ≥ 0} Φ(t0 + j)` for `t0 > 2`.
///
/// Summation stops once a term is below `1e-18` *and* the integral majorant
/// of the rest is below `1e-16`. At `m = 1` that would take millions of
/// terms, so after `2^16` terms the remainder is closed with the
/// Euler–Maclaurin estimate `∫_s^∞ Φ + Φ(s)/2 − Φ′(s)/12`, the integral
/// being the exact identity `∫_s^∞ Φ = ¼ ∫_{s−1}^{s+1} (1 − φ)`.
fn one_sided_tail(t0: f64, p: SigmoidParams) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    let mut j: u64 = 0;
    loop {
        let s = t0 + j as f64;
        let term = p.density(s);
        acc += term;
        j += 1;
        let next = t0 + j as f64;
        if term < TERM_FLOOR && remainder_majorant(next, p) < REMAINDER_FLOOR {
            return Ok(acc.value());
        }
        if j >= MAX_DIRECT_TERMS {
            acc += euler_maclaurin_remainder(next, p)?;
            return Ok(acc.value());
        }
    }
}

/// Upper bound on `Σ_{i ≥ 0} Φ(s + i)` for `s > 1`, from the envelope
/// `Φ(x) < ½ (x − 1)^{−(2m+1)}`.
fn remainder_majorant(s: f64, p: SigmoidParams) -> f64 {
    p.density(s) + 1.0 / (4.0 * f64::from(p.m()) * (s - 1.0).powi(2 * p.m() as i32))
}

/// `∫_s^∞ Φ(t) dt` for `s ≥ 2`.
pub(crate) fn upper_tail_integral(s: f64, p: SigmoidParams) -> Result<f64> {
    let scale = p.sigmoid_complement(s + 1.0);
    let q = quadrature::integrate(|t| p.sigmoid_complement(t), s - 1.0, s + 1.0, 1e-14 * scale, 200)?;
    Ok(0.25 * q.value)
}

fn euler_maclaurin_remainder(s: f64, p: SigmoidParams) -> Result<f64> {
    Ok(upper_tail_integral(s, p)? + 0.5 * p.density(s) - p.density_prime(s) / 12.0)
}

/// `Σ_{k ∈ ℤ : |nx − k| ≥ n^{1−α}} Φ(nx − k)`.
pub fn tail_sum(x: f64, rate: RateParams, p: SigmoidParams) -> Result<f64> {
    ensure_finite(x, "x")?;
    let z = rate.n() as f64 * x;
    let t = rate.threshold();
    // Right tail: k ≤ z − t, offsets z − k; left tail: k ≥ z + t, offsets k − z.
    let right_start = z - (z - t).floor();
    let left_start = (z + t).ceil() - z;
    Ok(one_sided_tail(right_start, p)? + one_sided_tail(left_start, p)?)
}

/// The tail bound `1/(4m(n^{1−α} − 2)^{2m})`.
///
/// The integral comparison behind it covers one side of the index set only.
/// For thresholds beyond about 6 at `m = 1` (about 17 at `m = 3`) the
/// two-sided tail exceeds it, by a ratio approaching 2; see
/// [`two_sided_tail_bound`].
pub fn tail_bound(rate: RateParams, p: SigmoidParams) -> f64 {
    tail_majorant(rate.threshold(), p)
}

/// `1/(2m(n^{1−α} − 2)^{2m})`: the same comparison applied to both sides of
/// the index set, which does dominate [`tail_sum`].
pub fn two_sided_tail_bound(rate: RateParams, p: SigmoidParams) -> f64 {
    2.0 * tail_majorant(rate.threshold(), p)
}

/// `S_n(x) = Σ_{k=⌈na⌉}^{⌊nb⌋} Φ(nx − k)`.
pub fn denominator_sum(x: f64, cfg: &OperatorConfig) -> Result<f64> {
    cfg.check_point(x)?;
    let z = cfg.n() as f64 * x;
    let p = cfg.sigmoid();
    let mut acc = CompensatedSum::new();
    for k in cfg.indices_from(x) {
        acc += p.density(z - k as f64);
    }
    Ok(acc.value())
}

/// `2(1 + 4^m)^{1/(2m)}`, a uniform upper bound on `1/S_n(x)`.
pub fn denominator_bound(p: SigmoidParams) -> f64 {
    let m = f64::from(p.m());
    2.0 * ((4f64.powi(p.m() as i32)).ln_1p() / (2.0 * m)).exp()
}

/// `1 − S_n(b)`: the deficit of the finite window at the right endpoint,
/// which stays bounded away from zero as `n` grows.
pub fn endpoint_deficit(cfg: &OperatorConfig) -> Result<f64> {
    Ok(1.0 - denominator_sum(cfg.b(), cfg)?)
}

/// `∫_ℝ Φ` to within `tol` of its true value (which is 1).
///
/// Quadrature covers `[−R, R]` with `R` chosen so the tail majorant
/// `1/(4m(R−1)^{2m})` per side is at most `tol/4`; the majorant is then added
/// as the tail estimate.
pub fn density_integral(p: SigmoidParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let m = f64::from(p.m());
    let radius = 1.0 + (1.0 / (m * tol)).powf(1.0 / (2.0 * m));
    let tail = tail_majorant(radius + 1.0, p);
    // Dyadic panels [0,1], [1,2], [2,4], ... up to R.
    let mut edges = vec![0.0, 1.0];
    while *edges.last().unwrap() < radius {
        let next = (2.0 * edges.last().unwrap()).min(radius);
        edges.push(next);
    }
    let panel_tol = tol / (8.0 * edges.len() as f64);
    let mut half = CompensatedSum::new();
    for w in edges.windows(2) {
        let q = quadrature::integrate(|t| p.density(t), w[0], w[1], panel_tol, 2_000)?;
        half += q.value;
    }
    half += tail;
    Ok(2.0 * half.value())
}

/// Smallest integer `T > 2` with `1/(4m(T − 2)^{2m}) < ε`.
///
/// Truncating the bi-infinite density series to `|nx − k| ≤ T` then drops at
/// most `ε` of the weight. Suggested `ε`: `1e-8` at `m = 1` (the tails are
/// fat), `1e-10` otherwise.
pub fn truncation_radius(epsilon: f64, p: SigmoidParams) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let m = f64::from(p.m());
    let estimate = 2.0 + (1.0 / (4.0 * m * epsilon)).powf(1.0 / (2.0 * m));
    if !(estimate < 2f64.powi(52)) {
        return Err(Error::Capacity(format!(
            "truncation radius for epsilon = {epsilon:e}, m = {} exceeds 2^52",
            p.m()
        )));
    }
    let accepts = |t: u64| tail_majorant(t as f64, p) < epsilon;
    let mut t = (estimate.floor() as u64).max(3);
    while !accepts(t) {
        t += 1;
    }
    while t > 3 && accepts(t - 1) {
        t -= 1;
    }
    Ok(t)
}
