//! Quasi-interpolation operators built from the density `Φ`:
//!
//! * `A*_n(f, x) = Σ_{k=⌈na⌉}^{⌊nb⌋} f(k/n) Φ(nx − k)`
//! * `A_n(f, x) = A*_n(f, x) / Σ_{k=⌈na⌉}^{⌊nb⌋} Φ(nx − k)`
//! * `Ā_n(f, x) = Σ_{k ∈ ℤ} f(k/n) Φ(nx − k)`, truncated to a finite radius.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::activation::SigmoidParams;
use crate::density::{denominator_bound, truncation_radius, OperatorConfig};
use crate::error::{ensure_finite, Error, Result};
use crate::summation::{center_out, CompensatedSum};
use crate::vector::{check_covers, Interval, NormKind, VectorFunction, VectorValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    pub value: VectorValue,
    /// `S_n(x)` for the interval operators; the truncated partition sum
    /// `Σ_{|nx−k| ≤ T} Φ(nx − k)` for `Ā_n`.
    pub denominator: f64,
    pub terms_used: u64,
}

impl OperatorResult {
    /// `value / denominator`. For `Ā_n` this is a diagnostic only.
    pub fn renormalized(&self) -> VectorValue {
        self.value.scale(1.0 / self.denominator)
    }
}

/// Componentwise compensated accumulation of `Σ w_k v_k`.
struct VectorAccumulator {
    parts: SmallVec<[CompensatedSum; 4]>,
}

impl VectorAccumulator {
    fn new(dim: usize) -> Self {
        Self { parts: (0..dim).map(|_| CompensatedSum::new()).collect() }
    }

    fn add_scaled(&mut self, w: f64, v: &VectorValue) {
        for (acc, c) in self.parts.iter_mut().zip(v.components()) {
            acc.add(w * c);
        }
    }

    fn finish(self) -> VectorValue {
        VectorValue::from_components(self.parts.iter().map(|s| s.value()).collect())
    }
}

fn check_inputs(f: &dyn VectorFunction, x: f64, cfg: &OperatorConfig) -> Result<()> {
    cfg.check_point(x)?;
    check_covers(f, &Interval::new(cfg.a(), cfg.b())?)
}

/// Sample node `k/n`, clamped into `[a, b]` against last-ulp rounding.
fn node(k: i64, cfg: &OperatorConfig) -> f64 {
    (k as f64 / cfg.n() as f64).clamp(cfg.a(), cfg.b())
}

fn weighted_sums(f: &dyn VectorFunction, x: f64, cfg: &OperatorConfig) -> Result<(VectorValue, f64)> {
    check_inputs(f, x, cfg)?;
    let z = cfg.n() as f64 * x;
    let p = cfg.sigmoid();
    let mut acc = VectorAccumulator::new(f.dim());
    let mut den = CompensatedSum::new();
    for k in cfg.indices_from(x) {
        let w = p.density(z - k as f64);
        acc.add_scaled(w, &f.eval(node(k, cfg))?);
        den += w;
    }
    Ok((acc.finish(), den.value()))
}

/// `A*_n(f, x)`.
pub fn a_star(f: &dyn VectorFunction, x: f64, cfg: &OperatorConfig) -> Result<VectorValue> {
    Ok(weighted_sums(f, x, cfg)?.0)
}

fn checked_denominator(s: f64, cfg: &OperatorConfig) -> Result<f64> {
    let floor = 1.0 / denominator_bound(cfg.sigmoid());
    if !(s > floor * (1.0 - 1e-12) && s <= 1.0 + 1e-12) {
        return Err(Error::Consistency(format!(
            "denominator {s:e} outside ({floor:e}, 1] for n = {}, m = {}",
            cfg.n(),
            cfg.m()
        )));
    }
    Ok(s)
}

/// `A_n(f, x) = A*_n(f, x) / S_n(x)`.
pub fn a_n(f: &dyn VectorFunction, x: f64, cfg: &OperatorConfig) -> Result<OperatorResult> {
    let (num, den) = weighted_sums(f, x, cfg)?;
    let den = checked_denominator(den, cfg)?;
    Ok(OperatorResult { value: num.scale(1.0 / den), denominator: den, terms_used: cfg.terms() })
}

/// `A_n(f, x) − f(x)` accumulated as `Σ (f(k/n) − f(x)) Φ(nx − k) / S_n(x)`.
///
/// Equal to `A_n(f, x) − f(x)` in exact arithmetic; this form vanishes
/// identically for constant `f` and avoids cancelling two nearby values.
pub fn a_n_deviation(f: &dyn VectorFunction, x: f64, cfg: &OperatorConfig) -> Result<VectorValue> {
    check_inputs(f, x, cfg)?;
    let fx = f.eval(x)?;
    let z = cfg.n() as f64 * x;
    let p = cfg.sigmoid();
    let mut acc = VectorAccumulator::new(f.dim());
    let mut den = CompensatedSum::new();
    for k in cfg.indices_from(x) {
        let w = p.density(z - k as f64);
        acc.add_scaled(w, &f.eval(node(k, cfg))?.sub(&fx));
        den += w;
    }
    let den = checked_denominator(den.value(), cfg)?;
    Ok(acc.finish().scale(1.0 / den))
}

/// Index window `|nx − k| ≤ T` of the truncated `Ā_n`.
///
/// `T = truncation_radius(ε / (2 max(1, ‖f‖∞)))`. The majorant behind
/// `truncation_radius` covers one side of the window only, hence the factor
/// 2; the dropped terms then have norm at most `ε`. The one-norm sup is used,
/// which dominates the other norms.
fn whole_line_window(f: &dyn VectorFunction, x: f64, n: u64, p: SigmoidParams, epsilon: f64) -> Result<(i64, i64)> {
    ensure_finite(x, "x")?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !f.domain().is_whole_line() {
        return Err(Error::Precondition(format!("{} is not defined on the whole line", f.name())));
    }
    let sup = f
        .analytic_sup_norm(None, NormKind::One)
        .ok_or_else(|| Error::Precondition(format!("{} declares no sup-norm on the whole line", f.name())))?;
    let radius = truncation_radius(epsilon / (2.0 * sup.max(1.0)), p)? as f64;
    let z = n as f64 * x;
    let (lo, hi) = ((z - radius).ceil(), (z + radius).floor());
    if lo.abs() > 2f64.powi(62) || hi.abs() > 2f64.powi(62) {
        return Err(Error::Capacity(format!("index window around n x = {z:e} overflows")));
    }
    Ok((lo as i64, hi as i64))
}

fn whole_line_sums(
    f: &dyn VectorFunction,
    x: f64,
    n: u64,
    p: SigmoidParams,
    epsilon: f64,
    center: Option<&VectorValue>,
) -> Result<OperatorResult> {
    let (lo, hi) = whole_line_window(f, x, n, p, epsilon)?;
    let z = n as f64 * x;
    let mut acc = VectorAccumulator::new(f.dim());
    let mut den = CompensatedSum::new();
    for k in center_out(lo, hi, z) {
        let w = p.density(z - k as f64);
        let v = f.eval(k as f64 / n as f64)?;
        match center {
            Some(c) => acc.add_scaled(w, &v.sub(c)),
            None => acc.add_scaled(w, &v),
        }
        den += w;
    }
    Ok(OperatorResult { value: acc.finish(), denominator: den.value(), terms_used: (hi - lo + 1) as u64 })
}

/// `Ā_n(f, x)` truncated to `|nx − k| ≤ T`, with the truncated partition sum
/// reported as `denominator`. `f` must be defined on all of `ℝ` and declare
/// its sup-norm there.
pub fn a_bar(f: &dyn VectorFunction, x: f64, n: u64, p: SigmoidParams, epsilon: f64) -> Result<OperatorResult> {
    whole_line_sums(f, x, n, p, epsilon, None)
}

/// `Ā_n(f, x) − f(x)`, accumulated as `Σ (f(k/n) − f(x)) Φ(nx − k) − f(x)(1 − Σ Φ)`
/// over the same window as [`a_bar`].
pub fn a_bar_deviation(f: &dyn VectorFunction, x: f64, n: u64, p: SigmoidParams, epsilon: f64) -> Result<VectorValue> {
    ensure_finite(x, "x")?;
    let fx = f.eval(x)?;
    let r = whole_line_sums(f, x, n, p, epsilon, Some(&fx))?;
    Ok(r.value.sub(&fx.scale(1.0 - r.denominator)))
}

/// `A*_n((· − x)^j)(x) = Σ_{k=⌈na⌉}^{⌊nb⌋} Φ(nx − k)(k/n − x)^j`.
pub fn a_star_moment(x: f64, j: u32, cfg: &OperatorConfig) -> Result<f64> {
    cfg.check_point(x)?;
    if j == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1".into()));
    }
    let z = cfg.n() as f64 * x;
    let p = cfg.sigmoid();
    let mut acc = CompensatedSum::new();
    for k in cfg.indices_from(x) {
        acc += p.density(z - k as f64) * (node(k, cfg) - x).powi(j as i32);
    }
    Ok(acc.value())
}

/// `A_n((· − x)^j)(x)`: the moment normalized by `S_n(x)`.
pub fn a_n_moment(x: f64, j: u32, cfg: &OperatorConfig) -> Result<f64> {
    let s = crate::density::denominator_sum(x, cfg)?;
    Ok(a_star_moment(x, j, cfg)? / checked_denominator(s, cfg)?)
}

/// `1/n^{αj} + (b − a)^j/(4m(n^{1−α} − 2)^{2m})`, the bound on `|A*_n((·−x)^j)(x)|`.
pub fn moment_bound(j: u32, cfg: &OperatorConfig, rate: crate::density::RateParams) -> f64 {
    rate.delta().powi(j as i32) + cfg.len().powi(j as i32) * crate::density::tail_bound(rate, cfg.sigmoid())
}
