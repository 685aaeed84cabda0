//! The algebraic sigmoid `φ(x) = x / (1 + x^{2m})^{1/(2m)}` and the
//! bell-shaped density `Φ(x) = (φ(x+1) − φ(x−1)) / 4` generated by it.
//!
//! All evaluations go through `|x|` and restore the sign afterwards, so the
//! symmetries (`φ` odd, `Φ` even, `Φ′` odd) hold bit-exactly.
//!
//! Two numerical hazards are handled explicitly:
//!
//! * `x^{2m}` overflows once `|x| > 10^{308/(2m)}`. For `|x| > 1` the
//!   reciprocal form `φ(x) = sign(x) (1 + |x|^{-2m})^{-1/(2m)}` is used.
//! * For large `|x|` both `φ(x+1)` and `φ(x−1)` round to 1 and their
//!   difference cancels. For `|x| ≥ 2` the density is evaluated as
//!   `φ(u) · expm1(log1p((s_u − s_v)/(1 + s_v)) / (2m)) / 4` with
//!   `u = |x| − 1`, `v = |x| + 1`, `s = ·^{-2m}`, and `s_u − s_v` itself
//!   formed as `s_u · (−expm1(2m · log1p(−2/v)))`. No step subtracts
//!   nearly equal quantities.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Largest supported sigmoid order. Past this the density is numerically a
/// box and the exponent arithmetic degrades.
pub const MAX_ORDER: u32 = 64;

/// Order `m ≥ 1` of the algebraic sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SigmoidParams {
    m: u32,
}

impl SigmoidParams {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_ORDER {
            return Err(Error::InvalidParameter(format!("sigmoid order m must lie in 1..={MAX_ORDER}, got {m}")));
        }
        Ok(Self { m })
    }

    pub fn m(self) -> u32 {
        self.m
    }

    fn two_m(self) -> f64 {
        2.0 * f64::from(self.m)
    }

    /// `|x|^{2m}` by repeated squaring of `x²`.
    #[inline]
    fn pow_2m(self, ax: f64) -> f64 {
        (ax * ax).powi(self.m as i32)
    }

    /// `|x|^{-2m}` for `|x| ≥ 1`.
    #[inline]
    fn pow_neg_2m(self, ax: f64) -> f64 {
        (ax * ax).recip().powi(self.m as i32)
    }

    /// `φ(|x|)` without argument checks.
    #[inline]
    fn sigmoid_abs(self, ax: f64) -> f64 {
        if ax <= 1.0 {
            ax * (-self.pow_2m(ax).ln_1p() / self.two_m()).exp()
        } else {
            (-self.pow_neg_2m(ax).ln_1p() / self.two_m()).exp()
        }
    }

    /// `φ(x)` without argument checks.
    #[inline]
    pub fn sigmoid(self, x: f64) -> f64 {
        self.sigmoid_abs(x.abs()).copysign(x)
    }

    /// `φ′(x)` without argument checks.
    #[inline]
    pub fn sigmoid_prime(self, x: f64) -> f64 {
        let ax = x.abs();
        let exponent = (self.two_m() + 1.0) / self.two_m();
        if ax <= 1.0 {
            (-exponent * self.pow_2m(ax).ln_1p()).exp()
        } else {
            let log = (self.two_m() + 1.0) * ax.ln() + exponent * self.pow_neg_2m(ax).ln_1p();
            (-log).exp()
        }
    }

    /// `1 − φ(x)` for `x ≥ 1`, without cancellation.
    #[inline]
    pub(crate) fn sigmoid_complement(self, x: f64) -> f64 {
        debug_assert!(x >= 1.0);
        -(-self.pow_neg_2m(x).ln_1p() / self.two_m()).exp_m1()
    }

    /// `Φ(x)` without argument checks. Evenness is exact.
    #[inline]
    pub fn density(self, x: f64) -> f64 {
        let z = x.abs();
        if z < 2.0 {
            return 0.25 * (self.sigmoid_abs(z + 1.0) - self.sigmoid(z - 1.0));
        }
        let u = z - 1.0;
        let v = z + 1.0;
        let s_u = self.pow_neg_2m(u);
        let s_v = self.pow_neg_2m(v);
        // s_u - s_v = s_u (1 - (u/v)^{2m}), with u/v = 1 - 2/v.
        let gap = s_u * -(self.two_m() * (-2.0 / v).ln_1p()).exp_m1();
        let log_ratio = (gap / (1.0 + s_v)).ln_1p();
        0.25 * self.sigmoid_abs(u) * (log_ratio / self.two_m()).exp_m1()
    }

    /// `Φ′(x)` without argument checks. Oddness is exact.
    #[inline]
    pub fn density_prime(self, x: f64) -> f64 {
        let z = x.abs();
        let d = 0.25 * (self.sigmoid_prime(z + 1.0) - self.sigmoid_prime(z - 1.0));
        if x < 0.0 {
            -d
        } else {
            d
        }
    }
}

impl TryFrom<u32> for SigmoidParams {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        Self::new(m)
    }
}

impl From<SigmoidParams> for u32 {
    fn from(p: SigmoidParams) -> u32 {
        p.m
    }
}

/// The algebraic sigmoid `φ(x)`; odd, strictly increasing, valued in `(−1, 1)`.
pub fn phi(x: f64, p: SigmoidParams) -> Result<f64> {
    ensure_finite(x, "x")?;
    Ok(p.sigmoid(x))
}

/// `φ′(x) = (1 + x^{2m})^{−(2m+1)/(2m)}`.
pub fn phi_prime(x: f64, p: SigmoidParams) -> Result<f64> {
    ensure_finite(x, "x")?;
    Ok(p.sigmoid_prime(x))
}

/// The activation density `Φ(x) = (φ(x+1) − φ(x−1))/4`.
///
/// Relative accuracy is about 1e-15 over `|x| ≤ 10^4`.
pub fn big_phi(x: f64, p: SigmoidParams) -> Result<f64> {
    ensure_finite(x, "x")?;
    Ok(p.density(x))
}

/// `Φ′(x) = (φ′(x+1) − φ′(x−1))/4`.
pub fn big_phi_prime(x: f64, p: SigmoidParams) -> Result<f64> {
    ensure_finite(x, "x")?;
    Ok(p.density_prime(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32) -> SigmoidParams {
        SigmoidParams::new(m).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 50-digit reference values of Φ(x) computed with mpmath directly from
    // the defining difference.
    const DENSITY_REFERENCE: &[(u32, f64, f64)] = &[
        (1, 0.0, 0.3535533905932737622),
        (1, 0.5, 0.31981597245945040558),
        (1, 1.0, 0.22360679774997896964),
        (1, 1.75, 0.084948355872109263139),
        (1, 2.0, 0.0603941292159915688),
        (1, 2.5, 0.032368413325744871213),
        (1, 10.0, 0.00050236794852123556478),
        (1, 123.456, 2.6573431613601463754e-7),
        (1, 1000.0, 5.0000024999868749916e-10),
        (1, 10000.0, 5.0000000249999986875e-13),
        (2, 0.0, 0.42044820762685727152),
        (2, 0.5, 0.36210349216392953525),
        (2, 1.0, 0.24623953025272616325),
        (2, 1.75, 0.07387232292103509115),
        (2, 2.0, 0.039010190410101487824),
        (2, 2.5, 0.01060150587678887549),
        (2, 10.0, 5.2564276757774395663e-6),
        (2, 123.456, 1.7440200312519888774e-11),
        (2, 1000.0, 5.0000250000637500562e-16),
        (2, 10000.0, 5.000000250000006375e-21),
        (3, 0.0, 0.44544935907016965237),
        (3, 0.5, 0.37119565708315732378),
        (3, 1.0, 0.24935482616129381918),
        (3, 1.75, 0.067453298751757992417),
        (3, 2.0, 0.027218210233491736858),
        (3, 2.5, 0.0034590968946436278725),
        (3, 10.0, 5.4883358898496828324e-8),
        (3, 123.456, 1.1445915569118610897e-15),
        (3, 1000.0, 5.0000466668766673208e-22),
        (3, 10000.0, 5.0000004666666876667e-29),
        (5, 0.0, 0.46651649576840370799),
        (5, 0.5, 0.37455834676182443557),
        (5, 1.0, 0.24997559904156464964),
        (5, 1.75, 0.063523399978601096863),
        (5, 2.0, 0.016741328742546349987),
        (5, 2.5, 0.00042936213172931116948),
        (5, 10.0, 6.2060717522967387047e-12),
        (5, 123.456, 4.9313131903636372206e-24),
        (5, 1000.0, 5.0001100010010057208e-34),
        (5, 10000.0, 5.0000011000001001e-45),
    ];

    #[test]
    fn density_matches_high_precision_reference() {
        for &(m, x, expected) in DENSITY_REFERENCE {
            let got = big_phi(x, p(m)).unwrap();
            assert!(rel(got, expected) <= 1e-12, "m={m} x={x}: {got:e} vs {expected:e}");
            assert_eq!(got, big_phi(-x, p(m)).unwrap());
        }
    }

    #[test]
    fn sigmoid_and_derivative_reference() {
        let cases: &[(u32, f64, f64, f64)] = &[
            (1, 0.3, 0.28734788556634541779, 0.87873971121206549783),
            (1, 1.0, std::f64::consts::FRAC_1_SQRT_2, 0.3535533905932737622),
            (1, -2.5, -0.92847669088525931573, 0.051226300186772927765),
            (1, 1500.0, 0.99999977777785185182, 2.9629609876554183808e-10),
            (2, 0.3, 0.29939555690739732149, 0.98996646135435413647),
            (2, 1.0, 0.84089641525371454303, 0.42044820762685727152),
            (2, -2.5, -0.9937004739440881243, 0.0099215023919534539711),
            (2, 1500.0, 0.99999999999995061728, 1.316872427983213941e-16),
            (7, 0.3, 0.29999999897507809769, 0.99999994875390611005),
            (7, 1.0, 0.95169515301061960993, 0.47584757650530980496),
            (7, -2.5, -0.99999980826066430151, 1.0737387358259841914e-6),
            (7, 1500.0, 1.0, 2.283658260521167222e-48),
        ];
        for &(m, x, f, fp) in cases {
            assert!(rel(phi(x, p(m)).unwrap(), f) <= 1e-14, "phi m={m} x={x}");
            assert!(rel(phi_prime(x, p(m)).unwrap(), fp) <= 1e-13, "phi' m={m} x={x}");
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(phi(0.0, p(1)).unwrap(), 0.0);
        assert!((phi(1.0, p(1)).unwrap() - 0.7071067811865475).abs() < 1e-15);
        assert_eq!(phi(-1.0, p(2)).unwrap(), -phi(1.0, p(2)).unwrap());
        assert!((phi(-1.0, p(2)).unwrap() + 0.840_896_415_253_714_5).abs() < 1e-15);
        assert_eq!(phi_prime(0.0, p(1)).unwrap(), 1.0);
        assert!((phi_prime(1.0, p(1)).unwrap() - 0.353_553_390_59).abs() < 1e-11);
        assert!((big_phi(0.0, p(1)).unwrap() - 0.3535533905932738).abs() < 1e-16);
        assert!((big_phi(0.0, p(2)).unwrap() - 0.420_448_207_6).abs() < 1e-10);
        assert!((big_phi(1.0, p(1)).unwrap() - 0.223_606_797_74).abs() < 1e-11);
        assert_eq!(big_phi_prime(0.0, p(1)).unwrap(), 0.0);
        assert!(big_phi_prime(2.0, p(1)).unwrap() < 0.0);
        assert_eq!(big_phi_prime(-2.0, p(1)).unwrap(), -big_phi_prime(2.0, p(1)).unwrap());
    }

    #[test]
    fn density_prime_reference() {
        let cases: &[(u32, f64, f64)] = &[
            (1, 0.5, -0.13621619233650401248),
            (1, 2.0, -0.08048265349789749222),
            (1, 5.0, -0.0024558963999019261165),
            (2, 0.5, -0.20547485452764440375),
            (2, 2.0, -0.10409890436922029299),
            (2, 5.0, -0.00021083452513215788413),
        ];
        for &(m, x, expected) in cases {
            assert!(rel(big_phi_prime(x, p(m)).unwrap(), expected) <= 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SigmoidParams::new(0).is_err());
        assert!(SigmoidParams::new(MAX_ORDER + 1).is_err());
        assert!(SigmoidParams::new(MAX_ORDER).is_ok());
        for bad in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            assert!(matches!(phi(bad, p(1)), Err(Error::Domain(_))));
            assert!(matches!(phi_prime(bad, p(1)), Err(Error::Domain(_))));
            assert!(matches!(big_phi(bad, p(1)), Err(Error::Domain(_))));
            assert!(matches!(big_phi_prime(bad, p(1)), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn no_overflow_at_extreme_arguments() {
        for m in [1, 5, 64] {
            let q = p(m);
            assert_eq!(q.sigmoid(1e300), 1.0);
            assert_eq!(q.sigmoid(-1e300), -1.0);
            assert!(q.sigmoid_prime(1e300) >= 0.0);
            let d = q.density(1e300);
            assert!(d.is_finite() && d >= 0.0);
        }
        assert!(big_phi(1e6, p(1)).unwrap() < 1e-17);
        assert!(big_phi(-1e6, p(1)).unwrap() < 1e-17);
    }

    #[test]
    fn sigmoid_complement_is_accurate() {
        let q = p(1);
        let x: f64 = 1e5;
        // 1 - x/sqrt(1+x²) = 1/(sqrt(1+x²)(sqrt(1+x²)+x))
        let r = (1.0 + x * x).sqrt();
        let expected = 1.0 / (r * (r + x));
        assert!(rel(q.sigmoid_complement(x), expected) < 1e-14);
    }
}
