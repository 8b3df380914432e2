//! The bivariate Frank copula: cdf, density, log-density, score and the
//! conditional cdf of `U2 | U1`.
//!
//! Everything is written around the bracket
//!
//! ```text
//! G(θ) = e^{-θu1} + e^{-θu2} - e^{-θ} - e^{-θ(u1+u2)}
//! ```
//!
//! which appears squared in the density's denominator. Naive evaluation
//! overflows for |θ| ≳ 40 and cancels catastrophically as θ → 0, so `ln|G|`
//! is assembled from terms of one sign only:
//!
//! * θ > 0: `G = e^{-θu1}(1 - e^{-θu2}) + e^{-θu2}(1 - e^{-θ(1-u2)})`
//! * θ < 0, δ = -θ: `-G = (e^{δu1} - 1)(e^{δu2} - 1) + (e^{δ} - 1)`
//!
//! and ratios such as `A1/G` are formed after factoring out the largest
//! exponential.

use crate::numeric::{ln_abs_expm1, log_add_exp, softplus};
use crate::{Error, Result};

/// Largest admissible |θ|. Beyond it `e^θ` leaves the double range even in
/// factored form.
pub const THETA_MAX: f64 = 700.0;

/// Below this |θ| the density, log-density and score switch to their Taylor
/// expansions in θ.
pub const SMALL_THETA: f64 = 1e-4;

/// Association parameter θ of the Frank copula, with an explicit
/// representation of the independence limit θ → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationParameter {
    value: f64,
    independence: bool,
}

impl AssociationParameter {
    /// `0.0` maps to the independence limit.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("theta must be finite, got {value}")));
        }
        if value.abs() > THETA_MAX {
            return Err(Error::OverflowGuard { theta: value, max: THETA_MAX });
        }
        if value == 0.0 {
            return Ok(Self::independence());
        }
        Ok(Self { value, independence: false })
    }

    pub const fn independence() -> Self {
        Self { value: 0.0, independence: true }
    }

    /// Numeric value; `0.0` at the independence limit.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_independence_limit(&self) -> bool {
        self.independence
    }

    pub fn negated(&self) -> Self {
        Self { value: -self.value, independence: self.independence }
    }
}

impl TryFrom<f64> for AssociationParameter {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

/// One observation `(u1, u2)` strictly inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPair {
    u1: f64,
    u2: f64,
}

impl UnitPair {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        for u in [u1, u2] {
            if !(u > 0.0 && u < 1.0) {
                return Err(Error::BoundaryValue { value: u });
            }
        }
        Ok(Self { u1, u2 })
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u2(&self) -> f64 {
        self.u2
    }

    /// `(u1, 1 - u2)`. A second coordinate too small for `1 - u2` to be
    /// representable below one is mapped to the largest double below one.
    pub fn flipped(&self) -> Self {
        let v = 1.0 - self.u2;
        let v = if v < 1.0 { v } else { 1.0 - f64::EPSILON / 2.0 };
        Self { u1: self.u1, u2: v }
    }
}

/// An ordered collection of observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariateSample {
    pairs: Vec<UnitPair>,
}

impl BivariateSample {
    pub fn new(pairs: Vec<UnitPair>) -> Self {
        Self { pairs }
    }

    pub fn from_columns(u1: &[f64], u2: &[f64]) -> Result<Self> {
        if u1.len() != u2.len() {
            return Err(Error::InvalidArgument(format!(
                "column lengths differ: {} vs {}",
                u1.len(),
                u2.len()
            )));
        }
        let pairs = u1
            .iter()
            .zip(u2)
            .map(|(&a, &b)| UnitPair::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[UnitPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn u1(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.u1)
    }

    pub fn u2(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.u2)
    }

    /// Applies `(u1, u2) -> (u1, 1 - u2)` to every pair.
    pub fn flipped(&self) -> Self {
        Self { pairs: self.pairs.iter().map(UnitPair::flipped).collect() }
    }

    pub(crate) fn ensure_len(&self, min: usize) -> Result<()> {
        if self.pairs.len() < min {
            Err(Error::SampleTooSmall { n: self.pairs.len(), min })
        } else {
            Ok(())
        }
    }
}

impl FromIterator<UnitPair> for BivariateSample {
    fn from_iter<I: IntoIterator<Item = UnitPair>>(iter: I) -> Self {
        Self { pairs: iter.into_iter().collect() }
    }
}

// ---------------------------------------------------------------------------
// raw kernels on f64 θ ≠ 0

/// `ln|G(θ)|` for θ ≠ 0.
#[inline]
pub(crate) fn ln_abs_bracket(u1: f64, u2: f64, theta: f64) -> f64 {
    if theta > 0.0 {
        let t1 = -theta * u1 + (-(-theta * u2).exp_m1()).ln();
        let t2 = -theta * u2 + (-(-theta * (1.0 - u2)).exp_m1()).ln();
        log_add_exp(t1, t2)
    } else {
        let d = -theta;
        let s1 = ln_abs_expm1(d * u1) + ln_abs_expm1(d * u2);
        let s2 = ln_abs_expm1(d);
        log_add_exp(s1, s2)
    }
}

/// Largest of the exponents `-θu1, -θu2, -θ(u1+u2), -θ`.
#[inline]
fn max_exponent(u1: f64, u2: f64, theta: f64) -> f64 {
    if theta > 0.0 {
        -theta * u1.min(u2)
    } else {
        -theta * (u1 + u2).max(1.0)
    }
}

/// Taylor coefficients of `ln c` in θ: `a1 θ + a2 θ² + a3 θ³`.
#[inline]
fn taylor_coefficients(u1: f64, u2: f64) -> (f64, f64, f64) {
    let a1 = 0.5 * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2);
    let a2 = u1 * (1.0 - u1) * u2 * (1.0 - u2) - 1.0 / 24.0;
    let q1 = u1 * (1.0 - u1) * (1.0 - 2.0 * u1);
    let q2 = u2 * (1.0 - u2) * (1.0 - 2.0 * u2);
    (a1, a2, q1 * q2 / 6.0)
}

#[inline]
pub(crate) fn log_pdf_raw(u1: f64, u2: f64, theta: f64) -> f64 {
    if theta.abs() < SMALL_THETA {
        let (a1, a2, a3) = taylor_coefficients(u1, u2);
        return theta * (a1 + theta * (a2 + theta * a3));
    }
    theta.abs().ln() + ln_abs_expm1(-theta) - theta * (u1 + u2) - 2.0 * ln_abs_bracket(u1, u2, theta)
}

/// `1/θ + 1/(e^θ - 1)`, the pair-independent part of the score.
#[inline]
pub(crate) fn score_constant(theta: f64) -> f64 {
    let tail = if theta > 0.0 {
        (-theta).exp() / -(-theta).exp_m1()
    } else {
        1.0 / theta.exp_m1()
    };
    1.0 / theta + tail
}

/// `(e^{-a}, 1 - e^{-a})` for `a >= 0`, each to full relative precision,
/// from a single exponential.
#[inline]
fn exp_and_complement(a: f64) -> (f64, f64) {
    if a < std::f64::consts::LN_2 {
        let e = (-a).exp_m1();
        (1.0 + e, -e)
    } else {
        let e = (-a).exp();
        (e, 1.0 - e)
    }
}

/// Below this δ = −θ the negative-θ score uses plain exponentials; above it
/// products like `e^{δ(u1+u2)}` could overflow.
const DIRECT_NEGATIVE_LIMIT: f64 = 300.0;

/// `-(u1 + u2) + 2 A1/A2`, the pair-dependent part of the score.
#[inline]
pub(crate) fn score_pair_part(u1: f64, u2: f64, theta: f64) -> f64 {
    let s = u1 + u2;
    if theta > 0.0 {
        // G = x(1-y) + y(1-e^{-θ(1-u2)}), both terms non-negative; nothing
        // here leaves the normal range for θ <= 700
        let x = (-theta * u1).exp();
        let (y, one_minus_y) = exp_and_complement(theta * u2);
        let (_, one_minus_w) = exp_and_complement(theta * (1.0 - u2));
        let g = x * one_minus_y + y * one_minus_w;
        let a1 = u1 * x + u2 * y - s * x * y - (-theta).exp();
        return -s + 2.0 * a1 / g;
    }
    let d = -theta;
    if d <= DIRECT_NEGATIVE_LIMIT {
        // -G = (e^{δu1}-1)(e^{δu2}-1) + (e^δ-1)
        let e1 = (d * u1).exp_m1();
        let e2 = (d * u2).exp_m1();
        let ed = d.exp_m1();
        let g = -(e1 * e2 + ed);
        let a1 = u1 * (1.0 + e1) + u2 * (1.0 + e2) - s * (1.0 + e1) * (1.0 + e2) - (1.0 + ed);
        return -s + 2.0 * a1 / g;
    }
    score_pair_part_scaled(u1, u2, theta)
}

/// Same as [`score_pair_part`], with every exponential scaled by the largest
/// one.
#[inline]
fn score_pair_part_scaled(u1: f64, u2: f64, theta: f64) -> f64 {
    let m = max_exponent(u1, u2, theta);
    let sign = if theta > 0.0 { 1.0 } else { -1.0 };
    let a2 = sign * (ln_abs_bracket(u1, u2, theta) - m).exp();
    let s = u1 + u2;
    let a1 = u1 * (-theta * u1 - m).exp() + u2 * (-theta * u2 - m).exp()
        - s * (-theta * s - m).exp()
        - (-theta - m).exp();
    -s + 2.0 * a1 / a2
}

#[inline]
pub(crate) fn score_raw(u1: f64, u2: f64, theta: f64) -> f64 {
    if theta.abs() < SMALL_THETA {
        let (a1, a2, a3) = taylor_coefficients(u1, u2);
        return a1 + theta * (2.0 * a2 + 3.0 * theta * a3);
    }
    score_constant(theta) + score_pair_part(u1, u2, theta)
}

/// `J1/J2` with `J1 = G'² - G G''` and `J2 = G²`, i.e. `-(d²/dθ²) ln|G|`.
#[inline]
pub(crate) fn j_ratio_raw(u1: f64, u2: f64, theta: f64) -> f64 {
    let m = max_exponent(u1, u2, theta);
    let two_m = 2.0 * m;
    let e = |x: f64| (-theta * x - two_m).exp();
    let s = u1 + u2;
    let d = u1 - u2;
    let j1 = -d * d * e(s)
        + u1 * u1 * e(u1 + 2.0 * u2)
        + u2 * u2 * e(2.0 * u1 + u2)
        - (s - 1.0) * (s - 1.0) * e(s + 1.0)
        + (u2 - 1.0) * (u2 - 1.0) * e(u2 + 1.0)
        + (u1 - 1.0) * (u1 - 1.0) * e(u1 + 1.0);
    let g2 = (2.0 * (ln_abs_bracket(u1, u2, theta) - m)).exp();
    j1 / g2
}

/// `P(U2 <= u2 | U1 = u1)` for θ ≠ 0, `u1 ∈ (0,1)`, `u2 ∈ [0,1]`.
#[inline]
pub(crate) fn conditional_cdf_raw(u2: f64, u1: f64, theta: f64) -> f64 {
    if theta > 0.0 {
        // x(1-y) / (x(1-y) + (y-z))
        let t1 = -theta * u1 + (-(-theta * u2).exp_m1()).ln();
        let t2 = -theta * u2 + (-(-theta * (1.0 - u2)).exp_m1()).ln();
        1.0 / (1.0 + (t2 - t1).exp())
    } else {
        let d = -theta;
        let ln_num = d * u1 + ln_abs_expm1(d * u2);
        let ln_den = log_add_exp(ln_abs_expm1(d * u1) + ln_abs_expm1(d * u2), ln_abs_expm1(d));
        (ln_num - ln_den).exp().min(1.0)
    }
}

/// Frank cdf for θ ≠ 0 and coordinates in [0,1].
pub(crate) fn cdf_raw(u1: f64, u2: f64, theta: f64) -> f64 {
    if theta > 0.0 {
        // -(1/θ) ln(1 + ab/d), a = e^{-θu1}-1, b = e^{-θu2}-1, d = e^{-θ}-1
        let a = (-theta * u1).exp_m1();
        let b = (-theta * u2).exp_m1();
        let d = (-theta).exp_m1();
        let r = a * b / d;
        if r > -0.5 {
            -r.ln_1p() / theta
        } else {
            // 1 + ab/d = G / (1 - e^{-θ}); both sides kept in log form
            -(ln_abs_bracket(u1, u2, theta) - (-(-theta).exp_m1()).ln()) / theta
        }
    } else {
        let d = -theta;
        let lr = ln_abs_expm1(d * u1) + ln_abs_expm1(d * u2) - ln_abs_expm1(d);
        softplus(lr) / d
    }
}

// ---------------------------------------------------------------------------
// public API

/// Frank copula cdf `C(u1, u2 | θ)`; coordinates may lie on the boundary.
pub fn frank_cdf(u1: f64, u2: f64, theta: AssociationParameter) -> Result<f64> {
    for u in [u1, u2] {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidArgument(format!("coordinate {u} outside [0,1]")));
        }
    }
    if theta.is_independence_limit() {
        return Ok(u1 * u2);
    }
    Ok(cdf_raw(u1, u2, theta.value()).clamp(0.0, u1.min(u2)))
}

/// Frank copula density `c(u1, u2 | θ)`, evaluated as `exp(ln c)`.
pub fn frank_pdf(p: UnitPair, theta: AssociationParameter) -> f64 {
    frank_log_pdf(p, theta).exp()
}

pub fn frank_log_pdf(p: UnitPair, theta: AssociationParameter) -> f64 {
    if theta.is_independence_limit() {
        return 0.0;
    }
    log_pdf_raw(p.u1, p.u2, theta.value())
}

/// Score `∂/∂θ ln c(u1, u2 | θ)` of one observation. At the independence
/// limit this is the θ → 0 limit `(1 - 2u1)(1 - 2u2)/2`.
pub fn score_single(p: UnitPair, theta: AssociationParameter) -> f64 {
    score_raw(p.u1, p.u2, theta.value())
}

/// Conditional cdf `P(U2 <= u2 | U1 = u1)`; `u1 ∈ (0,1)`, `u2 ∈ [0,1]`.
pub fn conditional_cdf(u2: f64, u1: f64, theta: AssociationParameter) -> Result<f64> {
    if !(u1 > 0.0 && u1 < 1.0) {
        return Err(Error::BoundaryValue { value: u1 });
    }
    if !(0.0..=1.0).contains(&u2) {
        return Err(Error::InvalidArgument(format!("u2 = {u2} outside [0,1]")));
    }
    if theta.is_independence_limit() {
        return Ok(u2);
    }
    Ok(conditional_cdf_raw(u2, u1, theta.value()))
}
