//! Fisher information per observation, `I(θ) = I1(θ) − I2(θ)`, with
//!
//! ```text
//! I1(θ) = θ^{-2} + e^θ / (e^θ − 1)²
//! I2(θ) = 2 E[J(U1, U2 | θ)],   J = J1 / J2 = −(d²/dθ²) ln|G(θ)|
//! ```
//!
//! where `G` is the bracket in the density's denominator and
//! `J1 = G'² − G G''`, `J2 = G²`. `I2` is evaluated by tensor Gauss–Legendre
//! quadrature against the density, or by Monte Carlo over exact draws.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::copula::{j_ratio_raw, log_pdf_raw, score_raw, AssociationParameter, UnitPair};
use crate::numeric::CompensatedSum;
use crate::output::fmt_f64;
use crate::quadrature::{integrate_unit_square, QuadratureSpec};
use crate::sampler::{sample_pair, SeedSpec};
use crate::{Error, Result};

/// Below this |θ| the information is reported as the mean of its values at
/// `±SMALL_THETA_FISHER`; `I1` and `I2` each grow like `2/θ²`.
pub const SMALL_THETA_FISHER: f64 = 1e-3;

/// `lim_{θ→0} I(θ)`: the variance of the limiting score
/// `(1 − 2U1)(1 − 2U2)/2` under independence.
pub const FISHER_AT_ZERO: f64 = 1.0 / 36.0;

/// Draws per Monte Carlo sub-stream.
const MC_CHUNK: usize = 8192;

pub const DEFAULT_NODES: usize = 128;
pub const DEFAULT_ERROR_TARGET: f64 = 1e-8;

pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec::gauss_legendre(DEFAULT_NODES, DEFAULT_ERROR_TARGET).expect("valid default rule")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMethod {
    Quadrature,
    MonteCarlo,
}

impl FisherMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FisherMethod::Quadrature => "quadrature",
            FisherMethod::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for FisherMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub theta: f64,
    pub i1: f64,
    pub i2: f64,
    pub i_total: f64,
    pub method: FisherMethod,
    /// Zero for quadrature.
    pub mc_standard_error: f64,
}

impl FisherResult {
    pub fn inverse(&self) -> f64 {
        1.0 / self.i_total
    }
}

fn nonzero(theta: f64) -> Result<()> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta must be finite and non-zero, got {theta}")));
    }
    AssociationParameter::new(theta).map(|_| ())
}

/// `θ^{-2} + e^{-|θ|} / (1 − e^{-|θ|})²`.
pub fn i1_term(theta: f64) -> f64 {
    let x = theta.abs();
    let d = (-x).exp_m1();
    1.0 / (theta * theta) + (-x).exp() / (d * d)
}

/// `J1/J2` at one observation.
pub fn j_ratio(p: UnitPair, theta: f64) -> f64 {
    j_ratio_raw(p.u1(), p.u2(), theta)
}

/// `I2(θ) = 2 ∬ J c du1 du2` under `q`.
pub fn i2_quadrature(theta: f64, q: &QuadratureSpec) -> Result<f64> {
    nonzero(theta)?;
    let r = integrate_unit_square(|a, b| 2.0 * j_ratio_raw(a, b, theta) * log_pdf_raw(a, b, theta).exp(), q)?;
    Ok(r.value)
}

/// `I(θ)` by quadrature. The total is integrated as `∬ (I1 − 2J) c`, which
/// keeps its accuracy for small |θ| where `I1` and `I2` nearly cancel;
/// `i2` is reported as `i1 − i_total`.
pub fn fisher_quadrature(theta: f64, q: &QuadratureSpec) -> Result<FisherResult> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta must be finite, got {theta}")));
    }
    if theta.abs() < SMALL_THETA_FISHER {
        let a = fisher_quadrature(SMALL_THETA_FISHER, q)?;
        let b = fisher_quadrature(-SMALL_THETA_FISHER, q)?;
        let i1 = 0.5 * (a.i1 + b.i1);
        let i_total = 0.5 * (a.i_total + b.i_total);
        return Ok(FisherResult {
            theta,
            i1,
            i2: i1 - i_total,
            i_total,
            method: FisherMethod::Quadrature,
            mc_standard_error: 0.0,
        });
    }
    nonzero(theta)?;
    let i1 = i1_term(theta);
    let r = integrate_unit_square(
        |a, b| (i1 - 2.0 * j_ratio_raw(a, b, theta)) * log_pdf_raw(a, b, theta).exp(),
        q,
    )?;
    Ok(FisherResult {
        theta,
        i1,
        i2: i1 - r.value,
        i_total: r.value,
        method: FisherMethod::Quadrature,
        mc_standard_error: 0.0,
    })
}

/// `I(θ)` by the default 128 × 128 Gauss–Legendre rule.
pub fn fisher_information(theta: f64) -> Result<FisherResult> {
    fisher_quadrature(theta, &default_quadrature())
}

/// `1 / I(θ)`, the asymptotic variance of `√n (θ̂_ML − θ)`.
pub fn asymptotic_variance(theta: f64) -> Result<f64> {
    Ok(fisher_information(theta)?.inverse())
}

/// Mean and sum of squared deviations of one chunk.
#[derive(Debug, Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(values: &[f64]) -> Self {
        let count = values.len() as f64;
        let mean = values.iter().copied().collect::<CompensatedSum>().total() / count;
        let m2 = values.iter().map(|v| (v - mean) * (v - mean)).collect::<CompensatedSum>().total();
        Self { count, mean, m2 }
    }

    fn merge(self, other: Self) -> Self {
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.count - 1.0)
    }
}

/// Evaluates `f` on `m` exact draws at θ, chunked into sub-streams of
/// `seed` so the result does not depend on the thread count.
fn mc_chunks<F>(theta: AssociationParameter, m: usize, seed: SeedSpec, f: F) -> Vec<Vec<f64>>
where
    F: Fn(UnitPair) -> f64 + Sync,
{
    let chunks = m.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = MC_CHUNK.min(m - c * MC_CHUNK);
            let mut rng = seed.derive(c as u64).rng();
            (0..len).map(|_| f(sample_pair(theta, &mut rng))).collect()
        })
        .collect()
}

/// `I2(θ) = 2·mean(J)` over `m` draws, with standard error `2·sd/√m`.
pub fn i2_monte_carlo(theta: f64, m: usize, seed: SeedSpec) -> Result<FisherResult> {
    nonzero(theta)?;
    if m < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 draws, got {m}")));
    }
    let t = AssociationParameter::new(theta)?;
    let chunks = mc_chunks(t, m, seed, |p| j_ratio_raw(p.u1(), p.u2(), theta));
    let mom = chunks
        .iter()
        .map(|c| Moments::of(c))
        .reduce(Moments::merge)
        .expect("at least one chunk");
    let i1 = i1_term(theta);
    let i2 = 2.0 * mom.mean;
    Ok(FisherResult {
        theta,
        i1,
        i2,
        i_total: i1 - i2,
        method: FisherMethod::MonteCarlo,
        mc_standard_error: 2.0 * (mom.variance() / m as f64).sqrt(),
    })
}

/// Monte Carlo estimate of `Var(score)` from `m` draws, with the standard
/// error of that variance estimate. Independent of the `I1 − I2` split.
pub fn score_variance_monte_carlo(theta: AssociationParameter, m: usize, seed: SeedSpec) -> Result<(f64, f64)> {
    if m < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 draws, got {m}")));
    }
    let t = theta.value();
    let scores: Vec<f64> = mc_chunks(theta, m, seed, |p| score_raw(p.u1(), p.u2(), t))
        .into_iter()
        .flatten()
        .collect();
    let mom = Moments::of(&scores);
    let sq: Vec<f64> = scores.iter().map(|s| (s - mom.mean) * (s - mom.mean)).collect();
    let sq_mom = Moments::of(&sq);
    Ok((mom.variance(), (sq_mom.variance() / m as f64).sqrt()))
}

/// Writes rows with header `theta,i1,i2,i_total,inv_i,method,mc_se`.
pub fn write_fisher_csv<W: Write>(w: &mut W, rows: &[FisherResult]) -> std::io::Result<()> {
    writeln!(w, "theta,i1,i2,i_total,inv_i,method,mc_se")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.theta),
            fmt_f64(r.i1),
            fmt_f64(r.i2),
            fmt_f64(r.i_total),
            fmt_f64(r.inverse()),
            r.method,
            fmt_f64(r.mc_standard_error)
        )?;
    }
    Ok(())
}
