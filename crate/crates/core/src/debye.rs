//! Debye functions `D_k(θ) = k θ^{-k} ∫₀^θ t^k / (e^t - 1) dt` for k = 1, 2 and
//! the population Kendall τ(θ) and Spearman ρ(θ) of the Frank copula:
//!
//! ```text
//! τ(θ) = 1 - (4/θ)(1 - D_1(θ))
//! ρ(θ) = 1 - (12/θ)(D_1(θ) - D_2(θ))
//! ```
//!
//! Negative arguments go through `D_k(-θ) = D_k(θ) + kθ/(k+1)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::quadrature::{integrate, GaussLegendre, QuadratureSpec};
use crate::{Error, Result};

/// Nodes of the production Gauss–Legendre rule.
pub const PRODUCTION_NODES: usize = 61;

/// Above this argument the integral is taken as `k! ζ(k+1)` minus its tail.
pub const TAIL_SWITCH: f64 = 30.0;

/// Below this |θ| the Debye functions are evaluated by their power series.
pub const SERIES_SWITCH: f64 = 1e-4;

/// Below this |θ| τ and ρ are evaluated by their power series; the closed
/// forms cancel badly near zero.
pub const MOMENT_SERIES_SWITCH: f64 = 0.5;

const ZETA3: f64 = 1.202_056_903_159_594_3;

fn production_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PRODUCTION_NODES))
}

fn check_order(k: u32) -> Result<()> {
    if k == 1 || k == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Debye order must be 1 or 2, got {k}")))
    }
}

/// `t^k / (e^t - 1)` with the removable singularity at 0 filled in.
#[inline]
fn integrand(k: u32, t: f64) -> f64 {
    let base = if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    if k == 1 {
        base
    } else {
        t * base
    }
}

fn series(k: u32, x: f64) -> f64 {
    let x2 = x * x;
    if k == 1 {
        1.0 - x / 4.0 + x2 / 36.0 - x2 * x2 / 3600.0
    } else {
        1.0 - x / 3.0 + x2 / 24.0 - x2 * x2 / 2160.0
    }
}

/// `∫_θ^∞ t^k / (e^t - 1) dt` for θ ≥ 30, summing the first three terms of
/// `Σ_m e^{-mt}`.
fn tail(k: u32, theta: f64) -> f64 {
    (1..=3)
        .map(|m| {
            let m = m as f64;
            let e = (-m * theta).exp();
            if k == 1 {
                e * (theta / m + 1.0 / (m * m))
            } else {
                e * (theta * theta / m + 2.0 * theta / (m * m) + 2.0 / (m * m * m))
            }
        })
        .sum()
}

fn full_integral(k: u32) -> f64 {
    if k == 1 {
        PI * PI / 6.0
    } else {
        2.0 * ZETA3
    }
}

/// `∫₀^θ t^k/(e^t - 1) dt` for θ > 0 by the production rule.
fn integral_fixed(k: u32, theta: f64) -> f64 {
    if theta > TAIL_SWITCH {
        full_integral(k) - tail(k, theta)
    } else {
        production_rule().integrate(0.0, theta, |t| integrand(k, t))
    }
}

fn reflect(k: u32, theta: f64, positive: f64) -> f64 {
    if theta < 0.0 {
        let kf = k as f64;
        positive + kf * (-theta) / (kf + 1.0)
    } else {
        positive
    }
}

/// `D_k(θ)` by the fixed production rule (61-node Gauss–Legendre on
/// `[0, min(|θ|, 30)]`, closed-form tail beyond). Panics for `k ∉ {1, 2}`.
pub fn debye(k: u32, theta: f64) -> f64 {
    check_order(k).expect("Debye order");
    let x = theta.abs();
    if x < SERIES_SWITCH {
        return series(k, theta);
    }
    let kf = k as f64;
    let positive = kf * integral_fixed(k, x) / x.powi(k as i32);
    reflect(k, theta, positive)
}

/// `D_k(θ)` with the integral evaluated under `q`.
pub fn debye_dk(k: u32, theta: f64, q: &QuadratureSpec) -> Result<f64> {
    check_order(k)?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta must be finite, got {theta}")));
    }
    let x = theta.abs();
    if x < SERIES_SWITCH {
        return Ok(series(k, theta));
    }
    let integral = if x > TAIL_SWITCH {
        full_integral(k) - tail(k, x)
    } else {
        // the integral is scaled by k/x^k afterwards; tighten accordingly
        let scale = k as f64 / x.powi(k as i32);
        let spec = QuadratureSpec {
            abs_error_target: q.abs_error_target / scale.max(1.0),
            ..*q
        };
        integrate(|t| integrand(k, t), 0.0, x, &spec)?.value
    };
    let kf = k as f64;
    Ok(reflect(k, theta, kf * integral / x.powi(k as i32)))
}

fn tau_series(x: f64) -> f64 {
    let x2 = x * x;
    x * (1.0 / 9.0
        + x2 * (-1.0 / 900.0
            + x2 * (1.0 / 52920.0
                + x2 * (-1.0 / 2_721_600.0 + x2 * (1.0 / 131_725_440.0 - x2 * 691.0 / 4_249_941_696_000.0)))))
}

fn rho_series(x: f64) -> f64 {
    let x2 = x * x;
    x * (1.0 / 6.0
        + x2 * (-1.0 / 450.0
            + x2 * (1.0 / 23520.0
                + x2 * (-1.0 / 1_134_000.0 + x2 * (1.0 / 52_690_176.0 - x2 * 691.0 / 1_652_755_104_000.0)))))
}

/// Kendall's τ of the Frank copula. Odd in θ; `τ(0) = 0`.
pub fn tau_of_theta(theta: f64) -> f64 {
    let x = theta.abs();
    let t = if x < MOMENT_SERIES_SWITCH {
        tau_series(x)
    } else {
        1.0 - 4.0 / x * (1.0 - debye(1, x))
    };
    t.copysign(theta)
}

/// Spearman's ρ of the Frank copula. Odd in θ; `ρ(0) = 0`.
pub fn rho_of_theta(theta: f64) -> f64 {
    let x = theta.abs();
    let r = if x < MOMENT_SERIES_SWITCH {
        rho_series(x)
    } else {
        1.0 - 12.0 / x * (debye(1, x) - debye(2, x))
    };
    r.copysign(theta)
}
