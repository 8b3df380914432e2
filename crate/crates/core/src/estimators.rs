//! Pseudo-observations, sample rank correlations, the likelihood normal
//! equation `H(θ) = 0` and the three point estimators of θ.

use std::fmt;
use std::str::FromStr;

use crate::copula::{
    log_pdf_raw, score_constant, score_pair_part, score_raw, AssociationParameter, BivariateSample, UnitPair,
    SMALL_THETA, THETA_MAX,
};
use crate::debye::{rho_of_theta, tau_of_theta};
use crate::numeric::CompensatedSum;
use crate::roots::{brent, RootOptions};
use crate::{Error, Result};

/// Default absolute tolerance on the estimating-equation residual.
pub const DEFAULT_TOL: f64 = 1e-8;

/// First |θ| tried when bracketing away from zero.
const BRACKET_START: f64 = 1e-3;

/// Spacing of the grid scanned for further roots of `H`.
const SCAN_STEP: f64 = 0.5;

/// Minimum half-width of the scanned window.
const SCAN_MIN_HALF_WIDTH: f64 = 20.0;

/// Statistics smaller than this in magnitude are treated as exact zeros.
const ZERO_STATISTIC: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ml,
    Mm1,
    Mm2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ml, Method::Mm1, Method::Mm2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ml => "ml",
            Method::Mm1 => "mm1",
            Method::Mm2 => "mm2",
        }
    }

    /// Runs this estimator on `s`.
    pub fn estimate(&self, s: &BivariateSample, tol: f64) -> Result<EstimateResult> {
        match self {
            Method::Ml => mle_estimate(s, tol),
            Method::Mm1 => mme_tau_estimate(s, tol),
            Method::Mm2 => mme_rho_estimate(s, tol),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ml" | "mle" => Ok(Method::Ml),
            "mm1" | "tau" => Ok(Method::Mm1),
            "mm2" | "rho" => Ok(Method::Mm2),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub theta_hat: f64,
    pub method: Method,
    pub iterations: usize,
    /// |H(θ̂)| for ML, |moment map(θ̂) − statistic| for the moment estimators.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub independence_flag: bool,
    /// Set when the root scan found more than one sign change of `H`.
    pub multiplicity_warning: bool,
}

impl EstimateResult {
    fn independence(method: Method, residual: f64) -> Self {
        Self {
            theta_hat: 0.0,
            method,
            iterations: 0,
            residual,
            bracket: (0.0, 0.0),
            independence_flag: true,
            multiplicity_warning: false,
        }
    }

    pub fn parameter(&self) -> AssociationParameter {
        AssociationParameter::new(self.theta_hat).unwrap_or(AssociationParameter::independence())
    }
}

// ---------------------------------------------------------------------------
// pseudo-observations

#[derive(Debug, Clone, PartialEq)]
pub struct RawBivariateData {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl RawBivariateData {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        if x1.len() != x2.len() {
            return Err(Error::InvalidArgument(format!(
                "column lengths differ: {} vs {}",
                x1.len(),
                x2.len()
            )));
        }
        if x1.len() < 2 {
            return Err(Error::SampleTooSmall { n: x1.len(), min: 2 });
        }
        if let Some(v) = x1.iter().chain(&x2).find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value {v}")));
        }
        Ok(Self { x1, x2 })
    }

    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoMode {
    /// `rank / n`; the largest observation maps to 1.
    Raw,
    /// `(rank + 0.5) / (n + 1)`, always strictly inside (0, 1).
    Adjusted,
}

/// 1-based ranks, ties receiving the average of the positions they occupy.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Empirical cdf evaluated at each observation.
pub fn ecdf_values(x: &[f64], mode: PseudoMode) -> Vec<f64> {
    let n = x.len() as f64;
    let r = midranks(x);
    match mode {
        PseudoMode::Raw => r.into_iter().map(|r| r / n).collect(),
        PseudoMode::Adjusted => r.into_iter().map(|r| (r + 0.5) / (n + 1.0)).collect(),
    }
}

/// Maps raw data to pseudo-observations. Raw mode fails with
/// [`Error::BoundaryValue`] whenever a coordinate lands on 1.
pub fn pseudo_observations(data: &RawBivariateData, mode: PseudoMode) -> Result<BivariateSample> {
    let u1 = ecdf_values(&data.x1, mode);
    let u2 = ecdf_values(&data.x2, mode);
    BivariateSample::from_columns(&u1, &u2)
}

// ---------------------------------------------------------------------------
// rank statistics

/// Kendall's τ̂ over all pairs `k < l`, scoring a coordinate `+1` when
/// `U_ik <= U_il` and `-1` otherwise.
pub fn kendall_tau_hat(s: &BivariateSample) -> f64 {
    let p = s.pairs();
    let n = p.len();
    if n < 2 {
        return f64::NAN;
    }
    let total = (n as f64) * (n as f64 - 1.0) / 2.0;
    if n > 64 && !has_ties(s.u1()) && !has_ties(s.u2()) {
        let discordant = discordant_pairs(p) as f64;
        return (total - 2.0 * discordant) / total;
    }
    let mut sum: i64 = 0;
    for k in 0..n - 1 {
        for l in k + 1..n {
            let a = if p[k].u1() <= p[l].u1() { 1 } else { -1 };
            let b = if p[k].u2() <= p[l].u2() { 1 } else { -1 };
            sum += a * b;
        }
    }
    sum as f64 / total
}

fn has_ties(it: impl Iterator<Item = f64>) -> bool {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(f64::total_cmp);
    v.windows(2).any(|w| w[0] == w[1])
}

/// Number of discordant pairs for tie-free data, by counting inversions of
/// `u2` after sorting on `u1` (merge sort, O(n log n)).
fn discordant_pairs(p: &[UnitPair]) -> u64 {
    let mut sorted: Vec<&UnitPair> = p.iter().collect();
    sorted.sort_by(|a, b| a.u1().total_cmp(&b.u1()));
    let mut v: Vec<f64> = sorted.iter().map(|q| q.u2()).collect();
    let mut buf = vec![0.0; v.len()];
    count_inversions(&mut v, &mut buf)
}

fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(l, bl) + count_inversions(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Spearman's ρ̂ = 1 − 6 Σ D² / (n(n² − 1)) on midranks.
pub fn spearman_rho_hat(s: &BivariateSample) -> f64 {
    let n = s.len();
    if n < 2 {
        return f64::NAN;
    }
    let r1 = midranks(&s.u1().collect::<Vec<_>>());
    let r2 = midranks(&s.u2().collect::<Vec<_>>());
    let d2: CompensatedSum = r1.iter().zip(&r2).map(|(a, b)| (a - b) * (a - b)).collect();
    let nf = n as f64;
    1.0 - 6.0 * d2.total() / (nf * (nf * nf - 1.0))
}

// ---------------------------------------------------------------------------
// likelihood

/// `H(θ)`: the log-likelihood derivative divided by `n`. At θ = 0 this is
/// the limit from [`h_at_zero_limit`].
pub fn h_of_theta(s: &BivariateSample, theta: f64) -> f64 {
    if theta == 0.0 {
        return h_at_zero_limit(s);
    }
    let n = s.len() as f64;
    if theta.abs() < SMALL_THETA {
        let sum: CompensatedSum = s.pairs().iter().map(|p| score_raw(p.u1(), p.u2(), theta)).collect();
        return sum.total() / n;
    }
    let sum: CompensatedSum = s
        .pairs()
        .iter()
        .map(|p| score_pair_part(p.u1(), p.u2(), theta))
        .collect();
    score_constant(theta) + sum.total() / n
}

/// `lim_{θ→0} H(θ) = 1/2 − (Ū1 + Ū2) + 2·mean(U1 U2)`.
pub fn h_at_zero_limit(s: &BivariateSample) -> f64 {
    let sum: CompensatedSum = s
        .pairs()
        .iter()
        .map(|p| 0.5 * (1.0 - 2.0 * p.u1()) * (1.0 - 2.0 * p.u2()))
        .collect();
    sum.total() / s.len() as f64
}

/// `Σ_j ln c(u1j, u2j | θ)`.
pub fn log_likelihood(s: &BivariateSample, theta: AssociationParameter) -> f64 {
    if theta.is_independence_limit() {
        return 0.0;
    }
    let t = theta.value();
    let sum: CompensatedSum = s.pairs().iter().map(|p| log_pdf_raw(p.u1(), p.u2(), t)).collect();
    sum.total()
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Maximum-likelihood estimate: the root of `H`.
///
/// The sign of `H(0)` picks the half-line; `|θ|` then doubles from `1e-3`
/// until `H` changes sign (at most up to [`THETA_MAX`]) and Brent's method
/// refines the bracket. Finally `H` is scanned on a grid of step 0.5 over
/// `[−W, W]`, `W = max(20, 2|θ̂|)`; if further sign changes turn up, every
/// root is refined and the one with the largest log-likelihood is returned
/// with `multiplicity_warning` set.
pub fn mle_estimate(s: &BivariateSample, tol: f64) -> Result<EstimateResult> {
    check_tol(tol)?;
    s.ensure_len(2)?;
    let first = s.pairs()[0];
    if s.pairs().iter().all(|p| *p == first) {
        return Err(Error::DegenerateSample);
    }
    let h = |t: f64| h_of_theta(s, t);
    let h0 = h_at_zero_limit(s);
    if h0 == 0.0 {
        return Ok(EstimateResult::independence(Method::Ml, 0.0));
    }
    let side = h0.signum();

    let (mut lo, mut flo) = (0.0, h0);
    let mut hi = side * BRACKET_START;
    let mut fhi = h(hi);
    while fhi.signum() == side && fhi != 0.0 {
        if hi.abs() >= THETA_MAX {
            return Err(Error::NoBracket { boundary_estimate: hi });
        }
        lo = hi;
        flo = fhi;
        hi = (2.0 * hi).clamp(-THETA_MAX, THETA_MAX);
        fhi = h(hi);
    }
    let opts = RootOptions::with_ftol(tol);
    let root = brent(h, lo, hi, flo, fhi, &opts)?;
    let mut best = EstimateResult {
        theta_hat: root.x,
        method: Method::Ml,
        iterations: root.iterations,
        residual: root.fx.abs(),
        bracket: root.bracket,
        independence_flag: false,
        multiplicity_warning: false,
    };

    // look for further sign changes
    let half_width = (2.0 * root.x.abs()).clamp(SCAN_MIN_HALF_WIDTH, THETA_MAX);
    let steps = (2.0 * half_width / SCAN_STEP).ceil() as usize;
    let mut extra = Vec::new();
    let mut prev = (-half_width, h(-half_width));
    for i in 1..=steps {
        let t = (-half_width + i as f64 * SCAN_STEP).min(half_width);
        let ft = h(t);
        let crosses = prev.1.signum() != ft.signum() || ft == 0.0;
        let contains_found = prev.0 <= root.x + opts.xtol && root.x - opts.xtol <= t;
        if crosses && !contains_found && prev.1 != 0.0 {
            extra.push((prev, (t, ft)));
        }
        prev = (t, ft);
    }
    if !extra.is_empty() {
        best.multiplicity_warning = true;
        let mut best_ll = log_likelihood(s, best.parameter());
        for ((a, fa), (b, fb)) in extra {
            let Ok(r) = brent(h, a, b, fa, fb, &opts) else { continue };
            let ll = log_likelihood(s, AssociationParameter::new(r.x).unwrap_or(AssociationParameter::independence()));
            if ll > best_ll {
                best_ll = ll;
                best.theta_hat = r.x;
                best.iterations = r.iterations;
                best.residual = r.fx.abs();
                best.bracket = r.bracket;
            }
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// moment estimators

/// Solves `map(θ) = stat` for an odd, increasing `map`. The search runs on
/// `|stat|` over θ ≥ 0 and the sign is applied afterwards.
fn invert_moment(map: fn(f64) -> f64, stat: f64, tol: f64, method: Method) -> Result<EstimateResult> {
    check_tol(tol)?;
    if !stat.is_finite() {
        return Err(Error::InvalidArgument(format!("statistic must be finite, got {stat}")));
    }
    if stat.abs() < ZERO_STATISTIC {
        return Ok(EstimateResult::independence(method, stat.abs()));
    }
    let target = stat.abs();
    let g = |t: f64| map(t) - target;
    let (mut lo, mut glo) = (0.0, -target);
    let mut hi = 1.0;
    let mut ghi = g(hi);
    while ghi < 0.0 {
        if hi >= THETA_MAX {
            return Err(Error::MomentOutOfRange {
                statistic: stat,
                boundary_estimate: THETA_MAX.copysign(stat),
            });
        }
        lo = hi;
        glo = ghi;
        hi = (2.0 * hi).min(THETA_MAX);
        ghi = g(hi);
    }
    let root = brent(g, lo, hi, glo, ghi, &RootOptions::with_ftol(tol))?;
    let sign = stat.signum();
    let (a, b) = (sign * root.bracket.0, sign * root.bracket.1);
    Ok(EstimateResult {
        theta_hat: sign * root.x,
        method,
        iterations: root.iterations,
        residual: root.fx.abs(),
        bracket: (a.min(b), a.max(b)),
        independence_flag: false,
        multiplicity_warning: false,
    })
}

/// θ with `τ(θ) = tau`.
pub fn theta_from_tau(tau: f64, tol: f64) -> Result<EstimateResult> {
    invert_moment(tau_of_theta, tau, tol, Method::Mm1)
}

/// θ with `ρ(θ) = rho`.
pub fn theta_from_rho(rho: f64, tol: f64) -> Result<EstimateResult> {
    invert_moment(rho_of_theta, rho, tol, Method::Mm2)
}

/// Kendall moment estimate: the θ whose τ(θ) equals τ̂.
pub fn mme_tau_estimate(s: &BivariateSample, tol: f64) -> Result<EstimateResult> {
    s.ensure_len(2)?;
    theta_from_tau(kendall_tau_hat(s), tol)
}

/// Spearman moment estimate: the θ whose ρ(θ) equals ρ̂.
pub fn mme_rho_estimate(s: &BivariateSample, tol: f64) -> Result<EstimateResult> {
    s.ensure_len(2)?;
    theta_from_rho(spearman_rho_hat(s), tol)
}
