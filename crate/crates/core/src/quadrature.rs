//! Gauss–Legendre and adaptive quadrature on intervals and on the unit square.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Nodes evaluated per panel by the adaptive rule.
const ADAPTIVE_PANEL_ORDER: usize = 15;
const ADAPTIVE_MAX_DEPTH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// One fixed-order Gauss–Legendre rule of `max_nodes` points; the error
    /// is estimated against a rule of two thirds the order.
    GaussLegendre,
    /// Recursive interval bisection with 15-point Gauss–Legendre panels.
    AdaptiveBisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub max_nodes: usize,
    pub abs_error_target: f64,
}

impl QuadratureSpec {
    pub fn new(rule: QuadratureRule, max_nodes: usize, abs_error_target: f64) -> Result<Self> {
        if abs_error_target.is_nan() || abs_error_target <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "abs_error_target must be positive, got {abs_error_target}"
            )));
        }
        if max_nodes < 15 {
            return Err(Error::InvalidArgument(format!(
                "max_nodes must be at least 15, got {max_nodes}"
            )));
        }
        Ok(Self {
            rule,
            max_nodes,
            abs_error_target,
        })
    }

    pub fn gauss_legendre(nodes: usize, abs_error_target: f64) -> Result<Self> {
        Self::new(QuadratureRule::GaussLegendre, nodes, abs_error_target)
    }

    pub fn adaptive(max_nodes: usize, abs_error_target: f64) -> Result<Self> {
        Self::new(QuadratureRule::AdaptiveBisection, max_nodes, abs_error_target)
    }
}

/// Result of a checked integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor-product rule over [0,1]².
    pub fn integrate_unit_square<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let pts: Vec<(f64, f64)> = self.mapped(0.0, 1.0).collect();
        let mut total = 0.0;
        for &(x, wx) in &pts {
            let mut row = 0.0;
            for &(y, wy) in &pts {
                row += wy * f(x, y);
            }
            total += wx * row;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn companion_order(n: usize) -> usize {
    (2 * n / 3).max(10)
}

/// Integrates `f` over [a, b] according to `spec`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    match spec.rule {
        QuadratureRule::GaussLegendre => {
            let hi = GaussLegendre::new(spec.max_nodes);
            let lo = GaussLegendre::new(companion_order(spec.max_nodes));
            let v_hi = hi.integrate(a, b, &mut f);
            let v_lo = lo.integrate(a, b, &mut f);
            check(v_hi, (v_hi - v_lo).abs(), hi.len() + lo.len(), spec)
        }
        QuadratureRule::AdaptiveBisection => {
            let rule = GaussLegendre::new(ADAPTIVE_PANEL_ORDER);
            let mut used = 0;
            let whole = rule.integrate(a, b, &mut f);
            used += rule.len();
            let (value, err) = adaptive_step(
                &rule,
                &mut f,
                a,
                b,
                whole,
                spec.abs_error_target,
                0,
                &mut used,
                spec.max_nodes,
            );
            check(value, err, used, spec)
        }
    }
}

fn check(value: f64, error: f64, nodes: usize, spec: &QuadratureSpec) -> Result<Integral> {
    if error <= spec.abs_error_target && value.is_finite() {
        Ok(Integral {
            value,
            error_estimate: error,
            nodes_used: nodes,
        })
    } else {
        Err(Error::QuadratureNotConverged {
            estimate: value,
            error,
            nodes,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    used: &mut usize,
    budget: usize,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, &mut *f);
    let right = rule.integrate(m, b, &mut *f);
    *used += 2 * rule.len();
    let halves = left + right;
    // Gauss rules converge fast; the halves estimate is far better than the
    // difference suggests, so the difference is a conservative bound.
    let err = (halves - whole).abs();
    if err <= tol || depth >= ADAPTIVE_MAX_DEPTH || *used >= budget {
        return (halves, err);
    }
    let (vl, el) = adaptive_step(rule, f, a, m, left, 0.5 * tol, depth + 1, used, budget);
    let (vr, er) = adaptive_step(rule, f, m, b, right, 0.5 * tol, depth + 1, used, budget);
    (vl + vr, el + er)
}

/// Integrates `f(u1, u2)` over the unit square according to `spec`.
///
/// The Gauss–Legendre rule is an `n × n` tensor product; the adaptive rule
/// nests two adaptive 1-D integrations.
pub fn integrate_unit_square<F: Fn(f64, f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<Integral> {
    match spec.rule {
        QuadratureRule::GaussLegendre => {
            let hi = GaussLegendre::new(spec.max_nodes);
            let lo = GaussLegendre::new(companion_order(spec.max_nodes));
            let v_hi = hi.integrate_unit_square(&f);
            let v_lo = lo.integrate_unit_square(&f);
            check(
                v_hi,
                (v_hi - v_lo).abs(),
                hi.len() * hi.len() + lo.len() * lo.len(),
                spec,
            )
        }
        QuadratureRule::AdaptiveBisection => {
            let inner_spec = QuadratureSpec {
                abs_error_target: 0.1 * spec.abs_error_target,
                ..*spec
            };
            let mut nodes = 0usize;
            let mut inner_err = 0.0f64;
            let mut failure = None;
            let outer = integrate(
                |x| match integrate(|y| f(x, y), 0.0, 1.0, &inner_spec) {
                    Ok(r) => {
                        nodes += r.nodes_used;
                        inner_err = inner_err.max(r.error_estimate);
                        r.value
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                0.0,
                1.0,
                spec,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let outer = outer?;
            check(
                outer.value,
                outer.error_estimate + inner_err,
                nodes,
                spec,
            )
        }
    }
}
