//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line straight to
//! stderr (bypassing output capture) and then asserts.

mod common;

use std::io::Write;
use std::time::Instant;

use frankfit::copula::{conditional_cdf, frank_pdf};
use frankfit::debye::{debye, rho_of_theta, tau_of_theta};
use frankfit::estimators::{h_of_theta, kendall_tau_hat, mle_estimate, spearman_rho_hat};
use frankfit::fisher::{default_quadrature, fisher_information, i2_monte_carlo, i2_quadrature, score_variance_monte_carlo};
use frankfit::quadrature::{integrate_unit_square, GaussLegendre, QuadratureSpec};
use frankfit::sampler::{sample_n, sample_pair_with_latent};
use frankfit::simstudy::{relative_difference, run_cell, run_cell_flipped, MetricsRow, SimulationCell};
use frankfit::{AssociationParameter, Method, SeedSpec, UnitPair};

/// Fixed before any run; never tuned.
const SEED: u64 = 20_240_601;
const L: usize = 20_000;
const TOL: f64 = 1e-8;

fn th(v: f64) -> AssociationParameter {
    AssociationParameter::new(v).unwrap()
}

fn report(id: u32, title: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {id:>2}: {title}: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn within(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn cell(n: usize, theta: f64) -> MetricsRow {
    run_cell(&SimulationCell::new(n, theta, L, SEED).unwrap())
}

#[test]
fn criterion_01_cell_n25_theta1() {
    let r = cell(25, 1.0);
    let checks = [
        ("bias_ml", r.ml.bias, 0.045, 0.028),
        ("mse_ml", r.ml.mse, 1.729, 0.06),
        ("bias_mm1", r.mm1.bias, -0.534, 0.028),
        ("mse_mm1", r.mm1.mse, 1.449, 0.06),
        ("bias_mm2", r.mm2.bias, -0.568, 0.03),
        ("mse_mm2", r.mm2.mse, 1.428, 0.06),
    ];
    let ok = checks.iter().all(|&(_, x, w, t)| within(x, w, t));
    let detail: Vec<String> = checks
        .iter()
        .map(|&(name, x, w, t)| format!("{name}={x:.4} (want {w}±{t})"))
        .collect();
    report(1, "n=25 theta=1 L=20000", ok, &detail.join(", "));
    assert!(ok, "{}", detail.join(", "));
}

#[test]
fn criterion_02_cell_n25_theta10() {
    let r = cell(25, 10.0);
    let a = within(r.mm1.bias, -6.456, 0.1);
    let b = within(r.ml.mse, 5.287, 0.25);
    let detail = format!(
        "bias_mm1={:.4} (want -6.456±0.1), mse_ml={:.4} (want 5.287±0.25)",
        r.mm1.bias, r.ml.mse
    );
    report(2, "n=25 theta=10 L=20000", a && b, &detail);
    assert!(a && b, "{detail}");
}

#[test]
fn criterion_03_relative_difference() {
    let inv5 = 1.0 / fisher_information(5.0).unwrap().i_total;
    let inv1 = 1.0 / fisher_information(1.0).unwrap().i_total;
    let rd5: Vec<f64> = [25, 50, 75, 100]
        .iter()
        .map(|&n| relative_difference(&cell(n, 5.0), inv5))
        .collect();
    let rd1 = relative_difference(&cell(100, 1.0), inv1);
    let a = within(rd5[0], 0.147, 0.02);
    let b = within(rd1, 0.041, 0.02);
    let c = rd5.windows(2).all(|w| w[1] < w[0]);
    let detail = format!(
        "RD(25,5)={:.4} (want 0.147±0.02), RD(100,1)={rd1:.4} (want 0.041±0.02), RD(n,5) over n=25..100 = {:.4?} decreasing={c}",
        rd5[0], rd5
    );
    report(3, "relative difference", a && b && c, &detail);
    assert!(a && b && c, "{detail}");
}

#[test]
fn criterion_04_density_normalization() {
    let start = Instant::now();
    let q = QuadratureSpec::gauss_legendre(128, 1e-9).unwrap();
    let mut worst: f64 = 0.0;
    for t in [-10.0, -1.0, 0.1, 5.0, 10.0] {
        let p = th(t);
        let r = integrate_unit_square(|a, b| frank_pdf(UnitPair::new(a, b).unwrap(), p), &q).unwrap();
        worst = worst.max((r.value - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst < 1e-8 && secs < 5.0;
    let detail = format!("max |integral - 1| = {worst:.3e} (< 1e-8), runtime {secs:.2}s (< 5s)");
    report(4, "density normalization", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_05_inversion_roundtrip() {
    let mut worst: f64 = 0.0;
    for (i, t) in [-8.0, -1.0, 1.0, 8.0].into_iter().enumerate() {
        let mut rng = SeedSpec::new(SEED, 500 + i as u64).rng();
        for _ in 0..10_000 {
            let (p, v) = sample_pair_with_latent(th(t), &mut rng);
            let c = conditional_cdf(p.u2(), p.u1(), th(t)).unwrap();
            worst = worst.max((c - v).abs());
        }
    }
    let ok = worst < 1e-10;
    let detail = format!("max |h(u2|u1) - v| = {worst:.3e} (< 1e-10)");
    report(5, "sampler inversion roundtrip", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_06_moment_maps() {
    let s = sample_n(th(5.0), 200_000, SeedSpec::new(SEED, 600)).unwrap();
    let (tau, rho) = (kendall_tau_hat(&s), spearman_rho_hat(&s));
    let (tau5, rho5) = (tau_of_theta(5.0), rho_of_theta(5.0));
    let ok = (tau - tau5).abs() <= 0.01 && (rho - rho5).abs() <= 0.01;
    let detail = format!("tau_hat={tau:.5} vs tau(5)={tau5:.5}, rho_hat={rho:.5} vs rho(5)={rho5:.5} (each within 0.01)");
    report(6, "moment-map consistency", ok, &detail);
    assert!(ok, "{detail}");
}

/// `D_k(θ)` from its defining integral, for either sign of θ.
fn debye_direct(k: u32, theta: f64) -> f64 {
    let rule = GaussLegendre::new(80);
    let f = |t: f64| if t == 0.0 { 0.0 } else { t.powi(k as i32) / t.exp_m1() };
    let integral = if theta > 0.0 {
        rule.integrate(0.0, theta, f)
    } else {
        -rule.integrate(theta, 0.0, f)
    };
    k as f64 * integral / theta.powi(k as i32)
}

#[test]
fn criterion_07_debye_reflection() {
    let mut worst: f64 = 0.0;
    for k in [1u32, 2] {
        for t in [0.5, 2.0, 10.0] {
            let kf = k as f64;
            let direct = debye_direct(k, -t) - debye_direct(k, t) - kf * t / (kf + 1.0);
            let lib = debye_direct(k, -t) - debye(k, t) - kf * t / (kf + 1.0);
            worst = worst.max(direct.abs()).max(lib.abs()).max((debye(k, -t) - debye_direct(k, -t)).abs());
        }
    }
    let ok = worst < 1e-10;
    let detail = format!("max reflection residual {worst:.3e} (< 1e-10)");
    report(7, "Debye reflection identities", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_08_fisher_cross_method() {
    let q = default_quadrature();
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, t) in [1.0, 5.0, 10.0].into_iter().enumerate() {
        let quad = i2_quadrature(t, &q).unwrap();
        let mc = i2_monte_carlo(t, 1_000_000, SeedSpec::new(SEED, 800 + i as u64)).unwrap();
        let z = (quad - mc.i2).abs() / mc.mc_standard_error;
        ok &= z <= 3.0;
        parts.push(format!("I2({t}): quad={quad:.6} mc={:.6} |z|={z:.2}", mc.i2));
    }
    for (i, t) in [1.0, 5.0].into_iter().enumerate() {
        let info = fisher_information(t).unwrap().i_total;
        let (var, se) = score_variance_monte_carlo(th(t), 1_000_000, SeedSpec::new(SEED, 810 + i as u64)).unwrap();
        let z = (info - var).abs() / se;
        ok &= z <= 3.0;
        parts.push(format!("Var(score)({t})={var:.6} I={info:.6} |z|={z:.2}"));
    }
    let (a, b) = (fisher_information(2.0).unwrap().i_total, fisher_information(-2.0).unwrap().i_total);
    let rel = (a - b).abs() / a;
    ok &= rel < 1e-6;
    parts.push(format!("|I(2)-I(-2)|/I(2)={rel:.2e}"));
    report(8, "Fisher cross-method", ok, &parts.join("; "));
    assert!(ok, "{}", parts.join("; "));
}

#[test]
fn criterion_09_flip_equivariance() {
    let mut worst: f64 = 0.0;
    for l in 0..100u64 {
        let s = sample_n(th(3.0), 50, SeedSpec::new(SEED, 900).derive(l)).unwrap();
        let f = s.flipped();
        for m in Method::ALL {
            let a = m.estimate(&s, TOL).unwrap().theta_hat;
            let b = m.estimate(&f, TOL).unwrap().theta_hat;
            worst = worst.max((a + b).abs());
        }
    }
    let c = SimulationCell::new(50, 3.0, 2000, SEED).unwrap();
    let (pos, neg) = (run_cell(&c), run_cell_flipped(&c));
    let mut bias_gap: f64 = 0.0;
    let mut mse_gap: f64 = 0.0;
    for m in Method::ALL {
        bias_gap = bias_gap.max((pos.get(m).bias + neg.get(m).bias).abs());
        mse_gap = mse_gap.max((pos.get(m).mse - neg.get(m).mse).abs());
    }
    let ok = worst <= 2.0 * TOL && bias_gap <= 2.0 * TOL && mse_gap <= 1e-6 && pos.failure_count() == neg.failure_count();
    let detail = format!(
        "max |E(flip s) + E(s)| = {worst:.2e} (<= 2e-8); bias(θ)+bias(-θ) = {bias_gap:.2e}; mse gap {mse_gap:.2e}"
    );
    report(9, "estimator flip equivariance", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_10_mle_residuals_on_grid() {
    let ns = [5usize, 10, 15, 20, 25, 50, 75, 100];
    let thetas = [0.1, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    let mut accepted = 0usize;
    let mut failed = 0usize;
    let mut worst: f64 = 0.0;
    for &n in &ns {
        for &t in &thetas {
            let c = SimulationCell::new(n, t, 1000, SEED).unwrap();
            for l in 0..c.replications {
                let s = c.sample(l);
                match mle_estimate(&s, TOL) {
                    Ok(r) => {
                        accepted += 1;
                        worst = worst.max(r.residual).max(h_of_theta(&s, r.theta_hat).abs());
                    }
                    Err(_) => failed += 1,
                }
            }
        }
    }
    let ok = worst <= TOL;
    let detail = format!("{accepted} accepted, {failed} failed; max |H(theta_hat)| = {worst:.2e} (<= 1e-8)");
    report(10, "MLE residual contract", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_11_h_limits_fixed_sample() {
    let s = common::fixed_sample();
    let n = s.len() as f64;
    let plus_limit = -s.pairs().iter().map(|p| (p.u1() - p.u2()).abs()).sum::<f64>() / n;
    let minus_limit = s
        .pairs()
        .iter()
        .map(|p| {
            let a = p.u1() + p.u2();
            1.0 - a + 2.0 * a.max(1.0)
        })
        .sum::<f64>()
        / n;
    let (hp, hm) = (h_of_theta(&s, 600.0), h_of_theta(&s, -600.0));
    let a = (hp - plus_limit).abs() <= 1e-6;
    let b = (hm - minus_limit).abs() <= 1e-6;
    let detail = format!(
        "H(600)={hp:.9} vs {plus_limit:.9} (gap {:.2e}); H(-600)={hm:.9} vs {minus_limit:.9} (gap {:.2e}); tolerance 1e-6",
        (hp - plus_limit).abs(),
        (hm - minus_limit).abs()
    );
    report(11, "H limits on the 25-point dataset", a && b, &detail);
    assert!(a && b, "{detail}");
}
