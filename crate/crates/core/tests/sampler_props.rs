use frankfit::estimators::{kendall_tau_hat, spearman_rho_hat};
use frankfit::sampler::sample_n;
use frankfit::debye::rho_of_theta;
use frankfit::{AssociationParameter, SeedSpec};

fn theta(t: f64) -> AssociationParameter {
    AssociationParameter::new(t).unwrap()
}

/// Kolmogorov–Smirnov distance of `x` from Uniform(0,1).
fn ks_uniform(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let i = i as f64;
            (v - i / n).abs().max(((i + 1.0) / n - v).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn marginals_are_uniform() {
    const N: usize = 100_000;
    // asymptotic 1% critical value of the one-sample KS statistic
    let critical = 1.628 / (N as f64).sqrt();
    for (k, t) in [-10.0, 0.1, 10.0].into_iter().enumerate() {
        let s = sample_n(theta(t), N, SeedSpec::new(4242, k as u64)).unwrap();
        let d1 = ks_uniform(s.u1().collect());
        let d2 = ks_uniform(s.u2().collect());
        assert!(d1 < critical && d2 < critical, "θ={t}: D = {d1}, {d2} vs {critical}");
    }
}

#[test]
fn spearman_rho_matches_population_value_at_negative_theta() {
    let s = sample_n(theta(-10.0), 100_000, SeedSpec::new(99, 3)).unwrap();
    let emp = spearman_rho_hat(&s);
    let want = rho_of_theta(-10.0);
    assert!((emp - want).abs() <= 0.01, "{emp} vs {want}");
}

#[test]
fn negated_parameter_matches_flipped_sample() {
    const N: usize = 40_000;
    let direct = kendall_tau_hat(&sample_n(theta(-3.0), N, SeedSpec::new(11, 0)).unwrap());
    let flipped = kendall_tau_hat(&sample_n(theta(3.0), N, SeedSpec::new(11, 1)).unwrap().flipped());
    // sd of τ̂ is below 2/(3√N) for any copula; the difference of two is below 1e-2
    let band = 3.0 * std::f64::consts::SQRT_2 * 2.0 / (3.0 * (N as f64).sqrt());
    assert!((direct - flipped).abs() < band, "{direct} vs {flipped}");
}

#[test]
fn small_sample_marginal_means() {
    let s = sample_n(theta(1.0), 25, SeedSpec::new(1, 0)).unwrap();
    let m1 = s.u1().sum::<f64>() / 25.0;
    let m2 = s.u2().sum::<f64>() / 25.0;
    assert!((m1 - 0.5).abs() < 0.3 && (m2 - 0.5).abs() < 0.3, "{m1}, {m2}");
}

#[test]
fn distinct_streams_differ() {
    let a = sample_n(theta(2.0), 50, SeedSpec::new(5, 0)).unwrap();
    let b = sample_n(theta(2.0), 50, SeedSpec::new(5, 1)).unwrap();
    let c = sample_n(theta(2.0), 50, SeedSpec::new(6, 0)).unwrap();
    assert_ne!(a, b);
    assert_ne!(a, c);
}
