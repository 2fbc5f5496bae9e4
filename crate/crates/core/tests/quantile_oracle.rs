//! Normal quantile and CDF against an independent Simpson-rule integral of
//! the Gaussian density.

use proptest::prelude::*;
use rffit::params::{normal_cdf, normal_quantile, Parameter};

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ(x) by composite Simpson integration, using the tail for x < 0 to keep
/// relative accuracy where Φ is small.
fn oracle_cdf(x: f64) -> f64 {
    let upper_tail = |a: f64| {
        // ∫_a^{a+15} φ; beyond that the density is below 1e-48 of φ(a)
        let n = 60_000;
        let b = a + 15.0;
        let h = (b - a) / n as f64;
        // Neumaier-compensated sum of the Simpson terms
        let (mut s, mut comp) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let term = w * density(a + i as f64 * h);
            let t = s + term;
            comp += if s.abs() >= term.abs() { (s - t) + term } else { (term - t) + s };
            s = t;
        }
        (s + comp) * h / 3.0
    };
    if x < 0.0 {
        upper_tail(-x)
    } else {
        1.0 - upper_tail(x)
    }
}

#[test]
fn oracle_is_sane() {
    assert!((oracle_cdf(0.0) - 0.5).abs() < 1e-14);
    assert!((oracle_cdf(1.959963984540054) - 0.975).abs() < 1e-13);
}

#[test]
fn tabulated_quantiles() {
    let table = [
        (0.5, 0.0),
        (0.975, 1.959963984540054),
        (0.025, -1.959963984540054),
        (0.84134474606854293, 1.0),
        (0.99865010196837, 3.0),
        (1e-6, -4.753424308822899),
    ];
    for (u, x) in table {
        let q = normal_quantile(u).unwrap();
        assert!((q - x).abs() < 1e-9 * x.abs().max(1.0), "q({u}) = {q}, want {x}");
    }
}

#[test]
fn cdf_matches_oracle() {
    for i in -80..=80 {
        let x = i as f64 * 0.1;
        let (a, b) = (normal_cdf(x), oracle_cdf(x));
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-15, "x = {x}: {a} vs {b}");
    }
}

#[test]
fn quantile_rejects_closed_interval() {
    for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(normal_quantile(u).is_err(), "{u}");
    }
}

proptest! {
    #[test]
    fn quantile_inverts_oracle_cdf(u in 1e-12f64..(1.0 - 1e-12)) {
        let x = normal_quantile(u).unwrap();
        let back = oracle_cdf(x);
        // a 1e-9 error in x moves Φ by about 1e-9·φ(x); add rounding of u
        let tol = 1e-9 * density(x) + 4.0 * f64::EPSILON * u.min(1.0 - u).max(u * 0.25);
        prop_assert!((back - u).abs() <= tol, "u={u} x={x} back={back}");
    }

    #[test]
    fn quantile_is_monotone(a in 1e-9f64..0.999_999_999, b in 1e-9f64..0.999_999_999) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(normal_quantile(lo).unwrap() <= normal_quantile(hi).unwrap());
    }

    #[test]
    fn normal_prior_transform_matches_quantile(mu in -10.0f64..10.0, sigma in 0.01f64..5.0, u in 0.001f64..0.999) {
        let p = Parameter::normal(mu, sigma).unwrap();
        let x = p.transform_component(u).unwrap();
        prop_assert!((x - (mu + sigma * normal_quantile(u).unwrap())).abs() < 1e-12 * (1.0 + x.abs()));
    }
}
