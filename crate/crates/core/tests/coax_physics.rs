use proptest::prelude::*;

use rffit::models::{coax_rlgc, PhysicalCoaxial};
use rffit::netcore::Frequency;
use rffit::params::Parameter;

fn coax(din: f64, dout: f64, epr: f64, rho: f64, tand: f64, length: f64) -> PhysicalCoaxial {
    PhysicalCoaxial {
        din: Parameter::fixed(din).scale(1e-3).unwrap(),
        dout: Parameter::fixed(dout).scale(1e-3).unwrap(),
        epr: Parameter::fixed(epr).n(2).unwrap(),
        rho: Parameter::fixed(rho).scale(1e-8).unwrap(),
        tand: Parameter::fixed(tand).n(2).unwrap(),
        length: Parameter::fixed(length),
        ..Default::default()
    }
}

#[test]
fn line_constants_match_closed_forms() {
    let m = coax(1.0, 3.0, 2.0, 1.7, 0.0, 1.0).build().unwrap();
    let f = Frequency::new(1.0, 1.0, 1, "GHz").unwrap();
    let k = coax_rlgc(&m, &f).unwrap();
    let (r_, l_, g_, c_) = (k.r[0], k.l[0], k.g[0], k.c[0]);
    let ln = 3f64.ln();
    let eps0 = 8.8541878128e-12;
    let mu0 = 1.25663706212e-6;
    assert!((c_ - 2.0 * std::f64::consts::PI * eps0 * 2.0 / ln).abs() / c_ < 1e-9);
    assert!((l_ - mu0 * ln / (2.0 * std::f64::consts::PI)).abs() / l_ < 1e-9);
    let rs = (std::f64::consts::PI * 1e9 * mu0 * 1.7e-8).sqrt();
    let r = rs / std::f64::consts::PI * (1.0 / 1e-3 + 1.0 / 3e-3);
    assert!((r_ - r).abs() / r < 1e-9);
    assert_eq!(g_, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn passive_reciprocal_and_divisible(
        din in 0.2f64..2.0,
        ratio in 1.2f64..6.0,
        epr in 1.0f64..4.0,
        rho in 0.0f64..5.0,
        tand in 0.0f64..0.01,
        length in 0.1f64..20.0,
    ) {
        let f = Frequency::new(0.01, 3.0, 31, "GHz").unwrap();
        let whole = coax(din, din * ratio, epr, rho, tand, length).build().unwrap();
        let half = coax(din, din * ratio, epr, rho, tand, length / 2.0).build().unwrap();
        let s = whole.eval_s(&f).unwrap();
        // beyond ~60 dB of loss cosh² − sinh² cancels in the ABCD route
        prop_assume!(s.get(f.len() - 1, 1, 0).norm() > 1e-3);
        let s2 = half.cascade(&half).unwrap().eval_s(&f).unwrap();
        for k in 0..f.len() {
            let p1 = s.get(k, 0, 0).norm_sqr() + s.get(k, 1, 0).norm_sqr();
            prop_assert!(p1 <= 1.0 + 1e-12, "power gain {}", p1);
            prop_assert!((s.get(k, 0, 1) - s.get(k, 1, 0)).norm() < 1e-12);
            prop_assert!((s.get(k, 0, 0) - s.get(k, 1, 1)).norm() < 1e-12);
            for i in 0..2 {
                for j in 0..2 {
                    let (a, b) = (s.get(k, i, j), s2.get(k, i, j));
                    // heavily attenuated, mismatched lines lose absolute digits in the
                    // ABCD product, so small entries get an absolute floor
                    prop_assert!((a - b).norm() <= 1e-9 * a.norm() + 1e-11, "{} vs {} at k={} ({},{})", a, b, k, i, j);
                }
            }
        }
    }

    #[test]
    fn lossless_line_conserves_power(din in 0.2f64..2.0, ratio in 1.2f64..6.0, epr in 1.0f64..4.0, length in 0.1f64..20.0) {
        let f = Frequency::new(0.01, 3.0, 31, "GHz").unwrap();
        let s = coax(din, din * ratio, epr, 0.0, 0.0, length).build().unwrap().eval_s(&f).unwrap();
        for k in 0..f.len() {
            let p = s.get(k, 0, 0).norm_sqr() + s.get(k, 1, 0).norm_sqr();
            prop_assert!((p - 1.0).abs() < 1e-9);
        }
    }
}
