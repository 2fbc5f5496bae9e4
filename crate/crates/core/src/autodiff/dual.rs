//! Dual numbers for forward-mode differentiation.
//!
//! [`Dual`] carries a real value and one directional derivative, [`CDual`]
//! the complex counterpart. Both implement the [`Real`] / [`Scalar`] traits
//! alongside `f64` / `Complex64`, so network algebra can be written once and
//! evaluated either plainly or with tangents attached.
//!
//! The value part of every dual operation is computed with exactly the same
//! expression as the plain operation, so a dual evaluation with zero tangents
//! reproduces plain values bit for bit.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Real scalar usable in model evaluation: `f64` or [`Dual`].
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    fn tangent(&self) -> f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn log10(self) -> Self;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn abs(self) -> Self;
}

/// Complex scalar usable in model evaluation: `Complex64` or [`CDual`].
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + From<Complex64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + Mul<<Self as Scalar>::Real, Output = Self>
{
    type Real: Real;

    fn new(re: Self::Real, im: Self::Real) -> Self;
    fn from_real(re: Self::Real) -> Self;
    fn value(&self) -> Complex64;
    fn tangent(&self) -> Complex64;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    /// Modulus; the tangent at zero is defined as 0.
    fn norm(&self) -> Self::Real;
    /// Phase in radians; the tangent at zero is defined as 0.
    fn arg(&self) -> Self::Real;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn log10(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn zero() -> Self {
        Self::from(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        Self::from(Complex64::new(1.0, 0.0))
    }

    fn j() -> Self {
        Self::from(Complex64::new(0.0, 1.0))
    }

    fn is_finite(&self) -> bool {
        self.value().is_finite()
    }
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn tangent(&self) -> f64 {
        0.0
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn log10(self) -> Self {
        f64::log10(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Scalar for Complex64 {
    type Real = f64;

    fn new(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn from_real(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn tangent(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn arg(&self) -> f64 {
        Complex64::arg(*self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn log10(self) -> Self {
        Complex64::log10(self)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn sinh(self) -> Self {
        Complex64::sinh(self)
    }
    fn cosh(self) -> Self {
        Complex64::cosh(self)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
    fn powf(self, p: f64) -> Self {
        Complex64::powf(self, p)
    }
}

/// Real dual number: value and derivative along one seed direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    pub fn constant(v: f64) -> Self {
        Self { v, d: 0.0 }
    }

    /// An independent variable (tangent 1).
    pub fn var(v: f64) -> Self {
        Self { v, d: 1.0 }
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, o: f64) -> Dual {
        Dual::new(self.v + o, self.d)
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, o: f64) -> Dual {
        Dual::new(self.v - o, self.d)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual::new(self.v * o, self.d * o)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, o: f64) -> Dual {
        Dual::new(self.v / o, self.d / o)
    }
}

impl Real for Dual {
    fn value(&self) -> f64 {
        self.v
    }
    fn tangent(&self) -> f64 {
        self.d
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d = if s == 0.0 { 0.0 } else { self.d / (2.0 * s) };
        Dual::new(s, d)
    }
    fn ln(self) -> Self {
        Dual::new(self.v.ln(), self.d / self.v)
    }
    fn log10(self) -> Self {
        Dual::new(
            self.v.log10(),
            self.d / (self.v * std::f64::consts::LN_10),
        )
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual::new(e, self.d * e)
    }
    fn sin(self) -> Self {
        Dual::new(self.v.sin(), self.d * self.v.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.v.cos(), -self.d * self.v.sin())
    }
    fn powi(self, n: i32) -> Self {
        let d = if n == 0 {
            0.0
        } else {
            self.d * n as f64 * self.v.powi(n - 1)
        };
        Dual::new(self.v.powi(n), d)
    }
    fn powf(self, p: f64) -> Self {
        let d = if p == 0.0 {
            0.0
        } else {
            self.d * p * self.v.powf(p - 1.0)
        };
        Dual::new(self.v.powf(p), d)
    }
    fn abs(self) -> Self {
        let d = if self.v > 0.0 {
            self.d
        } else if self.v < 0.0 {
            -self.d
        } else {
            0.0
        };
        Dual::new(self.v.abs(), d)
    }
}

/// Complex dual number: complex value and complex tangent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CDual {
    pub v: Complex64,
    pub d: Complex64,
}

impl CDual {
    pub fn new(v: Complex64, d: Complex64) -> Self {
        Self { v, d }
    }

    pub fn constant(v: Complex64) -> Self {
        Self {
            v,
            d: Complex64::new(0.0, 0.0),
        }
    }
}

impl From<Complex64> for CDual {
    fn from(v: Complex64) -> Self {
        CDual::constant(v)
    }
}

impl From<Dual> for CDual {
    fn from(r: Dual) -> Self {
        CDual::new(Complex64::new(r.v, 0.0), Complex64::new(r.d, 0.0))
    }
}

impl Add for CDual {
    type Output = CDual;
    fn add(self, o: CDual) -> CDual {
        CDual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for CDual {
    type Output = CDual;
    fn sub(self, o: CDual) -> CDual {
        CDual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for CDual {
    type Output = CDual;
    fn mul(self, o: CDual) -> CDual {
        CDual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for CDual {
    type Output = CDual;
    fn div(self, o: CDual) -> CDual {
        let q = self.v / o.v;
        CDual::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for CDual {
    type Output = CDual;
    fn neg(self) -> CDual {
        CDual::new(-self.v, -self.d)
    }
}

impl Mul<f64> for CDual {
    type Output = CDual;
    fn mul(self, o: f64) -> CDual {
        CDual::new(self.v * o, self.d * o)
    }
}

impl Div<f64> for CDual {
    type Output = CDual;
    fn div(self, o: f64) -> CDual {
        CDual::new(self.v / o, self.d / o)
    }
}

impl Mul<Dual> for CDual {
    type Output = CDual;
    fn mul(self, o: Dual) -> CDual {
        CDual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Scalar for CDual {
    type Real = Dual;

    fn new(re: Dual, im: Dual) -> Self {
        CDual::new(Complex64::new(re.v, im.v), Complex64::new(re.d, im.d))
    }
    fn from_real(re: Dual) -> Self {
        CDual::from(re)
    }
    fn value(&self) -> Complex64 {
        self.v
    }
    fn tangent(&self) -> Complex64 {
        self.d
    }
    fn re(&self) -> Dual {
        Dual::new(self.v.re, self.d.re)
    }
    fn im(&self) -> Dual {
        Dual::new(self.v.im, self.d.im)
    }
    fn norm(&self) -> Dual {
        let m = self.v.norm();
        let d = if m == 0.0 {
            0.0
        } else {
            (self.v.re * self.d.re + self.v.im * self.d.im) / m
        };
        Dual::new(m, d)
    }
    fn arg(&self) -> Dual {
        let m2 = self.v.norm_sqr();
        let d = if m2 == 0.0 {
            0.0
        } else {
            (self.v.re * self.d.im - self.v.im * self.d.re) / m2
        };
        Dual::new(self.v.arg(), d)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d = if s == Complex64::new(0.0, 0.0) {
            Complex64::new(0.0, 0.0)
        } else {
            self.d / (s * 2.0)
        };
        CDual::new(s, d)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        CDual::new(e, self.d * e)
    }
    fn ln(self) -> Self {
        CDual::new(self.v.ln(), self.d / self.v)
    }
    fn log10(self) -> Self {
        CDual::new(self.v.log10(), self.d / (self.v * std::f64::consts::LN_10))
    }
    fn sin(self) -> Self {
        CDual::new(self.v.sin(), self.d * self.v.cos())
    }
    fn cos(self) -> Self {
        CDual::new(self.v.cos(), -self.d * self.v.sin())
    }
    fn sinh(self) -> Self {
        CDual::new(self.v.sinh(), self.d * self.v.cosh())
    }
    fn cosh(self) -> Self {
        CDual::new(self.v.cosh(), self.d * self.v.sinh())
    }
    fn powi(self, n: i32) -> Self {
        let d = if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.d * self.v.powi(n - 1) * n as f64
        };
        CDual::new(self.v.powi(n), d)
    }
    fn powf(self, p: f64) -> Self {
        let d = if p == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.d * self.v.powf(p - 1.0) * p
        };
        CDual::new(self.v.powf(p), d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // central difference of a complex function along the real axis of the input
    fn fd(f: impl Fn(Complex64) -> Complex64, x: Complex64) -> Complex64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn elementary_tangents_match_finite_differences() {
        let x = c(0.7, -0.4);
        let seeded = CDual::new(x, c(1.0, 0.0));
        let cases: Vec<(&str, CDual, Complex64)> = vec![
            ("sqrt", seeded.sqrt(), fd(|z| z.sqrt(), x)),
            ("exp", seeded.exp(), fd(|z| z.exp(), x)),
            ("ln", seeded.ln(), fd(|z| z.ln(), x)),
            ("log10", seeded.log10(), fd(|z| z.log10(), x)),
            ("sin", seeded.sin(), fd(|z| z.sin(), x)),
            ("cos", seeded.cos(), fd(|z| z.cos(), x)),
            ("sinh", seeded.sinh(), fd(|z| z.sinh(), x)),
            ("cosh", seeded.cosh(), fd(|z| z.cosh(), x)),
            ("powi", seeded.powi(3), fd(|z| z.powi(3), x)),
            ("powf", seeded.powf(2.5), fd(|z| z.powf(2.5), x)),
            ("recip", CDual::one() / seeded, fd(|z| 1.0 / z, x)),
        ];
        for (name, got, want) in cases {
            assert!(close(got.d, want, 1e-8), "{name}: {} vs {}", got.d, want);
        }
    }

    #[test]
    fn modulus_and_phase_tangents() {
        let z = CDual::new(c(3.0, 4.0), c(1.0, 2.0));
        // d|z| = (re dre + im dim)/|z| = (3 + 8)/5
        assert!((z.norm().d - 11.0 / 5.0).abs() < 1e-15);
        // d arg = (re dim - im dre)/|z|^2 = (6 - 4)/25
        assert!((z.arg().d - 2.0 / 25.0).abs() < 1e-15);
        let zero = CDual::new(c(0.0, 0.0), c(1.0, 1.0));
        assert_eq!(zero.norm().d, 0.0);
        assert_eq!(zero.arg().d, 0.0);
    }

    #[test]
    fn real_dual_rules() {
        let x = Dual::var(2.0);
        assert_eq!(x.d, 1.0);
        assert!((x.ln().d - 0.5).abs() < 1e-15);
        assert!((x.sqrt().d - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((x.powi(3).d - 12.0).abs() < 1e-12);
        assert!((x.log10().d - 1.0 / (2.0 * std::f64::consts::LN_10)).abs() < 1e-15);
        assert_eq!(Dual::var(0.0).abs().d, 0.0);
        assert_eq!(Dual::var(0.0).sqrt().d, 0.0);
        assert_eq!((-x).abs().d, 1.0);
    }

    #[test]
    fn zero_tangent_values_are_plain_values() {
        let x = c(0.3, 1.9);
        let y = c(-2.0, 0.25);
        let dx = CDual::constant(x);
        let dy = CDual::constant(y);
        assert_eq!(((dx * dy) / (dx + dy)).v, (x * y) / (x + y));
        assert_eq!((dx * dy).sqrt().cosh().v, (x * y).sqrt().cosh());
        assert_eq!(dx.norm().v, x.norm());
    }

    fn arb_cdual() -> impl Strategy<Value = CDual> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
            .prop_map(|(a, b, c_, d)| CDual::new(c(a, b), c(c_, d)))
    }

    proptest! {
        #[test]
        fn product_rule(f in arb_cdual(), g in arb_cdual()) {
            let p = f * g;
            let want = f.v * g.d + g.v * f.d;
            prop_assert!((p.d - want).norm() <= 1e-14 * want.norm().max(1e-300));
        }

        #[test]
        fn linearity(f in arb_cdual(), g in arb_cdual(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let lin = f * a + g * b;
            prop_assert_eq!(lin.d, f.d * a + g.d * b);
        }
    }
}
