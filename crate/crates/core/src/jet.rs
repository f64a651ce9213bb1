//! Truncated Taylor arithmetic.
//!
//! [`Jet2`] carries a field value together with the derivatives the PDE needs
//! (`u_x`, `u_xx`, `u_t`). [`Taylor2`] carries a full gradient and Hessian in
//! `N` independent variables and is used for infinitesimals `p(x, t, u)`,
//! `r(x, t, u)` whose mixed partials enter the determining equations.
//!
//! Closed forms are written once against the [`Scalar`] trait and evaluated
//! with `f64`, `Jet2` or `Taylor2<N>` as needed.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type usable in closed-form expressions.
///
/// Elementary functions are provided through [`Scalar::chain`], which applies a
/// scalar function given its value and first two derivatives at `self.value()`.
pub trait Scalar:
    Copy
    + fmt::Debug
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
    fn cst(c: f64) -> Self;

    fn value(&self) -> f64;

    /// Applies `f` with `f(v) = f0`, `f'(v) = f1`, `f''(v) = f2`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self;

    fn recip(self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn powf(self, e: f64) -> Self {
        let v = self.value();
        if e == 0.0 {
            return Self::cst(1.0);
        }
        if e.fract() == 0.0 && e.abs() < 64.0 {
            return self.powi(e as i32);
        }
        let f0 = v.powf(e);
        let f1 = e * v.powf(e - 1.0);
        let f2 = e * (e - 1.0) * v.powf(e - 2.0);
        self.chain(f0, f1, f2)
    }

    fn powi(self, e: i32) -> Self {
        let v = self.value();
        let f0 = v.powi(e);
        let f1 = if e == 0 { 0.0 } else { e as f64 * v.powi(e - 1) };
        let f2 = if e == 0 || e == 1 {
            0.0
        } else {
            (e as f64) * (e as f64 - 1.0) * v.powi(e - 2)
        };
        self.chain(f0, f1, f2)
    }

    fn sqrt(self) -> Self {
        let s = self.value().sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    fn tanh(self) -> Self {
        let th = self.value().tanh();
        let s2 = 1.0 - th * th;
        self.chain(th, s2, -2.0 * th * s2)
    }

    fn tan(self) -> Self {
        let tn = self.value().tan();
        let sec2 = 1.0 + tn * tn;
        self.chain(tn, sec2, 2.0 * tn * sec2)
    }
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn chain(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn powf(self, e: f64) -> Self {
        if e.fract() == 0.0 && e.abs() < 64.0 {
            self.powi(e as i32)
        } else {
            f64::powf(self, e)
        }
    }
    fn powi(self, e: i32) -> Self {
        f64::powi(self, e)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value of `u` with `u_x`, `u_xx` and `u_t`.
///
/// Mixed and second time derivatives are not tracked; composition is exact as
/// long as the inner maps separate `x` and `t` (see `verify::flow`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub vx: f64,
    pub vxx: f64,
    pub vt: f64,
}

impl Jet2 {
    pub const fn new(v: f64, vx: f64, vxx: f64, vt: f64) -> Self {
        Self { v, vx, vxx, vt }
    }

    pub const fn constant(v: f64) -> Self {
        Self::new(v, 0.0, 0.0, 0.0)
    }

    /// The coordinate `x` as a jet.
    pub const fn var_x(x: f64) -> Self {
        Self::new(x, 1.0, 0.0, 0.0)
    }

    /// The coordinate `t` as a jet.
    pub const fn var_t(t: f64) -> Self {
        Self::new(t, 0.0, 0.0, 1.0)
    }

    /// Composes a function of one variable, given `(g, g', g'')` at `self.v`.
    pub fn compose(self, g: f64, g1: f64, g2: f64) -> Self {
        Scalar::chain(self, g, g1, g2)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.vx.is_finite() && self.vxx.is_finite() && self.vt.is_finite()
    }
}

impl Scalar for Jet2 {
    fn cst(c: f64) -> Self {
        Jet2::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2 {
            v: f0,
            vx: f1 * self.vx,
            vxx: f1 * self.vxx + f2 * self.vx * self.vx,
            vt: f1 * self.vt,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2::new(self.v + o.v, self.vx + o.vx, self.vxx + o.vxx, self.vt + o.vt)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2::new(self.v - o.v, self.vx - o.vx, self.vxx - o.vxx, self.vt - o.vt)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            vx: self.vx * o.v + self.v * o.vx,
            vxx: self.vxx * o.v + 2.0 * self.vx * o.vx + self.v * o.vxx,
            vt: self.vt * o.v + self.v * o.vt,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::new(-self.v, -self.vx, -self.vxx, -self.vt)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        Jet2 { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        Jet2 { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        Jet2::new(self.v * c, self.vx * c, self.vxx * c, self.vt * c)
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, c: f64) -> Jet2 {
        self * (1.0 / c)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j * self
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, j: Jet2) -> Jet2 {
        j + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

/// Second-order Taylor number in `N` variables: value, gradient, Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor2<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Taylor2<N> {
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; N], h: [[0.0; N]; N] }
    }

    /// Independent variable number `i` at value `v`.
    pub fn var(i: usize, v: f64) -> Self {
        let mut out = Self::constant(v);
        out.g[i] = 1.0;
        out
    }

    pub fn d(&self, i: usize) -> f64 {
        self.g[i]
    }

    pub fn dd(&self, i: usize, j: usize) -> f64 {
        self.h[i][j]
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self;
        out.v = f(self.v);
        for i in 0..N {
            out.g[i] = f(self.g[i]);
            for j in 0..N {
                out.h[i][j] = f(self.h[i][j]);
            }
        }
        out
    }

    fn zip(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = self;
        out.v = f(self.v, o.v);
        for i in 0..N {
            out.g[i] = f(self.g[i], o.g[i]);
            for j in 0..N {
                out.h[i][j] = f(self.h[i][j], o.h[i][j]);
            }
        }
        out
    }
}

impl<const N: usize> Scalar for Taylor2<N> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for j in 0..N {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Add for Taylor2<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
}

impl<const N: usize> Sub for Taylor2<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
}

impl<const N: usize> Mul for Taylor2<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..N {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..N {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.v * o.h[i][j]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        out
    }
}

impl<const N: usize> Div for Taylor2<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Neg for Taylor2<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<const N: usize> Add<f64> for Taylor2<N> {
    type Output = Self;
    fn add(mut self, c: f64) -> Self {
        self.v += c;
        self
    }
}

impl<const N: usize> Sub<f64> for Taylor2<N> {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}

impl<const N: usize> Mul<f64> for Taylor2<N> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.map(|a| a * c)
    }
}

impl<const N: usize> Div<f64> for Taylor2<N> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self.map(|a| a / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Jet2, Jet2) -> Jet2, x: f64, t: f64) {
        let j = f(Jet2::var_x(x), Jet2::var_t(t));
        let h = 1e-4;
        let val = |x: f64, t: f64| f(Jet2::constant(x), Jet2::constant(t)).v;
        let fx = (val(x + h, t) - val(x - h, t)) / (2.0 * h);
        let fxx = (val(x + h, t) - 2.0 * val(x, t) + val(x - h, t)) / (h * h);
        let ft = (val(x, t + h) - val(x, t - h)) / (2.0 * h);
        assert!((j.vx - fx).abs() < 1e-6, "vx {} vs {}", j.vx, fx);
        assert!((j.vxx - fxx).abs() < 1e-5 * (1.0 + fxx.abs()), "vxx {} vs {}", j.vxx, fxx);
        assert!((j.vt - ft).abs() < 1e-6, "vt {} vs {}", j.vt, ft);
    }

    #[test]
    fn product_rule_for_second_derivative() {
        let a = Jet2::new(2.0, 3.0, 5.0, 7.0);
        let b = Jet2::new(11.0, 13.0, 17.0, 19.0);
        let p = a * b;
        assert_eq!(p.vxx, 5.0 * 11.0 + 2.0 * 3.0 * 13.0 + 2.0 * 17.0);
        assert_eq!(p.vt, 7.0 * 11.0 + 2.0 * 19.0);
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        fd_check(|x, t| (x * t + 1.0).ln() * x.tanh(), 0.7, 0.4);
        fd_check(|x, t| (x * 0.3 - t).tan() / (x + t).sqrt(), 0.9, 0.2);
        fd_check(|x, t| (x * x * t).exp().powf(0.37) - x.powi(-3), 1.3, 0.6);
    }

    #[test]
    fn taylor_hessian_of_product() {
        // f = x^2 u^3 at (x, u) = (2, 3)
        let x = Taylor2::<2>::var(0, 2.0);
        let u = Taylor2::<2>::var(1, 3.0);
        let f = x.powi(2) * u.powi(3);
        assert_eq!(f.v, 108.0);
        assert_eq!(f.d(0), 2.0 * 2.0 * 27.0);
        assert_eq!(f.d(1), 4.0 * 3.0 * 9.0);
        assert_eq!(f.dd(0, 0), 2.0 * 27.0);
        assert_eq!(f.dd(0, 1), 2.0 * 2.0 * 3.0 * 9.0);
        assert_eq!(f.dd(1, 1), 4.0 * 6.0 * 3.0);
    }

    #[test]
    fn fractional_power_of_integer_valued_exponent_uses_powi() {
        let j = Jet2::new(-2.0, 1.0, 0.0, 0.0).powf(3.0);
        assert_eq!(j.v, -8.0);
        assert_eq!(j.vx, 12.0);
        assert_eq!(j.vxx, -12.0);
    }
}
