//! The PDE `u_t = (u^n)_xx + C/(x+λ) (u^n)_x`, its residual and conserved form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::params::PdeParams;

/// Rectangle `[x0, x1] × [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, t0: f64, t1: f64) -> Self {
        Self { x0, x1, t0, t1 }
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        let eps = 1e-12 * (1.0 + self.x1.abs().max(self.t1.abs()));
        x >= self.x0 - eps && x <= self.x1 + eps && t >= self.t0 - eps && t <= self.t1 + eps
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(other.x0, other.t0) && self.contains(other.x1, other.t1)
    }

    /// Checks ordering and `x0 + λ > 0`.
    pub fn validate(&self, params: &PdeParams) -> Result<()> {
        if !(self.x0 <= self.x1 && self.t0 <= self.t1) {
            return Err(Error::DomainViolation(format!("malformed region {self:?}")));
        }
        params.shift(self.x0).map(|_| ())
    }

    /// Tensor grid point `(i, j)` of an `nx × nt` grid.
    pub fn grid_point(&self, i: usize, j: usize, nx: usize, nt: usize) -> (f64, f64) {
        let fx = if nx > 1 { i as f64 / (nx - 1) as f64 } else { 0.5 };
        let ft = if nt > 1 { j as f64 / (nt - 1) as f64 } else { 0.5 };
        (self.x0 + fx * (self.x1 - self.x0), self.t0 + ft * (self.t1 - self.t0))
    }
}

/// A smooth function `(x, t) -> u` evaluated as a jet.
///
/// `eval_jet` receives the coordinates as jets so that fields can be composed
/// with separable coordinate maps `x' -> x(x')`, `t' -> t(t')`.
pub trait ScalarField: Send + Sync {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2>;

    fn domain(&self) -> Rect;

    fn label(&self) -> String {
        "field".to_string()
    }

    fn eval(&self, x: f64, t: f64) -> Result<Jet2> {
        self.eval_jet(Jet2::var_x(x), Jet2::var_t(t))
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        (**self).eval_jet(x, t)
    }
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

impl<F: ScalarField + ?Sized> ScalarField for Box<F> {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        (**self).eval_jet(x, t)
    }
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// Field given by a closure over jets.
pub struct FnField<F> {
    f: F,
    domain: Rect,
    label: String,
}

impl<F> FnField<F>
where
    F: Fn(Jet2, Jet2) -> Result<Jet2> + Send + Sync,
{
    pub fn new(label: impl Into<String>, domain: Rect, f: F) -> Self {
        Self { f, domain, label: label.into() }
    }
}

impl<F> ScalarField for FnField<F>
where
    F: Fn(Jet2, Jet2) -> Result<Jet2> + Send + Sync,
{
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        (self.f)(x, t)
    }
    fn domain(&self) -> Rect {
        self.domain
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `u^(n-k)` with the positivity guard for fractional `n`.
fn u_pow(params: &PdeParams, u: f64, k: i64) -> Result<f64> {
    let e = params.n() - k;
    if e.is_integer() {
        let e = *e.numer();
        if u == 0.0 && e < 0 {
            return Err(Error::NonPositiveU { value: u, exponent: e as f64 });
        }
        Ok(u.powi(e as i32))
    } else {
        let ef = crate::params::rational_to_f64(&e);
        if u <= 0.0 {
            return Err(Error::NonPositiveU { value: u, exponent: ef });
        }
        Ok(u.powf(ef))
    }
}

/// `(u^n, (u^n)_x, (u^n)_xx)` from a jet.
pub fn power_derivatives(params: &PdeParams, jet: &Jet2) -> Result<(f64, f64, f64)> {
    let n = params.n_f64();
    let un = u_pow(params, jet.v, 0)?;
    let un1 = if n == 1.0 { 1.0 } else { u_pow(params, jet.v, 1)? };
    // u^(n-2) only multiplies u_x^2; skip it when u_x vanishes so that u = 0 steady states work for n >= 1
    let un2 = if jet.vx == 0.0 { 0.0 } else { u_pow(params, jet.v, 2)? };
    let px = n * un1 * jet.vx;
    let pxx = n * (n - 1.0) * un2 * jet.vx * jet.vx + n * un1 * jet.vxx;
    Ok((un, px, pxx))
}

/// `u_t − (u^n)_xx − C/(x+λ) (u^n)_x`.
pub fn pde_residual(params: &PdeParams, x: f64, jet: &Jet2) -> Result<f64> {
    let s = params.shift(x)?;
    let (_, px, pxx) = power_derivatives(params, jet)?;
    Ok(jet.vt - pxx - params.c / s * px)
}

/// `G = (x+λ) u`.
pub fn flux_g(params: &PdeParams, x: f64, jet: &Jet2) -> Result<f64> {
    Ok(params.shift(x)? * jet.v)
}

/// `F = (x+λ)(u^n)_x + (C−1) u^n`.
pub fn flux_f(params: &PdeParams, x: f64, jet: &Jet2) -> Result<f64> {
    let s = params.shift(x)?;
    let (un, px, _) = power_derivatives(params, jet)?;
    Ok(s * px + (params.c - 1.0) * un)
}

/// `D_x F − D_t G` at `(x, t)`.
///
/// `D_x F = (u^n)_x + (x+λ)(u^n)_xx + (C−1)(u^n)_x`, so only the jet of `u`
/// is needed.
pub fn conservation_residual(params: &PdeParams, field: &dyn ScalarField, x: f64, t: f64) -> Result<f64> {
    let jet = field.eval(x, t)?;
    conservation_residual_jet(params, x, &jet)
}

pub fn conservation_residual_jet(params: &PdeParams, x: f64, jet: &Jet2) -> Result<f64> {
    let s = params.shift(x)?;
    let (_, px, pxx) = power_derivatives(params, jet)?;
    let dx_f = px + s * pxx + (params.c - 1.0) * px;
    let dt_g = s * jet.vt;
    Ok(dx_f - dt_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Scalar;

    fn params(p: i64, q: i64, c: f64, l: f64) -> PdeParams {
        PdeParams::from_parts(p, q, c, l).unwrap()
    }

    #[test]
    fn constants_are_steady() {
        let r = pde_residual(&params(2, 1, 0.0, 0.0), 1.0, &Jet2::constant(3.0)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn trivial_potential_solution_has_zero_residual() {
        // u = 1/(2 x^{3/2}), n = -1, C = -1/2
        let x = Jet2::var_x(1.0);
        let u = x.powf(-1.5) * 0.5;
        let r = pde_residual(&params(-1, 1, -0.5, 0.0), 1.0, &u).unwrap();
        assert!(r.abs() < 1e-15, "{r}");
    }

    #[test]
    fn linear_field_residual() {
        // u = x + t at (1,1): (u^2)_xx = 2, u_t = 1
        let jet = Jet2::new(2.0, 1.0, 0.0, 1.0);
        assert_eq!(pde_residual(&params(2, 1, 0.0, 0.0), 1.0, &jet).unwrap(), -1.0);
    }

    #[test]
    fn fluxes() {
        let p = params(2, 1, 0.0, 0.0);
        assert_eq!(flux_g(&p, 2.0, &Jet2::constant(1.0)).unwrap(), 2.0);
        // F for u = x at x=1: x·2x − x² = 1
        assert_eq!(flux_f(&p, 1.0, &Jet2::var_x(1.0)).unwrap(), 1.0);
        let p = params(3, 2, 0.7, 0.0);
        let f = flux_f(&p, 1.3, &Jet2::constant(2.0)).unwrap();
        assert!((f - (0.7 - 1.0) * 2f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn conservation_of_linear_field() {
        let p = params(2, 1, 0.0, 0.0);
        let field = FnField::new("x+t", Rect::new(0.5, 2.0, 0.0, 2.0), |x, t| Ok(x + t));
        assert_eq!(conservation_residual(&p, &field, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn fractional_power_needs_positive_u() {
        let p = params(1, 2, 2.0, 0.0);
        let e = pde_residual(&p, 1.0, &Jet2::new(-1.0, 1.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::NonPositiveU { .. }));
        let e = pde_residual(&p, -1.0, &Jet2::constant(1.0)).unwrap_err();
        assert!(matches!(e, Error::DomainViolation(_)));
    }

    #[test]
    fn integer_exponent_allows_negative_u() {
        let p = params(3, 1, 1.0, 0.0);
        assert!(pde_residual(&p, 1.0, &Jet2::new(-1.0, 0.5, 0.1, 0.0)).is_ok());
    }
}
