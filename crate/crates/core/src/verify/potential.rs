//! The potential `v` with `v_x = (x+λ)u`, `v_t = (x+λ)(u^n)_x + (C−1)u^n`.

use std::sync::Arc;

use super::quadrature::integrate;
use super::{grid_points, residual_scan, scan_points, VerificationReport};
use crate::error::{Error, Result};
use crate::params::PdeParams;
use crate::pde::{flux_f, flux_g, Rect, ScalarField};

/// Residual tolerance a field must meet before a potential is built from it.
pub const SOLUTION_TOL: f64 = 1e-9;

#[derive(Clone)]
pub struct PotentialField {
    pub params: PdeParams,
    pub field: Arc<dyn ScalarField>,
    pub x0: f64,
    pub t0: f64,
    pub region: Rect,
    pub quad_tol: f64,
}

impl PotentialField {
    fn g(&self, x: f64, t: f64) -> Result<f64> {
        flux_g(&self.params, x, &self.field.eval(x, t)?)
    }

    fn f(&self, x: f64, t: f64) -> Result<f64> {
        flux_f(&self.params, x, &self.field.eval(x, t)?)
    }

    /// `v` along the path `(x0, t0) → (x0, t) → (x, t)`.
    pub fn v(&self, x: f64, t: f64) -> Result<f64> {
        let a = integrate(|tau| self.f(self.x0, tau), self.t0, t, 0.5 * self.quad_tol)?;
        let b = integrate(|xi| self.g(xi, t), self.x0, x, 0.5 * self.quad_tol)?;
        Ok(a + b)
    }

    /// `v` along the path `(x0, t0) → (x, t0) → (x, t)`.
    pub fn v_x_first(&self, x: f64, t: f64) -> Result<f64> {
        let a = integrate(|xi| self.g(xi, self.t0), self.x0, x, 0.5 * self.quad_tol)?;
        let b = integrate(|tau| self.f(x, tau), self.t0, t, 0.5 * self.quad_tol)?;
        Ok(a + b)
    }

    /// `∂v/∂x` from the x-first path: `G(x, t0) + ∫ D_x F(x, τ) dτ`.
    pub fn v_x(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.params;
        let field = &self.field;
        let a = self.g(x, self.t0)?;
        let b = integrate(
            |tau| {
                let jet = field.eval(x, tau)?;
                // D_x F = D_t G + (conservation residual)
                let cons = crate::pde::conservation_residual_jet(&p, x, &jet)?;
                Ok(cons + p.shift(x)? * jet.vt)
            },
            self.t0,
            t,
            0.5 * self.quad_tol,
        )?;
        Ok(a + b)
    }

    /// `∂v/∂t` from the t-first path: `F(x0, t) + ∫ (ξ+λ) u_t(ξ, t) dξ`.
    pub fn v_t(&self, x: f64, t: f64) -> Result<f64> {
        let p = self.params;
        let a = self.f(self.x0, t)?;
        let b = integrate(|xi| Ok(p.shift(xi)? * self.field.eval(xi, t)?.vt), self.x0, x, 0.5 * self.quad_tol)?;
        Ok(a + b)
    }
}

/// Builds the potential of `field` based at `(x0, t0)` after checking that
/// `field` solves the PDE on `region`.
pub fn build_potential(
    params: &PdeParams,
    field: Arc<dyn ScalarField>,
    x0: f64,
    t0: f64,
    region: &Rect,
    quad_tol: f64,
) -> Result<PotentialField> {
    if !region.contains(x0, t0) {
        return Err(Error::DomainViolation(format!("base point ({x0}, {t0}) outside {region:?}")));
    }
    let scan = residual_scan(params, field.as_ref(), region, 21, 21, SOLUTION_TOL)?;
    if !scan.pass {
        return Err(Error::UnverifiedField(format!(
            "{}: residual {:e} > {SOLUTION_TOL:e}",
            field.label(),
            scan.max_residual
        )));
    }
    for p in grid_points(region, 5, 5) {
        let u = field.eval(p[0], p[1])?.v;
        if u <= 0.0 {
            return Err(Error::UnverifiedField(format!("u = {u} is not positive at ({}, {})", p[0], p[1])));
        }
    }
    Ok(PotentialField { params: *params, field, x0, t0, region: *region, quad_tol })
}

/// Largest residual of both equations of the auxiliary system and of the
/// agreement of the two quadrature paths, on an `n × n` grid.
pub fn check_auxiliary_system(pot: &PotentialField, n: usize, tol: f64) -> Result<VerificationReport> {
    let p = pot.params;
    scan_points(&format!("potential:{}", pot.field.label()), &grid_points(&pot.region, n, n), tol, |c| {
        let (x, t) = (c[0], c[1]);
        let jet = pot.field.eval(x, t)?;
        let ex = pot.v_x(x, t)? - flux_g(&p, x, &jet)?;
        let et = pot.v_t(x, t)? - flux_f(&p, x, &jet)?;
        let paths = pot.v(x, t)? - pot.v_x_first(x, t)?;
        Ok(ex.abs().max(et.abs()).max(paths.abs()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::expr::ExprField;

    #[test]
    fn trivial_solution_potential_is_sqrt() {
        let inst = Catalog::unverified().solution_instance("trivial-potential").unwrap();
        let region = inst.domain;
        let pot = build_potential(&inst.params, Arc::new(inst.clone()), 1.0, 0.0, &region, 1e-10).unwrap();
        for (x, t) in [(1.5, 0.3), (2.0, 1.0), (1.0, 0.7)] {
            let v = pot.v(x, t).unwrap() + inst.closed_form_potential(1.0).unwrap();
            assert!((v - x.sqrt()).abs() < 1e-9, "{x} {t}");
            let jet = inst.eval(x, t).unwrap();
            assert!((pot.v_x(x, t).unwrap() - x * jet.v).abs() < 1e-12);
        }
    }

    #[test]
    fn non_solution_rejected() {
        let p = PdeParams::from_parts(2, 1, 0.0, 0.0).unwrap();
        let region = Rect::new(1.0, 2.0, 0.0, 1.0);
        let f = ExprField::parse("x+t", region).unwrap();
        let e = build_potential(&p, Arc::new(f), 1.0, 0.0, &region, 1e-10).err().unwrap();
        assert!(matches!(e, Error::UnverifiedField(_)));
    }
}
