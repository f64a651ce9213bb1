//! Nonclassical determining equations and the invariant surface condition.

use crate::catalog::GeneratorSpec;
use crate::error::{Error, Result};
use crate::jet::{Jet2, Taylor2};
use crate::params::PdeParams;

/// Jet in `(x, t, u)`.
pub type T3 = Taylor2<3>;

const X: usize = 0;
const T: usize = 1;
const U: usize = 2;

fn u_power(u: f64, e: f64, n_integer: bool) -> Result<f64> {
    if u <= 0.0 && !(n_integer && u != 0.0) {
        return Err(Error::NonPositiveU { value: u, exponent: e });
    }
    Ok(u.powf(e))
}

/// Left-hand sides `(d1, d2, d3, d4)` of the four determining equations for a
/// vector field `p ∂x + ∂t + r ∂u`, with `f(x) = nC/(x+λ)`.
pub fn determining_residuals<P, R>(params: &PdeParams, p_fn: P, r_fn: R, x: f64, t: f64, u: f64) -> Result<[f64; 4]>
where
    P: Fn(T3, T3, T3) -> Result<T3>,
    R: Fn(T3, T3, T3) -> Result<T3>,
{
    let xs = params.shift(x)?;
    let n = params.n_f64();
    let c = params.c;
    let (vx, vt, vu) = (T3::var(X, x), T3::var(T, t), T3::var(U, u));
    let p = p_fn(vx, vt, vu)?;
    let r = r_fn(vx, vt, vu)?;
    let int = params.n_is_integer();
    let un = u_power(u, n, int)?;
    let un1 = u_power(u, n - 1.0, int)?;
    let un2 = u_power(u, n - 2.0, int)?;
    let un3 = u_power(u, n - 3.0, int)?;
    let f = n * c / xs;

    let (p0, p_x, p_t, p_u) = (p.v, p.d(X), p.d(T), p.d(U));
    let (p_xx, p_ux, p_uu) = (p.dd(X, X), p.dd(U, X), p.dd(U, U));
    let (r0, r_x, r_t, r_u) = (r.v, r.d(X), r.d(T), r.d(U));
    let (r_xx, r_ux, r_uu) = (r.dd(X, X), r.dd(U, X), r.dd(U, U));

    let d1 = p_uu * u - n * p_u + p_u;
    let d2 = -(n * r_uu - 2.0 * n * p_ux + 2.0 * f * p_u) * un1 - (n - 1.0) * n * r_u * un2
        + (n - 1.0) * n * r0 * un3
        - 2.0 * p0 * p_u;
    let d3 = -(2.0 * n * r_ux - n * p_xx + f * p_x - f / xs * p0) * un * u - 2.0 * (n - 1.0) * n * r_x * un
        + (2.0 * p_u * r0 - 2.0 * p0 * p_x - p_t) * u * u
        + (n - 1.0) * p0 * r0 * u;
    let d4 = -(n * r_xx + f * r_x) * un + (r_t + 2.0 * p_x * r0) * u - (n - 1.0) * r0 * r0;
    Ok([d1, d2, d3, d4])
}

/// Determining residuals of a nonclassical (or `q = 1` point) generator.
pub fn determining_for_generator(params: &PdeParams, gen: &GeneratorSpec, x: f64, t: f64, u: f64) -> Result<[f64; 4]> {
    let probe = gen.eval(params, x, t, u, None)?;
    if probe.q != 1.0 {
        return Err(Error::InvalidParams(format!("{} does not have q = 1", gen.id)));
    }
    determining_residuals(
        params,
        |x, t, u| Ok(gen.infinitesimals(params, x, t, u, None)?.p),
        |x, t, u| Ok(gen.infinitesimals(params, x, t, u, None)?.r),
        x,
        t,
        u,
    )
}

/// `p u_x + q u_t − r`.
pub fn invariant_surface_residual(p: f64, q: f64, r: f64, jet: &Jet2) -> f64 {
    p * jet.vx + q * jet.vt - r
}

/// `[p1, p1', p1'', p1''', p1'''']` for `p1 = k1 (x+λ)^m`.
pub fn power_law_derivatives(k1: f64, m: f64, xs: f64) -> [f64; 5] {
    let mut out = [0.0; 5];
    let mut coef = k1;
    for (j, o) in out.iter_mut().enumerate() {
        *o = coef * xs.powf(m - j as f64);
        coef *= m - j as f64;
    }
    out
}

/// The two constraints on `p1(x)` in the `p1(x), r1(x), r2(x)` case, as
/// residuals `(lhs − rhs)` of the first and the fourth-order second equation.
/// `d` holds `p1` and its first four derivatives at `x`; the lower-case `c`
/// of the printed second equation is read as `C`.
pub fn case2_constraints(params: &PdeParams, d: [f64; 5], x: f64, c1: f64) -> Result<(f64, f64)> {
    let xs = params.shift(x)?;
    let c = params.c;
    let [p, p1, p2, p3, p4] = d;
    if p == 0.0 || p1 == 0.0 {
        return Err(Error::DomainViolation("p1 and p1' must be nonzero".into()));
    }
    let e1 = c / (2.0 * xs) - (3.0 * p1 / (2.0 * p) - p2 / (2.0 * p1) - c1 / (2.0 * p * p1));
    let e2 = -2.0 * c / xs * (2.0 * p * p * p3 + 4.0 * p * p1 * p2 - p1.powi(3))
        + c * p / (xs * xs) * (c * p * p2 + 8.0 * p * p2 + 2.0 * p1 * p1)
        - c / xs.powi(3) * (3.0 * c - 2.0) * p * p * p1
        + 3.0 / xs.powi(4) * (c - 2.0) * c * p.powi(3)
        - 5.0 * p * p * p4
        + 10.0 * p * p1 * p3
        + 30.0 * p * p2 * p2
        - 10.0 * p1 * p1 * p2;
    Ok((e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::jet::Scalar;

    fn half(c: f64) -> PdeParams {
        PdeParams::from_parts(1, 2, c, 0.0).unwrap()
    }

    #[test]
    fn zero_field_gives_zero() {
        let z = |_: T3, _: T3, _: T3| Ok(T3::constant(0.0));
        assert_eq!(determining_residuals(&half(2.0), z, z, 1.0, 0.0, 1.0).unwrap(), [0.0; 4]);
    }

    #[test]
    fn nonclassical_generators_satisfy_all_four() {
        let cat = Catalog::unverified();
        for id in ["nc-gen-c2", "nc-gen-c53", "nc-gen-cm1"] {
            let g = cat.generator(id).unwrap();
            let p = g.example_params;
            for &(x, t, u) in &[(1.0, 0.2, 0.7), (1.7, 0.9, 2.3), (2.4, -0.3, 0.1)] {
                let d = determining_for_generator(&p, g, x, t, u).unwrap();
                assert!(d.iter().all(|v| v.abs() < 1e-12), "{id}: {d:?}");
            }
        }
    }

    #[test]
    fn perturbed_case_one_witness() {
        let p = half(2.0);
        let d = determining_residuals(
            &p,
            |_, _, _| Ok(T3::constant(1.0)),
            |x, _, u| Ok(u.sqrt() * 2.1 / (x * x)),
            1.0,
            0.0,
            1.0,
        )
        .unwrap();
        assert!((d[2] + 0.05).abs() < 1e-12, "{d:?}");
        assert!((d[3] - 0.105).abs() < 1e-12, "{d:?}");
    }

    #[test]
    fn case2_holds_at_stated_c_values() {
        for (c, ok) in [(5.0 / 3.0, true), (-1.0, true), (3.0, true), (2.0, false), (0.5, false)] {
            let p = half(c);
            let x = 1.3;
            let d = power_law_derivatives(0.8, (c - 1.0) / 2.0, x);
            let (e1, e2) = case2_constraints(&p, d, x, 0.0).unwrap();
            let holds = e1.abs() < 1e-12 && e2.abs() < 1e-12;
            assert_eq!(holds, ok, "C={c}: {e1} {e2}");
        }
    }

    #[test]
    fn surface_condition_trivial() {
        assert_eq!(invariant_surface_residual(0.0, 1.0, 0.0, &Jet2::new(3.0, 1.0, 0.0, 0.0)), 0.0);
    }
}
