//! Method-of-lines reference solver for the conserved form
//! `(x+λ) u_t = D_x[(x+λ)(u^n)_x + (C−1)u^n]`.
//!
//! Nodes carry the unknowns; node `i` owns the control volume between the
//! midpoints of its neighbouring intervals. Writing the flux as
//! `F = X^(2−C) (X^(C−1) u^n)_x` with `X = x+λ`, the face flux between nodes
//! `i` and `i+1` is `(φ_(i+1) − φ_i) / ∫ X^(C−2) dx` with `φ = X^(C−1) u^n`.
//! Steady states with constant flux are reproduced exactly.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PdeParams;
use crate::pde::{Rect, ScalarField};
use crate::reduction::integrator::{integrate, IntegratorOptions, OdeSystem, Solution};
use crate::verify::quadrature;

/// Relative size below which a difference of nodal `φ` values is treated as zero.
const ROUNDING_CUTOFF: f64 = 8.0 * f64::EPSILON;

/// Fraction of the DOPRI5 stability interval on the negative real axis (≈ 3.3) used as step cap.
const STABILITY_STEP: f64 = 3.0;

/// Boundary values `t -> u`.
pub type BoundaryFn<'a> = &'a (dyn Fn(f64) -> Result<f64> + Sync);

/// `n + 1` equally spaced nodes on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| a + (b - a) * i as f64 / cells as f64).collect()
}

struct Geometry {
    x: Vec<f64>,
    /// `X^(C−1)` at the nodes.
    phi_scale: Vec<f64>,
    /// `∫ X^(C−2) dx` over each interval.
    face_weight: Vec<f64>,
    /// `∫ X dx` over each control volume.
    volume: Vec<f64>,
}

impl Geometry {
    fn new(params: &PdeParams, x: &[f64]) -> Result<Self> {
        if x.len() < 3 {
            return Err(Error::InvalidParams("at least two cells are required".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("grid nodes must be strictly increasing".into()));
        }
        let xs: Vec<f64> = x.iter().map(|&v| params.shift(v)).collect::<Result<_>>()?;
        let c = params.c;
        let anti = |s: f64| if (c - 1.0).abs() < 1e-14 { s.ln() } else { s.powf(c - 1.0) / (c - 1.0) };
        let face_weight = xs.windows(2).map(|w| anti(w[1]) - anti(w[0])).collect();
        let m = x.len();
        let mut volume = vec![0.0; m];
        for i in 1..m - 1 {
            let lo = 0.5 * (xs[i - 1] + xs[i]);
            let hi = 0.5 * (xs[i] + xs[i + 1]);
            volume[i] = 0.5 * (hi * hi - lo * lo);
        }
        Ok(Geometry {
            x: x.to_vec(),
            phi_scale: xs.iter().map(|s| s.powf(c - 1.0)).collect(),
            face_weight,
            volume,
        })
    }
}

struct MolSystem<'a> {
    params: PdeParams,
    geo: Geometry,
    left: BoundaryFn<'a>,
    right: BoundaryFn<'a>,
}

impl MolSystem<'_> {
    fn power(&self, x: f64, t: f64, u: f64) -> Result<f64> {
        if u <= 0.0 && !self.params.n_is_integer() {
            return Err(Error::PositivityLoss { x, t, u });
        }
        Ok(u.powf(self.params.n_f64()))
    }

    /// Fluxes at the `m − 1` faces for the full nodal state.
    fn face_fluxes(&self, t: f64, full: &[f64]) -> Result<Vec<f64>> {
        let g = &self.geo;
        let phi: Vec<f64> = full
            .iter()
            .enumerate()
            .map(|(i, &u)| Ok(g.phi_scale[i] * self.power(g.x[i], t, u)?))
            .collect::<Result<_>>()?;
        Ok(phi
            .windows(2)
            .zip(&g.face_weight)
            .map(|(w, iw)| {
                let d = w[1] - w[0];
                // differences at rounding level are noise; keeping them would seed
                // growth when n < 0 makes the equation backward-parabolic
                if d.abs() <= ROUNDING_CUTOFF * w[0].abs().max(w[1].abs()) {
                    0.0
                } else {
                    d / iw
                }
            })
            .collect())
    }

    /// Gershgorin bound on the spectral radius of the semi-discrete Jacobian
    /// for nodal values within `[u_lo, u_hi]`.
    fn spectral_bound(&self, u_lo: f64, u_hi: f64) -> f64 {
        let n = self.params.n_f64();
        let g = &self.geo;
        // |d(u^n)/du| is monotone in u, so the larger end value bounds it
        let dmax = (n * u_lo.powf(n - 1.0)).abs().max((n * u_hi.powf(n - 1.0)).abs());
        let m = g.x.len();
        (1..m - 1)
            .map(|i| {
                let inv_l = 1.0 / g.face_weight[i - 1].abs();
                let inv_r = 1.0 / g.face_weight[i].abs();
                let diag = g.phi_scale[i] * (inv_l + inv_r);
                let off = g.phi_scale[i - 1] * inv_l + g.phi_scale[i + 1] * inv_r;
                dmax * (diag + off) / g.volume[i]
            })
            .fold(0.0, f64::max)
    }

    fn full_state(&self, t: f64, interior: &[f64]) -> Result<Vec<f64>> {
        let mut full = Vec::with_capacity(interior.len() + 2);
        full.push((self.left)(t)?);
        full.extend_from_slice(interior);
        full.push((self.right)(t)?);
        Ok(full)
    }
}

impl OdeSystem for MolSystem<'_> {
    fn dim(&self) -> usize {
        self.geo.x.len() - 2
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let full = self.full_state(t, y)?;
        let flux = self.face_fluxes(t, &full)?;
        for i in 0..dy.len() {
            dy[i] = (flux[i + 1] - flux[i]) / self.geo.volume[i + 1];
        }
        Ok(())
    }
}

/// Nodal solution on an `x × t` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridField {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    /// `u[j][i]` at `(x[i], t[j])`.
    pub u: Vec<Vec<f64>>,
    pub left_bc: String,
    pub right_bc: String,
}

impl GridField {
    pub fn final_state(&self) -> &[f64] {
        self.u.last().expect("at least the initial time")
    }

    /// `x,t,u` triples.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t,u\n");
        for (t, row) in self.t.iter().zip(&self.u) {
            for (x, u) in self.x.iter().zip(row) {
                let _ = writeln!(out, "{x:.16e},{t:.16e},{u:.16e}");
            }
        }
        out
    }
}

/// Options of [`solve_mol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MolOptions {
    pub tol: f64,
    /// Number of output times including both ends.
    pub outputs: usize,
    pub max_steps: usize,
}

impl Default for MolOptions {
    fn default() -> Self {
        MolOptions { tol: 1e-9, outputs: 11, max_steps: 2_000_000 }
    }
}

fn check_positive(params: &PdeParams, x: &[f64], t: f64, u: &[f64]) -> Result<()> {
    if params.n_is_integer() {
        return Ok(());
    }
    match x.iter().zip(u).find(|(_, &u)| !(u > 0.0)) {
        Some((&x, &u)) => Err(Error::PositivityLoss { x, t, u }),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn run<'a>(
    params: &PdeParams,
    initial: &dyn Fn(f64) -> Result<f64>,
    left: BoundaryFn<'a>,
    right: BoundaryFn<'a>,
    x_grid: &[f64],
    t0: f64,
    t_end: f64,
    opts: &MolOptions,
) -> Result<(MolSystem<'a>, Solution)> {
    let geo = Geometry::new(params, x_grid)?;
    let sys = MolSystem { params: *params, geo, left, right };
    let u0: Vec<f64> = x_grid[1..x_grid.len() - 1].iter().map(|&x| initial(x)).collect::<Result<_>>()?;
    let full0 = sys.full_state(t0, &u0)?;
    check_positive(params, x_grid, t0, &full0)?;
    let lo = full0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = full0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rho = sys.spectral_bound(lo, hi);
    let io = IntegratorOptions {
        rtol: opts.tol,
        atol: opts.tol,
        // for n < 0 the problem is backward-parabolic: the spectrum lies on the
        // positive axis, where no explicit stability limit exists
        h_max: (params.n_f64() > 0.0 && rho > 0.0).then(|| STABILITY_STEP / rho),
        h_min_ratio: 1e-12,
        max_steps: opts.max_steps,
        dense: true,
        ..Default::default()
    };
    let sol = integrate(&sys, t0, &u0, t_end, &io)?;
    Ok((sys, sol))
}

/// Evolves `initial` on `x_grid` from `t0` to `t_end` with Dirichlet data at both ends.
#[allow(clippy::too_many_arguments)]
pub fn solve_mol(
    params: &PdeParams,
    initial: &dyn Fn(f64) -> Result<f64>,
    left: BoundaryFn<'_>,
    right: BoundaryFn<'_>,
    x_grid: &[f64],
    t0: f64,
    t_end: f64,
    opts: &MolOptions,
) -> Result<GridField> {
    if t_end < t0 {
        return Err(Error::InvalidParams(format!("t_end = {t_end} precedes t0 = {t0}")));
    }
    let (sys, sol) = run(params, initial, left, right, x_grid, t0, t_end, opts)?;
    let k = opts.outputs.max(2);
    let mut ts = Vec::with_capacity(k);
    let mut us = Vec::with_capacity(k);
    for j in 0..k {
        let t = if j + 1 == k { t_end } else { t0 + (t_end - t0) * j as f64 / (k - 1) as f64 };
        let full = sys.full_state(t, &sol.eval(t)?)?;
        check_positive(params, x_grid, t, &full)?;
        ts.push(t);
        us.push(full);
    }
    Ok(GridField {
        x: x_grid.to_vec(),
        t: ts,
        u: us,
        left_bc: "dirichlet".into(),
        right_bc: "dirichlet".into(),
    })
}

/// Field used for initial and boundary data.
fn data_from<'a>(field: &'a dyn ScalarField) -> impl Fn(f64, f64) -> Result<f64> + Sync + 'a {
    move |x, t| Ok(field.eval(x, t)?.v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dx: f64,
    pub linf: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub subject: String,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
    /// `log2` ratios of successive `L∞` errors; `None` at rounding level.
    pub pair_orders: Vec<Option<f64>>,
    /// Least-squares slope of `log L∞` against `log dx`; `None` at rounding level.
    pub order: Option<f64>,
}

/// Errors below this are treated as exact and yield no order.
pub const EXACT_LEVEL: f64 = 1e-12;

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cells,dx,linf,l2\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.cells, r.dx, r.linf, r.l2);
        }
        out
    }
}

/// Solves with data from `reference` on its `x` range and compares at `t_end`.
pub fn cross_validate(
    params: &PdeParams,
    reference: &dyn ScalarField,
    cells: &[usize],
    t_end: f64,
    tol: f64,
) -> Result<ConvergenceTable> {
    let d = reference.domain();
    let u = data_from(reference);
    let left = |t: f64| u(d.x0, t);
    let right = |t: f64| u(d.x1, t);
    let init = |x: f64| u(x, d.t0);
    let opts = MolOptions { tol, outputs: 2, ..Default::default() };
    let mut rows = Vec::with_capacity(cells.len());
    for &m in cells {
        let grid = uniform_grid(d.x0, d.x1, m);
        let sol = solve_mol(params, &init, &left, &right, &grid, d.t0, t_end, &opts)?;
        let dx = (d.x1 - d.x0) / m as f64;
        let mut linf = 0.0f64;
        let mut sq = 0.0;
        for (x, v) in grid.iter().zip(sol.final_state()) {
            let e = (v - u(*x, t_end)?).abs();
            linf = linf.max(e);
            sq += e * e * dx;
        }
        rows.push(ConvergenceRow { cells: m, dx, linf, l2: sq.sqrt() });
    }
    let exact = |e: f64| e <= EXACT_LEVEL;
    let pair_orders = rows
        .windows(2)
        .map(|w| {
            if exact(w[0].linf) || exact(w[1].linf) {
                None
            } else {
                Some((w[0].linf / w[1].linf).ln() / (w[0].dx / w[1].dx).ln())
            }
        })
        .collect();
    let order = if rows.len() >= 2 && rows.iter().all(|r| !exact(r.linf)) {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.dx.ln(), r.linf.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(ConvergenceTable { subject: reference.label(), t_end, rows, pair_orders, order })
}

/// Discrete conservation over `[t0, t_end]` with boundary data frozen at `t0`:
/// `|ΔΣ V_i u_i − ∫ (F_right − F_left) dt|`, where `V_i = ∫ (x+λ) dx` over
/// the control volume of node `i` and `F` are the outermost face fluxes.
pub fn discrete_conservation_defect(
    params: &PdeParams,
    initial: &dyn Fn(f64) -> Result<f64>,
    x_grid: &[f64],
    t0: f64,
    t_end: f64,
    tol: f64,
) -> Result<f64> {
    let ul = initial(x_grid[0])?;
    let ur = initial(*x_grid.last().expect("non-empty grid"))?;
    let left = move |_t: f64| Ok(ul);
    let right = move |_t: f64| Ok(ur);
    let opts = MolOptions { tol, outputs: 2, ..Default::default() };
    let (sys, sol) = run(params, initial, &left, &right, x_grid, t0, t_end, &opts)?;
    let mass = |y: &[f64]| -> f64 { y.iter().zip(&sys.geo.volume[1..]).map(|(u, v)| u * v).sum() };
    let m0 = mass(&sol.y[0]);
    let m1 = mass(sol.y.last().expect("non-empty"));
    let boundary = |t: f64| -> Result<f64> {
        let full = sys.full_state(t, &sol.eval(t)?)?;
        let f = sys.face_fluxes(t, &full)?;
        Ok(f[f.len() - 1] - f[0])
    };
    // the dense output is piecewise polynomial, so integrate step by step
    let mut flux = 0.0;
    for w in sol.z.windows(2) {
        flux += quadrature::integrate(boundary, w[0], w[1], tol * 1e-3)?;
    }
    Ok(((m1 - m0) - flux).abs())
}

/// Largest deviation of the solution from its initial state, for steady references.
pub fn stationarity_defect(grid: &GridField) -> f64 {
    let first = &grid.u[0];
    grid.u
        .iter()
        .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Region covered by a grid field.
pub fn grid_region(grid: &GridField) -> Rect {
    Rect::new(grid.x[0], *grid.x.last().unwrap(), grid.t[0], *grid.t.last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::jet::Jet2;
    use crate::pde::FnField;

    fn params(p: i64, q: i64, c: f64, l: f64) -> PdeParams {
        PdeParams::from_parts(p, q, c, l).unwrap()
    }

    #[test]
    fn constant_state_is_preserved() {
        let p = params(3, 2, 0.7, 0.1);
        let grid = uniform_grid(1.0, 2.0, 50);
        let c = |_: f64| Ok(1.7);
        let sol = solve_mol(&p, &c, &c, &c, &grid, 0.0, 0.5, &MolOptions::default()).unwrap();
        assert!(stationarity_defect(&sol) <= 1e-12, "{}", stationarity_defect(&sol));
    }

    #[test]
    fn trivial_solution_is_stationary() {
        let inst = Catalog::unverified().solution_instance("trivial-potential").unwrap();
        let u = |x: f64| Ok(inst.eval(x, 0.0)?.v);
        let l = |_: f64| u(1.0);
        let r = |_: f64| u(2.0);
        let grid = uniform_grid(1.0, 2.0, 200);
        let sol = solve_mol(&inst.params, &u, &l, &r, &grid, 0.0, 1.0, &MolOptions::default()).unwrap();
        assert!(stationarity_defect(&sol) <= 1e-8);
    }

    #[test]
    fn constant_reference_has_no_order() {
        let p = params(2, 1, 0.0, 0.0);
        let f = FnField::new("const", Rect::new(1.0, 2.0, 0.0, 1.0), |_, _| Ok(Jet2::constant(2.0)));
        let table = cross_validate(&p, &f, &[20, 40], 0.2, 1e-9).unwrap();
        assert!(table.rows.iter().all(|r| r.linf <= 1e-12));
        assert_eq!(table.order, None);
    }

    #[test]
    fn conservation_defect_is_small() {
        let p = params(2, 1, 0.5, 0.3);
        let init = |x: f64| Ok(1.0 + 0.5 * (3.0 * x).sin());
        let d = discrete_conservation_defect(&p, &init, &uniform_grid(1.0, 2.0, 40), 0.0, 0.1, 1e-10).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn positivity_loss_detected() {
        let p = params(1, 2, 0.0, 0.0);
        let init = |x: f64| Ok(x - 1.5);
        let l = |_: f64| Ok(1.0);
        let e = solve_mol(&p, &init, &l, &l, &uniform_grid(1.0, 2.0, 10), 0.0, 0.1, &MolOptions::default());
        assert!(matches!(e, Err(Error::PositivityLoss { .. })));
    }
}
