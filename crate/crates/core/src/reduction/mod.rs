//! Similarity reductions to ODEs in `z`, their first integrals, and
//! reconstruction of `u(x, t)` from reduced solutions.

pub mod integrator;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::catalog::{Constants, Constraint};
use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};
use crate::params::{PdeParams, Rational};
use crate::pde::{Rect, ScalarField};

pub use integrator::{integrate, IntegratorOptions, OdeSystem, Solution, Stats};

/// Default distance kept from singular points of a reduced ODE.
pub const SINGULARITY_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    Row1,
    Row2,
    Row3,
    Row4,
    NcC2,
    NcC53,
    NcCm1,
}

/// Initial data and a region where the demonstration run is checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionSetup {
    pub params: PdeParams,
    pub constants: Constants,
    pub region: Rect,
    /// `(w, w')` at the smallest `z` over `region`.
    pub w0: f64,
    pub w0_prime: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionSpec {
    pub id: &'static str,
    pub kind: ReductionKind,
    pub provenance: &'static str,
    pub z_form: &'static str,
    pub ansatz_form: &'static str,
    pub ode_form: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_form: Option<&'static str>,
    /// Name of the integrated variable (`y` or `h`).
    pub variable: &'static str,
    pub substitution: &'static str,
    #[serde(serialize_with = "ser_constraints")]
    pub constraints: Vec<Constraint>,
    pub constants: Vec<&'static str>,
    pub demo: ReductionSetup,
}

fn ser_constraints<S: serde::Serializer>(c: &[Constraint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(c.iter().map(|c| c.to_string()))
}

impl ReductionSpec {
    pub fn instance(&self, params: PdeParams, constants: Constants) -> Result<Reduction> {
        let v: Vec<String> = self.constraints.iter().filter_map(|c| c.violation(&params)).collect();
        if !v.is_empty() {
            return Err(Error::InvalidParams(format!("{}: {}", self.id, v.join("; "))));
        }
        let red = Reduction { id: self.id, kind: self.kind, params, constants };
        red.check_constants()?;
        Ok(red)
    }

    pub fn demo_instance(&self) -> Result<Reduction> {
        self.instance(self.demo.params, self.demo.constants.clone())
    }
}

/// A reduction with its parameters and constants fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub id: &'static str,
    pub kind: ReductionKind,
    pub params: PdeParams,
    pub constants: Constants,
}

fn fractional_pow(w: f64, e: f64) -> Result<f64> {
    if e.fract() != 0.0 && w <= 0.0 {
        return Err(Error::NonPositiveW { w });
    }
    if e < 0.0 && w == 0.0 {
        return Err(Error::NonPositiveW { w });
    }
    Ok(w.powf(e))
}

fn nonzero_z(z: f64) -> Result<f64> {
    if z == 0.0 || !z.is_finite() {
        Err(Error::SingularPoint { z })
    } else {
        Ok(z)
    }
}

impl Reduction {
    fn k(&self, name: &str) -> Result<f64> {
        self.constants.get(name)
    }

    fn check_constants(&self) -> Result<()> {
        let nonzero = |name: &str| -> Result<()> {
            if self.k(name)? == 0.0 {
                Err(Error::InadmissibleConstants(format!("{}: {name} must be nonzero", self.id)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ReductionKind::Row1 => {
                if self.k("a")? == 2.0 {
                    return Err(Error::InadmissibleConstants("row1: a must differ from 2".into()));
                }
            }
            ReductionKind::Row2 => {
                self.k("a")?;
            }
            ReductionKind::Row3 | ReductionKind::Row4 => nonzero("a")?,
            ReductionKind::NcC2 => nonzero("k")?,
            ReductionKind::NcC53 => {
                nonzero("k")?;
                nonzero("k1")?;
            }
            ReductionKind::NcCm1 => nonzero("k1")?,
        }
        Ok(())
    }

    fn c1_row3(&self) -> Result<f64> {
        Ok(self.k("a")? / (self.params.n_f64() + 1.0))
    }

    /// `K` of the autonomous row-4 equation `y'' = −K y^(1/n−1) y'`.
    fn k_row4(&self) -> Result<f64> {
        let n = self.params.n_f64();
        let a = self.k("a")?;
        Ok((n - 1.0).powf((n - 3.0) / (n + 1.0)) * (n + 1.0).powi(4) / (4.0 * a * a * n.powi(3) * (n - 1.0)))
    }

    /// Similarity variable `z(x, t)`.
    pub fn z<S: Scalar>(&self, x: S, t: S) -> Result<S> {
        let p = &self.params;
        p.shift(x.value())?;
        let xs = x + p.lambda;
        let n = p.n_f64();
        match self.kind {
            ReductionKind::Row1 => {
                if t.value() == 0.0 {
                    return Err(Error::DomainViolation("row1: z = (x+lambda)^(2-a)/t needs t != 0".into()));
                }
                Ok(xs.powf(2.0 - self.k("a")?) / t)
            }
            ReductionKind::Row2 => Ok((t * -self.k("a")?).exp() * xs),
            ReductionKind::Row3 => {
                if t.value() <= 0.0 {
                    return Err(Error::DomainViolation("row3: log t needs t > 0".into()));
                }
                Ok(xs.powf(p.c - 1.0) * (self.c1_row3()? * (n - 1.0)) + t.ln())
            }
            ReductionKind::Row4 => Ok(xs.powf(p.c - 1.0) * (self.k("a")? * (p.c - 2.0)) - t),
            ReductionKind::NcC2 => Ok(x - t * self.k("k")?),
            ReductionKind::NcC53 => Ok(xs.powf(2.0 / 3.0) * (1.5 * self.k("k1")?) - t * self.k("k")?),
            ReductionKind::NcCm1 => Ok((x * x + x * (2.0 * p.lambda)) / (2.0 * self.k("k1")?) - t),
        }
    }

    /// `u` from the jet of the reduced variable `w(z(x, t))`.
    pub fn ansatz<S: Scalar>(&self, x: S, _t: S, w: S) -> Result<S> {
        let p = &self.params;
        p.shift(x.value())?;
        let xs = x + p.lambda;
        let n = p.n_f64();
        let y_root = |w: S| -> Result<S> {
            fractional_pow(w.value(), 1.0 / n)?;
            Ok(w.powf(1.0 / n))
        };
        match self.kind {
            ReductionKind::Row1 => Ok(y_root(w)? * xs.powf(self.k("a")? / (n - 1.0))),
            ReductionKind::Row2 => Ok(w * xs.powf(2.0 / (n - 1.0))),
            ReductionKind::Row3 => {
                let c1 = self.c1_row3()?;
                Ok(y_root(w)? * (xs.powf(2.0 * n / (n + 1.0)) * c1).exp() * xs.powf(-2.0 / (n + 1.0)))
            }
            ReductionKind::Row4 => Ok(y_root(w)? * (xs * (n - 1.0)).powf(-2.0 / (n + 1.0))),
            ReductionKind::NcC2 => {
                let v = w - xs.recip() / self.k("k")?;
                Ok(v * v)
            }
            ReductionKind::NcC53 => Ok(w * xs.powf(-4.0 / 3.0)),
            ReductionKind::NcCm1 => {
                let k1 = self.k("k1")?;
                let v = w * xs * xs - 2.0;
                Ok(v * v / (k1 * k1))
            }
        }
    }

    /// `w''` of the reduced ODE.
    pub fn reduced_rhs(&self, z: f64, w: f64, wp: f64) -> Result<f64> {
        let p = &self.params;
        let n = p.n_f64();
        let c = p.c;
        match self.kind {
            ReductionKind::Row1 => {
                let z = nonzero_z(z)?;
                let a = self.k("a")?;
                let c1 = c * n + a * n - c;
                let am2 = a - 2.0;
                let yp = if wp == 0.0 { 0.0 } else { fractional_pow(w, 1.0 / n - 1.0)? };
                Ok(wp * ((c1 + n + a - 1.0) / (am2 * (n - 1.0) * z) - yp / (am2 * am2 * n))
                    - a * n * (c1 - n + 1.0) * w / (am2 * am2 * (n - 1.0).powi(2) * z * z))
            }
            ReductionKind::Row2 => {
                let z = nonzero_z(z)?;
                let a = self.k("a")?;
                let h = w;
                let hn1 = fractional_pow(h, n - 1.0)?;
                if h == 0.0 {
                    return Err(Error::NonPositiveW { w: h });
                }
                Ok(-(wp * ((c * n + 4.0 * n - c) / ((n - 1.0) * z) + a / (hn1 * n * z))
                    + 2.0 * h * (c * n + n - c + 1.0) / ((n - 1.0).powi(2) * z * z)
                    + (n - 1.0) * wp * wp / h))
            }
            ReductionKind::Row3 => {
                let c1 = self.c1_row3()?;
                let yp = if wp == 0.0 { 0.0 } else { fractional_pow(w, 1.0 / n - 1.0)? };
                Ok((n + 1.0).powi(2) * yp * (-z).exp() * wp / (4.0 * c1 * c1 * (n - 1.0).powi(2) * n.powi(3))
                    - 2.0 * n / (n - 1.0) * wp
                    - n * n / (n - 1.0).powi(2) * w)
            }
            ReductionKind::Row4 => {
                let yp = if wp == 0.0 { 0.0 } else { fractional_pow(w, 1.0 / n - 1.0)? };
                Ok(-self.k_row4()? * yp * wp)
            }
            ReductionKind::NcC2 => Ok(-2.0 * self.k("k")? * w * wp),
            ReductionKind::NcCm1 => Ok(-2.0 * self.k("k1")? * w * wp),
            ReductionKind::NcC53 => {
                if w <= 0.0 {
                    return Err(Error::NonPositiveW { w });
                }
                let k1 = self.k("k1")?;
                Ok(wp * wp / (2.0 * w) - 2.0 * self.k("k")? * w.sqrt() * wp / (k1 * k1))
            }
        }
    }

    /// Points where the reduced ODE is singular.
    pub fn singular_points(&self) -> Vec<f64> {
        match self.kind {
            ReductionKind::Row1 | ReductionKind::Row2 => vec![0.0],
            _ => vec![],
        }
    }

    /// `(min z, max z)` over `region`, from a 33 × 33 grid including the corners.
    pub fn z_range(&self, region: &Rect) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..33 {
            for j in 0..33 {
                let (x, t) = region.grid_point(i, j, 33, 33);
                let z: f64 = self.z(x, t)?;
                lo = lo.min(z);
                hi = hi.max(z);
            }
        }
        Ok((lo, hi))
    }

    /// Jet of `u` at `(x, t)` given `w_fn: z -> (w, w', w'')`.
    pub fn reconstruct<F>(&self, w_fn: F, x: Jet2, t: Jet2) -> Result<Jet2>
    where
        F: Fn(f64) -> Result<(f64, f64, f64)>,
    {
        let z = self.z(x, t)?;
        let (w, w1, w2) = w_fn(z.v)?;
        self.ansatz(x, t, z.compose(w, w1, w2))
    }
}

struct ReducedSystem<'a>(&'a Reduction);

impl OdeSystem for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, z: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = y[1];
        dy[1] = self.0.reduced_rhs(z, y[0], y[1])?;
        if !dy[1].is_finite() {
            return Err(Error::StepFailure(format!("non-finite w'' at z = {z}")));
        }
        Ok(())
    }
}

/// Numerical solution of a reduced ODE with dense output.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub reduction: Reduction,
    pub solution: Solution,
    pub tol: f64,
}

impl OdeTrajectory {
    pub fn z_interval(&self) -> (f64, f64) {
        let (a, b) = (self.solution.z_start(), self.solution.z_end());
        (a.min(b), a.max(b))
    }

    /// `(w, w', w'')`, with `w''` from the ODE at the interpolated state.
    pub fn eval(&self, z: f64) -> Result<(f64, f64, f64)> {
        let s = self.solution.eval(z)?;
        let w2 = self.reduction.reduced_rhs(z, s[0], s[1])?;
        Ok((s[0], s[1], w2))
    }

    pub fn stats(&self) -> Stats {
        self.solution.stats
    }

    /// Accepted steps as `z,w,w'` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,w,w_prime\n");
        for (z, y) in self.solution.z.iter().zip(&self.solution.y) {
            let _ = writeln!(out, "{z:.16e},{:.16e},{:.16e}", y[0], y[1]);
        }
        out
    }
}

/// Integrates the reduced ODE of `red` from `(z0, w0, w0')` to `z1`.
///
/// The interval must keep `margin` away from the singular points of the ODE.
pub fn integrate_reduced(
    red: &Reduction,
    z0: f64,
    w0: f64,
    w0_prime: f64,
    z1: f64,
    tol: f64,
    margin: f64,
) -> Result<OdeTrajectory> {
    if !(1e-13..=1e-4).contains(&tol) {
        return Err(Error::InvalidParams(format!("tolerance {tol:e} outside [1e-13, 1e-4]")));
    }
    let (lo, hi) = (z0.min(z1), z0.max(z1));
    for s in red.singular_points() {
        if s > lo - margin && s < hi + margin {
            return Err(Error::SingularPoint { z: s });
        }
    }
    let opts = IntegratorOptions { rtol: tol, atol: tol, dense: true, ..Default::default() };
    let solution = integrate(&ReducedSystem(red), z0, &[w0, w0_prime], z1, &opts)?;
    Ok(OdeTrajectory { reduction: red.clone(), solution, tol })
}

/// `u(x, t)` reconstructed from a trajectory.
#[derive(Clone)]
pub struct ReducedField {
    pub trajectory: Arc<OdeTrajectory>,
    pub domain: Rect,
}

impl ScalarField for ReducedField {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        let traj = &self.trajectory;
        traj.reduction.reconstruct(|z| traj.eval(z), x, t)
    }
    fn domain(&self) -> Rect {
        self.domain
    }
    fn label(&self) -> String {
        format!("reduced:{}", self.trajectory.reduction.id)
    }
}

/// Integrates over the `z` range of `region` from data at its low end and
/// wraps the result as a field.
pub fn reduce_over(red: &Reduction, region: &Rect, w0: f64, w0_prime: f64, tol: f64) -> Result<ReducedField> {
    region.validate(&red.params)?;
    let (lo, hi) = red.z_range(region)?;
    let traj = integrate_reduced(red, lo, w0, w0_prime, hi, tol, SINGULARITY_MARGIN)?;
    Ok(ReducedField { trajectory: Arc::new(traj), domain: *region })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstIntegral {
    /// Row 1 with `a = 2 − 2n`, in `y`.
    Row1Y,
    /// Row 2 with `C = −(n+1)/(n−1)`, in `h`.
    Row2H,
    /// Row 2 with `C = −(n+1)/(n−1)`, in `y = h^(n−1)`.
    Row2Y,
}

impl FirstIntegral {
    pub const ALL: [FirstIntegral; 3] = [FirstIntegral::Row1Y, FirstIntegral::Row2H, FirstIntegral::Row2Y];

    pub fn id(&self) -> &'static str {
        match self {
            FirstIntegral::Row1Y => "row1-y",
            FirstIntegral::Row2H => "row2-h",
            FirstIntegral::Row2Y => "row2-y",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.id() == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
    }

    pub fn reduction_kind(&self) -> ReductionKind {
        match self {
            FirstIntegral::Row1Y => ReductionKind::Row1,
            _ => ReductionKind::Row2,
        }
    }

    pub fn formula(&self) -> &'static str {
        match self {
            FirstIntegral::Row1Y => "F = -y/z + Cy/(2nz) - y/(2nz) + y' + y^(1/n)/(4n^2)",
            FirstIntegral::Row2H => "F = h^(n-1) h' z + h^n (3n-1)/((n-1)n) - h^n/n + a h/n",
            FirstIntegral::Row2Y => "G = 2y/z - a/(nz) + a/z + y', y = h^(n-1)",
        }
    }

    /// Checks that `red` is the reduction and parameter case the integral belongs to.
    pub fn applies_to(&self, red: &Reduction) -> Result<()> {
        if red.kind != self.reduction_kind() {
            return Err(Error::InvalidParams(format!("{} belongs to {:?}", self.id(), self.reduction_kind())));
        }
        let n = red.params.n_f64();
        let ok = match self {
            FirstIntegral::Row1Y => (red.k("a")? - (2.0 - 2.0 * n)).abs() < 1e-12,
            _ => Constraint::CExponentialFamily.violation(&red.params).is_none(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "{} requires {}",
                self.id(),
                if *self == FirstIntegral::Row1Y { "a=2-2n" } else { "C=-(n+1)/(n-1)" }
            )))
        }
    }

    /// Value at `(z, w, w')` where `w` is the integrated variable of the reduction
    /// (`y` for row 1, `h` for row 2).
    pub fn eval(&self, red: &Reduction, z: f64, w: f64, wp: f64) -> Result<f64> {
        let z = nonzero_z(z)?;
        let n = red.params.n_f64();
        let c = red.params.c;
        match self {
            FirstIntegral::Row1Y => {
                let y = w;
                let root = if y == 0.0 && n > 0.0 { 0.0 } else { fractional_pow(y, 1.0 / n)? };
                Ok(-y / z + c * y / (2.0 * n * z) - y / (2.0 * n * z) + wp + root / (4.0 * n * n))
            }
            FirstIntegral::Row2H => {
                let a = red.k("a")?;
                let h = w;
                let hn = fractional_pow(h, n)?;
                Ok(fractional_pow(h, n - 1.0)? * wp * z + hn * (3.0 * n - 1.0) / ((n - 1.0) * n) - hn / n + a * h / n)
            }
            FirstIntegral::Row2Y => {
                let a = red.k("a")?;
                let y = fractional_pow(w, n - 1.0)?;
                let yp = (n - 1.0) * fractional_pow(w, n - 2.0)? * wp;
                Ok(2.0 * y / z - a / (n * z) + a / z + yp)
            }
        }
    }

    /// `max |F(z) − F(z0)|` over the accepted steps of a trajectory.
    pub fn drift(&self, traj: &OdeTrajectory) -> Result<f64> {
        self.applies_to(&traj.reduction)?;
        let sol = &traj.solution;
        let f0 = self.eval(&traj.reduction, sol.z[0], sol.y[0][0], sol.y[0][1])?;
        let mut worst = 0.0f64;
        for (z, y) in sol.z.iter().zip(&sol.y) {
            worst = worst.max((self.eval(&traj.reduction, *z, y[0], y[1])? - f0).abs());
        }
        Ok(worst)
    }
}

/// Residual of the row-1 `h`-form ODE (before `h = y^(1/n)`) at `(z, h, h', h'')`.
pub fn row1_h_form_residual(red: &Reduction, z: f64, h: f64, h1: f64, h2: f64) -> Result<f64> {
    if red.kind != ReductionKind::Row1 {
        return Err(Error::InvalidParams("the h-form ODE belongs to row1".into()));
    }
    let z = nonzero_z(z)?;
    let n = red.params.n_f64();
    let c = red.params.c;
    let a = red.k("a")?;
    let c1 = c * n + a * n - c;
    let am2 = a - 2.0;
    if h <= 0.0 {
        return Err(Error::NonPositiveW { w: h });
    }
    let rhs = -(h1 * (1.0 / (am2 * am2 * h.powf(n - 1.0) * n) - (c1 + n + a - 1.0) / (am2 * (n - 1.0) * z))
        + a * h * (c1 - n + 1.0) / (am2 * am2 * (n - 1.0).powi(2) * z * z)
        + (n - 1.0) * h1 * h1 / h);
    Ok(h2 - rhs)
}

fn params(p: i64, q: i64, c: f64, l: f64) -> PdeParams {
    PdeParams::from_parts(p, q, c, l).expect("valid built-in parameters")
}

fn setup(params: PdeParams, constants: &[(&str, f64)], region: Rect, w0: f64, w0_prime: f64) -> ReductionSetup {
    ReductionSetup { params, constants: Constants::new(constants), region, w0, w0_prime }
}

pub fn builtin() -> Vec<ReductionSpec> {
    use ReductionKind::*;
    let half = Rational::new(1, 2);
    let nc = |c: f64| vec![Constraint::NEquals(half), Constraint::CEquals(c)];
    vec![
        ReductionSpec {
            id: "row1",
            kind: Row1,
            provenance: "Table 1 row 1, generator aV2 + V3",
            z_form: "z = (x+lambda)^(2-a)/t",
            ansatz_form: "u = h(z) (x+lambda)^(a/(n-1)), h = y^(1/n)",
            ode_form: "y'' = y'((C1+n+a-1)/((a-2)(n-1)z) - y^(1/n-1)/((a-2)^2 n)) \
                       - a n (C1-n+1) y/((a-2)^2 (n-1)^2 z^2), C1 = Cn + an - C",
            printed_form: None,
            variable: "y",
            substitution: "h = y^(1/n)",
            constraints: vec![],
            constants: vec!["a (a != 2)"],
            demo: setup(params(2, 1, 0.5, 0.5), &[("a", 0.5)], Rect::new(1.0, 2.0, 1.0, 2.0), 1.0, 0.0),
        },
        ReductionSpec {
            id: "row2",
            kind: Row2,
            provenance: "Table 1 row 2, generator aV1 + V2",
            z_form: "z = e^(-at) (x+lambda)",
            ansatz_form: "u = h(z) (x+lambda)^(2/(n-1))",
            ode_form: "h'' = -[h'((Cn+4n-C)/((n-1)z) + a/(h^(n-1) n z)) + 2h(Cn+n-C+1)/((n-1)^2 z^2) + (n-1)h'^2/h]",
            printed_form: None,
            variable: "h",
            substitution: "y = h^(n-1)",
            constraints: vec![],
            constants: vec!["a"],
            demo: setup(params(3, 1, 0.5, 0.3), &[("a", 0.4)], Rect::new(1.0, 2.0, 0.0, 1.0), 1.0, 0.2),
        },
        ReductionSpec {
            id: "row3",
            kind: Row3,
            provenance: "Table 1 row 3, generator aV3 + V4'",
            z_form: "z = c1(n-1)(x+lambda)^(C-1) + log t, c1 = a/(n+1)",
            ansatz_form: "u = h(z) e^(c1 (x+lambda)^(2n/(n+1))) (x+lambda)^(-2/(n+1)), h = y^(1/n)",
            ode_form: "y'' = (n+1)^2 y^(1/n-1) e^(-z) y'/(4 c1^2 (n-1)^2 n^3) - 2n/(n-1) y' - n^2/(n-1)^2 y",
            printed_form: None,
            variable: "y",
            substitution: "h = y^(1/n)",
            constraints: vec![Constraint::CFourParameter],
            constants: vec!["a (nonzero)"],
            demo: setup(params(3, 1, 2.5, 0.0), &[("a", 4.0)], Rect::new(1.0, 1.5, 1.0, 2.0), 1.0, 0.0),
        },
        ReductionSpec {
            id: "row4",
            kind: Row4,
            provenance: "Table 1 row 4, generator aV1 + V4'",
            z_form: "z = a(C-2)(x+lambda)^(C-1) - t",
            ansatz_form: "u = h(z) ((n-1)(x+lambda))^(-2/(n+1)), y = h^n",
            ode_form: "y'' = -K y^(1/n-1) y', K = (n-1)^((n-3)/(n+1)) (n+1)^4/(4 a^2 n^3 (n-1))",
            printed_form: Some(
                "z = a(C-2)(x+lambda)^(C-1)/t, y'' + (1/(2z) + c1 y^(1/n-1)) y' = 0, \
                 c1 = (n-1)^((n-3)/(n+1)) (n+1)^3/(16 a n^3)",
            ),
            variable: "y",
            substitution: "h = y^(1/n)",
            constraints: vec![Constraint::CFourParameter, Constraint::NGreaterThan(Rational::from_integer(1))],
            constants: vec!["a (nonzero)"],
            demo: setup(params(2, 1, 7.0 / 3.0, 0.0), &[("a", 1.0)], Rect::new(1.0, 2.0, 0.0, 1.0), 1.0, 0.5),
        },
        ReductionSpec {
            id: "nc-c2",
            kind: NcC2,
            provenance: "nonclassical case 1, C=2",
            z_form: "z = x - kt",
            ansatz_form: "u = (h(z) - 1/(k(x+lambda)))^2",
            ode_form: "h'' + 2k h h' = 0",
            printed_form: None,
            variable: "h",
            substitution: "none",
            constraints: nc(2.0),
            constants: vec!["k (nonzero)"],
            demo: setup(params(1, 2, 2.0, 0.25), &[("k", 1.0)], Rect::new(1.0, 2.0, 0.0, 0.5), 1.5, 0.5),
        },
        ReductionSpec {
            id: "nc-c53",
            kind: NcC53,
            provenance: "nonclassical, C=5/3",
            z_form: "z = (3k1/2)(x+lambda)^(2/3) - kt",
            ansatz_form: "u = (x+lambda)^(-4/3) h(z)",
            ode_form: "-2h h'' + h'^2 - (4k/k1^2) h^(3/2) h' = 0",
            printed_form: Some("-2h h'' + h'^2 +- 4k k1^2 h^(3/2) h' = 0"),
            variable: "h",
            substitution: "h = g^2 turns it into g'' + 2(k/k1^2) g g' = 0",
            constraints: nc(5.0 / 3.0),
            constants: vec!["k (nonzero)", "k1 (nonzero)"],
            demo: setup(
                params(1, 2, 5.0 / 3.0, 0.2),
                &[("k", 0.7), ("k1", 1.5)],
                Rect::new(1.0, 2.0, 0.0, 1.0),
                1.0,
                0.3,
            ),
        },
        ReductionSpec {
            id: "nc-cm1",
            kind: NcCm1,
            provenance: "nonclassical, C=-1",
            z_form: "z = (x^2 + 2 lambda x)/(2k1) - t",
            ansatz_form: "u = (h(z)(x+lambda)^2 - 2)^2/k1^2",
            ode_form: "h'' + 2k1 h h' = 0",
            printed_form: Some("z = (x^2 + 2 lambda x)/k1 - t"),
            variable: "h",
            substitution: "none",
            constraints: nc(-1.0),
            constants: vec!["k1 (nonzero)"],
            demo: setup(params(1, 2, -1.0, 0.2), &[("k1", 1.5)], Rect::new(1.0, 2.0, 0.0, 1.0), 2.0, 0.2),
        },
    ]
}

pub fn spec(id: &str) -> Result<ReductionSpec> {
    builtin().into_iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::HFamily;
    use crate::pde::pde_residual;
    use crate::verify::{sample_points, scan_points};

    #[test]
    fn similarity_variable_examples() {
        let r1 = spec("row1").unwrap().instance(params(2, 1, 0.0, 0.0), Constants::new(&[("a", 0.0)])).unwrap();
        assert_eq!(r1.z(2.0, 4.0).unwrap(), 1.0);
        assert!(matches!(r1.z(2.0, 0.0), Err(Error::DomainViolation(_))));
        let r2 = spec("row2").unwrap().instance(params(2, 1, 0.0, 0.0), Constants::new(&[("a", 0.0)])).unwrap();
        assert_eq!(r2.z(1.7, 9.0).unwrap(), 1.7);
        let r3 = spec("row3").unwrap().instance(params(3, 1, 2.5, 0.0), Constants::new(&[("a", 4.0)])).unwrap();
        assert_eq!(r3.z(1.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn z_derivatives_match_finite_differences() {
        for s in builtin() {
            let red = s.demo_instance().unwrap();
            let (x, t) = s.demo.region.grid_point(1, 2, 4, 4);
            let j = red.z(Jet2::var_x(x), Jet2::var_t(t)).unwrap();
            let h = 1e-4;
            let f = |x: f64, t: f64| -> f64 { red.z(x, t).unwrap() };
            let fx = (f(x + h, t) - f(x - h, t)) / (2.0 * h);
            let fxx = (f(x + h, t) - 2.0 * f(x, t) + f(x - h, t)) / (h * h);
            let ft = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
            assert!((j.vx - fx).abs() < 1e-6, "{}", s.id);
            assert!((j.vxx - fxx).abs() < 1e-6, "{}", s.id);
            assert!((j.vt - ft).abs() < 1e-6, "{}", s.id);
        }
    }

    #[test]
    fn rhs_examples() {
        let nc = spec("nc-c2").unwrap().instance(params(1, 2, 2.0, 0.0), Constants::new(&[("k", 2.0)])).unwrap();
        assert_eq!(nc.reduced_rhs(0.3, 1.0, 1.0).unwrap(), -4.0);
        let r1 = spec("row1").unwrap().demo_instance().unwrap();
        assert_eq!(r1.reduced_rhs(0.7, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(r1.reduced_rhs(0.0, 1.0, 0.0), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn constant_h_on_row2_with_n3() {
        let red = spec("row2").unwrap().instance(params(3, 1, 0.0, 0.5), Constants::new(&[("a", 0.3)])).unwrap();
        let u = red.reconstruct(|_| Ok((2.0, 0.0, 0.0)), Jet2::var_x(1.0), Jet2::var_t(0.2)).unwrap();
        assert!((u.v - 3.0).abs() < 1e-15);
    }

    #[test]
    fn every_demo_reconstructs_a_solution() {
        for s in builtin() {
            let red = s.demo_instance().unwrap();
            let field = reduce_over(&red, &s.demo.region, s.demo.w0, s.demo.w0_prime, 1e-10).unwrap();
            let pts = sample_points(&s.demo.region, 200, 11);
            let rep = scan_points(s.id, &pts, 1e-7, |p| pde_residual(&red.params, p[0], &field.eval(p[0], p[1])?))
                .unwrap();
            assert!(rep.pass, "{}: {rep:?}", s.id);
        }
    }

    #[test]
    fn tanh_family_matches_integration() {
        let red = spec("nc-c2").unwrap().instance(params(1, 2, 2.0, 0.0), Constants::new(&[("k", 1.0)])).unwrap();
        let fam = HFamily::new(1.0, 4.0, 0.0).unwrap();
        let k4 = fam.k4();
        let traj = integrate_reduced(&red, 0.0, 0.0, k4 * k4, 2.0, 1e-12, SINGULARITY_MARGIN).unwrap();
        for i in 0..=40 {
            let z = 0.05 * i as f64;
            let (h, _, _) = traj.eval(z).unwrap();
            assert!((h - fam.eval(z).unwrap()).abs() < 1e-8, "{z}");
        }
    }

    #[test]
    fn singular_interval_rejected() {
        let red = spec("row1").unwrap().demo_instance().unwrap();
        let e = integrate_reduced(&red, -1.0, 1.0, 0.0, 1.0, 1e-8, SINGULARITY_MARGIN).unwrap_err();
        assert!(matches!(e, Error::SingularPoint { .. }));
    }

    #[test]
    fn row1_first_integral_is_conserved() {
        let red = spec("row1").unwrap().instance(params(2, 1, 0.5, 0.5), Constants::new(&[("a", -2.0)])).unwrap();
        let traj = integrate_reduced(&red, 1.0, 1.0, 0.5, 3.0, 1e-10, SINGULARITY_MARGIN).unwrap();
        assert!(FirstIntegral::Row1Y.drift(&traj).unwrap() < 1e-8);
        assert_eq!(FirstIntegral::Row1Y.eval(&red, 2.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn row2_h_integral_is_conserved() {
        let red = spec("row2").unwrap().instance(params(3, 1, -2.0, 0.25), Constants::new(&[("a", 0.5)])).unwrap();
        let traj = integrate_reduced(&red, 1.0, 1.0, 0.1, 2.0, 1e-10, SINGULARITY_MARGIN).unwrap();
        assert!(FirstIntegral::Row2H.drift(&traj).unwrap() < 1e-8);
    }
}
