//! Dormand–Prince 5(4) with PI step control and dense output.
//!
//! The controller and the continuous extension follow Hairer, Nørsett and
//! Wanner (`DOPRI5`): the interpolant is of order 4 and costs no extra
//! right-hand side evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    /// `dy = f(z, y)`. Errors reject the step and shrink it.
    fn rhs(&self, z: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F> OdeSystem for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&self, z: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        (self.1)(z, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    /// Upper bound on `|h|`, e.g. an explicit stability limit.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Failure when `|h|` falls below this fraction of the interval.
    pub h_min_ratio: f64,
    /// Keep the interpolation coefficients of every accepted step.
    pub dense: bool,
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-8, atol: 1e-8, h0: None, h_max: None, max_steps: 100_000, h_min_ratio: 1e-6, dense: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Continuous extension on one accepted step.
#[derive(Debug, Clone, PartialEq)]
struct Segment {
    z0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl Segment {
    fn eval(&self, z: f64, out: &mut [f64]) {
        let th = (z - self.z0) / self.h;
        let th1 = 1.0 - th;
        for (i, o) in out.iter_mut().enumerate() {
            let r = &self.r;
            *o = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Accepted step end points, starting with the initial point.
    pub z: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub stats: Stats,
    segments: Vec<Segment>,
}

impl Solution {
    pub fn z_start(&self) -> f64 {
        self.z[0]
    }

    pub fn z_end(&self) -> f64 {
        *self.z.last().expect("non-empty")
    }

    pub fn has_dense(&self) -> bool {
        !self.segments.is_empty() || self.z.len() == 1
    }

    /// Dense-output value at `z` inside the integrated interval.
    pub fn eval(&self, z: f64) -> Result<Vec<f64>> {
        let (a, b) = (self.z_start().min(self.z_end()), self.z_start().max(self.z_end()));
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if !(z >= a - slack && z <= b + slack) {
            return Err(Error::DomainViolation(format!("z = {z} outside integrated interval [{a}, {b}]")));
        }
        if self.segments.is_empty() {
            if self.z.len() == 1 {
                return Ok(self.y[0].clone());
            }
            return Err(Error::InvalidParams("integration ran without dense output".into()));
        }
        let forward = self.z_end() >= self.z_start();
        // first segment whose end is at or beyond z
        let idx = self.segments.partition_point(|s| {
            let end = s.z0 + s.h;
            if forward {
                end < z
            } else {
                end > z
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        let mut out = vec![0.0; self.y[0].len()];
        seg.eval(z, &mut out);
        Ok(out)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn err_norm(y0: &[f64], y1: &[f64], e: &[f64], o: &IntegratorOptions) -> f64 {
    let s: f64 = y0
        .iter()
        .zip(y1)
        .zip(e)
        .map(|((a, b), e)| {
            let sk = o.atol + o.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (s / y0.len() as f64).sqrt()
}

/// Hairer's starting-step heuristic.
fn initial_step<S: OdeSystem>(sys: &S, z0: f64, y0: &[f64], f0: &[f64], dir: f64, span: f64, o: &IntegratorOptions) -> Result<f64> {
    let n = y0.len() as f64;
    let sk: Vec<f64> = y0.iter().map(|y| o.atol + o.rtol * y.abs()).collect();
    let dnf = (f0.iter().zip(&sk).map(|(f, s)| (f / s).powi(2)).sum::<f64>() / n).sqrt();
    let dny = (y0.iter().zip(&sk).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * dny / dnf };
    h = h.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if sys.rhs(z0 + dir * h, &y1, &mut f1).is_err() {
        return Ok(dir * h * 0.1);
    }
    let der2 = (f1.iter().zip(f0).zip(&sk).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / n).sqrt() / h;
    let der12 = dnf.max(der2);
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
    Ok(dir * (100.0 * h).min(h1).min(span))
}

/// Integrates `sys` from `(z0, y0)` to `z1`.
pub fn integrate<S: OdeSystem>(sys: &S, z0: f64, y0: &[f64], z1: f64, o: &IntegratorOptions) -> Result<Solution> {
    let dim = sys.dim();
    if y0.len() != dim {
        return Err(Error::InvalidParams(format!("initial state has {} components, expected {dim}", y0.len())));
    }
    if !(o.rtol > 0.0 && o.atol > 0.0) {
        return Err(Error::InvalidParams("tolerances must be positive".into()));
    }
    let mut sol = Solution { z: vec![z0], y: vec![y0.to_vec()], stats: Stats::default(), segments: Vec::new() };
    if z1 == z0 {
        return Ok(sol);
    }
    let dir = (z1 - z0).signum();
    let span = (z1 - z0).abs();
    let h_min = o.h_min_ratio * span;
    let h_cap = o.h_max.map_or(span, |m| m.abs().min(span));

    let mut z = z0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    sys.rhs(z, &y, &mut k1)?;
    sol.stats.rhs_evals += 1;
    let mut h = match o.h0 {
        Some(h) => dir * h.abs().min(span),
        None => initial_step(sys, z, &y, &k1, dir, span, o)?,
    };
    h = dir * h.abs().min(h_cap);
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut ys = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];
    let mut facold = 1e-4f64;
    let mut last_reject = false;
    let mut last_error: Option<Error> = None;

    loop {
        if sol.stats.accepted + sol.stats.rejected >= o.max_steps {
            return Err(Error::StepFailure(format!("step limit {} reached at z = {z}", o.max_steps)));
        }
        if h.abs() < h_min {
            return Err(last_error.unwrap_or_else(|| {
                Error::StepFailure(format!("step size collapsed to {:e} at z = {z} (stiffness or blow-up)", h.abs()))
            }));
        }
        let finishing = (z + h - z1) * dir >= 0.0;
        if finishing {
            h = z1 - z;
        }

        let stages = (|| -> Result<()> {
            let stage = |out: &mut Vec<f64>, c: f64, ys: &mut Vec<f64>, comb: &dyn Fn(usize) -> f64| -> Result<()> {
                for i in 0..dim {
                    ys[i] = y[i] + h * comb(i);
                }
                sys.rhs(z + c * h, ys, out)
            };
            stage(&mut k2, C2, &mut ys, &|i| A21 * k1[i])?;
            stage(&mut k3, C3, &mut ys, &|i| A31 * k1[i] + A32 * k2[i])?;
            stage(&mut k4, C4, &mut ys, &|i| A41 * k1[i] + A42 * k2[i] + A43 * k3[i])?;
            stage(&mut k5, C5, &mut ys, &|i| A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])?;
            stage(&mut k6, 1.0, &mut ys, &|i| {
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            })?;
            for i in 0..dim {
                y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            sys.rhs(z + h, &y1, &mut k7)
        })();
        sol.stats.rhs_evals += 6;

        if let Err(e) = stages {
            last_error = Some(e);
            sol.stats.rejected += 1;
            h *= 0.25;
            last_reject = true;
            continue;
        }

        let e: Vec<f64> = (0..dim)
            .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
            .collect();
        let err = err_norm(&y, &y1, &e, o);
        if !err.is_finite() {
            sol.stats.rejected += 1;
            h *= 0.25;
            last_reject = true;
            continue;
        }
        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err <= 1.0 {
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            facold = err.max(1e-4);
            if last_reject {
                h_new = dir * h_new.abs().min(h.abs());
            }
            h_new = dir * h_new.abs().min(h_cap);
            last_reject = false;
            last_error = None;
            sol.stats.accepted += 1;
            if o.dense {
                let r1 = y.clone();
                let r2: Vec<f64> = (0..dim).map(|i| y1[i] - y[i]).collect();
                let r3: Vec<f64> = (0..dim).map(|i| h * k1[i] - r2[i]).collect();
                let r4: Vec<f64> = (0..dim).map(|i| r2[i] - h * k7[i] - r3[i]).collect();
                let r5: Vec<f64> = (0..dim)
                    .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                    .collect();
                sol.segments.push(Segment { z0: z, h, r: [r1, r2, r3, r4, r5] });
            }
            z = if finishing { z1 } else { z + h };
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            sol.z.push(z);
            sol.y.push(y.clone());
            if finishing {
                return Ok(sol);
            }
            h = h_new;
        } else {
            sol.stats.rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_reject = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sys = (1, |_z: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
            Ok(())
        });
        let sol = integrate(&sys, 0.0, &[1.0], 3.0, &IntegratorOptions::with_tol(1e-11)).unwrap();
        assert!((sol.y.last().unwrap()[0] - (-3f64).exp()).abs() < 1e-10);
        for i in 0..=30 {
            let z = 0.1 * i as f64;
            assert!((sol.eval(z).unwrap()[0] - (-z).exp()).abs() < 1e-9, "{z}");
        }
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let sys = (2, |_z: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        });
        let sol = integrate(&sys, 0.0, &[0.0, 1.0], -4.0, &IntegratorOptions::with_tol(1e-11)).unwrap();
        let y = sol.eval(-2.5).unwrap();
        assert!((y[0] - (-2.5f64).sin()).abs() < 1e-9);
        assert!((y[1] - (-2.5f64).cos()).abs() < 1e-9);
    }

    #[test]
    fn zero_data_stays_zero() {
        let sys = (2, |z: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -z * y[0] + y[1];
            Ok(())
        });
        let sol = integrate(&sys, 1.0, &[0.0, 0.0], 2.0, &IntegratorOptions::default()).unwrap();
        assert!(sol.y.iter().all(|y| y.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn blow_up_reports_failure() {
        let sys = (1, |_z: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0] * y[0];
            Ok(())
        });
        let e = integrate(&sys, 0.0, &[1.0], 2.0, &IntegratorOptions::default()).unwrap_err();
        assert!(matches!(e, Error::StepFailure(_)));
    }

    #[test]
    fn rhs_errors_surface_on_collapse() {
        let sys = (1, |z: f64, _y: &[f64], dy: &mut [f64]| {
            if z > 0.5 {
                return Err(Error::SingularPoint { z });
            }
            dy[0] = 1.0;
            Ok(())
        });
        let e = integrate(&sys, 0.0, &[0.0], 1.0, &IntegratorOptions::default()).unwrap_err();
        assert!(matches!(e, Error::SingularPoint { .. }));
    }
}
