//! Closed-form solutions of `h'' + 2k h h' = 0`.
//!
//! One integration gives `h' + k h^2 = k3`. For `k·k3 > 0` the solution is
//! `(k4/k) tanh(k4 (z + k2))` with `k4 = sqrt(k k3)`; for `k·k3 < 0` it is
//! `−(k4/k) tan(k4 (z + k2))` with `k4 = sqrt(−k k3)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Tanh,
    Tan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HFamily {
    /// Coupling `k` in `h'' + 2k h h' = 0`.
    pub k: f64,
    /// Value of the first integral `h' + k h^2` (`k3`).
    pub level: f64,
    /// Shift `k2` of the argument.
    pub shift: f64,
}

impl HFamily {
    pub fn new(k: f64, level: f64, shift: f64) -> Result<Self> {
        let f = Self { k, level, shift };
        f.branch()?;
        Ok(f)
    }

    pub fn branch(&self) -> Result<Branch> {
        let kk3 = self.k * self.level;
        if !(kk3.is_finite()) || kk3 == 0.0 {
            return Err(Error::InadmissibleConstants(format!(
                "k·k3 = {kk3} must be nonzero (k = {}, k3 = {})",
                self.k, self.level
            )));
        }
        Ok(if kk3 > 0.0 { Branch::Tanh } else { Branch::Tan })
    }

    pub fn k4(&self) -> f64 {
        (self.k * self.level).abs().sqrt()
    }

    pub fn eval<S: Scalar>(&self, z: S) -> Result<S> {
        let k4 = self.k4();
        let arg = (z + self.shift) * k4;
        match self.branch()? {
            Branch::Tanh => Ok(arg.tanh() * (k4 / self.k)),
            Branch::Tan => {
                if arg.value().cos().abs() < 1e-10 {
                    return Err(Error::DomainViolation(format!("tan pole at z = {}", z.value())));
                }
                Ok(arg.tan() * (-k4 / self.k))
            }
        }
    }

    /// `(h, h', h'')` at `z`.
    pub fn derivatives(&self, z: f64) -> Result<(f64, f64, f64)> {
        let j = self.eval(crate::jet::Jet2::var_x(z))?;
        Ok((j.v, j.vx, j.vxx))
    }

    /// Residual of `h'' + 2k h h'`.
    pub fn ode_residual(&self, h: f64, h1: f64, h2: f64) -> f64 {
        h2 + 2.0 * self.k * h * h1
    }

    /// `h' + k h^2`, equal to `k3` on the family.
    pub fn first_integral(&self, h: f64, h1: f64) -> f64 {
        h1 + self.k * h * h
    }
}
