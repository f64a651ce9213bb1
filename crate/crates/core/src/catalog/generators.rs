//! Infinitesimal generators: the classical point symmetries, the generators of
//! the auxiliary (potential) system and the nonclassical vector fields.

use serde::Serialize;

use super::constraint::{Constants, Constraint};
use crate::error::{Error, Result};
use crate::jet::{Scalar, Taylor2};
use crate::params::{PdeParams, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Point,
    Potential,
    Nonclassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    V1,
    V2,
    V3,
    V4p,
    X1,
    X2,
    X3,
    X4,
    X5,
    X6,
    NcC2,
    NcC53,
    NcCm1,
}

/// Values of `(p, q, r[, s])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Infinitesimals<S> {
    pub p: S,
    pub q: S,
    pub r: S,
    pub s: Option<S>,
}

#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub id: &'static str,
    pub generator: Generator,
    pub kind: GeneratorKind,
    pub provenance: &'static str,
    pub description: &'static str,
    pub constraints: Vec<Constraint>,
    pub constants: Constants,
    /// Parameters at which the entry is exercised by default.
    pub example_params: PdeParams,
}

fn shifted<S: Scalar>(params: &PdeParams, x: S) -> Result<S> {
    params.shift(x.value())?;
    Ok(x + params.lambda)
}

impl GeneratorSpec {
    /// True for generators of the auxiliary system in `(x, t, u, v)`.
    pub fn acts_on_potential(&self) -> bool {
        matches!(
            self.generator,
            Generator::X1 | Generator::X2 | Generator::X3 | Generator::X4 | Generator::X5 | Generator::X6
        )
    }

    pub fn has_flow(&self) -> bool {
        matches!(self.generator, Generator::V1 | Generator::V2 | Generator::V3 | Generator::V4p)
    }

    /// Constraint violations for `params`, empty when admissible.
    pub fn violations(&self, params: &PdeParams) -> Vec<String> {
        self.constraints.iter().filter_map(|c| c.violation(params)).collect()
    }

    /// Infinitesimals at `(x, t, u[, v])`; `s` is reported only when `v` is given.
    pub fn infinitesimals<S: Scalar>(
        &self,
        params: &PdeParams,
        x: S,
        t: S,
        u: S,
        v: Option<S>,
    ) -> Result<Infinitesimals<S>> {
        if self.kind == GeneratorKind::Potential && v.is_none() {
            return Err(Error::MissingPotential(self.id.to_string()));
        }
        let n = params.n_f64();
        let c = params.c;
        let xs = shifted(params, x)?;
        let zero = S::cst(0.0);
        let one = S::cst(1.0);
        let pqr = |p: S, q: S, r: S| Infinitesimals { p, q, r, s: None };
        let out = match self.generator {
            Generator::V1 => pqr(zero, one, zero),
            Generator::V2 => pqr(xs, t * 2.0, zero),
            Generator::V3 => pqr(zero, -t, u / (n - 1.0)),
            Generator::V4p => pqr(
                xs.powf(2.0 - c) / ((c - 2.0) * (c - 1.0)),
                zero,
                -(xs.powf(1.0 - c) * u * 2.0) / ((c - 1.0) * (n - 1.0)),
            ),
            Generator::X1 => Infinitesimals { s: v.map(|_| zero), ..pqr(zero, one, zero) },
            Generator::X2 => Infinitesimals { s: v.map(|_| one), ..pqr(zero, zero, zero) },
            Generator::X3 => Infinitesimals {
                s: v.map(|v| v * (2.0 * n / (n - 1.0))),
                ..pqr(xs, zero, u * (2.0 / (n - 1.0)))
            },
            Generator::X4 => Infinitesimals { s: v.map(|_| zero), ..pqr(xs, t * (2.0 * n), u * -2.0) },
            Generator::X5 => {
                let k = self.constants.get("k")?;
                Infinitesimals {
                    s: v.map(|_| zero),
                    ..pqr(
                        xs.powf((1.0 - n) / (1.0 + n)) * k,
                        zero,
                        xs.powf(-2.0 * n / (n + 1.0)) * u * (-2.0 * k / (n + 1.0)),
                    )
                }
            }
            Generator::X6 => {
                let v = v.expect("checked above");
                Infinitesimals {
                    p: xs * v * 2.0,
                    q: zero,
                    r: -(xs * xs * u * u * 2.0) - u * v * 2.0,
                    s: Some(v * v),
                }
            }
            Generator::NcC2 => {
                let k = self.constants.get("k")?;
                pqr(S::cst(k), one, u.sqrt() * 2.0 / (xs * xs))
            }
            Generator::NcC53 => {
                let k1 = self.constants.get("k1")?;
                pqr(xs.powf(1.0 / 3.0) * k1, one, -(u * (4.0 * k1)) / (xs.powf(2.0 / 3.0) * 3.0))
            }
            Generator::NcCm1 => {
                let k1 = self.constants.get("k1")?;
                pqr(xs.recip() * k1, one, (u * k1 + u.sqrt() * 2.0) * 4.0 / (xs * xs))
            }
        };
        Ok(out)
    }

    /// Numeric values `(p, q, r, s)`.
    pub fn eval(&self, params: &PdeParams, x: f64, t: f64, u: f64, v: Option<f64>) -> Result<Infinitesimals<f64>> {
        self.infinitesimals(params, x, t, u, v)
    }

    /// `(∂p/∂v)² + (∂q/∂v)² + (∂r/∂v)²` at a point of the auxiliary system.
    pub fn potential_dependence(&self, params: &PdeParams, x: f64, t: f64, u: f64, v: f64) -> Result<f64> {
        if !self.acts_on_potential() {
            return Ok(0.0);
        }
        let var = |i, val| Taylor2::<4>::var(i, val);
        let inf = self.infinitesimals(params, var(0, x), var(1, t), var(2, u), Some(var(3, v)))?;
        Ok(inf.p.d(3).powi(2) + inf.q.d(3).powi(2) + inf.r.d(3).powi(2))
    }

    /// Classification by dependence of `(p, q, r)` on `v` at a few sample points.
    pub fn classify(&self) -> Result<GeneratorKind> {
        if self.kind == GeneratorKind::Nonclassical {
            return Ok(GeneratorKind::Nonclassical);
        }
        let p = &self.example_params;
        let x0 = 1.0 - p.lambda.min(0.0);
        let samples = [(x0 + 0.3, 0.7, 0.9, 1.1), (x0 + 1.1, 1.9, 1.7, -0.4), (x0 + 0.05, 0.2, 0.3, 2.5)];
        for (x, t, u, v) in samples {
            if self.potential_dependence(p, x, t, u, v)? > 0.0 {
                return Ok(GeneratorKind::Potential);
            }
        }
        Ok(GeneratorKind::Point)
    }

    /// Image of `(x, t, u)` under the one-parameter group at parameter `eps`.
    pub fn flow(&self, params: &PdeParams, eps: f64, x: f64, t: f64, u: f64) -> Result<(f64, f64, f64)> {
        let s = params.shift(x)?;
        let n = params.n_f64();
        let c = params.c;
        match self.generator {
            Generator::V1 => Ok((x, t + eps, u)),
            Generator::V2 => Ok((s * eps.exp() - params.lambda, t * (2.0 * eps).exp(), u)),
            Generator::V3 => Ok((x, t * (-eps).exp(), u * (eps / (n - 1.0)).exp())),
            Generator::V4p => {
                let m = c - 1.0;
                let w = s.powf(m) + eps / (c - 2.0);
                if w <= 0.0 {
                    return Err(Error::DomainViolation(format!("flow leaves x + lambda > 0 at eps = {eps}")));
                }
                let s_new = w.powf(1.0 / m);
                let mult = (w / s.powf(m)).powf(-2.0 * (c - 2.0) / ((c - 1.0) * (n - 1.0)));
                Ok((s_new - params.lambda, t, u * mult))
            }
            _ => Err(Error::FlowUnavailable(self.id.to_string())),
        }
    }

    /// Preimage coordinates `(x, t)` of `(x', t')` under the flow at `eps`.
    ///
    /// For the available flows the `x` and `t` maps decouple.
    pub fn flow_preimage<S: Scalar>(&self, params: &PdeParams, eps: f64, x: S, t: S) -> Result<(S, S)> {
        let xs = shifted(params, x)?;
        match self.generator {
            Generator::V1 => Ok((x, t - eps)),
            Generator::V2 => Ok((xs * (-eps).exp() - params.lambda, t * (-2.0 * eps).exp())),
            Generator::V3 => Ok((x, t * eps.exp())),
            Generator::V4p => {
                let c = params.c;
                let m = c - 1.0;
                let w = xs.powf(m) - eps / (c - 2.0);
                if w.value() <= 0.0 {
                    return Err(Error::DomainViolation(format!(
                        "preimage leaves x + lambda > 0 at eps = {eps}"
                    )));
                }
                Ok((w.powf(1.0 / m) - params.lambda, t))
            }
            _ => Err(Error::FlowUnavailable(self.id.to_string())),
        }
    }

    /// Factor `û / u` of the flow, as a function of the image point `x'` and
    /// its preimage `x`.
    pub fn flow_multiplier<S: Scalar>(&self, params: &PdeParams, eps: f64, x_image: S, x_pre: S) -> Result<S> {
        let n = params.n_f64();
        match self.generator {
            Generator::V1 | Generator::V2 => Ok(S::cst(1.0)),
            Generator::V3 => Ok(S::cst((eps / (n - 1.0)).exp())),
            Generator::V4p => {
                let c = params.c;
                let m = c - 1.0;
                let ratio = shifted(params, x_image)?.powf(m) / shifted(params, x_pre)?.powf(m);
                Ok(ratio.powf(-2.0 * (c - 2.0) / ((c - 1.0) * (n - 1.0))))
            }
            _ => Err(Error::FlowUnavailable(self.id.to_string())),
        }
    }
}

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn params(p: i64, q: i64, c: f64, l: f64) -> PdeParams {
    PdeParams::from_parts(p, q, c, l).expect("valid built-in parameters")
}

pub(crate) fn builtin() -> Vec<GeneratorSpec> {
    use Generator::*;
    use GeneratorKind::*;
    let generic = params(2, 1, 0.5, 0.0);
    let four = params(2, 1, 7.0 / 3.0, 0.5);
    let x6 = params(-1, 1, -0.5, 0.0);
    let half = |c: f64| params(1, 2, c, 0.25);
    let four_param = vec![Constraint::NNotIn(vec![r(-1, 1), r(0, 1), r(1, 1)]), Constraint::CFourParameter];
    let nc = |c: f64| vec![Constraint::NEquals(r(1, 2)), Constraint::CEquals(c)];
    let g = |id, generator, kind, provenance, description, constraints, constants, example_params| GeneratorSpec {
        id,
        generator,
        kind,
        provenance,
        description,
        constraints,
        constants,
        example_params,
    };
    vec![
        g("V1", V1, Point, "classical group, time translation", "p=0, q=1, r=0", vec![], Constants::default(), generic),
        g("V2", V2, Point, "classical group, scaling", "p=x+lambda, q=2t, r=0", vec![], Constants::default(), generic),
        g("V3", V3, Point, "classical group, scaling", "p=0, q=-t, r=u/(n-1)", vec![], Constants::default(), generic),
        g(
            "V4p",
            V4p,
            Point,
            "four-parameter group, C=(3n+1)/(n+1)",
            "p=(x+lambda)^(2-C)/((C-2)(C-1)), q=0, r=-2(x+lambda)^(1-C)u/((C-1)(n-1))",
            four_param.clone(),
            Constants::default(),
            four,
        ),
        g("X1", X1, Point, "auxiliary system", "p=0, q=1, r=0, s=0", vec![], Constants::default(), generic),
        g("X2", X2, Point, "auxiliary system", "p=0, q=0, r=0, s=1", vec![], Constants::default(), generic),
        g(
            "X3",
            X3,
            Point,
            "auxiliary system, Table 2 row X3",
            "p=x+lambda, q=0, r=2u/(n-1), s=2nv/(n-1)",
            vec![],
            Constants::default(),
            generic,
        ),
        g(
            "X4",
            X4,
            Point,
            "auxiliary system, Table 2 row X4",
            "p=x+lambda, q=2nt, r=-2u, s=0",
            vec![],
            Constants::default(),
            generic,
        ),
        g(
            "X5",
            X5,
            Point,
            "auxiliary system, Table 2 row X5",
            "p=k(x+lambda)^((1-n)/(1+n)), q=0, r=-2k/(n+1)(x+lambda)^(-2n/(n+1)) u, s=0",
            four_param,
            Constants::new(&[("k", 1.0)]),
            four,
        ),
        g(
            "X6",
            X6,
            Potential,
            "auxiliary system, Table 2 row X6 (potential symmetry)",
            "p=2(x+lambda)v, q=0, r=-2(x+lambda)^2u^2-2uv, s=v^2",
            vec![Constraint::NEquals(r(-1, 1)), Constraint::CEquals(-0.5)],
            Constants::default(),
            x6,
        ),
        g(
            "nc-gen-c2",
            NcC2,
            Nonclassical,
            "nonclassical, n=1/2, p1=k, r1=0, C=2",
            "p=k, q=1, r=2 sqrt(u)/(x+lambda)^2",
            nc(2.0),
            Constants::new(&[("k", 1.0)]),
            half(2.0),
        ),
        g(
            "nc-gen-c53",
            NcC53,
            Nonclassical,
            "nonclassical, n=1/2, C=5/3",
            "p=k1(x+lambda)^(1/3), q=1, r=-4k1 u/(3(x+lambda)^(2/3))",
            nc(5.0 / 3.0),
            Constants::new(&[("k1", 1.5)]),
            half(5.0 / 3.0),
        ),
        g(
            "nc-gen-cm1",
            NcCm1,
            Nonclassical,
            "nonclassical, n=1/2, C=-1",
            "p=k1/(x+lambda), q=1, r=4(k1 u+2 sqrt(u))/(x+lambda)^2",
            nc(-1.0),
            Constants::new(&[("k1", 1.5)]),
            half(-1.0),
        ),
    ]
}
