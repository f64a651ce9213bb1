//! Closed-form exact solutions.

use serde::Serialize;

use super::constraint::{Constants, Constraint};
use super::hlib::{Branch, HFamily};
use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};
use crate::params::{PdeParams, Rational};
use crate::pde::{Rect, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionFamily {
    /// Row-1 similarity solution with `a = 2 − 2n` and vanishing first integral.
    Dipole,
    /// Row-2 solution on `C = −(n+1)/(n−1)`.
    ExpI2,
    /// Invariant solution of the potential generator.
    TrivialPotential,
    NcC2,
    NcC53,
    NcCm1,
}

/// Named parameter set at which an entry is evaluated and verified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub params: PdeParams,
    pub constants: Constants,
    pub domain: Rect,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSpec {
    pub id: &'static str,
    pub family: SolutionFamily,
    pub provenance: &'static str,
    /// Resolved closed form that the evaluator implements.
    pub form: &'static str,
    /// Form as printed, when it differs from `form`.
    pub printed_form: Option<&'static str>,
    #[serde(serialize_with = "ser_constraints")]
    pub constraints: Vec<Constraint>,
    /// `(name, meaning / admissibility)`.
    pub constants: Vec<(&'static str, &'static str)>,
    pub presets: Vec<Preset>,
    pub verified_against_pde: bool,
}

fn ser_constraints<S: serde::Serializer>(c: &[Constraint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(c.iter().map(|c| c.to_string()))
}

impl SolutionSpec {
    pub fn violations(&self, params: &PdeParams) -> Vec<String> {
        self.constraints.iter().filter_map(|c| c.violation(params)).collect()
    }

    pub fn preset(&self, name: &str) -> Result<&Preset> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownEntry(format!("{}@{name}", self.id)))
    }

    pub fn default_preset(&self) -> &Preset {
        &self.presets[0]
    }

    /// Instance at a named preset, or the first one.
    pub fn instance(&self, preset: Option<&str>) -> Result<SolutionInstance> {
        let p = match preset {
            Some(name) => self.preset(name)?,
            None => self.default_preset(),
        };
        self.instance_with(p.params, p.constants.clone(), p.domain)
    }

    /// Instance with explicit parameters; constraints and constants are validated.
    pub fn instance_with(&self, params: PdeParams, constants: Constants, domain: Rect) -> Result<SolutionInstance> {
        let v = self.violations(&params);
        if !v.is_empty() {
            return Err(Error::InvalidParams(format!("{}: {}", self.id, v.join("; "))));
        }
        domain.validate(&params)?;
        let inst = SolutionInstance {
            id: self.id.to_string(),
            family: self.family,
            params,
            constants,
            domain,
        };
        inst.check_constants()?;
        Ok(inst)
    }
}

/// A solution family with all parameters and constants fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionInstance {
    pub id: String,
    pub family: SolutionFamily,
    pub params: PdeParams,
    pub constants: Constants,
    pub domain: Rect,
}

impl SolutionInstance {
    fn h_family(&self, coupling: f64, level: &str, shift: &str) -> Result<HFamily> {
        let fam = HFamily::new(coupling, self.constants.get(level)?, self.constants.get(shift)?)?;
        if let Some(&b) = self.constants.0.get("branch") {
            let want = if b > 0.0 { Branch::Tanh } else { Branch::Tan };
            if fam.branch()? != want {
                return Err(Error::InadmissibleConstants(format!(
                    "{}: the {:?} branch needs k·k3 {} 0",
                    self.id,
                    want,
                    if b > 0.0 { ">" } else { "<" }
                )));
            }
        }
        Ok(fam)
    }

    fn check_constants(&self) -> Result<()> {
        let c = &self.constants;
        match self.family {
            SolutionFamily::Dipole => {
                c.get("k1")?;
            }
            SolutionFamily::ExpI2 => {
                c.get("a")?;
                c.get("c")?;
            }
            SolutionFamily::TrivialPotential => {
                c.get("c1")?;
            }
            SolutionFamily::NcC2 => {
                let k = c.get("k")?;
                if k == 0.0 {
                    return Err(Error::InadmissibleConstants("k must be nonzero".into()));
                }
                self.h_family(k, "k3", "k2")?;
            }
            SolutionFamily::NcC53 => {
                let k1 = c.get("k1")?;
                if k1 == 0.0 || c.get("k")? == 0.0 {
                    return Err(Error::InadmissibleConstants("k and k1 must be nonzero".into()));
                }
                self.h_family(c.get("k")? / (k1 * k1), "k2", "k3")?;
            }
            SolutionFamily::NcCm1 => {
                let k1 = c.get("k1")?;
                if k1 == 0.0 {
                    return Err(Error::InadmissibleConstants("k1 must be nonzero".into()));
                }
                self.h_family(k1, "k3", "k2")?;
            }
        }
        Ok(())
    }

    /// Closed form evaluated with any scalar type; no domain check beyond `x + λ > 0`.
    pub fn eval_generic<S: Scalar>(&self, x: S, t: S) -> Result<S> {
        let p = &self.params;
        p.shift(x.value())?;
        let n = p.n_f64();
        let xs = x + p.lambda;
        let k = &self.constants;
        let positive = |what: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::DomainViolation(format!("{}: {what} = {v} must be positive", self.id)))
            }
        };
        match self.family {
            SolutionFamily::Dipole => {
                positive("t", t.value())?;
                let k1 = k.get("k1")?;
                let k2 = (2.0 * p.c - 2.0) * n - 4.0 * n * n;
                let d = 4.0 * n.powi(3) + k2 * (n - 1.0);
                let e1 = (4.0 * n * n + k2) / (4.0 * n * n);
                let e2 = k2 / (4.0 * n.powi(3));
                let z = xs.powf(2.0 * n) / t;
                let base = z.powf(e1) * ((1.0 - n) / d) + z.powf(e2) * k1;
                positive("dipole bracket", base.value())?;
                let h = base.powf(1.0 / (n - 1.0)) * z.powf(-k2 / (4.0 * n.powi(3) - 4.0 * n * n));
                Ok(h * xs.powi(-2))
            }
            SolutionFamily::ExpI2 => {
                let (a, c) = (k.get("a")?, k.get("c")?);
                let bracket = (t * (2.0 * a)).exp() * c / (xs * xs) - a * (n - 1.0) / (2.0 * n);
                let e = 1.0 / (n - 1.0);
                if e.fract() != 0.0 {
                    positive("exponential bracket", bracket.value())?;
                }
                Ok(bracket.powf(e) * xs.powf(2.0 / (n - 1.0)))
            }
            SolutionFamily::TrivialPotential => Ok(xs.powf(-1.5) * (k.get("c1")? / 2.0)),
            SolutionFamily::NcC2 => {
                let kk = k.get("k")?;
                let fam = self.h_family(kk, "k3", "k2")?;
                let h = fam.eval(x - t * kk)?;
                let w = h - xs.recip() / kk;
                Ok(w * w)
            }
            SolutionFamily::NcC53 => {
                let (kk, k1) = (k.get("k")?, k.get("k1")?);
                let fam = self.h_family(kk / (k1 * k1), "k2", "k3")?;
                let z = xs.powf(2.0 / 3.0) * (1.5 * k1) - t * kk;
                let g = fam.eval(z)?;
                positive("g", g.value())?;
                Ok(g * g * xs.powf(-4.0 / 3.0))
            }
            SolutionFamily::NcCm1 => {
                let k1 = k.get("k1")?;
                let fam = self.h_family(k1, "k3", "k2")?;
                let z = (x * x + x * (2.0 * p.lambda)) / (2.0 * k1) - t;
                let h = fam.eval(z)?;
                let w = h * xs * xs - 2.0;
                Ok(w * w / (k1 * k1))
            }
        }
    }

    /// Jet of the solution at `(x, t)`, which must lie in the declared domain.
    pub fn eval_solution(&self, x: f64, t: f64) -> Result<Jet2> {
        if !self.domain.contains(x, t) {
            return Err(Error::DomainViolation(format!(
                "({x}, {t}) outside the domain of {} {:?}",
                self.id, self.domain
            )));
        }
        self.eval(x, t)
    }

    /// `v = c1 sqrt(x+λ)` for the potential-invariant solution.
    pub fn closed_form_potential(&self, x: f64) -> Option<f64> {
        match self.family {
            SolutionFamily::TrivialPotential => {
                let c1 = self.constants.get("c1").ok()?;
                Some(c1 * self.params.shift(x).ok()?.sqrt())
            }
            _ => None,
        }
    }
}

impl ScalarField for SolutionInstance {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        self.eval_generic(x, t)
    }
    fn domain(&self) -> Rect {
        self.domain
    }
    fn label(&self) -> String {
        self.id.clone()
    }
}

fn params(p: i64, q: i64, c: f64, l: f64) -> PdeParams {
    PdeParams::from_parts(p, q, c, l).expect("valid built-in parameters")
}

fn preset(name: &'static str, params: PdeParams, constants: &[(&str, f64)], domain: Rect) -> Preset {
    Preset { name, params, constants: Constants::new(constants), domain }
}

pub(crate) fn builtin() -> Vec<SolutionSpec> {
    use SolutionFamily::*;
    let half = Rational::new(1, 2);
    let nc = |c: f64| vec![Constraint::NEquals(half), Constraint::CEquals(c)];
    vec![
        SolutionSpec {
            id: "dipole",
            family: Dipole,
            provenance: "Table 1 row 1 with a=2-2n, first integral constant zero",
            form: "u = (x+lambda)^-2 [ (1-n) z^e1/D + k1 z^e2 ]^(1/(n-1)) z^(-k2/(4n^3-4n^2)), \
                   z = (x+lambda)^(2n)/t, k2 = (2C-2)n - 4n^2, D = 4n^3 + k2(n-1), \
                   e1 = (4n^2+k2)/(4n^2), e2 = k2/(4n^3)",
            printed_form: Some("k2 = (2c-2)n - 4n^2 with lower-case c (read as C)"),
            constraints: vec![Constraint::NNotIn(vec![Rational::from_integer(0), Rational::from_integer(1)])],
            constants: vec![("k1", "free real; bracket must stay positive on the domain")],
            presets: vec![
                preset("default", params(2, 1, 0.5, 0.5), &[("k1", 1.0)], Rect::new(1.0, 2.0, 1.0, 2.0)),
                preset("c73", params(2, 1, 7.0 / 3.0, 0.5), &[("k1", 5.0)], Rect::new(2.0, 3.0, 1.0, 2.0)),
                preset("pme", params(2, 1, 0.0, 0.5), &[("k1", 1.0)], Rect::new(1.0, 2.0, 1.0, 2.0)),
            ],
            verified_against_pde: false,
        },
        SolutionSpec {
            id: "exp-i2",
            family: ExpI2,
            provenance: "Table 1 row 2, exponential exact solution",
            form: "u = (c e^(2at)/(x+lambda)^2 - a(n-1)/(2n))^(1/(n-1)) (x+lambda)^(2/(n-1))",
            printed_form: Some("u = (c e^(2at)/x^2 - a(n-1)/(2n))^(1/(n-1)) x^(2/(n-1))"),
            constraints: vec![Constraint::CExponentialFamily],
            constants: vec![("a", "free real"), ("c", "free real; bracket positive for fractional 1/(n-1)")],
            presets: vec![preset(
                "default",
                params(3, 1, -2.0, 0.25),
                &[("a", 0.5), ("c", 2.0)],
                Rect::new(1.0, 2.0, 0.0, 1.0),
            )],
            verified_against_pde: false,
        },
        SolutionSpec {
            id: "trivial-potential",
            family: TrivialPotential,
            provenance: "invariant solution of the potential symmetry X6",
            form: "u = c1/(2 (x+lambda)^(3/2)), v = c1 sqrt(x+lambda)",
            printed_form: None,
            constraints: vec![Constraint::NEquals(Rational::from_integer(-1)), Constraint::CEquals(-0.5)],
            constants: vec![("c1", "free real")],
            presets: vec![preset(
                "default",
                params(-1, 1, -0.5, 0.0),
                &[("c1", 1.0)],
                Rect::new(1.0, 2.0, 0.0, 1.0),
            )],
            verified_against_pde: false,
        },
        SolutionSpec {
            id: "nc-c2",
            family: NcC2,
            provenance: "nonclassical case 1, p1=k, r1=0, C=2",
            form: "u = (h(x-kt) - 1/(k(x+lambda)))^2, h'' + 2k h h' = 0",
            printed_form: Some("u = (h - 1/(k(x+C)))^2"),
            constraints: nc(2.0),
            constants: vec![
                ("k", "nonzero"),
                ("k2", "shift of the argument"),
                ("k3", "level of h' + k h^2; k k3 > 0 gives tanh, < 0 gives tan"),
                ("branch", "optional: +1 requires tanh, -1 requires tan"),
            ],
            presets: vec![
                preset(
                    "tanh",
                    params(1, 2, 2.0, 0.25),
                    &[("k", 1.0), ("k2", 0.5), ("k3", 4.0), ("branch", 1.0)],
                    Rect::new(1.0, 2.0, 0.0, 0.5),
                ),
                preset(
                    "tan",
                    params(1, 2, 2.0, 0.25),
                    &[("k", -1.0), ("k2", -1.1), ("k3", 1.0), ("branch", -1.0)],
                    Rect::new(1.0, 2.0, 0.0, 0.4),
                ),
            ],
            verified_against_pde: false,
        },
        SolutionSpec {
            id: "nc-c53",
            family: NcC53,
            provenance: "nonclassical, C=5/3, p1=k1(x+lambda)^(1/3)",
            form: "u = (x+lambda)^(-4/3) g(z)^2, z = (3k1/2)(x+lambda)^(2/3) - kt, \
                   g'' + 2(k/k1^2) g g' = 0, g > 0",
            printed_form: Some("h'' - h'^2/(2h) +- 4k k1^2 h^(3/2) h' = 0 with tan/tanh h"),
            constraints: nc(5.0 / 3.0),
            constants: vec![
                ("k", "nonzero"),
                ("k1", "nonzero"),
                ("k2", "level of g' + (k/k1^2) g^2"),
                ("k3", "shift of the argument"),
            ],
            presets: vec![preset(
                "default",
                params(1, 2, 5.0 / 3.0, 0.2),
                &[("k", 0.7), ("k1", 1.5), ("k2", 2.0), ("k3", 0.0)],
                Rect::new(1.0, 2.0, 0.0, 1.0),
            )],
            verified_against_pde: false,
        },
        SolutionSpec {
            id: "nc-cm1",
            family: NcCm1,
            provenance: "nonclassical, C=-1, p1=k1/(x+lambda)",
            form: "u = (h(z) (x+lambda)^2 - 2)^2/k1^2, z = (x^2+2 lambda x)/(2k1) - t, h'' + 2k1 h h' = 0",
            printed_form: Some("z = (x^2+2 lambda x)/k1 - t"),
            constraints: nc(-1.0),
            constants: vec![
                ("k1", "nonzero"),
                ("k2", "shift of the argument"),
                ("k3", "level of h' + k1 h^2"),
            ],
            presets: vec![preset(
                "default",
                params(1, 2, -1.0, 0.2),
                &[("k1", 1.5), ("k2", 1.0), ("k3", 6.0)],
                Rect::new(1.0, 2.0, 0.0, 1.0),
            )],
            verified_against_pde: false,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::pde_residual;

    fn spec(id: &str) -> SolutionSpec {
        builtin().into_iter().find(|s| s.id == id).unwrap()
    }

    #[test]
    fn every_preset_solves_the_pde() {
        for s in builtin() {
            for p in &s.presets {
                let inst = s.instance(Some(p.name)).unwrap();
                for i in 0..7 {
                    for j in 0..7 {
                        let (x, t) = p.domain.grid_point(i, j, 7, 7);
                        let jet = inst.eval_solution(x, t).unwrap();
                        let r = pde_residual(&p.params, x, &jet).unwrap();
                        assert!(r.abs() < 1e-10, "{}@{} at ({x},{t}): {r}", s.id, p.name);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_solution_value() {
        let s = spec("trivial-potential");
        let p = s.default_preset();
        let inst = s
            .instance_with(p.params, Constants::new(&[("c1", 2.0)]), Rect::new(1.0, 5.0, 0.0, 1.0))
            .unwrap();
        let j = inst.eval_solution(4.0, 0.3).unwrap();
        assert!((j.v - 0.125).abs() < 1e-16);
        assert_eq!(j.vt, 0.0);
    }

    #[test]
    fn tanh_zero_crossing() {
        let s = spec("nc-c2");
        let p = s.preset("tanh").unwrap();
        // z + k2 = 0 at x = 1, t = 1.5 with k = 1, k2 = 0.5
        let inst = s.instance_with(p.params, p.constants.clone(), Rect::new(1.0, 2.0, 0.0, 2.0)).unwrap();
        let j = inst.eval_solution(1.0, 1.5).unwrap();
        assert!((j.v - (1.0f64 / 1.25).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn branch_mismatch_is_inadmissible() {
        let s = spec("nc-c2");
        let p = s.preset("tanh").unwrap();
        let c = p.constants.clone().with("k3", -4.0);
        assert!(matches!(s.instance_with(p.params, c, p.domain), Err(Error::InadmissibleConstants(_))));
    }

    #[test]
    fn constraint_violation_reported() {
        let s = spec("exp-i2");
        let p = s.default_preset();
        let e = s.instance_with(p.params.with_c(1.0), p.constants.clone(), p.domain).unwrap_err();
        assert!(matches!(e, Error::InvalidParams(_)));
    }

    #[test]
    fn outside_domain_rejected() {
        let inst = spec("trivial-potential").instance(None).unwrap();
        assert!(matches!(inst.eval_solution(3.0, 0.5), Err(Error::DomainViolation(_))));
        assert!(inst.eval(3.0, 0.5).is_ok());
    }
}
