use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{rational_to_f64, PdeParams, Rational};

const C_TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= C_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Parameter restriction attached to a catalog entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    NEquals(Rational),
    NNotIn(Vec<Rational>),
    NGreaterThan(Rational),
    CEquals(f64),
    /// `C = (3n+1)/(n+1)`.
    CFourParameter,
    /// `C = −(n+1)/(n−1)`.
    CExponentialFamily,
}

/// Partially specified parameters used to filter the catalog.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamFilter {
    pub n: Option<Rational>,
    pub c: Option<f64>,
}

impl From<&PdeParams> for ParamFilter {
    fn from(p: &PdeParams) -> Self {
        ParamFilter { n: Some(p.n()), c: Some(p.c) }
    }
}

impl Constraint {
    /// `None` when satisfied, otherwise a symbolic description of the violation.
    pub fn violation(&self, p: &PdeParams) -> Option<String> {
        if self.admits(&ParamFilter::from(p)) {
            None
        } else {
            Some(format!("requires {self}"))
        }
    }

    /// Whether some completion of the partial parameters can satisfy the constraint.
    pub fn admits(&self, f: &ParamFilter) -> bool {
        let one = Rational::one();
        match self {
            Constraint::NEquals(v) => f.n.is_none_or(|n| n == *v),
            Constraint::NNotIn(vs) => f.n.is_none_or(|n| !vs.contains(&n)),
            Constraint::NGreaterThan(v) => f.n.is_none_or(|n| n > *v),
            Constraint::CEquals(c) => f.c.is_none_or(|x| close(x, *c)),
            Constraint::CFourParameter => match f.n {
                Some(n) if n == -one => false,
                Some(n) => {
                    let target = rational_to_f64(&PdeParams::c_four_parameter(n).expect("n != -1"));
                    f.c.is_none_or(|c| close(c, target))
                }
                None => true,
            },
            Constraint::CExponentialFamily => match f.n {
                Some(n) if n == one => false,
                Some(n) => {
                    let target = rational_to_f64(&(-(n + one) / (n - one)));
                    f.c.is_none_or(|c| close(c, target))
                }
                None => true,
            },
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::NEquals(v) => write!(f, "n={v}"),
            Constraint::NNotIn(vs) => {
                let list: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "n not in {{{}}}", list.join(", "))
            }
            Constraint::NGreaterThan(v) => write!(f, "n>{v}"),
            Constraint::CEquals(c) => write!(f, "C={c}"),
            Constraint::CFourParameter => f.write_str("C=(3n+1)/(n+1)"),
            Constraint::CExponentialFamily => f.write_str("C=-(n+1)/(n-1)"),
        }
    }
}

/// Named real constants of a family (`a`, `c`, `k`, `k1`, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants(pub BTreeMap<String, f64>);

impl Constants {
    pub fn new(pairs: &[(&str, f64)]) -> Self {
        Constants(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.0
            .get(name)
            .copied()
            .ok_or_else(|| Error::InadmissibleConstants(format!("missing constant `{name}`")))
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.0.insert(name.to_string(), v);
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.set(name, v);
        self
    }
}
