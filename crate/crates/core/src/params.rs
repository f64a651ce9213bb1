use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `"p/q"`, `"p"` or a short decimal like `"0.5"` into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParams(format!("cannot parse `{s}` as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<i64>() {
        return Ok(Rational::from_integer(p));
    }
    // decimal literal, at most 12 fractional digits
    let (int, frac) = s.split_once('.').ok_or_else(bad)?;
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let neg = int.starts_with('-');
    let int: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10i64.pow(frac.len() as u32);
    let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.abs() * den + f;
    Ok(Rational::new(if neg { -num } else { num }, den))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The PDE instance `u_t = (u^n)_xx + C/(x+λ) (u^n)_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeParams {
    n: Rational,
    pub c: f64,
    pub lambda: f64,
}

impl PdeParams {
    pub fn new(n: Rational, c: f64, lambda: f64) -> Result<Self> {
        if n.is_zero() || n.is_one() {
            return Err(Error::InvalidParams(format!("n = {n} is excluded (n must not be 0 or 1)")));
        }
        if !c.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParams("C and lambda must be finite".into()));
        }
        Ok(Self { n, c, lambda })
    }

    /// Convenience constructor from `n = p/q`.
    pub fn from_parts(p: i64, q: i64, c: f64, lambda: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParams("zero denominator in n".into()));
        }
        Self::new(Rational::new(p, q), c, lambda)
    }

    pub fn n(&self) -> Rational {
        self.n
    }

    pub fn n_f64(&self) -> f64 {
        rational_to_f64(&self.n)
    }

    pub fn n_is_integer(&self) -> bool {
        self.n.is_integer()
    }

    /// `x + λ`, required to be positive.
    pub fn shift(&self, x: f64) -> Result<f64> {
        let s = x + self.lambda;
        if s > 0.0 && s.is_finite() {
            Ok(s)
        } else {
            Err(Error::DomainViolation(format!("x + lambda = {s} must be positive (x = {x})")))
        }
    }

    /// `(3n+1)/(n+1)`, the convection coefficient admitting the fourth generator.
    pub fn c_four_parameter(n: Rational) -> Option<Rational> {
        let one = Rational::one();
        if n + one == Rational::zero() {
            None
        } else {
            Some((Rational::from_integer(3) * n + one) / (n + one))
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }
}

impl fmt::Display for PdeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, C={}, lambda={}", self.n, self.c, self.lambda)
    }
}

impl FromStr for PdeParams {
    type Err = Error;

    /// Parses `n=p/q,C=c,lambda=l` (any order, all required).
    fn from_str(s: &str) -> Result<Self> {
        let mut n = None;
        let mut c = None;
        let mut l = None;
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, got `{part}`")))?;
            let num = || {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParams(format!("bad number `{v}`")))
            };
            match k.trim() {
                "n" => n = Some(parse_rational(v)?),
                "C" | "c" => c = Some(num()?),
                "lambda" | "l" => l = Some(num()?),
                other => return Err(Error::InvalidParams(format!("unknown key `{other}`"))),
            }
        }
        match (n, c, l) {
            (Some(n), Some(c), Some(l)) => PdeParams::new(n, c, l),
            _ => Err(Error::InvalidParams("need n, C and lambda".into())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: String,
    #[serde(rename = "C")]
    c: f64,
    lambda: f64,
}

impl Serialize for PdeParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRepr { n: self.n.to_string(), c: self.c, lambda: self.lambda }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PdeParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ParamsRepr::deserialize(d)?;
        let n = parse_rational(&r.n).map_err(serde::de::Error::custom)?;
        PdeParams::new(n, r.c, r.lambda).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_linear_and_degenerate_exponents() {
        assert!(PdeParams::from_parts(0, 1, 0.0, 0.0).is_err());
        assert!(PdeParams::from_parts(3, 3, 0.0, 0.0).is_err());
        assert!(PdeParams::from_parts(1, 2, 0.0, 0.0).is_ok());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), Rational::from_integer(-3));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn four_parameter_coefficient() {
        assert_eq!(PdeParams::c_four_parameter(Rational::from_integer(2)), Some(Rational::new(7, 3)));
        assert_eq!(PdeParams::c_four_parameter(Rational::from_integer(-1)), None);
    }

    #[test]
    fn shift_requires_positive_argument() {
        let p = PdeParams::from_parts(2, 1, 0.0, -1.0).unwrap();
        assert!(p.shift(1.0).is_err());
        assert_eq!(p.shift(3.0).unwrap(), 2.0);
    }

    #[test]
    fn serde_round_trip() {
        let p = PdeParams::from_parts(-1, 2, -0.5, 0.25).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PdeParams>(&s).unwrap(), p);
        assert_eq!("n=-1/2,C=-0.5,lambda=0.25".parse::<PdeParams>().unwrap(), p);
    }
}
