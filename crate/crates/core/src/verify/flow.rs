//! Transport of solutions along closed-form symmetry flows.

use std::sync::Arc;

use super::{residual_scan, VerificationReport};
use crate::catalog::GeneratorSpec;
use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::params::PdeParams;
use crate::pde::{Rect, ScalarField};

/// `û(x̂, t̂)`: the image of a field's graph under the flow at `eps`.
///
/// Every available flow maps `x` and `t` independently, so evaluating the
/// original field at the preimage jets keeps all derivatives exact.
#[derive(Clone)]
pub struct TransportedField {
    generator: GeneratorSpec,
    params: PdeParams,
    eps: f64,
    inner: Arc<dyn ScalarField>,
    domain: Rect,
}

impl TransportedField {
    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl ScalarField for TransportedField {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        let (xp, tp) = self.generator.flow_preimage(&self.params, self.eps, x, t)?;
        let u = self.inner.eval_jet(xp, tp)?;
        let m = self.generator.flow_multiplier(&self.params, self.eps, x, xp)?;
        Ok(u * m)
    }

    fn domain(&self) -> Rect {
        self.domain
    }

    fn label(&self) -> String {
        format!("{}[eps={}]({})", self.generator.id, self.eps, self.inner.label())
    }
}

/// Transports `field` along the flow of `gen` at parameter `eps`.
pub fn flow_transport(
    params: &PdeParams,
    gen: &GeneratorSpec,
    eps: f64,
    field: Arc<dyn ScalarField>,
) -> Result<TransportedField> {
    if !gen.has_flow() {
        return Err(Error::FlowUnavailable(gen.id.to_string()));
    }
    let d = field.domain();
    let mut xs = Vec::with_capacity(4);
    let mut ts = Vec::with_capacity(4);
    for (x, t) in [(d.x0, d.t0), (d.x0, d.t1), (d.x1, d.t0), (d.x1, d.t1)] {
        let (xi, ti, _) = gen.flow(params, eps, x, t, 1.0)?;
        xs.push(xi);
        ts.push(ti);
    }
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let domain = Rect::new(lo(&xs), hi(&xs), lo(&ts), hi(&ts));
    domain.validate(params)?;
    Ok(TransportedField { generator: gen.clone(), params: *params, eps, inner: field, domain })
}

/// Residual scans of `field` transported by each `eps`, reported as the worst case.
pub fn check_symmetry(
    params: &PdeParams,
    gen: &GeneratorSpec,
    field: Arc<dyn ScalarField>,
    eps_list: &[f64],
    grid: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let v = gen.violations(params);
    if !v.is_empty() {
        return Err(Error::InvalidParams(format!("{}: {}", gen.id, v.join("; "))));
    }
    let mut parts = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let moved = flow_transport(params, gen, eps, field.clone())?;
        let mut r = residual_scan(params, &moved, &moved.domain(), grid, grid, tol)?;
        if let Some(a) = r.argmax.as_mut() {
            a.push(eps);
        }
        parts.push(r);
    }
    Ok(VerificationReport::combine(format!("{}:{}", gen.id, field.label()), tol, &parts))
}

/// `max |φ(a, φ(b, p)) − φ(a + b, p)|` over `points` in `(x, t, u)`, the group-law defect of the flow.
pub fn flow_closure_defect(params: &PdeParams, gen: &GeneratorSpec, a: f64, b: f64, points: &[[f64; 3]]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &[x, t, u] in points {
        let (x1, t1, u1) = gen.flow(params, b, x, t, u)?;
        let (x2, t2, u2) = gen.flow(params, a, x1, t1, u1)?;
        let (x3, t3, u3) = gen.flow(params, a + b, x, t, u)?;
        worst = worst.max((x2 - x3).abs()).max((t2 - t3).abs()).max((u2 - u3).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    #[test]
    fn zero_eps_is_identity() {
        let cat = Catalog::unverified();
        let inst = Arc::new(cat.solution_instance("exp-i2").unwrap());
        for g in ["V1", "V2", "V3"] {
            let gen = cat.generator(g).unwrap();
            let moved = flow_transport(&inst.params, gen, 0.0, inst.clone()).unwrap();
            let a = moved.eval(1.3, 0.4).unwrap();
            let b = inst.eval(1.3, 0.4).unwrap();
            assert_eq!(a, b, "{g}");
        }
    }

    #[test]
    fn v1_shifts_time() {
        let cat = Catalog::unverified();
        let inst = Arc::new(cat.solution_instance("exp-i2").unwrap());
        let moved = flow_transport(&inst.params, cat.generator("V1").unwrap(), 0.25, inst.clone()).unwrap();
        assert_eq!(moved.eval(1.5, 0.75).unwrap().v, inst.eval(1.5, 0.5).unwrap().v);
    }

    #[test]
    fn flows_compose() {
        let cat = Catalog::unverified();
        for g in ["V1", "V2", "V3", "V4p"] {
            let gen = cat.generator(g).unwrap();
            let d = flow_closure_defect(&gen.example_params, gen, 0.3, -0.2, &[[1.2, 0.5, 0.8], [2.0, 1.0, 1.5]]).unwrap();
            assert!(d <= 1e-12, "{g}: {d}");
        }
    }

    #[test]
    fn x6_has_no_flow() {
        let cat = Catalog::unverified();
        let inst = Arc::new(cat.solution_instance("trivial-potential").unwrap());
        let p = inst.params;
        let e = flow_transport(&p, cat.generator("X6").unwrap(), 0.1, inst).err().unwrap();
        assert!(matches!(e, Error::FlowUnavailable(_)));
    }

    #[test]
    fn v3_on_exponential_solution() {
        let cat = Catalog::unverified();
        let inst: Arc<dyn ScalarField> = Arc::new(cat.solution_instance("exp-i2").unwrap());
        let p = cat.solution_instance("exp-i2").unwrap().params;
        let r = check_symmetry(&p, cat.generator("V3").unwrap(), inst, &[0.3], 20, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
