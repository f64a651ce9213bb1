//! Verification campaigns and their reports.

pub mod determining;
pub mod flow;
pub mod potential;
pub mod quadrature;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{pde_residual, Rect, ScalarField};
use crate::params::PdeParams;

pub use determining::{
    case2_constraints, determining_for_generator, determining_residuals, invariant_surface_residual,
    power_law_derivatives,
};
pub use flow::{check_symmetry, flow_closure_defect, flow_transport, TransportedField};
pub use potential::{build_potential, check_auxiliary_system, PotentialField};

/// Default number of sampled points per check.
pub const DEFAULT_SAMPLES: usize = 100;
/// Default seed when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub subject: String,
    pub samples: usize,
    pub max_residual: f64,
    /// Coordinates of the worst sample, `None` when nothing was sampled.
    pub argmax: Option<Vec<f64>>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl VerificationReport {
    /// Reduces `(coordinates, residual)` samples in order; non-finite residuals count as infinite.
    pub fn from_samples(
        subject: impl Into<String>,
        tolerance: f64,
        samples: impl IntoIterator<Item = (Vec<f64>, f64)>,
    ) -> Self {
        let mut max_residual = 0.0f64;
        let mut argmax = None;
        let mut count = 0;
        for (at, r) in samples {
            count += 1;
            let r = if r.is_finite() { r.abs() } else { f64::INFINITY };
            if argmax.is_none() || r > max_residual {
                max_residual = r;
                argmax = Some(at);
            }
        }
        VerificationReport {
            subject: subject.into(),
            samples: count,
            max_residual,
            argmax,
            tolerance,
            pass: count > 0 && max_residual <= tolerance,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Worst case of several reports under one subject.
    pub fn combine(subject: impl Into<String>, tolerance: f64, parts: &[VerificationReport]) -> Self {
        let mut out = VerificationReport::from_samples(
            subject,
            tolerance,
            parts.iter().filter_map(|r| r.argmax.clone().map(|a| (a, r.max_residual))),
        );
        out.samples = parts.iter().map(|r| r.samples).sum();
        out.pass = out.pass && parts.iter().all(|r| r.pass);
        out.seed = parts.iter().find_map(|r| r.seed);
        out
    }
}

/// Evaluates `f` at each point in parallel and reduces sequentially in input order.
pub fn scan_points<F>(subject: &str, points: &[Vec<f64>], tol: f64, f: F) -> Result<VerificationReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let values: Vec<Result<f64>> = points.par_iter().map(|p| f(p)).collect();
    let mut samples = Vec::with_capacity(points.len());
    for (p, v) in points.iter().zip(values) {
        samples.push((p.clone(), v?));
    }
    Ok(VerificationReport::from_samples(subject, tol, samples))
}

pub fn grid_points(region: &Rect, nx: usize, nt: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(nx * nt);
    for i in 0..nx {
        for j in 0..nt {
            let (x, t) = region.grid_point(i, j, nx, nt);
            pts.push(vec![x, t]);
        }
    }
    pts
}

/// PDE residual on an `nx × nt` tensor grid over `region`.
pub fn residual_scan(
    params: &PdeParams,
    field: &dyn ScalarField,
    region: &Rect,
    nx: usize,
    nt: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if nx < 2 || nt < 2 {
        return Err(Error::InvalidParams(format!("grid {nx}x{nt} needs at least 2 points per axis")));
    }
    region.validate(params)?;
    if !field.domain().contains_rect(region) {
        return Err(Error::DomainViolation(format!(
            "region {region:?} is not inside the field domain {:?}",
            field.domain()
        )));
    }
    scan_points(&field.label(), &grid_points(region, nx, nt), tol, |p| {
        let jet = field.eval(p[0], p[1])?;
        pde_residual(params, p[0], &jet)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` seeded uniform points in `region`.
pub fn sample_points(region: &Rect, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| vec![r.gen_range(region.x0..=region.x1), r.gen_range(region.t0..=region.t1)])
        .collect()
}
