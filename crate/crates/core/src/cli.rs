//! The `simred` command line: argument parsing, run configuration, report
//! serialization and exit codes.
//!
//! Exit codes: `0` when every check passes, `1` when a check fails or a
//! computation breaks down, `2` for configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::catalog::{Catalog, Constants, EntryFilter, EntryKind, GeneratorKind, GeneratorSpec, ParamFilter, SolutionInstance};
use crate::error::{Error, Result};
use crate::expr::ExprField;
use crate::params::{parse_rational, PdeParams};
use crate::pde::{conservation_residual_jet, pde_residual, Rect, ScalarField};
use crate::pdesolve::{cross_validate, ConvergenceTable};
use crate::reduction::{self, reduce_over, FirstIntegral, OdeTrajectory, Reduction};
use crate::verify::{
    build_potential, check_auxiliary_system, check_symmetry, determining_for_generator, flow_closure_defect,
    grid_points, residual_scan, rng, sample_points, scan_points, VerificationReport, DEFAULT_SAMPLES, DEFAULT_SEED,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Region used for ad-hoc expressions when none is given.
const DEFAULT_REGION: Rect = Rect::new(1.0, 2.0, 0.0, 1.0);

#[derive(Debug, Parser)]
#[command(name = "simred", version, about = "Exact solutions, symmetries and reductions of u_t = (u^n)_xx + C/(x+lambda) (u^n)_x")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args, Default)]
struct Common {
    /// Exponent n as "p/q".
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Convection coefficient C.
    #[arg(long = "C", allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Region as "x0,x1,t0,t1".
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Pass threshold of the check.
    #[arg(long)]
    tol: Option<f64>,
    /// Number of seeded random sample points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, env = "SIMRED_SEED")]
    seed: Option<u64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write CSV data (trajectory, grid or table) here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Validate the configuration, print it and stop.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Lists catalog entries as JSON.
    ListCatalog {
        /// point | potential | nonclassical | solution
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Residual scan of a catalog solution (`id` or `id@preset`) or `ansatz:u=<expr>`.
    VerifySolution {
        #[arg(long)]
        id: String,
        /// Points per axis of the tensor grid.
        #[arg(long)]
        grid: Option<usize>,
        /// Extra constants as "name=value".
        #[arg(long = "const")]
        constants: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Transports a solution along a generator's flow and rechecks it.
    CheckSymmetry {
        #[arg(long)]
        generator: String,
        #[arg(long)]
        id: String,
        /// Flow parameters as a comma list.
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluates the four nonclassical determining equations at random points.
    CheckDetermining {
        #[arg(long)]
        generator: String,
        /// Range of u as "lo,hi".
        #[arg(long = "u-range")]
        u_range: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Builds the potential by quadrature and checks the auxiliary system.
    CheckPotential {
        #[arg(long, default_value = "trivial-potential")]
        id: String,
        #[arg(long = "quad-tol")]
        quad_tol: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Integrates a reduced ODE, reconstructs u and checks the PDE residual.
    Reduce {
        #[arg(long)]
        id: String,
        #[arg(long = "const")]
        constants: Vec<String>,
        /// Initial data as "w,w'".
        #[arg(long, allow_hyphen_values = true)]
        w0: Option<String>,
        #[arg(long = "ode-tol")]
        ode_tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Drift of a first integral along an integrated trajectory.
    CheckFirstIntegral {
        /// row1-y | row2-h | row2-y
        #[arg(long)]
        integral: String,
        #[arg(long = "const")]
        constants: Vec<String>,
        #[arg(long = "z-range", allow_hyphen_values = true)]
        z_range: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        w0: Option<String>,
        #[arg(long = "ode-tol")]
        ode_tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Method-of-lines convergence study against an exact solution.
    CrossValidate {
        #[arg(long, default_value = "nc-c2@tanh")]
        id: String,
        #[arg(long)]
        cells: Option<String>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long = "ode-tol")]
        ode_tol: Option<f64>,
        /// Expected order; `--tol` is the allowed deviation.
        #[arg(long)]
        order: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Checks `D_x F − D_t G + (x+λ)·residual = 0` relative to the size of its terms.
    CheckConservation {
        #[arg(long)]
        id: String,
        #[arg(long = "const")]
        constants: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    ListCatalog,
    VerifySolution,
    CheckSymmetry,
    CheckDetermining,
    CheckPotential,
    Reduce,
    CheckFirstIntegral,
    CrossValidate,
    CheckConservation,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Parameter overrides; `n` stays a rational string.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub n: Option<String>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub lambda: Option<f64>,
}

impl ParamOverrides {
    fn is_empty(&self) -> bool {
        self.n.is_none() && self.c.is_none() && self.lambda.is_none()
    }

    /// `base` with the given fields replaced.
    pub fn apply(&self, base: PdeParams) -> Result<PdeParams> {
        let n = match &self.n {
            Some(s) => parse_rational(s)?,
            None => base.n(),
        };
        PdeParams::new(n, self.c.unwrap_or(base.c), self.lambda.unwrap_or(base.lambda))
    }

    /// Parameters given in full, or `what` is reported missing.
    fn require(&self, what: &str) -> Result<PdeParams> {
        let n = self.n.as_deref().ok_or_else(|| Error::InvalidParams(format!("{what} needs --n")))?;
        let c = self.c.ok_or_else(|| Error::InvalidParams(format!("{what} needs --C")))?;
        PdeParams::new(parse_rational(n)?, c, self.lambda.unwrap_or(0.0))
    }
}

/// Everything a run depends on. Unset options keep the per-command defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    /// Entry ids in command order (solution, generator, reduction or integral).
    pub ids: Vec<String>,
    pub params: ParamOverrides,
    pub constants: BTreeMap<String, f64>,
    pub region: Option<Rect>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub seed: u64,
    pub kind: Option<String>,
    pub eps: Vec<f64>,
    pub cells: Vec<usize>,
    pub t_end: Option<f64>,
    pub ode_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub order: Option<f64>,
    pub w0: Option<[f64; 2]>,
    pub z_range: Option<[f64; 2]>,
    pub u_range: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub dry_run: bool,
}

impl RunConfig {
    fn new(command: CommandName, ids: Vec<String>, c: Common) -> Result<Self> {
        Ok(RunConfig {
            command,
            ids,
            params: ParamOverrides { n: c.n, c: c.c, lambda: c.lambda },
            constants: BTreeMap::new(),
            region: c.region.as_deref().map(parse_region).transpose()?,
            tolerance: c.tol,
            samples: c.samples,
            grid: None,
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            kind: None,
            eps: Vec::new(),
            cells: Vec::new(),
            t_end: None,
            ode_tol: None,
            quad_tol: None,
            order: None,
            w0: None,
            z_range: None,
            u_range: None,
            out: c.out,
            csv: c.csv,
            dry_run: c.dry_run,
        })
    }

    /// Parses an argument vector (program name first).
    pub fn from_args<I, T>(argv: I) -> std::result::Result<Self, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
        Self::from_cmd(cli.command).map_err(CliError::Config)
    }

    fn from_cmd(cmd: Cmd) -> Result<Self> {
        let cfg = match cmd {
            Cmd::ListCatalog { kind, common } => {
                let mut c = Self::new(CommandName::ListCatalog, vec![], common)?;
                c.kind = kind;
                c
            }
            Cmd::VerifySolution { id, grid, constants, common } => {
                let mut c = Self::new(CommandName::VerifySolution, vec![id], common)?;
                c.grid = grid;
                c.constants = parse_constants(&constants)?;
                c
            }
            Cmd::CheckSymmetry { generator, id, eps, grid, common } => {
                let mut c = Self::new(CommandName::CheckSymmetry, vec![generator, id], common)?;
                c.eps = eps.as_deref().map(parse_list).transpose()?.unwrap_or_default();
                c.grid = grid;
                c
            }
            Cmd::CheckDetermining { generator, u_range, common } => {
                let mut c = Self::new(CommandName::CheckDetermining, vec![generator], common)?;
                c.u_range = u_range.as_deref().map(parse_pair).transpose()?;
                c
            }
            Cmd::CheckPotential { id, quad_tol, grid, common } => {
                let mut c = Self::new(CommandName::CheckPotential, vec![id], common)?;
                c.quad_tol = quad_tol;
                c.grid = grid;
                c
            }
            Cmd::Reduce { id, constants, w0, ode_tol, common } => {
                let mut c = Self::new(CommandName::Reduce, vec![id], common)?;
                c.constants = parse_constants(&constants)?;
                c.w0 = w0.as_deref().map(parse_pair).transpose()?;
                c.ode_tol = ode_tol;
                c
            }
            Cmd::CheckFirstIntegral { integral, constants, z_range, w0, ode_tol, common } => {
                let mut c = Self::new(CommandName::CheckFirstIntegral, vec![integral], common)?;
                c.constants = parse_constants(&constants)?;
                c.z_range = z_range.as_deref().map(parse_pair).transpose()?;
                c.w0 = w0.as_deref().map(parse_pair).transpose()?;
                c.ode_tol = ode_tol;
                c
            }
            Cmd::CrossValidate { id, cells, t_end, ode_tol, order, common } => {
                let mut c = Self::new(CommandName::CrossValidate, vec![id], common)?;
                if let Some(s) = cells {
                    c.cells = s
                        .split(',')
                        .map(|v| v.trim().parse().map_err(|_| Error::InvalidParams(format!("bad cell count `{v}`"))))
                        .collect::<Result<_>>()?;
                }
                c.t_end = t_end;
                c.ode_tol = ode_tol;
                c.order = order;
                c
            }
            Cmd::CheckConservation { id, constants, common } => {
                let mut c = Self::new(CommandName::CheckConservation, vec![id], common)?;
                c.constants = parse_constants(&constants)?;
                c
            }
        };
        Ok(cfg)
    }

    fn id(&self, i: usize) -> &str {
        self.ids.get(i).map(String::as_str).unwrap_or_default()
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidParams(format!("cannot parse `{v}` as a number"))))
        .collect()
}

fn parse_pair(s: &str) -> Result<[f64; 2]> {
    match parse_list(s)?.as_slice() {
        &[a, b] => Ok([a, b]),
        _ => Err(Error::InvalidParams(format!("expected two comma-separated numbers, got `{s}`"))),
    }
}

fn parse_region(s: &str) -> Result<Rect> {
    match parse_list(s)?.as_slice() {
        &[x0, x1, t0, t1] if x0 <= x1 && t0 <= t1 => Ok(Rect::new(x0, x1, t0, t1)),
        _ => Err(Error::InvalidParams(format!("region `{s}` must be x0,x1,t0,t1 with x0<=x1 and t0<=t1"))),
    }
}

fn parse_constants(items: &[String]) -> Result<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("constant `{kv}` is not name=value")))?;
            let v = v.trim().parse::<f64>().map_err(|_| Error::InvalidParams(format!("bad value in `{kv}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Why a run stopped before producing a report.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Config(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "configuration error: {e}"),
        }
    }
}

/// The JSON report written by every checking command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub subject: String,
    pub command: String,
    pub params: Option<PdeParams>,
    pub tolerance: f64,
    pub max_residual: f64,
    pub argmax: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub pass: bool,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl Report {
    fn from_verification(cfg: &RunConfig, params: &PdeParams, r: VerificationReport) -> Self {
        Report {
            subject: r.subject,
            command: cfg.command.to_string(),
            params: Some(*params),
            tolerance: r.tolerance,
            max_residual: r.max_residual,
            argmax: r.argmax,
            seed: r.seed,
            pass: r.pass,
            version: VERSION,
            details: None,
        }
    }

    fn with_details(mut self, d: impl Serialize) -> Self {
        self.details = Some(serde_json::to_value(d).expect("details serialize"));
        self
    }

    pub fn to_json(&self) -> String {
        to_json_full_precision(self)
    }
}

/// Pretty printing with every float written to 17 significant digits.
struct FullPrecision(PrettyFormatter<'static>);

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` with [`FullPrecision`] floats.
pub fn to_json_full_precision<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// A field under test with the parameters it is checked against.
struct Subject {
    params: PdeParams,
    field: Arc<dyn ScalarField>,
    region: Rect,
    instance: Option<SolutionInstance>,
}

fn resolve_subject(cfg: &RunConfig, id: &str) -> Result<Subject> {
    if let Some(src) = id.strip_prefix("ansatz:") {
        let src = src.strip_prefix("u=").unwrap_or(src);
        let params = cfg.params.require("an ansatz")?;
        let region = cfg.region.unwrap_or(DEFAULT_REGION);
        region.validate(&params)?;
        let field = ExprField::parse(src, region)?;
        return Ok(Subject { params, field: Arc::new(field), region, instance: None });
    }
    let cat = Catalog::shared();
    let base = cat.solution_instance(id)?;
    let inst = if cfg.params.is_empty() && cfg.constants.is_empty() && cfg.region.is_none() {
        base
    } else {
        let params = cfg.params.apply(base.params)?;
        let mut constants = base.constants.clone();
        for (k, v) in &cfg.constants {
            constants.set(k, *v);
        }
        let mut inst = cat.solution(id)?.instance_with(params, constants, cfg.region.unwrap_or(base.domain))?;
        inst.id = base.id;
        inst
    };
    Ok(Subject { params: inst.params, field: Arc::new(inst.clone()), region: inst.domain, instance: Some(inst) })
}

fn generator(id: &str) -> Result<&'static GeneratorSpec> {
    Catalog::shared().generator(id)
}

/// Validated work for one command. Building it performs no heavy computation
/// beyond what the catalog needs on first use.
enum Plan {
    List(EntryFilter),
    Verify { subject: Subject, grid: usize },
    Symmetry { gen: &'static GeneratorSpec, subject: Subject, eps: Vec<f64>, grid: usize },
    Determining { gen: &'static GeneratorSpec, params: PdeParams, region: Rect, u_range: [f64; 2] },
    Potential { subject: Subject, quad_tol: f64, grid: usize },
    Reduce { red: Reduction, region: Rect, w0: [f64; 2], ode_tol: f64 },
    FirstIntegral { integral: FirstIntegral, red: Reduction, z: [f64; 2], w0: [f64; 2], ode_tol: f64 },
    CrossValidate { subject: Subject, cells: Vec<usize>, t_end: f64, ode_tol: f64, order: f64 },
    Conservation { subject: Subject },
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(Error::InvalidParams(format!("{name} must be positive, got {v}"))),
        _ => Ok(()),
    }
}

/// Default first-integral runs, each inside the parameter case the integral needs.
fn first_integral_setup(fi: FirstIntegral) -> Result<(Reduction, [f64; 2], [f64; 2])> {
    let (params, a, z, w0) = match fi {
        FirstIntegral::Row1Y => (PdeParams::from_parts(2, 1, 0.5, 0.5)?, -2.0, [1.0, 3.0], [1.0, 0.5]),
        FirstIntegral::Row2H | FirstIntegral::Row2Y => {
            (PdeParams::from_parts(3, 1, -2.0, 0.25)?, 0.5, [1.0, 2.0], [1.0, 0.1])
        }
    };
    let id = if fi == FirstIntegral::Row1Y { "row1" } else { "row2" };
    let red = reduction::spec(id)?.instance(params, Constants::new(&[("a", a)]))?;
    let w0 = if fi == FirstIntegral::Row2Y { [w0[0], level_zero_slope(&red, z[0], w0[0])?] } else { w0 };
    Ok((red, z, w0))
}

/// `h'` putting `(z, h, h')` on the level set `F = 0` of the row-2 `h` integral,
/// the only level on which the `y`-form integral is conserved. `F` is affine in `h'`.
fn level_zero_slope(red: &Reduction, z: f64, h: f64) -> Result<f64> {
    let f0 = FirstIntegral::Row2H.eval(red, z, h, 0.0)?;
    let f1 = FirstIntegral::Row2H.eval(red, z, h, 1.0)?;
    Ok(-f0 / (f1 - f0))
}

fn prepare(cfg: &RunConfig) -> Result<Plan> {
    positive("tolerance", cfg.tolerance)?;
    positive("ode tolerance", cfg.ode_tol)?;
    positive("quadrature tolerance", cfg.quad_tol)?;
    if cfg.samples == Some(0) {
        return Err(Error::InvalidParams("at least one sample is required".into()));
    }
    if matches!(cfg.grid, Some(g) if g < 2) {
        return Err(Error::InvalidParams("grids need at least 2 points per axis".into()));
    }
    let plan = match cfg.command {
        CommandName::ListCatalog => {
            let kind = cfg.kind.as_deref().map(EntryKind::from_str).transpose()?;
            let n = cfg.params.n.as_deref().map(parse_rational).transpose()?;
            Plan::List(EntryFilter { kind, params: ParamFilter { n, c: cfg.params.c } })
        }
        CommandName::VerifySolution => Plan::Verify {
            subject: resolve_subject(cfg, cfg.id(0))?,
            grid: cfg.grid.unwrap_or(crate::catalog::ORACLE_GRID),
        },
        CommandName::CheckSymmetry => {
            let gen = generator(cfg.id(0))?;
            if !gen.has_flow() {
                return Err(Error::FlowUnavailable(gen.id.to_string()));
            }
            let subject = resolve_subject(cfg, cfg.id(1))?;
            let v = gen.violations(&subject.params);
            if !v.is_empty() {
                return Err(Error::InvalidParams(format!("{}: {}", gen.id, v.join("; "))));
            }
            let eps = if cfg.eps.is_empty() { vec![-0.5, -0.1, 0.1, 0.5] } else { cfg.eps.clone() };
            Plan::Symmetry { gen, subject, eps, grid: cfg.grid.unwrap_or(20) }
        }
        CommandName::CheckDetermining => {
            let gen = generator(cfg.id(0))?;
            if gen.kind != GeneratorKind::Nonclassical {
                return Err(Error::InvalidParams(format!("{} is not a nonclassical generator", gen.id)));
            }
            let params = cfg.params.apply(gen.example_params)?;
            let v = gen.violations(&params);
            if !v.is_empty() {
                return Err(Error::InvalidParams(format!("{}: {}", gen.id, v.join("; "))));
            }
            let region = cfg.region.unwrap_or(DEFAULT_REGION);
            region.validate(&params)?;
            let u_range = cfg.u_range.unwrap_or([0.2, 2.0]);
            if !(u_range[0] > 0.0 && u_range[0] <= u_range[1]) {
                return Err(Error::InvalidParams("u range must be positive and ordered".into()));
            }
            Plan::Determining { gen, params, region, u_range }
        }
        CommandName::CheckPotential => Plan::Potential {
            subject: resolve_subject(cfg, cfg.id(0))?,
            quad_tol: cfg.quad_tol.unwrap_or(1e-10),
            grid: cfg.grid.unwrap_or(7),
        },
        CommandName::Reduce => {
            let spec = reduction::spec(cfg.id(0))?;
            let params = cfg.params.apply(spec.demo.params)?;
            let mut constants = spec.demo.constants.clone();
            for (k, v) in &cfg.constants {
                constants.set(k, *v);
            }
            let red = spec.instance(params, constants)?;
            let region = cfg.region.unwrap_or(spec.demo.region);
            region.validate(&params)?;
            let w0 = cfg.w0.unwrap_or([spec.demo.w0, spec.demo.w0_prime]);
            Plan::Reduce { red, region, w0, ode_tol: cfg.ode_tol.unwrap_or(1e-10) }
        }
        CommandName::CheckFirstIntegral => {
            let integral = FirstIntegral::from_id(cfg.id(0))?;
            let (base, z, w0) = first_integral_setup(integral)?;
            let params = cfg.params.apply(base.params)?;
            let mut constants = base.constants.clone();
            for (k, v) in &cfg.constants {
                constants.set(k, *v);
            }
            let red = reduction::spec(base.id)?.instance(params, constants)?;
            integral.applies_to(&red)?;
            Plan::FirstIntegral {
                integral,
                red,
                z: cfg.z_range.unwrap_or(z),
                w0: cfg.w0.unwrap_or(w0),
                ode_tol: cfg.ode_tol.unwrap_or(1e-10),
            }
        }
        CommandName::CrossValidate => {
            let subject = resolve_subject(cfg, cfg.id(0))?;
            let cells = if cfg.cells.is_empty() { vec![100, 200, 400] } else { cfg.cells.clone() };
            if cells.len() < 2 || cells.iter().any(|&c| c < 2) {
                return Err(Error::InvalidParams("need at least two cell counts, each >= 2".into()));
            }
            let t_end = cfg.t_end.unwrap_or(subject.region.t1);
            if !(t_end > subject.region.t0 && t_end <= subject.region.t1) {
                return Err(Error::InvalidParams(format!("t_end {t_end} outside the field's time range")));
            }
            Plan::CrossValidate {
                subject,
                cells,
                t_end,
                ode_tol: cfg.ode_tol.unwrap_or(1e-10),
                order: cfg.order.unwrap_or(2.0),
            }
        }
        CommandName::CheckConservation => Plan::Conservation { subject: resolve_subject(cfg, cfg.id(0))? },
    };
    Ok(plan)
}

/// What a finished command produced.
pub enum Output {
    /// Catalog listing (already JSON).
    Listing(String),
    Report { report: Report, csv: Option<String> },
}

impl Output {
    pub fn pass(&self) -> bool {
        match self {
            Output::Listing(_) => true,
            Output::Report { report, .. } => report.pass,
        }
    }
}

fn execute(cfg: &RunConfig, plan: Plan) -> Result<Output> {
    let seed = cfg.seed;
    let report = |params: &PdeParams, r: VerificationReport| Report::from_verification(cfg, params, r);
    let out = match plan {
        Plan::List(filter) => return Ok(Output::Listing(Catalog::shared().to_json(&filter))),
        Plan::Verify { subject, grid } => {
            let Subject { params, field, region, .. } = subject;
            let tol = cfg.tolerance.unwrap_or(crate::catalog::ORACLE_TOL);
            let scan = residual_scan(&params, field.as_ref(), &region, grid, grid, tol)?;
            let pts = sample_points(&region, cfg.samples_or(DEFAULT_SAMPLES), seed);
            let random = scan_points(&field.label(), &pts, tol, |p| pde_residual(&params, p[0], &field.eval(p[0], p[1])?))?
                .with_seed(seed);
            let r = VerificationReport::combine(field.label(), tol, &[scan, random]);
            Output::Report { report: report(&params, r), csv: None }
        }
        Plan::Symmetry { gen, subject, eps, grid } => {
            let tol = cfg.tolerance.unwrap_or(1e-8);
            let params = subject.params;
            let r = check_symmetry(&params, gen, subject.field.clone(), &eps, grid, tol)?;
            let mut g = rng(seed);
            let pts: Vec<[f64; 3]> = sample_points(&subject.region, cfg.samples_or(DEFAULT_SAMPLES), seed)
                .into_iter()
                .map(|p| [p[0], p[1], rand::Rng::gen_range(&mut g, 0.5..2.0)])
                .collect();
            let mut closure = 0.0f64;
            for &a in &eps {
                for &b in &eps {
                    closure = closure.max(flow_closure_defect(&params, gen, a, b, &pts)?);
                }
            }
            let details = serde_json::json!({ "eps": eps, "flow_closure": closure });
            Output::Report { report: report(&params, r.with_seed(seed)).with_details(details), csv: None }
        }
        Plan::Determining { gen, params, region, u_range } => {
            let tol = cfg.tolerance.unwrap_or(1e-9);
            let mut g = rng(seed ^ 0x5eed);
            let pts: Vec<Vec<f64>> = sample_points(&region, cfg.samples_or(DEFAULT_SAMPLES), seed)
                .into_iter()
                .map(|mut p| {
                    p.push(rand::Rng::gen_range(&mut g, u_range[0]..=u_range[1]));
                    p
                })
                .collect();
            let r = scan_points(gen.id, &pts, tol, |p| {
                let d = determining_for_generator(&params, gen, p[0], p[1], p[2])?;
                Ok(d.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            })?;
            Output::Report { report: report(&params, r.with_seed(seed)), csv: None }
        }
        Plan::Potential { subject, quad_tol, grid } => {
            let Subject { params, field, region, instance } = subject;
            let tol = cfg.tolerance.unwrap_or(10.0 * quad_tol);
            let pot = build_potential(&params, field, region.x0, region.t0, &region, quad_tol)?;
            let aux = check_auxiliary_system(&pot, grid, tol)?;
            let mut parts = vec![aux];
            let mut closed_form = None;
            if let Some(inst) = instance.as_ref().filter(|i| i.closed_form_potential(region.x0).is_some()) {
                let base = inst.closed_form_potential(region.x0).expect("checked above");
                let cf_tol = 1e-9;
                let r = scan_points(&format!("closed-form:{}", inst.id), &grid_points(&region, grid, grid), cf_tol, |p| {
                    let want = inst.closed_form_potential(p[0]).ok_or_else(|| Error::DomainViolation("x + lambda".into()))?;
                    Ok(pot.v(p[0], p[1])? - (want - base))
                })?;
                closed_form = Some(r.max_residual);
                parts.push(r);
            }
            let r = VerificationReport::combine(format!("potential:{}", pot.field.label()), tol, &parts);
            let details = serde_json::json!({
                "quad_tol": quad_tol,
                "auxiliary_max_residual": parts[0].max_residual,
                "closed_form_max_deviation": closed_form,
            });
            Output::Report { report: report(&params, r).with_details(details), csv: None }
        }
        Plan::Reduce { red, region, w0, ode_tol } => {
            let tol = cfg.tolerance.unwrap_or(1e-7);
            let field = reduce_over(&red, &region, w0[0], w0[1], ode_tol)?;
            let pts = sample_points(&region, cfg.samples_or(200), seed);
            let p = red.params;
            let r = scan_points(&field.label(), &pts, tol, |c| pde_residual(&p, c[0], &field.eval(c[0], c[1])?))?
                .with_seed(seed);
            let traj = &field.trajectory;
            let (z0, z1) = traj.z_interval();
            let stats = traj.stats();
            let details = serde_json::json!({
                "reduction": red.id,
                "constants": red.constants,
                "z_range": [z0, z1],
                "ode_tol": ode_tol,
                "accepted_steps": stats.accepted,
                "rejected_steps": stats.rejected,
            });
            Output::Report { report: report(&p, r).with_details(details), csv: Some(traj.to_csv()) }
        }
        Plan::FirstIntegral { integral, red, z, w0, ode_tol } => {
            let tol = cfg.tolerance.unwrap_or(100.0 * ode_tol);
            let traj = reduction::integrate_reduced(&red, z[0], w0[0], w0[1], z[1], ode_tol, reduction::SINGULARITY_MARGIN)?;
            let r = drift_report(integral, &traj, tol)?;
            let details = serde_json::json!({
                "formula": integral.formula(),
                "reduction": red.id,
                "constants": red.constants,
                "z_range": z,
                "ode_tol": ode_tol,
            });
            Output::Report { report: report(&red.params, r).with_details(details), csv: Some(traj.to_csv()) }
        }
        Plan::CrossValidate { subject, cells, t_end, ode_tol, order } => {
            let tol = cfg.tolerance.unwrap_or(0.2);
            let table = cross_validate(&subject.params, subject.field.as_ref(), &cells, t_end, ode_tol)?;
            let dev = table.order.map_or(f64::INFINITY, |o| (o - order).abs());
            let r = Report {
                subject: format!("cross-validate:{}", table.subject),
                command: cfg.command.to_string(),
                params: Some(subject.params),
                tolerance: tol,
                max_residual: dev,
                argmax: None,
                seed: None,
                pass: dev <= tol,
                version: VERSION,
                details: None,
            };
            let csv = table.to_csv();
            Output::Report { report: r.with_details(CrossValidateDetails { expected_order: order, table }), csv: Some(csv) }
        }
        Plan::Conservation { subject } => {
            let tol = cfg.tolerance.unwrap_or(1e-12);
            let Subject { params, field, region, .. } = subject;
            let pts = sample_points(&region, cfg.samples_or(DEFAULT_SAMPLES), seed);
            let r = scan_points(&format!("conservation:{}", field.label()), &pts, tol, |p| {
                conservation_identity_defect(&params, p[0], &field.eval(p[0], p[1])?)
            })?;
            Output::Report { report: report(&params, r.with_seed(seed)), csv: None }
        }
    };
    Ok(out)
}

#[derive(Serialize)]
struct CrossValidateDetails {
    expected_order: f64,
    table: ConvergenceTable,
}

/// `|D_x F − D_t G + (x+λ)·residual|` relative to the largest of the three terms.
pub fn conservation_identity_defect(params: &PdeParams, x: f64, jet: &crate::jet::Jet2) -> Result<f64> {
    let cons = conservation_residual_jet(params, x, jet)?;
    let xr = params.shift(x)? * pde_residual(params, x, jet)?;
    let dt_g = params.shift(x)? * jet.vt;
    let dx_f = cons + dt_g;
    let scale = dx_f.abs().max(dt_g.abs()).max(xr.abs());
    let d = (cons + xr).abs();
    Ok(if scale > 0.0 { d / scale } else { d })
}

fn drift_report(integral: FirstIntegral, traj: &OdeTrajectory, tol: f64) -> Result<VerificationReport> {
    let sol = &traj.solution;
    let red = &traj.reduction;
    let f0 = integral.eval(red, sol.z[0], sol.y[0][0], sol.y[0][1])?;
    let samples = sol
        .z
        .iter()
        .zip(&sol.y)
        .map(|(z, y)| Ok((vec![*z], integral.eval(red, *z, y[0], y[1])? - f0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::from_samples(format!("{}:{}", integral.id(), red.id), tol, samples))
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidParams(format!("cannot write {}: {e}", path.display())))
}

/// Runs `cfg`, writing reports to `out` and diagnostics to `err`; returns the exit code.
pub fn run_config(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let plan = match prepare(cfg) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "configuration error: {e}");
            return 2;
        }
    };
    if cfg.dry_run {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(cfg).expect("config serializes"));
        return 0;
    }
    let output = match execute(cfg, plan) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "{} failed: {e}", cfg.command);
            return 1;
        }
    };
    let pass = output.pass();
    let (text, csv) = match output {
        Output::Listing(s) => (s, None),
        Output::Report { report, csv } => (report.to_json(), csv),
    };
    let written = match &cfg.out {
        Some(p) => write_file(p, &(text + "\n")),
        None => writeln!(out, "{text}").map_err(|e| Error::InvalidParams(e.to_string())),
    };
    let written = written.and_then(|_| match (&cfg.csv, csv) {
        (Some(p), Some(c)) => write_file(p, &c),
        (Some(_), None) => {
            let _ = writeln!(err, "note: {} produces no CSV data", cfg.command);
            Ok(())
        }
        _ => Ok(()),
    });
    if let Err(e) = written {
        let _ = writeln!(err, "{e}");
        return 2;
    }
    if !pass {
        let _ = writeln!(err, "{}: check failed", cfg.command);
    }
    i32::from(!pass)
}

/// Parses `argv` and runs it with the given sinks.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunConfig::from_args(argv) {
        Ok(cfg) => run_config(&cfg, out, err),
        Err(CliError::Usage(e)) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            code
        }
        Err(e @ CliError::Config(_)) => {
            let _ = writeln!(err, "{e}");
            2
        }
    }
}

/// Entry point of the `simred` binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
