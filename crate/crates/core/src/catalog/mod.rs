//! Catalog of generators and exact solutions.

pub mod constraint;
pub mod generators;
pub mod hlib;
pub mod solutions;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

pub use constraint::{Constants, Constraint, ParamFilter};
pub use generators::{Generator, GeneratorKind, GeneratorSpec, Infinitesimals};
pub use hlib::{Branch, HFamily};
pub use solutions::{Preset, SolutionFamily, SolutionInstance, SolutionSpec};

use crate::error::{Error, Result};
use crate::params::PdeParams;
use crate::pde::Rect;
use crate::verify::residual_scan;

/// Grid and tolerance of the residual oracle run when the catalog is built.
pub const ORACLE_GRID: usize = 50;
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Point,
    Potential,
    Nonclassical,
    Solution,
}

impl From<GeneratorKind> for EntryKind {
    fn from(k: GeneratorKind) -> Self {
        match k {
            GeneratorKind::Point => EntryKind::Point,
            GeneratorKind::Potential => EntryKind::Potential,
            GeneratorKind::Nonclassical => EntryKind::Nonclassical,
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::Point => "point",
            EntryKind::Potential => "potential",
            EntryKind::Nonclassical => "nonclassical",
            EntryKind::Solution => "solution",
        })
    }
}

impl FromStr for EntryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(EntryKind::Point),
            "potential" => Ok(EntryKind::Potential),
            "nonclassical" => Ok(EntryKind::Nonclassical),
            "solution" => Ok(EntryKind::Solution),
            _ => Err(Error::InvalidParams(format!(
                "unknown kind `{s}` (point, potential, nonclassical, solution)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Entry<'a> {
    Generator(&'a GeneratorSpec),
    Solution(&'a SolutionSpec),
}

impl Entry<'_> {
    pub fn id(&self) -> &'static str {
        match self {
            Entry::Generator(g) => g.id,
            Entry::Solution(s) => s.id,
        }
    }

    pub fn kind(&self) -> EntryKind {
        match self {
            Entry::Generator(g) => g.kind.into(),
            Entry::Solution(_) => EntryKind::Solution,
        }
    }

    pub fn constraints(&self) -> &[Constraint] {
        match self {
            Entry::Generator(g) => &g.constraints,
            Entry::Solution(s) => &s.constraints,
        }
    }

    pub fn admits(&self, f: &ParamFilter) -> bool {
        self.constraints().iter().all(|c| c.admits(f))
    }
}

/// Conjunctive filter for [`Catalog::list_entries`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EntryFilter {
    pub kind: Option<EntryKind>,
    pub params: ParamFilter,
}

/// One row of the JSON export.
#[derive(Debug, Clone, Serialize)]
pub struct EntryRecord {
    pub id: &'static str,
    pub kind: EntryKind,
    pub provenance: &'static str,
    pub constraints: Vec<String>,
    pub form: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_form: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Rect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub presets: Option<Vec<&'static str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified_against_pde: Option<bool>,
}

impl From<Entry<'_>> for EntryRecord {
    fn from(e: Entry<'_>) -> Self {
        let constraints = e.constraints().iter().map(|c| c.to_string()).collect();
        match e {
            Entry::Generator(g) => EntryRecord {
                id: g.id,
                kind: g.kind.into(),
                provenance: g.provenance,
                constraints,
                form: g.description,
                printed_form: None,
                domain: None,
                presets: None,
                verified_against_pde: None,
            },
            Entry::Solution(s) => EntryRecord {
                id: s.id,
                kind: EntryKind::Solution,
                provenance: s.provenance,
                constraints,
                form: s.form,
                printed_form: s.printed_form,
                domain: Some(s.default_preset().domain),
                presets: Some(s.presets.iter().map(|p| p.name).collect()),
                verified_against_pde: Some(s.verified_against_pde),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Catalog {
    generators: Vec<GeneratorSpec>,
    solutions: Vec<SolutionSpec>,
}

impl Catalog {
    /// Transcribed entries, with `verified_against_pde` still unset.
    pub fn unverified() -> Self {
        Catalog { generators: generators::builtin(), solutions: solutions::builtin() }
    }

    /// Builds the catalog and runs the residual oracle over every solution preset.
    pub fn build() -> Self {
        let mut cat = Self::unverified();
        for s in &mut cat.solutions {
            s.verified_against_pde = s.presets.iter().all(|p| {
                let Ok(inst) = s.instance(Some(p.name)) else { return false };
                residual_scan(&p.params, &inst, &p.domain, ORACLE_GRID, ORACLE_GRID, ORACLE_TOL)
                    .map(|r| r.pass)
                    .unwrap_or(false)
            });
        }
        cat
    }

    /// Process-wide verified catalog, built on first use.
    pub fn shared() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(Catalog::build)
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.generators
    }

    pub fn solutions(&self) -> &[SolutionSpec] {
        &self.solutions
    }

    pub fn len(&self) -> usize {
        self.generators.len() + self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries matching `filter`, ordered by id.
    pub fn list_entries(&self, filter: &EntryFilter) -> Vec<Entry<'_>> {
        let mut out: Vec<Entry<'_>> = self
            .generators
            .iter()
            .map(Entry::Generator)
            .chain(self.solutions.iter().map(Entry::Solution))
            .filter(|e| filter.kind.is_none_or(|k| e.kind() == k))
            .filter(|e| e.admits(&filter.params))
            .collect();
        out.sort_by_key(|e| e.id());
        out
    }

    pub fn entry(&self, id: &str) -> Result<Entry<'_>> {
        if let Ok(g) = self.generator(id) {
            return Ok(Entry::Generator(g));
        }
        self.solution(id).map(Entry::Solution)
    }

    pub fn generator(&self, id: &str) -> Result<&GeneratorSpec> {
        self.generators
            .iter()
            .find(|g| g.id == id)
            .ok_or_else(|| Error::UnknownEntry(id.to_string()))
    }

    pub fn solution(&self, id: &str) -> Result<&SolutionSpec> {
        let base = id.split('@').next().unwrap_or(id);
        self.solutions
            .iter()
            .find(|s| s.id == base)
            .ok_or_else(|| Error::UnknownEntry(id.to_string()))
    }

    /// Resolves `id` or `id@preset` to an instance.
    pub fn solution_instance(&self, id: &str) -> Result<SolutionInstance> {
        let spec = self.solution(id)?;
        let preset = id.split_once('@').map(|(_, p)| p);
        let mut inst = spec.instance(preset)?;
        if let Some(p) = preset {
            inst.id = format!("{}@{p}", spec.id);
        }
        Ok(inst)
    }

    /// Constraint violations of entry `id` at `params`; empty means admissible.
    pub fn validate_entry(&self, id: &str, params: &PdeParams) -> Result<Vec<String>> {
        let e = self.entry(id)?;
        Ok(e.constraints().iter().filter_map(|c| c.violation(params)).collect())
    }

    pub fn records(&self, filter: &EntryFilter) -> Vec<EntryRecord> {
        self.list_entries(filter).into_iter().map(EntryRecord::from).collect()
    }

    pub fn to_json(&self, filter: &EntryFilter) -> String {
        serde_json::to_string_pretty(&self.records(filter)).expect("catalog records serialize")
    }
}
