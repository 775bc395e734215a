//! End-to-end runs. Each scenario turns a validated [`Settings`] into a
//! [`Report`]; writing files is left to [`Report::write`].

mod audit;
mod construction;
mod tools;

pub use audit::run_inequality_audit;
pub use construction::{run_construction_i, run_construction_ii};
pub use tools::{run_cantor, run_hamilton_sweep, run_moments, run_solve};

use std::path::{Path, PathBuf};

use blab_core::beltrami::{deform, teichmuller_form, BeltramiField, Disk, QuadraticDifferential, SupportMask};
use blab_core::cantor::{cantor_stage, RadialCantorSet, Scheme, MAX_STAGE};
use blab_core::inequalities::{InequalityReport, Verdict};
use blab_core::solver::{SolverConfig, Support};
use num_complex::Complex64;
use num_rational::BigRational;

use crate::config::Config;
use crate::error::{BlabError, Result};
use crate::json::{Obj, J};
use crate::output;

fn positive_below_one(x: &BigRational) -> bool {
    *x > BigRational::from_integer(0.into()) && *x < BigRational::from_integer(1.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Cantor,
    Sector,
    Annulus,
    Disk,
    Empty,
}

/// How φ of the Teichmüller form is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiChoice {
    pub label: String,
    pub phi: QuadraticDifferential,
}

pub fn parse_phi(s: &str) -> Result<PhiChoice> {
    let s = s.trim();
    let bad = || BlabError::Config(format!("scenario.phi = `{s}`: expected boundary-singular, monomial:N, boundary-power:S or kernel:x,a,b,c"));
    let phi = if s == "boundary-singular" {
        QuadraticDifferential::BoundarySingular
    } else if let Some(n) = s.strip_prefix("monomial:") {
        QuadraticDifferential::monomial(n.trim().parse().map_err(|_| bad())?)
    } else if let Some(v) = s.strip_prefix("boundary-power:") {
        QuadraticDifferential::boundary_power(v.trim().parse().map_err(|_| bad())?).map_err(|_| bad())?
    } else if let Some(v) = s.strip_prefix("kernel:") {
        let p: Vec<f64> = v
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if p.len() != 4 {
            return Err(bad());
        }
        QuadraticDifferential::kernel(p[0], p[1], p[2], p[3]).map_err(|_| bad())?
    } else {
        return Err(bad());
    };
    Ok(PhiChoice {
        label: s.to_string(),
        phi,
    })
}

/// Typed, validated view of a [`Config`].
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: Config,
    pub name: String,
    pub seed: u64,
    pub k: f64,
    pub phi: PhiChoice,
    pub scheme: Scheme,
    pub stage: u32,
    pub lambda: BigRational,
    pub kappa: f64,
    pub set_kind: SetKind,
    pub sector: [f64; 4],
    pub disk: Disk,
    pub ms: Vec<u32>,
    pub ts: Vec<f64>,
    pub pairs: usize,
    pub phis: usize,
    pub degree: usize,
    pub moments: u32,
    pub xs: Vec<f64>,
    pub family_x: Vec<f64>,
    pub rho: f64,
    pub disks: usize,
    pub disk_radius: f64,
    pub samples: usize,
    pub iterations: usize,
    pub starts: usize,
    pub local_degree: usize,
    pub solver_enabled: bool,
    pub solver: SolverConfig,
    pub solver_mu: String,
    pub image_samples: usize,
    pub out_dir: PathBuf,
    pub csv: bool,
    pub grid: bool,
}

fn cfg_err(msg: String) -> BlabError {
    BlabError::Config(msg)
}

impl Settings {
    pub fn from_config(config: &Config) -> Result<Self> {
        let c = config;
        let k = c.f64("scenario", "k")?;
        if !(k > 0.0 && k < 1.0) {
            return Err(cfg_err(format!("scenario.k = {k} must lie in (0, 1)")));
        }
        let stage = c.u64("cantor", "stage")?;
        if stage > MAX_STAGE as u64 {
            return Err(cfg_err(format!("cantor.stage = {stage} exceeds {MAX_STAGE}")));
        }
        let lambda = c.rational("cantor", "lambda")?;
        if !positive_below_one(&lambda) {
            return Err(cfg_err(format!("cantor.lambda = {lambda} must lie in (0, 1)")));
        }
        let kappa = c.f64("field", "kappa")?;
        if !(0.0..1.0).contains(&kappa) {
            return Err(cfg_err(format!("field.kappa = {kappa} must lie in [0, 1)")));
        }
        let set_kind = match c.str("field", "set") {
            "cantor" => SetKind::Cantor,
            "sector" => SetKind::Sector,
            "annulus" => SetKind::Annulus,
            "disk" => SetKind::Disk,
            "empty" => SetKind::Empty,
            other => return Err(cfg_err(format!("field.set = `{other}`: expected cantor, sector, annulus, disk or empty"))),
        };
        let sv = c.f64_list("field", "sector")?;
        if sv.len() != 4 || !(0.0 <= sv[0] && sv[0] < sv[1] && sv[1] < 1.0 && sv[2] < sv[3]) {
            return Err(cfg_err(format!("field.sector = `{}`: expected inner < outer < 1 and start < end", c.str("field", "sector"))));
        }
        let dv = c.f64_list("field", "disk")?;
        let disk = match dv.as_slice() {
            [x, y, r] if *r > 0.0 => Disk::new(Complex64::new(*x, *y), *r),
            _ => return Err(cfg_err(format!("field.disk = `{}`: expected re, im, radius", c.str("field", "disk")))),
        };
        if !disk.compactly_inside() {
            return Err(cfg_err("field.disk must lie inside the open unit disk".into()));
        }
        let ms = c.u32_list("field", "m")?;
        if ms.is_empty() || ms.contains(&0) {
            return Err(cfg_err("field.m must be a nonempty list of positive integers".into()));
        }
        let ts = c.f64_list("field", "t")?;
        let phis = c.usize("battery", "phis")?;
        if !(1..=PHI_BATTERY_SIZE).contains(&phis) {
            return Err(cfg_err(format!("battery.phis = {phis} must lie in 1..={PHI_BATTERY_SIZE}")));
        }
        let pairs = c.usize("battery", "pairs")?;
        if pairs == 0 {
            return Err(cfg_err("battery.pairs must be positive".into()));
        }
        let xs = c.f64_list("battery", "x")?;
        let family_x = c.f64_list("battery", "family_x")?;
        for (key, list) in [("x", &xs), ("family_x", &family_x)] {
            if list.is_empty() || list.iter().any(|x| !(0.0..1.0).contains(x)) {
                return Err(cfg_err(format!("battery.{key} must be a nonempty list in [0, 1)")));
            }
        }
        let rho = c.f64("battery", "rho")?;
        if !(rho > 0.0 && rho < 1.0) {
            return Err(cfg_err(format!("battery.rho = {rho} must lie in (0, 1)")));
        }
        let disk_radius = c.f64("battery", "disk_radius")?;
        if !(disk_radius > 0.0 && disk_radius < 0.5) {
            return Err(cfg_err(format!("battery.disk_radius = {disk_radius} must lie in (0, 0.5)")));
        }
        let samples = c.usize("battery", "samples")?;
        if samples < 1000 {
            return Err(cfg_err(format!("battery.samples = {samples} is below 1000")));
        }
        let iterations = c.usize("battery", "iterations")?;
        if iterations < 100 {
            return Err(cfg_err(format!("battery.iterations = {iterations} is below 100")));
        }
        let support = match c.str("solver", "support") {
            "disk" => Support::Disk,
            "square" => Support::Square,
            other => return Err(cfg_err(format!("solver.support = `{other}`: expected disk or square"))),
        };
        let n = c.usize("solver", "n")?;
        if n < 2 || !n.is_power_of_two() {
            return Err(cfg_err(format!("solver.n = {n} is not a power of two")));
        }
        let half_width = c.f64("solver", "half_width")?;
        if half_width < 1.0 {
            return Err(cfg_err(format!("solver.half_width = {half_width} is below 1")));
        }
        let padding = c.usize("solver", "padding")?;
        if padding == 0 || !padding.is_power_of_two() {
            return Err(cfg_err(format!("solver.padding = {padding} is not a power of two")));
        }
        let solver = SolverConfig {
            n,
            half_width,
            padding,
            tol: c.f64("solver", "tol")?,
            max_iter: c.usize("solver", "max_iter")?,
            support,
        };
        Ok(Self {
            config: c.clone(),
            name: c.str("scenario", "name").to_string(),
            seed: c.u64("scenario", "seed")?,
            k,
            phi: parse_phi(c.str("scenario", "phi"))?,
            scheme: c.scheme()?,
            stage: stage as u32,
            lambda,
            kappa,
            set_kind,
            sector: [sv[0], sv[1], sv[2], sv[3]],
            disk,
            ms,
            ts,
            pairs,
            phis,
            degree: c.usize("battery", "degree")?,
            moments: c.u64("battery", "moments")? as u32,
            xs,
            family_x,
            rho,
            disks: c.usize("battery", "disks")?,
            disk_radius,
            samples,
            iterations,
            starts: c.usize("battery", "starts")?,
            local_degree: c.usize("battery", "local_degree")?,
            solver_enabled: c.bool("solver", "enabled")?,
            solver,
            solver_mu: c.str("solver", "mu").to_string(),
            image_samples: c.usize("solver", "image_samples")?,
            out_dir: PathBuf::from(c.str("output", "dir")),
            csv: c.bool("output", "csv")?,
            grid: c.bool("output", "grid")?,
        })
    }

    pub fn radial_set(&self) -> Result<RadialCantorSet> {
        Ok(RadialCantorSet::new(cantor_stage(self.stage, self.scheme)?, self.lambda.clone())?)
    }

    pub fn mask(&self) -> Result<SupportMask> {
        let [inner, outer, start, end] = self.sector;
        Ok(match self.set_kind {
            SetKind::Cantor => SupportMask::Radial(self.radial_set()?),
            SetKind::Sector => SupportMask::Sector {
                inner,
                outer,
                start,
                end,
            },
            SetKind::Annulus => SupportMask::Annulus { inner, outer },
            SetKind::Disk => SupportMask::Disk(self.disk),
            SetKind::Empty => SupportMask::Empty,
        })
    }

    pub fn eta(&self) -> Result<BeltramiField> {
        Ok(teichmuller_form(self.k, self.phi.phi.clone())?)
    }

    /// μ = κη on E, η elsewhere.
    pub fn mu(&self) -> Result<BeltramiField> {
        Ok(deform(self.eta()?, self.kappa, self.mask()?)?)
    }
}

pub const PHI_BATTERY_SIZE: usize = 10;

/// Bounded holomorphic test forms, in a fixed order.
pub fn phi_battery(count: usize) -> Vec<(String, QuadraticDifferential)> {
    let c = |re: f64| Complex64::new(re, 0.0);
    let mut all: Vec<(String, QuadraticDifferential)> = [0usize, 1, 2, 3, 4, 5, 7]
        .iter()
        .map(|&n| (format!("z^{n}"), QuadraticDifferential::monomial(n)))
        .collect();
    all.push(("1+2z^2".into(), QuadraticDifferential::polynomial(vec![c(1.0), c(0.0), c(2.0)])));
    all.push((
        "(1+z)^3".into(),
        QuadraticDifferential::polynomial(vec![c(1.0), c(3.0), c(3.0), c(1.0)]),
    ));
    all.push((
        "kernel(x=0.5,a=2,b=4,c=0)".into(),
        QuadraticDifferential::kernel(0.5, 2.0, 4.0, 0.0).expect("valid kernel"),
    ));
    all.truncate(count);
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    HoldsWithinError,
    Violated,
    /// Reported numbers that are not a pass/fail claim.
    Evidence,
    /// A check whose precondition is not met by the inputs.
    NotApplicable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::HoldsWithinError => "holds-within-error",
            Status::Violated => "violated",
            Status::Evidence => "evidence",
            Status::NotApplicable => "not-applicable",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Holds
        } else {
            Status::Violated
        }
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Holds => Status::Holds,
            Verdict::HoldsWithinError => Status::HoldsWithinError,
            Verdict::Violated => Status::Violated,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    /// Identifier of the claim the check bears on.
    pub claim: &'static str,
    pub status: Status,
    pub data: Obj,
}

impl Check {
    pub fn new(id: impl Into<String>, claim: &'static str, status: Status, data: Obj) -> Self {
        Self {
            id: id.into(),
            claim,
            status,
            data,
        }
    }

    pub fn inequality(id: impl Into<String>, claim: &'static str, r: &InequalityReport, extra: Obj) -> Self {
        let mut data = Obj::new()
            .with("check", r.check)
            .with("phi_id", r.phi_id.as_str())
            .with("lhs", r.lhs)
            .with("rhs", r.rhs)
            .with("slack", r.slack)
            .with("budget", r.budget)
            .with("verdict", r.verdict.as_str());
        if let J::Obj(fields) = J::from(extra) {
            for (k, v) in fields {
                data.push(&k, v);
            }
        }
        Self::new(id, claim, r.verdict.into(), data)
    }

    fn to_json(&self) -> J {
        let mut o = Obj::new()
            .with("id", self.id.as_str())
            .with("claim", self.claim)
            .with("status", self.status.as_str());
        if let J::Obj(fields) = J::from(self.data.clone()) {
            for (k, v) in fields {
                o.push(&k, v);
            }
        }
        o.into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: &'static str,
    pub seed: u64,
    pub config: Config,
    pub checks: Vec<Check>,
    /// Statements taken as given; never turned into verdicts.
    pub assumed: Vec<&'static str>,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
    pub grids: Vec<(String, blab_core::solver::GridField)>,
    /// Human-readable lines for the terminal.
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(scenario: &'static str, settings: &Settings) -> Self {
        Self {
            scenario,
            seed: settings.seed,
            config: settings.config.clone(),
            checks: Vec::new(),
            assumed: Vec::new(),
            notes: Vec::new(),
            tables: Vec::new(),
            grids: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    pub fn violations(&self) -> usize {
        self.count(Status::Violated)
    }

    pub fn overall(&self) -> &'static str {
        if self.violations() == 0 {
            "no violations"
        } else {
            "violations found"
        }
    }

    pub fn to_json(&self) -> J {
        let mut cfg = Obj::new();
        for sec in crate::config::SECTIONS.iter().filter(|s| **s != "output") {
            let mut o = Obj::new();
            for (s, k, v) in self.config.entries() {
                if s == *sec {
                    o.push(k, v);
                }
            }
            cfg.push(sec, o);
        }
        let summary = Obj::new()
            .with("checks", self.checks.len())
            .with("holds", self.count(Status::Holds))
            .with("holds_within_error", self.count(Status::HoldsWithinError))
            .with("violated", self.violations())
            .with("evidence", self.count(Status::Evidence))
            .with("not_applicable", self.count(Status::NotApplicable))
            .with("overall", self.overall());
        Obj::new()
            .with("scenario", self.scenario)
            .with("seed", self.seed)
            .with("summary", summary)
            .with("config", cfg)
            .with("checks", J::Arr(self.checks.iter().map(Check::to_json).collect()))
            .with("assumed", self.assumed.clone())
            .with("notes", self.notes.clone())
            .with(
                "tables",
                self.tables.iter().map(|t| self.table_file(t)).collect::<Vec<_>>(),
            )
            .into()
    }

    fn table_file(&self, t: &Table) -> String {
        format!("{}-{}.csv", self.scenario, t.name)
    }

    pub fn json_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.scenario))
    }

    /// Writes the JSON report and, when enabled, the CSV tables and binary
    /// grids. Returns the written paths.
    pub fn write(&self, dir: &Path, csv: bool, grids: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let path = self.json_path(dir);
        std::fs::write(&path, crate::json::to_string(&self.to_json()))?;
        out.push(path);
        if csv {
            for t in &self.tables {
                let p = dir.join(self.table_file(t));
                output::write_table(&p, &t.header, &t.rows)?;
                out.push(p);
            }
        }
        if grids {
            for (name, g) in &self.grids {
                let p = dir.join(format!("{}-{name}.grid", self.scenario));
                output::write_grid_binary(&p, g)?;
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Claim identifiers used in reports.
pub mod claims {
    pub const CANTOR_MEASURE: &str = "cantor-measure";
    pub const CANTOR_LISTS: &str = "cantor-stage-lists";
    pub const RING_TILING: &str = "ring-system-tiles-radii";
    pub const MOMENTS: &str = "perturbation-moments-vanish";
    pub const CERTIFICATE: &str = "perturbation-infinitesimally-trivial";
    pub const INF_MAIN: &str = "infinitesimal-main-inequality";
    pub const LEMMA_INF: &str = "infinitesimal-lemma-bound";
    pub const MAIN: &str = "main-inequality";
    pub const LEMMA_GLOBAL: &str = "global-lemma-bound";
    pub const CONSTANTS: &str = "lemma-constants";
    pub const MODULUS_IDENTITY: &str = "modulus-identity";
    pub const REJECTION: &str = "uncertified-pairs-rejected";
    pub const NON_LANDSLIDE: &str = "non-landslide";
    pub const LANDSLIDE_CONTROL: &str = "landslide-control";
    pub const HAMILTON: &str = "degenerating-hamilton-sequence";
    pub const HAMILTON_BOUND: &str = "hamilton-bound";
    pub const REICH: &str = "reich-conditions";
    pub const DELTA: &str = "teichmuller-form-delta-vanishes";
    pub const LOCAL: &str = "not-locally-extremal";
    pub const SOLVER: &str = "beltrami-solution";
    pub const IMAGE: &str = "image-of-support";
}

/// Statements the artifact takes as given.
pub const ASSUMED: &[&str] = &[
    "eta is uniquely extremal in its class",
    "the class of eta is a non-Strebel point",
    "mu is extremal in its class",
    "mu is non-decreasable (global and infinitesimal), beyond the finite checks reported here",
];
