//! Line-oriented run configuration.
//!
//! Each non-blank line is `section.key = value`; `#` starts a comment.
//! Unknown and repeated keys are errors. `grid.dim`, `grid.nx`, `grid.lx`,
//! `time.*` and the three `model.beta_*` weights are required (plus
//! `grid.ny`/`grid.ly` in 2D); everything else has a default.
//!
//! Field-valued keys take either a preset (`tanh_ball radius=4 eps=1`) or
//! `file <path>` naming a snapshot. Relative paths are resolved against the
//! directory of the config file.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forward::ControlSchedule;
use crate::grid::{Field, Grid};
use crate::model::{
    ControlBounds, CostWeights, ModelParams, PotentialSpec, ProliferationSpec, SolverOptions,
    TrackingTarget,
};
use crate::optimizer::OptimOptions;
use crate::presets::{preset_field, Preset};
use crate::snapshot::read_snapshot;

const KEYS: &[&str] = &[
    "grid.dim",
    "grid.nx",
    "grid.ny",
    "grid.lx",
    "grid.ly",
    "time.t_final",
    "time.tau",
    "model.potential",
    "model.well_scale",
    "model.proliferation",
    "model.p0",
    "model.k",
    "model.p_floor",
    "model.stabilization",
    "model.beta_q",
    "model.beta_omega",
    "model.beta_u",
    "model.u_min",
    "model.u_max",
    "init.phi0",
    "init.sigma0",
    "target.phi_q",
    "target.phi_omega",
    "solver.cg_tol",
    "solver.cg_maxit",
    "solver.overflow_guard",
    "opt.max_iters",
    "opt.tol",
    "opt.armijo_c",
    "opt.alpha0",
    "opt.alpha_shrink",
    "opt.u0",
    "opt.kkt_tol",
    "io.outdir",
    "io.snapshot_every",
    "io.log_format",
    "check.seed",
    "check.seeds",
    "check.n_samples",
    "check.range",
    "check.tol",
    "check.steps",
    "check.eps",
    "check.cost_eps",
    "check.order_min",
    "check.order_max",
    "check.direction",
    "check.taus",
    "check.oracle_dt",
    "check.phi",
    "check.sigma",
    "check.u",
];

/// A field given by preset or by snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Preset(Preset),
    File(PathBuf),
}

impl FieldSource {
    fn parse(text: &str) -> Result<Self> {
        match text.strip_prefix("file ") {
            Some(path) => Ok(FieldSource::File(PathBuf::from(path.trim()))),
            None => Preset::parse(text).map(FieldSource::Preset),
        }
    }

    pub fn load(&self, grid: Grid, base_dir: &Path) -> Result<Field> {
        match self {
            FieldSource::Preset(p) => preset_field(p, grid),
            FieldSource::File(path) => Ok(read_snapshot(&base_dir.join(path), &grid)?.0),
        }
    }

    fn with_seed(&self, seed: u64) -> Self {
        match self {
            FieldSource::Preset(p) => FieldSource::Preset(p.with_seed(seed)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSource::Preset(p) => write!(f, "{p}"),
            FieldSource::File(path) => write!(f, "file {}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProliferationKind {
    Quadratic,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSection {
    pub t_final: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub well_scale: f64,
    pub proliferation: ProliferationKind,
    pub p0: f64,
    pub k: f64,
    pub p_floor: f64,
    /// `None` selects the automatic value.
    pub stabilization: Option<f64>,
    pub beta_q: f64,
    pub beta_omega: f64,
    pub beta_u: f64,
    pub u_min: FieldSource,
    pub u_max: FieldSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSection {
    pub phi0: FieldSource,
    pub sigma0: FieldSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSection {
    pub phi_q: FieldSource,
    pub phi_omega: FieldSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub cg_tol: f64,
    pub cg_maxit: usize,
    pub overflow_guard: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptSection {
    pub max_iters: usize,
    pub tol: f64,
    pub armijo_c: f64,
    pub alpha0: f64,
    pub alpha_shrink: f64,
    pub u0: FieldSource,
    pub kkt_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoSection {
    pub outdir: PathBuf,
    pub snapshot_every: usize,
    pub log_format: String,
}

/// Settings of the verification subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSection {
    pub seed: u64,
    /// Seeds for grad-check; the run passes only if every seed does.
    pub seeds: Vec<u64>,
    pub n_samples: usize,
    pub range: (f64, f64),
    /// Pass bound for grad-check (relative discrepancy).
    pub tol: f64,
    /// Number of steps for grad-check (0 = use the time section).
    pub steps: usize,
    /// State-remainder sweep for taylor.
    pub eps: Vec<f64>,
    /// Cost-remainder sweep for taylor.
    pub cost_eps: Vec<f64>,
    pub order_min: f64,
    pub order_max: f64,
    pub direction: FieldSource,
    pub taus: Vec<f64>,
    pub oracle_dt: f64,
    pub phi: f64,
    pub sigma: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    pub model: ModelSection,
    pub init: InitSection,
    pub target: TargetSection,
    pub solver: SolverSection,
    pub opt: OptSection,
    pub io: IoSection,
    pub check: CheckSection,
    /// Directory that relative paths are resolved against. Not echoed.
    pub base_dir: PathBuf,
}

/// Raw `key -> (line, value)` entries. Line 0 marks a command-line override.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        let line = self.0.get(key).map_or(0, |(l, _)| *l);
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|(_, v)| v.as_str())
    }

    fn value<T: std::str::FromStr>(&self, key: &str, default: Option<T>, what: &str) -> Result<T> {
        match self.raw(key) {
            Some(v) => v
                .parse::<T>()
                .map_err(|_| self.err(key, format!("`{v}` is not {what}"))),
            None => default.ok_or_else(|| self.err(key, "required key is missing")),
        }
    }

    fn real(&self, key: &str, default: Option<f64>) -> Result<f64> {
        let v: f64 = self.value(key, default, "a number")?;
        if !v.is_finite() {
            return Err(self.err(key, "value must be finite"));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: Option<usize>) -> Result<usize> {
        self.value(key, default, "a nonnegative integer")
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| self.err(key, format!("`{s}` is not a number")))
                })
                .collect(),
        }
    }

    fn field(&self, key: &str, default: &str) -> Result<FieldSource> {
        FieldSource::parse(self.raw(key).unwrap_or(default))
            .map_err(|e| self.err(key, e.to_string()))
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a).trim()
}

fn split_entry(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    Some((k.trim(), v.trim()))
}

fn collect_entries(text: &str, overrides: &[String]) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = strip_comment(line);
        if body.is_empty() {
            continue;
        }
        let (key, value) = split_entry(body).ok_or_else(|| Error::Config {
            line: line_no,
            key: body.into(),
            message: "expected `section.key = value`".into(),
        })?;
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line: line_no,
                key: key.into(),
                message: "unknown key".into(),
            });
        }
        if let Some((first, _)) = map.get(key) {
            return Err(Error::Config {
                line: line_no,
                key: key.into(),
                message: format!("duplicate key (first set on line {first})"),
            });
        }
        map.insert(key.to_string(), (line_no, value.to_string()));
    }
    for o in overrides {
        let (key, value) = split_entry(o).ok_or_else(|| Error::Config {
            line: 0,
            key: o.clone(),
            message: "override must be `section.key=value`".into(),
        })?;
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line: 0,
                key: key.into(),
                message: "unknown override key".into(),
            });
        }
        map.insert(key.to_string(), (0, value.to_string()));
    }
    Ok(Entries(map))
}

/// Parses and validates config text; relative paths resolve against `base_dir`.
pub fn parse_config_with(text: &str, overrides: &[String], base_dir: &Path) -> Result<RunConfig> {
    let e = collect_entries(text, overrides)?;

    let dim = e.count("grid.dim", None)?;
    if dim != 1 && dim != 2 {
        return Err(e.err("grid.dim", format!("dimension must be 1 or 2, got {dim}")));
    }
    let two_d = dim == 2;
    let grid = GridSection {
        dim,
        nx: e.count("grid.nx", None)?,
        ny: e.count("grid.ny", if two_d { None } else { Some(1) })?,
        lx: e.real("grid.lx", None)?,
        ly: e.real("grid.ly", if two_d { None } else { Some(1.0) })?,
    };
    if !two_d && grid.ny != 1 {
        return Err(e.err("grid.ny", "a 1D grid has ny = 1"));
    }
    Grid::new(dim, [grid.nx, grid.ny], [grid.lx, grid.ly])
        .map_err(|err| e.err("grid.nx", err.to_string()))?;

    let time = TimeSection {
        t_final: e.real("time.t_final", None)?,
        tau: e.real("time.tau", None)?,
    };

    let potential = e.raw("model.potential").unwrap_or("quartic");
    if potential != "quartic" {
        return Err(e.err(
            "model.potential",
            format!("unknown potential `{potential}` (expected quartic)"),
        ));
    }
    let proliferation = match e.raw("model.proliferation").unwrap_or("quadratic") {
        "quadratic" => ProliferationKind::Quadratic,
        "sigmoid" => ProliferationKind::Sigmoid,
        other => {
            return Err(e.err(
                "model.proliferation",
                format!("unknown proliferation `{other}` (expected quadratic or sigmoid)"),
            ))
        }
    };
    let stabilization = match e.raw("model.stabilization").unwrap_or("auto") {
        "auto" => None,
        _ => Some(e.real("model.stabilization", None)?),
    };
    let bound = |key: &str, default: &str| -> Result<FieldSource> {
        match e.raw(key).unwrap_or(default).parse::<f64>() {
            Ok(c) => Ok(FieldSource::Preset(Preset::Constant(c))),
            Err(_) => e.field(key, default),
        }
    };
    let model = ModelSection {
        well_scale: e.real("model.well_scale", Some(1.0))?,
        proliferation,
        p0: e.real("model.p0", Some(1.0))?,
        k: e.real("model.k", Some(1.0))?,
        p_floor: e.real("model.p_floor", Some(0.0))?,
        stabilization,
        beta_q: e.real("model.beta_q", None)?,
        beta_omega: e.real("model.beta_omega", None)?,
        beta_u: e.real("model.beta_u", None)?,
        u_min: bound("model.u_min", "-1")?,
        u_max: bound("model.u_max", "1")?,
    };
    for key in ["model.beta_q", "model.beta_omega", "model.beta_u"] {
        if e.real(key, None)? < 0.0 {
            return Err(e.err(key, "cost weights must be nonnegative (H1)"));
        }
    }
    if model.beta_q == 0.0 && model.beta_omega == 0.0 && model.beta_u == 0.0 {
        return Err(e.err("model.beta_u", "cost weights must not all be zero (H1)"));
    }
    if let (FieldSource::Preset(Preset::Constant(lo)), FieldSource::Preset(Preset::Constant(hi))) =
        (&model.u_min, &model.u_max)
    {
        if lo > hi {
            return Err(e.err(
                "model.u_max",
                format!("u_min = {lo} exceeds u_max = {hi} (H2)"),
            ));
        }
    }

    let init = InitSection {
        phi0: e.field("init.phi0", "constant 0")?,
        sigma0: e.field("init.sigma0", "constant 1")?,
    };
    let target = TargetSection {
        phi_q: e.field("target.phi_q", "constant 0")?,
        phi_omega: e.field("target.phi_omega", "constant 0")?,
    };
    let defaults = SolverOptions::default();
    let solver = SolverSection {
        cg_tol: e.real("solver.cg_tol", Some(defaults.cg_tol))?,
        cg_maxit: e.count("solver.cg_maxit", Some(defaults.cg_max_iter))?,
        overflow_guard: e.real("solver.overflow_guard", Some(defaults.overflow_guard))?,
    };
    let od = OptimOptions::default();
    let opt = OptSection {
        max_iters: e.count("opt.max_iters", Some(od.max_iters))?,
        tol: e.real("opt.tol", Some(od.tol))?,
        armijo_c: e.real("opt.armijo_c", Some(od.armijo_c))?,
        alpha0: e.real("opt.alpha0", Some(od.alpha0))?,
        alpha_shrink: e.real("opt.alpha_shrink", Some(od.alpha_shrink))?,
        u0: e.field("opt.u0", "constant 0")?,
        kkt_tol: e.real("opt.kkt_tol", Some(1e-5))?,
    };
    let log_format = e.raw("io.log_format").unwrap_or("kv").to_string();
    if log_format != "kv" {
        return Err(e.err(
            "io.log_format",
            format!("unsupported log format `{log_format}` (expected kv)"),
        ));
    }
    let io = IoSection {
        outdir: PathBuf::from(e.raw("io.outdir").unwrap_or("out")),
        snapshot_every: e.count("io.snapshot_every", Some(0))?,
        log_format,
    };
    let range = e.list("check.range", &[-5.0, 5.0])?;
    if range.len() != 2 || range[0] >= range[1] {
        return Err(e.err("check.range", "expected two increasing numbers `lo hi`"));
    }
    let seeds = match e.raw("check.seeds") {
        None => vec![1, 2, 3],
        Some(v) => v
            .split_whitespace()
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| e.err("check.seeds", format!("`{s}` is not a seed")))
            })
            .collect::<Result<_>>()?,
    };
    let check = CheckSection {
        seed: e.value("check.seed", Some(1), "an unsigned integer")?,
        seeds,
        n_samples: e.count("check.n_samples", Some(1001))?,
        range: (range[0], range[1]),
        tol: e.real("check.tol", Some(1e-10))?,
        steps: e.count("check.steps", Some(0))?,
        eps: e.list("check.eps", &[1e-1, 3e-2, 1e-2, 3e-3])?,
        cost_eps: e.list("check.cost_eps", &[1e-2, 1e-3, 1e-4, 1e-5])?,
        order_min: e.real("check.order_min", Some(1.9))?,
        order_max: e.real("check.order_max", Some(2.1))?,
        direction: e.field(
            "check.direction",
            "filtered_noise seed=1 amplitude=1.0 mean=0.0 kappa=1.0 passes=2",
        )?,
        taus: e.list("check.taus", &[4e-3, 2e-3, 1e-3])?,
        oracle_dt: e.real("check.oracle_dt", Some(1e-5))?,
        phi: e.real("check.phi", Some(0.2))?,
        sigma: e.real("check.sigma", Some(0.8))?,
        u: e.real("check.u", Some(0.5))?,
    };

    let config = RunConfig {
        grid,
        time,
        model,
        init,
        target,
        solver,
        opt,
        io,
        check,
        base_dir: base_dir.to_path_buf(),
    };
    config.scalar_params()?.validate().map_err(|err| {
        let key = match &err {
            Error::Usage(m) if m.contains("tau") || m.contains("t_final") => "time.tau",
            Error::Usage(m) if m.contains("stabilization") => "model.stabilization",
            Error::Usage(m) if m.contains("cg_") || m.contains("overflow") => "solver.cg_tol",
            _ => "model",
        };
        e.err(key, err.to_string())
    })?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[], Path::new("."))
}

/// Reads `path`, applies overrides, and resolves paths against its directory.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    parse_config_with(&text, overrides, base)
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        let g = &self.grid;
        Grid::new(g.dim, [g.nx, g.ny], [g.lx, g.ly]).expect("grid validated at parse time")
    }

    fn proliferation(&self) -> Result<ProliferationSpec> {
        let m = &self.model;
        match m.proliferation {
            ProliferationKind::Quadratic => ProliferationSpec::quadratic(m.p0),
            ProliferationKind::Sigmoid => ProliferationSpec::sigmoid(m.p0, m.k, m.p_floor),
        }
    }

    /// Parameters with all fields set to their constant-zero placeholders;
    /// enough to validate scalar settings without touching files.
    fn scalar_params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::new(self.grid());
        self.fill_scalars(&mut p)?;
        Ok(p)
    }

    fn fill_scalars(&self, p: &mut ModelParams) -> Result<()> {
        let m = &self.model;
        p.potential = PotentialSpec::quartic(m.well_scale)?;
        p.proliferation = self.proliferation()?;
        p.weights = CostWeights::new(m.beta_q, m.beta_omega, m.beta_u);
        p.t_final = self.time.t_final;
        p.tau = self.time.tau;
        p.stabilization = m
            .stabilization
            .unwrap_or_else(|| crate::model::auto_stabilization(&p.potential));
        p.solver = SolverOptions {
            cg_tol: self.solver.cg_tol,
            cg_max_iter: self.solver.cg_maxit,
            overflow_guard: self.solver.overflow_guard,
        };
        Ok(())
    }

    /// Full model parameters, loading bound and target fields.
    pub fn model_params(&self) -> Result<ModelParams> {
        let grid = self.grid();
        let mut p = ModelParams::new(grid);
        self.fill_scalars(&mut p)?;
        let dir = &self.base_dir;
        p.bounds = ControlBounds::new(
            self.model.u_min.load(grid, dir)?,
            self.model.u_max.load(grid, dir)?,
        )?;
        p.phi_q = TrackingTarget::Constant(self.target.phi_q.load(grid, dir)?);
        p.phi_omega = self.target.phi_omega.load(grid, dir)?;
        p.validate()?;
        Ok(p)
    }

    pub fn initial_fields(&self) -> Result<(Field, Field)> {
        let grid = self.grid();
        Ok((
            self.init.phi0.load(grid, &self.base_dir)?,
            self.init.sigma0.load(grid, &self.base_dir)?,
        ))
    }

    /// The initial guess repeated over all time levels.
    pub fn initial_control(&self) -> Result<ControlSchedule> {
        let grid = self.grid();
        let n = (self.time.t_final / self.time.tau).round() as usize;
        Ok(ControlSchedule::repeat(
            self.opt.u0.load(grid, &self.base_dir)?,
            n,
        ))
    }

    pub fn optim_options(&self) -> OptimOptions {
        OptimOptions {
            max_iters: self.opt.max_iters,
            tol: self.opt.tol,
            armijo_c: self.opt.armijo_c,
            alpha0: self.opt.alpha0,
            alpha_shrink: self.opt.alpha_shrink,
            ..OptimOptions::default()
        }
    }

    pub fn outdir(&self) -> PathBuf {
        self.base_dir.join(&self.io.outdir)
    }

    /// Replaces every seed (check seeds and noise presets) with `seed`.
    pub fn override_seeds(&mut self, seed: u64) {
        self.check.seed = seed;
        self.check.seeds = vec![seed];
        for f in [
            &mut self.init.phi0,
            &mut self.init.sigma0,
            &mut self.target.phi_q,
            &mut self.target.phi_omega,
            &mut self.opt.u0,
            &mut self.check.direction,
            &mut self.model.u_min,
            &mut self.model.u_max,
        ] {
            *f = f.with_seed(seed);
        }
    }

    /// Canonical text form of the effective configuration. Parsing it
    /// yields the same config and re-echoing it the same bytes.
    pub fn echo(&self) -> String {
        fn list(v: &[f64]) -> String {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        }
        fn bound(f: &FieldSource) -> String {
            match f {
                FieldSource::Preset(Preset::Constant(c)) => format!("{c:?}"),
                other => other.to_string(),
            }
        }
        let g = &self.grid;
        let m = &self.model;
        let c = &self.check;
        let entries: Vec<(&str, String)> = vec![
            ("grid.dim", g.dim.to_string()),
            ("grid.nx", g.nx.to_string()),
            ("grid.ny", g.ny.to_string()),
            ("grid.lx", format!("{:?}", g.lx)),
            ("grid.ly", format!("{:?}", g.ly)),
            ("time.t_final", format!("{:?}", self.time.t_final)),
            ("time.tau", format!("{:?}", self.time.tau)),
            ("model.potential", "quartic".into()),
            ("model.well_scale", format!("{:?}", m.well_scale)),
            (
                "model.proliferation",
                match m.proliferation {
                    ProliferationKind::Quadratic => "quadratic".into(),
                    ProliferationKind::Sigmoid => "sigmoid".into(),
                },
            ),
            ("model.p0", format!("{:?}", m.p0)),
            ("model.k", format!("{:?}", m.k)),
            ("model.p_floor", format!("{:?}", m.p_floor)),
            (
                "model.stabilization",
                m.stabilization.map_or("auto".into(), |s| format!("{s:?}")),
            ),
            ("model.beta_q", format!("{:?}", m.beta_q)),
            ("model.beta_omega", format!("{:?}", m.beta_omega)),
            ("model.beta_u", format!("{:?}", m.beta_u)),
            ("model.u_min", bound(&m.u_min)),
            ("model.u_max", bound(&m.u_max)),
            ("init.phi0", self.init.phi0.to_string()),
            ("init.sigma0", self.init.sigma0.to_string()),
            ("target.phi_q", self.target.phi_q.to_string()),
            ("target.phi_omega", self.target.phi_omega.to_string()),
            ("solver.cg_tol", format!("{:?}", self.solver.cg_tol)),
            ("solver.cg_maxit", self.solver.cg_maxit.to_string()),
            (
                "solver.overflow_guard",
                format!("{:?}", self.solver.overflow_guard),
            ),
            ("opt.max_iters", self.opt.max_iters.to_string()),
            ("opt.tol", format!("{:?}", self.opt.tol)),
            ("opt.armijo_c", format!("{:?}", self.opt.armijo_c)),
            ("opt.alpha0", format!("{:?}", self.opt.alpha0)),
            ("opt.alpha_shrink", format!("{:?}", self.opt.alpha_shrink)),
            ("opt.u0", self.opt.u0.to_string()),
            ("opt.kkt_tol", format!("{:?}", self.opt.kkt_tol)),
            ("io.outdir", self.io.outdir.display().to_string()),
            ("io.snapshot_every", self.io.snapshot_every.to_string()),
            ("io.log_format", self.io.log_format.clone()),
            ("check.seed", c.seed.to_string()),
            (
                "check.seeds",
                c.seeds
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            ("check.n_samples", c.n_samples.to_string()),
            ("check.range", list(&[c.range.0, c.range.1])),
            ("check.tol", format!("{:?}", c.tol)),
            ("check.steps", c.steps.to_string()),
            ("check.eps", list(&c.eps)),
            ("check.cost_eps", list(&c.cost_eps)),
            ("check.order_min", format!("{:?}", c.order_min)),
            ("check.order_max", format!("{:?}", c.order_max)),
            ("check.direction", c.direction.to_string()),
            ("check.taus", list(&c.taus)),
            ("check.oracle_dt", format!("{:?}", c.oracle_dt)),
            ("check.phi", format!("{:?}", c.phi)),
            ("check.sigma", format!("{:?}", c.sigma)),
            ("check.u", format!("{:?}", c.u)),
        ];
        debug_assert_eq!(entries.len(), KEYS.len());
        let mut out = String::new();
        for (k, v) in entries {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }
}
