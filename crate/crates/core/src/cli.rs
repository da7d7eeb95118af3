//! Batch front end: `key = value` run configurations, the `run`, `verify`,
//! `convergence` and `mesh-info` commands, and CSV/VTK output.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::HdgError;
use crate::mesh::{build_face_topology, mesh_metrics, read_mesh, Rectangle, SpaceTimeLayout, SpatialMesh};
use crate::projections::{CurlBump, TensorTestFunction, TestMode, VectorField};
use crate::solver::{run_simulation, Benchmark, ProblemData, RunStatus, SimulationResult, SolverConfig};
use crate::spaces::{DiscreteField, Discretization};
use crate::verify::{
    consistency_residuals, constant_estimates, convergence_metrics, energy_inequality_report, fmt, identity_suite,
    write_csv, ConstantStudy, ConvergenceStudy, IdentityCheck, LevelRecord, RefinementStudy,
};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<HdgError> for CliError {
    fn from(e: HdgError) -> Self {
        match e {
            HdgError::Io(e) => CliError::Io(e.to_string()),
            HdgError::Configuration(m) => CliError::Config(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Spatial mesh: the builtin crisscross mesh of the unit square or a mesh
/// file.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Builtin(usize),
    File(PathBuf),
}

impl std::fmt::Display for MeshSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshSource::Builtin(n) => write!(f, "builtin:{n}"),
            MeshSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for MeshSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(n) = s.strip_prefix("builtin:") {
            let n: usize = n.trim().parse().map_err(|_| format!("invalid builtin mesh size '{n}'"))?;
            Ok(MeshSource::Builtin(n))
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(MeshSource::File(PathBuf::from(p.trim())))
        } else {
            Err(format!("mesh must be 'builtin:<n>' or 'file:<path>', got '{s}'"))
        }
    }
}

/// Problem data: a builtin benchmark or superposed curl bumps read from a
/// file.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchmarkChoice {
    Builtin(Benchmark),
    CustomFile(PathBuf),
}

/// All settings of a batch command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub ks: usize,
    pub kt: usize,
    pub slabs: usize,
    pub final_time: f64,
    pub nu: f64,
    /// `None` selects `8 k_s^2`.
    pub alpha: Option<f64>,
    pub benchmark: BenchmarkChoice,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub static_condensation: bool,
    pub output: PathBuf,
    pub seed: u64,
    /// Random fields per identity check in `verify`.
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            mesh: MeshSource::Builtin(8),
            ks: 2,
            kt: 1,
            slabs: 8,
            final_time: 1.0,
            nu: 0.01,
            alpha: None,
            benchmark: BenchmarkChoice::Builtin(Benchmark::TaylorGreen),
            tolerance: solver.tolerance,
            max_iterations: solver.max_iterations,
            damping: solver.damping,
            static_condensation: solver.static_condensation,
            output: PathBuf::from("out"),
            seed: 1,
            samples: 10,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> crate::Result<T> {
    value
        .parse()
        .map_err(|_| HdgError::Parse { line, message: format!("invalid value '{value}' for '{key}'") })
}

impl RunConfig {
    /// Parses `key = value` lines; blank lines and `#` comments are ignored,
    /// unknown or repeated keys are errors and missing keys keep their
    /// defaults.
    pub fn parse(text: &str) -> crate::Result<Self> {
        let mut c = RunConfig::default();
        let mut benchmark: Option<String> = None;
        let mut benchmark_file: Option<PathBuf> = None;
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| HdgError::Parse { line, message: format!("expected 'key = value', got '{content}'") })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(HdgError::Parse { line, message: format!("repeated key '{key}'") });
            }
            match key {
                "mesh" => c.mesh = value.parse().map_err(|message| HdgError::Parse { line, message })?,
                "ks" => c.ks = parse_value(line, key, value)?,
                "kt" => c.kt = parse_value(line, key, value)?,
                "slabs" => c.slabs = parse_value(line, key, value)?,
                "final_time" => c.final_time = parse_value(line, key, value)?,
                "nu" => c.nu = parse_value(line, key, value)?,
                "alpha" => {
                    c.alpha = if value == "auto" { None } else { Some(parse_value(line, key, value)?) };
                }
                "benchmark" => benchmark = Some(value.to_string()),
                "benchmark_file" => benchmark_file = Some(PathBuf::from(value)),
                "tolerance" => c.tolerance = parse_value(line, key, value)?,
                "max_iterations" => c.max_iterations = parse_value(line, key, value)?,
                "damping" => c.damping = parse_value(line, key, value)?,
                "static_condensation" => c.static_condensation = parse_value(line, key, value)?,
                "output" => c.output = PathBuf::from(value),
                "seed" => c.seed = parse_value(line, key, value)?,
                "samples" => c.samples = parse_value(line, key, value)?,
                _ => return Err(HdgError::Parse { line, message: format!("unknown key '{key}'") }),
            }
        }
        c.benchmark = match (benchmark.as_deref(), benchmark_file) {
            (Some("custom-file"), Some(p)) => BenchmarkChoice::CustomFile(p),
            (Some("custom-file"), None) => {
                return Err(HdgError::Configuration("benchmark 'custom-file' needs 'benchmark_file'".into()))
            }
            (Some(name), None) => BenchmarkChoice::Builtin(name.parse()?),
            (None, None) => c.benchmark,
            (_, Some(_)) => {
                return Err(HdgError::Configuration("'benchmark_file' requires 'benchmark = custom-file'".into()))
            }
        };
        c.validate()?;
        Ok(c)
    }

    /// Emits every key; `parse(to_text())` reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mesh = {}", self.mesh);
        let _ = writeln!(s, "ks = {}", self.ks);
        let _ = writeln!(s, "kt = {}", self.kt);
        let _ = writeln!(s, "slabs = {}", self.slabs);
        let _ = writeln!(s, "final_time = {:?}", self.final_time);
        let _ = writeln!(s, "nu = {:?}", self.nu);
        match self.alpha {
            Some(a) => {
                let _ = writeln!(s, "alpha = {a:?}");
            }
            None => s.push_str("alpha = auto\n"),
        }
        match &self.benchmark {
            BenchmarkChoice::Builtin(b) => {
                let _ = writeln!(s, "benchmark = {b}");
            }
            BenchmarkChoice::CustomFile(p) => {
                let _ = writeln!(s, "benchmark = custom-file\nbenchmark_file = {}", p.display());
            }
        }
        let _ = writeln!(s, "tolerance = {:?}", self.tolerance);
        let _ = writeln!(s, "max_iterations = {}", self.max_iterations);
        let _ = writeln!(s, "damping = {:?}", self.damping);
        let _ = writeln!(s, "static_condensation = {}", self.static_condensation);
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "samples = {}", self.samples);
        s
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| HdgError::Configuration(format!("cannot read config '{}': {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if let MeshSource::Builtin(n) = self.mesh {
            if n == 0 {
                return Err(HdgError::Configuration("builtin mesh needs n >= 1".into()));
            }
        }
        if self.slabs == 0 {
            return Err(HdgError::Configuration("at least one time slab is required".into()));
        }
        if self.ks == 0 {
            return Err(HdgError::Configuration("spatial degree must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(HdgError::Configuration("samples must be positive".into()));
        }
        self.solver_config().validate()?;
        self.problem_shape()?.validate()
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            damping: self.damping,
            static_condensation: self.static_condensation,
            ..SolverConfig::default()
        }
    }

    /// Problem data without reading a custom file (for validation).
    fn problem_shape(&self) -> crate::Result<ProblemData> {
        match &self.benchmark {
            BenchmarkChoice::Builtin(b) => Ok(b.problem(self.nu, self.final_time)),
            BenchmarkChoice::CustomFile(_) => Ok(bump_problem(Vec::new(), self.nu, self.final_time)),
        }
    }

    pub fn problem(&self) -> crate::Result<ProblemData> {
        match &self.benchmark {
            BenchmarkChoice::Builtin(b) => Ok(b.problem(self.nu, self.final_time)),
            BenchmarkChoice::CustomFile(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| HdgError::Configuration(format!("cannot read benchmark '{}': {e}", p.display())))?;
                Ok(bump_problem(parse_bumps(&text)?, self.nu, self.final_time))
            }
        }
    }

    pub fn build_mesh(&self) -> crate::Result<SpatialMesh> {
        match &self.mesh {
            MeshSource::Builtin(n) => SpatialMesh::build_uniform(*n, Rectangle::unit_square()),
            MeshSource::File(p) => {
                let f = fs::File::open(p)
                    .map_err(|e| HdgError::Configuration(format!("cannot open mesh '{}': {e}", p.display())))?;
                read_mesh(BufReader::new(f))
            }
        }
    }
}

/// Reads `bump cx cy radius amplitude` lines (`#` comments allowed).
pub fn parse_bumps(text: &str) -> crate::Result<Vec<CurlBump>> {
    let mut bumps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        if words.len() != 5 || words[0] != "bump" {
            return Err(HdgError::Parse { line, message: "expected 'bump cx cy radius amplitude'".into() });
        }
        let v: Vec<f64> = words[1..].iter().map(|w| parse_value(line, "bump", w)).collect::<crate::Result<_>>()?;
        if !(v[2] > 0.0) {
            return Err(HdgError::Parse { line, message: format!("bump radius must be positive, got {}", v[2]) });
        }
        bumps.push(CurlBump::new([v[0], v[1]], v[2], v[3]));
    }
    Ok(bumps)
}

/// Unforced flow started from the sum of the given solenoidal bumps.
pub fn bump_problem(bumps: Vec<CurlBump>, nu: f64, final_time: f64) -> ProblemData {
    ProblemData {
        name: "custom-file".into(),
        nu,
        final_time,
        domain: Rectangle::unit_square(),
        convection: true,
        force: None,
        initial: Arc::new(move |x| {
            bumps.iter().fold([0.0, 0.0], |acc, b| {
                let v = b.value(x);
                [acc[0] + v[0], acc[1] + v[1]]
            })
        }),
        exact: None,
    }
}

/// Legacy ASCII VTK unstructured grid with discontinuous point data: each
/// triangle has its own three points carrying the element traces of the
/// velocity and pressure snapshots.
pub fn write_vtk(
    d: &Discretization,
    velocity: &DiscreteField,
    pressure: &DiscreteField,
    title: &str,
    mut out: impl Write,
) -> crate::Result<()> {
    let ne = d.n_elements();
    let reference = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", 3 * ne);
    for k in 0..ne {
        for x in d.mesh().element_vertices(k) {
            let _ = writeln!(s, "{} {} 0", fmt(x[0]), fmt(x[1]));
        }
    }
    let _ = writeln!(s, "CELLS {ne} {}", 4 * ne);
    for k in 0..ne {
        let _ = writeln!(s, "3 {} {} {}", 3 * k, 3 * k + 1, 3 * k + 2);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", 3 * ne);
    s.push_str("VECTORS velocity double\n");
    for k in 0..ne {
        for xi in reference {
            let v = d.evaluate_element_reference(velocity, k, xi, &[1.0], &[0.0]).value;
            let _ = writeln!(s, "{} {} 0", fmt(v[0]), fmt(v[1]));
        }
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for k in 0..ne {
        for xi in reference {
            let p = d.evaluate_element_reference(pressure, k, xi, &[1.0], &[0.0]).value;
            let _ = writeln!(s, "{}", fmt(p[0]));
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Energy ledger, one row per computed slab.
pub fn ledger_csv(run: &SimulationResult) -> crate::Result<String> {
    let header = [
        "slab",
        "start",
        "end",
        "incoming_sq",
        "outgoing_sq",
        "jump_sq",
        "viscous",
        "convective",
        "forcing",
        "slab_residual",
        "cumulative_lhs",
        "cumulative_rhs",
        "cumulative_residual",
        "iterations",
    ];
    let rows: Vec<Vec<String>> = run
        .ledger
        .iter()
        .zip(&run.states)
        .map(|(r, s)| {
            let e = r.energy;
            vec![
                r.slab.to_string(),
                fmt(r.start),
                fmt(r.end),
                fmt(e.incoming_sq),
                fmt(e.outgoing_sq),
                fmt(e.jump_sq),
                fmt(e.viscous),
                fmt(e.convective),
                fmt(e.forcing),
                fmt(r.slab_residual),
                fmt(r.cumulative_lhs),
                fmt(r.cumulative_rhs),
                fmt(r.cumulative_residual),
                s.iterations.to_string(),
            ]
        })
        .collect();
    write_csv(&header, &rows)
}

/// Conformity measures of the velocity, one row per computed slab.
pub fn conformity_csv(run: &SimulationResult) -> crate::Result<String> {
    let header =
        ["slab", "end", "divergence", "normal_jump", "boundary_normal", "max_l2", "converged", "picard_residual"];
    let rows: Vec<Vec<String>> = run
        .states
        .iter()
        .map(|s| {
            vec![
                s.slab.index.to_string(),
                fmt(s.slab.end),
                fmt(s.conformity.divergence),
                fmt(s.conformity.normal_jump),
                fmt(s.conformity.boundary_normal),
                fmt(s.max_sampled_l2),
                s.converged.to_string(),
                fmt(s.increments.last().copied().unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    write_csv(&header, &rows)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write '{}': {e}", path.display())))?;
    Ok(path)
}

fn prepare_output(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create '{}': {e}", dir.display())))
}

fn discretization(config: &RunConfig) -> CliResult<Discretization> {
    Ok(config.solver_config().discretization(config.build_mesh()?, config.ks, config.kt)?)
}

fn simulate(config: &RunConfig, d: &Discretization, data: &ProblemData) -> CliResult<SimulationResult> {
    let layout = SpaceTimeLayout::uniform(config.final_time, config.slabs)?;
    Ok(run_simulation(d, &layout, data, &config.solver_config())?)
}

/// Runs the configured simulation and writes `energy_ledger.csv`,
/// `conformity.csv` and `solution_<m>.vtk` (velocity and pressure at
/// `t_m^-`). Artifacts of the slabs computed before a Picard failure are
/// kept.
pub fn cmd_run(config: &RunConfig) -> CliResult<String> {
    config.validate()?;
    prepare_output(&config.output)?;
    let d = discretization(config)?;
    let data = config.problem()?;
    let run = simulate(config, &d, &data)?;
    write_file(&config.output, "energy_ledger.csv", &ledger_csv(&run)?)?;
    write_file(&config.output, "conformity.csv", &conformity_csv(&run)?)?;
    for s in &run.states {
        let name = format!("solution_{:04}.vtk", s.slab.index + 1);
        let path = config.output.join(&name);
        let file = fs::File::create(&path).map_err(|e| CliError::Io(format!("cannot write '{}': {e}", path.display())))?;
        let title = format!("sthdg {} t={}", data.name, fmt(s.slab.end));
        write_vtk(&d, &s.outgoing, &s.pressure.end_trace(), &title, std::io::BufWriter::new(file))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let c = run.conformity();
    let summary = format!(
        "{} slabs, {} Picard iterations, final |u| {:.6e}, divergence {:.2e}, normal jump {:.2e}, boundary normal {:.2e}",
        run.states.len(),
        run.total_iterations(),
        run.ledger.last().map_or(0.0, |r| r.energy.outgoing_sq.sqrt()),
        c.divergence,
        c.normal_jump,
        c.boundary_normal
    );
    match run.status {
        RunStatus::Completed => Ok(summary),
        RunStatus::NotConverged { slab } => {
            Err(CliError::NotConverged(format!("Picard iteration failed on slab {slab}; {summary}")))
        }
    }
}

/// Runs the identity suite on the configured mesh and degrees, the constant
/// study on builtin meshes `2, 4, 8` and the energy report of the unforced
/// problem; writes `identities.csv`, `constants.csv` and `energy.csv`.
pub fn cmd_verify(config: &RunConfig) -> CliResult<String> {
    config.validate()?;
    prepare_output(&config.output)?;
    let d = discretization(config)?;
    let alpha = config.solver_config().penalty(config.ks);
    let mut failures = Vec::new();

    let identities = identity_suite(&d, alpha, config.seed, config.samples)?;
    write_file(&config.output, "identities.csv", &identities.to_csv()?)?;
    let limits = [
        (IdentityCheck::Viscous, 1e-10),
        (IdentityCheck::Convection, 1e-10),
        (IdentityCheck::Dissipation, 1e-12),
        (IdentityCheck::Lifting, 1e-11),
        (IdentityCheck::DiscreteGradient, 1e-11),
        (IdentityCheck::TimeLifting, 1e-11),
        (IdentityCheck::TimeLiftingLowest, 1e-13),
    ];
    for (check, limit) in limits {
        let r = identities.max_residual(check);
        if r > limit {
            failures.push(format!("{} residual {r:.2e} > {limit:.0e}", check.name()));
        }
    }
    if identities.min_dissipation() < -1e-12 {
        failures.push(format!("negative dissipation {:.2e}", identities.min_dissipation()));
    }

    let data = config.problem()?;
    let mut study = ConstantStudy::new(config.ks, config.kt, alpha, config.seed);
    study.time_data = Some(data.clone());
    let constants = constant_estimates(&study)?;
    write_file(&config.output, "constants.csv", &constants.to_csv()?)?;
    if !constants.coercive() {
        failures.push(format!("penalty {alpha} is not coercive"));
    }
    for name in constants.measured() {
        if !constants.bounded(name) {
            failures.push(format!("constant '{name}' grows under refinement"));
        }
    }

    if constants.coercive() {
        let unforced = data.unforced();
        let run = simulate(config, &d, &unforced)?;
        let report = energy_inequality_report(&d, &run, &unforced)?;
        write_file(&config.output, "energy.csv", &report.to_csv()?)?;
        let ledger = run.ledger.iter().map(|r| r.cumulative_residual.abs().max(r.slab_residual)).fold(0.0, f64::max);
        if ledger > 1e-8 {
            failures.push(format!("energy identity residual {ledger:.2e}"));
        }
        if !report.level_norms_non_increasing(0.0) {
            failures.push("unforced velocity norm increased".into());
        }
        if report.min_relative_slack() < -1e-8 {
            failures.push(format!("energy inequality slack {:.2e}", report.min_relative_slack()));
        }
    }

    if failures.is_empty() {
        Ok(format!("all checks passed ({} identity rows, {} constant levels)", identities.rows.len(), constants.levels.len()))
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}

/// Bump test function used for consistency residuals.
pub fn consistency_test_function(d: &Discretization) -> crate::Result<TensorTestFunction> {
    let mode = TestMode {
        time: Box::new(|t: f64| (std::f64::consts::PI * t).cos()),
        space: Box::new(CurlBump::new([0.4, 0.55], 0.3, 1.0)),
    };
    TensorTestFunction::new(vec![mode], d)
}

fn merge_studies(a: RefinementStudy, b: RefinementStudy) -> crate::Result<RefinementStudy> {
    let mut names = a.metric_names.clone();
    names.extend(b.metric_names.iter().cloned());
    let levels = a
        .levels
        .into_iter()
        .zip(b.levels)
        .map(|(x, y)| {
            let mut values = x.values;
            values.extend(y.values);
            LevelRecord { values, ..x }
        })
        .collect();
    RefinementStudy::new(names, levels)
}

/// Joint refinement starting from the configured builtin mesh and slab
/// count; writes `convergence.csv` with errors, Cauchy increments,
/// consistency residuals and fitted orders.
pub fn cmd_convergence(config: &RunConfig, levels: usize) -> CliResult<String> {
    config.validate()?;
    if levels < 3 {
        return Err(CliError::Config(format!("a convergence study needs at least 3 levels, got {levels}")));
    }
    let MeshSource::Builtin(base_n) = config.mesh else {
        return Err(CliError::Config("convergence studies refine the builtin mesh; use mesh = builtin:<n>".into()));
    };
    let data = config.problem()?;
    if data.exact.is_none() {
        return Err(CliError::Config(format!("benchmark '{}' has no exact solution", data.name)));
    }
    prepare_output(&config.output)?;
    let study = ConvergenceStudy {
        data,
        config: config.solver_config(),
        ks: config.ks,
        kt: config.kt,
        base_n,
        base_slabs: config.slabs,
        levels,
    };
    let runs = study.solve_levels()?;
    let errors = convergence_metrics(&study.data, &runs)?;
    let test = consistency_test_function(&runs[0].discretization)?;
    let consistency = consistency_residuals(&study.data, &runs, &test, study.config.penalty(study.ks))?;
    let csv = merge_studies(errors, consistency)?.to_csv()?;
    write_file(&config.output, "convergence.csv", &csv)?;
    Ok(csv)
}

/// Mesh statistics as `key = value` lines.
pub fn cmd_mesh_info(config: &RunConfig) -> CliResult<String> {
    let mesh = config.build_mesh()?;
    let faces = build_face_topology(&mesh)?;
    let m = mesh_metrics(&mesh, &faces);
    let mut s = String::new();
    let _ = writeln!(s, "mesh = {}", config.mesh);
    let _ = writeln!(s, "elements = {}", m.n_elements);
    let _ = writeln!(s, "vertices = {}", m.n_vertices);
    let _ = writeln!(s, "interior_faces = {}", m.n_interior_faces);
    let _ = writeln!(s, "boundary_faces = {}", m.n_boundary_faces);
    let _ = writeln!(s, "h = {}", fmt(m.h));
    let _ = writeln!(s, "h_min = {}", fmt(m.h_min));
    let _ = writeln!(s, "shape_regularity = {}", fmt(m.shape_regularity));
    let _ = writeln!(s, "quasi_uniformity = {}", fmt(m.quasi_uniformity));
    let _ = writeln!(s, "face_lower = {}", fmt(m.face_lower));
    let _ = writeln!(s, "face_upper = {}", fmt(m.face_upper));
    let _ = writeln!(s, "area = {}", fmt(m.area));
    let _ = writeln!(s, "skeleton_length = {}", fmt(m.skeleton_length));
    Ok(s)
}

#[derive(Debug, Parser)]
#[command(name = "sthdg", version, about = "Space-time HDG solver for the 2D incompressible Navier-Stokes equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Refinement levels of `convergence`.
    #[arg(long, global = true, default_value_t = 3)]
    pub levels: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the configured problem and write ledgers and VTK snapshots.
    Run,
    /// Run identity, constant and energy checks.
    Verify,
    /// Refinement study with errors, Cauchy increments and consistency residuals.
    Convergence,
    /// Print mesh statistics.
    MeshInfo,
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(options: &Options) -> crate::Result<RunConfig> {
    let mut config = match &options.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    if let Some(out) = &options.out {
        config.output = out.clone();
    }
    Ok(config)
}

pub fn execute(cli: &Cli) -> CliResult<String> {
    let config = resolve_config(&cli.options)?;
    match cli.command {
        Command::Run => cmd_run(&config),
        Command::Verify => cmd_verify(&config),
        Command::Convergence => cmd_convergence(&config, cli.options.levels),
        Command::MeshInfo => cmd_mesh_info(&config),
    }
}

/// Caps the rayon pool at `STHDG_THREADS` workers when the variable is set.
pub fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("STHDG_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("STHDG_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Config("STHDG_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

/// Entry point of the binary: prints the command output to stdout, errors
/// to stderr, and maps failures to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| execute(&cli)) {
        Ok(out) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sthdg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
