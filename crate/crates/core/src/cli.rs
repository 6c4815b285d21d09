//! Batch runner behind the `hjselect` binary: TOML config in, CSV tables and a JSON report out.

use crate::adjoint::{approximate_mather, check_identity_i, check_identity_ii, test_function_dictionary, MatherOptions, DICTIONARY_VERSION};
use crate::discount::GeneralizedDiscount;
use crate::error::{Error, Result};
use crate::ergodic::{
    double_well_case_transform, estimate_ergodic_constant, default_lambda0, sweep_effective_hamiltonian,
    vanishing_discount_limit, WellCase,
};
use crate::grid::{GridFunction, TorusGrid};
use crate::hamiltonian::{HamiltonianModel, Polynomial, FLAT_DEFAULT_MOMENTUM};
use crate::potential::Potential;
use crate::scheme::Scheme;
use crate::solver::{dissipation_bound, generalized_residual_field, solve_generalized, SolverConfig};
use crate::subsolution::{analytic_flat_limit, flat_discounted_construction, maximal_subsolution, viscosity_residuals};
use crate::verify::{ClaimResult, Verifier, VerifySettings};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CONFIG_SCHEMA: &str = "hjselect-config-v1";
pub const REPORT_SCHEMA: &str = "report_v1";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    HbarSweep,
    Limit,
    Adjoint,
    Maxsub,
    FlatLimit,
    FlatLemma61,
    VerifyAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::HbarSweep => "hbar-sweep",
            Command::Limit => "limit",
            Command::Adjoint => "adjoint",
            Command::Maxsub => "maxsub",
            Command::FlatLimit => "flat-limit",
            Command::FlatLemma61 => "flat-lemma61",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hjselect", version, about = "Discounted Hamilton-Jacobi experiments on the circle")]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for commands that fan out.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    TriangularBump {
        width: f64,
    },
    Tent {
        half_width: f64,
        peak: f64,
    },
    Sampled {
        values: Vec<f64>,
    },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialSpec::Zero => Ok(Potential::Zero),
            PotentialSpec::TriangularBump { width } => Potential::triangular_bump(*width),
            PotentialSpec::Tent { half_width, peak } => Potential::tent(*half_width, *peak),
            PotentialSpec::Sampled { values } => Potential::sampled(values.clone()),
        }
    }
}

fn default_flat_momentum() -> f64 {
    FLAT_DEFAULT_MOMENTUM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    DoubleWell {
        #[serde(default)]
        momentum: f64,
        #[serde(default)]
        potential: PotentialSpec,
    },
    Flat {
        #[serde(default = "default_flat_momentum")]
        momentum: f64,
        #[serde(default)]
        potential: PotentialSpec,
    },
    Smooth {
        /// Coefficients of `K(t)`, lowest degree first.
        kinetic: Vec<f64>,
        #[serde(default)]
        momentum: f64,
        #[serde(default)]
        potential: PotentialSpec,
    },
    Multiwell {
        profile: Vec<f64>,
        #[serde(default)]
        momentum: f64,
        #[serde(default)]
        potential: PotentialSpec,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<HamiltonianModel> {
        match self {
            ModelSpec::DoubleWell { momentum, potential } => Ok(HamiltonianModel::double_well(*momentum, potential.build()?)),
            ModelSpec::Flat { momentum, potential } => Ok(HamiltonianModel::flat(potential.build()?).with_momentum(*momentum)),
            ModelSpec::Smooth { kinetic, momentum, potential } => {
                HamiltonianModel::smooth_quasi_convex(Polynomial::new(kinetic.clone())?, potential.build()?, *momentum)
            }
            ModelSpec::Multiwell { profile, momentum, potential } => {
                HamiltonianModel::multiwell(Polynomial::new(profile.clone())?, potential.build()?, *momentum)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n_points: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscountSection {
    /// Discount of a single solve.
    pub epsilon: f64,
    pub ladder: Vec<f64>,
    /// Ergodic constant; estimated from the ladder when absent.
    pub hbar: Option<f64>,
}

impl Default for DiscountSection {
    fn default() -> Self {
        Self { epsilon: 1e-2, ladder: vec![0.064, 0.032, 0.016, 0.008, 0.004, 0.002, 0.001], hbar: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    Godunov,
    LaxFriedrichs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub scheme: SchemeName,
    /// Lax-Friedrichs dissipation; the slope bound of the model when absent.
    pub sigma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed viscosity for single solves.
    pub eta: f64,
    pub continuation_start: f64,
    pub p_cap: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            scheme: SchemeName::Godunov,
            sigma: None,
            tol: d.tol,
            max_iter: d.max_iter,
            eta: d.eta,
            continuation_start: d.continuation_start,
            p_cap: d.p_cap,
        }
    }
}

impl SolverSection {
    pub fn build(&self, gd: &GeneralizedDiscount, grid: TorusGrid) -> Result<SolverConfig> {
        let scheme = match self.scheme {
            SchemeName::Godunov => Scheme::Godunov,
            SchemeName::LaxFriedrichs => Scheme::LaxFriedrichs {
                sigma: self.sigma.unwrap_or_else(|| dissipation_bound(gd, grid, self.p_cap)),
            },
        };
        let cfg = SolverConfig {
            scheme,
            tol: self.tol,
            max_iter: self.max_iter,
            eta: self.eta,
            continuation_start: self.continuation_start,
            p_cap: self.p_cap,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub momenta: Vec<f64>,
    pub linspace: Option<Linspace>,
}

impl SweepSection {
    pub fn momenta(&self) -> Result<Vec<f64>> {
        let mut out = self.momenta.clone();
        if let Some(l) = &self.linspace {
            if l.count < 2 || !(l.stop > l.start) {
                return Err(Error::Config("sweep.linspace needs count >= 2 and stop > start".into()));
            }
            out.extend((0..l.count).map(|k| l.start + (l.stop - l.start) * k as f64 / (l.count - 1) as f64));
        }
        if out.is_empty() {
            return Err(Error::Config("sweep needs momenta or a linspace".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// `f(r) = r - hbar`, `G = H`.
    #[default]
    Direct,
    Exponential,
    WellInner,
    WellOuter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdjointSection {
    pub x0: f64,
    pub pair: PairKind,
    pub lambda0: Option<f64>,
    pub eta_multiples: Vec<f64>,
    pub tol: f64,
}

impl Default for AdjointSection {
    fn default() -> Self {
        let d = MatherOptions::default();
        Self { x0: 0.5, pair: PairKind::Direct, lambda0: None, eta_multiples: d.eta_multiples, tol: d.tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxsubSection {
    pub vertices: Vec<f64>,
}

impl Default for MaxsubSection {
    fn default() -> Self {
        Self { vertices: vec![0.3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlatSection {
    pub width: f64,
    /// Discount of the explicit construction.
    pub epsilon: f64,
}

impl Default for FlatSection {
    fn default() -> Self {
        Self { width: 0.1, epsilon: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Check of a named run value, e.g. `{ value = "hbar", equals = 1.0, tol = 0.02 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    pub value: String,
    pub equals: Option<f64>,
    #[serde(default)]
    pub tol: f64,
    pub at_most: Option<f64>,
    pub at_least: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    /// Optional; must agree with the command line when present.
    pub command: Option<Command>,
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub discount: DiscountSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub adjoint: AdjointSection,
    #[serde(default)]
    pub maxsub: MaxsubSection,
    #[serde(default)]
    pub flat: FlatSection,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, rename = "assert")]
    pub assertions: Vec<Assertion>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!("schema must be \"{CONFIG_SCHEMA}\", found \"{}\"", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks everything that does not need a solve.
    pub fn validate_for(&self, command: Command) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        if let Some(c) = self.command {
            if c != command {
                return Err(Error::Config(format!("config is for `{}` but `{}` was requested", c.name(), command.name())));
            }
        }
        let needs_model = matches!(command, Command::Solve | Command::HbarSweep | Command::Limit | Command::Adjoint | Command::Maxsub);
        if needs_model {
            self.model.as_ref().ok_or_else(|| Error::Config("this command needs a [model] section".into()))?.build().map_err(cfg_err)?;
        }
        TorusGrid::new(self.grid.n_points).map_err(cfg_err)?;
        let d = &self.discount;
        if !(d.epsilon > 0.0) {
            return Err(Error::Config("discount.epsilon must be positive".into()));
        }
        if d.ladder.len() < 3 || d.ladder.windows(2).any(|w| !(w[1] < w[0])) || d.ladder.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("discount.ladder needs three or more positive, strictly decreasing entries".into()));
        }
        if command == Command::HbarSweep {
            self.sweep.momenta()?;
        }
        if command == Command::Maxsub && self.maxsub.vertices.is_empty() {
            return Err(Error::Config("maxsub.vertices must be nonempty".into()));
        }
        if !(self.flat.width > 0.0 && self.flat.width < 0.25) || !(self.flat.epsilon > 0.0) {
            return Err(Error::Config("flat.width must lie in (0, 1/4) and flat.epsilon be positive".into()));
        }
        if !(0.0..1.0).contains(&self.adjoint.x0) || self.adjoint.eta_multiples.len() < 2 {
            return Err(Error::Config("adjoint.x0 must lie in [0, 1) and eta_multiples need two entries".into()));
        }
        for a in &self.assertions {
            if a.equals.is_none() && a.at_most.is_none() && a.at_least.is_none() {
                return Err(Error::Config(format!("assertion on `{}` has no bound", a.value)));
            }
        }
        self.verify.validate()?;
        Ok(())
    }
}

/// A CSV file produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(file: &str, header: &[&str]) -> Self {
        Self { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(&self.file)).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_number(v))).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e6)`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_nan() {
        "NaN".into()
    } else if (1e-4..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub package: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: Command,
    pub passed: bool,
    pub values: BTreeMap<String, f64>,
    pub claims: Vec<ClaimResult>,
    pub artifacts: Vec<String>,
    pub environment: Environment,
    pub config: ExperimentConfig,
}

/// Result of a command before assertions are applied.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub values: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub claims: Vec<ClaimResult>,
}

impl CommandOutput {
    fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }
}

fn model(cfg: &ExperimentConfig) -> Result<HamiltonianModel> {
    cfg.model.as_ref().ok_or_else(|| Error::Config("missing [model]".into()))?.build()
}

fn hbar_of(cfg: &ExperimentConfig, h: &HamiltonianModel, grid: TorusGrid, out: &mut CommandOutput) -> Result<f64> {
    if let Some(v) = cfg.discount.hbar {
        return Ok(v);
    }
    let gd = GeneralizedDiscount::from_hamiltonian(h, 0.0);
    let est = estimate_ergodic_constant(h, grid, &cfg.discount.ladder, &cfg.solver.build(&gd, grid)?)?;
    out.value("extrapolation_gap", est.extrapolation_gap);
    Ok(est.hbar)
}

fn run_solve(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let h = model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let gd = GeneralizedDiscount::from_hamiltonian(&h, 0.0);
    let scfg = cfg.solver.build(&gd, grid)?;
    let eps = cfg.discount.epsilon;
    let sol = solve_generalized(&gd, eps, grid, &scfg)?;
    let res = generalized_residual_field(&sol.u, &gd, eps, &scfg);
    let mut out = CommandOutput::default();
    let mut t = Table::new("solve.csv", &["x (grid node)", "u (discounted solution)", "-eps*u (scaled value)", "residual (scheme)"]);
    for i in 0..grid.len() {
        t.rows.push(vec![grid.node(i), sol.u.at(i), sol.scaled_value(i), res.at(i)]);
    }
    out.value("epsilon", eps);
    out.value("residual", sol.residual);
    out.value("iterations", sol.iterations as f64);
    out.value("lipschitz", sol.lipschitz);
    out.value("scaled_value_at_0", sol.scaled_value(0));
    out.value("u_min", sol.u.min());
    out.value("u_max", sol.u.max());
    out.tables.push(t);
    Ok(out)
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let base = model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let scfg = cfg.solver.build(&GeneralizedDiscount::from_hamiltonian(&base, 0.0), grid)?;
    let momenta = cfg.sweep.momenta()?;
    let points = sweep_effective_hamiltonian(|p| base.with_momentum(p), &momenta, grid, &cfg.discount.ladder, &scfg);
    let mut out = CommandOutput::default();
    let mut t = Table::new("hbar_sweep.csv", &["P (momentum)", "hbar (effective Hamiltonian)", "gap (extrapolation)", "ok (1 if solved)"]);
    let mut failures = 0usize;
    for p in &points {
        if p.error.is_some() {
            failures += 1;
        }
        t.rows.push(vec![p.momentum, p.hbar.unwrap_or(f64::NAN), p.extrapolation_gap.unwrap_or(f64::NAN), if p.error.is_some() { 0.0 } else { 1.0 }]);
    }
    let hbars: Vec<f64> = points.iter().filter_map(|p| p.hbar).collect();
    out.value("points", points.len() as f64);
    out.value("failures", failures as f64);
    if !hbars.is_empty() {
        out.value("hbar_min", hbars.iter().cloned().fold(f64::INFINITY, f64::min));
        out.value("hbar_max", hbars.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    out.tables.push(t);
    out.claims.push(ClaimResult::custom(
        1,
        "every sweep point solved".into(),
        failures == 0,
        failures as f64,
        0.0,
        points.iter().find_map(|p| p.error.clone()),
    ));
    Ok(out)
}

fn run_limit(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let h = model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let mut out = CommandOutput::default();
    let hbar = hbar_of(cfg, &h, grid, &mut out)?;
    let scfg = cfg.solver.build(&GeneralizedDiscount::from_hamiltonian(&h, 0.0), grid)?;
    let study = vanishing_discount_limit(&h, hbar, grid, &cfg.discount.ladder, &scfg)?;
    let mut header = vec!["x (grid node)".to_string()];
    header.extend(study.eps_seq.iter().map(|e| format!("v eps={} (normalized solution)", format_number(*e))));
    let mut series = Table { file: "limit_series.csv".into(), header, rows: Vec::new() };
    for i in 0..grid.len() {
        let mut row = vec![grid.node(i)];
        row.extend(study.v_eps.iter().map(|v| v.at(i)));
        series.rows.push(row);
    }
    let mut gaps = Table::new("limit_gaps.csv", &["eps (coarse discount)", "eps/2 (fine discount)", "gap (max-norm Cauchy difference)"]);
    for (k, g) in study.cauchy_gaps.iter().enumerate() {
        gaps.rows.push(vec![study.eps_seq[k], study.eps_seq[k + 1], *g]);
    }
    out.value("hbar", hbar);
    out.value("final_gap", *study.cauchy_gaps.last().unwrap_or(&0.0));
    out.value("max_abs_v", study.v_eps.iter().flat_map(|v| v.values().iter().map(|x| x.abs())).fold(0.0, f64::max));
    out.value("u0_min", study.u0.min());
    out.value("u0_max", study.u0.max());
    out.tables.push(series);
    out.tables.push(gaps);
    Ok(out)
}

fn adjoint_pair(cfg: &ExperimentConfig, h: &HamiltonianModel, hbar: f64, grid: TorusGrid) -> Result<GeneralizedDiscount> {
    let spec = cfg.model.as_ref().expect("validated");
    let well = |case| match spec {
        ModelSpec::DoubleWell { momentum, potential } => double_well_case_transform(*momentum, hbar, &potential.build()?, case),
        _ => Err(Error::Config("well_inner and well_outer pairs need a double_well model".into())),
    };
    match cfg.adjoint.pair {
        PairKind::Direct => Ok(GeneralizedDiscount::from_hamiltonian(h, hbar)),
        PairKind::Exponential => {
            let lambda0 = match cfg.adjoint.lambda0 {
                Some(l) => l,
                None => default_lambda0(h, grid, cfg.solver.p_cap)?,
            };
            GeneralizedDiscount::exponential(h, lambda0, hbar)
        }
        PairKind::WellInner => well(WellCase::Inner),
        PairKind::WellOuter => well(WellCase::Outer),
    }
}

fn run_adjoint(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let h = model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let mut out = CommandOutput::default();
    let hbar = hbar_of(cfg, &h, grid, &mut out)?;
    let gd = adjoint_pair(cfg, &h, hbar, grid)?;
    let opts = MatherOptions { solver: cfg.solver.build(&gd, grid)?, eta_multiples: cfg.adjoint.eta_multiples.clone(), tol: cfg.adjoint.tol };
    let x0 = grid.nearest(cfg.adjoint.x0);
    let m = approximate_mather(&gd, x0, &cfg.discount.ladder, grid, &opts)?;
    let dict = test_function_dictionary();
    let labels: Vec<String> = dict.iter().map(|t| t.label()).collect();
    let mut header = vec!["eps (discount)".to_string(), "eta (viscosity)".to_string(), "normalization (weighted adjoint mass)".to_string()];
    header.extend(labels.iter().map(|l| format!("{l} (pairing {DICTIONARY_VERSION})")));
    let mut table = Table { file: "adjoint_pairings.csv".into(), header, rows: Vec::new() };
    for row in &m.table {
        let mut r = vec![row.epsilon, row.eta, row.mass_weighted];
        r.extend(&row.pairings);
        table.rows.push(r);
    }
    let mut atoms = Table::new("adjoint_measure.csv", &["x (grid node)", "p (flux slope)", "weight (h*theta)", "velocity (D_pG)", "theta (adjoint density)"]);
    for a in &m.measure.atoms {
        atoms.rows.push(vec![a.x, a.p, a.weight, a.velocity, a.weight / grid.spacing()]);
    }
    let phi = GridFunction::from_fn(grid, |x| (2.0 * PI * x).sin());
    out.value("hbar", hbar);
    out.value("identity_first", check_identity_i(&m.measure, &gd));
    out.value("identity_second", check_identity_ii(&m.measure, &phi));
    out.value("mass_defect", m.mass_defect);
    out.value("cauchy_gap", m.cauchy_gap);
    out.value("min_theta", m.measure.atoms.iter().map(|a| a.weight).fold(f64::INFINITY, f64::min));
    out.value("total_mass", m.measure.total_mass);
    out.tables.push(table);
    out.tables.push(atoms);
    Ok(out)
}

fn run_maxsub(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let h = model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let mut out = CommandOutput::default();
    let level = hbar_of(cfg, &h, grid, &mut out)?;
    let p = h.momentum();
    let mut header = vec!["x (grid node)".to_string()];
    let mut columns = Vec::new();
    let (mut peak, mut sub_max, mut off_max) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &y in &cfg.maxsub.vertices {
        let m = maximal_subsolution(&h, p, level, y, grid)?;
        let r = viscosity_residuals(&m.s, &h, p, level);
        let j = grid.nearest(y);
        peak = peak.min(r.sup.at(j));
        sub_max = sub_max.max(r.max_sub());
        off_max = off_max.max(r.max_sup_excluding(&[j]));
        let y = format_number(m.vertex);
        header.push(format!("S y={y} (maximal subsolution)"));
        header.push(format!("sub y={y} (subsolution residual)"));
        header.push(format!("super y={y} (supersolution residual)"));
        columns.extend([m.s, r.sub, r.sup]);
    }
    let mut t = Table { file: "maxsub.csv".into(), header, rows: Vec::new() };
    for i in 0..grid.len() {
        let mut row = vec![grid.node(i)];
        row.extend(columns.iter().map(|c| c.at(i)));
        t.rows.push(row);
    }
    out.value("level", level);
    out.value("super_residual_at_vertex", peak);
    out.value("max_sub_residual", sub_max);
    out.value("max_super_residual_off_vertex", off_max);
    out.tables.push(t);
    Ok(out)
}

fn flat_model(cfg: &ExperimentConfig) -> Result<HamiltonianModel> {
    Ok(HamiltonianModel::flat(Potential::triangular_bump(cfg.flat.width)?))
}

fn run_flat_limit(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let h = flat_model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let scfg = cfg.solver.build(&GeneralizedDiscount::from_hamiltonian(&h, 0.0), grid)?;
    let study = vanishing_discount_limit(&h, 1.0, grid, &cfg.discount.ladder, &scfg)?;
    let (u0, b) = analytic_flat_limit(cfg.flat.width, grid)?;
    let built = flat_discounted_construction(cfg.flat.width, cfg.flat.epsilon, grid)?;
    let mut t = Table::new(
        "flat_limit.csv",
        &["x (grid node)", "u0 (analytic limit)", "v (solver, finest discount)", "v (explicit construction)"],
    );
    for i in 0..grid.len() {
        t.rows.push(vec![grid.node(i), u0.at(i), study.u0.at(i), built.v.at(i)]);
    }
    let mut out = CommandOutput::default();
    out.value("distance_solver_analytic", study.u0.max_abs_diff(&u0));
    out.value("distance_construction_analytic", built.v.max_abs_diff(&u0));
    out.value("b", b);
    out.value("construction_a", built.a);
    out.value("construction_b", built.b);
    out.value("finest_eps", *study.eps_seq.last().expect("validated"));
    out.tables.push(t);
    Ok(out)
}

fn run_flat_hbar(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let h = flat_model(cfg)?;
    let grid = TorusGrid::new(cfg.grid.n_points)?;
    let scfg = cfg.solver.build(&GeneralizedDiscount::from_hamiltonian(&h, 0.0), grid)?;
    let est = estimate_ergodic_constant(&h, grid, &cfg.discount.ladder, &scfg)?;
    let mut t = Table::new("flat_hbar.csv", &["eps (discount)", "-eps*u(0) (scaled value)"]);
    for (e, y) in &est.eps_ladder {
        t.rows.push(vec![*e, *y]);
    }
    let mut out = CommandOutput::default();
    out.value("hbar", est.hbar);
    out.value("extrapolation_gap", est.extrapolation_gap);
    out.tables.push(t);
    Ok(out)
}

fn run_verify(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<CommandOutput> {
    use rayon::prelude::*;
    let verifier = Verifier::new(cfg.verify.clone())?;
    let claims: Vec<ClaimResult> = pool.install(|| (1..=crate::verify::CLAIM_COUNT).into_par_iter().map(|id| verifier.run(id)).collect());
    let mut out = CommandOutput::default();
    let mut t = Table::new("verify.csv", &["id (criterion)", "passed (1 or 0)", "measured (value)", "tolerance (threshold)"]);
    for c in &claims {
        t.rows.push(vec![c.id as f64, if c.passed { 1.0 } else { 0.0 }, c.measured, c.tolerance]);
    }
    out.value("passed", claims.iter().filter(|c| c.passed).count() as f64);
    out.value("total", claims.len() as f64);
    out.tables.push(t);
    out.claims = claims;
    Ok(out)
}

/// Runs one command; returns the output with assertion results appended to its claims.
pub fn execute(command: Command, cfg: &ExperimentConfig, jobs: usize) -> Result<CommandOutput> {
    cfg.validate_for(command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut out = match command {
        Command::Solve => run_solve(cfg),
        Command::HbarSweep => pool.install(|| run_sweep(cfg)),
        Command::Limit => run_limit(cfg),
        Command::Adjoint => run_adjoint(cfg),
        Command::Maxsub => run_maxsub(cfg),
        Command::FlatLimit => run_flat_limit(cfg),
        Command::FlatLemma61 => run_flat_hbar(cfg),
        Command::VerifyAll => run_verify(cfg, &pool),
    }?;
    let base = out.claims.len() as u32;
    for (k, a) in cfg.assertions.iter().enumerate() {
        out.claims.push(evaluate_assertion(base + k as u32 + 1, a, &out.values));
    }
    Ok(out)
}

fn evaluate_assertion(id: u32, a: &Assertion, values: &BTreeMap<String, f64>) -> ClaimResult {
    let name = format!("assert {}", a.value);
    let Some(&v) = values.get(&a.value) else {
        return ClaimResult::custom(id, name, false, f64::NAN, f64::NAN, Some(format!("no value named `{}`", a.value)));
    };
    let mut ok = true;
    let mut tol = f64::NAN;
    if let Some(e) = a.equals {
        ok &= (v - e).abs() <= a.tol;
        tol = a.tol;
    }
    if let Some(m) = a.at_most {
        ok &= v <= m;
        tol = m;
    }
    if let Some(m) = a.at_least {
        ok &= v >= m;
        tol = m;
    }
    ClaimResult::custom(id, name, ok, v, tol, None)
}

/// Writes tables, `report.json` and `timings.json`; returns the report.
pub fn write_outputs(command: Command, cfg: &ExperimentConfig, out: &CommandOutput, dir: &Path, elapsed_s: f64) -> Result<RunReport> {
    std::fs::create_dir_all(dir)?;
    for t in &out.tables {
        t.write(dir)?;
    }
    let report = RunReport {
        schema: REPORT_SCHEMA,
        command,
        passed: out.claims.iter().all(|c| c.passed),
        values: out.values.clone(),
        claims: out.claims.clone(),
        artifacts: out.tables.iter().map(|t| t.file.clone()).collect(),
        environment: Environment::current(),
        config: cfg.clone(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(dir.join("report.json"), json + "\n")?;
    let mut timings = serde_json::Map::new();
    timings.insert("total_s".into(), elapsed_s.into());
    for c in &out.claims {
        timings.insert(format!("claim_{}_s", c.id), c.runtime.as_secs_f64().into());
    }
    let text = serde_json::to_string_pretty(&timings).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(dir.join("timings.json"), text + "\n")?;
    Ok(report)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let start = Instant::now();
    let cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hjselect: {e}");
            return EXIT_CONFIG;
        }
    };
    let dir = cli.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let out = match execute(cli.command, &cfg, cli.jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("hjselect: {}: {e}", cli.command.name());
            return exit_code(&e);
        }
    };
    let report = match write_outputs(cli.command, &cfg, &out, &dir, start.elapsed().as_secs_f64()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("hjselect: writing {}: {e}", dir.display());
            return EXIT_CONFIG;
        }
    };
    for c in &report.claims {
        println!("{}", c.summary_line());
    }
    if report.passed {
        EXIT_OK
    } else {
        let failed: Vec<String> = report.claims.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
        eprintln!("hjselect: failing claim ids: {}", failed.join(", "));
        EXIT_NUMERICAL
    }
}
