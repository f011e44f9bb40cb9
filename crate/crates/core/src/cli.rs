//! Command-line front end. Every subcommand reads a [`RunConfig`] (flags over
//! an optional TOML file with the same keys), writes its outputs atomically
//! under `--out`, and maps the outcome to an exit status:
//! 0 success, 1 tolerance violation, 2 invalid configuration, 3 IO.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::backlund::{bt_residual, bt_residual_on, integrate_bt, BtSystem, IntegrateOptions, Sheet};
use crate::case::{congruence_params, derive_case, CaseConfig, CaseId, IndexFlag};
use crate::error::{Error, Result};
use crate::field::{AnalyticSolution, FieldSource, Grid, Operand, ScalarField};
use crate::geometry::{
    builtin_surface, congruence_check, detect_index, numerical_curvature, transform_surface, BuiltinSurface,
    CongruenceReport, SurfaceMesh,
};
use crate::io::{read_field_csv, write_field_csv, write_json, write_obj, write_ply};
use crate::pde::{equation_residual, Derivatives};
use crate::seeds::{example_solution, kink_seed, seed_solution, SeedKind, SeedSpec};
use crate::superpose::{bianchi_lattice, integrate_level_one, Lattice, SuperposeOptions};

pub const DEFAULT_GRID: &str = "-2:2:0.01,-2:2:0.01";
pub const DEFAULT_TOL_PDE: f64 = 1e-3;
pub const DEFAULT_TOL_BT: f64 = 1e-3;
pub const DEFAULT_TOL_CURVATURE: f64 = 5e-3;
/// Cells kept clear of invalid nodes when residual maxima are taken.
pub const DEFAULT_MARGIN: usize = 3;

#[derive(Parser, Debug)]
#[command(name = "blc-lab", version, about = "Backlund transformations, superposition lattices and surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a seed solution (zero, kink or a named example) to seed.csv.
    Seed(RunArgs),
    /// Integrate the Backlund transformation from the seed, once per --phi.
    Transform(RunArgs),
    /// Build the superposition lattice over the --phi list.
    Superpose(RunArgs),
    /// Export a built-in surface and its transformation chain over --phi.
    Surface(RunArgs),
    /// Build the lattice and check every node and arrow against tolerances.
    Verify(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// TOML file with the same keys as the long flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunConfig,
}

/// Every knob of a run. Keys in a TOML config file are the flag names.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// Case number 1..6 (alternative to the four --case-* flags).
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long, allow_negative_numbers = true)]
    pub case_delta: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub case_epsilon: Option<i32>,
    #[arg(long)]
    pub case_r: Option<i32>,
    #[arg(long)]
    pub case_s: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<i32>,
    /// Transformation parameters; repeat the flag or separate with commas.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phi: Vec<f64>,
    /// `x1min:x1max:h,x2min:x2max:h`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// zero, kink, example2-alpha, example4-alpha, example4-alpha1, example4-alpha2.
    #[arg(long)]
    pub seed: Option<String>,
    /// Parameter of a kink or example seed (defaults to the first --phi for `seed`).
    #[arg(long, allow_negative_numbers = true)]
    pub seed_phi: Option<f64>,
    /// Integration constant of kinks and closed-form level-one fields.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Constant of the second closed-form elliptic solution.
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    /// Starting node of the integration, `x1,x2`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p0: Option<[f64; 2]>,
    /// Value of each transformed field at p0, one per --phi.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha_prime0: Vec<f64>,
    /// Lattice depth (defaults to the number of parameters).
    #[arg(long)]
    pub depth: Option<usize>,
    /// RK4 steps per grid spacing.
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Seed field as CSV instead of a named seed.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// timelike-k1 or timelike-kminus1.
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write PLY meshes.
    #[arg(long)]
    pub ply: bool,
    #[arg(long)]
    pub tol_pde: Option<f64>,
    #[arg(long)]
    pub tol_bt: Option<f64>,
    #[arg(long)]
    pub tol_curvature: Option<f64>,
    /// Band excluded around singular sets of the superposition formulas.
    #[arg(long)]
    pub guard: Option<f64>,
    /// Cells kept clear of invalid nodes in residual statistics.
    #[arg(long)]
    pub margin: Option<usize>,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("{a}: {e}"))?,
            b.parse().map_err(|e| format!("{b}: {e}"))?,
        ]),
        _ => Err(format!("expected x1,x2, got '{s}'")),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<RunConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text).map_err(|msg| Error::Parse {
            path: path.display().to_string(),
            msg,
        })
    }

    /// `self` (flags) over `file`.
    pub fn over(self, file: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: self.$f.or(file.$f),)* ..Default::default() } };
        }
        let mut out = pick!(
            case, case_delta, case_epsilon, case_r, case_s, tau, grid, seed, seed_phi, c, c2, p0, depth, substeps,
            input, surface, out, tol_pde, tol_bt, tol_curvature, guard, margin
        );
        out.phi = if self.phi.is_empty() { file.phi } else { self.phi };
        out.alpha_prime0 = if self.alpha_prime0.is_empty() {
            file.alpha_prime0
        } else {
            self.alpha_prime0
        };
        out.ply = self.ply || file.ply;
        out
    }

    /// Validate everything and fill in defaults.
    pub fn resolve(&self, cmd: CommandKind) -> Result<Resolved> {
        let seed_kind = match &self.seed {
            Some(s) => s.parse::<SeedKind>()?,
            None if cmd == CommandKind::Seed && (self.seed_phi.is_some() || !self.phi.is_empty()) => SeedKind::Kink,
            None => SeedKind::Zero,
        };
        let surface = self.surface.as_deref().map(str::parse::<BuiltinSurface>).transpose()?;
        let pinned_tau = match (surface, seed_kind.pinned_case()) {
            (Some(s), _) => s.case().tau as i32,
            (None, Some(CaseId::Four)) => -1,
            _ => 1,
        };
        let tau = self.tau.unwrap_or(pinned_tau);
        let tuple = [self.case_delta, self.case_epsilon, self.case_r, self.case_s];
        let case = match (self.case, tuple) {
            (Some(k), [None, None, None, None]) => {
                let (d, e, r, s) = CaseId::from_index(k)?.tuple();
                derive_case(d as i32, e as i32, r as i32, s as i32, tau)?
            }
            (k, [Some(d), Some(e), Some(r), Some(s)]) => {
                let c = derive_case(d, e, r, s, tau)?;
                if k.is_some_and(|k| k != c.id.index()) {
                    return Err(Error::Config(format!("--case {} disagrees with the (delta, epsilon, r, s) flags", k.unwrap())));
                }
                c
            }
            (None, [None, None, None, None]) => match (surface, seed_kind.pinned_case()) {
                (Some(s), _) => s.case(),
                (None, Some(id)) => derive_case_id(id, tau)?,
                (None, None) => return Err(Error::Config("no case given: use --case or the four --case-* flags".into())),
            },
            _ => return Err(Error::Config("--case-delta, --case-epsilon, --case-r and --case-s go together".into())),
        };
        if let Some(s) = surface {
            if s.case() != case {
                return Err(Error::Config(format!("surface {s} belongs to case {} (tau={})", s.case().id, s.case().tau)));
            }
        }
        for &p in &self.phi {
            congruence_params(&case, p)?;
        }
        let grid = Grid::parse(self.grid.as_deref().unwrap_or(DEFAULT_GRID))?;
        let p0 = self.p0.map_or((0.0, 0.0), |p| (p[0], p[1]));
        if !self.alpha_prime0.is_empty() && self.alpha_prime0.len() != self.phi.len() {
            return Err(Error::Config(format!(
                "{} --alpha-prime0 values for {} parameters",
                self.alpha_prime0.len(),
                self.phi.len()
            )));
        }
        let depth = self.depth.unwrap_or(self.phi.len());
        let guard = self.guard.unwrap_or(SuperposeOptions::default().guard);
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let seed_phi = self.seed_phi.or(if cmd == CommandKind::Seed { self.phi.first().copied() } else { None });
        let mut seed = SeedSpec::new(seed_kind, case.id).phi(seed_phi.unwrap_or(0.0)).c(self.c.unwrap_or(0.0)).tau(case.tau);
        seed.extra = self.c2;
        Ok(Resolved {
            case,
            grid,
            phis: self.phi.clone(),
            seed,
            input: self.input.clone(),
            surface,
            c: self.c.unwrap_or(0.0),
            c2: self.c2,
            p0,
            alpha_prime0: self.alpha_prime0.clone(),
            depth,
            integrate: IntegrateOptions {
                substeps: self.substeps.unwrap_or(1).max(1),
                ..Default::default()
            },
            superpose: SuperposeOptions {
                guard: positive("--guard", guard)?,
                ..Default::default()
            },
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            ply: self.ply,
            tol_pde: positive("--tol-pde", self.tol_pde.unwrap_or(DEFAULT_TOL_PDE))?,
            tol_bt: positive("--tol-bt", self.tol_bt.unwrap_or(DEFAULT_TOL_BT))?,
            tol_curvature: positive("--tol-curvature", self.tol_curvature.unwrap_or(DEFAULT_TOL_CURVATURE))?,
            margin: self.margin.unwrap_or(DEFAULT_MARGIN),
        })
    }
}

fn derive_case_id(id: CaseId, tau: i32) -> Result<CaseConfig> {
    let (d, e, r, s) = id.tuple();
    derive_case(d as i32, e as i32, r as i32, s as i32, tau)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Seed,
    Transform,
    Superpose,
    Surface,
    Verify,
}

/// A validated run.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub case: CaseConfig,
    pub grid: Grid,
    pub phis: Vec<f64>,
    pub seed: SeedSpec,
    pub input: Option<PathBuf>,
    pub surface: Option<BuiltinSurface>,
    pub c: f64,
    pub c2: Option<f64>,
    pub p0: (f64, f64),
    pub alpha_prime0: Vec<f64>,
    pub depth: usize,
    pub integrate: IntegrateOptions,
    pub superpose: SuperposeOptions,
    pub out: PathBuf,
    pub ply: bool,
    pub tol_pde: f64,
    pub tol_bt: f64,
    pub tol_curvature: f64,
    pub margin: usize,
}

/// The seed either as a closed form or as a field read from CSV.
enum Seed {
    Analytic(AnalyticSolution),
    Field(ScalarField),
}

impl Seed {
    fn source(&self) -> &dyn FieldSource {
        match self {
            Seed::Analytic(a) => a,
            Seed::Field(f) => f,
        }
    }

    fn operand(&self) -> Operand<'_> {
        match self {
            Seed::Analytic(a) => a.into(),
            Seed::Field(f) => f.into(),
        }
    }

    fn sample(&self, grid: &Grid) -> ScalarField {
        match self {
            Seed::Analytic(a) => a.sample(grid),
            Seed::Field(f) => f.clone(),
        }
    }
}

impl Resolved {
    fn load_seed(&self) -> Result<(Seed, Grid)> {
        match &self.input {
            Some(path) => {
                let f = read_field_csv(path)?;
                Ok((Seed::Field(f.clone()), f.grid))
            }
            None => Ok((Seed::Analytic(seed_solution(&self.seed)?), self.grid)),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Closed-form level-one fields, when the seed has them.
    fn closed_level_one(&self, grid: &Grid) -> Result<Vec<ScalarField>> {
        let missing = || {
            Error::Config(format!(
                "seed {} has no closed-form transforms; give --alpha-prime0 to integrate them",
                self.seed.kind
            ))
        };
        if self.input.is_some() {
            return Err(missing());
        }
        self.phis
            .iter()
            .map(|&phi| {
                let sol = match self.seed.kind {
                    SeedKind::Zero => kink_seed(&self.case, phi, self.c)?,
                    SeedKind::Example4Alpha if phi == 0.0 => {
                        example_solution(&SeedSpec::new(SeedKind::Example4Alpha1, CaseId::Six).c(self.c))?
                    }
                    SeedKind::Example4Alpha => {
                        let mut spec = SeedSpec::new(SeedKind::Example4Alpha2, CaseId::Six).phi(phi);
                        spec.c = self.c2.unwrap_or(self.c);
                        example_solution(&spec)?
                    }
                    _ => return Err(missing()),
                };
                Ok(sol.sample(grid))
            })
            .collect()
    }

    fn lattice(&self) -> Result<Lattice> {
        let (seed, grid) = self.load_seed()?;
        let level_one = if self.alpha_prime0.is_empty() {
            self.closed_level_one(&grid)?
        } else {
            integrate_level_one(
                &self.case,
                seed.source(),
                &grid,
                &self.phis,
                self.p0,
                &self.alpha_prime0,
                &self.integrate,
            )?
        };
        bianchi_lattice(
            &self.case,
            &seed.sample(&grid),
            &self.phis,
            self.depth,
            level_one,
            &self.superpose,
        )
    }
}

/// Maximum of a residual over nodes at least `margin` cells from invalid ones.
fn core_max(field: &ScalarField, margin: usize) -> (f64, usize) {
    let core = field.eroded(margin);
    (core.max_abs(), core.valid_count())
}

fn bt_core_max(res: &(ScalarField, ScalarField), margin: usize) -> (f64, usize) {
    let (a, n) = core_max(&res.0, margin);
    let (b, m) = core_max(&res.1, margin);
    (a.max(b), n.min(m))
}

/// What a command found; violations turn into exit status 1.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub violations: Vec<String>,
}

impl Outcome {
    fn line(&mut self, s: String) {
        self.lines.push(s);
    }

    fn check(&mut self, what: String, value: f64, tol: f64) {
        if !(value <= tol) {
            self.violations.push(format!("{what}: {value:.3e} exceeds {tol:.1e}"));
        }
    }
}

#[derive(Serialize)]
struct SeedReport {
    seed: SeedKind,
    case: CaseConfig,
    grid: String,
    file: String,
    valid_nodes: usize,
    masked_nodes: usize,
}

pub fn cmd_seed(r: &Resolved) -> Result<Outcome> {
    let field = seed_solution(&r.seed)?.sample(&r.grid);
    let path = r.path("seed.csv");
    write_field_csv(&path, &field)?;
    write_json(
        &r.path("seed.json"),
        &SeedReport {
            seed: r.seed.kind,
            case: r.case,
            grid: r.grid.to_string(),
            file: "seed.csv".into(),
            valid_nodes: field.valid_count(),
            masked_nodes: field.masked_count(),
        },
    )?;
    let mut out = Outcome::default();
    out.line(format!(
        "wrote {} ({} seed, case {}, {} masked nodes)",
        path.display(),
        r.seed.kind,
        r.case.id,
        field.masked_count()
    ));
    Ok(out)
}

#[derive(Serialize)]
struct TransformEntry {
    phi: f64,
    file: String,
    alpha_prime_0: f64,
    max_pde_residual: f64,
    max_bt_residual: f64,
    core_nodes: usize,
    masked_nodes: usize,
}

#[derive(Serialize)]
struct TransformReport {
    case: CaseConfig,
    seed: String,
    equation: String,
    grid: String,
    p0: [f64; 2],
    margin: usize,
    tol_pde: f64,
    tol_bt: f64,
    runs: Vec<TransformEntry>,
}

pub fn cmd_transform(r: &Resolved) -> Result<Outcome> {
    if r.phis.is_empty() {
        return Err(Error::Config("transform needs at least one --phi".into()));
    }
    let (seed, grid) = r.load_seed()?;
    let eq = r.case.equation(IndexFlag::Transformed);
    let mut out = Outcome::default();
    let mut runs = Vec::new();
    for (k, &phi) in r.phis.iter().enumerate() {
        let sys = BtSystem::new(r.case, phi)?;
        let a0 = match (r.alpha_prime0.get(k), &seed) {
            (Some(&v), _) => v,
            (None, Seed::Analytic(_)) if r.seed.kind == SeedKind::Zero => kink_seed(&r.case, phi, r.c)?
                .value(r.p0.0, r.p0.1)
                .ok_or_else(|| Error::Config(format!("the kink for phi={phi} is undefined at p0; give --alpha-prime0")))?,
            (None, _) => 0.0,
        };
        let field = integrate_bt(&sys, seed.source(), &grid, r.p0, a0, &r.integrate)?;
        let name = if r.phis.len() == 1 {
            "alpha_prime.csv".to_string()
        } else {
            format!("alpha_prime_{}.csv", k + 1)
        };
        write_field_csv(&r.path(&name), &field)?;
        let (pde, core) = core_max(&equation_residual(&field, &grid, &eq, Derivatives::Differences)?, r.margin);
        let (bt, _) = bt_core_max(&bt_residual(&sys, seed.operand(), &field, &grid)?, r.margin);
        out.line(format!(
            "wrote {}: phi={phi}, max {} residual {pde:.3e}, max BT residual {bt:.3e}, {} masked nodes",
            r.path(&name).display(),
            eq.name(),
            field.masked_count()
        ));
        out.check(format!("phi={phi} PDE residual"), pde, r.tol_pde);
        out.check(format!("phi={phi} BT residual"), bt, r.tol_bt);
        if core == 0 {
            out.violations.push(format!("phi={phi}: no node is {} cells away from invalid ones", r.margin));
        }
        runs.push(TransformEntry {
            phi,
            file: name,
            alpha_prime_0: a0,
            max_pde_residual: pde,
            max_bt_residual: bt,
            core_nodes: core,
            masked_nodes: field.masked_count(),
        });
    }
    write_json(
        &r.path("report.json"),
        &TransformReport {
            case: r.case,
            seed: match &r.input {
                Some(p) => p.display().to_string(),
                None => r.seed.kind.to_string(),
            },
            equation: eq.describe(),
            grid: grid.to_string(),
            p0: [r.p0.0, r.p0.1],
            margin: r.margin,
            tol_pde: r.tol_pde,
            tol_bt: r.tol_bt,
            runs,
        },
    )?;
    Ok(out)
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ManifestNode {
    pub id: usize,
    pub label: String,
    pub level: usize,
    /// 1-based parameter indices `[first, last]`.
    pub window: Option<[usize; 2]>,
    pub equation: String,
    pub equation_form: String,
    pub bt_case: u8,
    /// `[base, left, right]` node ids.
    pub parents: Option<[usize; 3]>,
    pub file: String,
    pub valid_nodes: usize,
    pub masked_nodes: usize,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ManifestEdge {
    pub from: usize,
    pub to: usize,
    /// 1-based.
    pub phi_index: usize,
    pub phi: f64,
}

/// Machine-readable description of a lattice on disk.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Manifest {
    pub case: CaseConfig,
    pub grid: String,
    pub phis: Vec<f64>,
    pub depth: usize,
    pub nodes: Vec<ManifestNode>,
    pub edges: Vec<ManifestEdge>,
}

impl Manifest {
    pub fn of(lat: &Lattice) -> Manifest {
        Manifest {
            case: lat.case,
            grid: lat.seed().field.grid.to_string(),
            phis: lat.phis.clone(),
            depth: lat.depth,
            nodes: lat
                .nodes
                .iter()
                .map(|n| ManifestNode {
                    id: n.id,
                    label: n.label.clone(),
                    level: n.level,
                    window: n.window.map(|(a, b)| [a + 1, b + 1]),
                    equation: n.equation.name().into(),
                    equation_form: n.equation.describe(),
                    bt_case: n.bt_case.id.index(),
                    parents: n.parents.map(|(a, b, c)| [a, b, c]),
                    file: format!("{}.csv", n.label),
                    valid_nodes: n.field.valid_count(),
                    masked_nodes: n.field.masked_count(),
                })
                .collect(),
            edges: lat
                .edges
                .iter()
                .map(|e| ManifestEdge {
                    from: e.from,
                    to: e.to,
                    phi_index: e.phi_index + 1,
                    phi: lat.phis[e.phi_index],
                })
                .collect(),
        }
    }
}

pub fn cmd_superpose(r: &Resolved) -> Result<Outcome> {
    let lat = r.lattice()?;
    let manifest = Manifest::of(&lat);
    let mut out = Outcome::default();
    for (node, entry) in lat.nodes.iter().zip(&manifest.nodes) {
        write_field_csv(&r.path(&entry.file), &node.field)?;
        out.line(format!(
            "wrote {} ({}, {} masked nodes)",
            r.path(&entry.file).display(),
            entry.equation,
            entry.masked_nodes
        ));
    }
    write_json(&r.path("manifest.json"), &manifest)?;
    out.line(format!("wrote {}", r.path("manifest.json").display()));
    Ok(out)
}

#[derive(Serialize)]
struct NodeCheck {
    label: String,
    equation: String,
    max_pde_residual: f64,
    core_nodes: usize,
}

#[derive(Serialize)]
struct EdgeCheck {
    from: String,
    to: String,
    phi: f64,
    bt_case: u8,
    /// Residual taken as the smaller of the two sheets at each node.
    sheet_aware: bool,
    max_bt_residual: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    case: CaseConfig,
    grid: String,
    margin: usize,
    tol_pde: f64,
    tol_bt: f64,
    nodes: Vec<NodeCheck>,
    edges: Vec<EdgeCheck>,
    violations: Vec<String>,
}

/// Residual of the system on whichever sheet fits better at each node.
fn sheet_aware_residual(sys: &BtSystem, a: &ScalarField, ap: &ScalarField) -> Result<ScalarField> {
    let g = a.grid;
    let p = bt_residual_on(sys, a, ap, &g, Sheet::Principal)?;
    let o = bt_residual_on(sys, a, ap, &g, Sheet::Opposite)?;
    let pick = |r: &(ScalarField, ScalarField)| r.0.zip_with(&r.1, |x, y| x.abs().max(y.abs()));
    pick(&p)?.zip_with(&pick(&o)?, f64::min)
}

pub fn cmd_verify(r: &Resolved) -> Result<Outcome> {
    let lat = r.lattice()?;
    let grid = lat.seed().field.grid;
    let mut out = Outcome::default();
    let mut nodes = Vec::new();
    for n in &lat.nodes {
        let res = equation_residual(&n.field, &grid, &n.equation, Derivatives::Differences)?;
        let (m, core) = core_max(&res, r.margin);
        out.check(format!("{} {} residual", n.label, n.equation.name()), m, r.tol_pde);
        if core == 0 {
            out.violations.push(format!("{}: no node is {} cells away from invalid ones", n.label, r.margin));
        }
        out.line(format!("{}: {} residual {m:.3e} on {core} core nodes", n.label, n.equation.name()));
        nodes.push(NodeCheck {
            label: n.label.clone(),
            equation: n.equation.name().into(),
            max_pde_residual: m,
            core_nodes: core,
        });
    }
    let mut edges = Vec::new();
    for e in &lat.edges {
        let (from, to) = (&lat.nodes[e.from], &lat.nodes[e.to]);
        let phi = lat.phis[e.phi_index];
        let sys = BtSystem::new(from.bt_case, phi)?;
        let sheet_aware = to.parents.is_some_and(|(base, _, _)| lat.nodes[base].bt_case.id == CaseId::Five);
        let m = if sheet_aware {
            core_max(&sheet_aware_residual(&sys, &from.field, &to.field)?, r.margin).0
        } else {
            bt_core_max(&bt_residual(&sys, &from.field, &to.field, &grid)?, r.margin).0
        };
        out.check(format!("{} -> {} BT residual", from.label, to.label), m, r.tol_bt);
        out.line(format!("{} -> {} (phi={phi}): BT residual {m:.3e}", from.label, to.label));
        edges.push(EdgeCheck {
            from: from.label.clone(),
            to: to.label.clone(),
            phi,
            bt_case: from.bt_case.id.index(),
            sheet_aware,
            max_bt_residual: m,
        });
    }
    write_json(
        &r.path("verify.json"),
        &VerifyReport {
            case: r.case,
            grid: grid.to_string(),
            margin: r.margin,
            tol_pde: r.tol_pde,
            tol_bt: r.tol_bt,
            nodes,
            edges,
            violations: out.violations.clone(),
        },
    )?;
    Ok(out)
}

#[derive(Serialize)]
struct CurvatureSummary {
    predicted: f64,
    mean: f64,
    max_deviation: f64,
    core_nodes: usize,
}

#[derive(Serialize)]
struct SurfaceEntry {
    name: String,
    file: String,
    phi: Option<f64>,
    valid_nodes: usize,
    index: Option<u8>,
    curvature: CurvatureSummary,
    congruence: Option<CongruenceReport>,
}

#[derive(Serialize)]
struct SurfaceReport {
    surface: BuiltinSurface,
    grid: String,
    tol_curvature: f64,
    surfaces: Vec<SurfaceEntry>,
}

fn curvature_summary(mesh: &SurfaceMesh, predicted: f64, margin: usize) -> Result<CurvatureSummary> {
    let k = numerical_curvature(mesh)?.eroded(margin);
    let vals: Vec<f64> = k.values.iter().zip(&k.valid).filter(|(_, ok)| **ok).map(|(v, _)| *v).collect();
    let n = vals.len();
    Ok(CurvatureSummary {
        predicted,
        mean: if n > 0 { vals.iter().sum::<f64>() / n as f64 } else { f64::NAN },
        max_deviation: vals.iter().fold(0.0, |m, v| m.max((v - predicted).abs())),
        core_nodes: n,
    })
}

pub fn cmd_surface(r: &Resolved) -> Result<Outcome> {
    let kind = r
        .surface
        .ok_or_else(|| Error::Config("surface needs --surface timelike-k1 or timelike-kminus1".into()))?;
    let pair = builtin_surface(kind, &r.grid)?;
    let case = pair.case;
    let grid = r.grid;
    // the lattice whose first row carries the chain of solutions
    let (phis, seed_field, level_one, stem) = match kind {
        BuiltinSurface::TimelikeK1 => {
            let mut phis = vec![FRAC_PI_2];
            phis.extend(&r.phis);
            let mut level_one = vec![pair.alpha.sample(&grid)];
            for &phi in &r.phis {
                level_one.push(kink_seed(&case, phi, r.c)?.sample(&grid));
            }
            (phis, ScalarField::constant(grid, 0.0), level_one, 1)
        }
        BuiltinSurface::TimelikeKminus1 => {
            let sub = Resolved {
                seed: SeedSpec::new(SeedKind::Example4Alpha, CaseId::Six),
                input: None,
                ..r.clone()
            };
            (r.phis.clone(), pair.alpha.sample(&grid), sub.closed_level_one(&grid)?, 0)
        }
    };
    let lat = bianchi_lattice(&case, &seed_field, &phis, phis.len(), level_one, &r.superpose)?;
    let chain: Vec<&crate::superpose::LatticeNode> = (0..=phis.len())
        .filter(|&k| k >= stem)
        .map(|k| if k == 0 { lat.seed() } else { lat.node(0, k - 1).expect("lattice row") })
        .collect();
    let predicted = case.delta as f64;
    let mut out = Outcome::default();
    let mut entries = Vec::new();
    let mut mesh = pair.mesh.clone();
    for (n, node) in chain.iter().enumerate() {
        let mut congruence = None;
        let mut phi = None;
        if n > 0 {
            let prev = chain[n - 1];
            let p = phis[node.window.expect("chain node").1];
            let params = congruence_params(&prev.bt_case, p)?;
            let next = transform_surface(&mesh, &prev.field, &node.field, &prev.bt_case, &params)?;
            congruence = Some(congruence_check(&mesh, &next, &prev.bt_case, &params)?);
            mesh = next;
            phi = Some(p);
        }
        let name = node.label.replacen("alpha", "X", 1);
        let file = format!("{name}.obj");
        write_obj(&r.path(&file), &mesh)?;
        if r.ply {
            write_ply(&r.path(&format!("{name}.ply")), &mesh)?;
        }
        let curvature = curvature_summary(&mesh, predicted, r.margin)?;
        out.line(format!(
            "wrote {}: mean K {:.6}, max |K - {predicted}| {:.3e} on {} core nodes",
            r.path(&file).display(),
            curvature.mean,
            curvature.max_deviation,
            curvature.core_nodes
        ));
        out.check(format!("{name} mean curvature deviation"), (curvature.mean - predicted).abs(), r.tol_curvature);
        if let Some(c) = &congruence {
            if !c.index_ok() {
                out.violations.push(format!(
                    "{name}: index {:?}, predicted {}",
                    c.index_bar, c.predicted_index_bar
                ));
            }
        }
        entries.push(SurfaceEntry {
            name,
            file,
            phi,
            valid_nodes: mesh.valid_count(),
            index: detect_index(&mesh),
            curvature,
            congruence,
        });
    }
    write_json(
        &r.path("surface.json"),
        &SurfaceReport {
            surface: kind,
            grid: grid.to_string(),
            tol_curvature: r.tol_curvature,
            surfaces: entries,
        },
    )?;
    Ok(out)
}

/// Exit status of a failed run.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn apply_thread_cap() -> Result<()> {
    let Ok(v) = std::env::var("BLC_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("BLC_LAB_THREADS must be a positive integer, got '{v}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Run one parsed command and return its outcome.
pub fn run(cli: Cli) -> Result<Outcome> {
    apply_thread_cap()?;
    let (kind, args) = match cli.command {
        Command::Seed(a) => (CommandKind::Seed, a),
        Command::Transform(a) => (CommandKind::Transform, a),
        Command::Superpose(a) => (CommandKind::Superpose, a),
        Command::Surface(a) => (CommandKind::Surface, a),
        Command::Verify(a) => (CommandKind::Verify, a),
    };
    let file = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = args.run.over(file);
    let resolved = cfg.resolve(kind)?;
    match kind {
        CommandKind::Seed => cmd_seed(&resolved),
        CommandKind::Transform => cmd_transform(&resolved),
        CommandKind::Superpose => cmd_superpose(&resolved),
        CommandKind::Surface => cmd_surface(&resolved),
        CommandKind::Verify => cmd_verify(&resolved),
    }
}

/// Entry point of the binary: parse, run, print, map to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            if outcome.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in &outcome.violations {
                    eprintln!("tolerance violated: {v}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml("case = 4\ntau = -1\nphi = [1.0, 0.5]\ngrid = \"0:1:0.1,0:1:0.1\"\nply = true\n").unwrap();
        let flags = RunConfig {
            phi: vec![0.25],
            tau: Some(1),
            ..Default::default()
        };
        let m = flags.over(file);
        assert_eq!(m.case, Some(4));
        assert_eq!(m.tau, Some(1));
        assert_eq!(m.phi, vec![0.25]);
        assert!(m.ply);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn case_resolution() {
        let cfg = RunConfig {
            case_delta: Some(1),
            case_epsilon: Some(-1),
            case_r: Some(1),
            case_s: Some(1),
            tau: Some(-1),
            ..Default::default()
        };
        assert_eq!(cfg.resolve(CommandKind::Seed).unwrap().case.id, CaseId::Four);
        let bad = RunConfig {
            case_delta: Some(1),
            ..Default::default()
        };
        assert!(matches!(bad.resolve(CommandKind::Seed), Err(Error::Config(_))));
        let pinned = RunConfig {
            seed: Some("example4-alpha".into()),
            ..Default::default()
        };
        let r = pinned.resolve(CommandKind::Superpose).unwrap();
        assert_eq!((r.case.id, r.case.tau), (CaseId::Six, 1));
        let out_of_range = RunConfig {
            case: Some(4),
            phi: vec![4.0],
            ..Default::default()
        };
        assert!(matches!(out_of_range.resolve(CommandKind::Transform), Err(Error::PhiOutOfRange { .. })));
    }

    #[test]
    fn seed_defaults_to_kink_with_phi() {
        let cfg = RunConfig {
            case: Some(1),
            phi: vec![1.0],
            ..Default::default()
        };
        let r = cfg.resolve(CommandKind::Seed).unwrap();
        assert_eq!((r.seed.kind, r.seed.phi), (SeedKind::Kink, 1.0));
        assert_eq!(cfg.resolve(CommandKind::Transform).unwrap().seed.kind, SeedKind::Zero);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::io(Path::new("a"), std::io::Error::other("x"))), 3);
    }
}
