//! Run configuration and the `kpp-imex` subcommands.
//!
//! Configuration files are plain `key = value` lines; `#` starts a comment.
//! Command-line flags become the same key/value pairs and are applied after
//! the file, so flags win. Every violation is collected before reporting.
//!
//! ```text
//! example = manufactured
//! beta = 2
//! M = 40
//! Nx = 64
//! Ny = 64
//! ```

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::analysis::{l2_error, linf_error, spatial_sweep, temporal_sweep, ConvergenceTable, SweepSpec};
use crate::coeffs::{write_coeffs_csv, CoeffRoute, CoeffRow, StepCoefficients};
use crate::error::{Error, Result};
use crate::linsolve::{SolverConfig, SolverKind};
use crate::problems::{Nonlinearity, ProblemSpec};
use crate::spatial::SpaceGrid;
use crate::stepper::{integrate, CoefficientPath, IntegrateOptions, RunReport};
use crate::timegrid::GridKind;

/// Reaction law selected in a config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityForm {
    Logistic,
    PqProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: String,
    pub beta: f64,
    pub grid: GridKind,
    pub steps: usize,
    pub nx: usize,
    pub ny: usize,
    pub t_final: Option<f64>,
    pub diffusion: Option<f64>,
    pub reaction: Option<f64>,
    pub form: Option<NonlinearityForm>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub solver: SolverConfig,
    pub path: CoefficientPath,
    pub out_dir: PathBuf,
    pub workers: usize,
    /// β values for sweeps; empty means `[beta]`.
    pub betas: Vec<f64>,
    /// Grid kinds for sweeps; empty means `[grid]`.
    pub grids: Vec<GridKind>,
    pub m_list: Option<Vec<usize>>,
    pub n_list: Option<Vec<usize>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: "manufactured".to_string(),
            beta: 2.0,
            grid: GridKind::Uniform,
            steps: 40,
            nx: 64,
            ny: 64,
            t_final: None,
            diffusion: None,
            reaction: None,
            form: None,
            p: None,
            q: None,
            solver: SolverConfig::default(),
            path: CoefficientPath::Auto,
            out_dir: PathBuf::from("out"),
            workers: 1,
            betas: Vec::new(),
            grids: Vec::new(),
            m_list: None,
            n_list: None,
        }
    }
}

const KEYS: &[&str] = &[
    "example", "beta", "betas", "gamma", "grid", "grids", "M", "Nx", "Ny", "N", "T", "D", "K", "form", "p", "q",
    "solver", "tol", "max_iter", "path", "out", "workers", "m_list", "n_list",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("{key}: cannot parse '{value}'"))
}

/// Parse a real number, accepting the symbolic forms `pi`, `sqrt2` and `a/b`.
fn parse_real(key: &str, value: &str) -> std::result::Result<f64, String> {
    let v = value.trim();
    match v {
        "pi" | "π" => return Ok(std::f64::consts::PI),
        "sqrt2" | "√2" => return Ok(std::f64::consts::SQRT_2),
        _ => {}
    }
    if let Some((a, b)) = v.split_once('/') {
        let a: f64 = parse_num(key, a)?;
        let b: f64 = parse_num(key, b)?;
        return Ok(a / b);
    }
    parse_num(key, v)
}

fn parse_list<T>(
    key: &str,
    value: &str,
    item: impl Fn(&str, &str) -> std::result::Result<T, String>,
) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect()
}

fn parse_grid(key: &str, value: &str) -> std::result::Result<GridKind, String> {
    match value.trim() {
        "uniform" => Ok(GridKind::Uniform),
        other => Ok(GridKind::Graded {
            gamma: parse_real(key, other)?,
        }),
    }
}

/// Split `key = value` lines, skipping blanks and `#` comments. Malformed
/// lines are returned separately so the remaining pairs still get checked.
pub fn parse_pairs(text: &str) -> (Vec<(String, String)>, Vec<String>) {
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().trim_matches('"').to_string())),
            None => errors.push(format!("line {}: expected key = value, got '{raw}'", lineno + 1)),
        }
    }
    (pairs, errors)
}

impl RunConfig {
    fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "example" => self.example = value.to_string(),
            "beta" => self.beta = parse_real(key, value)?,
            "betas" => self.betas = parse_list(key, value, parse_real)?,
            "gamma" => {
                self.grid = GridKind::Graded {
                    gamma: parse_real(key, value)?,
                }
            }
            "grid" => self.grid = parse_grid(key, value)?,
            "grids" => self.grids = parse_list(key, value, parse_grid)?,
            "M" => self.steps = parse_num(key, value)?,
            "Nx" => self.nx = parse_num(key, value)?,
            "Ny" => self.ny = parse_num(key, value)?,
            "N" => {
                self.nx = parse_num(key, value)?;
                self.ny = self.nx;
            }
            "T" => self.t_final = Some(parse_real(key, value)?),
            "D" => self.diffusion = Some(parse_real(key, value)?),
            "K" => self.reaction = Some(parse_real(key, value)?),
            "form" => {
                self.form = Some(match value {
                    "logistic" => NonlinearityForm::Logistic,
                    "pq" => NonlinearityForm::PqProduct,
                    other => return Err(format!("form: unknown '{other}' (expected logistic or pq)")),
                })
            }
            "p" => self.p = Some(parse_real(key, value)?),
            "q" => self.q = Some(parse_real(key, value)?),
            "solver" => self.solver.kind = value.parse::<SolverKind>().map_err(|e| e.to_string())?,
            "tol" => self.solver.tol = parse_real(key, value)?,
            "max_iter" => self.solver.max_iter = Some(parse_num(key, value)?),
            "path" => {
                self.path = match value {
                    "auto" => CoefficientPath::Auto,
                    "uniform" => CoefficientPath::Uniform,
                    "nonuniform" => CoefficientPath::Nonuniform,
                    other => {
                        return Err(format!(
                            "path: unknown '{other}' (expected auto, uniform or nonuniform)"
                        ))
                    }
                }
            }
            "out" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = parse_num(key, value)?,
            "m_list" => self.m_list = Some(parse_list(key, value, parse_num)?),
            "n_list" => self.n_list = Some(parse_list(key, value, parse_num)?),
            other => {
                return Err(format!("unknown key '{other}' (known: {})", KEYS.join(", ")));
            }
        }
        Ok(())
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for &beta in std::iter::once(&self.beta).chain(&self.betas) {
            if !(beta > 1.0) {
                v.push(format!("β must exceed 1 (got {beta})"));
            }
        }
        for g in std::iter::once(&self.grid).chain(&self.grids) {
            if let GridKind::Graded { gamma } = g {
                if !(*gamma > 0.0) {
                    v.push(format!("γ must be positive (got {gamma})"));
                }
            }
        }
        if self.steps < 2 {
            v.push(format!("M must be at least 2 (got {})", self.steps));
        }
        if self.nx < 3 || self.ny < 3 {
            v.push(format!("Nx and Ny must be at least 3 (got {}x{})", self.nx, self.ny));
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            v.push(format!("tol must lie in (0, 1) (got {})", self.solver.tol));
        }
        if self.workers == 0 {
            v.push("workers must be at least 1".to_string());
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                v.push(format!("T must be positive (got {t})"));
            }
        }
        if let Some(d) = self.diffusion {
            if !(d >= 0.0) {
                v.push(format!("D must be non-negative (got {d})"));
            }
        }
        if ProblemSpec::by_name(&self.example).is_err() {
            v.push(format!(
                "unknown example '{}' (expected manufactured or wave)",
                self.example
            ));
        }
        for (name, list) in [("m_list", &self.m_list), ("n_list", &self.n_list)] {
            if let Some(list) = list {
                if list.is_empty() {
                    v.push(format!("{name} is empty"));
                } else if list.windows(2).any(|w| w[1] != 2 * w[0]) {
                    v.push(format!("{name} must double at each entry (got {list:?})"));
                }
            }
        }
        if self.path == CoefficientPath::Uniform && !matches!(self.grid, GridKind::Uniform) {
            v.push("path = uniform requires a uniform grid".to_string());
        }
        v
    }

    pub fn sweep_betas(&self) -> Vec<f64> {
        if self.betas.is_empty() {
            vec![self.beta]
        } else {
            self.betas.clone()
        }
    }

    pub fn sweep_grids(&self) -> Vec<GridKind> {
        if self.grids.is_empty() {
            vec![self.grid]
        } else {
            self.grids.clone()
        }
    }

    /// The named example with any physics overrides applied. Overriding `D`,
    /// `K` or the reaction law discards the exact solution.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let mut p = ProblemSpec::by_name(&self.example)?;
        let mut altered = false;
        if let Some(t) = self.t_final {
            p.t_final = t;
        }
        if let Some(d) = self.diffusion {
            altered |= d != p.diffusion;
            p.diffusion = d;
        }
        if let Some(k) = self.reaction {
            altered |= k != p.reaction;
            p.reaction = k;
        }
        if self.form.is_some() || self.p.is_some() || self.q.is_some() {
            let (dp, dq) = match p.nonlinearity {
                Nonlinearity::LogisticP { p } => (p, 1.0),
                Nonlinearity::PqProduct { p, q } => (p, q),
                Nonlinearity::Custom(_) => (1.0, 1.0),
            };
            let form = self.form.unwrap_or(match p.nonlinearity {
                Nonlinearity::PqProduct { .. } => NonlinearityForm::PqProduct,
                _ => NonlinearityForm::Logistic,
            });
            let np = self.p.unwrap_or(dp);
            let nq = self.q.unwrap_or(dq);
            let new = match form {
                NonlinearityForm::Logistic => Nonlinearity::LogisticP { p: np },
                NonlinearityForm::PqProduct => Nonlinearity::PqProduct { p: np, q: nq },
            };
            // u(1 - u) and u (1 - u)^1 are the same law
            let same = (0..=10).all(|k| {
                let u = k as f64 / 10.0 - 0.25;
                new.eval(u) == p.nonlinearity.eval(u)
            });
            altered |= !same;
            p.nonlinearity = new;
        }
        if altered {
            p.exact = None;
        }
        Ok(p)
    }

    pub fn options(&self) -> IntegrateOptions {
        IntegrateOptions {
            solver: self.solver,
            path: self.path,
            ..Default::default()
        }
    }

    /// Canonical `key=value` rendering; the config hash is taken over this.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_else(|| "default".into());
        let grid = |g: &GridKind| match g {
            GridKind::Uniform => "uniform".to_string(),
            GridKind::Graded { gamma } => format!("{gamma:?}"),
        };
        let _ = writeln!(s, "example={}", self.example);
        let _ = writeln!(s, "beta={:?}", self.beta);
        let _ = writeln!(s, "grid={}", grid(&self.grid));
        let _ = writeln!(s, "M={}", self.steps);
        let _ = writeln!(s, "Nx={}", self.nx);
        let _ = writeln!(s, "Ny={}", self.ny);
        let _ = writeln!(s, "T={}", opt(self.t_final));
        let _ = writeln!(s, "D={}", opt(self.diffusion));
        let _ = writeln!(s, "K={}", opt(self.reaction));
        let _ = writeln!(s, "form={:?}", self.form);
        let _ = writeln!(s, "p={}", opt(self.p));
        let _ = writeln!(s, "q={}", opt(self.q));
        let _ = writeln!(s, "solver={}", self.solver.kind.as_str());
        let _ = writeln!(s, "tol={:?}", self.solver.tol);
        let _ = writeln!(s, "max_iter={:?}", self.solver.max_iter);
        let _ = writeln!(s, "path={:?}", self.path);
        let _ = writeln!(s, "betas={:?}", self.betas);
        let _ = writeln!(s, "grids={:?}", self.grids.iter().map(grid).collect::<Vec<_>>());
        let _ = writeln!(s, "m_list={:?}", self.m_list);
        let _ = writeln!(s, "n_list={:?}", self.n_list);
        s
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

/// Build a validated [`RunConfig`] from optional file text plus overrides.
/// Returns every problem found, not just the first.
pub fn parse_config(file: Option<&str>, overrides: &[(String, String)]) -> std::result::Result<RunConfig, Vec<String>> {
    let mut errors = Vec::new();
    let mut pairs = Vec::new();
    if let Some(text) = file {
        let (p, e) = parse_pairs(text);
        pairs.extend(p);
        errors.extend(e);
    }
    pairs.extend(overrides.iter().cloned());
    let mut config = RunConfig::default();
    for (k, v) in &pairs {
        if let Err(e) = config.apply(k, v) {
            errors.push(e);
        }
    }
    errors.extend(config.violations());
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(errors)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Files written by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub field: PathBuf,
    pub report: PathBuf,
    pub errors: Option<PathBuf>,
    /// `(L∞, L2)` at the final time when the exact solution is known.
    pub final_errors: Option<(f64, f64)>,
    pub run_report: RunReport,
}

/// Single run: final field, step report and (when possible) error summary.
pub fn cmd_run(config: &RunConfig) -> Result<RunArtifacts> {
    let problem = config.problem()?;
    let tgrid = config.grid.build(problem.t_final, config.steps)?;
    let sgrid = SpaceGrid::new(problem.domain, config.nx, config.ny)?;
    let out = integrate(&problem, &tgrid, &sgrid, config.beta, &config.options())?;

    fs::create_dir_all(&config.out_dir)?;
    let hash = config.hash();
    let tag = format!("example={} config={hash}", problem.name);

    let field_path = config.out_dir.join("field.csv");
    let mut w = create(&field_path)?;
    writeln!(w, "# final field t={} {tag}", problem.t_final)?;
    out.field.write_csv(&sgrid, &mut w)?;

    let report_path = config.out_dir.join("report.csv");
    out.report.write_csv(create(&report_path)?, &tag)?;

    let mut errors_path = None;
    let mut final_errors = None;
    if let Some(exact) = problem.exact_at(&sgrid, problem.t_final) {
        let linf = linf_error(&out.field, &exact)?;
        let l2 = l2_error(&out.field, &exact, &sgrid)?;
        let path = config.out_dir.join("errors.csv");
        let mut w = create(&path)?;
        writeln!(w, "# errors {tag}")?;
        writeln!(w, "M,Nx,Ny,beta,grid,Linf,L2")?;
        writeln!(
            w,
            "{},{},{},{:?},{},{:.6e},{:.6e}",
            config.steps,
            config.nx,
            config.ny,
            config.beta,
            config.grid.label(),
            linf,
            l2
        )?;
        w.flush()?;
        errors_path = Some(path);
        final_errors = Some((linf, l2));
    }
    Ok(RunArtifacts {
        field: field_path,
        report: report_path,
        errors: errors_path,
        final_errors,
        run_report: out.report,
    })
}

fn grid_slug(g: &GridKind) -> String {
    match g {
        GridKind::Uniform => "uniform".to_string(),
        GridKind::Graded { gamma } => format!("gamma{gamma}"),
    }
}

/// One convergence table per `(β, grid kind)`; writes the table and its plot companion.
pub fn cmd_convergence(config: &RunConfig) -> Result<Vec<(ConvergenceTable, PathBuf)>> {
    let (axis, list) = match (&config.m_list, &config.n_list) {
        (Some(m), None) => ("temporal", m.clone()),
        (None, Some(n)) => ("spatial", n.clone()),
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "set exactly one of m_list and n_list, not both".to_string(),
            ));
        }
        (None, None) => return Err(Error::Config("a sweep needs m_list or n_list".to_string())),
    };
    if axis == "temporal" && config.nx != config.ny {
        return Err(Error::Config(
            "temporal sweeps use a square grid: set N or Nx = Ny".to_string(),
        ));
    }
    let problem = config.problem()?;
    if problem.exact.is_none() {
        return Err(Error::NoExactSolution);
    }
    fs::create_dir_all(&config.out_dir)?;
    let tag = format!("config={}", config.hash());
    let mut written = Vec::new();
    for beta in config.sweep_betas() {
        for grid_kind in config.sweep_grids() {
            let spec = SweepSpec {
                problem: problem.clone(),
                beta,
                grid_kind,
                options: config.options(),
                workers: config.workers,
            };
            let table = if axis == "temporal" {
                temporal_sweep(&spec, &list, config.nx)?
            } else {
                spatial_sweep(&spec, &list, config.steps)?
            };
            let stem = format!(
                "convergence_{axis}_{}_beta{beta:.6}_{}",
                problem.name,
                grid_slug(&grid_kind)
            );
            let path = config.out_dir.join(format!("{stem}.csv"));
            table.write_csv(create(&path)?, &tag)?;
            table.write_plot_data(create(&config.out_dir.join(format!("{stem}_plot.csv")))?, &tag)?;
            written.push((table, path));
        }
    }
    Ok(written)
}

/// Node dump `index,t` for the configured time grid.
pub fn cmd_grid<W: Write>(config: &RunConfig, out: W) -> Result<()> {
    let t_final = config.problem()?.t_final;
    config.grid.build(t_final, config.steps)?.write_csv(out)?;
    Ok(())
}

/// Coefficient table: the Δt-scaled uniform row, then either the given node
/// triple (both routes) or every step of the configured time grid.
pub fn cmd_coeffs<W: Write>(config: &RunConfig, nodes: Option<[f64; 3]>, out: W) -> Result<()> {
    let beta = config.beta;
    let mut rows: Vec<CoeffRow> = vec![(CoeffRoute::Uniform, None, StepCoefficients::uniform(beta)?)];
    let triples: Vec<[f64; 3]> = match nodes {
        Some(t) => vec![t],
        None => {
            let t_final = config.problem()?.t_final;
            let g = config.grid.build(t_final, config.steps)?;
            g.nodes().windows(3).map(|w| [w[0], w[1], w[2]]).collect()
        }
    };
    for [p, c, n] in triples {
        rows.push((
            CoeffRoute::Vandermonde,
            Some([p, c, n]),
            StepCoefficients::nonuniform(p, c, n, beta)?,
        ));
        rows.push((
            CoeffRoute::Lagrange,
            Some([p, c, n]),
            StepCoefficients::lagrange(p, c, n, beta)?,
        ));
    }
    write_coeffs_csv(out, &rows)?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "kpp-imex",
    version,
    about = "Shifted-BDF2 IMEX solver for the 2D Fisher-KPP equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration and write field, report and error files.
    Run(Overrides),
    /// Refinement sweep over M (--m-list) or N (--n-list).
    Convergence(Overrides),
    /// Print the time grid as CSV.
    Grid(Overrides),
    /// Print shifted BDF2 coefficients as CSV.
    Coeffs {
        #[command(flatten)]
        overrides: Overrides,
        /// Node triple `t_prev,t_curr,t_next`; defaults to every step of the time grid.
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// manufactured | wave
    #[arg(long)]
    pub example: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// Comma-separated β values for sweeps.
    #[arg(long)]
    pub betas: Option<String>,
    /// Grading exponent; switches to the graded grid.
    #[arg(long)]
    pub gamma: Option<String>,
    /// uniform | <gamma>
    #[arg(long)]
    pub grid: Option<String>,
    /// Comma-separated grid kinds for sweeps, e.g. uniform,0.75,1.5
    #[arg(long)]
    pub grids: Option<String>,
    /// Number of time steps M.
    #[arg(short = 'm', long = "steps")]
    pub steps: Option<String>,
    #[arg(long)]
    pub nx: Option<String>,
    #[arg(long)]
    pub ny: Option<String>,
    /// Sets both Nx and Ny.
    #[arg(short = 'n', long = "n")]
    pub n: Option<String>,
    #[arg(long = "t-final")]
    pub t_final: Option<String>,
    #[arg(long = "diffusion")]
    pub diffusion: Option<String>,
    #[arg(long = "reaction")]
    pub reaction: Option<String>,
    /// logistic | pq
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// cg | direct
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
    /// auto | uniform | nonuniform
    #[arg(long)]
    pub path: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long = "m-list")]
    pub m_list: Option<String>,
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// Extra KEY=VALUE pairs, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Overrides {
    pub fn pairs(&self) -> std::result::Result<Vec<(String, String)>, Vec<String>> {
        let named = [
            ("example", &self.example),
            ("beta", &self.beta),
            ("betas", &self.betas),
            ("gamma", &self.gamma),
            ("grid", &self.grid),
            ("grids", &self.grids),
            ("M", &self.steps),
            ("Nx", &self.nx),
            ("Ny", &self.ny),
            ("N", &self.n),
            ("T", &self.t_final),
            ("D", &self.diffusion),
            ("K", &self.reaction),
            ("form", &self.form),
            ("p", &self.p),
            ("q", &self.q),
            ("solver", &self.solver),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("path", &self.path),
            ("out", &self.out),
            ("workers", &self.workers),
            ("m_list", &self.m_list),
            ("n_list", &self.n_list),
        ];
        let mut pairs: Vec<(String, String)> = named
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        let mut errors = Vec::new();
        for s in &self.set {
            match s.split_once('=') {
                Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
                None => errors.push(format!("--set expects KEY=VALUE, got '{s}'")),
            }
        }
        if errors.is_empty() {
            Ok(pairs)
        } else {
            Err(errors)
        }
    }

    pub fn load(&self) -> std::result::Result<RunConfig, Vec<String>> {
        let text = match &self.config {
            Some(path) => Some(fs::read_to_string(path).map_err(|e| vec![format!("{}: {e}", path.display())])?),
            None => None,
        };
        let pairs = self.pairs()?;
        parse_config(text.as_deref(), &pairs)
    }
}

fn report(errors: &[String]) -> i32 {
    for e in errors {
        eprintln!("error: {e}");
    }
    2
}

/// Entry point for the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (overrides, nodes) = match &cli.command {
        Command::Run(o) | Command::Convergence(o) | Command::Grid(o) => (o, None),
        Command::Coeffs { overrides, nodes } => (overrides, nodes.clone()),
    };
    let config = match overrides.load() {
        Ok(c) => c,
        Err(errors) => return report(&errors),
    };
    let result = match &cli.command {
        Command::Run(_) => cmd_run(&config).map(|a| {
            println!("field: {}", a.field.display());
            println!("report: {}", a.report.display());
            eprintln!(
                "{} BDF steps, {} CG iterations, {:.3}s",
                a.run_report.steps.len(),
                a.run_report.total_cg_iters(),
                a.run_report.wall_seconds
            );
            if let Some((linf, l2)) = a.final_errors {
                println!("errors: Linf={linf:.6e} L2={l2:.6e}");
            }
            0
        }),
        Command::Convergence(_) => cmd_convergence(&config).map(|tables| {
            let mut code = 0;
            for (t, path) in &tables {
                println!("{} -> {}", t.describe(), path.display());
                for r in &t.rows {
                    let o = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
                    match &r.failure {
                        None => println!(
                            "  {:>6}  Linf={:.4e} ({})  L2={:.4e} ({})",
                            r.param,
                            r.linf,
                            o(r.order_inf),
                            r.l2,
                            o(r.order_2)
                        ),
                        Some(msg) => {
                            eprintln!("  {:>6}  FAILED: {msg}", r.param);
                            code = 1;
                        }
                    }
                }
            }
            code
        }),
        Command::Grid(_) => cmd_grid(&config, std::io::stdout().lock()).map(|_| 0),
        Command::Coeffs { .. } => {
            let triple = match nodes.as_deref() {
                None => None,
                Some([a, b, c]) => Some([*a, *b, *c]),
                Some(other) => return report(&[format!("--nodes takes three values, got {}", other.len())]),
            };
            cmd_coeffs(&config, triple, std::io::stdout().lock()).map(|_| 0)
        }
    };
    match result {
        Ok(code) => code,
        Err(Error::Io(e)) => {
            eprintln!("error: {e} (output directory {})", config.out_dir.display());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
