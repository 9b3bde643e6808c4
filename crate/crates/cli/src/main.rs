mod config;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use cauchy_core::analysis::{c_value_both, e_value, support_function, verify_inequality, Classification, InequalityVerdict};
use cauchy_core::geometry::{circle_for_theta, omega1_boundary_samples, ThetaAngle};
use cauchy_core::gfunction::GSpec;
use cauchy_core::operator::{build_shift, e_operator};
use cauchy_core::quadrature::{QuadConfig, Route};
use cauchy_core::{selftest, ComplexValue, Error};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use config::{ConfigError, Engine, Format, RunConfig};
use output::{Cell, Table};

const EXIT_CONFIG: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

const CONFIG_HELP: &str = "\
CONFIG (JSON, every field optional, unknown fields rejected):
  gspec    density as a tagged union, default {\"type\": \"zero\"}; a raster may be
           given as {\"type\": \"raster_csv\", \"path\": \"g.csv\"} with header
           width,height,origin_x,origin_y,cell_size, one row of those values,
           then height rows of width cell values, bottom row first
  pairs    list of {\"z\": [re, im], \"w\": [re, im]}, default [{z: [1,0], w: [-1,0]}]
  quad     planar_resolution 4, excision_radii [0.1, 0.05, ... 9 halvings],
           cylinder_grid [64, 64], theta_grading_exponent 2, target_tol 1e-7,
           max_refinements 30, divergence_threshold 0.05
  engine   planar | cylinder | both, default planar
  seed     integer for randomized suites, default 0
  output   {\"path\": ..., \"format\": \"json\" | \"csv\"}, default stdout

Flags override the config. --resolution R sets planar_resolution = R and
cylinder_grid = [ceil(16 R), ceil(16 R)].

EXIT CODES:
  0 success, 1 bad config or arguments, 2 a non-converged integral,
  3 an inequality violation beyond error bars (or a failing selftest suite)";

#[derive(Debug, Parser)]
#[command(name = "cauchy-values", version, about = "Two-point Cauchy transforms of bounded densities", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format (default: json for eval, extremal, selftest; csv otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    engine: Option<Engine>,
    /// Quadrature resolution, see below.
    #[arg(long, global = true, value_name = "R")]
    resolution: Option<f64>,
    /// Target absolute tolerance of each integral.
    #[arg(long, global = true, value_name = "T")]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// C_g, E_g and the inequality verdict for every configured pair.
    Eval,
    /// Samples of the boundary curve θ ↦ I_θ.
    Curve {
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Centres and radii of the circles Γ_θ.
    Circles {
        /// Comma-separated angles in (0, π) (default: kπ/8 for k = 1..7).
        #[arg(long = "theta", value_delimiter = ',', allow_hyphen_values = true)]
        thetas: Vec<f64>,
    },
    /// Support function of Ω₁ in direction alpha.
    Extremal {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Operator model against the integral for the unit disc.
    Operator {
        /// Truncation size of the shift.
        #[arg(long, default_value_t = 400)]
        n: usize,
        /// Largest |z|, |w| of the comparison grid.
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
        /// Points per side of the grid.
        #[arg(long, default_value_t = 5)]
        grid: usize,
    },
    /// The invariant suite.
    Selftest,
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Core(Error),
    Io(std::io::Error),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

enum Report {
    Table(Table),
    Json(serde_json::Value),
}

struct Run {
    cfg: RunConfig,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl Run {
    fn new(cli: &Cli) -> Result<Self, ConfigError> {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(e) = cli.engine {
            cfg.engine = e;
        }
        if let Some(r) = cli.resolution {
            cfg.quad.planar_resolution = r;
            let cells = (16.0 * r).ceil();
            if cells.is_finite() && cells >= 1.0 {
                cfg.quad.cylinder_grid = (cells as usize, cells as usize);
            }
        }
        if let Some(t) = cli.tol {
            cfg.quad.target_tol = t;
        }
        cfg.validate()?;
        Ok(Run {
            format: cli.format.or(cfg.output.format),
            out: cli.out.clone().or_else(|| cfg.output.path.clone()),
            cfg,
        })
    }

    fn write(&self, report: &Report, default: Format) -> std::io::Result<()> {
        let text = match (report, self.format.unwrap_or(default)) {
            (Report::Table(t), Format::Csv) => t.to_csv(),
            (Report::Table(t), Format::Json) => json_text(&t.to_json()),
            (Report::Json(v), Format::Json) => json_text(v),
            (Report::Json(v), Format::Csv) => flat_table(v).to_csv(),
        };
        output::emit(&text, self.out.as_deref())
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// One-row table of the scalar leaves of a JSON object, keys joined by `.`.
fn flat_table(v: &serde_json::Value) -> Table {
    fn walk(prefix: &str, v: &serde_json::Value, keys: &mut Vec<String>, cells: &mut Vec<Cell>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, child) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, child, keys, cells);
                }
            }
            serde_json::Value::Array(_) => {}
            leaf => {
                keys.push(prefix.to_owned());
                cells.push(match leaf {
                    serde_json::Value::Bool(b) => Cell::Bool(*b),
                    serde_json::Value::Number(n) => n.as_u64().map_or_else(|| Cell::Num(n.as_f64().unwrap_or(f64::NAN)), Cell::Int),
                    serde_json::Value::String(s) => Cell::Text(s.clone()),
                    _ => Cell::Empty,
                });
            }
        }
    }
    let (mut keys, mut cells) = (Vec::new(), Vec::new());
    walk("", v, &mut keys, &mut cells);
    let mut t = Table::new(&keys);
    t.push(cells);
    t
}

const EVAL_COLUMNS: [&str; 15] = [
    "z_re",
    "z_im",
    "w_re",
    "w_im",
    "c_re",
    "c_im",
    "c_error",
    "e_re",
    "e_im",
    "gap",
    "gap_error",
    "converged",
    "classification",
    "matched_theta",
    "pointwise_agreement",
];

const BOTH_COLUMNS: [&str; 8] = [
    "planar_re",
    "planar_im",
    "planar_error",
    "cylinder_re",
    "cylinder_im",
    "cylinder_error",
    "engine_difference",
    "engines_agree",
];

struct EvalRow {
    cells: Vec<Cell>,
    converged: bool,
    violation: bool,
}

fn eval_pair(g: &GSpec, z: ComplexValue, w: ComplexValue, engine: Engine, quad: &QuadConfig) -> Result<EvalRow, Error> {
    let route = if engine == Engine::Cylinder { Route::Cylinder } else { Route::Planar };
    let cfg = QuadConfig { route, ..quad.clone() };
    let mut cells: Vec<Cell> = vec![z.re.into(), z.im.into(), w.re.into(), w.im.into()];
    let verdict = match verify_inequality(g, z, w, &cfg) {
        Ok(v) => Some(v),
        Err(Error::InconclusiveDiagonal { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut row = match &verdict {
        Some(v) => verdict_cells(v, &mut cells),
        None => {
            cells.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
            cells.extend([Cell::Bool(false), "inconclusive".into(), Cell::Empty, Cell::Empty]);
            EvalRow {
                cells: Vec::new(),
                converged: false,
                violation: false,
            }
        }
    };
    if engine == Engine::Both {
        if z == w {
            cells.extend(std::iter::repeat_n(Cell::Empty, BOTH_COLUMNS.len()));
        } else {
            let cmp = c_value_both(g, z, w, quad)?;
            cells.extend([
                cmp.planar.value.re.into(),
                cmp.planar.value.im.into(),
                cmp.planar.error_estimate.into(),
                cmp.cylinder.value.re.into(),
                cmp.cylinder.value.im.into(),
                cmp.cylinder.error_estimate.into(),
                cmp.difference.into(),
                cmp.agree.into(),
            ]);
            row.converged &= cmp.planar.converged && cmp.cylinder.converged && cmp.agree;
            cells[11] = Cell::Bool(row.converged);
        }
    }
    row.cells = cells;
    Ok(row)
}

fn verdict_cells(v: &InequalityVerdict, cells: &mut Vec<Cell>) -> EvalRow {
    match &v.c_value {
        Some(c) => cells.extend([c.value.re.into(), c.value.im.into(), c.error_estimate.into()]),
        None => cells.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
    }
    let class = match v.classification {
        Classification::StrictInterior => "strict_interior",
        Classification::BoundaryExtremal => "boundary_extremal",
        Classification::Violation => "violation",
    };
    cells.extend([
        v.e_value.re.into(),
        v.e_value.im.into(),
        v.gap.into(),
        v.error.into(),
        v.converged.into(),
        class.into(),
        v.matched_theta.map(ThetaAngle::value).into(),
        v.pointwise_agreement.into(),
    ]);
    EvalRow {
        cells: Vec::new(),
        converged: v.converged,
        violation: v.classification == Classification::Violation,
    }
}

fn cmd_eval(run: &Run) -> Result<u8, Failure> {
    let cfg = &run.cfg;
    let rows: Vec<EvalRow> = cfg
        .pairs
        .par_iter()
        .map(|p| eval_pair(&cfg.gspec, p.z, p.w, cfg.engine, &cfg.quad))
        .collect::<Result<_, _>>()?;
    let mut headers = EVAL_COLUMNS.to_vec();
    if cfg.engine == Engine::Both {
        headers.extend(BOTH_COLUMNS);
    }
    let mut table = Table::new(&headers);
    let (mut converged, mut violation) = (true, false);
    for r in rows {
        converged &= r.converged;
        violation |= r.violation;
        table.push(r.cells);
    }
    run.write(&Report::Table(table), Format::Json)?;
    Ok(if violation {
        EXIT_VIOLATION
    } else if !converged {
        EXIT_NOT_CONVERGED
    } else {
        0
    })
}

fn cmd_curve(run: &Run, n: usize) -> Result<u8, Failure> {
    let mut table = Table::new(&["theta", "re", "im"]);
    for (th, p) in omega1_boundary_samples(n)? {
        table.push(vec![th.into(), p.re.into(), p.im.into()]);
    }
    run.write(&Report::Table(table), Format::Csv)?;
    Ok(0)
}

fn cmd_circles(run: &Run, thetas: &[f64]) -> Result<u8, Failure> {
    let defaults: Vec<f64> = (1..8).map(|k| k as f64 * PI / 8.0).collect();
    let thetas = if thetas.is_empty() { &defaults[..] } else { thetas };
    let mut table = Table::new(&["theta", "center_im", "radius"]);
    for &t in thetas {
        let circ = circle_for_theta(ThetaAngle::new(t)?);
        table.push(vec![t.into(), circ.center.im.into(), circ.radius.into()]);
    }
    run.write(&Report::Table(table), Format::Csv)?;
    Ok(0)
}

fn cmd_extremal(run: &Run, alpha: f64) -> Result<u8, Failure> {
    let s = support_function(alpha, &run.cfg.quad)?;
    run.write(&Report::Json(serde_json::to_value(&s).expect("result serializes")), Format::Json)?;
    Ok(0)
}

/// `k`-th point at radius `radius·k/(grid − 1)` with angle `phase + step·k`.
fn spiral(radius: f64, grid: usize, phase: f64, step: f64) -> Vec<ComplexValue> {
    (0..grid)
        .map(|k| {
            let r = if grid > 1 { radius * k as f64 / (grid - 1) as f64 } else { 0.0 };
            Complex64::from_polar(r, phase + step * k as f64)
        })
        .collect()
}

fn cmd_operator(run: &Run, n: usize, radius: f64, grid: usize) -> Result<u8, Failure> {
    if !(radius.is_finite() && (0.0..1.0).contains(&radius)) {
        return Err(Error::Domain(format!("operator grid radius {radius} must lie in [0, 1)")).into());
    }
    if grid == 0 {
        return Err(Error::Domain("operator grid needs at least one point".into()).into());
    }
    let t = build_shift(n)?;
    let disc = GSpec::disc(Complex64::new(0.0, 0.0), 1.0)?;
    let zs = spiral(radius, grid, 0.3, 1.3);
    let ws = spiral(radius, grid, -0.9, 2.1);
    let pairs: Vec<(ComplexValue, ComplexValue)> = zs.iter().flat_map(|&z| ws.iter().map(move |&w| (z, w))).collect();
    let rows: Vec<Vec<Cell>> = pairs
        .par_iter()
        .map(|&(z, w)| {
            let op = e_operator(&t, z, w)?;
            let int = e_value(&disc, z, w, &run.cfg.quad)?;
            Ok(vec![
                z.re.into(),
                z.im.into(),
                w.re.into(),
                w.im.into(),
                op.re.into(),
                op.im.into(),
                int.re.into(),
                int.im.into(),
                (op - int).norm().into(),
            ])
        })
        .collect::<Result<_, Error>>()?;
    let mut table = Table::new(&["z_re", "z_im", "w_re", "w_im", "E_op_re", "E_op_im", "E_int_re", "E_int_im", "abs_diff"]);
    for r in rows {
        table.push(r);
    }
    run.write(&Report::Table(table), Format::Csv)?;
    Ok(0)
}

fn cmd_selftest(run: &Run) -> Result<u8, Failure> {
    let report = selftest::run(run.cfg.seed)?;
    let value = serde_json::to_value(&report).expect("report serializes");
    let out = match run.format {
        Some(Format::Csv) => {
            let mut t = Table::new(&["name", "checks", "failures", "worst_ratio"]);
            for s in &report.suites {
                t.push(vec![s.name.as_str().into(), s.checks.into(), s.failures.into(), s.worst_ratio.into()]);
            }
            Report::Table(t)
        }
        _ => Report::Json(value),
    };
    run.write(&out, Format::Json)?;
    Ok(if report.all_passed() { 0 } else { EXIT_VIOLATION })
}

fn execute(cli: &Cli) -> Result<u8, Failure> {
    let run = Run::new(cli)?;
    match &cli.command {
        Command::Eval => cmd_eval(&run),
        Command::Curve { n } => cmd_curve(&run, *n),
        Command::Circles { thetas } => cmd_circles(&run, thetas),
        Command::Extremal { alpha } => cmd_extremal(&run, *alpha),
        Command::Operator { n, radius, grid } => cmd_operator(&run, *n, *radius, *grid),
        Command::Selftest => cmd_selftest(&run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Failure::Core(Error::NotConverged { .. }) => EXIT_NOT_CONVERGED,
                _ => EXIT_CONFIG,
            })
        }
    }
}
