//! The `lp-extremal` command line.
//!
//! Every subcommand writes one JSON report (schema `"1"`) to stdout or
//! `--out`. Exit status is 0 on success, 2 on invalid input and 1 when a
//! computation fails or a certification criterion does not pass.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::certify;
use crate::chebyshev::{ambient_radius, equidistant_core, relative_radius, SolverConfig};
use crate::error::{Error, Result};
use crate::extremal::{
    extract_simplex, extremality_ratio, jung_constant, separated_subset, SimplexSearch,
};
use crate::gallery::{default_levels, indicator_family, rademacher_family, random_family};
use crate::io::{read_point_set, read_weights, to_csv, PointSetDocument};
use crate::report::Report;
use crate::simplex::SimplexWeights;
use crate::space::PointSet;
use crate::williams_wells::ww_sides;

#[derive(Debug, Parser)]
#[command(name = "lp-extremal", version, about = "Chebyshev radii, Jung extremality and simplex witnesses for finite L_p sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// Point-set file (.json, or .csv together with --p)
    file: PathBuf,
    /// Exponent; required for CSV input, overrides the file's value for JSON
    #[arg(long)]
    p: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Solver {
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long = "max-iters", default_value_t = 50_000)]
    max_iters: usize,
    /// Enables seeded random restarts
    #[arg(long)]
    seed: Option<u64>,
}

impl Solver {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyKind {
    Indicator,
    Rademacher,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relative (or ambient) Chebyshev radius and center
    Radius {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: Solver,
        /// Let the center range over the whole space
        #[arg(long)]
        ambient: bool,
    },
    /// Equidistant core of the set
    Core {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: Solver,
    },
    /// Both sides of the Williams-Wells inequality
    WwCheck {
        #[command(flatten)]
        input: Input,
        /// Weights file (JSON array or {"weights": [...]}); uniform if absent
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Jung constant of L_p
    Jung {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio r(A)/d(A) against the Jung constant
    Classify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver: Solver,
    },
    /// Search for an m-simplex with all edges at least d(A) - epsilon
    Simplex {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        epsilon: f64,
    },
    /// Greedy maximal delta-separated subset
    Separated {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: f64,
    },
    /// Emit a point set from one of the built-in families
    Gallery {
        #[arg(long, value_enum)]
        family: FamilyKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Dyadic depth for rademacher, number of cells for random
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the acceptance suite
    Certify {
        /// Run only this criterion
        #[arg(long)]
        only: Option<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (including the program name), runs the subcommand, and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn header(set: &PointSet) -> Report {
    Report::new()
        .num("p", set.space().p())
        .num("alpha", set.space().alpha())
        .raw("n", json!(set.len()))
        .raw("cells", json!(set.space().dim()))
}

fn seed_value(seed: Option<u64>) -> Value {
    seed.map_or(Value::Null, |s| json!(s))
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Radius {
            input,
            solver,
            ambient,
        } => {
            let set = read_point_set(&input.file, input.p)?;
            let cfg = solver.config();
            let s = if ambient {
                ambient_radius(&set, &cfg)?
            } else {
                relative_radius(&set, &cfg)?
            };
            let report = header(&set)
                .raw("seed", seed_value(solver.seed))
                .raw("kind", json!(if ambient { "ambient" } else { "relative" }))
                .num("radius", s.radius)
                .num("diameter", set.diameter())
                .num("gap_estimate", s.gap_estimate)
                .raw("iterations", json!(s.iterations))
                .value("center", &s.center)?
                .value("weights", &s.weights)?
                .value("distances", s.distances(&set))?;
            emit(&report.to_json(), input.out.as_deref())?;
        }
        Command::Core { input, solver } => {
            let set = read_point_set(&input.file, input.p)?;
            let core = equidistant_core(&set, &solver.config())?;
            let report = header(&set)
                .raw("seed", seed_value(solver.seed))
                .value("core_indices", &core.indices)?
                .num("radius", core.solution.radius)
                .num("input_radius", core.input_radius)
                .num("equidistance_defect", core.equidistance_defect())
                .raw("rounds", json!(core.rounds))
                .raw("cycled", json!(core.cycled))
                .value("center", &core.solution.center)?;
            emit(&report.to_json(), input.out.as_deref())?;
        }
        Command::WwCheck { input, weights } => {
            let set = read_point_set(&input.file, input.p)?;
            let w = match weights {
                Some(path) => read_weights(&path)?,
                None => SimplexWeights::uniform(set.len()),
            };
            let sides = ww_sides(&set, &w)?;
            let report = header(&set)
                .num("lhs", sides.lhs)
                .num("rhs", sides.rhs)
                .num("gap", sides.gap())
                .num("relative_gap", sides.relative_gap())
                .value("weights", &w)?;
            emit(&report.to_json(), input.out.as_deref())?;
        }
        Command::Jung { p, out } => {
            let jung = jung_constant(p)?;
            let report = Report::new().num("p", p).num("jung", jung);
            emit(&report.to_json(), out.as_deref())?;
        }
        Command::Classify { input, solver } => {
            let set = read_point_set(&input.file, input.p)?;
            let r = extremality_ratio(&set, &solver.config())?;
            let report = header(&set)
                .raw("seed", seed_value(solver.seed))
                .num("radius", r.radius)
                .num("diameter", r.diameter)
                .num("ratio", r.ratio)
                .num("jung", r.jung)
                .num("margin", r.jung - r.ratio)
                .value("classification", r.classification)?;
            emit(&report.to_json(), input.out.as_deref())?;
        }
        Command::Simplex { input, m, epsilon } => {
            let set = read_point_set(&input.file, input.p)?;
            let search = extract_simplex(&set, m, epsilon)?;
            let mut report = header(&set)
                .num("diameter", set.diameter())
                .raw("m", json!(m))
                .num("epsilon", epsilon);
            report = match &search {
                SimplexSearch::Found(w) => report
                    .raw("status", json!("found"))
                    .value("witness_indices", &w.indices)?
                    .num("min_edge", w.min_edge)
                    .num("threshold_alpha", w.threshold_alpha)
                    .raw("backtracks", json!(w.backtracks)),
                SimplexSearch::Infeasible {
                    threshold_alpha,
                    backtracks,
                } => report
                    .raw("status", json!("infeasible"))
                    .raw("witness_indices", Value::Null)
                    .raw("min_edge", Value::Null)
                    .num("threshold_alpha", *threshold_alpha)
                    .raw("backtracks", json!(backtracks)),
            };
            emit(&report.to_json(), input.out.as_deref())?;
        }
        Command::Separated { input, delta } => {
            let set = read_point_set(&input.file, input.p)?;
            let chosen = separated_subset(&set, delta)?;
            let min_edge = chosen
                .iter()
                .enumerate()
                .flat_map(|(a, &i)| chosen[a + 1..].iter().map(move |&j| (i, j)))
                .map(|(i, j)| set.distance(i, j))
                .fold(f64::INFINITY, f64::min);
            let report = header(&set)
                .num("diameter", set.diameter())
                .num("delta", delta)
                .raw("count", json!(chosen.len()))
                .value("witness_indices", &chosen)?
                .num("min_edge", min_edge);
            emit(&report.to_json(), input.out.as_deref())?;
        }
        Command::Gallery {
            family,
            n,
            p,
            k,
            seed,
            out,
            format,
        } => {
            let (fam, k_used) = match family {
                FamilyKind::Indicator => (indicator_family(n, p)?, None),
                FamilyKind::Rademacher => {
                    let k = k.unwrap_or_else(|| default_levels(n));
                    (rademacher_family(n, p, k)?, Some(k))
                }
                FamilyKind::Random => {
                    let k = k.unwrap_or(4);
                    if k == 0 {
                        return Err(Error::InvalidArgument("--k must be positive".into()));
                    }
                    (random_family(seed, n, k as usize, p, (-1.0, 1.0))?, Some(k))
                }
            };
            let text = match format {
                Format::Csv => to_csv(&fam.points)?.trim_end().to_string(),
                Format::Json => {
                    let doc = PointSetDocument::from_set(&fam.points);
                    Report::new()
                        .raw("family", json!(fam.name))
                        .raw("n", json!(n))
                        .raw("k", json!(k_used))
                        .raw("seed", json!(seed))
                        .num("p", doc.p)
                        .value("cells", &doc.cells)?
                        .value("points", &doc.points)?
                        .to_json()
                }
            };
            emit(&text, out.as_deref())?;
        }
        Command::Certify { only, out } => {
            let outcomes = match only {
                Some(id) => vec![certify::run_criterion(id)?],
                None => certify::run_all()?,
            };
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            let passed = outcomes.iter().all(|o| o.passed);
            let report = Report::new()
                .raw("seed", json!(certify::BASE_SEED))
                .raw("passed", json!(passed))
                .value("criteria", &outcomes)?;
            emit(&report.to_json(), out.as_deref())?;
            return Ok(if passed { 0 } else { 1 });
        }
    }
    Ok(0)
}
