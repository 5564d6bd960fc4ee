//! Command-line suites over `qhm-core`: argument parsing, pattern and group
//! loading, and deterministic JSON reports.

pub mod load;
pub mod report;
pub mod suites;
pub mod tolerances;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub use load::{CliError, CliResult};
use report::Report;
use tolerances::Tolerances;

#[derive(Debug, Parser)]
#[command(name = "qhm", version, about = "Verify moduli spaces of flat connections on surfaces with boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Pattern file, or `stock:NAME` (e.g. stock:torus-one-hole, stock:4-gon).
    #[arg(long)]
    pub pattern: Option<String>,
    /// Registered group (SU2, SL2R, T2, SO3) or a JSON description file.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long, default_value_t = tolerances::SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long = "fd-step", default_value_t = tolerances::FD_STEP)]
    pub fd_step: f64,
    /// Override a tolerance, e.g. `--tol d_omega=1e-6`.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combinatorics of the pattern.
    Surface {
        #[command(flatten)]
        common: Common,
    },
    /// The 2-form suite: dω, moment, kernel, rank, degeneracy, pattern comparison.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Second pattern whose ω is pulled back and compared.
        #[arg(long)]
        compare: Option<String>,
        /// Image of a letter of the compared pattern, e.g. `d=a b a^-1`.
        #[arg(long = "map", value_name = "LETTER=WORD")]
        map: Vec<String>,
    },
    /// Explicit flows with an RK4 cross-check and a time series.
    Flow {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Goldman bracket against the numeric Poisson bracket.
    Bracket {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// `SIGN[:GAMMA[:DELTA]]` with conjugating words for α and β.
        #[arg(long = "crossing", value_name = "SIGN[:GAMMA[:DELTA]]", allow_hyphen_values = true)]
        crossings: Vec<String>,
        #[arg(long, default_value = "re-tr")]
        phi: String,
        #[arg(long, default_value = "re-tr")]
        psi: String,
    },
    /// The cylinder groupoid suite and orbit forms.
    Groupoid {
        #[command(flatten)]
        common: Common,
        /// Largest number of vertices per boundary circle for orbit checks.
        #[arg(long = "orbit-vertices", default_value_t = 3)]
        orbit_vertices: usize,
    },
    /// Dirac morphism, range/kernel and bivector suite.
    Dirac {
        #[command(flatten)]
        common: Common,
        /// Add symmetric noise of this size to ω (negative control).
        #[arg(long)]
        perturb: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    /// Flow of the loop function of the boundary circle at this vertex.
    #[arg(long = "boundary-vertex", conflicts_with = "loop_word")]
    pub boundary_vertex: Option<usize>,
    /// Loop word `α` of a Goldman flow.
    #[arg(long = "loop", requires = "target")]
    pub loop_word: Option<String>,
    /// Generator moved by the Goldman flow.
    #[arg(long)]
    pub target: Option<String>,
    /// Segment words `b₀,…,b_l` of the target (comma separated; empty allowed).
    #[arg(long, default_value = "")]
    pub segments: String,
    /// Intersection signs `ε₁,…,ε_l` (comma separated).
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub signs: String,
    #[arg(long, default_value = "re-tr")]
    pub phi: String,
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    /// RK4 steps for the cross-check.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Number of time-series intervals.
    #[arg(long, default_value_t = 4)]
    pub records: usize,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Surface { common }
            | Command::Verify { common, .. }
            | Command::Flow { common, .. }
            | Command::Bracket { common, .. }
            | Command::Groupoid { common, .. }
            | Command::Dirac { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Surface { .. } => "surface",
            Command::Verify { .. } => "verify",
            Command::Flow { .. } => "flow",
            Command::Bracket { .. } => "bracket",
            Command::Groupoid { .. } => "groupoid",
            Command::Dirac { .. } => "dirac",
        }
    }
}

/// Validated run settings shared by the suites.
pub struct Run {
    pub rng: ChaCha8Rng,
    pub samples: usize,
    pub fd_step: f64,
    pub tol: Tolerances,
}

fn config_json(cmd: &Command) -> serde_json::Value {
    let c = cmd.common();
    json!({
        "pattern": c.pattern,
        "group": c.group,
        "seed": c.seed,
        "samples": c.samples,
        "fd_step": c.fd_step,
        "tolerance_overrides": c.tol,
    })
}

/// Run a subcommand and return its report.
pub fn run(cmd: &Command) -> CliResult<Report> {
    let c = cmd.common();
    if c.samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    if !(c.fd_step > 0.0 && c.fd_step <= 1e-2) {
        return Err(CliError::Input("--fd-step must lie in (0, 1e-2]".into()));
    }
    let tol = Tolerances::parse(&c.tol).map_err(CliError::Input)?;
    let mut run = Run { rng: ChaCha8Rng::seed_from_u64(c.seed), samples: c.samples, fd_step: c.fd_step, tol };
    let mut report = Report::new(cmd.name(), config_json(cmd));
    match cmd {
        Command::Surface { common } => suites::surface(common, &mut report)?,
        Command::Verify { common, compare, map } => suites::verify(common, compare.as_deref(), map, &mut run, &mut report)?,
        Command::Flow { common, flow } => suites::flow(common, flow, &mut run, &mut report)?,
        Command::Bracket { common, alpha, beta, crossings, phi, psi } => {
            suites::bracket(common, alpha, beta, crossings, phi, psi, &mut run, &mut report)?
        }
        Command::Groupoid { common, orbit_vertices } => suites::groupoid(common, *orbit_vertices, &mut run, &mut report)?,
        Command::Dirac { common, perturb } => suites::dirac(common, *perturb, &mut run, &mut report)?,
    }
    Ok(report)
}

/// Run, write the report, and return the exit status.
pub fn main_with(cmd: &Command) -> i32 {
    match run(cmd) {
        Ok(report) => {
            let text = report.to_json();
            match &cmd.common().out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("qhm: cannot write {path}: {e}");
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            for c in report.failed_checks() {
                eprintln!("qhm: check `{}` failed: {:e} (tolerance {:e})", c.name, c.value, c.tol);
            }
            if report.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("qhm: {e}");
            e.exit_code()
        }
    }
}
