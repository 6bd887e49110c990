//! `ccgeo`: batch driver for bracket calculus, distance estimates and the
//! acceptance suite.
//!
//! Exit codes: 0 success (undecided verdicts included), 1 parse or
//! validation error, 2 a required estimate did not converge.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use ccgeo::metrics::{CcOptions, EtaOptions};
use ccgeo::structures::resolve_structure;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use commands::{MetricKind, Mode, Outcome};
use output::Emit;

#[derive(Parser, Debug)]
#[command(name = "ccgeo", version, about = "Bracket calculus and sub-Riemannian distance experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Catalog name (heisenberg1, engel, free33, flat3_2, ...) or structure file.
    #[arg(long, global = true, default_value = "heisenberg1")]
    structure: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    emit: Emit,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Arithmetic for points of the algebraic commands (default exact).
    /// Distance commands are floating point only.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Catalog model with its commutation checks.
    Catalog {
        #[arg(long)]
        name: Option<String>,
    },
    /// Bracket of frame fields `i`, `j` (1-based, full frame).
    Bracket {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        point: Option<String>,
    },
    /// Non-involutivity, or h-non-involutivity with `--h`.
    Involutivity {
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        h: Option<usize>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 3000)]
        max_iters: usize,
    },
    /// Hörmander step at a point.
    Step {
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 8)]
        max_step: usize,
    },
    /// Ball-box exponent fit along an exponential-chart axis.
    Ballbox {
        #[arg(long)]
        base: Option<String>,
        /// Chart axis, 1-based.
        #[arg(long)]
        direction: usize,
        #[arg(long, default_value = "1e-3:1e-1:5")]
        scales: String,
        #[arg(long, default_value_t = 1e-3)]
        h_int: f64,
        #[command(flatten)]
        cc: CcArgs,
    },
    /// Carnot-Carathéodory distance bracket.
    Ccdist {
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        cc: CcArgs,
    },
    /// η-box distance bracket.
    Etadist {
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 256)]
        modulus_samples: usize,
        #[command(flatten)]
        eta_opts: EtaArgs,
    },
    /// Squeezing constants per dyadic gauge band.
    Squeeze {
        #[arg(long, value_enum, default_value = "cc")]
        metric: MetricKind,
        #[arg(long, default_value_t = 2.0)]
        eta: f64,
        /// Radius of the base-point ball around the box centre.
        #[arg(long, default_value_t = 0.5)]
        region: f64,
        /// Total pairs, split evenly over the bands.
        #[arg(long, default_value_t = 24)]
        pairs: usize,
        #[arg(long, default_value_t = 4)]
        bands: usize,
        #[arg(long, default_value_t = 256)]
        modulus_samples: usize,
        #[command(flatten)]
        cc: CcArgs,
        #[arg(long, default_value_t = 5)]
        eta_budget: usize,
    },
    /// Contact set of a surface graph with the distribution.
    Tangency {
        /// `saddle`, `plane` or a surface file.
        #[arg(long)]
        surface: String,
        #[arg(long, default_value_t = 401)]
        grid: usize,
        #[arg(long, default_value_t = 1e-6)]
        tau: f64,
        /// Dyadic box-counting scales.
        #[arg(long, default_value_t = 5)]
        box_scales: usize,
    },
    /// Jacobian of a seminorm sampled on the unit sphere.
    Jacobian {
        #[arg(long)]
        seminorm: PathBuf,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Acceptance suite with a summary table.
    Report {
        /// Subset of criteria 1..=9; all ten when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<usize>>,
    },
}

#[derive(Args, Debug, Clone)]
struct CcArgs {
    #[arg(long, default_value_t = 24)]
    budget: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Endpoint tolerance of an accepted control path.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

impl CcArgs {
    fn options(&self, seed: u64) -> CcOptions {
        CcOptions { budget: self.budget, restarts: self.restarts, tolerance: self.tolerance, seed, ..Default::default() }
    }
}

#[derive(Args, Debug, Clone)]
struct EtaArgs {
    #[arg(long, default_value_t = 5)]
    budget: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Catalog { .. } => "catalog",
            Command::Bracket { .. } => "bracket",
            Command::Involutivity { .. } => "involutivity",
            Command::Step { .. } => "step",
            Command::Ballbox { .. } => "ballbox",
            Command::Ccdist { .. } => "ccdist",
            Command::Etadist { .. } => "etadist",
            Command::Squeeze { .. } => "squeeze",
            Command::Tangency { .. } => "tangency",
            Command::Jacobian { .. } => "jacobian",
            Command::Report { .. } => "report",
        }
    }

    fn algebraic(&self) -> bool {
        matches!(self, Command::Catalog { .. } | Command::Bracket { .. } | Command::Involutivity { .. } | Command::Step { .. })
    }
}

fn run(cli: &Cli) -> Result<(Outcome, &'static str), String> {
    let g = &cli.global;
    let cmd = &cli.command;
    let mode = match (cmd.algebraic(), g.mode) {
        (true, m) => m.unwrap_or(Mode::Exact),
        (false, Some(Mode::Exact)) => return Err(format!("{} runs in floating point only", cmd.name())),
        (false, _) => Mode::Float,
    };
    let structure = || resolve_structure(&g.structure).map_err(|e| e.to_string());
    let outcome = match cmd {
        Command::Catalog { name } => commands::catalog(name.as_deref().unwrap_or(&g.structure))?,
        Command::Bracket { i, j, point } => {
            let s = structure()?;
            let p = commands::parse_point(point.as_deref(), s.n(), mode)?;
            commands::bracket(&s, *i, *j, &p)?
        }
        Command::Involutivity { point, h, restarts, max_iters } => {
            let s = structure()?;
            let p = commands::parse_point(point.as_deref(), s.n(), mode)?;
            commands::involutivity(&s, &p, *h, *restarts, *max_iters, g.seed)?
        }
        Command::Step { point, max_step } => {
            let s = structure()?;
            let p = commands::parse_point(point.as_deref(), s.n(), mode)?;
            commands::step(&s, &p, *max_step)?
        }
        Command::Ballbox { base, direction, scales, h_int, cc } => {
            let s = structure()?;
            let a = commands::BallboxArgs {
                base: base.as_deref(),
                direction: *direction,
                scales,
                h_int: *h_int,
                cc: cc.options(g.seed),
            };
            commands::ballbox(&s, &a)?
        }
        Command::Ccdist { from, to, cc } => {
            let s = structure()?;
            commands::ccdist(&s, from.as_deref(), to.as_deref(), &cc.options(g.seed))?
        }
        Command::Etadist { from, to, eta, modulus_samples, eta_opts } => {
            let s = structure()?;
            let opts = EtaOptions { budget: eta_opts.budget, restarts: eta_opts.restarts, seed: g.seed, ..Default::default() };
            commands::etadist(&s, from.as_deref(), to.as_deref(), *eta, *modulus_samples, &opts)?
        }
        Command::Squeeze { metric, eta, region, pairs, bands, modulus_samples, cc, eta_budget } => {
            let s = structure()?;
            let a = commands::SqueezeArgs {
                metric: *metric,
                eta: *eta,
                radius: *region,
                pairs: *pairs,
                bands: *bands,
                modulus_samples: *modulus_samples,
                cc: cc.options(g.seed),
                eta_opts: EtaOptions { budget: *eta_budget, seed: g.seed, ..Default::default() },
            };
            commands::squeeze(&s, &a)?
        }
        Command::Tangency { surface, grid, tau, box_scales } => {
            let s = structure()?;
            commands::tangency(&s, surface, *grid, *tau, *box_scales)?
        }
        Command::Jacobian { seminorm, m } => commands::jacobian(seminorm, *m)?,
        Command::Report { criteria } => commands::report(g.seed, criteria.as_deref())?,
    };
    let mode_name = match cmd {
        Command::Report { .. } => "mixed",
        Command::Jacobian { .. } => "float",
        _ => mode.as_str(),
    };
    Ok((outcome, mode_name))
}

fn header(cli: &Cli, mode: &str, tolerances: &Value) -> Value {
    let g = &cli.global;
    let structure = match &cli.command {
        Command::Catalog { name: Some(n) } => Value::String(n.clone()),
        Command::Jacobian { .. } => Value::Null,
        _ => Value::String(g.structure.clone()),
    };
    json!({
        "command": cli.command.name(),
        "structure": structure,
        "seed": g.seed,
        "mode": mode,
        "tolerances": tolerances,
    })
}

/// Flattens nested tolerances into `a.b` keys for CSV comment lines.
fn flatten(prefix: &str, v: &Value, out: &mut serde_json::Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome, mode: &str) -> Result<(), String> {
    let head = header(cli, mode, &outcome.tolerances);
    let bytes = match cli.global.emit {
        Emit::Json => {
            let mut doc = head;
            doc["result"] = outcome.result.clone();
            output::render_json(&doc)?
        }
        Emit::Csv => {
            let mut flat = serde_json::Map::new();
            flatten("", &head, &mut flat);
            output::render_csv(&Value::Object(flat), &outcome.table)?
        }
    };
    match &cli.global.out {
        Some(path) => output::write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let (outcome, mode) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&cli, &outcome, mode) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match &outcome.unconverged {
        Some(why) => {
            eprintln!("unconverged: {why}");
            ExitCode::from(2)
        }
        None => ExitCode::SUCCESS,
    }
}
