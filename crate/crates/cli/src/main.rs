use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crobs_core::grid::GridSpec;
use crobs_core::io::{field_from_json, field_from_json_f64};
use crobs_core::report::{compute_grid, compute_jet};
use crobs_core::solvers::{self, Backend, SolveConfig};
use crobs_core::verify::{self, SuiteReport};
use crobs_core::CrError;

/// Pseudohermitian invariants and deformation solvers on perturbed CR 3-spheres.
#[derive(Parser, Debug)]
#[command(name = "crobs", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Truncation degree N.
    #[arg(long, global = true)]
    degree: Option<u32>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Jet order K.
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Grid bandwidth L.
    #[arg(long, global = true)]
    bandwidth: Option<usize>,
    /// Solver iteration cap.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BackendArg {
    Jet,
    Grid,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Jet => Backend::Jet,
            BackendArg::Grid => Backend::Grid,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Full deformed structure for an input deformation tensor.
    Compute {
        #[arg(long)]
        input: String,
    },
    /// Run a verification suite and print a pass/fail table.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        pmax: Option<u32>,
        /// Number of random samples for randomized suites.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Partial solve P_Im O(psi + phi0) = 0.
    Solve {
        #[arg(long)]
        phi0: String,
    },
    /// Kuranishi value after a converged grid solve.
    Kuranishi {
        #[arg(long)]
        phi0: String,
    },
    /// Second-order obstruction of phi(t) = t*phidot + (t^2/2)*phiddot.
    Rigidity {
        #[arg(long)]
        phidot: String,
        #[arg(long)]
        phiddot: Option<String>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Suite {
    Spectra,
    Bounds,
    Identity,
    Kernel,
    Image,
    Equivalence,
    Rigidity,
    Solver,
}

struct Fail {
    code: u8,
    msg: String,
}

impl From<CrError> for Fail {
    fn from(e: CrError) -> Fail {
        let code = if matches!(e, CrError::Diverged { .. }) {
            3
        } else {
            2
        };
        Fail {
            code,
            msg: e.to_string(),
        }
    }
}

fn input_error(msg: impl Into<String>) -> Fail {
    Fail {
        code: 2,
        msg: msg.into(),
    }
}

/// Inline JSON if it starts with '{', else a path.
fn read_arg(s: &str) -> Result<String, Fail> {
    if s.trim_start().starts_with('{') {
        return Ok(s.to_string());
    }
    std::fs::read_to_string(s).map_err(|e| input_error(format!("{s}: {e}")))
}

fn emit<T: Serialize>(c: &Common, v: &T) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(v).map_err(|e| input_error(e.to_string()))? + "\n";
    match &c.out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve_config(c: &Common) -> SolveConfig {
    let d = SolveConfig::default();
    SolveConfig {
        truncation: c.degree.unwrap_or(d.truncation),
        backend: c.backend.map(Backend::from).unwrap_or(d.backend),
        tol: c.tol.unwrap_or(d.tol),
        jet_order: c.order.unwrap_or(d.jet_order),
        grid: c.bandwidth.map(GridSpec::for_bandwidth),
        max_iter: c.max_iter.unwrap_or(d.max_iter),
        ..d
    }
}

fn check_degree(n: u32) -> Result<u32, Fail> {
    if n < 4 {
        return Err(input_error(format!("degree {n} < 4")));
    }
    Ok(n)
}

fn compute(c: &Common, input: &str) -> Result<u8, Fail> {
    let text = read_arg(input)?;
    let n = check_degree(c.degree.unwrap_or(8))?;
    let report = match c.backend.map(Backend::from).unwrap_or(Backend::Grid) {
        Backend::Jet => {
            let k = c.order.unwrap_or(4);
            if k < 2 {
                return Err(input_error("jet order must be at least 2"));
            }
            compute_jet(&field_from_json(&text)?, k, n)?
        }
        Backend::Grid => {
            let phi = field_from_json_f64(&text)?;
            let l = c
                .bandwidth
                .unwrap_or(3 * n.max(phi.max_degree()) as usize + 4);
            compute_grid(&phi, GridSpec::for_bandwidth(l), n)?
        }
    };
    emit(c, &report)?;
    Ok(0)
}

fn run_suite(
    c: &Common,
    suite: Suite,
    pmax: Option<u32>,
    count: Option<usize>,
) -> Vec<SuiteReport> {
    let seed = c.seed;
    match suite {
        Suite::Spectra => vec![verify::spectra(c.degree.unwrap_or(10))],
        Suite::Kernel => vec![verify::kernel(c.degree.unwrap_or(8))],
        Suite::Image => vec![verify::image(c.degree.unwrap_or(10))],
        Suite::Bounds => vec![verify::bounds(pmax.unwrap_or(200))],
        Suite::Identity => {
            vec![verify::identity(
                seed,
                count.unwrap_or(20),
                c.order.unwrap_or(4),
                c.tol.unwrap_or(1e-9),
            )]
        }
        Suite::Equivalence => vec![verify::equivalence(
            seed,
            count.unwrap_or(10),
            1e-2,
            c.order.unwrap_or(8),
            c.bandwidth.unwrap_or(24),
            c.tol.unwrap_or(1e-8),
        )],
        Suite::Rigidity => vec![verify::rigidity(
            pmax.unwrap_or(6),
            seed,
            count.unwrap_or(5),
        )],
        Suite::Solver => {
            let (a, b) = verify::solver(pmax.unwrap_or(4), seed, &solve_config(c));
            vec![a, b]
        }
    }
}

fn verify_cmd(
    c: &Common,
    suite: Suite,
    pmax: Option<u32>,
    count: Option<usize>,
) -> Result<u8, Fail> {
    if let Some(n) = c.degree {
        check_degree(n)?;
    }
    let reports = run_suite(c, suite, pmax, count);
    for r in &reports {
        print!("{}", r.table());
    }
    if let Some(p) = &c.out {
        let text =
            serde_json::to_string_pretty(&reports).map_err(|e| input_error(e.to_string()))? + "\n";
        std::fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
    }
    Ok(if reports.iter().all(|r| r.passed()) {
        0
    } else {
        1
    })
}

fn solve(c: &Common, phi0: &str) -> Result<u8, Fail> {
    let text = read_arg(phi0)?;
    let cfg = solve_config(c);
    let report = match cfg.backend {
        Backend::Jet => solvers::partial_solve_jet(&field_from_json(&text)?, &cfg)?.1,
        Backend::Grid => {
            solvers::partial_solve_grid(&field_from_json_f64(&text)?, &cfg, None)?.report
        }
    };
    emit(c, &report)?;
    Ok(if report.converged { 0 } else { 3 })
}

fn kuranishi(c: &Common, phi0: &str) -> Result<u8, Fail> {
    let text = read_arg(phi0)?;
    let cfg = SolveConfig {
        backend: Backend::Grid,
        ..solve_config(c)
    };
    let sol = solvers::kuranishi(&field_from_json_f64(&text)?, &cfg)?;
    emit(c, &sol.report)?;
    Ok(0)
}

fn rigidity(c: &Common, phidot: &str, phiddot: Option<&str>) -> Result<u8, Fail> {
    let u = field_from_json(&read_arg(phidot)?)?;
    let ud = phiddot
        .map(|s| read_arg(s).and_then(|t| Ok(field_from_json(&t)?)))
        .transpose()?;
    let report = solvers::second_order_obstruction(&u, ud.as_ref())?;
    emit(c, &report)?;
    Ok(0)
}

fn init_threads() -> Result<(), Fail> {
    if let Ok(s) = std::env::var("CROBS_THREADS") {
        let n: usize = s
            .parse()
            .map_err(|_| input_error(format!("CROBS_THREADS={s:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input_error(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let r = init_threads().and_then(|_| match &cli.cmd {
        Cmd::Compute { input } => compute(c, input),
        Cmd::Verify { suite, pmax, count } => verify_cmd(c, *suite, *pmax, *count),
        Cmd::Solve { phi0 } => solve(c, phi0),
        Cmd::Kuranishi { phi0 } => kuranishi(c, phi0),
        Cmd::Rigidity { phidot, phiddot } => rigidity(c, phidot, phiddot.as_deref()),
    });
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("crobs: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
