//! `polarcone`: sticky-particle simulation, polar-cone certificates and
//! stress recovery from the command line.
//!
//! Diagnostics go to stderr as one `key=value` line per event. Exit codes:
//! 0 success, 1 failed certificate or verification (or an infeasible
//! recovery), 2 solver did not converge, 3 I/O or validation error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polarcone::io::{
    self, FileError, FlowFile, ProblemFile, ProjectionFile, ResidualFile,
};
use polarcone::stress_recovery::{gauge_basis, verify_representation_with, VerifyOptions};
use polarcone::{
    polar_membership_1d, polar_residual, project_monotone_1d, recover_stress, riedl_gauge,
    sticky_evolve, Error, GaugeOptions, RecoveryResult, SolverOptions, StickyState, SymmetricField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (format revision 1)");

#[derive(Parser)]
#[command(name = "polarcone", version = VERSION, about = "Monotone-map projections, sticky particles and PSD stress recovery")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file with solver settings; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Relative solver tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap of the conic solver.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Over-relaxation factor in (0, 2).
    #[arg(long, global = true)]
    relax: Option<f64>,
    /// Drop the trace row; the total trace is then only bounded by G(id).
    #[arg(long, global = true)]
    no_identity_row: bool,
    /// Seed of every random draw (gauge directions, held-out test fields).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sticky-particle trajectory as CSV `t,index,X,V,block_id`.
    Simulate {
        /// StickyState JSON.
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated output times.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["t_end", "steps"])]
        times: Option<Vec<f64>>,
        /// Final time of a uniform time grid starting at 0.
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Number of intervals of the uniform time grid.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Weighted projection onto nondecreasing vectors, from `{"y","weights"}`.
    Project {
        /// ProjectionFile JSON.
        #[arg(long)]
        input: PathBuf,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Polar-cone certificate, either of a residual file `{"Y","X","atoms","weights"}`
    /// or of the sticky flow in a StickyState file at time `--t`.
    Certify {
        /// ResidualFile or StickyState JSON.
        #[arg(long)]
        input: PathBuf,
        /// Time at which to certify a StickyState input.
        #[arg(long)]
        t: Option<f64>,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Minimum-trace PSD stress field for a problem file.
    Recover {
        /// Problem JSON `{"grid","F","H","gamma"}`.
        #[arg(long)]
        problem: PathBuf,
        /// RecoveryResult JSON; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-cell CSV dump of M.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-check a RecoveryResult against its problem on fresh test fields.
    Verify {
        /// Problem JSON the result was recovered from.
        #[arg(long)]
        problem: PathBuf,
        /// RecoveryResult JSON.
        #[arg(long)]
        result: PathBuf,
        /// Number of held-out test deformations.
        #[arg(long)]
        n_fields: Option<usize>,
        /// VerificationReport JSON; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Gauge values p(v) for given or random directions v.
    Gauge {
        /// Problem JSON.
        #[arg(long)]
        problem: PathBuf,
        /// JSON list of fields; random Gaussian fields when absent.
        #[arg(long)]
        fields: Option<PathBuf>,
        /// Number of random fields.
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Also report <v, M> for the field of this RecoveryResult.
        #[arg(long)]
        result: Option<PathBuf>,
        /// Closed-form upper bound instead of the conic solve.
        #[arg(long)]
        fast: bool,
    },
    /// Problem file from a monotone flow, `{"grid","f","h","e","gamma","rho"}`.
    GenInstance {
        /// Flow JSON.
        #[arg(long)]
        flow: PathBuf,
        /// Problem JSON; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Settings read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    identity_row: Option<bool>,
    solver: Option<SolverOptions>,
    gauge: Option<GaugeOptions>,
    n_fields: Option<usize>,
}

/// Effective settings after merging the config file and the flags.
#[derive(Debug)]
struct RunConfig {
    seed: u64,
    identity_row: bool,
    solver: SolverOptions,
    gauge: GaugeOptions,
    n_fields: usize,
}

impl RunConfig {
    fn resolve(c: &Common) -> Result<Self, Failure> {
        let file: FileConfig = match &c.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let mut solver = file.solver.unwrap_or_default();
        if let Some(t) = c.tol {
            solver.tol = t;
        }
        if let Some(m) = c.max_iter {
            solver.max_iter = m;
        }
        if let Some(r) = c.relax {
            solver.relax = r;
        }
        solver.validate().map_err(Failure::from)?;
        let identity_row = !c.no_identity_row && file.identity_row.unwrap_or(true);
        Ok(RunConfig {
            seed: c.seed.or(file.seed).unwrap_or(0),
            identity_row,
            solver,
            gauge: file.gauge.unwrap_or_default(),
            n_fields: file.n_fields.unwrap_or(VerifyOptions::default().n_fields),
        })
    }
}

/// Exit code with its diagnostic.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn invalid(message: String) -> Self {
        Failure {
            code: 3,
            kind: "invalid",
            message,
        }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        let kind = match e {
            FileError::Io { .. } => "io",
            FileError::Json { .. } | FileError::Csv(_) => "format",
            FileError::Invalid(_) => "invalid",
        };
        Failure {
            code: 3,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible { .. } => Failure {
                code: 1,
                kind: "infeasible",
                message: e.to_string(),
            },
            Error::Inconsistent(_) => Failure {
                code: 1,
                kind: "inconsistent",
                message: e.to_string(),
            },
            _ => Failure::invalid(e.to_string()),
        }
    }
}

/// One `key=value` diagnostic line; values with spaces are quoted.
fn diag(pairs: &[(&str, String)]) {
    let line: Vec<String> = pairs
        .iter()
        .map(|(k, v)| {
            if v.is_empty() || v.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
                format!("{k}={v:?}")
            } else {
                format!("{k}={v}")
            }
        })
        .collect();
    eprintln!("{}", line.join(" "));
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => io::write_file(path, bytes).map_err(Failure::from),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::invalid(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| {
        let cfg = RunConfig::resolve(&cli.common)?;
        run(&cli.command, &cfg)
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            diag(&[("status", "error".into()), ("kind", f.kind.into()), ("message", f.message)]);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("POLARCONE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::invalid(format!("POLARCONE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::invalid(e.to_string()))
}

fn run(command: &Command, cfg: &RunConfig) -> Result<u8, Failure> {
    match command {
        Command::Simulate {
            state,
            times,
            t_end,
            steps,
            output,
        } => simulate(state, times.as_deref(), *t_end, *steps, output.as_deref()),
        Command::Project { input, output } => project(input, output.as_deref()),
        Command::Certify { input, t, output } => certify(input, *t, output.as_deref()),
        Command::Recover { problem, output, csv } => recover(problem, output.as_deref(), csv.as_deref(), cfg),
        Command::Verify {
            problem,
            result,
            n_fields,
            output,
        } => verify(problem, result, n_fields.unwrap_or(cfg.n_fields), output.as_deref(), cfg),
        Command::Gauge {
            problem,
            fields,
            count,
            result,
            fast,
        } => gauge(problem, fields.as_deref(), *count, result.as_deref(), *fast, cfg),
        Command::GenInstance { flow, output } => gen_instance(flow, output.as_deref()),
    }
}

fn simulate(state: &Path, times: Option<&[f64]>, t_end: f64, steps: usize, output: Option<&Path>) -> Result<u8, Failure> {
    let s: StickyState = io::read_json(state)?;
    let times: Vec<f64> = match times {
        Some(t) => t.to_vec(),
        None => {
            if steps == 0 || !(t_end >= 0.0) {
                return Err(Failure::invalid("need steps >= 1 and t_end >= 0".into()));
            }
            (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect()
        }
    };
    if times.contains(&0.0) && s.initial_velocity_ambiguous() {
        diag(&[
            ("warning", "initial_velocity".into()),
            ("detail", "coincident initial atoms with different velocities; V at t=0 is the right limit".into()),
        ]);
    }
    let rows = io::trajectory(&s, &times)?;
    let mut buf = Vec::new();
    io::write_trajectory(&mut buf, &rows)?;
    emit(output, &buf)?;
    diag(&[("command", "simulate".into()), ("status", "ok".into()), ("rows", rows.len().to_string())]);
    Ok(0)
}

#[derive(Serialize)]
struct ProjectionOut {
    #[serde(rename = "X")]
    x: Vec<f64>,
}

fn project(input: &Path, output: Option<&Path>) -> Result<u8, Failure> {
    let p: ProjectionFile = io::read_json(input)?;
    let x = project_monotone_1d(&p.y, &p.weights)?;
    emit(output, io::to_json(&ProjectionOut { x: x.into_vec() }).as_bytes())?;
    diag(&[("command", "project".into()), ("status", "ok".into())]);
    Ok(0)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CertifyInput {
    Residual(ResidualFile),
    Sticky(StickyState),
}

fn certify(input: &Path, t: Option<f64>, output: Option<&Path>) -> Result<u8, Failure> {
    let cert = match io::read_json::<CertifyInput>(input)? {
        CertifyInput::Residual(r) => {
            if t.is_some() {
                return Err(Failure::invalid("--t applies to StickyState input only".into()));
            }
            polar_membership_1d(&r.y, &r.x, &r.measure()?)?
        }
        CertifyInput::Sticky(s) => {
            let t = t.ok_or_else(|| Failure::invalid("StickyState input needs --t".into()))?;
            let x = sticky_evolve(&s, t)?;
            polar_membership_1d(&polar_residual(&s, t)?, &x, s.measure())?
        }
    };
    emit(output, io::to_json(&cert).as_bytes())?;
    diag(&[
        ("command", "certify".into()),
        ("feasible", cert.feasible.to_string()),
        ("inner_product", format!("{:e}", cert.inner_product)),
    ]);
    Ok(if cert.feasible { 0 } else { 1 })
}

fn recover(problem: &Path, output: Option<&Path>, csv: Option<&Path>, cfg: &RunConfig) -> Result<u8, Failure> {
    let pf: ProblemFile = io::read_json(problem)?;
    let p = pf.to_problem(cfg.identity_row)?;
    let r = recover_stress(&p, &cfg.solver)?;
    emit(output, io::to_json(&r).as_bytes())?;
    if let Some(path) = csv {
        let mut buf = Vec::new();
        io::write_field_csv(&mut buf, &r.m, p.grid())?;
        io::write_file(path, &buf)?;
    }
    diag(&[
        ("command", "recover".into()),
        ("status", if r.converged { "converged" } else { "max_iter" }.into()),
        ("iterations", r.iterations.to_string()),
        ("residual_inf", format!("{:e}", r.residual_inf)),
        ("min_eigenvalue", format!("{:e}", r.min_eigenvalue)),
        ("total_trace", format!("{:e}", r.total_trace)),
        ("trace_budget", format!("{:e}", r.trace_budget)),
    ]);
    Ok(if r.converged { 0 } else { 2 })
}

fn verify(problem: &Path, result: &Path, n_fields: usize, output: Option<&Path>, cfg: &RunConfig) -> Result<u8, Failure> {
    let pf: ProblemFile = io::read_json(problem)?;
    let r: RecoveryResult = io::read_json(result)?;
    // hold the field to the same trace mode it was recovered under
    let p = pf.to_problem(r.identity_residual.is_some())?;
    let opts = VerifyOptions {
        seed: cfg.seed,
        n_fields,
        tol: cfg.solver.tol,
    };
    let report = verify_representation_with(&r.m, &p, &opts)?;
    emit(output, io::to_json(&report).as_bytes())?;
    diag(&[
        ("command", "verify".into()),
        ("passed", report.passed().to_string()),
        ("residual_inf", format!("{:e}", report.residual_inf)),
        ("min_eigenvalue", format!("{:e}", report.min_eigenvalue)),
        ("trace_ok", report.trace_ok.to_string()),
    ]);
    Ok(if report.passed() { 0 } else { 1 })
}

#[derive(Serialize)]
struct GaugeValue {
    index: usize,
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<f64>,
}

fn gauge(
    problem: &Path,
    fields: Option<&Path>,
    count: usize,
    result: Option<&Path>,
    fast: bool,
    cfg: &RunConfig,
) -> Result<u8, Failure> {
    let pf: ProblemFile = io::read_json(problem)?;
    let p = pf.to_problem(cfg.identity_row)?;
    let vs: Vec<SymmetricField> = match fields {
        Some(path) => io::read_json(path)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let d = p.dim();
            let len = p.grid().n_cells() * d * (d + 1) / 2;
            (0..count)
                .map(|_| SymmetricField::from_packed(d, (0..len).map(|_| rng.sample(StandardNormal)).collect()))
                .collect::<Result<_, _>>()?
        }
    };
    let m = match result {
        Some(path) => Some(io::read_json::<RecoveryResult>(path)?.m),
        None => None,
    };
    let opts = GaugeOptions { fast, ..cfg.gauge.clone() };
    let l = gauge_basis(&p);
    let mut values = Vec::with_capacity(vs.len());
    for (index, v) in vs.iter().enumerate() {
        let pv = riedl_gauge(&p, v, &l, &opts)?;
        let pairing = match &m {
            Some(m) => {
                v.check_grid(p.grid()).map_err(Failure::from)?;
                Some(v.pairing(m))
            }
            None => None,
        };
        values.push(GaugeValue { index, p: pv, pairing });
    }
    emit(None, io::to_json(&values).as_bytes())?;
    diag(&[("command", "gauge".into()), ("status", "ok".into()), ("count", values.len().to_string())]);
    Ok(0)
}

fn gen_instance(flow: &Path, output: Option<&Path>) -> Result<u8, Failure> {
    let f: FlowFile = io::read_json(flow)?;
    let inst = f.instance()?;
    emit(output, io::to_json(&inst).as_bytes())?;
    diag(&[
        ("command", "gen-instance".into()),
        ("status", "ok".into()),
        ("atoms", inst.f.len().to_string()),
    ]);
    Ok(0)
}
