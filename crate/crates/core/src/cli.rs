//! Command-line front end: matrix files, run configuration, result files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{prepare_state, AnsatzSpec, Entangler};
use crate::drivers::{
    find_eigenvector, find_eigenvector_normal, qpca, solve_generalized, verify, EigResult, QpcaResult, Verifiable,
    VerificationReport,
};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};
use crate::objectives::{EvalMode, Problem, DEFAULT_PENALTY};
use crate::optimizer::{Method, OptimizationTrace, OptimizerConfig, StopReason};
use crate::simulator::{pure_overlap, qubits_for_dim, DensityMatrix, StateVector};
use crate::swaptest::{destructive_swap_test, exact_pass_probability, full_swap_test, full_test_pass_probability, TestStats};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk matrix: `{"dim": n, "rows": [[[re, im], ...], ...]}` with an
/// optional `"kind": "density"` tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

pub const DENSITY_KIND: &str = "density";

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix, kind: Option<&str>) -> Self {
        MatrixFile {
            dim: m.dim(),
            rows: m.rows().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
            kind: kind.map(str::to_string),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.rows.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: self.rows.len(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        let m = ComplexMatrix::from_rows(rows)?;
        match self.kind.as_deref() {
            None => {}
            Some(DENSITY_KIND) => {
                DensityMatrix::new(m.clone())?;
            }
            Some(other) => return Err(Error::Config(format!("unknown matrix kind {other:?}"))),
        }
        Ok(m)
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn parse_matrix_str(text: &str) -> Result<ComplexMatrix> {
    parse_json::<MatrixFile>(text)?.to_matrix()
}

/// Reads a matrix file, validating shape, finiteness and, for density
/// files, the density-matrix conditions.
pub fn parse_matrix_file(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_matrix_str(&text)
}

pub fn write_matrix_file(path: &Path, m: &ComplexMatrix, kind: Option<&str>) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixFile::from_matrix(m, kind)).expect("matrix serializes");
    write_atomic(path, text.as_bytes())
}

/// Writes to a temporary sibling, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
    file.write_all(bytes).and_then(|_| file.sync_all()).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    FindEig,
    GenEig,
    NormalEig,
    Qpca,
    SwapTest,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::FindEig => "find-eig",
            CommandKind::GenEig => "gen-eig",
            CommandKind::NormalEig => "normal-eig",
            CommandKind::Qpca => "qpca",
            CommandKind::SwapTest => "swap-test",
            CommandKind::Verify => "verify",
        }
    }
}

/// Everything a run depends on. Serialized verbatim into result files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub input_v: Option<PathBuf>,
    /// Result file to check (`verify` only).
    pub result: Option<PathBuf>,
    pub qubits: Option<usize>,
    pub layers: Option<usize>,
    pub entangler: Entangler,
    pub optimizer: OptimizerConfig,
    pub mode: EvalMode,
    pub seed: u64,
    pub components: usize,
    pub penalty: f64,
    pub out: Option<PathBuf>,
    /// Angles for the two `swap-test` states.
    pub theta_a: Option<Vec<f64>>,
    pub theta_b: Option<Vec<f64>>,
}

impl RunConfig {
    /// Defaults for `command` with the given seed.
    pub fn new(command: CommandKind, seed: u64) -> Self {
        RunConfig {
            command,
            input: None,
            input_v: None,
            result: None,
            qubits: None,
            layers: None,
            entangler: Entangler::LinearChain,
            optimizer: OptimizerConfig {
                seed,
                ..OptimizerConfig::default()
            },
            mode: EvalMode::Exact,
            seed,
            components: 1,
            penalty: DEFAULT_PENALTY,
            out: None,
            theta_a: None,
            theta_b: None,
        }
    }

    fn ansatz_for_dim(&self, dim: usize) -> Result<AnsatzSpec> {
        let n = qubits_for_dim(dim)?;
        if let Some(q) = self.qubits {
            if q != n {
                return Err(Error::Dimension {
                    expected: 1 << q,
                    found: dim,
                });
            }
        }
        AnsatzSpec::new(n, self.layers.unwrap_or(n + 1), self.entangler)
    }

    fn require(&self, path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
        path.clone()
            .ok_or_else(|| Error::Config(format!("{} requires {flag}", self.command.name())))
    }
}

/// Per-evaluation best-so-far values of one optimization.
fn best_value_trace(trace: &OptimizationTrace) -> Vec<f64> {
    let mut best = f64::INFINITY;
    trace
        .evaluations
        .iter()
        .map(|r| {
            best = best.min(r.value);
            best
        })
        .collect()
}

/// Drops the per-evaluation records; the best-value trace keeps their
/// history in compact form.
fn compact(trace: &mut OptimizationTrace) -> Vec<f64> {
    let best = best_value_trace(trace);
    trace.evaluations.clear();
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapTestReport {
    pub overlap: f64,
    pub p0_exact: f64,
    pub p0_full_circuit: f64,
    pub full: Option<TestStats>,
    pub destructive: Option<TestStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema: u32,
    pub command: CommandKind,
    pub timestamp: String,
    pub seed: u64,
    pub config: RunConfig,
    pub converged: Option<bool>,
    pub stop_reason: Option<StopReason>,
    /// One best-so-far sequence per optimization in the run.
    pub best_value_traces: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig: Option<EigResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qpca: Option<QpcaResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap_test: Option<SwapTestReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl ResultFile {
    fn new(config: &RunConfig) -> Self {
        ResultFile {
            schema: SCHEMA_VERSION,
            command: config.command,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            seed: config.seed,
            config: config.clone(),
            converged: None,
            stop_reason: None,
            best_value_traces: Vec::new(),
            eig: None,
            qpca: None,
            swap_test: None,
            verification: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        parse_json(&text)
    }
}

/// Outcome of a run: the result document and the exit status it maps to.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: ResultFile,
    pub exit_code: i32,
    pub path: Option<PathBuf>,
}

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Problem described by the config's input files.
pub fn load_problem(config: &RunConfig) -> Result<Problem> {
    let input = config.require(&config.input, "--input")?;
    match config.command {
        CommandKind::FindEig => Problem::unitary_eig(parse_matrix_file(&input)?),
        CommandKind::GenEig => {
            let v = config.require(&config.input_v, "--input-v")?;
            Problem::generalized(parse_matrix_file(&input)?, parse_matrix_file(&v)?)
        }
        CommandKind::NormalEig => Problem::normal_eig(parse_matrix_file(&input)?),
        CommandKind::Qpca => {
            let rho = DensityMatrix::new(parse_matrix_file(&input)?)?;
            Problem::qpca(rho, Vec::new(), config.penalty)
        }
        CommandKind::SwapTest | CommandKind::Verify => Err(Error::UnsupportedKind(config.command.name())),
    }
}

/// Executes `config` and writes its result file when `out` is set.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.mode.validate()?;
    let mut opt = config.optimizer.clone();
    opt.seed = config.seed;
    let mut file = ResultFile::new(config);
    let exit_code = match config.command {
        CommandKind::FindEig | CommandKind::GenEig | CommandKind::NormalEig => {
            let problem = load_problem(config)?;
            let spec = config.ansatz_for_dim(problem.dim())?;
            let mut r = match &problem {
                Problem::UnitaryEig { u } => find_eigenvector(u, &spec, &opt, config.mode)?,
                Problem::Generalized { u, v } => solve_generalized(u, v, &spec, &opt, config.mode)?,
                Problem::NormalEig { a, .. } => find_eigenvector_normal(a, &spec, &opt, config.mode)?,
                Problem::Qpca(_) => unreachable!("qpca handled below"),
            };
            file.converged = Some(r.converged);
            file.stop_reason = Some(r.trace.stop_reason);
            file.best_value_traces = vec![compact(&mut r.trace)];
            let code = if r.converged { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED };
            file.eig = Some(r);
            code
        }
        CommandKind::Qpca => {
            let Problem::Qpca(q) = load_problem(config)? else {
                unreachable!("qpca input loads a qpca problem")
            };
            let spec = config.ansatz_for_dim(q.rho().dim())?;
            let mut r = qpca(q.rho(), config.components, &spec, &opt, config.mode, config.penalty)?;
            let clean = r.is_clean();
            file.converged = Some(clean);
            file.stop_reason = r.components.last().map(|c| c.trace.stop_reason);
            file.best_value_traces = r.components.iter_mut().map(|c| compact(&mut c.trace)).collect();
            file.qpca = Some(r);
            if clean {
                EXIT_CONVERGED
            } else {
                EXIT_NOT_CONVERGED
            }
        }
        CommandKind::SwapTest => {
            file.swap_test = Some(run_swap_test(config)?);
            EXIT_CONVERGED
        }
        CommandKind::Verify => {
            let report = run_verify(config)?;
            let code = if report.passed { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED };
            file.converged = Some(report.passed);
            file.verification = Some(report);
            code
        }
    };
    let path = match &config.out {
        Some(out) => Some(write_result(out, &file)?),
        None => None,
    };
    Ok(RunOutput {
        result: file,
        exit_code,
        path,
    })
}

/// Writes `file` to `out`, or into the directory `out` as
/// `{command}-seed{seed}.json`. Existing result files in a directory are
/// never replaced; a repeated run gets a numeric suffix.
pub fn write_result(out: &Path, file: &ResultFile) -> Result<PathBuf> {
    let path = if out.is_dir() {
        let stem = format!("{}-seed{}", file.command.name(), file.seed);
        let mut candidate = out.join(format!("{stem}.json"));
        let mut n = 1;
        while candidate.exists() {
            candidate = out.join(format!("{stem}-{n}.json"));
            n += 1;
        }
        candidate
    } else {
        out.to_path_buf()
    };
    write_atomic(&path, file.to_json().as_bytes())?;
    Ok(path)
}

fn swap_states(config: &RunConfig) -> Result<(StateVector, StateVector)> {
    if let (Some(a), Some(b)) = (&config.theta_a, &config.theta_b) {
        let n = config
            .qubits
            .ok_or_else(|| Error::Config("swap-test with angles requires --qubits".into()))?;
        let spec = config.ansatz_for_dim(1 << n)?;
        return Ok((prepare_state(&spec, a)?, prepare_state(&spec, b)?));
    }
    // matrix inputs: compare U|0…0⟩ with V|0…0⟩
    let u = parse_matrix_file(&config.require(&config.input, "--input or --theta-a/--theta-b")?)?;
    let v = parse_matrix_file(&config.require(&config.input_v, "--input-v")?)?;
    let n = qubits_for_dim(u.dim())?;
    let zero = StateVector::zero(n);
    Ok((zero.apply_matrix(&u)?, zero.apply_matrix(&v)?))
}

fn run_swap_test(config: &RunConfig) -> Result<SwapTestReport> {
    let (a, b) = swap_states(config)?;
    let mut report = SwapTestReport {
        overlap: pure_overlap(&a, &b)?,
        p0_exact: exact_pass_probability(&a, &b)?,
        p0_full_circuit: full_test_pass_probability(&a, &b)?,
        full: None,
        destructive: None,
    };
    if let EvalMode::Sampled { shots } = config.mode {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        report.full = Some(full_swap_test(&a, &b, shots, &mut rng)?);
        report.destructive = Some(destructive_swap_test(&a, &b, shots, &mut rng)?);
    }
    Ok(report)
}

/// Re-checks a stored result. Input files default to those recorded in the
/// result's own config.
fn run_verify(config: &RunConfig) -> Result<VerificationReport> {
    let stored = ResultFile::read(&config.require(&config.result, "--result")?)?;
    let mut original = stored.config.clone();
    if config.input.is_some() {
        original.input = config.input.clone();
    }
    if config.input_v.is_some() {
        original.input_v = config.input_v.clone();
    }
    let problem = load_problem(&original)?;
    match (&stored.eig, &stored.qpca) {
        (Some(r), _) => verify(Verifiable::Eig(r), &problem),
        (_, Some(r)) => verify(Verifiable::Qpca(r), &problem),
        _ => Err(Error::Config("result file holds no eigenvector or qpca result".into())),
    }
}

#[derive(Debug, Parser)]
#[command(name = "eigvar", version, about = "Variational eigenvector search with simulated SWAP tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvector of a unitary matrix.
    FindEig(RunArgs),
    /// Generalized eigenvector, U|e⟩ = λV|e⟩.
    GenEig(RunArgs),
    /// Eigenvector of a normal matrix.
    NormalEig(RunArgs),
    /// Leading principal components of a density matrix.
    Qpca(RunArgs),
    /// Bare SWAP test between two states.
    SwapTest(RunArgs),
    /// Re-check a result file.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EntanglerArg {
    Linear,
    Ring,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Spsa,
    NelderMead,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Matrix JSON file (U, A, or ρ).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Second matrix (V for gen-eig and swap-test).
    #[arg(long)]
    pub input_v: Option<PathBuf>,
    /// Result file to re-check (verify).
    #[arg(long)]
    pub result: Option<PathBuf>,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Ansatz layers; defaults to qubits + 1.
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long, value_enum, default_value = "linear")]
    pub entangler: EntanglerArg,
    #[arg(long, value_enum, default_value = "nelder-mead")]
    pub optimizer: OptimizerArg,
    /// Evaluation budget per restart.
    #[arg(long, default_value_t = 20_000)]
    pub max_evals: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    /// Estimate objectives from this many shots.
    #[arg(long, conflicts_with = "exact")]
    pub shots: Option<u64>,
    /// Evaluate objectives exactly (default).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub seed: u64,
    /// Number of principal components (qpca).
    #[arg(long, default_value_t = 1)]
    pub components: usize,
    /// Orthogonality penalty (qpca).
    #[arg(long, default_value_t = DEFAULT_PENALTY)]
    pub penalty_c: f64,
    /// Result file, or directory for `{command}-seed{seed}.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated angles of the first swap-test state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta_a: Option<Vec<f64>>,
    /// Comma-separated angles of the second swap-test state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta_b: Option<Vec<f64>>,
}

impl RunArgs {
    pub fn into_config(self, command: CommandKind) -> RunConfig {
        let mut c = RunConfig::new(command, self.seed);
        c.input = self.input;
        c.input_v = self.input_v;
        c.result = self.result;
        c.qubits = self.qubits;
        c.layers = self.layers;
        c.entangler = match self.entangler {
            EntanglerArg::Linear => Entangler::LinearChain,
            EntanglerArg::Ring => Entangler::Ring,
        };
        c.optimizer.method = match self.optimizer {
            OptimizerArg::Spsa => Method::Spsa,
            OptimizerArg::NelderMead => Method::NelderMead,
        };
        c.optimizer.max_evals = self.max_evals;
        c.optimizer.restarts = self.restarts;
        c.mode = match self.shots {
            Some(shots) => EvalMode::Sampled { shots },
            None => EvalMode::Exact,
        };
        c.components = self.components;
        c.penalty = self.penalty_c;
        c.out = self.out;
        c.theta_a = self.theta_a;
        c.theta_b = self.theta_b;
        c
    }
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        match self.command {
            Command::FindEig(a) => a.into_config(CommandKind::FindEig),
            Command::GenEig(a) => a.into_config(CommandKind::GenEig),
            Command::NormalEig(a) => a.into_config(CommandKind::NormalEig),
            Command::Qpca(a) => a.into_config(CommandKind::Qpca),
            Command::SwapTest(a) => a.into_config(CommandKind::SwapTest),
            Command::Verify(a) => a.into_config(CommandKind::Verify),
        }
    }
}

/// `{"error": {"kind": ..., "message": ...}}`.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": { "kind": err.kind(), "message": err.to_string() } }).to_string()
}

/// Runs a parsed command line; prints the result (or its path) to stdout
/// and errors to stderr. Returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let config = cli.into_config();
    match run(&config) {
        Ok(out) => {
            match &out.path {
                Some(p) => println!("{}", p.display()),
                None => println!("{}", out.result.to_json()),
            }
            out.exit_code
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            EXIT_ERROR
        }
    }
}
