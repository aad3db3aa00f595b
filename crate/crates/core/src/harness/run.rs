use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::davidson::{davidson_solve, DavidsonOptions, Operator, Solution};
use crate::determinant::{all_strings, BitString, DEFAULT_BIT_LENGTH};
use crate::engine::{
    build_stored_matrix, plan_decomposition, Basis, BasisOptions, MatrixFree, TaskKind, DEFAULT_MEMORY_BUDGET,
};
use crate::error::{Error, Result};
use crate::harness::detlist::{read_det_list, write_det_list, DetList};
use crate::harness::report::{ConfigEcho, RunReport, StopReason, TimingBreakdown, REPORT_SCHEMA};
use crate::harness::shuffle::shuffle_basis;
use crate::integrals::IntegralTable;
use crate::oracle::{dense_ground_state, dense_hamiltonian, select_basis, DEFAULT_ORACLE_CAP};
use crate::slater_condon::Hamiltonian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MatrixFree,
    Stored,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::MatrixFree => "matrix_free",
            Method::Stored => "stored",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "matrix_free" | "matrix-free" => Ok(Method::MatrixFree),
            "stored" => Ok(Method::Stored),
            _ => Err(format!("unknown method `{s}` (expected matrix_free or stored)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown report format `{s}` (expected text or json)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub integrals_path: PathBuf,
    /// `None` runs the full alpha × beta space of the integrals.
    pub dets_path: Option<PathBuf>,
    /// `None` picks `2 * norbs` when that fits one word, else 20.
    pub bit_length: Option<u32>,
    pub a: usize,
    pub b: usize,
    pub t: usize,
    pub r: usize,
    pub method: Method,
    pub cache: bool,
    pub shuffle: bool,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
    pub memory_budget: u64,
    pub report_format: ReportFormat,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Include wall times in the report.
    pub timings: bool,
}

impl RunConfig {
    pub fn new(integrals_path: impl Into<PathBuf>) -> Self {
        let d = DavidsonOptions::default();
        RunConfig {
            integrals_path: integrals_path.into(),
            dets_path: None,
            bit_length: None,
            a: 1,
            b: 1,
            t: 1,
            r: 1,
            method: Method::MatrixFree,
            cache: true,
            shuffle: false,
            seed: 0,
            tol: d.tol,
            max_iter: d.max_iter,
            max_subspace: d.max_subspace,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            report_format: ReportFormat::Text,
            workers: None,
            timings: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bl) = self.bit_length {
            if !(1..=64).contains(&bl) {
                return Err(Error::Config(format!("bit_length must be in 1..=64, got {bl}")));
            }
        }
        if self.a == 0 || self.b == 0 || self.t == 0 || self.r == 0 {
            return Err(Error::Config(
                "decomposition counts a, b, t, r must be at least 1".into(),
            ));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.max_subspace < 2 {
            return Err(Error::Config(format!(
                "max_subspace must be at least 2, got {}",
                self.max_subspace
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// `2 * norbs` when a determinant then fits one word, else the default.
pub fn default_bit_length(norbs: usize) -> u32 {
    if 2 * norbs <= 64 {
        (2 * norbs) as u32
    } else {
        DEFAULT_BIT_LENGTH
    }
}

/// Runs `f` on a pool of `workers` threads, or the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Config("workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn load_strings(table: &IntegralTable, dets: Option<&Path>) -> Result<(Vec<BitString>, Vec<BitString>)> {
    match dets {
        None => Ok((
            all_strings(table.norbs(), table.n_alpha(), 64)?,
            all_strings(table.norbs(), table.n_beta(), 64)?,
        )),
        Some(path) => {
            let DetList { norbs, alpha, beta } = read_det_list(path)?;
            if norbs != table.norbs() {
                return Err(Error::input(format!(
                    "{} declares norbs {norbs} but the integrals have {}",
                    path.display(),
                    table.norbs()
                )));
            }
            Ok((alpha, beta))
        }
    }
}

pub fn run_diagonalization(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    with_workers(cfg.workers, || run_pipeline(cfg))?
}

fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut tm = TimingBreakdown::default();

    let clock = Instant::now();
    let table = IntegralTable::read(&cfg.integrals_path)?;
    let (mut alpha, mut beta) = load_strings(&table, cfg.dets_path.as_deref())?;
    tm.io = clock.elapsed().as_secs_f64();

    if cfg.shuffle {
        shuffle_basis(&mut alpha, &mut beta, cfg.seed);
    }
    let norbs = table.norbs();
    let bit_length = cfg.bit_length.unwrap_or_else(|| default_bit_length(norbs));
    let basis = Basis::build(
        alpha,
        beta,
        Arc::new(Hamiltonian::new(table)),
        BasisOptions {
            bit_length: Some(bit_length),
            cache: cfg.cache,
            memory_budget: cfg.memory_budget,
        },
    )?;
    let bt = basis.timings();
    tm.connectivity = bt.connectivity.as_secs_f64();
    tm.determinant_cache = bt.cache.as_secs_f64();
    tm.diag_precompute = bt.diagonal.as_secs_f64();

    let plan = plan_decomposition(cfg.a, cfg.b, cfg.t, cfg.r, &basis)?;
    let opts = DavidsonOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        max_subspace: cfg.max_subspace,
        ..DavidsonOptions::default()
    };

    let outcome = match cfg.method {
        Method::MatrixFree => {
            let op = MatrixFree::new(&basis, &plan)?;
            let out = solve(&op, basis.diag(), &opts);
            tm.matvec_alpha = op.timers().get(TaskKind::AlphaExcite).as_secs_f64();
            tm.matvec_beta = op.timers().get(TaskKind::BetaExcite).as_secs_f64();
            tm.matvec_mixed = op.timers().get(TaskKind::Mixed).as_secs_f64();
            out
        }
        Method::Stored => {
            let clock = Instant::now();
            let m = build_stored_matrix(&basis)?;
            tm.stored_build = clock.elapsed().as_secs_f64();
            solve(&m, basis.diag(), &opts)
        }
    }?;
    let (sol, stop, residual_norm) = outcome;
    let phases = sol.trace.total_timings();
    tm.matvec = phases.matvec;
    tm.orthogonalization = phases.orthogonalization;
    tm.subspace_solve = phases.subspace_solve;
    tm.total = start.elapsed().as_secs_f64();

    let mut trace = sol.trace.iterations;
    if !cfg.timings {
        trace.iter_mut().for_each(|r| r.timings = None);
    }
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        ground_energy: sol.energy,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        iterations: trace.len(),
        residual_norm,
        dimension: basis.dimension(),
        n_alpha: basis.n_alpha(),
        n_beta: basis.n_beta(),
        norbs,
        words_per_determinant: basis.words_per_determinant(),
        trace,
        timings: cfg.timings.then_some(tm),
        config: ConfigEcho {
            integrals: cfg.integrals_path.display().to_string(),
            determinants: cfg.dets_path.as_ref().map(|p| p.display().to_string()),
            bit_length,
            decomposition: [cfg.a, cfg.b, cfg.t, cfg.r],
            method: cfg.method,
            cache: cfg.cache,
            shuffle: cfg.shuffle,
            seed: cfg.seed,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            max_subspace: cfg.max_subspace,
            memory_budget: cfg.memory_budget,
        },
    })
}

/// Solver outcome with non-convergence folded into the stop reason.
fn solve<O: Operator + ?Sized>(op: &O, diag: &[f64], opts: &DavidsonOptions) -> Result<(Solution, StopReason, f64)> {
    match davidson_solve(op, diag, opts) {
        Ok(sol) => {
            let r = sol.trace.iterations.last().map_or(0.0, |rec| rec.residual_norm);
            Ok((sol, StopReason::Converged, r))
        }
        Err(Error::NonConvergence(u)) => Ok(unconverged(*u, StopReason::MaxIterations)),
        Err(Error::Stagnation(u)) => Ok(unconverged(*u, StopReason::Stagnated)),
        Err(e) => Err(e),
    }
}

fn unconverged(u: crate::davidson::Unconverged, stop: StopReason) -> (Solution, StopReason, f64) {
    (
        Solution {
            energy: u.energy,
            vector: u.vector,
            trace: u.trace,
        },
        stop,
        u.residual_norm,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseConfig {
    pub integrals_path: PathBuf,
    pub dets_path: Option<PathBuf>,
    pub oracle_cap: usize,
    pub workers: Option<usize>,
}

impl DenseConfig {
    pub fn new(integrals_path: impl Into<PathBuf>) -> Self {
        DenseConfig {
            integrals_path: integrals_path.into(),
            dets_path: None,
            oracle_cap: DEFAULT_ORACLE_CAP,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseReport {
    pub ground_energy: f64,
    pub dimension: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub norbs: usize,
}

fn dense_basis(table: IntegralTable, alpha: Vec<BitString>, beta: Vec<BitString>) -> Result<Basis> {
    let bl = default_bit_length(table.norbs());
    Basis::build(
        alpha,
        beta,
        Arc::new(Hamiltonian::new(table)),
        BasisOptions {
            bit_length: Some(bl),
            cache: false,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        },
    )
}

/// Dense ground state over the full space or a determinant list.
pub fn dense_eig(cfg: &DenseConfig) -> Result<DenseReport> {
    with_workers(cfg.workers, || {
        let table = IntegralTable::read(&cfg.integrals_path)?;
        let (alpha, beta) = load_strings(&table, cfg.dets_path.as_deref())?;
        let basis = dense_basis(table.clone(), alpha, beta)?;
        let h = dense_hamiltonian(&basis, &table, cfg.oracle_cap)?;
        let (energy, _) = dense_ground_state(&h)?;
        Ok(DenseReport {
            ground_energy: energy,
            dimension: basis.dimension(),
            n_alpha: basis.n_alpha(),
            n_beta: basis.n_beta(),
            norbs: basis.norbs(),
        })
    })?
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenBasisConfig {
    pub integrals_path: PathBuf,
    pub cutoff: f64,
    pub oracle_cap: usize,
    pub workers: Option<usize>,
}

/// Dense FCI over the full space, then the strings of every determinant
/// with `|c| > cutoff`.
pub fn gen_basis(cfg: &GenBasisConfig) -> Result<DetList> {
    with_workers(cfg.workers, || {
        let table = IntegralTable::read(&cfg.integrals_path)?;
        let (alpha, beta) = load_strings(&table, None)?;
        let basis = dense_basis(table.clone(), alpha, beta)?;
        let h = dense_hamiltonian(&basis, &table, cfg.oracle_cap)?;
        let (_, c) = dense_ground_state(&h)?;
        let (alpha, beta) = select_basis(basis.alpha_strings(), basis.beta_strings(), &c, cfg.cutoff)?;
        Ok(DetList {
            norbs: table.norbs(),
            alpha,
            beta,
        })
    })?
}

/// Writes `list` to `path` in determinant-list format.
pub fn write_det_list_file(path: impl AsRef<Path>, list: &DetList) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        context: format!("writing {}", path.display()),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    write_det_list(&mut file, list.norbs, &list.alpha, &list.beta).map_err(io_err)?;
    std::io::Write::flush(&mut file).map_err(io_err)
}
