use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use scidiag::engine::DEFAULT_MEMORY_BUDGET;
use scidiag::harness::{
    dense_eig, emit_report, format_sci, gen_basis, run_diagonalization, write_det_list_file, DenseConfig,
    GenBasisConfig, Method, ReportFormat, RunConfig,
};
use scidiag::oracle::DEFAULT_ORACLE_CAP;
use scidiag::Error;

/// Ground-state energies of selected-CI determinant spaces.
///
/// Every flag can also be set through the environment variable shown in its
/// help text (prefix SCIDIAG_). Exit status: 0 converged, 2 not converged,
/// 1 input or configuration error.
#[derive(Parser)]
#[command(name = "scidiag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Davidson diagonalization of a determinant space.
    Run(RunArgs),
    /// Dense (oracle) ground state, for small spaces.
    DenseEig(DenseArgs),
    /// Determinant list of all strings whose FCI coefficient exceeds a cutoff.
    GenBasis(GenArgs),
}

#[derive(Args)]
struct Common {
    /// FCIDUMP file.
    #[arg(long, short = 'i', env = "SCIDIAG_INTEGRALS")]
    integrals: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, env = "SCIDIAG_WORKERS")]
    workers: Option<usize>,
    /// Write output here instead of standard output.
    #[arg(long, short = 'o', env = "SCIDIAG_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Determinant list; the full space when omitted.
    #[arg(long, short = 'd', env = "SCIDIAG_DETS")]
    dets: Option<PathBuf>,
    /// Usable bits per storage word, 1..=64 (default: 2*norbs if that is at most 64, else 20).
    #[arg(long, env = "SCIDIAG_BIT_LENGTH")]
    bit_length: Option<u32>,
    /// Alpha-string partitions.
    #[arg(long, short = 'a', default_value_t = 1, env = "SCIDIAG_A")]
    a: usize,
    /// Beta-string partitions.
    #[arg(long, short = 'b', default_value_t = 1, env = "SCIDIAG_B")]
    b: usize,
    /// Concurrent task groups.
    #[arg(long, short = 't', default_value_t = 1, env = "SCIDIAG_T")]
    t: usize,
    /// Row-distribution ranks (only 1 is supported).
    #[arg(long, short = 'r', default_value_t = 1, env = "SCIDIAG_R")]
    r: usize,
    /// matrix_free or stored.
    #[arg(long, default_value = "matrix_free", env = "SCIDIAG_METHOD")]
    method: Method,
    /// Determinant cache: on or off.
    #[arg(long, default_value = "on", value_parser = on_off, action = ArgAction::Set, env = "SCIDIAG_CACHE")]
    cache: bool,
    /// Shuffle alpha and beta strings before building the basis: on or off.
    #[arg(long, default_value = "off", value_parser = on_off, action = ArgAction::Set, env = "SCIDIAG_SHUFFLE")]
    shuffle: bool,
    /// Shuffle seed.
    #[arg(long, default_value_t = 0, env = "SCIDIAG_SEED")]
    seed: u64,
    /// Residual norm at which Davidson stops.
    #[arg(long, default_value_t = 1e-8, env = "SCIDIAG_TOL")]
    tol: f64,
    #[arg(long, default_value_t = 200, env = "SCIDIAG_MAX_ITER")]
    max_iter: usize,
    /// Subspace size that triggers a restart.
    #[arg(long, default_value_t = 20, env = "SCIDIAG_MAX_SUBSPACE")]
    max_subspace: usize,
    /// Bytes allowed for the determinant cache and the stored matrix.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET, env = "SCIDIAG_MEMORY_BUDGET")]
    memory_budget: u64,
    /// text or json.
    #[arg(long, default_value = "text", env = "SCIDIAG_FORMAT")]
    format: ReportFormat,
    /// Leave wall times out of the report.
    #[arg(long, env = "SCIDIAG_NO_TIMINGS")]
    no_timings: bool,
}

#[derive(Args)]
struct DenseArgs {
    #[command(flatten)]
    common: Common,
    /// Determinant list; the full space when omitted.
    #[arg(long, short = 'd', env = "SCIDIAG_DETS")]
    dets: Option<PathBuf>,
    /// Largest dense dimension allowed.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP, env = "SCIDIAG_ORACLE_CAP")]
    oracle_cap: usize,
    /// text or json.
    #[arg(long, default_value = "text", env = "SCIDIAG_FORMAT")]
    format: ReportFormat,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// Keep determinants whose |coefficient| exceeds this.
    #[arg(long, env = "SCIDIAG_CUTOFF")]
    cutoff: f64,
    /// Largest dense dimension allowed.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP, env = "SCIDIAG_ORACLE_CAP")]
    oracle_cap: usize,
}

fn on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            context: format!("writing {}", path.display()),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    context: "writing standard output".into(),
                    source,
                })
        }
    }
}

fn run(args: RunArgs) -> Result<ExitCode, Error> {
    let cfg = RunConfig {
        integrals_path: args.common.integrals,
        dets_path: args.dets,
        bit_length: args.bit_length,
        a: args.a,
        b: args.b,
        t: args.t,
        r: args.r,
        method: args.method,
        cache: args.cache,
        shuffle: args.shuffle,
        seed: args.seed,
        tol: args.tol,
        max_iter: args.max_iter,
        max_subspace: args.max_subspace,
        memory_budget: args.memory_budget,
        report_format: args.format,
        workers: args.common.workers,
        timings: !args.no_timings,
    };
    let report = run_diagonalization(&cfg)?;
    emit(args.common.out.as_deref(), &emit_report(&report, cfg.report_format))?;
    Ok(if report.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn dense(args: DenseArgs) -> Result<ExitCode, Error> {
    let cfg = DenseConfig {
        integrals_path: args.common.integrals,
        dets_path: args.dets,
        oracle_cap: args.oracle_cap,
        workers: args.common.workers,
    };
    let r = dense_eig(&cfg)?;
    let text = match args.format {
        ReportFormat::Json => serde_json::to_string_pretty(&r).expect("report serializes") + "\n",
        ReportFormat::Text => format!(
            "basis          {} = {} alpha x {} beta, {} orbitals\nGROUND_ENERGY {}\n",
            r.dimension,
            r.n_alpha,
            r.n_beta,
            r.norbs,
            format_sci(r.ground_energy, 12)
        ),
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn generate(args: GenArgs) -> Result<ExitCode, Error> {
    let cfg = GenBasisConfig {
        integrals_path: args.common.integrals,
        cutoff: args.cutoff,
        oracle_cap: args.oracle_cap,
        workers: args.common.workers,
    };
    let list = gen_basis(&cfg)?;
    let summary = format!(
        "selected {} alpha x {} beta strings ({} determinants)",
        list.alpha.len(),
        list.beta.len(),
        list.alpha.len() * list.beta.len()
    );
    match args.common.out {
        Some(path) => {
            write_det_list_file(&path, &list)?;
            eprintln!("{summary}, written to {}", path.display());
        }
        None => {
            let mut buf = Vec::new();
            scidiag::harness::write_det_list(&mut buf, list.norbs, &list.alpha, &list.beta).expect("writing to memory");
            emit(None, std::str::from_utf8(&buf).expect("ascii"))?;
            eprintln!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::DenseEig(a) => dense(a),
        Command::GenBasis(a) => generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("scidiag: {e}");
            ExitCode::from(1)
        }
    }
}
