use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::davidson::IterationRecord;
use crate::harness::run::{Method, ReportFormat};

/// Identifies the json layout; bumped on any incompatible change.
pub const REPORT_SCHEMA: &str = "scidiag.run-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Stagnated,
}

/// Wall time per pipeline phase, in seconds.
///
/// `io`, `connectivity`, `determinant_cache`, `diag_precompute`,
/// `stored_build`, `matvec`, `orthogonalization` and `subspace_solve` are
/// disjoint; the three loop-type entries split `matvec` for the
/// matrix-free method and stay zero for the stored one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingBreakdown {
    pub io: f64,
    pub connectivity: f64,
    pub determinant_cache: f64,
    pub diag_precompute: f64,
    pub stored_build: f64,
    pub matvec: f64,
    pub matvec_alpha: f64,
    pub matvec_beta: f64,
    pub matvec_mixed: f64,
    pub orthogonalization: f64,
    pub subspace_solve: f64,
    pub total: f64,
}

impl TimingBreakdown {
    /// Disjoint phases with their share of `total`.
    pub fn fractions(&self) -> Vec<(&'static str, f64)> {
        let parts = [
            ("io", self.io),
            ("connectivity", self.connectivity),
            ("determinant_cache", self.determinant_cache),
            ("diag_precompute", self.diag_precompute),
            ("stored_build", self.stored_build),
            ("matvec", self.matvec),
            ("orthogonalization", self.orthogonalization),
            ("subspace_solve", self.subspace_solve),
        ];
        parts
            .iter()
            .map(|&(name, t)| (name, if self.total > 0.0 { t / self.total } else { 0.0 }))
            .collect()
    }

    /// Diagonal precompute plus all Davidson iterations.
    pub fn davidson(&self) -> f64 {
        self.diag_precompute + self.matvec + self.orthogonalization + self.subspace_solve
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub integrals: String,
    pub determinants: Option<String>,
    pub bit_length: u32,
    /// `[a, b, t, r]`
    pub decomposition: [usize; 4],
    pub method: Method,
    pub cache: bool,
    pub shuffle: bool,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
    pub memory_budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub ground_energy: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub residual_norm: f64,
    pub dimension: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub norbs: usize,
    pub words_per_determinant: usize,
    pub trace: Vec<IterationRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<TimingBreakdown>,
    pub config: ConfigEcho,
}

/// C-style scientific notation: `-1.137283834489e+00`.
pub fn format_sci(v: f64, precision: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.precision$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn emit_report(r: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => text_report(r),
    }
}

fn text_report(r: &RunReport) -> String {
    let c = &r.config;
    let mut s = String::new();
    let _ = writeln!(s, "integrals      {}", c.integrals);
    let _ = writeln!(
        s,
        "determinants   {}",
        c.determinants.as_deref().unwrap_or("full space")
    );
    let _ = writeln!(
        s,
        "basis          {} = {} alpha x {} beta, {} orbitals, {} word(s) per determinant",
        r.dimension, r.n_alpha, r.n_beta, r.norbs, r.words_per_determinant
    );
    let [a, b, t, rr] = c.decomposition;
    let _ = writeln!(
        s,
        "method         {}, cache {}, shuffle {}, decomposition ({a},{b},{t},{rr}), bit_length {}",
        c.method,
        on_off(c.cache),
        if c.shuffle {
            format!("on (seed {})", c.seed)
        } else {
            "off".into()
        },
        c.bit_length
    );
    let _ = writeln!(
        s,
        "solver         tol {:e}, max_iter {}, max_subspace {}",
        c.tol, c.max_iter, c.max_subspace
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>5}  {:>22}  {:>10}  {:>5}",
        "iter", "ritz value", "residual", "dim"
    );
    for rec in &r.trace {
        let _ = writeln!(
            s,
            "{:>5}  {:>22.15}  {:>10.3e}  {:>5}{}",
            rec.iteration,
            rec.ritz_value,
            rec.residual_norm,
            rec.subspace_size,
            if rec.restarted { "  restart" } else { "" }
        );
    }
    let _ = writeln!(s);
    let status = match r.stop_reason {
        StopReason::Converged => format!("converged in {} iterations", r.iterations),
        StopReason::MaxIterations => format!("NOT CONVERGED after {} iterations", r.iterations),
        StopReason::Stagnated => format!("NOT CONVERGED: stagnated after {} iterations", r.iterations),
    };
    let _ = writeln!(s, "status         {status} (residual {:.3e})", r.residual_norm);

    if let Some(t) = &r.timings {
        let _ = writeln!(s);
        let _ = writeln!(s, "timings (s)");
        for (name, frac) in t.fractions() {
            let secs = match name {
                "io" => t.io,
                "connectivity" => t.connectivity,
                "determinant_cache" => t.determinant_cache,
                "diag_precompute" => t.diag_precompute,
                "stored_build" => t.stored_build,
                "matvec" => t.matvec,
                "orthogonalization" => t.orthogonalization,
                _ => t.subspace_solve,
            };
            let _ = writeln!(s, "  {name:<18} {secs:>10.6}  {:>5.1}%", 100.0 * frac);
            if name == "matvec" && c.method == Method::MatrixFree {
                for (sub, v) in [
                    ("alpha", t.matvec_alpha),
                    ("beta", t.matvec_beta),
                    ("mixed", t.matvec_mixed),
                ] {
                    let _ = writeln!(s, "    {sub:<16} {v:>10.6}");
                }
            }
        }
        let _ = writeln!(s, "  {:<18} {:>10.6}", "davidson", t.davidson());
        let _ = writeln!(s, "  {:<18} {:>10.6}", "total", t.total);
    }
    let _ = writeln!(s, "GROUND_ENERGY {}", format_sci(r.ground_energy, 12));
    s
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}
