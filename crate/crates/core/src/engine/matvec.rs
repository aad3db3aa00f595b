//! Matrix-free `y = H x` over the tensor-product basis.
//!
//! Every output element is gathered by one worker in a fixed order: the
//! diagonal term, then alpha-channel neighbours ascending, then beta-channel
//! neighbours ascending, then mixed pairs lexicographically. The result is
//! therefore bitwise independent of the decomposition and the worker count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::davidson::Operator;
use crate::engine::basis::Basis;
use crate::engine::plan::{DecompositionPlan, Task, TaskKind};
use crate::error::{Error, Result};

/// Accumulated wall time per loop type.
#[derive(Debug, Default)]
pub struct LoopTimers {
    nanos: [AtomicU64; 3],
}

impl LoopTimers {
    fn slot(kind: TaskKind) -> usize {
        match kind {
            TaskKind::AlphaExcite => 0,
            TaskKind::BetaExcite => 1,
            TaskKind::Mixed => 2,
        }
    }

    fn add(&self, kind: TaskKind, d: Duration) {
        self.nanos[Self::slot(kind)].fetch_add(d.as_nanos() as u64, Ordering::Relaxed);
    }

    pub fn get(&self, kind: TaskKind) -> Duration {
        Duration::from_nanos(self.nanos[Self::slot(kind)].load(Ordering::Relaxed))
    }

    pub fn reset(&self) {
        for n in &self.nanos {
            n.store(0, Ordering::Relaxed);
        }
    }
}

/// Merge of two ascending, disjoint index lists.
struct Merged<'a> {
    a: &'a [u32],
    b: &'a [u32],
}

impl Iterator for Merged<'_> {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        match (self.a.first(), self.b.first()) {
            (Some(&x), Some(&y)) if x < y => {
                self.a = &self.a[1..];
                Some(x)
            }
            (_, Some(&y)) => {
                self.b = &self.b[1..];
                Some(y)
            }
            (Some(&x), None) => {
                self.a = &self.a[1..];
                Some(x)
            }
            (None, None) => None,
        }
    }
}

// Off-diagonal contribution of one loop type to output element (ia, ib).
#[inline]
fn gather(basis: &Basis, kind: TaskKind, ia: usize, ib: usize, x: &[f64]) -> f64 {
    let nb = basis.n_beta();
    let i = ia * nb + ib;
    let bra = basis.determinant(i);
    let mut sum = 0.0;
    match kind {
        TaskKind::AlphaExcite => {
            let merged = Merged {
                a: basis.singles_a.row(ia),
                b: basis.doubles_a.row(ia),
            };
            for ja in merged {
                let j = ja as usize * nb + ib;
                sum += basis.element(&bra, &basis.determinant(j)) * x[j];
            }
        }
        TaskKind::BetaExcite => {
            let merged = Merged {
                a: basis.singles_b.row(ib),
                b: basis.doubles_b.row(ib),
            };
            for jb in merged {
                let j = ia * nb + jb as usize;
                sum += basis.element(&bra, &basis.determinant(j)) * x[j];
            }
        }
        TaskKind::Mixed => {
            let sb = basis.singles_b.row(ib);
            for &ja in basis.singles_a.row(ia) {
                let row = ja as usize * nb;
                for &jb in sb {
                    let j = row + jb as usize;
                    sum += basis.element(&bra, &basis.determinant(j)) * x[j];
                }
            }
        }
    }
    sum
}

fn run_task(basis: &Basis, plan: &DecompositionPlan, task: &Task, x: &[f64]) -> Vec<f64> {
    let (ra, rb) = plan.region(task);
    let width = rb.len();
    let mut out = vec![0.0; ra.len() * width];
    if width == 0 {
        return out;
    }
    out.par_chunks_mut(width).zip(ra.into_par_iter()).for_each(|(row, ia)| {
        for (slot, ib) in row.iter_mut().zip(rb.clone()) {
            *slot = gather(basis, task.kind, ia, ib, x);
        }
    });
    out
}

fn check_dims(basis: &Basis, plan: &DecompositionPlan, len: usize) -> Result<()> {
    if plan.n_alpha() != basis.n_alpha() || plan.n_beta() != basis.n_beta() {
        return Err(Error::input(format!(
            "plan covers {}x{} strings but the basis has {}x{}",
            plan.n_alpha(),
            plan.n_beta(),
            basis.n_alpha(),
            basis.n_beta()
        )));
    }
    if len != basis.dimension() {
        return Err(Error::input(format!(
            "vector length {len} does not match basis dimension {}",
            basis.dimension()
        )));
    }
    Ok(())
}

pub fn matvec(basis: &Basis, plan: &DecompositionPlan, x: &[f64]) -> Result<Vec<f64>> {
    matvec_timed(basis, plan, x, None)
}

/// [`matvec`] that also accumulates per-loop-type wall time.
pub fn matvec_timed(
    basis: &Basis,
    plan: &DecompositionPlan,
    x: &[f64],
    timers: Option<&LoopTimers>,
) -> Result<Vec<f64>> {
    check_dims(basis, plan, x.len())?;
    let nb = basis.n_beta();
    let mut y: Vec<f64> = basis.diag().par_iter().zip(x.par_iter()).map(|(d, v)| d * v).collect();

    for kind in TaskKind::ALL {
        let start = Instant::now();
        let groups = plan.groups(kind);
        let results: Vec<Vec<(Task, Vec<f64>)>> = groups
            .par_iter()
            .map(|group| {
                group
                    .iter()
                    .map(|task| (*task, run_task(basis, plan, task, x)))
                    .collect()
            })
            .collect();
        // each output element receives exactly one partial sum per loop type
        for (task, contrib) in results.iter().flatten() {
            let (ra, rb) = plan.region(task);
            let width = rb.len();
            for (k, ia) in ra.enumerate() {
                let dst = &mut y[ia * nb + rb.start..ia * nb + rb.end];
                for (d, c) in dst.iter_mut().zip(&contrib[k * width..(k + 1) * width]) {
                    *d += c;
                }
            }
        }
        if let Some(t) = timers {
            t.add(kind, start.elapsed());
        }
    }
    Ok(y)
}

/// Matrix-free operator bound to a basis and plan.
pub struct MatrixFree<'a> {
    basis: &'a Basis,
    plan: &'a DecompositionPlan,
    timers: LoopTimers,
}

impl<'a> MatrixFree<'a> {
    pub fn new(basis: &'a Basis, plan: &'a DecompositionPlan) -> Result<Self> {
        check_dims(basis, plan, basis.dimension())?;
        Ok(MatrixFree {
            basis,
            plan,
            timers: LoopTimers::default(),
        })
    }

    pub fn timers(&self) -> &LoopTimers {
        &self.timers
    }
}

impl Operator for MatrixFree<'_> {
    fn dim(&self) -> usize {
        self.basis.dimension()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        matvec_timed(self.basis, self.plan, x, Some(&self.timers)).expect("dimensions checked at construction")
    }
}
