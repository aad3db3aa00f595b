use std::ops::Range;

use crate::engine::basis::Basis;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// Bra and ket differ by one or two alpha moves.
    AlphaExcite,
    /// Bra and ket differ by one or two beta moves.
    BetaExcite,
    /// One alpha and one beta move.
    Mixed,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::AlphaExcite, TaskKind::BetaExcite, TaskKind::Mixed];
}

/// A unit of matvec work. Alpha-excitation tasks own one beta block, beta
/// tasks one alpha block, mixed tasks one block pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub kind: TaskKind,
    pub alpha_block: Option<usize>,
    pub beta_block: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionPlan {
    a: usize,
    b: usize,
    t: usize,
    r: usize,
    alpha_blocks: Vec<Range<usize>>,
    beta_blocks: Vec<Range<usize>>,
    tasks: Vec<Task>,
}

/// `parts` contiguous blocks of `n` items whose sizes differ by at most one.
fn split(n: usize, parts: usize) -> Vec<Range<usize>> {
    let (base, extra) = (n / parts, n % parts);
    let mut start = 0;
    (0..parts)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

impl DecompositionPlan {
    pub fn new(a: usize, b: usize, t: usize, r: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if r != 1 {
            return Err(Error::Unsupported(format!(
                "row-communicator distribution (r={r}) is not available; r must be 1"
            )));
        }
        if a == 0 || b == 0 || t == 0 {
            return Err(Error::input("decomposition counts a, b, t must be positive"));
        }
        if a > n_alpha {
            return Err(Error::input(format!("a={a} exceeds the {n_alpha} alpha strings")));
        }
        if b > n_beta {
            return Err(Error::input(format!("b={b} exceeds the {n_beta} beta strings")));
        }
        let mut tasks = Vec::with_capacity(a * b + a + b);
        tasks.extend((0..b).map(|j| Task {
            kind: TaskKind::AlphaExcite,
            alpha_block: None,
            beta_block: Some(j),
        }));
        tasks.extend((0..a).map(|i| Task {
            kind: TaskKind::BetaExcite,
            alpha_block: Some(i),
            beta_block: None,
        }));
        for i in 0..a {
            tasks.extend((0..b).map(|j| Task {
                kind: TaskKind::Mixed,
                alpha_block: Some(i),
                beta_block: Some(j),
            }));
        }
        Ok(DecompositionPlan {
            a,
            b,
            t,
            r,
            alpha_blocks: split(n_alpha, a),
            beta_blocks: split(n_beta, b),
            tasks,
        })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn alpha_blocks(&self) -> &[Range<usize>] {
        &self.alpha_blocks
    }

    pub fn beta_blocks(&self) -> &[Range<usize>] {
        &self.beta_blocks
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha_blocks.last().map_or(0, |r| r.end)
    }

    pub fn n_beta(&self) -> usize {
        self.beta_blocks.last().map_or(0, |r| r.end)
    }

    /// Alpha and beta string ranges a task covers.
    pub fn region(&self, task: &Task) -> (Range<usize>, Range<usize>) {
        let alpha = task
            .alpha_block
            .map_or(0..self.n_alpha(), |i| self.alpha_blocks[i].clone());
        let beta = task
            .beta_block
            .map_or(0..self.n_beta(), |j| self.beta_blocks[j].clone());
        (alpha, beta)
    }

    /// Tasks of one kind dealt round-robin to `t` groups.
    pub fn groups(&self, kind: TaskKind) -> Vec<Vec<Task>> {
        let mut groups = vec![Vec::new(); self.t];
        for (n, task) in self.tasks.iter().filter(|t| t.kind == kind).enumerate() {
            groups[n % self.t].push(*task);
        }
        groups
    }
}

pub fn plan_decomposition(a: usize, b: usize, t: usize, r: usize, basis: &Basis) -> Result<DecompositionPlan> {
    DecompositionPlan::new(a, b, t, r, basis.n_alpha(), basis.n_beta())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_counts() {
        assert_eq!(DecompositionPlan::new(1, 1, 1, 1, 5, 5).unwrap().tasks().len(), 3);
        assert_eq!(DecompositionPlan::new(4, 2, 1, 1, 5, 5).unwrap().tasks().len(), 14);
        assert_eq!(DecompositionPlan::new(8, 8, 4, 1, 10, 10).unwrap().tasks().len(), 80);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            DecompositionPlan::new(1, 1, 1, 2, 5, 5),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(DecompositionPlan::new(6, 1, 1, 1, 5, 5), Err(Error::Input(_))));
        assert!(matches!(DecompositionPlan::new(1, 6, 1, 1, 5, 5), Err(Error::Input(_))));
        assert!(DecompositionPlan::new(0, 1, 1, 1, 5, 5).is_err());
        assert!(DecompositionPlan::new(1, 1, 0, 1, 5, 5).is_err());
    }

    #[test]
    fn blocks_are_near_equal_and_contiguous() {
        let p = DecompositionPlan::new(3, 4, 2, 1, 10, 7).unwrap();
        assert_eq!(p.alpha_blocks(), &[0..4, 4..7, 7..10]);
        assert_eq!(p.beta_blocks(), &[0..2, 2..4, 4..6, 6..7]);
    }

    #[test]
    fn every_index_covered_once_per_kind() {
        let p = DecompositionPlan::new(3, 2, 2, 1, 5, 4).unwrap();
        for kind in TaskKind::ALL {
            let mut seen = vec![0; 20];
            let groups = p.groups(kind);
            assert_eq!(groups.len(), 2);
            for task in groups.iter().flatten() {
                let (ra, rb) = p.region(task);
                for ia in ra {
                    for ib in rb.clone() {
                        seen[ia * 4 + ib] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "{kind:?}: {seen:?}");
        }
    }
}
