use rayon::prelude::*;

use crate::davidson::Operator;
use crate::engine::basis::Basis;
use crate::error::{Error, Result};

/// Compressed sparse rows of every structurally nonzero `H_IJ`, diagonal
/// included. Columns within a row are ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

fn row_nnz(basis: &Basis, i: usize) -> usize {
    let nb = basis.n_beta();
    let (ia, ib) = (i / nb, i % nb);
    1 + basis.singles_a.row(ia).len()
        + basis.doubles_a.row(ia).len()
        + basis.singles_b.row(ib).len()
        + basis.doubles_b.row(ib).len()
        + basis.singles_a.row(ia).len() * basis.singles_b.row(ib).len()
}

/// Bytes the stored matrix for `basis` would occupy.
pub fn stored_matrix_bytes(basis: &Basis) -> u64 {
    let nnz: u64 = (0..basis.dimension()).map(|i| row_nnz(basis, i) as u64).sum();
    nnz * (std::mem::size_of::<u32>() + std::mem::size_of::<f64>()) as u64
        + (basis.dimension() as u64 + 1) * std::mem::size_of::<usize>() as u64
}

pub fn build_stored_matrix(basis: &Basis) -> Result<StoredMatrix> {
    let required = stored_matrix_bytes(basis);
    if required > basis.memory_budget() {
        return Err(Error::Capacity {
            what: "stored Hamiltonian".into(),
            required,
            available: basis.memory_budget(),
        });
    }
    let n = basis.dimension();
    let nb = basis.n_beta();
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (ia, ib) = (i / nb, i % nb);
            let bra = basis.determinant(i);
            let mut cols: Vec<usize> = Vec::with_capacity(row_nnz(basis, i));
            cols.push(i);
            for &ja in basis.singles_a.row(ia).iter().chain(basis.doubles_a.row(ia)) {
                cols.push(ja as usize * nb + ib);
            }
            for &jb in basis.singles_b.row(ib).iter().chain(basis.doubles_b.row(ib)) {
                cols.push(ia * nb + jb as usize);
            }
            for &ja in basis.singles_a.row(ia) {
                for &jb in basis.singles_b.row(ib) {
                    cols.push(ja as usize * nb + jb as usize);
                }
            }
            cols.sort_unstable();
            cols.into_iter()
                .map(|j| {
                    let v = if j == i {
                        basis.diag()[i]
                    } else {
                        basis.element(&bra, &basis.determinant(j))
                    };
                    (j as u32, v)
                })
                .collect()
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let nnz = rows.iter().map(Vec::len).sum();
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(StoredMatrix { n, row_ptr, cols, vals })
}

impl StoredMatrix {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Value at `(i, j)`; zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }
}

pub fn stored_matvec(m: &StoredMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.n {
        return Err(Error::input(format!(
            "vector length {} does not match matrix dimension {}",
            x.len(),
            m.n
        )));
    }
    Ok((0..m.n)
        .into_par_iter()
        .map(|i| m.row(i).fold(0.0, |acc, (c, v)| acc + v * x[c]))
        .collect())
}

impl Operator for StoredMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        stored_matvec(self, x).expect("Davidson passes vectors of the operator dimension")
    }
}
