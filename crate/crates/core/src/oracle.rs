//! Brute-force reference implementations used to verify the fast paths.
//!
//! Nothing here shares sign or integral-traversal logic with the
//! Slater–Condon kernels: the Hamiltonian is applied operator by operator to
//! occupation masks, and eigenpairs come from a dense symmetric solver.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::davidson::Operator;
use crate::determinant::{all_strings, BitString, Determinant};
use crate::engine::Basis;
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;

/// Largest dense Hamiltonian built by default.
pub const DEFAULT_ORACLE_CAP: usize = 4000;

/// Spin-orbitals representable by the oracle's single-word masks.
pub const MAX_ORACLE_SPIN_ORBITALS: usize = 64;

fn mask_of(d: &Determinant) -> Result<u64> {
    if d.bits().norbs_spin() > MAX_ORACLE_SPIN_ORBITALS {
        return Err(Error::input(format!(
            "oracle handles at most {MAX_ORACLE_SPIN_ORBITALS} spin-orbitals"
        )));
    }
    Ok(d.occupied_list().iter().fold(0u64, |m, &i| m | 1 << i))
}

/// `a_i |mask>` with its sign, or `None` if `i` is empty.
#[inline]
fn annihilate(mask: u64, i: usize) -> Option<(u64, f64)> {
    if mask >> i & 1 == 0 {
        return None;
    }
    let below = (mask & ((1u64 << i) - 1)).count_ones();
    Some((mask & !(1 << i), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// `a†_i |mask>` with its sign, or `None` if `i` is occupied.
#[inline]
fn create(mask: u64, i: usize) -> Option<(u64, f64)> {
    if mask >> i & 1 == 1 {
        return None;
    }
    let below = (mask & ((1u64 << i) - 1)).count_ones();
    Some((mask | 1 << i, if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// `H |ket>` as a map from occupation mask to amplitude.
fn apply_hamiltonian(ket: u64, t: &IntegralTable) -> HashMap<u64, f64> {
    let n = t.norbs();
    let mut out: HashMap<u64, f64> = HashMap::new();
    out.insert(ket, t.core_energy());
    let so = |p: usize, spin: usize| 2 * p + spin;
    for sigma in 0..2 {
        for q in 0..n {
            let Some((m1, s1)) = annihilate(ket, so(q, sigma)) else {
                continue;
            };
            for p in 0..n {
                let h = t.one_electron(p, q).expect("in range");
                if h == 0.0 {
                    continue;
                }
                if let Some((m2, s2)) = create(m1, so(p, sigma)) {
                    *out.entry(m2).or_insert(0.0) += h * s1 * s2;
                }
            }
        }
    }
    // 1/2 sum (pq|rs) a+_{p sigma} a+_{r tau} a_{s tau} a_{q sigma}
    for sigma in 0..2 {
        for tau in 0..2 {
            for q in 0..n {
                let Some((m1, s1)) = annihilate(ket, so(q, sigma)) else {
                    continue;
                };
                for s in 0..n {
                    let Some((m2, s2)) = annihilate(m1, so(s, tau)) else {
                        continue;
                    };
                    for r in 0..n {
                        let Some((m3, s3)) = create(m2, so(r, tau)) else {
                            continue;
                        };
                        for p in 0..n {
                            let Some((m4, s4)) = create(m3, so(p, sigma)) else {
                                continue;
                            };
                            let v = t.two_electron(p, q, r, s).expect("in range");
                            if v != 0.0 {
                                *out.entry(m4).or_insert(0.0) += 0.5 * v * s1 * s2 * s3 * s4;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `<bra|H|ket>` by explicit second-quantized operator application.
pub fn brute_force_hij(bra: &Determinant, ket: &Determinant, t: &IntegralTable) -> Result<f64> {
    if bra.n_elec() != ket.n_elec() {
        return Err(Error::input(format!(
            "electron counts differ ({} vs {})",
            bra.n_elec(),
            ket.n_elec()
        )));
    }
    if bra.norbs() != t.norbs() || ket.norbs() != t.norbs() {
        return Err(Error::input("determinant and integral orbital counts differ"));
    }
    let (b, k) = (mask_of(bra)?, mask_of(ket)?);
    Ok(apply_hamiltonian(k, t).get(&b).copied().unwrap_or(0.0))
}

/// Sign of `d` after applying `a†_{to[k]} a_{from[k]}` for k = 0, 1, ...
/// in order, relative to the canonically ordered result.
pub fn excitation_sign(d: &Determinant, moves: &[(usize, usize)]) -> Result<f64> {
    let mut mask = mask_of(d)?;
    let mut sign = 1.0;
    for &(from, to) in moves {
        let (m, s1) =
            annihilate(mask, from).ok_or_else(|| Error::precondition(format!("spin-orbital {from} is empty")))?;
        let (m, s2) = create(m, to).ok_or_else(|| Error::precondition(format!("spin-orbital {to} is occupied")))?;
        mask = m;
        sign *= s1 * s2;
    }
    Ok(sign)
}

/// Dense symmetric Hamiltonian, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHamiltonian {
    n: usize,
    values: Vec<f64>,
}

impl DenseHamiltonian {
    pub fn from_rows(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::input(format!("{} values for a {n}x{n} matrix", values.len())));
        }
        Ok(DenseHamiltonian { n, values })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

impl Operator for DenseHamiltonian {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.values
            .par_chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn capacity(n: usize, cap: usize) -> Error {
    let bytes = |k: usize| (k as u64) * (k as u64) * 8;
    Error::Capacity {
        what: format!("dense Hamiltonian of dimension {n} (oracle cap {cap})"),
        required: bytes(n),
        available: bytes(cap),
    }
}

/// Dense Hamiltonian over an explicit determinant list.
pub fn dense_hamiltonian_of(dets: &[Determinant], t: &IntegralTable, cap: usize) -> Result<DenseHamiltonian> {
    let n = dets.len();
    if n > cap {
        return Err(capacity(n, cap));
    }
    let masks: Vec<u64> = dets.iter().map(mask_of).collect::<Result<_>>()?;
    let index: HashMap<u64, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let columns: Vec<Vec<f64>> = masks
        .par_iter()
        .map(|&ket| {
            let mut col = vec![0.0; n];
            for (m, v) in apply_hamiltonian(ket, t) {
                if let Some(&i) = index.get(&m) {
                    col[i] = v;
                }
            }
            col
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[i * n + j] = *v;
        }
    }
    Ok(DenseHamiltonian { n, values })
}

/// `values[I][J] = brute_force_hij(det(I), det(J))` over a basis.
pub fn dense_hamiltonian(basis: &Basis, t: &IntegralTable, cap: usize) -> Result<DenseHamiltonian> {
    if basis.dimension() > cap {
        return Err(capacity(basis.dimension(), cap));
    }
    let dets: Vec<Determinant> = (0..basis.dimension())
        .map(|i| basis.determinant(i).into_owned())
        .collect();
    dense_hamiltonian_of(&dets, t, cap)
}

/// Lowest eigenvalue and unit eigenvector.
pub fn dense_ground_state(m: &DenseHamiltonian) -> Result<(f64, Vec<f64>)> {
    if m.n == 0 {
        return Err(Error::EmptyBasis("dense matrix has dimension 0".into()));
    }
    if m.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("dense matrix has non-finite entries"));
    }
    let mat = DMatrix::from_row_slice(m.n, m.n, &m.values);
    let eig = SymmetricEigen::new(mat);
    let (k, &e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("n >= 1");
    let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    Ok((e, v))
}

/// Full alpha × beta string lists for the electron counts in `t`.
pub fn full_space(t: &IntegralTable, bit_length: u32) -> Result<(Vec<BitString>, Vec<BitString>)> {
    Ok((
        all_strings(t.norbs(), t.n_alpha(), bit_length)?,
        all_strings(t.norbs(), t.n_beta(), bit_length)?,
    ))
}

/// Strings of every determinant whose coefficient magnitude exceeds
/// `cutoff`, deduplicated and ascending per channel. `coefficients` is indexed
/// by `ia * beta.len() + ib` over the full lists.
pub fn select_basis(
    alpha: &[BitString],
    beta: &[BitString],
    coefficients: &[f64],
    cutoff: f64,
) -> Result<(Vec<BitString>, Vec<BitString>)> {
    if cutoff.is_nan() || cutoff < 0.0 {
        return Err(Error::input(format!("cutoff must be non-negative, got {cutoff}")));
    }
    if coefficients.len() != alpha.len() * beta.len() {
        return Err(Error::input(format!(
            "{} coefficients for a {}x{} basis",
            coefficients.len(),
            alpha.len(),
            beta.len()
        )));
    }
    let nb = beta.len();
    let mut keep_a = vec![false; alpha.len()];
    let mut keep_b = vec![false; nb];
    for (i, c) in coefficients.iter().enumerate() {
        if c.abs() > cutoff {
            keep_a[i / nb] = true;
            keep_b[i % nb] = true;
        }
    }
    let pick = |strings: &[BitString], keep: &[bool]| {
        let mut v: Vec<BitString> = strings
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s.clone())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let (a, b) = (pick(alpha, &keep_a), pick(beta, &keep_b));
    if a.is_empty() {
        return Err(Error::EmptyBasis(format!("no coefficient exceeds the cutoff {cutoff}")));
    }
    Ok((a, b))
}
