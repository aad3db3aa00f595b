use std::borrow::Cow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::connectivity::{generate_doubles, generate_singles, FlatExcitationTable};
use crate::determinant::{interleave_with, BitString, Determinant, PackingConfig};
use crate::error::{Error, Result};
use crate::slater_condon::Hamiltonian;

/// Default memory budget for the determinant cache and stored matrix.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisOptions {
    /// Repack strings to this bit_length; `None` keeps the input packing.
    pub bit_length: Option<u32>,
    pub cache: bool,
    pub memory_budget: u64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions {
            bit_length: None,
            cache: true,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BasisTimings {
    pub connectivity: Duration,
    pub cache: Duration,
    pub diagonal: Duration,
}

/// Tensor product of alpha and beta strings. Determinant `I` pairs alpha
/// string `I / n_beta` with beta string `I % n_beta`.
#[derive(Debug)]
pub struct Basis {
    alpha: Vec<BitString>,
    beta: Vec<BitString>,
    norbs: usize,
    det_packing: PackingConfig,
    hamiltonian: Arc<Hamiltonian>,
    det_cache: Option<Vec<Determinant>>,
    diag: Vec<f64>,
    pub(crate) singles_a: FlatExcitationTable,
    pub(crate) doubles_a: FlatExcitationTable,
    pub(crate) singles_b: FlatExcitationTable,
    pub(crate) doubles_b: FlatExcitationTable,
    memory_budget: u64,
    timings: BasisTimings,
}

fn check_channel(strings: &[BitString], norbs: usize, name: &str) -> Result<usize> {
    let first = strings
        .first()
        .ok_or_else(|| Error::EmptyBasis(format!("no {name} strings")))?;
    let count = first.count_ones();
    for (i, s) in strings.iter().enumerate() {
        if s.norbs_spin() != norbs {
            return Err(Error::input(format!(
                "{name} string {i} spans {} orbitals, expected {norbs}",
                s.norbs_spin()
            )));
        }
        if s.count_ones() != count {
            return Err(Error::input(format!(
                "{name} string {i} has {} electrons, string 0 has {count}",
                s.count_ones()
            )));
        }
    }
    Ok(count as usize)
}

/// Bytes held by a cache of `dimension` determinants at `packing`.
pub fn cache_bytes(dimension: usize, packing: PackingConfig) -> u64 {
    let inline = std::mem::size_of::<Determinant>() as u64;
    // SmallVec spills past two words
    let heap = if packing.word_count() > 2 {
        8 * packing.word_count() as u64
    } else {
        0
    };
    dimension as u64 * (inline + heap)
}

impl Basis {
    pub fn build(
        alpha: Vec<BitString>,
        beta: Vec<BitString>,
        hamiltonian: Arc<Hamiltonian>,
        opts: BasisOptions,
    ) -> Result<Basis> {
        let norbs = hamiltonian.table().norbs();
        let (alpha, beta) = match opts.bit_length {
            Some(bl) => (
                alpha.iter().map(|s| s.repack(bl)).collect::<Result<Vec<_>>>()?,
                beta.iter().map(|s| s.repack(bl)).collect::<Result<Vec<_>>>()?,
            ),
            None => (alpha, beta),
        };
        let na = check_channel(&alpha, norbs, "alpha")?;
        let nb = check_channel(&beta, norbs, "beta")?;
        if alpha[0].packing() != beta[0].packing() {
            return Err(Error::input("alpha and beta strings use different packing"));
        }
        let nelec = hamiltonian.table().n_elec();
        if na + nb != nelec {
            return Err(Error::input(format!(
                "strings hold {na} alpha + {nb} beta electrons but the integrals declare NELEC={nelec}"
            )));
        }
        let det_packing = alpha[0].packing().with_norbs_spin(2 * norbs)?;
        let dimension = alpha
            .len()
            .checked_mul(beta.len())
            .ok_or_else(|| Error::input("basis dimension overflows"))?;

        let mut timings = BasisTimings::default();
        let start = Instant::now();
        let singles_a = generate_singles(&alpha, norbs)?;
        let doubles_a = generate_doubles(&alpha, norbs)?;
        let singles_b = generate_singles(&beta, norbs)?;
        let doubles_b = generate_doubles(&beta, norbs)?;
        timings.connectivity = start.elapsed();

        let nbeta = beta.len();
        let det_cache = if opts.cache {
            let required = cache_bytes(dimension, det_packing);
            if required > opts.memory_budget {
                return Err(Error::Capacity {
                    what: "determinant cache".into(),
                    required,
                    available: opts.memory_budget,
                });
            }
            let start = Instant::now();
            let cache: Vec<Determinant> = (0..dimension)
                .into_par_iter()
                .map(|i| interleave_with(&alpha[i / nbeta], &beta[i % nbeta], det_packing))
                .collect();
            timings.cache = start.elapsed();
            Some(cache)
        } else {
            None
        };

        let mut basis = Basis {
            alpha,
            beta,
            norbs,
            det_packing,
            hamiltonian,
            det_cache,
            diag: Vec::new(),
            singles_a,
            doubles_a,
            singles_b,
            doubles_b,
            memory_budget: opts.memory_budget,
            timings,
        };
        let start = Instant::now();
        basis.diag = (0..dimension)
            .into_par_iter()
            .map(|i| basis.hamiltonian.diagonal(&basis.determinant(i)))
            .collect();
        basis.timings.diagonal = start.elapsed();
        Ok(basis)
    }

    pub fn alpha_strings(&self) -> &[BitString] {
        &self.alpha
    }

    pub fn beta_strings(&self) -> &[BitString] {
        &self.beta
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_beta(&self) -> usize {
        self.beta.len()
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn norbs(&self) -> usize {
        self.norbs
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn determinant_packing(&self) -> PackingConfig {
        self.det_packing
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn has_cache(&self) -> bool {
        self.det_cache.is_some()
    }

    pub fn cached_determinants(&self) -> Option<&[Determinant]> {
        self.det_cache.as_deref()
    }

    /// Storage words per cached determinant.
    pub fn words_per_determinant(&self) -> usize {
        self.det_packing.word_count()
    }

    pub fn memory_budget(&self) -> u64 {
        self.memory_budget
    }

    pub fn timings(&self) -> BasisTimings {
        self.timings
    }

    pub fn singles_alpha(&self) -> &FlatExcitationTable {
        &self.singles_a
    }

    pub fn doubles_alpha(&self) -> &FlatExcitationTable {
        &self.doubles_a
    }

    pub fn singles_beta(&self) -> &FlatExcitationTable {
        &self.singles_b
    }

    pub fn doubles_beta(&self) -> &FlatExcitationTable {
        &self.doubles_b
    }

    #[inline]
    pub fn index(&self, ia: usize, ib: usize) -> usize {
        ia * self.beta.len() + ib
    }

    /// Determinant `i`, from the cache when present.
    #[inline]
    pub fn determinant(&self, i: usize) -> Cow<'_, Determinant> {
        match &self.det_cache {
            Some(cache) => Cow::Borrowed(&cache[i]),
            None => {
                let nb = self.beta.len();
                Cow::Owned(interleave_with(
                    &self.alpha[i / nb],
                    &self.beta[i % nb],
                    self.det_packing,
                ))
            }
        }
    }

    #[inline]
    pub(crate) fn element(&self, bra: &Determinant, ket: &Determinant) -> f64 {
        self.hamiltonian.element(bra, ket)
    }
}

/// Builds the tensor-product basis: connectivity, optional cache, diagonal.
pub fn build_basis(
    alpha: Vec<BitString>,
    beta: Vec<BitString>,
    hamiltonian: Arc<Hamiltonian>,
    opts: BasisOptions,
) -> Result<Basis> {
    Basis::build(alpha, beta, hamiltonian, opts)
}
