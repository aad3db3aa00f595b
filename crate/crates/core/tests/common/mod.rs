#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use scidiag::determinant::{BitString, Determinant, PackingConfig};
use scidiag::engine::{Basis, BasisOptions};
use scidiag::integrals::IntegralTable;
use scidiag::oracle::full_space;
use scidiag::slater_condon::Hamiltonian;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> IntegralTable {
    IntegralTable::read(fixture_path(&format!("{name}.fcidump"))).expect("fixture parses")
}

/// PySCF full-CI energy recorded next to the fixtures.
pub fn pyscf_energy(name: &str) -> f64 {
    let text = std::fs::read_to_string(fixture_path("pyscf_fci_energies.txt")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0] == name).then(|| f[4].parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no reference energy for {name}"))
}

/// Small deterministic generator for synthetic integrals.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Random real integrals with the full 8-fold symmetry.
pub fn random_table(norbs: usize, n_elec: usize, ms2: i64, seed: u64) -> IntegralTable {
    let mut rng = Lcg(seed);
    let mut t = IntegralTable::new(norbs, n_elec, ms2).unwrap();
    t.set_core_energy(rng.uniform(-1.0, 1.0));
    for p in 0..norbs {
        for q in 0..=p {
            let scale = if p == q { 2.0 } else { 0.5 };
            t.set_one_electron(p, q, rng.uniform(-scale, scale)).unwrap();
        }
    }
    for p in 0..norbs {
        for q in 0..=p {
            for r in 0..norbs {
                for s in 0..=r {
                    t.set_two_electron(p, q, r, s, rng.uniform(-0.3, 0.6)).unwrap();
                }
            }
        }
    }
    t
}

/// Every determinant over `2 * norbs` spin-orbitals with `n_elec` electrons.
pub fn all_determinants(norbs: usize, n_elec: usize, bit_length: u32) -> Vec<Determinant> {
    let p = PackingConfig::new(2 * norbs, bit_length).unwrap();
    (0u64..1 << (2 * norbs))
        .filter(|m| m.count_ones() as usize == n_elec)
        .map(|m| {
            let occ: Vec<usize> = (0..2 * norbs).filter(|i| m >> i & 1 == 1).collect();
            Determinant::from_occupied(&occ, p).unwrap()
        })
        .collect()
}

pub const FIXTURES: [&str; 7] = [
    "h2_sto3g",
    "h3_chain_sto3g",
    "h3plus_sto3g",
    "h4_chain_sto3g",
    "lih_sto3g",
    "h6_chain_sto3g",
    "beh2_sto3g",
];

/// Full alpha × beta basis of `table` with strings packed at `bit_length`.
pub fn full_basis(table: &IntegralTable, bit_length: u32, cache: bool) -> Basis {
    let (a, b) = full_space(table, bit_length).unwrap();
    Basis::build(
        a,
        b,
        Arc::new(Hamiltonian::new(table.clone())),
        BasisOptions {
            bit_length: None,
            cache,
            ..BasisOptions::default()
        },
    )
    .unwrap()
}

pub fn basis_from(table: &IntegralTable, alpha: Vec<BitString>, beta: Vec<BitString>) -> Basis {
    Basis::build(
        alpha,
        beta,
        Arc::new(Hamiltonian::new(table.clone())),
        BasisOptions::default(),
    )
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
