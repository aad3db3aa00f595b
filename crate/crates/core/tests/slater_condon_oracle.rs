mod common;

use common::{all_determinants, fixture, random_table};
use scidiag::determinant::{difference, parity_double, parity_single, Degree, Determinant, PackingConfig};
use scidiag::integrals::{DirectExchange, IntegralTable};
use scidiag::oracle::{brute_force_hij, excitation_sign};
use scidiag::slater_condon::{hij, zero_excite};

// Sweeps every pair at every electron count, so spin-nonconserving pairs are
// included alongside all degree branches.
fn sweep(t: &IntegralTable, bit_length: u32) -> [usize; 4] {
    let jk = DirectExchange::build(t);
    let mut seen = [0usize; 4];
    for n in 0..=2 * t.norbs() {
        let dets = all_determinants(t.norbs(), n, bit_length);
        for bra in &dets {
            for ket in &dets {
                let fast = hij(bra, ket, t, &jk).unwrap();
                let slow = brute_force_hij(bra, ket, t).unwrap();
                assert!(
                    (fast - slow).abs() <= 1e-12,
                    "{bra:?} {ket:?}: slater-condon {fast} vs oracle {slow}"
                );
                seen[difference(bra, ket).degree.count().min(3)] += 1;
            }
        }
    }
    seen
}

#[test]
fn h2_all_pairs() {
    sweep(&fixture("h2_sto3g"), 64);
}

#[test]
fn h3plus_all_pairs() {
    sweep(&fixture("h3plus_sto3g"), 5);
}

#[test]
fn h4_chain_all_pairs() {
    let seen = sweep(&fixture("h4_chain_sto3g"), 64);
    assert!(seen.iter().all(|&c| c > 0), "{seen:?}");
}

#[test]
fn random_integrals_all_pairs() {
    for (seed, bl) in [(1u64, 64u32), (2, 3), (3, 20)] {
        sweep(&random_table(4, 4, 0, seed), bl);
    }
    sweep(&random_table(3, 3, 1, 9), 1);
}

#[test]
fn zero_excite_two_electron_closed_shell() {
    let mut t = IntegralTable::new(1, 2, 0).unwrap();
    t.set_one_electron(0, 0, -1.25).unwrap();
    t.set_two_electron(0, 0, 0, 0, 0.675).unwrap();
    let d = Determinant::from_occupied(&[0, 1], PackingConfig::new(2, 64).unwrap()).unwrap();
    let e = zero_excite(&d, &t, &DirectExchange::build(&t));
    assert_eq!(e, 2.0 * -1.25 + 0.675);
    assert!((e - brute_force_hij(&d, &d, &t).unwrap()).abs() <= 1e-14);
}

#[test]
fn parity_double_matches_operator_sign() {
    // every double move on every determinant of 8 spin-orbitals
    for n in 2..=6 {
        for d in all_determinants(4, n, 64) {
            let occ = d.occupied_list();
            let empty: Vec<usize> = (0..8).filter(|&i| !d.is_set(i)).collect();
            for (i, &p1) in occ.iter().enumerate() {
                for &p2 in &occ[i + 1..] {
                    for (j, &q1) in empty.iter().enumerate() {
                        for &q2 in &empty[j + 1..] {
                            let fast = parity_double(&d, p1, p2, q1, q2).unwrap();
                            let slow = excitation_sign(&d, &[(p1, q1), (p2, q2)]).unwrap();
                            assert_eq!(fast, slow, "{d:?} {p1},{p2} -> {q1},{q2}");
                        }
                    }
                }
            }
            for &p in &occ {
                for &q in &empty {
                    assert_eq!(
                        parity_single(&d, p, q).unwrap(),
                        excitation_sign(&d, &[(p, q)]).unwrap()
                    );
                }
            }
        }
    }
}

fn docc(d: &Determinant) -> usize {
    let (a, b) = d.split();
    a.occupied_list().iter().filter(|&&p| b.is_set(p)).count()
}

#[test]
fn symmetric_sparse_and_spin_relabel_invariant() {
    let t = random_table(4, 4, 0, 77);
    let jk = DirectExchange::build(&t);
    let dets = all_determinants(4, 4, 64);
    for a in &dets {
        let (aa, ab) = a.split();
        let a_swapped = scidiag::determinant::interleave(&ab, &aa).unwrap();
        for b in &dets {
            let v = hij(a, b, &t, &jk).unwrap();
            assert_eq!(v, hij(b, a, &t, &jk).unwrap());
            if let Degree::Higher(_) = difference(a, b).degree {
                assert_eq!(v, 0.0);
            }
            let (ba, bb) = b.split();
            let b_swapped = scidiag::determinant::interleave(&bb, &ba).unwrap();
            // swapping the spins of a doubly occupied orbital reorders one
            // adjacent pair of creation operators
            let phase = if (docc(a) + docc(b)).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let w = hij(&a_swapped, &b_swapped, &t, &jk).unwrap();
            assert!((v - phase * w).abs() <= 1e-14, "{v} vs {w}");
        }
    }
}
