//! Hamiltonian matrix elements between determinants by Slater–Condon rules.

use smallvec::SmallVec;

use crate::determinant::{difference, sign_between, sign_double_unchecked, Degree, Determinant, Difference};
use crate::error::{Error, Result};
use crate::integrals::{DirectExchange, IntegralTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinOrbital(pub usize);

impl SpinOrbital {
    #[inline]
    pub fn spatial(self) -> usize {
        self.0 / 2
    }

    /// 0 for alpha, 1 for beta.
    #[inline]
    pub fn spin(self) -> usize {
        self.0 % 2
    }
}

#[inline]
fn same_spin(a: usize, b: usize) -> bool {
    a % 2 == b % 2
}

pub fn zero_excite(d: &Determinant, t: &IntegralTable, jk: &DirectExchange) -> f64 {
    let occ: SmallVec<[usize; 32]> = d.bits().iter_occupied().collect();
    let mut one = 0.0;
    let mut two = 0.0;
    for (n, &i) in occ.iter().enumerate() {
        let pi = i / 2;
        one += t.h(pi, pi);
        for &j in &occ[..n] {
            let pj = j / 2;
            two += jk.direct(pi, pj);
            if same_spin(i, j) {
                two -= jk.exchange(pi, pj);
            }
        }
    }
    t.core_energy() + one + two
}

/// Single excitation element; `diff` must have degree one and describe
/// the move from `ket` to the bra.
pub fn one_excite(ket: &Determinant, diff: &Difference, t: &IntegralTable) -> Result<f64> {
    if diff.degree != Degree::One {
        return Err(Error::Contract(format!(
            "one_excite called on a degree-{} difference",
            diff.degree.count()
        )));
    }
    Ok(single(ket, diff.annihilated[0], diff.created[0], t))
}

// p occupied in the bra only, q in the ket only
#[inline]
fn single(ket: &Determinant, p: usize, q: usize, t: &IntegralTable) -> f64 {
    if !same_spin(p, q) {
        return 0.0;
    }
    let (sp, sq) = (p / 2, q / 2);
    let mut v = t.h(sp, sq);
    for r in ket.bits().iter_occupied() {
        if r == q {
            continue;
        }
        let sr = r / 2;
        v += t.eri(sp, sq, sr, sr);
        if same_spin(p, r) {
            v -= t.eri(sp, sr, sr, sq);
        }
    }
    sign_between(ket.bits(), p, q) * v
}

/// Double excitation element; `diff` must have degree two.
pub fn two_excite(ket: &Determinant, diff: &Difference, t: &IntegralTable) -> Result<f64> {
    if diff.degree != Degree::Two {
        return Err(Error::Contract(format!(
            "two_excite called on a degree-{} difference",
            diff.degree.count()
        )));
    }
    Ok(double(ket, &diff.annihilated, &diff.created, t))
}

// `bra_only` and `ket_only` ascending
#[inline]
fn double(ket: &Determinant, bra_only: &[usize], ket_only: &[usize], t: &IntegralTable) -> f64 {
    let (a1, a2) = (bra_only[0], bra_only[1]);
    let (c1, c2) = (ket_only[0], ket_only[1]);
    let direct = same_spin(a1, c1) && same_spin(a2, c2);
    let exchange = same_spin(a1, c2) && same_spin(a2, c1);
    if !direct && !exchange {
        return 0.0;
    }
    let (s1, s2, s3, s4) = (a1 / 2, a2 / 2, c1 / 2, c2 / 2);
    let mut v = 0.0;
    if direct {
        v += t.eri(s1, s3, s2, s4);
    }
    if exchange {
        v -= t.eri(s1, s4, s2, s3);
    }
    sign_double_unchecked(ket.bits(), c1, c2, a1, a2) * v
}

/// `<bra|H|ket>`.
pub fn hij(bra: &Determinant, ket: &Determinant, t: &IntegralTable, jk: &DirectExchange) -> Result<f64> {
    if bra.bits().packing() != ket.bits().packing() {
        return Err(Error::input("determinants differ in orbital count or packing"));
    }
    if bra.n_elec() != ket.n_elec() {
        return Err(Error::input(format!(
            "electron counts differ ({} vs {})",
            bra.n_elec(),
            ket.n_elec()
        )));
    }
    Ok(hij_unchecked(bra, ket, t, jk))
}

#[inline]
pub(crate) fn hij_unchecked(bra: &Determinant, ket: &Determinant, t: &IntegralTable, jk: &DirectExchange) -> f64 {
    let diff = difference(bra, ket);
    match diff.degree {
        Degree::Zero => zero_excite(ket, t, jk),
        Degree::One => single(ket, diff.annihilated[0], diff.created[0], t),
        Degree::Two => double(ket, &diff.annihilated, &diff.created, t),
        Degree::Higher(_) => 0.0,
    }
}

/// Integral tables bundled for element evaluation.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    table: IntegralTable,
    jk: DirectExchange,
}

impl Hamiltonian {
    pub fn new(table: IntegralTable) -> Self {
        let jk = DirectExchange::build(&table);
        Hamiltonian { table, jk }
    }

    pub fn table(&self) -> &IntegralTable {
        &self.table
    }

    pub fn direct_exchange(&self) -> &DirectExchange {
        &self.jk
    }

    pub fn hij(&self, bra: &Determinant, ket: &Determinant) -> Result<f64> {
        hij(bra, ket, &self.table, &self.jk)
    }

    #[inline]
    pub(crate) fn element(&self, bra: &Determinant, ket: &Determinant) -> f64 {
        hij_unchecked(bra, ket, &self.table, &self.jk)
    }

    #[inline]
    pub fn diagonal(&self, d: &Determinant) -> f64 {
        zero_excite(d, &self.table, &self.jk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::PackingConfig;

    fn det(occ: &[usize], norbs: usize) -> Determinant {
        Determinant::from_occupied(occ, PackingConfig::new(2 * norbs, 64).unwrap()).unwrap()
    }

    fn one_orbital_pair() -> (IntegralTable, DirectExchange) {
        let mut t = IntegralTable::new(2, 2, 0).unwrap();
        t.set_one_electron(0, 0, -1.25).unwrap();
        t.set_one_electron(1, 1, -0.5).unwrap();
        t.set_one_electron(0, 1, 0.2).unwrap();
        t.set_two_electron(0, 0, 0, 0, 0.675).unwrap();
        let jk = DirectExchange::build(&t);
        (t, jk)
    }

    #[test]
    fn spin_orbital_labels() {
        assert_eq!((SpinOrbital(5).spatial(), SpinOrbital(5).spin()), (2, 1));
        assert_eq!((SpinOrbital(4).spatial(), SpinOrbital(4).spin()), (2, 0));
    }

    #[test]
    fn closed_shell_pair_diagonal() {
        let (t, jk) = one_orbital_pair();
        let e = zero_excite(&det(&[0, 1], 2), &t, &jk);
        assert!((e - (-1.825)).abs() < 1e-15);
    }

    #[test]
    fn single_electron_diagonal_and_hopping() {
        let (mut t, _) = one_orbital_pair();
        t.set_core_energy(0.3);
        let jk = DirectExchange::build(&t);
        assert_eq!(zero_excite(&det(&[2], 2), &t, &jk), -0.5 + 0.3);
        let v = hij(&det(&[0], 2), &det(&[2], 2), &t, &jk).unwrap();
        assert_eq!(v, 0.2);
    }

    #[test]
    fn spin_flip_single_is_zero() {
        let (t, _) = one_orbital_pair();
        let (bra, ket) = (det(&[0], 2), det(&[3], 2));
        let diff = difference(&bra, &ket);
        assert_eq!(one_excite(&ket, &diff, &t).unwrap(), 0.0);
    }

    #[test]
    fn spin_nonconserving_double_is_zero() {
        let (mut t, _) = one_orbital_pair();
        t.set_two_electron(0, 1, 0, 1, 0.1).unwrap();
        let jk = DirectExchange::build(&t);
        // two alpha electrons become two beta electrons
        let (bra, ket) = (det(&[0, 2], 2), det(&[1, 3], 2));
        let diff = difference(&bra, &ket);
        assert_eq!(two_excite(&ket, &diff, &t).unwrap(), 0.0);
        assert_eq!(hij(&bra, &ket, &t, &jk).unwrap(), 0.0);
    }

    #[test]
    fn kernels_reject_wrong_degree() {
        let (t, _) = one_orbital_pair();
        let (a, b) = (det(&[0, 1], 2), det(&[2, 3], 2));
        let diff = difference(&a, &b);
        assert!(matches!(one_excite(&b, &diff, &t), Err(Error::Contract(_))));
        let diff = difference(&a, &a);
        assert!(matches!(two_excite(&a, &diff, &t), Err(Error::Contract(_))));
    }

    #[test]
    fn dispatch_and_truncation() {
        let t = IntegralTable::new(4, 3, 1).unwrap();
        let jk = DirectExchange::build(&t);
        let a = det(&[0, 1, 2], 4);
        assert_eq!(hij(&a, &a, &t, &jk).unwrap(), zero_excite(&a, &t, &jk));
        assert_eq!(hij(&a, &det(&[4, 5, 6], 4), &t, &jk).unwrap(), 0.0);
        assert!(matches!(hij(&a, &det(&[0], 4), &t, &jk), Err(Error::Input(_))));
    }
}
