//! Packed occupation bit-strings and the primitive kernels every matrix
//! element evaluation is built from.
//!
//! A logical orbital index `i` lives in word `i / bit_length` at bit offset
//! `i % bit_length`. Bits at offsets `>= bit_length` are always zero, so a
//! string's logical content is independent of how densely it is packed.
//!
//! Determinants interleave the two spin channels: spatial orbital `p` maps to
//! spin-orbital `2p` (alpha) and `2p + 1` (beta).

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default number of occupied bits per 64-bit word.
pub const DEFAULT_BIT_LENGTH: u32 = 20;

type Words = SmallVec<[u64; 2]>;

/// Number of storage words needed for `norbs_spin` orbitals at `bit_length`
/// bits per word.
pub fn word_count(norbs_spin: usize, bit_length: u32) -> Result<usize> {
    if !(1..=64).contains(&bit_length) {
        return Err(Error::Config(format!("bit_length must be in 1..=64, got {bit_length}")));
    }
    if norbs_spin == 0 {
        return Err(Error::Config("orbital count must be at least 1".into()));
    }
    Ok(norbs_spin.div_ceil(bit_length as usize))
}

#[inline]
fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PackingConfig {
    norbs_spin: usize,
    bit_length: u32,
    word_count: usize,
}

impl PackingConfig {
    pub fn new(norbs_spin: usize, bit_length: u32) -> Result<Self> {
        let word_count = word_count(norbs_spin, bit_length)?;
        Ok(PackingConfig {
            norbs_spin,
            bit_length,
            word_count,
        })
    }

    pub fn norbs_spin(&self) -> usize {
        self.norbs_spin
    }

    pub fn bit_length(&self) -> u32 {
        self.bit_length
    }

    pub fn word_count(&self) -> usize {
        self.word_count
    }

    /// Same bit_length, different orbital count.
    pub fn with_norbs_spin(&self, norbs_spin: usize) -> Result<Self> {
        PackingConfig::new(norbs_spin, self.bit_length)
    }

    #[inline]
    fn locate(&self, i: usize) -> (usize, u32) {
        let bl = self.bit_length as usize;
        (i / bl, (i % bl) as u32)
    }
}

/// Occupation pattern of one spin channel (or of a whole determinant).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    packing: PackingConfig,
    words: Words,
}

impl BitString {
    pub fn zeros(packing: PackingConfig) -> Self {
        BitString {
            packing,
            words: SmallVec::from_elem(0, packing.word_count),
        }
    }

    pub fn from_occupied(occ: &[usize], packing: PackingConfig) -> Result<Self> {
        let mut s = BitString::zeros(packing);
        for &i in occ {
            if i >= packing.norbs_spin {
                return Err(Error::input(format!(
                    "orbital index {i} out of range for {} orbitals",
                    packing.norbs_spin
                )));
            }
            if s.is_set(i) {
                return Err(Error::input(format!("duplicate orbital index {i}")));
            }
            s.set(i);
        }
        Ok(s)
    }

    /// Builds a string from raw words, rejecting set padding bits and bits
    /// beyond the orbital count.
    pub fn from_words(words: &[u64], packing: PackingConfig) -> Result<Self> {
        if words.len() != packing.word_count {
            return Err(Error::input(format!(
                "expected {} words, got {}",
                packing.word_count,
                words.len()
            )));
        }
        let bl = packing.bit_length;
        for (w, &word) in words.iter().enumerate() {
            let valid = (packing.norbs_spin - w * bl as usize).min(bl as usize) as u32;
            if word & !low_mask(valid) != 0 {
                return Err(Error::input(format!(
                    "word {w} has bits set outside the {valid} usable positions"
                )));
            }
        }
        Ok(BitString {
            packing,
            words: SmallVec::from_slice(words),
        })
    }

    pub fn packing(&self) -> PackingConfig {
        self.packing
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn norbs_spin(&self) -> usize {
        self.packing.norbs_spin
    }

    #[inline]
    pub fn is_set(&self, i: usize) -> bool {
        let (w, o) = self.packing.locate(i);
        self.words[w] >> o & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        let (w, o) = self.packing.locate(i);
        self.words[w] |= 1 << o;
    }

    #[inline]
    pub(crate) fn clear(&mut self, i: usize) {
        let (w, o) = self.packing.locate(i);
        self.words[w] &= !(1 << o);
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Number of set logical bits in `[start, end)`.
    pub fn count_range(&self, start: usize, end: usize) -> u32 {
        if start >= end {
            return 0;
        }
        let (ws, os) = self.packing.locate(start);
        let (we, oe) = self.packing.locate(end - 1);
        let mut total = 0;
        for w in ws..=we {
            let mut m = self.words[w];
            if w == ws {
                m &= u64::MAX << os;
            }
            if w == we {
                m &= low_mask(oe + 1);
            }
            total += m.count_ones();
        }
        total
    }

    pub fn iter_occupied(&self) -> OccupiedIter<'_> {
        OccupiedIter {
            words: &self.words,
            bit_length: self.packing.bit_length as usize,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn occupied_list(&self) -> Vec<usize> {
        self.iter_occupied().collect()
    }

    /// Same logical content under a different bit_length.
    pub fn repack(&self, bit_length: u32) -> Result<BitString> {
        let packing = PackingConfig::new(self.packing.norbs_spin, bit_length)?;
        if packing == self.packing {
            return Ok(self.clone());
        }
        let mut out = BitString::zeros(packing);
        for i in self.iter_occupied() {
            out.set(i);
        }
        Ok(out)
    }

    /// Copy with bit `from` cleared and bit `to` set; no occupancy checks.
    #[inline]
    pub(crate) fn moved(&self, from: usize, to: usize) -> BitString {
        let mut out = self.clone();
        out.clear(from);
        out.set(to);
        out
    }

    /// Single-word fast path value, if the string fits in one word.
    #[inline]
    fn single_word(&self) -> Option<u64> {
        (self.words.len() == 1).then(|| self.words[0])
    }
}

impl Ord for BitString {
    /// Numeric order of the logical bit pattern (orbital 0 is the least
    /// significant bit). Strings with different packing order by packing first.
    fn cmp(&self, other: &Self) -> Ordering {
        (self.packing.norbs_spin, self.packing.bit_length)
            .cmp(&(other.packing.norbs_spin, other.packing.bit_length))
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString{:?}", self.occupied_list())
    }
}

pub struct OccupiedIter<'a> {
    words: &'a [u64],
    bit_length: usize,
    index: usize,
    current: u64,
}

impl Iterator for OccupiedIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * self.bit_length + tz);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

/// Every string of `n_elec` electrons in `norbs` orbitals, ascending.
pub fn all_strings(norbs: usize, n_elec: usize, bit_length: u32) -> Result<Vec<BitString>> {
    let packing = PackingConfig::new(norbs, bit_length)?;
    if n_elec > norbs {
        return Err(Error::input(format!(
            "{n_elec} electrons do not fit in {norbs} orbitals"
        )));
    }
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..n_elec).collect();
    loop {
        out.push(BitString::from_occupied(&combo, packing)?);
        // next combination in lexicographic order of index lists
        let mut k = n_elec;
        loop {
            if k == 0 {
                out.sort();
                return Ok(out);
            }
            k -= 1;
            if combo[k] < norbs - n_elec + k {
                break;
            }
        }
        combo[k] += 1;
        for j in k + 1..n_elec {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Full spin-orbital occupation; alpha on even, beta on odd indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant(BitString);

impl Determinant {
    pub fn from_bits(bits: BitString) -> Result<Self> {
        if !bits.norbs_spin().is_multiple_of(2) {
            return Err(Error::input("a determinant needs an even number of spin-orbitals"));
        }
        Ok(Determinant(bits))
    }

    pub fn from_occupied(occ: &[usize], packing: PackingConfig) -> Result<Self> {
        Determinant::from_bits(BitString::from_occupied(occ, packing)?)
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    /// Spatial orbital count.
    pub fn norbs(&self) -> usize {
        self.0.norbs_spin() / 2
    }

    pub fn n_alpha(&self) -> usize {
        self.0.iter_occupied().filter(|i| i % 2 == 0).count()
    }

    pub fn n_beta(&self) -> usize {
        self.0.iter_occupied().filter(|i| i % 2 == 1).count()
    }

    pub fn n_elec(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn occupied_list(&self) -> Vec<usize> {
        self.0.occupied_list()
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.0.is_set(i)
    }

    /// Inverse of [`interleave`].
    pub fn split(&self) -> (BitString, BitString) {
        let packing = self
            .0
            .packing
            .with_norbs_spin(self.norbs())
            .expect("determinant has at least one spatial orbital");
        let mut alpha = BitString::zeros(packing);
        let mut beta = BitString::zeros(packing);
        for i in self.0.iter_occupied() {
            if i % 2 == 0 {
                alpha.set(i / 2);
            } else {
                beta.set(i / 2);
            }
        }
        (alpha, beta)
    }
}

impl fmt::Debug for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Determinant{:?}", self.occupied_list())
    }
}

// Spreads the low 32 bits of x to the even bit positions.
#[inline]
fn spread_even(x: u64) -> u64 {
    let mut x = x & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

pub fn interleave(alpha: &BitString, beta: &BitString) -> Result<Determinant> {
    if alpha.packing != beta.packing {
        return Err(Error::input(format!(
            "alpha and beta strings disagree on packing: {:?} vs {:?}",
            alpha.packing, beta.packing
        )));
    }
    let packing = alpha.packing.with_norbs_spin(2 * alpha.norbs_spin())?;
    Ok(interleave_with(alpha, beta, packing))
}

/// Interleave with a precomputed determinant packing; skips validation.
#[inline]
pub(crate) fn interleave_with(alpha: &BitString, beta: &BitString, packing: PackingConfig) -> Determinant {
    if packing.word_count == 1 {
        if let (Some(a), Some(b)) = (alpha.single_word(), beta.single_word()) {
            // 2 * norbs <= bit_length <= 64, so norbs <= 32
            let w = spread_even(a) | (spread_even(b) << 1);
            return Determinant(BitString {
                packing,
                words: SmallVec::from_elem(w, 1),
            });
        }
    }
    let mut out = BitString::zeros(packing);
    for p in alpha.iter_occupied() {
        out.set(2 * p);
    }
    for p in beta.iter_occupied() {
        out.set(2 * p + 1);
    }
    Determinant(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Zero,
    One,
    Two,
    /// More than two electron moves; carries the actual count.
    Higher(usize),
}

impl Degree {
    pub fn count(self) -> usize {
        match self {
            Degree::Zero => 0,
            Degree::One => 1,
            Degree::Two => 2,
            Degree::Higher(n) => n,
        }
    }
}

/// Orbitals occupied in only one of two determinants.
///
/// `annihilated` holds spin-orbitals occupied in the bra only and `created`
/// those occupied in the ket only, both ascending. For degrees beyond two the
/// lists are left empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Difference {
    pub degree: Degree,
    pub annihilated: SmallVec<[usize; 2]>,
    pub created: SmallVec<[usize; 2]>,
}

pub fn difference(bra: &Determinant, ket: &Determinant) -> Difference {
    let (b, k) = (&bra.0, &ket.0);
    debug_assert_eq!(b.packing, k.packing);
    let xor_count: u32 = b
        .words
        .iter()
        .zip(k.words.iter())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum();
    let n = (xor_count / 2) as usize;
    let degree = match n {
        0 => Degree::Zero,
        1 => Degree::One,
        2 => Degree::Two,
        n => Degree::Higher(n),
    };
    let mut annihilated = SmallVec::new();
    let mut created = SmallVec::new();
    if n <= 2 {
        let bl = b.packing.bit_length as usize;
        for (w, (x, y)) in b.words.iter().zip(k.words.iter()).enumerate() {
            let mut bra_only = x & !y;
            while bra_only != 0 {
                annihilated.push(w * bl + bra_only.trailing_zeros() as usize);
                bra_only &= bra_only - 1;
            }
            let mut ket_only = y & !x;
            while ket_only != 0 {
                created.push(w * bl + ket_only.trailing_zeros() as usize);
                ket_only &= ket_only - 1;
            }
        }
    }
    Difference {
        degree,
        annihilated,
        created,
    }
}

/// Sign of moving one electron between `a` and `b`: odd count of occupied
/// spin-orbitals strictly between them gives -1.
#[inline]
pub(crate) fn sign_between(bits: &BitString, a: usize, b: usize) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if bits.count_range(lo + 1, hi).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_move(d: &Determinant, p: usize, q: usize) -> Result<()> {
    let n = d.0.norbs_spin();
    if p >= n || q >= n {
        return Err(Error::precondition(format!(
            "spin-orbital out of range ({p} -> {q}, {n} spin-orbitals)"
        )));
    }
    if !d.0.is_set(p) {
        return Err(Error::precondition(format!("spin-orbital {p} is not occupied")));
    }
    if d.0.is_set(q) {
        return Err(Error::precondition(format!("spin-orbital {q} is already occupied")));
    }
    Ok(())
}

/// Fermionic sign of moving the electron in `p` to the empty `q`.
pub fn parity_single(d: &Determinant, p: usize, q: usize) -> Result<f64> {
    check_move(d, p, q)?;
    Ok(sign_between(&d.0, p, q))
}

/// Sign of the double move `{p1, p2} -> {q1, q2}`.
///
/// Pairs ascending sources with ascending targets and applies the lower pair
/// first.
pub fn parity_double(d: &Determinant, p1: usize, p2: usize, q1: usize, q2: usize) -> Result<f64> {
    let (pl, ph) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
    let (ql, qh) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
    if pl == ph || ql == qh {
        return Err(Error::precondition("double excitation orbitals must be distinct"));
    }
    check_move(d, pl, ql)?;
    check_move(d, ph, qh)?;
    Ok(sign_double_unchecked(&d.0, pl, ph, ql, qh))
}

/// `pl < ph`, `ql < qh`, occupancy already verified.
#[inline]
pub(crate) fn sign_double_unchecked(bits: &BitString, pl: usize, ph: usize, ql: usize, qh: usize) -> f64 {
    let first = sign_between(bits, pl, ql);
    // the intermediate only differs at pl and ql; correct the count for them
    let (lo, hi) = if ph < qh { (ph, qh) } else { (qh, ph) };
    let mut between = bits.count_range(lo + 1, hi) as i32;
    if lo < pl && pl < hi {
        between -= 1;
    }
    if lo < ql && ql < hi {
        between += 1;
    }
    let second = if between % 2 == 0 { 1.0 } else { -1.0 };
    first * second
}

pub fn apply_single(d: &Determinant, p: usize, q: usize) -> Result<Determinant> {
    check_move(d, p, q)?;
    Ok(Determinant(d.0.moved(p, q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: usize, bl: u32) -> PackingConfig {
        PackingConfig::new(n, bl).unwrap()
    }

    fn det(occ: &[usize], n: usize) -> Determinant {
        Determinant::from_occupied(occ, cfg(n, 64)).unwrap()
    }

    #[test]
    fn word_count_examples() {
        assert_eq!(word_count(48, 20).unwrap(), 3);
        assert_eq!(word_count(48, 48).unwrap(), 1);
        assert_eq!(word_count(10, 64).unwrap(), 1);
        assert!(matches!(word_count(10, 0), Err(Error::Config(_))));
        assert!(matches!(word_count(10, 65), Err(Error::Config(_))));
        assert!(matches!(word_count(0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn from_occupied_encoding() {
        assert_eq!(BitString::from_occupied(&[0, 1], cfg(4, 64)).unwrap().words(), &[0b11]);
        assert_eq!(
            BitString::from_occupied(&[], cfg(70, 20)).unwrap().words(),
            &[0, 0, 0, 0]
        );
        assert_eq!(
            BitString::from_occupied(&[0, 2], cfg(3, 2)).unwrap().words(),
            &[0b01, 0b01]
        );
        assert!(matches!(
            BitString::from_occupied(&[4], cfg(4, 64)),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            BitString::from_occupied(&[1, 1], cfg(4, 64)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn occupied_list_examples() {
        let s = BitString::from_words(&[0b0101], cfg(4, 64)).unwrap();
        assert_eq!(s.occupied_list(), vec![0, 2]);
        assert!(BitString::zeros(cfg(9, 3)).occupied_list().is_empty());
        let s = BitString::from_words(&[0b11, 0b10], cfg(4, 2)).unwrap();
        assert_eq!(s.occupied_list(), vec![0, 1, 3]);
    }

    #[test]
    fn from_words_rejects_padding() {
        assert!(BitString::from_words(&[0b100, 0], cfg(4, 2)).is_err());
        assert!(BitString::from_words(&[0, 0b10], cfg(3, 2)).is_err());
        assert!(BitString::from_words(&[0b1], cfg(3, 2)).is_err());
    }

    #[test]
    fn interleave_examples() {
        let p = cfg(2, 64);
        let a = BitString::from_occupied(&[0, 1], p).unwrap();
        let b = BitString::from_occupied(&[0], p).unwrap();
        assert_eq!(interleave(&a, &b).unwrap().bits().words(), &[0b0111]);
        let e = BitString::zeros(p);
        assert_eq!(interleave(&e, &e).unwrap().bits().words(), &[0]);
        let a = BitString::from_occupied(&[1], p).unwrap();
        assert_eq!(interleave(&a, &a).unwrap().bits().words(), &[0b1100]);
        let other = BitString::zeros(cfg(3, 64));
        assert!(matches!(interleave(&a, &other), Err(Error::Input(_))));
    }

    #[test]
    fn difference_examples() {
        let d = difference(&det(&[0, 1], 8), &det(&[0, 1], 8));
        assert_eq!(d.degree, Degree::Zero);
        let d = difference(&det(&[0, 1], 8), &det(&[0, 2], 8));
        assert_eq!(d.degree, Degree::One);
        assert_eq!(d.annihilated.as_slice(), &[1]);
        assert_eq!(d.created.as_slice(), &[2]);
        let d = difference(&det(&[0, 1, 2, 3], 8), &det(&[4, 5, 6, 3], 8));
        assert_eq!(d.degree, Degree::Higher(3));
    }

    #[test]
    fn parity_single_examples() {
        let d = det(&[0, 1, 2], 8);
        assert_eq!(parity_single(&d, 0, 3).unwrap(), 1.0);
        assert_eq!(parity_single(&d, 1, 3).unwrap(), -1.0);
        assert_eq!(parity_single(&det(&[5], 8), 5, 0).unwrap(), 1.0);
        assert!(matches!(parity_single(&d, 3, 4), Err(Error::Precondition(_))));
        assert!(matches!(parity_single(&d, 0, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn parity_double_matches_sequential_singles() {
        // oracle: apply the two singles one after the other
        let seq = |occ: &[usize], p: [usize; 2], q: [usize; 2]| {
            let d = det(occ, 8);
            let s1 = parity_single(&d, p[0], q[0]).unwrap();
            let mid = apply_single(&d, p[0], q[0]).unwrap();
            s1 * parity_single(&mid, p[1], q[1]).unwrap()
        };
        let a = seq(&[0, 1], [0, 1], [2, 3]);
        assert_eq!(parity_double(&det(&[0, 1], 8), 0, 1, 2, 3).unwrap(), a);
        assert_eq!(a, 1.0);
        let b = seq(&[0, 3], [0, 3], [1, 2]);
        assert_eq!(parity_double(&det(&[0, 3], 8), 0, 3, 1, 2).unwrap(), b);
        assert_eq!(b, 1.0);
        assert_eq!(parity_double(&det(&[0, 1], 8), 1, 0, 2, 3).unwrap(), 1.0 * a);
        assert_eq!(parity_double(&det(&[0, 4], 8), 0, 4, 1, 5).unwrap(), 1.0);
        assert!(parity_double(&det(&[0, 1], 8), 0, 0, 2, 3).is_err());
        assert!(parity_double(&det(&[0, 1], 8), 0, 1, 1, 3).is_err());
    }

    #[test]
    fn apply_single_examples() {
        assert_eq!(apply_single(&det(&[0, 1], 8), 1, 2).unwrap(), det(&[0, 2], 8));
        assert_eq!(apply_single(&det(&[0], 8), 0, 5).unwrap(), det(&[5], 8));
        assert!(apply_single(&det(&[0, 1], 8), 0, 1).is_err());
    }

    #[test]
    fn all_strings_enumerates_ascending() {
        let s = all_strings(4, 2, 64).unwrap();
        assert_eq!(s.len(), 6);
        let words: Vec<u64> = s.iter().map(|s| s.words()[0]).collect();
        assert_eq!(words, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(all_strings(3, 0, 64).unwrap().len(), 1);
        assert_eq!(all_strings(3, 3, 2).unwrap().len(), 1);
    }

    #[test]
    fn split_inverts_interleave() {
        let p = cfg(5, 7);
        let a = BitString::from_occupied(&[0, 3, 4], p).unwrap();
        let b = BitString::from_occupied(&[1, 4], p).unwrap();
        let d = interleave(&a, &b).unwrap();
        assert_eq!(d.n_alpha(), 3);
        assert_eq!(d.n_beta(), 2);
        assert_eq!(d.split(), (a, b));
    }

    fn occupation(n: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::btree_set(0..n, 0..=n).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn round_trip_any_bit_length(occ in occupation(90), bl in prop::sample::select(vec![1u32, 7, 20, 48, 64])) {
            let s = BitString::from_occupied(&occ, cfg(90, bl)).unwrap();
            prop_assert_eq!(s.occupied_list(), occ);
        }

        #[test]
        fn parity_involution(occ in occupation(12), pi in any::<prop::sample::Index>(), qi in any::<prop::sample::Index>()) {
            let d = det(&occ, 12);
            let empty: Vec<usize> = (0..12).filter(|&i| !d.is_set(i)).collect();
            prop_assume!(!occ.is_empty() && !empty.is_empty());
            let (p, q) = (occ[pi.index(occ.len())], empty[qi.index(empty.len())]);
            let forward = parity_single(&d, p, q).unwrap();
            let moved = apply_single(&d, p, q).unwrap();
            prop_assert_eq!(forward, parity_single(&moved, q, p).unwrap());
        }

        #[test]
        fn difference_is_antisymmetric(a in occupation(10), b in occupation(10)) {
            let (x, y) = (det(&a, 10), det(&b, 10));
            let (dxy, dyx) = (difference(&x, &y), difference(&y, &x));
            prop_assert_eq!(dxy.degree, dyx.degree);
            prop_assert_eq!(dxy.annihilated, dyx.created);
            prop_assert_eq!(dxy.created, dyx.annihilated);
        }

        #[test]
        fn kernels_ignore_packing(a in occupation(13), b in occupation(13), bl in 1u32..=64) {
            let wide = cfg(13, 64);
            let narrow = cfg(13, bl);
            let (aw, bw) = (BitString::from_occupied(&a, wide).unwrap(), BitString::from_occupied(&b, wide).unwrap());
            let (an, bn) = (aw.repack(bl).unwrap(), bw.repack(bl).unwrap());
            prop_assert_eq!(an.packing(), narrow);
            let dw = interleave(&aw, &bw).unwrap();
            let dn = interleave(&an, &bn).unwrap();
            prop_assert_eq!(dw.occupied_list(), dn.occupied_list());
            let ew = interleave(&bw, &aw).unwrap();
            let en = interleave(&bn, &an).unwrap();
            prop_assert_eq!(difference(&dw, &ew), difference(&dn, &en));
            for p in dw.occupied_list() {
                for q in 0..26 {
                    if !dw.is_set(q) {
                        prop_assert_eq!(parity_single(&dw, p, q).unwrap(), parity_single(&dn, p, q).unwrap());
                    }
                }
            }
        }
    }
}
