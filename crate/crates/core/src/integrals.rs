//! One- and two-electron integrals in chemist notation, read from FCIDUMP
//! files.
//!
//! Two-electron integrals are kept in a packed triangular array over
//! canonical index pairs, which stores each of the eight symmetry-equivalent
//! quadruples once and resolves lookups without hashing.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[inline]
fn pair(p: usize, q: usize) -> usize {
    if p >= q {
        p * (p + 1) / 2 + q
    } else {
        q * (q + 1) / 2 + p
    }
}

#[inline]
fn quad(p: usize, q: usize, r: usize, s: usize) -> usize {
    pair(pair(p, q), pair(r, s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralTable {
    norbs: usize,
    n_elec: usize,
    ms2: i64,
    core_energy: f64,
    h: Vec<f64>,
    eri: Vec<f64>,
}

impl IntegralTable {
    /// An all-zero table.
    pub fn new(norbs: usize, n_elec: usize, ms2: i64) -> Result<Self> {
        if norbs == 0 {
            return Err(Error::input("NORB must be at least 1"));
        }
        if ms2.unsigned_abs() as usize > n_elec || (n_elec as i64 + ms2) % 2 != 0 {
            return Err(Error::input(format!("MS2={ms2} is inconsistent with NELEC={n_elec}")));
        }
        let npair = norbs * (norbs + 1) / 2;
        Ok(IntegralTable {
            norbs,
            n_elec,
            ms2,
            core_energy: 0.0,
            h: vec![0.0; norbs * norbs],
            eri: vec![0.0; npair * (npair + 1) / 2],
        })
    }

    pub fn norbs(&self) -> usize {
        self.norbs
    }

    pub fn n_elec(&self) -> usize {
        self.n_elec
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    pub fn n_alpha(&self) -> usize {
        ((self.n_elec as i64 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        self.n_elec - self.n_alpha()
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn set_core_energy(&mut self, value: f64) {
        self.core_energy = value;
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.norbs) {
            Some(i) => Err(Error::input(format!(
                "orbital index {i} out of range for {} orbitals",
                self.norbs
            ))),
            None => Ok(()),
        }
    }

    pub fn set_one_electron(&mut self, p: usize, q: usize, value: f64) -> Result<()> {
        self.check(&[p, q])?;
        self.h[p * self.norbs + q] = value;
        self.h[q * self.norbs + p] = value;
        Ok(())
    }

    pub fn set_two_electron(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) -> Result<()> {
        self.check(&[p, q, r, s])?;
        self.eri[quad(p, q, r, s)] = value;
        Ok(())
    }

    pub fn one_electron(&self, p: usize, q: usize) -> Result<f64> {
        self.check(&[p, q])?;
        Ok(self.h(p, q))
    }

    /// `(pq|rs)` in chemist notation.
    pub fn two_electron(&self, p: usize, q: usize, r: usize, s: usize) -> Result<f64> {
        self.check(&[p, q, r, s])?;
        Ok(self.eri(p, q, r, s))
    }

    #[inline]
    pub(crate) fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.norbs + q]
    }

    #[inline]
    pub(crate) fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[quad(p, q, r, s)]
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            context: format!("opening {}", path.display()),
            source,
        })?;
        parse_fcidump(BufReader::new(file))
    }

    /// Writes the table in FCIDUMP form with canonical index ordering.
    pub fn write_fcidump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, " &FCI NORB={},NELEC={},MS2={},", self.norbs, self.n_elec, self.ms2)?;
        writeln!(out, " &END")?;
        for p in 0..self.norbs {
            for q in 0..=p {
                for r in 0..self.norbs {
                    for s in 0..=r {
                        if pair(r, s) > pair(p, q) {
                            continue;
                        }
                        let v = self.eri(p, q, r, s);
                        if v != 0.0 {
                            writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1)?;
                        }
                    }
                }
            }
        }
        for p in 0..self.norbs {
            for q in 0..=p {
                let v = self.h(p, q);
                if v != 0.0 {
                    writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1)?;
                }
            }
        }
        writeln!(out, "{:e} 0 0 0 0", self.core_energy)
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    token
        .replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| Error::format(line, format!("not a number: {token:?}")))
}

fn parse_header(text: &str, line: usize) -> Result<HashMap<String, Vec<String>>> {
    let body = text.trim_start();
    let body = body
        .strip_prefix("&FCI")
        .or_else(|| body.strip_prefix("&fci"))
        .or_else(|| body.strip_prefix("$FCI"))
        .ok_or_else(|| Error::format(1, "header must start with &FCI"))?;
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut key: Option<String> = None;
    for piece in body.split(|c: char| c == ',' || c.is_whitespace()) {
        if piece.is_empty() {
            continue;
        }
        match piece.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_ascii_uppercase();
                let entry = fields.entry(k.clone()).or_default();
                if !v.is_empty() {
                    entry.push(v.to_string());
                }
                key = Some(k);
            }
            None => match &key {
                Some(k) => fields.get_mut(k).expect("key inserted").push(piece.to_string()),
                None => return Err(Error::format(line, format!("unexpected header token {piece:?}"))),
            },
        }
    }
    Ok(fields)
}

fn header_int(fields: &HashMap<String, Vec<String>>, key: &str, line: usize) -> Result<Option<i64>> {
    match fields.get(key).and_then(|v| v.first()) {
        None => Ok(None),
        Some(v) => v
            .parse::<i64>()
            .map(Some)
            .map_err(|_| Error::format(line, format!("{key} is not an integer: {v:?}"))),
    }
}

fn is_header_end(line: &str) -> bool {
    let t = line.trim();
    let upper = t.to_ascii_uppercase();
    upper.ends_with("&END") || upper.ends_with("$END") || t == "/" || t.ends_with(" /") || t.ends_with(",/")
}

/// Parses an FCIDUMP stream: a `&FCI ... &END` namelist followed by
/// `value i j k l` lines with 1-based indices.
pub fn parse_fcidump<R: BufRead>(reader: R) -> Result<IntegralTable> {
    let mut lines = reader.lines().enumerate();
    let mut header = String::new();
    let mut header_end = 0;
    let mut closed = false;
    for (n, line) in lines.by_ref() {
        let line = line.map_err(|source| Error::Io {
            context: "reading FCIDUMP".into(),
            source,
        })?;
        header.push_str(&line);
        header.push(' ');
        header_end = n + 1;
        if is_header_end(&line) {
            closed = true;
            break;
        }
    }
    if !closed {
        return Err(Error::format(header_end, "unterminated FCIDUMP header"));
    }
    let upper = header.to_ascii_uppercase();
    let cut = upper
        .rfind("&END")
        .or_else(|| upper.rfind("$END"))
        .or_else(|| header.rfind('/'))
        .unwrap_or(header.len());
    let fields = parse_header(&header[..cut], header_end)?;

    let norb =
        header_int(&fields, "NORB", header_end)?.ok_or_else(|| Error::format(header_end, "header is missing NORB"))?;
    let nelec = header_int(&fields, "NELEC", header_end)?
        .ok_or_else(|| Error::format(header_end, "header is missing NELEC"))?;
    let ms2 = header_int(&fields, "MS2", header_end)?.unwrap_or(0);
    if norb < 1 || nelec < 0 {
        return Err(Error::format(
            header_end,
            "NORB must be positive and NELEC non-negative",
        ));
    }
    let norbs = norb as usize;
    let mut table =
        IntegralTable::new(norbs, nelec as usize, ms2).map_err(|e| Error::format(header_end, e.to_string()))?;

    for (n, line) in lines {
        let lineno = n + 1;
        let line = line.map_err(|source| Error::Io {
            context: "reading FCIDUMP".into(),
            source,
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(Error::format(
                lineno,
                format!("expected 5 fields, got {}", tokens.len()),
            ));
        }
        let value = parse_value(tokens[0], lineno)?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&tokens[1..]) {
            let i: usize = tok
                .parse()
                .map_err(|_| Error::format(lineno, format!("bad orbital index {tok:?}")))?;
            if i > norbs {
                return Err(Error::format(lineno, format!("orbital index {i} exceeds NORB={norbs}")));
            }
            *slot = i;
        }
        match idx {
            [0, 0, 0, 0] => table.core_energy = value,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                table.set_one_electron(i - 1, j - 1, value)?;
            }
            // orbital energies
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                table.set_two_electron(i - 1, j - 1, k - 1, l - 1, value)?;
            }
            _ => {
                return Err(Error::format(lineno, format!("unrecognized index pattern {idx:?}")));
            }
        }
    }
    Ok(table)
}

/// Dense Coulomb `J[p][q] = (pp|qq)` and exchange `K[p][q] = (pq|qp)` tables.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectExchange {
    norbs: usize,
    direct: Vec<f64>,
    exchange: Vec<f64>,
}

impl DirectExchange {
    pub fn build(t: &IntegralTable) -> Self {
        let n = t.norbs;
        let mut direct = vec![0.0; n * n];
        let mut exchange = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                direct[p * n + q] = t.eri(p, p, q, q);
                exchange[p * n + q] = t.eri(p, q, q, p);
            }
        }
        DirectExchange {
            norbs: n,
            direct,
            exchange,
        }
    }

    pub fn norbs(&self) -> usize {
        self.norbs
    }

    #[inline]
    pub fn direct(&self, p: usize, q: usize) -> f64 {
        self.direct[p * self.norbs + q]
    }

    #[inline]
    pub fn exchange(&self, p: usize, q: usize) -> f64 {
        self.exchange[p * self.norbs + q]
    }
}
