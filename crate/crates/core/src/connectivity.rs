//! Same-channel excitation lists between the strings of one spin channel,
//! flattened into a single array with per-source offset and length.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::determinant::BitString;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlatExcitationTable {
    flat: Vec<u32>,
    offset: Vec<usize>,
    len: Vec<usize>,
}

impl FlatExcitationTable {
    fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let mut offset = Vec::with_capacity(rows.len());
        let mut len = Vec::with_capacity(rows.len());
        let mut flat = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for row in rows {
            offset.push(flat.len());
            len.push(row.len());
            flat.extend(row);
        }
        FlatExcitationTable { flat, offset, len }
    }

    pub fn flat(&self) -> &[u32] {
        &self.flat
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offset
    }

    pub fn lens(&self) -> &[usize] {
        &self.len
    }

    pub fn source_count(&self) -> usize {
        self.len.len()
    }

    pub fn total_entries(&self) -> usize {
        self.flat.len()
    }

    pub fn neighbors(&self, i: usize) -> Result<&[u32]> {
        if i >= self.source_count() {
            return Err(Error::input(format!(
                "source index {i} out of range for {} strings",
                self.source_count()
            )));
        }
        Ok(self.row(i))
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u32] {
        &self.flat[self.offset[i]..self.offset[i] + self.len[i]]
    }

    /// One line per source with space-separated targets.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.source_count() {
            let row: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn index_strings(strings: &[BitString], norbs: usize) -> Result<HashMap<&BitString, u32>> {
    if strings.len() > u32::MAX as usize {
        return Err(Error::input("too many strings for 32-bit excitation indices"));
    }
    let mut index = HashMap::with_capacity(strings.len());
    let electrons = strings.first().map(BitString::count_ones);
    for (i, s) in strings.iter().enumerate() {
        if s.norbs_spin() != norbs {
            return Err(Error::input(format!(
                "string {i} has {} orbitals, expected {norbs}",
                s.norbs_spin()
            )));
        }
        if Some(s.count_ones()) != electrons {
            return Err(Error::input(format!("string {i} has a different electron count")));
        }
        if index.insert(s, i as u32).is_some() {
            return Err(Error::input(format!("duplicate string {s:?} at index {i}")));
        }
    }
    Ok(index)
}

fn generate(strings: &[BitString], norbs: usize, moves: usize) -> Result<FlatExcitationTable> {
    let index = index_strings(strings, norbs)?;
    let rows = strings
        .par_iter()
        .map(|s| {
            let occ = s.occupied_list();
            let virt: Vec<usize> = (0..norbs).filter(|&i| !s.is_set(i)).collect();
            let mut row = Vec::new();
            if moves == 1 {
                for &i in &occ {
                    for &a in &virt {
                        if let Some(&j) = index.get(&s.moved(i, a)) {
                            row.push(j);
                        }
                    }
                }
            } else {
                for (n, &i) in occ.iter().enumerate() {
                    for &j in &occ[n + 1..] {
                        let removed = {
                            let mut t = s.clone();
                            t.clear(i);
                            t.clear(j);
                            t
                        };
                        for (m, &a) in virt.iter().enumerate() {
                            for &b in &virt[m + 1..] {
                                let mut t = removed.clone();
                                t.set(a);
                                t.set(b);
                                if let Some(&k) = index.get(&t) {
                                    row.push(k);
                                }
                            }
                        }
                    }
                }
            }
            row.sort_unstable();
            row
        })
        .collect();
    Ok(FlatExcitationTable::from_rows(rows))
}

/// Targets reachable from each string by exactly one electron move.
pub fn generate_singles(strings: &[BitString], norbs: usize) -> Result<FlatExcitationTable> {
    generate(strings, norbs, 1)
}

/// Targets reachable from each string by exactly two electron moves.
pub fn generate_doubles(strings: &[BitString], norbs: usize) -> Result<FlatExcitationTable> {
    generate(strings, norbs, 2)
}
