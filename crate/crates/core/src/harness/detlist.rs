//! Determinant-list files.
//!
//! ```text
//! # comments and blank lines are ignored
//! norbs 4
//! alpha
//! 0x3
//! 0x5
//! beta
//! 0x3
//! ```
//!
//! Each mask is hexadecimal (the `0x` prefix is optional) with bit 0 as
//! spatial orbital 0.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::determinant::{BitString, PackingConfig};
use crate::error::{Error, Result};

/// Packing used for parsed strings; the basis repacks as configured.
const PARSE_BIT_LENGTH: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DetList {
    pub norbs: usize,
    pub alpha: Vec<BitString>,
    pub beta: Vec<BitString>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Alpha,
    Beta,
}

fn parse_mask(token: &str, norbs: usize, packing: PackingConfig, line: usize) -> Result<BitString> {
    let hex = token
        .strip_prefix("0x")
        .or_else(|| token.strip_prefix("0X"))
        .unwrap_or(token);
    if hex.is_empty() {
        return Err(Error::format(line, format!("empty mask `{token}`")));
    }
    let mut occ = Vec::new();
    for (nibble, c) in hex.chars().rev().enumerate() {
        let d = c
            .to_digit(16)
            .ok_or_else(|| Error::format(line, format!("`{token}` is not a hexadecimal mask")))?;
        for bit in 0..4 {
            if d >> bit & 1 == 1 {
                let orb = 4 * nibble + bit;
                if orb >= norbs {
                    return Err(Error::input(format!(
                        "line {line}: mask {token} sets orbital {orb} but norbs is {norbs}"
                    )));
                }
                occ.push(orb);
            }
        }
    }
    occ.sort_unstable();
    BitString::from_occupied(&occ, packing)
}

pub fn parse_det_list<R: BufRead>(reader: R) -> Result<DetList> {
    let mut norbs: Option<usize> = None;
    let mut packing: Option<PackingConfig> = None;
    let mut section: Option<Section> = None;
    let mut seen = [false, false];
    let mut lists: [Vec<BitString>; 2] = [Vec::new(), Vec::new()];
    let mut sets: [HashSet<BitString>; 2] = [HashSet::new(), HashSet::new()];

    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|source| Error::Io {
            context: format!("reading determinant list line {lineno}"),
            source,
        })?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut tokens = text.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        match head {
            "norbs" => {
                if norbs.is_some() {
                    return Err(Error::format(lineno, "repeated norbs header"));
                }
                let n: usize = tokens
                    .next()
                    .and_then(|v| v.parse().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::format(lineno, "expected `norbs <positive integer>`"))?;
                if tokens.next().is_some() {
                    return Err(Error::format(lineno, "trailing text after norbs"));
                }
                norbs = Some(n);
                packing = Some(PackingConfig::new(n, PARSE_BIT_LENGTH)?);
            }
            "alpha" | "beta" => {
                if norbs.is_none() {
                    return Err(Error::format(lineno, "section before the norbs header"));
                }
                if tokens.next().is_some() {
                    return Err(Error::format(lineno, format!("trailing text after `{head}`")));
                }
                let s = if head == "alpha" { Section::Alpha } else { Section::Beta };
                let idx = s as usize;
                if seen[idx] {
                    return Err(Error::format(lineno, format!("repeated `{head}` section")));
                }
                seen[idx] = true;
                section = Some(s);
            }
            _ => {
                let Some(s) = section else {
                    return Err(Error::format(lineno, format!("unexpected `{head}` outside a section")));
                };
                if tokens.next().is_some() {
                    return Err(Error::format(lineno, "one mask per line"));
                }
                let name = if s == Section::Alpha { "alpha" } else { "beta" };
                let idx = s as usize;
                let bits = parse_mask(head, norbs.unwrap(), packing.unwrap(), lineno)?;
                if let Some(first) = lists[idx].first() {
                    if first.count_ones() != bits.count_ones() {
                        return Err(Error::input(format!(
                            "line {lineno}: {name} mask {head} has {} electrons, the first {name} mask has {}",
                            bits.count_ones(),
                            first.count_ones()
                        )));
                    }
                }
                if !sets[idx].insert(bits.clone()) {
                    return Err(Error::input(format!("line {lineno}: duplicate {name} mask {head}")));
                }
                lists[idx].push(bits);
            }
        }
    }

    let norbs = norbs.ok_or_else(|| Error::input("determinant list has no norbs header"))?;
    for (idx, name) in ["alpha", "beta"].iter().enumerate() {
        if !seen[idx] {
            return Err(Error::input(format!("determinant list has no {name} section")));
        }
    }
    let [alpha, beta] = lists;
    Ok(DetList { norbs, alpha, beta })
}

pub fn read_det_list(path: impl AsRef<Path>) -> Result<DetList> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        context: format!("opening {}", path.display()),
        source,
    })?;
    parse_det_list(BufReader::new(file))
}

/// Lowercase hexadecimal mask with `0x` prefix.
pub fn format_mask(s: &BitString) -> String {
    let occ = s.occupied_list();
    let Some(&top) = occ.last() else {
        return "0x0".into();
    };
    let mut nibbles = vec![0u32; top / 4 + 1];
    for p in occ {
        nibbles[p / 4] |= 1 << (p % 4);
    }
    let digits: String = nibbles
        .iter()
        .rev()
        .map(|&d| char::from_digit(d, 16).unwrap())
        .collect();
    format!("0x{digits}")
}

pub fn write_det_list<W: Write>(
    mut out: W,
    norbs: usize,
    alpha: &[BitString],
    beta: &[BitString],
) -> std::io::Result<()> {
    writeln!(out, "norbs {norbs}")?;
    writeln!(out, "alpha")?;
    for s in alpha {
        writeln!(out, "{}", format_mask(s))?;
    }
    writeln!(out, "beta")?;
    for s in beta {
        writeln!(out, "{}", format_mask(s))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DetList> {
        parse_det_list(text.as_bytes())
    }

    #[test]
    fn minimal_list() {
        let d = parse("norbs 2\nalpha\n0x3\nbeta\n0x1\n").unwrap();
        assert_eq!(d.norbs, 2);
        assert_eq!(d.alpha.len(), 1);
        assert_eq!(d.beta.len(), 1);
        assert_eq!(d.alpha[0].occupied_list(), vec![0, 1]);
        assert_eq!(d.beta[0].occupied_list(), vec![0]);
    }

    #[test]
    fn comments_prefixes_and_case() {
        let d = parse("# header\n\nnorbs 6  # six\nalpha\n  3\n0X30\nbeta\n0x1 # hf\n0x20\n").unwrap();
        assert_eq!(d.alpha[1].occupied_list(), vec![4, 5]);
        assert_eq!(d.beta[1].occupied_list(), vec![5]);
    }

    #[test]
    fn rejects_bad_lists() {
        assert!(matches!(
            parse("norbs 2\nalpha\n0x3\n0x3\nbeta\n0x1\n"),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            parse("norbs 2\nalpha\n0x8\nbeta\n0x1\n"),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            parse("norbs 3\nalpha\n0x3\n0x4\nbeta\n0x1\n"),
            Err(Error::Input(_))
        ));
        assert!(matches!(parse("norbs 2\nalpha\n0x3\n"), Err(Error::Input(_))));
        assert!(matches!(parse("alpha\n0x3\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(
            parse("norbs 2\nalpha\n0xg\nbeta\n0x1\n"),
            Err(Error::Format { line: 3, .. })
        ));
        assert!(matches!(parse("norbs 2\n0x1\n"), Err(Error::Format { line: 2, .. })));
        assert!(matches!(parse("norbs two\n"), Err(Error::Format { .. })));
    }

    #[test]
    fn write_then_parse() {
        let d = parse("norbs 70\nalpha\n0x3\n0x200000000000000001\nbeta\n0x0\n").unwrap();
        assert_eq!(format_mask(&d.alpha[1]), "0x200000000000000001");
        assert_eq!(format_mask(&d.beta[0]), "0x0");
        let mut buf = Vec::new();
        write_det_list(&mut buf, d.norbs, &d.alpha, &d.beta).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), d);
    }
}
