//! Shot files: one `<bitstring> <count>` per line.
//!
//! The bitstring has `2n` characters written most-significant first; bit `k`
//! (counting from the right, 0-based) is spin orbital `k`, where `0..n` are
//! the α orbitals and `n..2n` the β orbitals. So for `n = 2`, `0011` is
//! α = {0, 1}, β = {}.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{EmberError, Result};
use crate::sampling::determinant::Determinant;
use crate::sampling::sampler::{SampleSet, SourceTag};

pub fn read_bitstring_file(path: impl AsRef<Path>, n_orb: usize) -> Result<SampleSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EmberError::io(path, e))?;
    let mut set = parse_bitstrings(&text, &path.display().to_string(), n_orb)?;
    set.source = SourceTag::File(path.display().to_string());
    Ok(set)
}

pub fn parse_bitstrings(text: &str, source: &str, n_orb: usize) -> Result<SampleSet> {
    if n_orb > 64 {
        return Err(EmberError::Invalid(format!("{n_orb} orbitals exceed the 64-bit string width")));
    }
    let mut counts = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = format!("{source}:{}", ln + 1);
        let mut f = line.split_whitespace();
        let bits = f.next().unwrap_or_default();
        let count = f.next().ok_or_else(|| EmberError::parse(&loc, "missing count"))?;
        if f.next().is_some() {
            return Err(EmberError::parse(&loc, "expected `<bitstring> <count>`"));
        }
        if bits.len() != 2 * n_orb || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(EmberError::parse(&loc, format!("bitstring must be {} binary digits", 2 * n_orb)));
        }
        let count: i64 = count.parse().map_err(|_| EmberError::parse(&loc, format!("bad count {count:?}")))?;
        if count < 0 {
            return Err(EmberError::parse(&loc, "negative count"));
        }
        let mut d = Determinant::new(0, 0);
        for (k, b) in bits.bytes().rev().enumerate() {
            if b == b'1' {
                if k < n_orb {
                    d.alpha |= 1 << k;
                } else {
                    d.beta |= 1 << (k - n_orb);
                }
            }
        }
        *counts.entry(d).or_insert(0) += count as u64;
    }
    if counts.is_empty() {
        return Err(EmberError::parse(source, "no samples"));
    }
    Ok(SampleSet::from_counts(counts, SourceTag::File(source.to_string())))
}

pub fn format_bitstrings(set: &SampleSet, n_orb: usize) -> String {
    let mut out = String::new();
    for (d, m) in &set.counts {
        let _ = writeln!(out, "{} {m}", d.to_bitstring(n_orb));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_alpha_block_first() {
        let s = parse_bitstrings("0011 5\n", "t", 2).unwrap();
        assert_eq!(s.counts[&Determinant::new(0b11, 0b00)], 5);
        assert_eq!(s.shots, 5);
    }

    #[test]
    fn empty_wrong_width_negative() {
        assert!(parse_bitstrings("", "t", 2).is_err());
        assert!(parse_bitstrings("011 1\n", "t", 2).is_err());
        assert!(parse_bitstrings("0011 -1\n", "t", 2).is_err());
    }

    #[test]
    fn counts_add_up_and_round_trip() {
        let s = parse_bitstrings("0101 6000\n1010 4000\n", "t", 2).unwrap();
        assert_eq!(s.shots, 10_000);
        let back = parse_bitstrings(&format_bitstrings(&s, 2), "t", 2).unwrap();
        assert_eq!(back.counts, s.counts);
    }
}
