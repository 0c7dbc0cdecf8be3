//! FCIDUMP exchange for impurity Hamiltonians.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::bundle::f17;
use super::eri::EriTensor;
use super::ImpurityHamiltonian;
use crate::error::{EmberError, Result};

pub fn fcidump_text(imp: &ImpurityHamiltonian) -> String {
    let n = imp.n_orb;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={n},NELEC={},MS2=0,", imp.n_elec_imp);
    let _ = write!(out, "  ORBSYM=");
    for _ in 0..n {
        let _ = write!(out, "1,");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for ((p, q, r, s), v) in imp.eri_imp.nonzero() {
        let _ = writeln!(out, "{} {} {} {} {}", f17(v), p + 1, q + 1, r + 1, s + 1);
    }
    for i in 0..n {
        for j in 0..=i {
            let _ = writeln!(out, "{} {} {} 0 0", f17(imp.h1[(i, j)]), i + 1, j + 1);
        }
    }
    let _ = writeln!(out, "{} 0 0 0 0", f17(imp.e_const));
    out
}

pub fn write_impurity_fcidump(imp: &ImpurityHamiltonian, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, fcidump_text(imp)).map_err(|e| EmberError::io(path, e))
}

pub fn read_impurity_fcidump(path: impl AsRef<Path>) -> Result<ImpurityHamiltonian> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EmberError::io(path, e))?;
    parse_fcidump(&text, &path.display().to_string())
}

/// Parse FCIDUMP text. Fragment membership is not part of the format, so the
/// returned Hamiltonian has empty `frag_indices`.
pub fn parse_fcidump(text: &str, source: &str) -> Result<ImpurityHamiltonian> {
    let mut header = String::new();
    let mut body_start = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        let upper = t.to_ascii_uppercase();
        if upper.starts_with("&END") || upper == "/" || upper.ends_with("&END") {
            header.push_str(t.trim_end_matches("&END").trim_end_matches("&end"));
            body_start = Some(i + 1);
            break;
        }
        header.push_str(t);
        header.push(',');
    }
    let body_start = body_start.ok_or_else(|| EmberError::parse(source, "FCIDUMP header has no &END"))?;
    let header = header.replace("&FCI", "").replace("&fci", "");
    let key = |name: &str| -> Option<String> {
        let upper = header.to_ascii_uppercase();
        let pos = upper.find(&format!("{name}="))?;
        let tail = &header[pos + name.len() + 1..];
        Some(tail.split(',').next().unwrap_or("").trim().to_string())
    };
    let norb: usize = key("NORB")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| EmberError::parse(source, "NORB missing from FCIDUMP header"))?;
    let nelec: usize = key("NELEC")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| EmberError::parse(source, "NELEC missing from FCIDUMP header"))?;

    let mut h1 = DMatrix::zeros(norb, norb);
    let mut eri = EriTensor::zeros(norb);
    let mut e_const = 0.0;
    for (i, line) in text.lines().enumerate().skip(body_start) {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let loc = format!("{source}:{}", i + 1);
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 5 {
            return Err(EmberError::parse(loc, "expected `value p q r s`"));
        }
        let v: f64 = f[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| EmberError::parse(&loc, format!("bad value {:?}", f[0])))?;
        let idx: Vec<usize> = f[1..]
            .iter()
            .map(|x| x.parse::<usize>().map_err(|_| EmberError::parse(&loc, format!("bad index {x:?}"))))
            .collect::<Result<_>>()?;
        if idx.iter().any(|&x| x > norb) {
            return Err(EmberError::parse(loc, format!("index {idx:?} exceeds NORB {norb}")));
        }
        match (idx[0], idx[1], idx[2], idx[3]) {
            (0, 0, 0, 0) => e_const = v,
            (p, q, 0, 0) if p > 0 && q > 0 => {
                h1[(p - 1, q - 1)] = v;
                h1[(q - 1, p - 1)] = v;
            }
            (_, 0, 0, 0) => {} // orbital energies
            (p, q, r, s) if p > 0 && q > 0 && r > 0 && s > 0 => eri.set(p - 1, q - 1, r - 1, s - 1, v),
            _ => return Err(EmberError::parse(loc, format!("malformed index set {idx:?}"))),
        }
    }
    Ok(ImpurityHamiltonian { n_orb: norb, n_elec_imp: nelec, h1, eri_imp: eri, e_const, frag_indices: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_impurity(e_const: f64) -> ImpurityHamiltonian {
        ImpurityHamiltonian {
            n_orb: 2,
            n_elec_imp: 2,
            h1: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -0.5])),
            eri_imp: EriTensor::zeros(2),
            e_const,
            frag_indices: vec![0],
        }
    }

    #[test]
    fn diagonal_impurity_line_counts() {
        let text = fcidump_text(&diag_impurity(0.0));
        let body: Vec<&str> = text.lines().skip_while(|l| !l.contains("&END")).skip(1).collect();
        let one_body = body.iter().filter(|l| l.ends_with(" 0 0") && !l.ends_with("0 0 0 0")).count();
        let core = body.iter().filter(|l| l.ends_with(" 0 0 0 0")).count();
        assert_eq!(one_body, 3);
        assert_eq!(core, 1);
        assert_eq!(body.len(), 4);
    }

    #[test]
    fn core_energy_line() {
        let text = fcidump_text(&diag_impurity(1.5));
        let last = text.lines().last().unwrap();
        let v: f64 = last.split_whitespace().next().unwrap().parse().unwrap();
        assert_eq!(v, 1.5);
        let back = parse_fcidump(&text, "mem").unwrap();
        assert_eq!(back.e_const, 1.5);
    }

    #[test]
    fn header_is_standard() {
        let text = fcidump_text(&diag_impurity(0.0));
        assert!(text.starts_with(" &FCI NORB=2,NELEC=2,MS2=0,"));
        assert!(text.contains("ORBSYM=1,1,"));
        assert!(text.contains("ISYM=1,"));
    }

    #[test]
    fn missing_end_is_error() {
        assert!(parse_fcidump(" &FCI NORB=2,NELEC=2,\n", "mem").is_err());
    }
}
