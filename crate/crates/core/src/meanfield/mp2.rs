//! MP2 doubles amplitudes (used to seed the sampling ansatz).

use std::path::Path;

use nalgebra::DVector;

use crate::error::{EmberError, Result};
use crate::integrals::IntegralBundle;
use crate::linalg::DenseEri;
use crate::meanfield::ScfResult;

const MIN_DENOMINATOR: f64 = 1e-10;

/// `t[i,j,a,b]` with `i,j` occupied and `a,b` virtual (virtual indices start at 0).
#[derive(Clone, Debug, PartialEq)]
pub struct DoublesAmplitudes {
    pub n_occ: usize,
    pub n_vir: usize,
    pub data: Vec<f64>,
    /// Correlation energy implied by the amplitudes (MP2 energy for MP2 amplitudes).
    pub e_corr: f64,
}

impl DoublesAmplitudes {
    pub fn zeros(n_occ: usize, n_vir: usize) -> Self {
        DoublesAmplitudes { n_occ, n_vir, data: vec![0.0; n_occ * n_occ * n_vir * n_vir], e_corr: 0.0 }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * self.n_occ + j) * self.n_vir + a) * self.n_vir + b
    }

    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.data[self.idx(i, j, a, b)]
    }

    pub fn set(&mut self, i: usize, j: usize, a: usize, b: usize, v: f64) {
        let k = self.idx(i, j, a, b);
        self.data[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }
}

pub fn mp2_amplitudes(bundle: &IntegralBundle, scf: &ScfResult) -> Result<DoublesAmplitudes> {
    let eri_mo = bundle.eri.to_dense().transform(&scf.mo_coeff);
    mp2_from_mo(&eri_mo, &scf.mo_energy, scf.n_occ())
}

/// Closed-shell MP2 from MO-basis integrals and canonical orbital energies.
pub fn mp2_from_mo(eri_mo: &DenseEri, eps: &DVector<f64>, n_occ: usize) -> Result<DoublesAmplitudes> {
    let n = eri_mo.n;
    let n_vir = n - n_occ;
    let mut t = DoublesAmplitudes::zeros(n_occ, n_vir);
    let mut e = 0.0;
    for i in 0..n_occ {
        for j in 0..n_occ {
            for a in 0..n_vir {
                for b in 0..n_vir {
                    let (va, vb) = (a + n_occ, b + n_occ);
                    let iajb = eri_mo.get(i, va, j, vb);
                    let denom = eps[i] + eps[j] - eps[va] - eps[vb];
                    if denom.abs() < MIN_DENOMINATOR {
                        if iajb == 0.0 {
                            continue;
                        }
                        return Err(EmberError::DegenerateOrbitals { i, j, a: va, b: vb, denominator: denom });
                    }
                    let tv = iajb / denom;
                    t.set(i, j, a, b, tv);
                    e += tv * (2.0 * iajb - eri_mo.get(i, vb, j, va));
                }
            }
        }
    }
    t.e_corr = e;
    Ok(t)
}

/// Reads `i j a b value` lines; `a`, `b` are absolute MO indices (≥ `n_occ`).
/// Each entry also fills its `(j,i,b,a)` partner. Blank lines and `#` comments are skipped.
pub fn read_amplitude_file(path: impl AsRef<Path>, n_occ: usize, n_vir: usize) -> Result<DoublesAmplitudes> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EmberError::io(path, e))?;
    parse_amplitudes(&text, &path.display().to_string(), n_occ, n_vir)
}

pub fn parse_amplitudes(text: &str, source: &str, n_occ: usize, n_vir: usize) -> Result<DoublesAmplitudes> {
    let mut t = DoublesAmplitudes::zeros(n_occ, n_vir);
    let mut count = 0;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = || format!("{source}:{}", ln + 1);
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(EmberError::parse(loc(), "expected `i j a b value`"));
        }
        let idx: Vec<usize> = f[..4]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| EmberError::parse(loc(), e.to_string()))?;
        let v: f64 = f[4].parse().map_err(|e: std::num::ParseFloatError| EmberError::parse(loc(), e.to_string()))?;
        let (i, j, a, b) = (idx[0], idx[1], idx[2], idx[3]);
        if i >= n_occ || j >= n_occ || a < n_occ || b < n_occ || a >= n_occ + n_vir || b >= n_occ + n_vir {
            return Err(EmberError::parse(
                loc(),
                format!("indices ({i},{j},{a},{b}) outside the occupied/virtual split"),
            ));
        }
        t.set(i, j, a - n_occ, b - n_occ, v);
        t.set(j, i, b - n_occ, a - n_occ, v);
        count += 1;
    }
    if count == 0 {
        return Err(EmberError::parse(source, "no amplitudes"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_integrals_give_zero_amplitudes() {
        let eri = DenseEri::zeros(4);
        let eps = DVector::from_vec(vec![-1.0, -0.5, 0.5, 1.0]);
        let t = mp2_from_mo(&eri, &eps, 2).unwrap();
        assert!(t.is_zero());
        assert_eq!(t.e_corr, 0.0);
    }

    #[test]
    fn degenerate_denominator_is_rejected() {
        let mut eri = DenseEri::zeros(2);
        for v in eri.data.iter_mut() {
            *v = 0.1;
        }
        let eps = DVector::from_vec(vec![0.3, 0.3]);
        assert!(matches!(mp2_from_mo(&eri, &eps, 1), Err(EmberError::DegenerateOrbitals { .. })));
    }

    #[test]
    fn amplitude_file_fills_partner() {
        let t = parse_amplitudes("# comment\n0 1 2 3 -0.05\n", "t", 2, 2).unwrap();
        assert_eq!(t.get(0, 1, 0, 1), -0.05);
        assert_eq!(t.get(1, 0, 1, 0), -0.05);
        assert!(parse_amplitudes("0 1 1 3 -0.05\n", "t", 2, 2).is_err());
        assert!(parse_amplitudes("\n", "t", 2, 2).is_err());
    }
}
