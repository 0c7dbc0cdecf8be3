//! Projected Hamiltonian actions `y = P H P x`.

use std::collections::HashMap;

use crate::integrals::ImpurityHamiltonian;
use crate::linalg::DenseEri;
use crate::par;
use crate::sampling::determinant::{occupied, Determinant};
use crate::sqd::davidson::LinearOperator;
use crate::sqd::strings::{merge_row, same_spin_matrix, Csr, SingleTable, StringSpace};
use crate::sqd::subspace::SubspaceBasis;

fn flat_h1(imp: &ImpurityHamiltonian) -> Vec<f64> {
    let n = imp.n_orb;
    let mut h = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            h[p * n + q] = imp.h1[(p, q)];
        }
    }
    h
}

/// Action over a product basis `A ⊗ B`. Same-spin blocks are sparse string
/// matrices; the opposite-spin block contracts α and β single-excitation
/// tables through `(pq|rs)` on the fly.
pub struct ProductSpaceAction {
    pub n_orb: usize,
    na: usize,
    nb: usize,
    hs_a: Csr,
    hs_b: Csr,
    ta: SingleTable,
    tb: SingleTable,
    v: Vec<f64>,
    diag: Vec<f64>,
}

impl ProductSpaceAction {
    pub fn new(imp: &ImpurityHamiltonian, basis: &SubspaceBasis) -> Self {
        let n = imp.n_orb;
        assert_eq!(basis.n_orb, n, "basis and impurity orbital counts differ");
        let eri = imp.eri_imp.to_dense();
        let h1 = flat_h1(imp);
        Self::from_parts(n, &h1, &eri, &basis.alpha, &basis.beta)
    }

    pub fn from_parts(n: usize, h1: &[f64], eri: &DenseEri, alpha: &StringSpace, beta: &StringSpace) -> Self {
        let hs_a = same_spin_matrix(alpha, h1, eri);
        let shared = alpha == beta;
        let hs_b = if shared { hs_a.clone() } else { same_spin_matrix(beta, h1, eri) };
        let ta = SingleTable::new(alpha);
        let tb = if shared { ta.clone() } else { SingleTable::new(beta) };
        // v[pq·n² + rs] = (pq|rs), identical layout to the dense tensor
        let v = eri.data.clone();
        let da = hs_a.diagonal();
        let db = hs_b.diagonal();
        let (na, nb) = (alpha.len(), beta.len());
        let mut diag = vec![0.0; na * nb];
        for ia in 0..na {
            let occ_a: Vec<usize> = occupied(alpha.strings[ia]).collect();
            for ib in 0..nb {
                let mut e = da[ia] + db[ib];
                for q in occupied(beta.strings[ib]) {
                    for &p in &occ_a {
                        e += eri.get(p, p, q, q);
                    }
                }
                diag[ia * nb + ib] = e;
            }
        }
        ProductSpaceAction { n_orb: n, na, nb, hs_a, hs_b, ta, tb, v, diag }
    }
}

impl LinearOperator for ProductSpaceAction {
    fn dim(&self) -> usize {
        self.na * self.nb
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nb = self.nb;
        let n2 = self.n_orb * self.n_orb;
        par::for_each_chunk_mut(y, nb, |ia, yrow| {
            let (cols, vals) = self.hs_a.row(ia);
            for (&ja, &h) in cols.iter().zip(vals) {
                let xr = &x[ja as usize * nb..(ja as usize + 1) * nb];
                for (yi, xi) in yrow.iter_mut().zip(xr) {
                    *yi += h * xi;
                }
            }
            let xrow = &x[ia * nb..(ia + 1) * nb];
            for (ib, yi) in yrow.iter_mut().enumerate() {
                let (cols, vals) = self.hs_b.row(ib);
                *yi += cols.iter().zip(vals).map(|(&jb, &h)| h * xrow[jb as usize]).sum::<f64>();
            }
            for ea in self.ta.row(ia) {
                let vrow = &self.v[ea.pq as usize * n2..(ea.pq as usize + 1) * n2];
                let xr = &x[ea.j as usize * nb..(ea.j as usize + 1) * nb];
                for (ib, yi) in yrow.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for eb in self.tb.row(ib) {
                        acc += eb.sign * vrow[eb.pq as usize] * xr[eb.j as usize];
                    }
                    *yi += ea.sign * acc;
                }
            }
        });
    }
}

pub fn build_hamiltonian_action(imp: &ImpurityHamiltonian, basis: &SubspaceBasis) -> ProductSpaceAction {
    ProductSpaceAction::new(imp, basis)
}

/// Slater–Condon matrix over an arbitrary determinant list (spin-orbital
/// rules, no product structure assumed).
pub struct SlaterCondonAction {
    matrix: Csr,
}

struct SpinOrbitalIntegrals<'a> {
    n: usize,
    h: &'a [f64],
    eri: &'a DenseEri,
}

impl SpinOrbitalIntegrals<'_> {
    // spin orbital k: spatial k mod n, spin k / n
    #[inline]
    fn h(&self, p: usize, q: usize) -> f64 {
        if p / self.n != q / self.n {
            0.0
        } else {
            self.h[(p % self.n) * self.n + q % self.n]
        }
    }

    #[inline]
    fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n;
        if p / n != q / n || r / n != s / n {
            0.0
        } else {
            self.eri.get(p % n, q % n, r % n, s % n)
        }
    }
}

fn spin_orbital_bits(d: &Determinant, n: usize) -> u128 {
    d.alpha as u128 | (d.beta as u128) << n
}

fn occupied128(bits: u128) -> Vec<usize> {
    (0..128).filter(|&k| bits >> k & 1 == 1).collect()
}

fn parity_below128(bits: u128, p: usize) -> f64 {
    let mask = if p == 0 { 0 } else { (1u128 << p) - 1 };
    if (bits & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Apply annihilators then creators in the listed order to `bits`.
fn apply_ops(mut bits: u128, annihilate: &[usize], create: &[usize]) -> Option<(u128, f64)> {
    let mut sign = 1.0;
    for &q in annihilate {
        if bits >> q & 1 == 0 {
            return None;
        }
        sign *= parity_below128(bits, q);
        bits ^= 1 << q;
    }
    for &p in create {
        if bits >> p & 1 == 1 {
            return None;
        }
        sign *= parity_below128(bits, p);
        bits |= 1 << p;
    }
    Some((bits, sign))
}

fn slater_condon(ints: &SpinOrbitalIntegrals, bra: u128, ket: u128) -> f64 {
    let diff = bra ^ ket;
    match diff.count_ones() {
        0 => {
            let occ = occupied128(ket);
            let mut e = 0.0;
            for &i in &occ {
                e += ints.h(i, i);
                for &j in &occ {
                    e += 0.5 * (ints.g(i, i, j, j) - ints.g(i, j, j, i));
                }
            }
            e
        }
        2 => {
            let q = (ket & diff).trailing_zeros() as usize;
            let p = (bra & diff).trailing_zeros() as usize;
            let (_, sign) = apply_ops(ket, &[q], &[p]).expect("single excitation");
            let common = bra & ket;
            let mut v = ints.h(p, q);
            for k in occupied128(common) {
                v += ints.g(p, q, k, k) - ints.g(p, k, k, q);
            }
            sign * v
        }
        4 => {
            let holes = occupied128(ket & diff);
            let parts = occupied128(bra & diff);
            let (q, s) = (holes[0], holes[1]);
            let (p, r) = (parts[0], parts[1]);
            // ⟨bra| a†_p a†_r a_s a_q |ket⟩
            let (_, sign) = apply_ops(ket, &[q, s], &[r, p]).expect("double excitation");
            sign * (ints.g(p, q, r, s) - ints.g(p, s, r, q))
        }
        _ => 0.0,
    }
}

impl SlaterCondonAction {
    pub fn new(imp: &ImpurityHamiltonian, dets: &[Determinant]) -> Self {
        let n = imp.n_orb;
        let eri = imp.eri_imp.to_dense();
        let h1 = flat_h1(imp);
        let ints = SpinOrbitalIntegrals { n, h: &h1, eri: &eri };
        let index: HashMap<u128, usize> = dets.iter().enumerate().map(|(k, d)| (spin_orbital_bits(d, n), k)).collect();
        let rows = par::map_slice(dets, |d| {
            let ket = spin_orbital_bits(d, n);
            let occ = occupied128(ket);
            let virt: Vec<usize> = (0..2 * n).filter(|&k| ket >> k & 1 == 0).collect();
            let mut row = Vec::new();
            let mut push = |bra: u128| {
                if let Some(&j) = index.get(&bra) {
                    let v = slater_condon(&ints, bra, ket);
                    if v != 0.0 {
                        row.push((j as u32, v));
                    }
                }
            };
            push(ket);
            for &i in &occ {
                for &a in &virt {
                    push(ket ^ (1 << i) ^ (1 << a));
                }
            }
            for (x, &i) in occ.iter().enumerate() {
                for &j in &occ[x + 1..] {
                    for (y, &a) in virt.iter().enumerate() {
                        for &b in &virt[y + 1..] {
                            push(ket ^ (1 << i) ^ (1 << j) ^ (1 << a) ^ (1 << b));
                        }
                    }
                }
            }
            merge_row(row)
        });
        SlaterCondonAction { matrix: Csr::from_rows(rows) }
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }
}

impl LinearOperator for SlaterCondonAction {
    fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.matrix.row(i);
            *yi += c.iter().zip(v).map(|(&c, &v)| v * x[c as usize]).sum::<f64>();
        }
    }
}

/// `⟨D|H|D⟩` for one determinant via the one-spin string rules.
pub fn determinant_energy(imp: &ImpurityHamiltonian, d: &Determinant) -> f64 {
    let n = imp.n_orb;
    let eri = imp.eri_imp.to_dense();
    let h1 = flat_h1(imp);
    let ints = SpinOrbitalIntegrals { n, h: &h1, eri: &eri };
    let b = spin_orbital_bits(d, n);
    slater_condon(&ints, b, b)
}
