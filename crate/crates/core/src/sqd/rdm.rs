//! Spin-summed reduced density matrices.
//!
//! `D_pq = Σ_σ ⟨a†_pσ a_qσ⟩` and `P_pqrs = Σ_στ ⟨a†_pσ a†_rτ a_sτ a_qσ⟩`, so that
//! `E = Σ h_pq D_pq + ½ Σ (pq|rs) P_pqrs`.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::linalg::DenseEri;
use crate::par;
use crate::sampling::determinant::{excite2, occupied, Determinant};
use crate::sqd::strings::{SingleTable, StringSpace};
use crate::sqd::subspace::SubspaceBasis;

/// α rows per work unit; fixed so the reduction order never depends on workers.
const ROWS_PER_CHUNK: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Rdm2 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Rdm2 {
    pub fn zeros(n: usize) -> Self {
        Rdm2 { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[((p * self.n + q) * self.n + r) * self.n + s]
    }
}

#[derive(Clone, Debug)]
pub struct Rdms {
    pub one: DMatrix<f64>,
    pub two: Rdm2,
}

impl Rdms {
    /// `Σ h D + ½ Σ (pq|rs) P` (electronic energy of the state).
    pub fn energy(&self, h1: &DMatrix<f64>, eri: &DenseEri) -> f64 {
        let e1 = self.one.component_mul(h1).sum();
        let e2: f64 = self.two.data.iter().zip(&eri.data).map(|(p, g)| p * g).sum();
        e1 + 0.5 * e2
    }

    pub fn n_elec(&self) -> f64 {
        self.one.trace()
    }
}

fn same_spin_densities(
    space: &StringSpace,
    table: &SingleTable,
    rho: &DMatrix<f64>,
    d1: &mut DMatrix<f64>,
    d2: &mut [f64],
) {
    let n = space.n_orb;
    for i in 0..space.len() {
        for e in table.row(i) {
            let (p, q) = (e.pq as usize / n, e.pq as usize % n);
            d1[(p, q)] += e.sign * rho[(i, e.j as usize)];
        }
    }
    let n3 = n * n * n;
    for (j, &sj) in space.strings.iter().enumerate() {
        let occ: Vec<usize> = occupied(sj).collect();
        for &q in &occ {
            for &s in &occ {
                if s == q {
                    continue;
                }
                for p in 0..n {
                    for r in 0..n {
                        if r == p {
                            continue;
                        }
                        if let Some((si, sign)) = excite2(sj, p, q, r, s) {
                            if let Some(i) = space.position(si) {
                                d2[p * n3 + q * n * n + r * n + s] += sign * rho[(i, j)];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// RDMs of `coeffs` over a product basis (α-major layout).
pub fn compute_rdms(basis: &SubspaceBasis, coeffs: &[f64]) -> Rdms {
    let n = basis.n_orb;
    let (na, nb) = (basis.alpha.len(), basis.beta.len());
    assert_eq!(coeffs.len(), na * nb, "coefficient vector does not match the basis");
    let c = DMatrix::from_row_slice(na, nb, coeffs);
    let rho_a = &c * c.transpose();
    let rho_b = c.transpose() * &c;
    let ta = SingleTable::new(&basis.alpha);
    let tb = SingleTable::new(&basis.beta);

    let mut one = DMatrix::zeros(n, n);
    let mut two = Rdm2::zeros(n);
    same_spin_densities(&basis.alpha, &ta, &rho_a, &mut one, &mut two.data);
    same_spin_densities(&basis.beta, &tb, &rho_b, &mut one, &mut two.data);

    // opposite spin: ⟨E^α_pq E^β_rs⟩
    let n2 = n * n;
    let chunks = na.div_ceil(ROWS_PER_CHUNK);
    let partial = par::map_range(chunks, |k| {
        let mut acc = vec![0.0; n2 * n2];
        for ia in k * ROWS_PER_CHUNK..((k + 1) * ROWS_PER_CHUNK).min(na) {
            for ea in ta.row(ia) {
                let ja = ea.j as usize;
                let base = ea.pq as usize * n2;
                for ib in 0..nb {
                    let ci = coeffs[ia * nb + ib] * ea.sign;
                    if ci == 0.0 {
                        continue;
                    }
                    for eb in tb.row(ib) {
                        acc[base + eb.pq as usize] += ci * eb.sign * coeffs[ja * nb + eb.j as usize];
                    }
                }
            }
        }
        acc
    });
    let mut ab = vec![0.0; n2 * n2];
    for part in partial {
        for (x, y) in ab.iter_mut().zip(part) {
            *x += y;
        }
    }
    for pq in 0..n2 {
        for rs in 0..n2 {
            two.data[pq * n2 + rs] += ab[pq * n2 + rs] + ab[rs * n2 + pq];
        }
    }
    Rdms { one, two }
}

/// Reference path over an arbitrary determinant list: applies every
/// spin-orbital operator string explicitly. O(N·(2n)⁴); small systems only.
pub fn rdms_from_dets(n: usize, dets: &[Determinant], coeffs: &[f64]) -> Rdms {
    let bits = |d: &Determinant| d.alpha as u128 | (d.beta as u128) << n;
    let index: HashMap<u128, usize> = dets.iter().enumerate().map(|(k, d)| (bits(d), k)).collect();
    let m = 2 * n;
    let parity = |b: u128, p: usize| if (b & ((1u128 << p) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    let ann = |b: u128, p: usize| (b >> p & 1 == 1).then(|| (b ^ (1 << p), parity(b, p)));
    let cre = |b: u128, p: usize| (b >> p & 1 == 0).then(|| (b | (1 << p), parity(b, p)));
    let mut one = DMatrix::zeros(n, n);
    let mut two = Rdm2::zeros(n);
    for (j, d) in dets.iter().enumerate() {
        let cj = coeffs[j];
        if cj == 0.0 {
            continue;
        }
        let b = bits(d);
        for p in 0..m {
            for q in 0..m {
                if p / n != q / n {
                    continue;
                }
                if let Some((x, s1)) = ann(b, q) {
                    if let Some((x, s2)) = cre(x, p) {
                        if let Some(&i) = index.get(&x) {
                            one[(p % n, q % n)] += coeffs[i] * s1 * s2 * cj;
                        }
                    }
                }
                for r in 0..m {
                    for s in 0..m {
                        if r / n != s / n {
                            continue;
                        }
                        let step = ann(b, q)
                            .and_then(|(x, a)| ann(x, s).map(|(x, b2)| (x, a * b2)))
                            .and_then(|(x, a)| cre(x, r).map(|(x, b2)| (x, a * b2)))
                            .and_then(|(x, a)| cre(x, p).map(|(x, b2)| (x, a * b2)));
                        if let Some((x, sign)) = step {
                            if let Some(&i) = index.get(&x) {
                                let k = (((p % n) * n + q % n) * n + r % n) * n + s % n;
                                two.data[k] += coeffs[i] * sign * cj;
                            }
                        }
                    }
                }
            }
        }
    }
    Rdms { one, two }
}
