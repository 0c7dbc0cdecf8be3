//! Dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{EmberError, Result};

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        // fix the arbitrary sign so results are reproducible: largest component positive
        let (imax, _) =
            col.iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, &v)| if v.abs() > acc.1 + 1e-12 { (i, v.abs()) } else { acc });
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Inverse square root of a symmetric positive definite matrix together with
/// its smallest eigenvalue and condition number.
pub fn inv_sqrt_spd(s: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64, f64)> {
    let (w, v) = eigh(s);
    let min = w[0];
    let max = w[w.len() - 1];
    if min <= 0.0 {
        return Err(EmberError::NotPositiveDefinite { min_eigenvalue: min });
    }
    let d = DMatrix::from_diagonal(&w.map(|x| 1.0 / x.sqrt()));
    let x = &v * d * v.transpose();
    let x = (&x + x.transpose()) * 0.5;
    Ok((x, min, max / min))
}

/// `cᵀ · h · c`.
pub fn transform_one(h: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    c.transpose() * h * c
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Two-electron integrals as a full `n⁴` array, `(pq|rs)` at `((p·n+q)·n+r)·n+s`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseEri {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseEri {
    pub fn zeros(n: usize) -> Self {
        DenseEri { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline(always)]
    pub fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline(always)]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    /// Basis change `(pq|rs) ← Σ c_ip c_jq c_kr c_ls (ij|kl)` for an `n×m`
    /// coefficient matrix; four quarter transformations, O(n⁴m).
    pub fn transform(&self, c: &DMatrix<f64>) -> DenseEri {
        let n = self.n;
        assert_eq!(c.nrows(), n, "coefficient rows must match basis size");
        let m = c.ncols();
        // (ij|kl) -> (ij|ks) -> ... each pass contracts the last index and
        // rotates it to the front, so four passes restore the index order.
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for _ in 0..4 {
            let [a, b, d, e] = dims;
            let mut next = vec![0.0; m * a * b * d];
            let lead = a * b * d;
            for x in 0..lead {
                let src = &cur[x * e..(x + 1) * e];
                for t in 0..m {
                    let col = c.column(t);
                    let mut acc = 0.0;
                    for (k, v) in src.iter().enumerate() {
                        acc += v * col[k];
                    }
                    next[t * lead + x] = acc;
                }
            }
            cur = next;
            dims = [m, a, b, d];
        }
        DenseEri { n: m, data: cur }
    }

    /// Coulomb `J[D]_pq = Σ (pq|rs) D_rs` and exchange `K[D]_pq = Σ (pr|qs) D_rs`.
    pub fn coulomb_exchange(&self, d: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut j = DMatrix::zeros(n, n);
        let mut k = DMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                let mut jj = 0.0;
                let mut kk = 0.0;
                for r in 0..n {
                    for s in 0..n {
                        let drs = d[(r, s)];
                        jj += self.get(p, q, r, s) * drs;
                        kk += self.get(p, r, q, s) * drs;
                    }
                }
                j[(p, q)] = jj;
                k[(p, q)] = kk;
            }
        }
        (j, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, -1.0]);
        let (w, v) = eigh(&m);
        assert!(w[0] <= w[1] && w[1] <= w[2]);
        let back = &v * DMatrix::from_diagonal(&w) * v.transpose();
        assert!(max_abs(&(back - m)) < 1e-12);
    }

    #[test]
    fn inv_sqrt_of_identity() {
        let (x, min, cond) = inv_sqrt_spd(&DMatrix::identity(4, 4)).unwrap();
        assert!(max_abs(&(x - DMatrix::identity(4, 4))) < 1e-14);
        assert_eq!(min, 1.0);
        assert!((cond - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(inv_sqrt_spd(&s), Err(EmberError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn four_index_transform_matches_naive() {
        let n = 3;
        let mut eri = DenseEri::zeros(n);
        for (i, v) in eri.data.iter_mut().enumerate() {
            *v = ((i * 37 % 11) as f64) * 0.1 - 0.4;
        }
        let c = DMatrix::from_fn(n, 2, |i, j| 0.3 * i as f64 - 0.2 * j as f64 + 0.5);
        let t = eri.transform(&c);
        for p in 0..2 {
            for q in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        let mut acc = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                for k in 0..n {
                                    for l in 0..n {
                                        acc += c[(i, p)] * c[(j, q)] * c[(k, r)] * c[(l, s)] * eri.get(i, j, k, l);
                                    }
                                }
                            }
                        }
                        assert!((acc - t.get(p, q, r, s)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
