use crate::error::{EmberError, Result};
use crate::linalg::DenseEri;

/// Values with magnitude at or below this are treated as structural zeros.
pub const ERI_DROP: f64 = 1e-14;

#[inline(always)]
fn pair(p: usize, q: usize) -> usize {
    if p >= q {
        p * (p + 1) / 2 + q
    } else {
        q * (q + 1) / 2 + p
    }
}

/// Chemist-notation `(pq|rs)` integrals stored once per 8-fold symmetry class.
///
/// The storage slot is addressed by the canonical compound index of the
/// quadruple, so all eight equivalent orders resolve to the same value.
#[derive(Clone, Debug, PartialEq)]
pub struct EriTensor {
    n: usize,
    data: Vec<f64>,
}

impl EriTensor {
    pub fn zeros(n: usize) -> Self {
        let npair = n * (n + 1) / 2;
        EriTensor { n, data: vec![0.0; npair * (npair + 1) / 2] }
    }

    pub fn n_orb(&self) -> usize {
        self.n
    }

    #[inline(always)]
    fn slot(p: usize, q: usize, r: usize, s: usize) -> usize {
        pair(pair(p, q), pair(r, s))
    }

    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> Result<f64> {
        let n = self.n;
        if p >= n || q >= n || r >= n || s >= n {
            return Err(EmberError::IndexOutOfRange(format!("({p}{q}|{r}{s}) with {n} orbitals")));
        }
        Ok(self.data[Self::slot(p, q, r, s)])
    }

    /// Unchecked lookup for hot loops; panics on out-of-range indices.
    #[inline(always)]
    pub fn at(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[Self::slot(p, q, r, s)]
    }

    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let k = Self::slot(p, q, r, s);
        self.data[k] = v;
    }

    /// Canonical quadruples `p ≤ q`, `r ≤ s`, `(p,q) ≤ (r,s)` in file order.
    pub fn canonical_quadruples(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        (0..n).flat_map(move |p| {
            (p..n).flat_map(move |q| {
                (p..n).flat_map(move |r| {
                    let s0 = if r == p { q } else { r };
                    (s0..n).map(move |s| (p, q, r, s))
                })
            })
        })
    }

    /// Iterate canonical entries with `|value| > ERI_DROP`.
    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), f64)> + '_ {
        Self::canonical_quadruples(self.n).filter_map(move |(p, q, r, s)| {
            let v = self.at(p, q, r, s);
            (v.abs() > ERI_DROP).then_some(((p, q, r, s), v))
        })
    }

    pub fn to_dense(&self) -> DenseEri {
        let n = self.n;
        let mut d = DenseEri::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let i = d.idx(p, q, r, s);
                        d.data[i] = self.at(p, q, r, s);
                    }
                }
            }
        }
        d
    }

    /// Pack a dense array, verifying that it is 8-fold symmetric to `tol`.
    pub fn from_dense(d: &DenseEri, tol: f64) -> Result<Self> {
        let n = d.n;
        let mut t = EriTensor::zeros(n);
        for (p, q, r, s) in Self::canonical_quadruples(n) {
            let v = d.get(p, q, r, s);
            for (a, b, c, e) in
                [(q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)]
            {
                let w = d.get(a, b, c, e);
                if (w - v).abs() > tol {
                    return Err(EmberError::Symmetry(format!("({p}{q}|{r}{s}) = {v:e} but ({a}{b}|{c}{e}) = {w:e}")));
                }
            }
            t.set(p, q, r, s, v);
        }
        Ok(t)
    }

    /// Pack a dense array by averaging each symmetry class (no check).
    pub fn from_dense_symmetrized(d: &DenseEri) -> Self {
        let n = d.n;
        let mut t = EriTensor::zeros(n);
        for (p, q, r, s) in Self::canonical_quadruples(n) {
            let v = (d.get(p, q, r, s)
                + d.get(q, p, r, s)
                + d.get(p, q, s, r)
                + d.get(q, p, s, r)
                + d.get(r, s, p, q)
                + d.get(s, r, p, q)
                + d.get(r, s, q, p)
                + d.get(s, r, q, p))
                / 8.0;
            t.set(p, q, r, s, v);
        }
        t
    }

    pub fn max_abs_diff(&self, other: &EriTensor) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_count() {
        for n in 1..6 {
            let npair = n * (n + 1) / 2;
            assert_eq!(EriTensor::canonical_quadruples(n).count(), npair * (npair + 1) / 2);
        }
    }

    #[test]
    fn zero_tensor_reads_zero() {
        let t = EriTensor::zeros(3);
        assert_eq!(t.get(0, 2, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_is_error() {
        let t = EriTensor::zeros(2);
        assert!(matches!(t.get(0, 0, 0, 2), Err(EmberError::IndexOutOfRange(_))));
    }

    #[test]
    fn dense_symmetry_check_rejects_violation() {
        let mut d = DenseEri::zeros(2);
        let i = d.idx(0, 0, 1, 1);
        d.data[i] = 0.5;
        let i = d.idx(1, 1, 0, 0);
        d.data[i] = 0.5 + 1e-9;
        assert!(matches!(EriTensor::from_dense(&d, 1e-12), Err(EmberError::Symmetry(_))));
    }

    proptest! {
        #[test]
        fn eight_permutations_agree(seed in 0u64..10_000, p in 0usize..5, q in 0usize..5, r in 0usize..5, s in 0usize..5) {
            let mut t = EriTensor::zeros(5);
            for (k, (a, b, c, e)) in EriTensor::canonical_quadruples(5).enumerate() {
                t.set(a, b, c, e, ((k as u64 * 2654435761 + seed) % 1000) as f64 * 1e-3);
            }
            let v = t.get(p, q, r, s).unwrap();
            for w in [t.at(q, p, r, s), t.at(p, q, s, r), t.at(q, p, s, r), t.at(r, s, p, q),
                      t.at(s, r, p, q), t.at(r, s, q, p), t.at(s, r, q, p)] {
                prop_assert_eq!(v, w);
            }
        }
    }
}
