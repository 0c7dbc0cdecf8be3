//! Bath orbitals from the environment block of the mean-field density.

use nalgebra::DMatrix;

use crate::error::{EmberError, Result};
use crate::linalg::eigh;

pub const DEFAULT_EPS_OCC: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct BathDecomposition {
    pub fragment: Vec<usize>,
    /// Orbitals outside the fragment, ascending.
    pub environment: Vec<usize>,
    /// Columns in the full orbital space (rows outside the environment are zero).
    pub bath_orbitals: DMatrix<f64>,
    pub core_orbitals: DMatrix<f64>,
    pub virtual_orbitals: DMatrix<f64>,
    /// Every environment-block eigenvalue, ascending.
    pub occupations: Vec<f64>,
    pub bath_occupations: Vec<f64>,
    /// Eigenvalues strictly inside `(eps_occ, 2 − eps_occ)` before the rank cap.
    pub raw_bath_count: usize,
}

impl BathDecomposition {
    pub fn n_bath(&self) -> usize {
        self.bath_orbitals.ncols()
    }

    pub fn n_core(&self) -> usize {
        self.core_orbitals.ncols()
    }

    /// Fragment = whole system.
    pub fn is_trivial(&self) -> bool {
        self.environment.is_empty()
    }
}

fn embed(n: usize, env: &[usize], v: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        for (r, &e) in env.iter().enumerate() {
            out[(e, c)] = v[(r, k)];
        }
    }
    out
}

pub fn build_bath(dm: &DMatrix<f64>, fragment: &[usize], eps_occ: f64) -> Result<BathDecomposition> {
    let n = dm.nrows();
    if fragment.iter().any(|&p| p >= n) {
        return Err(EmberError::IndexOutOfRange(format!("fragment orbital beyond {n}")));
    }
    let environment: Vec<usize> = (0..n).filter(|p| !fragment.contains(p)).collect();
    let ne = environment.len();
    let block = DMatrix::from_fn(ne, ne, |i, j| dm[(environment[i], environment[j])]);
    let (w, v) = eigh(&block);
    let occupations: Vec<f64> = w.iter().copied().collect();
    if let Some(x) = occupations.iter().find(|&&x| !(-1e-9..=2.0 + 1e-9).contains(&x)) {
        return Err(EmberError::EmbeddingInconsistency { trace: *x });
    }

    let mut bath: Vec<usize> = (0..ne).filter(|&k| w[k] > eps_occ && w[k] < 2.0 - eps_occ).collect();
    let raw_bath_count = bath.len();
    if bath.len() > fragment.len() {
        // numerically fractional eigenvalues beyond the rank bound are noise:
        // keep the most strongly fractional ones
        let frac = |k: usize| w[k].min(2.0 - w[k]);
        bath.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
        bath.truncate(fragment.len());
        bath.sort_unstable();
        log::debug!("bath rank capped from {raw_bath_count} to {}", fragment.len());
    }
    let core: Vec<usize> = (0..ne).filter(|&k| !bath.contains(&k) && w[k] >= 1.0).collect();
    let virt: Vec<usize> = (0..ne).filter(|&k| !bath.contains(&k) && w[k] < 1.0).collect();
    Ok(BathDecomposition {
        fragment: fragment.to_vec(),
        bath_orbitals: embed(n, &environment, &v, &bath),
        core_orbitals: embed(n, &environment, &v, &core),
        virtual_orbitals: embed(n, &environment, &v, &virt),
        bath_occupations: bath.iter().map(|&k| w[k]).collect(),
        occupations,
        raw_bath_count,
        environment,
    })
}
