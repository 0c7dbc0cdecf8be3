//! Closed-shell restricted Hartree–Fock with DIIS.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EmberError, Result};
use crate::integrals::IntegralBundle;
use crate::linalg::{self, DenseEri};

const MAX_CONDITION: f64 = 1e10;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ScfOptions {
    /// Convergence threshold on the largest orthogonalized `FDS − SDF` element.
    pub tol: f64,
    pub max_iter: usize,
    pub diis_size: usize,
    /// DIIS extrapolation is used once the iteration count exceeds this.
    pub diis_start: usize,
    pub damping: f64,
    pub guess: Guess,
}

/// Starting Fock matrix. The core Hamiltonian alone lands NOCl in an
/// excited SCF solution; the Wolfsberg–Helmholz form does not.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Guess {
    Core,
    Gwh,
}

impl Default for ScfOptions {
    fn default() -> Self {
        ScfOptions { tol: 1e-10, max_iter: 200, diis_size: 8, diis_start: 2, damping: 0.5, guess: Guess::Gwh }
    }
}

#[derive(Clone, Debug)]
pub struct ScfResult {
    /// Total energy including nuclear repulsion.
    pub e_hf: f64,
    pub mo_coeff: DMatrix<f64>,
    pub mo_energy: DVector<f64>,
    pub mo_occ: Vec<f64>,
    pub dm_ao: DMatrix<f64>,
    pub fock: DMatrix<f64>,
    pub converged: bool,
    pub n_iter: usize,
    pub commutator_norm: f64,
}

impl ScfResult {
    pub fn n_occ(&self) -> usize {
        self.mo_occ.iter().filter(|&&o| o > 1.0).count()
    }
}

pub fn run_rhf(bundle: &IntegralBundle, opts: &ScfOptions) -> Result<ScfResult> {
    rhf(&bundle.overlap, &bundle.hcore, &bundle.eri.to_dense(), bundle.n_elec, bundle.e_nuc, opts)
}

pub fn fock_matrix(h: &DMatrix<f64>, eri: &DenseEri, dm: &DMatrix<f64>) -> DMatrix<f64> {
    let (j, k) = eri.coulomb_exchange(dm);
    h + j - k * 0.5
}

/// Electronic energy `½ Σ D (h + F)` of a closed-shell density.
pub fn electronic_energy(h: &DMatrix<f64>, f: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
    0.5 * dm.component_mul(&(h + f)).sum()
}

fn density_from(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    occ * occ.transpose() * 2.0
}

/// RHF in a (possibly non-orthogonal) basis with overlap `s`.
pub fn rhf(
    s: &DMatrix<f64>,
    h: &DMatrix<f64>,
    eri: &DenseEri,
    n_elec: usize,
    e_nuc: f64,
    opts: &ScfOptions,
) -> Result<ScfResult> {
    let n = h.nrows();
    if !n_elec.is_multiple_of(2) {
        return Err(EmberError::Invalid(format!("RHF needs an even electron count, got {n_elec}")));
    }
    let n_occ = n_elec / 2;
    if n_occ > n {
        return Err(EmberError::Invalid(format!("{n_elec} electrons do not fit in {n} orbitals")));
    }
    let (x, _, condition) = linalg::inv_sqrt_spd(s)?;
    if condition > MAX_CONDITION {
        return Err(EmberError::LinearDependence { condition });
    }

    let diagonalize = |f: &DMatrix<f64>| {
        let (e, cp) = linalg::eigh(&linalg::transform_one(f, &x));
        (e, &x * cp)
    };

    let guess = match opts.guess {
        Guess::Gwh => {
            let mut g = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] = if i == j { h[(i, i)] } else { 0.875 * s[(i, j)] * (h[(i, i)] + h[(j, j)]) };
                }
            }
            g
        }
        Guess::Core => h.clone(),
    };
    let (_, mut c) = diagonalize(&guess);
    let mut dm = density_from(&c, n_occ);
    let mut history: Vec<(DMatrix<f64>, DMatrix<f64>)> = Vec::new();
    let mut commutator = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let f = fock_matrix(h, eri, &dm);
        let err = linalg::transform_one(&(&f * &dm * s - s * &dm * &f), &x);
        commutator = linalg::max_abs(&err);
        if commutator < opts.tol {
            let (e, c_new) = diagonalize(&f);
            c = c_new;
            dm = density_from(&c, n_occ);
            let f = fock_matrix(h, eri, &dm);
            let e_hf = electronic_energy(h, &f, &dm) + e_nuc;
            let mo_occ = (0..n).map(|k| if k < n_occ { 2.0 } else { 0.0 }).collect();
            return Ok(ScfResult {
                e_hf,
                mo_coeff: c,
                mo_energy: e,
                mo_occ,
                dm_ao: dm,
                fock: f,
                converged: true,
                n_iter: iter,
                commutator_norm: commutator,
            });
        }

        history.push((f.clone(), err));
        if history.len() > opts.diis_size.max(1) {
            history.remove(0);
        }
        let f_next =
            if iter > opts.diis_start && history.len() >= 2 { diis_extrapolate(&history) } else { Some(f.clone()) };
        match f_next {
            Some(fx) => {
                let (_, c_new) = diagonalize(&fx);
                c = c_new;
                dm = density_from(&c, n_occ);
            }
            None => {
                log::debug!("DIIS system singular at iteration {iter}; damping density");
                let (_, c_new) = diagonalize(&f);
                c = c_new;
                dm = &dm * opts.damping + density_from(&c, n_occ) * (1.0 - opts.damping);
                history.clear();
            }
        }
    }
    Err(EmberError::NoConvergence { what: "RHF", iterations: opts.max_iter, residual: commutator })
}

fn diis_extrapolate(history: &[(DMatrix<f64>, DMatrix<f64>)]) -> Option<DMatrix<f64>> {
    let m = history.len();
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..=i {
            let v = history[i].1.dot(&history[j].1);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
        b[(i, m)] = -1.0;
        b[(m, i)] = -1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = -1.0;
    let coef = b.lu().solve(&rhs)?;
    if coef.iter().any(|c| !c.is_finite()) || coef.iter().take(m).any(|c| c.abs() > 1e8) {
        return None;
    }
    let mut f = DMatrix::zeros(history[0].0.nrows(), history[0].0.ncols());
    for (k, (fk, _)) in history.iter().enumerate() {
        f += fk * coef[k];
    }
    Some(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_orbital_closed_form() {
        let u = 0.65;
        let mut eri = DenseEri::zeros(1);
        eri.data[0] = u;
        let s = DMatrix::identity(1, 1);
        let h = DMatrix::from_element(1, 1, -1.0);
        let r = rhf(&s, &h, &eri, 2, 0.3, &ScfOptions::default()).unwrap();
        assert_eq!(r.e_hf, -2.0 + u + 0.3);
        assert!(r.converged);
    }

    #[test]
    fn odd_electrons_rejected() {
        let eri = DenseEri::zeros(2);
        let r = rhf(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2), &eri, 3, 0.0, &ScfOptions::default());
        assert!(matches!(r, Err(EmberError::Invalid(_))));
    }

    #[test]
    fn ill_conditioned_overlap_is_linear_dependence() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0 - 1e-12, 1.0 - 1e-12, 1.0]);
        let r = rhf(&s, &DMatrix::identity(2, 2), &DenseEri::zeros(2), 2, 0.0, &ScfOptions::default());
        assert!(matches!(r, Err(EmberError::LinearDependence { .. })));
    }

    #[test]
    fn iteration_cap_reports_commutator() {
        let mut eri = DenseEri::zeros(2);
        for v in eri.data.iter_mut() {
            *v = 0.3;
        }
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, -0.2, -0.2, -0.5]);
        let opts = ScfOptions { max_iter: 1, tol: 1e-300, ..Default::default() };
        match rhf(&DMatrix::identity(2, 2), &h, &eri, 2, 0.0, &opts) {
            Err(EmberError::NoConvergence { residual, .. }) => assert!(residual.is_finite()),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
