//! Impurity Hamiltonians: fragment + bath orbitals dressed by the core field.

use nalgebra::DMatrix;

use crate::dmet::bath::BathDecomposition;
use crate::error::{EmberError, Result};
use crate::integrals::{EriTensor, ImpurityHamiltonian};
use crate::linalg;
use crate::meanfield::LocalizedSystem;

/// One impurity at zero chemical potential plus what the energy formula needs.
#[derive(Clone, Debug)]
pub struct ImpurityModel {
    pub label: String,
    /// Columns: fragment orbitals (unit vectors) then bath orbitals.
    pub basis: DMatrix<f64>,
    /// Unshifted embedding Hamiltonian.
    pub base: ImpurityHamiltonian,
    /// Bare one-body integrals projected onto the impurity.
    pub hcore_projected: DMatrix<f64>,
    /// Impurity electron count before rounding.
    pub trace: f64,
}

impl ImpurityModel {
    /// The Hamiltonian handed to solvers: `h1[p][p] −= μ` on fragment orbitals.
    pub fn shifted(&self, mu: f64) -> ImpurityHamiltonian {
        let mut h = self.base.clone();
        for &p in &h.frag_indices {
            h.h1[(p, p)] -= mu;
        }
        h
    }

    pub fn n_frag(&self) -> usize {
        self.base.frag_indices.len()
    }
}

pub fn build_embedding_hamiltonian(
    sys: &LocalizedSystem,
    bath: &BathDecomposition,
    label: &str,
    mu: f64,
) -> Result<(ImpurityModel, ImpurityHamiltonian)> {
    let model = build_impurity_model(sys, bath, label)?;
    let h = model.shifted(mu);
    Ok((model, h))
}

pub fn build_impurity_model(sys: &LocalizedSystem, bath: &BathDecomposition, label: &str) -> Result<ImpurityModel> {
    let n = sys.n_orb;
    let nf = bath.fragment.len();
    let nb = bath.n_bath();
    let mut basis = DMatrix::zeros(n, nf + nb);
    for (c, &p) in bath.fragment.iter().enumerate() {
        basis[(p, c)] = 1.0;
    }
    for c in 0..nb {
        basis.set_column(nf + c, &bath.bath_orbitals.column(c));
    }

    let core = &bath.core_orbitals;
    let d_core = core * core.transpose() * 2.0;
    let (j, k) = sys.eri.coulomb_exchange(&d_core);
    let veff = j - k * 0.5;
    let e_core = (d_core.component_mul(&(&sys.hcore * 2.0 + &veff))).sum() * 0.5;

    let hcore_projected = linalg::transform_one(&sys.hcore, &basis);
    let h1 = linalg::transform_one(&(&sys.hcore + &veff), &basis);
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let eri = sys.eri.transform(&basis);

    let trace = linalg::transform_one(&sys.dm, &basis).trace();
    let nearest = (trace / 2.0).round() * 2.0;
    if (trace - nearest).abs() > 1e-6 {
        return Err(EmberError::EmbeddingInconsistency { trace });
    }
    let base = ImpurityHamiltonian {
        n_orb: nf + nb,
        n_elec_imp: nearest as usize,
        h1: sym(h1),
        eri_imp: EriTensor::from_dense_symmetrized(&eri),
        e_const: e_core,
        frag_indices: (0..nf).collect(),
    };
    base.validate()?;
    Ok(ImpurityModel { label: label.to_string(), basis, base, hcore_projected: sym(hcore_projected), trace })
}
