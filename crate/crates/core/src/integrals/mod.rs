//! Integral containers and their file formats.

mod bundle;
mod eri;
mod fcidump;

pub use bundle::{f17, Atom, IntegralBundle, BUNDLE_VERSION};
pub use eri::{EriTensor, ERI_DROP};
pub use fcidump::{fcidump_text, parse_fcidump, read_impurity_fcidump, write_impurity_fcidump};

use nalgebra::DMatrix;

use crate::error::{EmberError, Result};
use crate::linalg::max_abs;

pub fn read_bundle(path: impl AsRef<std::path::Path>) -> Result<IntegralBundle> {
    IntegralBundle::read(path)
}

/// Second-quantized Hamiltonian of one impurity (fragment + bath orbitals).
#[derive(Clone, Debug, PartialEq)]
pub struct ImpurityHamiltonian {
    pub n_orb: usize,
    pub n_elec_imp: usize,
    /// Effective one-body matrix, including any chemical-potential shift.
    pub h1: DMatrix<f64>,
    pub eri_imp: EriTensor,
    /// Additive constant kept for bookkeeping (core mean-field energy).
    pub e_const: f64,
    /// Impurity orbitals that are fragment orbitals.
    pub frag_indices: Vec<usize>,
}

impl ImpurityHamiltonian {
    pub fn validate(&self) -> Result<()> {
        if self.h1.shape() != (self.n_orb, self.n_orb) || self.eri_imp.n_orb() != self.n_orb {
            return Err(EmberError::Invalid("impurity dimensions disagree".into()));
        }
        let asym = max_abs(&(&self.h1 - self.h1.transpose()));
        if asym > 1e-12 {
            return Err(EmberError::Symmetry(format!("impurity h1 asymmetric by {asym:e}")));
        }
        if let Some(&f) = self.frag_indices.iter().find(|&&f| f >= self.n_orb) {
            return Err(EmberError::IndexOutOfRange(format!("fragment orbital {f} of {}", self.n_orb)));
        }
        if !self.n_elec_imp.is_multiple_of(2) || self.n_elec_imp > 2 * self.n_orb {
            return Err(EmberError::Invalid(format!(
                "impurity electron count {} invalid for {} orbitals",
                self.n_elec_imp, self.n_orb
            )));
        }
        Ok(())
    }

    pub fn n_alpha(&self) -> usize {
        self.n_elec_imp / 2
    }

    /// Same Hamiltonian expressed in a rotated orthonormal basis (`c` columns).
    pub fn rotated(&self, c: &DMatrix<f64>) -> ImpurityHamiltonian {
        let h1 = c.transpose() * &self.h1 * c;
        let h1 = (&h1 + h1.transpose()) * 0.5;
        let eri = EriTensor::from_dense_symmetrized(&self.eri_imp.to_dense().transform(c));
        ImpurityHamiltonian {
            n_orb: c.ncols(),
            n_elec_imp: self.n_elec_imp,
            h1,
            eri_imp: eri,
            e_const: self.e_const,
            frag_indices: self.frag_indices.clone(),
        }
    }

    /// Largest element-wise difference in h1, ERI, and the constant.
    pub fn max_abs_diff(&self, other: &ImpurityHamiltonian) -> f64 {
        max_abs(&(&self.h1 - &other.h1))
            .max(self.eri_imp.max_abs_diff(&other.eri_imp))
            .max((self.e_const - other.e_const).abs())
    }
}
