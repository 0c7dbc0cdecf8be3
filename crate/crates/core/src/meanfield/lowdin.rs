//! Symmetric (Löwdin) orthogonalization and the per-atom fragmentation map.

use nalgebra::DMatrix;

use crate::error::{EmberError, Result};
use crate::integrals::IntegralBundle;
use crate::linalg::{self, DenseEri};
use crate::meanfield::ScfResult;

#[derive(Clone, Debug)]
pub struct FragmentationPlan {
    /// Orbital index sets in the orthogonal basis, one per fragment.
    pub fragments: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    /// `S^{-1/2}`.
    pub lowdin_transform: DMatrix<f64>,
}

/// Whole-molecule quantities expressed in the orthogonal localized basis.
#[derive(Clone, Debug)]
pub struct LocalizedSystem {
    pub n_orb: usize,
    pub n_elec: usize,
    pub e_nuc: f64,
    pub hcore: DMatrix<f64>,
    pub eri: DenseEri,
    pub dm: DMatrix<f64>,
}

impl FragmentationPlan {
    /// Fragment orbital lists supplied directly (must partition `0..n`).
    pub fn with_fragments(
        lowdin_transform: DMatrix<f64>,
        fragments: Vec<Vec<usize>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let n = lowdin_transform.ncols();
        let mut seen = vec![false; n];
        for f in &fragments {
            if f.is_empty() {
                return Err(EmberError::Invalid("empty fragment".into()));
            }
            for &p in f {
                if p >= n {
                    return Err(EmberError::IndexOutOfRange(format!("fragment orbital {p} of {n}")));
                }
                if seen[p] {
                    return Err(EmberError::Invalid(format!("orbital {p} assigned to two fragments")));
                }
                seen[p] = true;
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(EmberError::Invalid(format!("orbital {p} belongs to no fragment")));
        }
        if labels.len() != fragments.len() {
            return Err(EmberError::Invalid("one label per fragment required".into()));
        }
        Ok(FragmentationPlan { fragments, labels, lowdin_transform })
    }

    /// Labels like `[H]`; repeated elements get a running suffix (`[H2]`).
    fn atom_labels(bundle: &IntegralBundle) -> Vec<String> {
        let mut seen = std::collections::HashMap::new();
        bundle
            .atoms
            .iter()
            .map(|atom| {
                let total = bundle.atoms.iter().filter(|a| a.symbol == atom.symbol).count();
                let k = seen.entry(atom.symbol.as_str()).or_insert(0);
                *k += 1;
                if total == 1 {
                    format!("[{}]", atom.symbol)
                } else {
                    format!("[{}{}]", atom.symbol, k)
                }
            })
            .collect()
    }
}

/// Löwdin orbital `k` is the orthogonalized image of AO `k`, so the AO→atom
/// map carries over unchanged.
pub fn lowdin_localize(bundle: &IntegralBundle, scf: &ScfResult) -> Result<(FragmentationPlan, LocalizedSystem)> {
    let (x, _, _) = linalg::inv_sqrt_spd(&bundle.overlap)?;
    let plan = FragmentationPlan {
        fragments: bundle.aos_by_atom(),
        labels: FragmentationPlan::atom_labels(bundle),
        lowdin_transform: x.clone(),
    };
    let sys = localize_with(bundle, scf, &x);
    Ok((plan, sys))
}

pub fn localize_with(bundle: &IntegralBundle, scf: &ScfResult, x: &DMatrix<f64>) -> LocalizedSystem {
    // D_lo = S^{1/2} D S^{1/2} = Xᵀ S D S X for X = S^{-1/2}
    let sx = &bundle.overlap * x;
    let dm = sx.transpose() * &scf.dm_ao * &sx;
    let dm = (&dm + dm.transpose()) * 0.5;
    let hcore = linalg::transform_one(&bundle.hcore, x);
    let hcore = (&hcore + hcore.transpose()) * 0.5;
    LocalizedSystem {
        n_orb: bundle.n_ao,
        n_elec: bundle.n_elec,
        e_nuc: bundle.e_nuc,
        hcore,
        eri: bundle.eri.to_dense().transform(x),
        dm,
    }
}
