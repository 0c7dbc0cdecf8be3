//! Impurity solvers: exact diagonalization and the sampled-subspace solver.

use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{EmberError, Result};
use crate::integrals::ImpurityHamiltonian;
use crate::linalg::DenseEri;
use crate::meanfield::{mp2_from_mo, read_amplitude_file, rhf, DoublesAmplitudes, ScfOptions};
use crate::sampling::{
    derive_seed, prepare_state, read_bitstring_file, seed_ansatz, ConfigurationSampler, DistributionSampler,
    FixedSampler, JastrowMask,
};
use crate::sqd::{compute_rdms, fci_solve, sqd_solve_samples, DiagnosticRow, Rdm2, Rdms, SqdOptions};

#[derive(Clone, Debug)]
pub struct ImpuritySolution {
    /// Electronic energy of the impurity ground state (with the μ shift).
    pub energy: f64,
    /// Site-basis density matrices.
    pub rdms: Rdms,
    /// Size of the diagonalized determinant space.
    pub subspace_dim: usize,
    pub diagnostics: Vec<DiagnosticRow>,
}

pub trait ImpuritySolver: Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, imp: &ImpurityHamiltonian, fragment: usize) -> Result<ImpuritySolution>;
}

pub struct FciSolver {
    pub tol: f64,
}

impl Default for FciSolver {
    fn default() -> Self {
        FciSolver { tol: 1e-9 }
    }
}

impl ImpuritySolver for FciSolver {
    fn name(&self) -> &'static str {
        "fci"
    }

    fn solve(&self, imp: &ImpurityHamiltonian, _fragment: usize) -> Result<ImpuritySolution> {
        let ci = fci_solve(imp, self.tol)?;
        Ok(ImpuritySolution {
            energy: ci.energy,
            rdms: compute_rdms(&ci.basis, &ci.coeffs),
            subspace_dim: ci.basis.len(),
            diagnostics: Vec::new(),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerSource {
    #[default]
    Ansatz,
    ExactGroundState,
    File,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerOptions {
    pub shots: u64,
    pub noise_p: f64,
    pub seed: u64,
    pub layers: usize,
    pub source: SamplerSource,
    pub jastrow_mask: JastrowMask,
    /// Shot file for `source = "file"`; `{frag}` expands to the fragment index.
    pub file: Option<String>,
    /// Doubles-amplitude override; `{frag}` expands to the fragment index.
    pub amplitudes: Option<String>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            shots: 10_000,
            noise_p: 0.02,
            seed: 0,
            layers: 1,
            source: SamplerSource::Ansatz,
            jastrow_mask: JastrowMask::Dense,
            file: None,
            amplitudes: None,
        }
    }
}

pub fn expand_template(template: &str, fragment: usize) -> PathBuf {
    PathBuf::from(template.replace("{frag}", &fragment.to_string()))
}

pub struct SqdSolver {
    pub sampler: SamplerOptions,
    pub sqd: SqdOptions,
}

/// Impurity in its own canonical Hartree–Fock orbitals: rotated Hamiltonian,
/// the site→MO coefficients, orbital energies.
fn impurity_orbitals(
    imp: &ImpurityHamiltonian,
) -> Result<(ImpurityHamiltonian, DMatrix<f64>, DenseEri, nalgebra::DVector<f64>)> {
    let n = imp.n_orb;
    let scf =
        rhf(&DMatrix::identity(n, n), &imp.h1, &imp.eri_imp.to_dense(), imp.n_elec_imp, 0.0, &ScfOptions::default())?;
    let c = scf.mo_coeff;
    let mo = imp.rotated(&c);
    let eri_mo = mo.eri_imp.to_dense();
    Ok((mo, c, eri_mo, scf.mo_energy))
}

fn back_transform(rdms: &Rdms, c: &DMatrix<f64>) -> Rdms {
    let one = c * &rdms.one * c.transpose();
    let dense = DenseEri { n: rdms.two.n, data: rdms.two.data.clone() };
    let two = dense.transform(&c.transpose());
    Rdms { one: (&one + one.transpose()) * 0.5, two: Rdm2 { n: two.n, data: two.data } }
}

impl SqdSolver {
    fn amplitudes(
        &self,
        eri_mo: &DenseEri,
        eps: &nalgebra::DVector<f64>,
        n_occ: usize,
        fragment: usize,
    ) -> Result<DoublesAmplitudes> {
        match &self.sampler.amplitudes {
            Some(t) => read_amplitude_file(expand_template(t, fragment), n_occ, eri_mo.n - n_occ),
            None => mp2_from_mo(eri_mo, eps, n_occ),
        }
    }

    fn sampler_for(
        &self,
        mo: &ImpurityHamiltonian,
        eri_mo: &DenseEri,
        eps: &nalgebra::DVector<f64>,
        fragment: usize,
    ) -> Result<Box<dyn ConfigurationSampler>> {
        let k = mo.n_alpha();
        Ok(match self.sampler.source {
            SamplerSource::Ansatz => {
                let t2 = self.amplitudes(eri_mo, eps, k, fragment)?;
                let params = seed_ansatz(&t2, self.sampler.layers, self.sampler.jastrow_mask);
                let state = prepare_state(&params, k, k)?;
                let probs = state.probabilities();
                Box::new(DistributionSampler::new(state.basis, &probs, self.sampler.noise_p, false)?)
            }
            SamplerSource::ExactGroundState => {
                let ci = fci_solve(mo, self.sqd.davidson_tol)?;
                let probs: Vec<f64> = ci.coeffs.iter().map(|c| c * c).collect();
                Box::new(DistributionSampler::new(ci.basis, &probs, self.sampler.noise_p, true)?)
            }
            SamplerSource::File => {
                let t = self
                    .sampler
                    .file
                    .as_ref()
                    .ok_or_else(|| EmberError::Invalid("sampler.source = file needs sampler.file".into()))?;
                let set = read_bitstring_file(expand_template(t, fragment), mo.n_orb)?;
                Box::new(FixedSampler { n_orb: mo.n_orb, set })
            }
        })
    }
}

impl ImpuritySolver for SqdSolver {
    fn name(&self) -> &'static str {
        "sqd"
    }

    fn solve(&self, imp: &ImpurityHamiltonian, fragment: usize) -> Result<ImpuritySolution> {
        imp.validate()?;
        let (mo, c, eri_mo, eps) = impurity_orbitals(imp)?;
        let sampler = self.sampler_for(&mo, &eri_mo, &eps, fragment)?;
        let opts = SqdOptions { seed: derive_seed(self.sqd.seed, fragment as u64), ..self.sqd.clone() };
        // sample with a per-fragment stream, then run recovery on the fixed set
        let samples = sampler.sample(self.sampler.shots, derive_seed(self.sampler.seed, fragment as u64))?;
        let res = sqd_solve_samples(&mo, &samples, &opts)?;
        let rdms_mo = compute_rdms(&res.best.basis, &res.best.coeffs);
        Ok(ImpuritySolution {
            energy: res.best.energy,
            rdms: back_transform(&rdms_mo, &c),
            subspace_dim: res.best.basis.len(),
            diagnostics: res.diagnostics,
        })
    }
}
