//! Unitary cluster Jastrow statevector seeded from doubles amplitudes.
//!
//! The amplitude matrix `T[(i,a),(j,b)] = t_ij^ab` is diagonalized. For each
//! kept eigenpair `(λ, v)`, `X_ai = v_(i,a)` defines the Hermitian one-body
//! operator `Ô = Σ (1+i) X_ai E_ai + h.c.`. Writing `Ô = Û_W (Σ e_p n_p) Û_W†`,
//! the layer `Û_W exp(−iλ/4 (Σ e_p n_p)²) Û_W†` reproduces `½ λ (Σ X E)²|HF⟩`
//! to first order, i.e. the leading doubles correction. `K = log W` and
//! `J_pq = −λ e_p e_q / 4` are the stored layer generators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EmberError, Result};
use crate::linalg::eigh;
use crate::meanfield::DoublesAmplitudes;
use crate::sampling::determinant::{binomial, occupied, Determinant};
use crate::sampling::givens::{apply_orbital_rotation, givens_decompose, RotationPlan};
use crate::sqd::subspace::SubspaceBasis;

type C = Complex64;

pub const MAX_STATEVECTOR_ORBITALS: usize = 14;
const UNITARITY_TOL: f64 = 1e-8;

/// Couplings allowed in the Jastrow matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JastrowMask {
    #[default]
    Dense,
    /// Same spin: `|p − q| ≤ 1`; opposite spin: `p = q` only.
    NearestNeighbor,
}

#[derive(Clone, Debug)]
pub struct LayerParams {
    /// Anti-Hermitian orbital-rotation generator.
    pub k: DMatrix<C>,
    /// Same-spin couplings (shared by αα and ββ).
    pub j_same: DMatrix<f64>,
    /// Opposite-spin couplings (shared by αβ and βα).
    pub j_opp: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct AnsatzParams {
    pub n_orb: usize,
    pub layers: Vec<LayerParams>,
}

#[derive(Clone, Debug)]
pub struct AnsatzState {
    pub basis: SubspaceBasis,
    pub amplitudes: Vec<C>,
    pub params: AnsatzParams,
}

impl AnsatzState {
    pub fn n_layers(&self) -> usize {
        self.params.layers.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn amplitude(&self, d: &Determinant) -> C {
        self.basis.position(d).map_or(C::new(0.0, 0.0), |k| self.amplitudes[k])
    }
}

/// Principal logarithm of a unitary: diagonalize it through the commuting
/// Hermitian pencil `(W+W†)/2 + c (W−W†)/2i`, then take eigenphases.
fn unitary_log(w: &DMatrix<C>) -> DMatrix<C> {
    let i = C::i();
    let wh = w.adjoint();
    let c = C::new(0.618_033_988_749_895, 0.0);
    let b = (w + &wh) * C::new(0.5, 0.0) + (w - &wh) * (c / (i * 2.0));
    let b = (&b + b.adjoint()) * C::new(0.5, 0.0);
    let eig = b.symmetric_eigen();
    let v = eig.eigenvectors;
    let n = w.nrows();
    let mut d = DMatrix::<C>::zeros(n, n);
    for k in 0..n {
        let vk = v.column(k);
        let z = (vk.adjoint() * w * vk)[(0, 0)];
        d[(k, k)] = i * z.arg();
    }
    &v * d * v.adjoint()
}

/// `e^K` for anti-Hermitian `K`, via the Hermitian matrix `−iK`.
pub fn expm_antihermitian(k: &DMatrix<C>) -> DMatrix<C> {
    let i = C::i();
    let h = k * (-i);
    let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| (i * w).exp()));
    &v * d * v.adjoint()
}

fn apply_mask(j: &DMatrix<f64>, mask: JastrowMask, same_spin: bool) -> DMatrix<f64> {
    match mask {
        JastrowMask::Dense => j.clone(),
        JastrowMask::NearestNeighbor => DMatrix::from_fn(j.nrows(), j.ncols(), |p, q| {
            let keep = if same_spin { p.abs_diff(q) <= 1 } else { p == q };
            if keep {
                j[(p, q)]
            } else {
                0.0
            }
        }),
    }
}

/// Spectral seeding of the layer generators from `t2` (occupied orbitals first).
pub fn seed_ansatz(t2: &DoublesAmplitudes, n_layers: usize, mask: JastrowMask) -> AnsatzParams {
    let (no, nv) = (t2.n_occ, t2.n_vir);
    let n = no + nv;
    let dim = no * nv;
    let mut t = DMatrix::zeros(dim, dim);
    for i in 0..no {
        for a in 0..nv {
            for j in 0..no {
                for b in 0..nv {
                    t[(i * nv + a, j * nv + b)] = t2.get(i, j, a, b);
                }
            }
        }
    }
    let (w, v) = eigh(&t);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| w[y].abs().total_cmp(&w[x].abs()).then(x.cmp(&y)));
    if n_layers > dim {
        log::warn!("{n_layers} layers requested but only {dim} amplitude eigenpairs exist; clamping");
    }
    let mut layers = Vec::new();
    for &mu in order.iter().take(n_layers.min(dim)) {
        let lambda = w[mu];
        if lambda == 0.0 {
            layers.push(LayerParams {
                k: DMatrix::zeros(n, n),
                j_same: DMatrix::zeros(n, n),
                j_opp: DMatrix::zeros(n, n),
            });
            continue;
        }
        let mut m = DMatrix::<C>::zeros(n, n);
        for i in 0..no {
            for a in 0..nv {
                let x = v[(i * nv + a, mu)];
                m[(no + a, i)] = C::new(x, x);
                m[(i, no + a)] = C::new(x, -x);
            }
        }
        let eig = m.symmetric_eigen();
        let wmat = eig.eigenvectors;
        let e = eig.eigenvalues;
        let j = DMatrix::from_fn(n, n, |p, q| -0.25 * lambda * e[p] * e[q]);
        layers.push(LayerParams {
            k: unitary_log(&wmat),
            j_same: apply_mask(&j, mask, true),
            j_opp: apply_mask(&j, mask, false),
        });
    }
    AnsatzParams { n_orb: n, layers }
}

fn check_unitary(u: &DMatrix<C>) -> Result<()> {
    let n = u.nrows();
    let dev = (u * u.adjoint() - DMatrix::<C>::identity(n, n)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if dev > UNITARITY_TOL {
        return Err(EmberError::Solver(format!("orbital rotation not unitary: ‖UU† − I‖ = {dev:e}")));
    }
    Ok(())
}

/// Statevector `Π_μ e^{K_μ} e^{iJ_μ} e^{−K_μ} |HF⟩` over the `(N_α, N_β)` sector.
pub fn prepare_state(params: &AnsatzParams, n_alpha: usize, n_beta: usize) -> Result<AnsatzState> {
    let n = params.n_orb;
    if n > MAX_STATEVECTOR_ORBITALS {
        return Err(EmberError::TooLarge {
            what: "statevector orbitals",
            requested: n as u128,
            limit: MAX_STATEVECTOR_ORBITALS as u128,
        });
    }
    if n_alpha != n_beta {
        return Err(EmberError::Invalid("closed-shell ansatz needs N_α = N_β".into()));
    }
    let dim = binomial(n, n_alpha) * binomial(n, n_beta);
    log::debug!("statevector dimension {dim}");
    let basis = SubspaceBasis::full(n, n_alpha, n_beta)?;
    let (na, nb) = (basis.alpha.len(), basis.beta.len());
    let mut psi = vec![C::new(0.0, 0.0); na * nb];
    let hf = Determinant::hartree_fock(n_alpha);
    psi[basis.position(&hf).expect("HF determinant in sector")] = C::new(1.0, 0.0);

    let plan_a = RotationPlan::new(&basis.alpha);
    let plan_b = RotationPlan::new(&basis.beta);
    let occ_a: Vec<Vec<usize>> = basis.alpha.strings.iter().map(|&s| occupied(s).collect()).collect();
    let occ_b: Vec<Vec<usize>> = basis.beta.strings.iter().map(|&s| occupied(s).collect()).collect();

    for layer in &params.layers {
        let u = expm_antihermitian(&layer.k);
        check_unitary(&u)?;
        let fwd = givens_decompose(&u);
        let back = givens_decompose(&u.adjoint());
        for (plan, on_alpha) in [(&plan_a, true), (&plan_b, false)] {
            apply_orbital_rotation(&mut psi, na, nb, plan, &back, on_alpha);
        }
        let pair = |o1: &[usize], o2: &[usize], j: &DMatrix<f64>| -> f64 {
            o1.iter().map(|&p| o2.iter().map(|&q| j[(p, q)]).sum::<f64>()).sum()
        };
        let same_a: Vec<f64> = occ_a.iter().map(|o| pair(o, o, &layer.j_same)).collect();
        let same_b: Vec<f64> = occ_b.iter().map(|o| pair(o, o, &layer.j_same)).collect();
        for ia in 0..na {
            for ib in 0..nb {
                let theta = same_a[ia] + same_b[ib] + 2.0 * pair(&occ_a[ia], &occ_b[ib], &layer.j_opp);
                psi[ia * nb + ib] *= C::from_polar(1.0, theta);
            }
        }
        for (plan, on_alpha) in [(&plan_a, true), (&plan_b, false)] {
            apply_orbital_rotation(&mut psi, na, nb, plan, &fwd, on_alpha);
        }
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 * (1 + params.layers.len()) as f64 {
        return Err(EmberError::Solver(format!("statevector norm drifted to {norm}")));
    }
    Ok(AnsatzState { basis, amplitudes: psi, params: params.clone() })
}
