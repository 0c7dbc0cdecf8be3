//! The sampled-subspace solver loop and the exact-diagonalization reference.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EmberError, Result};
use crate::integrals::ImpurityHamiltonian;
use crate::sampling::determinant::{binomial, occupied, Determinant};
use crate::sampling::{derive_seed, ConfigurationSampler, SampleSet};
use crate::sqd::davidson::{davidson_lowest, DavidsonOptions};
use crate::sqd::hamiltonian::ProductSpaceAction;
use crate::sqd::recovery::{recover_configurations, OccupancyProfile};
use crate::sqd::subspace::{expand_subspace, SubspaceBasis};

/// Exact diagonalization refuses sectors larger than this.
pub const FCI_MAX_DETERMINANTS: u128 = 10_000_000;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SqdOptions {
    pub recovery_iters: usize,
    pub batches: usize,
    /// Cap on both configurations per batch and `|P|²`.
    pub batch_cap: usize,
    pub davidson_tol: f64,
    pub seed: u64,
}

impl Default for SqdOptions {
    fn default() -> Self {
        SqdOptions { recovery_iters: 5, batches: 3, batch_cap: 100_000, davidson_tol: 1e-9, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DiagnosticRow {
    pub iteration: usize,
    pub batch: usize,
    pub n_unique: usize,
    pub n_proj: usize,
    pub energy: f64,
    pub best: f64,
}

#[derive(Clone, Debug)]
pub struct CiVector {
    pub basis: SubspaceBasis,
    pub coeffs: Vec<f64>,
    /// Electronic energy (no constant shifts).
    pub energy: f64,
}

impl CiVector {
    pub fn profile(&self) -> OccupancyProfile {
        let n = self.basis.n_orb;
        let nb = self.basis.beta.len();
        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        for (ia, &sa) in self.basis.alpha.strings.iter().enumerate() {
            let w: f64 = self.coeffs[ia * nb..(ia + 1) * nb].iter().map(|c| c * c).sum();
            for p in occupied(sa) {
                alpha[p] += w;
            }
        }
        for (ib, &sb) in self.basis.beta.strings.iter().enumerate() {
            let w: f64 = (0..self.basis.alpha.len()).map(|ia| self.coeffs[ia * nb + ib].powi(2)).sum();
            for p in occupied(sb) {
                beta[p] += w;
            }
        }
        OccupancyProfile { alpha, beta }
    }
}

#[derive(Clone, Debug)]
pub struct SqdResult {
    pub best: CiVector,
    pub profile: OccupancyProfile,
    pub diagnostics: Vec<DiagnosticRow>,
}

fn davidson_opts(tol: f64) -> DavidsonOptions {
    DavidsonOptions { tol, ..Default::default() }
}

pub fn diagonalize(imp: &ImpurityHamiltonian, basis: SubspaceBasis, tol: f64) -> Result<CiVector> {
    let action = ProductSpaceAction::new(imp, &basis);
    let eig = davidson_lowest(&action, &davidson_opts(tol))?;
    Ok(CiVector { basis, coeffs: eig.vector, energy: eig.value })
}

pub fn fci_solve(imp: &ImpurityHamiltonian, tol: f64) -> Result<CiVector> {
    imp.validate()?;
    let (n, k) = (imp.n_orb, imp.n_alpha());
    let dim = binomial(n, k) * binomial(n, k);
    if dim > FCI_MAX_DETERMINANTS {
        return Err(EmberError::TooLarge {
            what: "FCI determinant space",
            requested: dim,
            limit: FCI_MAX_DETERMINANTS,
        });
    }
    diagonalize(imp, SubspaceBasis::full(n, k, k)?, tol)
}

/// Frequency-weighted draw of `m` distinct configurations without replacement
/// (exponential-key method; ties resolved by determinant order).
fn weighted_batch(pool: &[(Determinant, u64)], m: usize, rng: &mut ChaCha8Rng) -> Vec<(Determinant, u64)> {
    if m >= pool.len() {
        return pool.to_vec();
    }
    let mut keyed: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(k, (_, w))| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            (u.ln() / *w as f64, k)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(pool[a.1].0.cmp(&pool[b.1].0)));
    let mut out: Vec<(Determinant, u64)> = keyed[..m].iter().map(|&(_, k)| pool[k]).collect();
    out.sort();
    out
}

/// The recovery loop on a fixed sample set.
pub fn sqd_solve_samples(imp: &ImpurityHamiltonian, samples: &SampleSet, opts: &SqdOptions) -> Result<SqdResult> {
    imp.validate()?;
    let (n, k) = (imp.n_orb, imp.n_alpha());
    let raw = samples.entries();
    let mut diagnostics = Vec::new();
    let mut best: Option<CiVector> = None;
    let consider = |ci: CiVector, best: &mut Option<CiVector>| {
        if best.as_ref().is_none_or(|b| ci.energy < b.energy) {
            *best = Some(ci);
        }
    };

    let valid: Vec<(Determinant, u64)> = raw.iter().copied().filter(|(d, _)| d.conforms(k, k)).collect();
    let mut profile = if valid.is_empty() {
        log::debug!("no sector-conforming raw samples; starting from the Hartree–Fock profile");
        OccupancyProfile::hartree_fock(n, k, k)
    } else {
        let basis = expand_subspace(&valid, n, k, opts.batch_cap)?;
        let (nu, np) = (basis.alpha.len(), basis.len());
        let ci = diagonalize(imp, basis, opts.davidson_tol)?;
        let pr = ci.profile();
        let e = ci.energy;
        consider(ci, &mut best);
        diagnostics.push(DiagnosticRow { iteration: 0, batch: 0, n_unique: nu, n_proj: np, energy: e, best: e });
        pr
    };

    for it in 1..=opts.recovery_iters {
        let stream = derive_seed(opts.seed, it as u64);
        let recovered = recover_configurations(&raw, &profile, k, k, stream)?;
        if recovered.is_empty() {
            return Err(EmberError::Solver("no valid configurations after recovery".into()));
        }
        let m = opts.batch_cap.min(recovered.len());
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(stream, 0xBA7C));
        let mut solved: Vec<(Vec<(Determinant, u64)>, CiVector)> = Vec::new();
        let mut profiles = Vec::new();
        for b in 0..opts.batches.max(1) {
            let batch = weighted_batch(&recovered, m, &mut rng);
            let ci = match solved.iter().find(|(prev, _)| *prev == batch) {
                Some((_, ci)) => ci.clone(),
                None => {
                    let basis = expand_subspace(&batch, n, k, opts.batch_cap)?;
                    let ci = diagonalize(imp, basis, opts.davidson_tol)?;
                    solved.push((batch, ci.clone()));
                    ci
                }
            };
            profiles.push(ci.profile());
            let (nu, np, e) = (ci.basis.alpha.len(), ci.basis.len(), ci.energy);
            consider(ci, &mut best);
            let be = best.as_ref().map_or(e, |x| x.energy);
            diagnostics.push(DiagnosticRow { iteration: it, batch: b, n_unique: nu, n_proj: np, energy: e, best: be });
        }
        profile = OccupancyProfile::average(&profiles);
    }
    let best = best.ok_or_else(|| EmberError::Solver("no subspace was diagonalized".into()))?;
    Ok(SqdResult { best, profile, diagnostics })
}

pub fn sqd_solve(
    imp: &ImpurityHamiltonian,
    sampler: &dyn ConfigurationSampler,
    shots: u64,
    opts: &SqdOptions,
) -> Result<SqdResult> {
    let samples = sampler.sample(shots, opts.seed)?;
    sqd_solve_samples(imp, &samples, opts)
}

/// Keep drawing rounds of `shots` until the pooled unique spin strings fill
/// the whole `(n, k)` string space (or `max_rounds` is reached).
pub fn sample_until_saturated(
    sampler: &dyn ConfigurationSampler,
    n_alpha: usize,
    shots: u64,
    seed: u64,
    max_rounds: usize,
) -> Result<SampleSet> {
    let target = binomial(sampler.n_orb(), n_alpha) as usize;
    let mut total: Option<SampleSet> = None;
    let mut pool = HashSet::new();
    for round in 0..max_rounds {
        let s = sampler.sample(shots, derive_seed(seed, round as u64))?;
        for d in s.counts.keys().filter(|d| d.conforms(n_alpha, n_alpha)) {
            pool.insert(d.alpha);
            pool.insert(d.beta);
        }
        match total.as_mut() {
            Some(t) => t.merge(&s),
            None => total = Some(s),
        }
        if pool.len() >= target {
            break;
        }
    }
    let total = total.ok_or_else(|| EmberError::Invalid("no sampling rounds".into()))?;
    if pool.len() < target {
        return Err(EmberError::NoConvergence {
            what: "string-space saturation",
            iterations: max_rounds,
            residual: (target - pool.len()) as f64,
        });
    }
    Ok(total)
}

/// Determinant multiset as counts, for building samplers from explicit lists.
pub fn counts_of(dets: &[Determinant]) -> BTreeMap<Determinant, u64> {
    let mut m = BTreeMap::new();
    for d in dets {
        *m.entry(*d).or_insert(0) += 1;
    }
    m
}
