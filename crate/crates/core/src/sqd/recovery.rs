//! Configuration recovery: repair samples that violate the particle-number
//! sector using mean orbital occupancies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EmberError, Result};
use crate::par;
use crate::sampling::derive_seed;
use crate::sampling::determinant::{low_bits, occupied, Determinant};

/// Weight floor keeping every orbital reachable.
pub const RECOVERY_ETA: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyProfile {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl OccupancyProfile {
    /// Hartree–Fock step: the lowest `n_occ` orbitals filled.
    pub fn hartree_fock(n_orb: usize, n_alpha: usize, n_beta: usize) -> Self {
        let step = |k: usize| (0..n_orb).map(|p| if p < k { 1.0 } else { 0.0 }).collect();
        OccupancyProfile { alpha: step(n_alpha), beta: step(n_beta) }
    }

    pub fn n_orb(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.beta.len() {
            return Err(EmberError::Invalid("occupancy profile spin lengths differ".into()));
        }
        if let Some(x) = self.alpha.iter().chain(&self.beta).find(|x| !(-1e-12..=1.0 + 1e-12).contains(*x)) {
            return Err(EmberError::Invalid(format!("occupancy {x} outside [0, 1]")));
        }
        Ok(())
    }

    /// Uniform average of several profiles.
    pub fn average(profiles: &[OccupancyProfile]) -> Self {
        let n = profiles[0].n_orb();
        let k = profiles.len() as f64;
        let mut out = OccupancyProfile { alpha: vec![0.0; n], beta: vec![0.0; n] };
        for pr in profiles {
            for p in 0..n {
                out.alpha[p] += pr.alpha[p] / k;
                out.beta[p] += pr.beta[p] / k;
            }
        }
        out
    }
}

fn pick(rng: &mut ChaCha8Rng, candidates: &[usize], weight: impl Fn(usize) -> f64) -> usize {
    let w: Vec<f64> = candidates.iter().map(|&p| weight(p)).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, wk) in w.iter().enumerate() {
        if u < *wk {
            return candidates[k];
        }
        u -= wk;
    }
    *candidates.last().expect("non-empty candidate list")
}

/// Bring one spin string to `target` electrons.
pub fn recover_string(mut s: u64, n_orb: usize, occ: &[f64], target: usize, rng: &mut ChaCha8Rng) -> u64 {
    s &= low_bits(n_orb);
    while (s.count_ones() as usize) > target {
        let cand: Vec<usize> = occupied(s).collect();
        let p = pick(rng, &cand, |p| (1.0 - occ[p]).max(0.0) + RECOVERY_ETA);
        s ^= 1 << p;
    }
    while (s.count_ones() as usize) < target {
        let cand: Vec<usize> = (0..n_orb).filter(|&p| s >> p & 1 == 0).collect();
        let p = pick(rng, &cand, |p| occ[p].max(0.0) + RECOVERY_ETA);
        s |= 1 << p;
    }
    s
}

/// Recover every shot independently. Each distinct input configuration owns
/// an RNG stream derived from `(seed, position)`, so the result does not
/// depend on the worker count.
pub fn recover_configurations(
    samples: &[(Determinant, u64)],
    profile: &OccupancyProfile,
    n_alpha: usize,
    n_beta: usize,
    seed: u64,
) -> Result<Vec<(Determinant, u64)>> {
    profile.validate()?;
    let n = profile.n_orb();
    if n_alpha > n || n_beta > n {
        return Err(EmberError::Invalid(format!("cannot place ({n_alpha},{n_beta}) electrons in {n} orbitals")));
    }
    let parts = par::map_range(samples.len(), |k| {
        let (d, m) = samples[k];
        if d.conforms(n_alpha, n_beta) && d.alpha >> n == 0 && d.beta >> n == 0 {
            return vec![(d, m)];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
        let mut out: Vec<(Determinant, u64)> = Vec::new();
        for _ in 0..m {
            let a = recover_string(d.alpha, n, &profile.alpha, n_alpha, &mut rng);
            let b = recover_string(d.beta, n, &profile.beta, n_beta, &mut rng);
            out.push((Determinant::new(a, b), 1));
        }
        out
    });
    let mut merged = std::collections::BTreeMap::new();
    for part in parts {
        for (d, m) in part {
            *merged.entry(d).or_insert(0) += m;
        }
    }
    Ok(merged.into_iter().collect())
}
