//! Shot-based configuration sources.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EmberError, Result};
use crate::par;
use crate::sampling::determinant::Determinant;
use crate::sqd::subspace::SubspaceBasis;

/// Shots drawn per independent RNG stream; fixed so output never depends on workers.
const SHOTS_PER_BLOCK: u64 = 1024;

#[derive(Clone, Debug, PartialEq)]
pub enum SourceTag {
    Exact,
    Noisy(f64),
    File(String),
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTag::Exact => write!(f, "exact"),
            SourceTag::Noisy(p) => write!(f, "noisy({p})"),
            SourceTag::File(p) => write!(f, "file({p})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub counts: BTreeMap<Determinant, u64>,
    pub shots: u64,
    pub source: SourceTag,
}

impl SampleSet {
    pub fn from_counts(counts: BTreeMap<Determinant, u64>, source: SourceTag) -> Self {
        let shots = counts.values().sum();
        SampleSet { counts, shots, source }
    }

    pub fn entries(&self) -> Vec<(Determinant, u64)> {
        self.counts.iter().map(|(d, &m)| (*d, m)).collect()
    }

    pub fn merge(&mut self, other: &SampleSet) {
        for (d, m) in &other.counts {
            *self.counts.entry(*d).or_insert(0) += m;
        }
        self.shots += other.shots;
    }
}

/// Stream seed for `(seed, stream)`; splitmix-style so nearby indices decorrelate.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub trait ConfigurationSampler: Sync {
    fn n_orb(&self) -> usize;
    fn sample(&self, shots: u64, seed: u64) -> Result<SampleSet>;
}

/// I.i.d. draws from a probability vector over a determinant basis, with
/// optional independent bit flips on each of the `2n` occupation bits.
pub struct DistributionSampler {
    basis: SubspaceBasis,
    cumulative: Vec<f64>,
    pub noise_p: f64,
    exact: bool,
}

impl DistributionSampler {
    pub fn new(basis: SubspaceBasis, probabilities: &[f64], noise_p: f64, exact: bool) -> Result<Self> {
        if probabilities.len() != basis.len() {
            return Err(EmberError::Invalid("probabilities do not match the basis".into()));
        }
        if !(0.0..=1.0).contains(&noise_p) {
            return Err(EmberError::Invalid(format!("noise rate {noise_p} outside [0, 1]")));
        }
        let total: f64 = probabilities.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(EmberError::Invalid("distribution has no weight".into()));
        }
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(DistributionSampler { basis, cumulative, noise_p, exact })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Determinant {
        let u: f64 = rng.gen();
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        let mut d = self.basis.det(k);
        if self.noise_p > 0.0 {
            for p in 0..self.basis.n_orb {
                if rng.gen::<f64>() < self.noise_p {
                    d.alpha ^= 1 << p;
                }
            }
            for p in 0..self.basis.n_orb {
                if rng.gen::<f64>() < self.noise_p {
                    d.beta ^= 1 << p;
                }
            }
        }
        d
    }
}

impl ConfigurationSampler for DistributionSampler {
    fn n_orb(&self) -> usize {
        self.basis.n_orb
    }

    fn sample(&self, shots: u64, seed: u64) -> Result<SampleSet> {
        if shots == 0 {
            return Err(EmberError::Invalid("zero shots requested".into()));
        }
        let blocks = shots.div_ceil(SHOTS_PER_BLOCK) as usize;
        let parts = par::map_range(blocks, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
            let n = SHOTS_PER_BLOCK.min(shots - b as u64 * SHOTS_PER_BLOCK);
            let mut counts = BTreeMap::new();
            for _ in 0..n {
                *counts.entry(self.draw(&mut rng)).or_insert(0u64) += 1;
            }
            counts
        });
        let mut counts = BTreeMap::new();
        for part in parts {
            for (d, m) in part {
                *counts.entry(d).or_insert(0) += m;
            }
        }
        let source = if self.noise_p > 0.0 {
            SourceTag::Noisy(self.noise_p)
        } else if self.exact {
            SourceTag::Exact
        } else {
            SourceTag::Noisy(0.0)
        };
        Ok(SampleSet { counts, shots, source })
    }
}

/// Replays a fixed sample set (e.g. hardware shots read from a file).
pub struct FixedSampler {
    pub n_orb: usize,
    pub set: SampleSet,
}

impl ConfigurationSampler for FixedSampler {
    fn n_orb(&self) -> usize {
        self.n_orb
    }

    fn sample(&self, _shots: u64, _seed: u64) -> Result<SampleSet> {
        Ok(self.set.clone())
    }
}
