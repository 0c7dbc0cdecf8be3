//! Product subspaces built from pooled spin strings.

use std::collections::HashMap;

use crate::error::{EmberError, Result};
use crate::sampling::determinant::Determinant;
use crate::sqd::strings::StringSpace;

/// Determinants `α_i ⊗ β_j` for every pair of pooled strings, ordered
/// α-major: position `i·|β| + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    pub n_orb: usize,
    pub alpha: StringSpace,
    pub beta: StringSpace,
}

impl SubspaceBasis {
    pub fn new(alpha: StringSpace, beta: StringSpace) -> Result<Self> {
        if alpha.n_orb != beta.n_orb {
            return Err(EmberError::Invalid("spin pools disagree on orbital count".into()));
        }
        Ok(SubspaceBasis { n_orb: alpha.n_orb, alpha, beta })
    }

    /// Complete `(N_α, N_β)` sector.
    pub fn full(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        Self::new(StringSpace::full(n_orb, n_alpha)?, StringSpace::full(n_orb, n_beta)?)
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn det(&self, k: usize) -> Determinant {
        let nb = self.beta.len();
        Determinant::new(self.alpha.strings[k / nb], self.beta.strings[k % nb])
    }

    pub fn position(&self, d: &Determinant) -> Option<usize> {
        Some(self.alpha.position(d.alpha)? * self.beta.len() + self.beta.position(d.beta)?)
    }

    pub fn dets(&self) -> impl Iterator<Item = Determinant> + '_ {
        (0..self.len()).map(move |k| self.det(k))
    }
}

/// Pool the unique α and β strings of `dets` (weighted by multiplicity) into
/// one set and square it. When `|P|² > cap`, only the most frequent strings
/// are kept (ties broken by ascending string value).
pub fn expand_subspace(
    dets: &[(Determinant, u64)],
    n_orb: usize,
    n_elec_spin: usize,
    cap: usize,
) -> Result<SubspaceBasis> {
    if dets.is_empty() {
        return Err(EmberError::Invalid("cannot build a subspace from no configurations".into()));
    }
    let mut freq: HashMap<u64, u64> = HashMap::new();
    for (d, m) in dets {
        if !d.conforms(n_elec_spin, n_elec_spin) {
            return Err(EmberError::Invalid(format!(
                "configuration {} violates the ({n_elec_spin},{n_elec_spin}) sector",
                d.to_bitstring(n_orb)
            )));
        }
        *freq.entry(d.alpha).or_insert(0) += m;
        *freq.entry(d.beta).or_insert(0) += m;
    }
    let mut pool: Vec<(u64, u64)> = freq.into_iter().collect();
    let max_len = (cap as f64).sqrt().floor() as usize;
    if pool.len() > max_len {
        pool.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        pool.truncate(max_len.max(1));
    }
    let mut strings: Vec<u64> = pool.into_iter().map(|(s, _)| s).collect();
    strings.sort_unstable();
    let space = StringSpace::new(n_orb, n_elec_spin, strings)?;
    SubspaceBasis::new(space.clone(), space)
}
