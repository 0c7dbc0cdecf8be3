//! Spin-string pools and the excitation tables built over them.

use std::collections::HashMap;

use crate::error::{EmberError, Result};
use crate::linalg::DenseEri;
use crate::sampling::determinant::{all_strings, excite, excite2, occupied, MAX_ORBITALS};

/// Ordered set of spin strings sharing one electron count.
#[derive(Clone, Debug, PartialEq)]
pub struct StringSpace {
    pub n_orb: usize,
    pub n_elec: usize,
    pub strings: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl StringSpace {
    /// Strings are kept in the given order; duplicates are an error.
    pub fn new(n_orb: usize, n_elec: usize, strings: Vec<u64>) -> Result<Self> {
        if n_orb > MAX_ORBITALS {
            return Err(EmberError::TooLarge {
                what: "orbitals per spin string",
                requested: n_orb as u128,
                limit: MAX_ORBITALS as u128,
            });
        }
        let mut index = HashMap::with_capacity(strings.len());
        for (k, &s) in strings.iter().enumerate() {
            if s.count_ones() as usize != n_elec || (n_orb < 64 && s >> n_orb != 0) {
                return Err(EmberError::Invalid(format!("string {s:#b} not in the ({n_orb},{n_elec}) sector")));
            }
            if index.insert(s, k).is_some() {
                return Err(EmberError::Invalid(format!("duplicate string {s:#b}")));
            }
        }
        Ok(StringSpace { n_orb, n_elec, strings, index })
    }

    pub fn full(n_orb: usize, n_elec: usize) -> Result<Self> {
        Self::new(n_orb, n_elec, all_strings(n_orb, n_elec))
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    #[inline]
    pub fn position(&self, s: u64) -> Option<usize> {
        self.index.get(&s).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleEntry {
    /// Index of the connected string.
    pub j: u32,
    /// Orbital pair `p·n + q`.
    pub pq: u32,
    pub sign: f64,
}

/// For every string `I`, all `(J, p, q, sign)` with `⟨I|a†_p a_q|J⟩ = sign`, `J` in the pool
/// (diagonal `p = q` included).
#[derive(Clone, Debug)]
pub struct SingleTable {
    offsets: Vec<usize>,
    entries: Vec<SingleEntry>,
}

impl SingleTable {
    pub fn new(space: &StringSpace) -> Self {
        let n = space.n_orb;
        let mut offsets = Vec::with_capacity(space.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for &si in &space.strings {
            // ⟨I|a†_p a_q|J⟩ = ⟨J|a†_q a_p|I⟩
            for p in occupied(si) {
                for q in 0..n {
                    if let Some((sj, sign)) = excite(si, q, p) {
                        if let Some(j) = space.position(sj) {
                            entries.push(SingleEntry { j: j as u32, pq: (p * n + q) as u32, sign });
                        }
                    }
                }
            }
            offsets.push(entries.len());
        }
        SingleTable { offsets, entries }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[SingleEntry] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }
}

/// Compressed sparse rows of a real symmetric matrix.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub offsets: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut csr = Csr { offsets: vec![0], ..Default::default() };
        for row in rows {
            for (c, v) in row {
                csr.cols.push(c);
                csr.vals.push(v);
            }
            csr.offsets.push(csr.cols.len());
        }
        csr
    }

    pub fn n_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).filter(|(&c, _)| c as usize == i).map(|(_, &v)| v).sum()
            })
            .collect()
    }
}

/// Sort by column and merge duplicates, dropping exact zeros.
pub(crate) fn merge_row(mut row: Vec<(u32, f64)>) -> Vec<(u32, f64)> {
    row.sort_by_key(|e| e.0);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

/// One-spin-sector Hamiltonian `Σ h_pq a†_p a_q + ½ Σ (pq|rs) a†_p a†_r a_s a_q`
/// restricted to the pool (intermediate strings are not restricted).
pub fn same_spin_matrix(space: &StringSpace, h1: &[f64], eri: &DenseEri) -> Csr {
    let n = space.n_orb;
    let rows = crate::par::map_slice(&space.strings, |&si| {
        let occ: Vec<usize> = occupied(si).collect();
        let mut row = Vec::new();
        // ⟨I|O|J⟩ = ⟨J|O†|I⟩ and O is Hermitian with real integrals, so
        // the row of I is generated by applying O to I.
        for &q in &occ {
            for p in 0..n {
                let h = h1[p * n + q];
                if h != 0.0 {
                    if let Some((sj, sign)) = excite(si, p, q) {
                        if let Some(j) = space.position(sj) {
                            row.push((j as u32, h * sign));
                        }
                    }
                }
            }
        }
        for &q in &occ {
            for &s in &occ {
                if s == q {
                    continue;
                }
                for r in 0..n {
                    for p in 0..n {
                        if p == r {
                            continue;
                        }
                        let g = eri.get(p, q, r, s);
                        if g == 0.0 {
                            continue;
                        }
                        if let Some((sj, sign)) = excite2(si, p, q, r, s) {
                            if let Some(j) = space.position(sj) {
                                row.push((j as u32, 0.5 * g * sign));
                            }
                        }
                    }
                }
            }
        }
        merge_row(row)
    });
    Csr::from_rows(rows)
}
