//! Problem-size bookkeeping per impurity.

use serde::{Deserialize, Serialize};

use crate::sampling::determinant::binomial;

/// Closed-shell determinant count `C(o, e/2)²`.
pub fn symmetry_space_dim(n_orb: usize, n_elec: usize) -> u128 {
    let c = binomial(n_orb, n_elec / 2);
    c * c
}

/// Fock-space dimension over `2·o` spin orbitals.
pub fn hilbert_space_dim(n_orb: usize) -> u128 {
    1u128 << (2 * n_orb)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DimsRow {
    pub label: String,
    pub n_orb: usize,
    pub n_elec: usize,
    pub qubits: usize,
    pub ss_dim: u128,
    pub hs_dim: u128,
}

impl DimsRow {
    pub fn new(label: impl Into<String>, n_orb: usize, n_elec: usize) -> Self {
        DimsRow {
            label: label.into(),
            n_orb,
            n_elec,
            qubits: 2 * n_orb,
            ss_dim: symmetry_space_dim(n_orb, n_elec),
            hs_dim: hilbert_space_dim(n_orb),
        }
    }
}

pub fn format_dims(rows: &[DimsRow]) -> String {
    let mut out = format!("{:<8} {:>8} {:>7} {:>14} {:>16}\n", "fragment", "(o,e)", "qubits", "|S.S|", "|H.S|");
    for r in rows {
        out.push_str(&format!(
            "{:<8} {:>8} {:>7} {:>14} {:>16}\n",
            r.label,
            format!("({},{})", r.n_orb, r.n_elec),
            r.qubits,
            r.ss_dim,
            r.hs_dim
        ));
    }
    out
}
