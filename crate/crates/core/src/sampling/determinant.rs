//! Occupation-number determinants.
//!
//! A spin string is a `u64` bitmask: bit `p` set means spatial orbital `p`
//! holds an electron of that spin. Fermionic signs follow the orbital order
//! with the whole α block preceding the β block.

use serde::{Deserialize, Serialize};

/// Largest supported spatial-orbital count (one `u64` per spin sector).
pub const MAX_ORBITALS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Determinant { alpha, beta }
    }

    /// Closed-shell Hartree–Fock determinant with the lowest `n_occ` orbitals doubly occupied.
    pub fn hartree_fock(n_occ: usize) -> Self {
        let s = low_bits(n_occ);
        Determinant { alpha: s, beta: s }
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }

    pub fn conforms(&self, n_alpha: usize, n_beta: usize) -> bool {
        self.n_alpha() == n_alpha && self.n_beta() == n_beta
    }

    pub fn swapped(&self) -> Self {
        Determinant { alpha: self.beta, beta: self.alpha }
    }

    /// `2n`-character string, most significant bit first: β block then α block.
    pub fn to_bitstring(&self, n_orb: usize) -> String {
        let mut s = String::with_capacity(2 * n_orb);
        for p in (0..n_orb).rev() {
            s.push(if self.beta >> p & 1 == 1 { '1' } else { '0' });
        }
        for p in (0..n_orb).rev() {
            s.push(if self.alpha >> p & 1 == 1 { '1' } else { '0' });
        }
        s
    }
}

pub fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// `(−1)^{number of set bits below p}`.
#[inline]
pub fn parity_below(bits: u64, p: usize) -> f64 {
    if (bits & low_bits(p)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn annihilate(bits: u64, p: usize) -> Option<(u64, f64)> {
    if bits >> p & 1 == 0 {
        return None;
    }
    Some((bits ^ (1 << p), parity_below(bits, p)))
}

#[inline]
pub fn create(bits: u64, p: usize) -> Option<(u64, f64)> {
    if bits >> p & 1 == 1 {
        return None;
    }
    Some((bits | (1 << p), parity_below(bits, p)))
}

/// `a†_p a_q` on a single spin string.
#[inline]
pub fn excite(bits: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    let (b, s1) = annihilate(bits, q)?;
    let (b, s2) = create(b, p)?;
    Some((b, s1 * s2))
}

/// `a†_p a†_r a_s a_q` on a single spin string.
#[inline]
pub fn excite2(bits: u64, p: usize, q: usize, r: usize, s: usize) -> Option<(u64, f64)> {
    let (b, s1) = annihilate(bits, q)?;
    let (b, s2) = annihilate(b, s)?;
    let (b, s3) = create(b, r)?;
    let (b, s4) = create(b, p)?;
    Some((b, s1 * s2 * s3 * s4))
}

/// Set-bit positions in ascending order.
pub fn occupied(bits: u64) -> impl Iterator<Item = usize> {
    let mut b = bits;
    std::iter::from_fn(move || {
        if b == 0 {
            None
        } else {
            let p = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(p)
        }
    })
}

/// All `n`-bit strings with `k` bits set, ascending.
pub fn all_strings(n: usize, k: usize) -> Vec<u64> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut s = low_bits(k);
    let limit = if n >= 64 { u64::MAX } else { 1u64 << n };
    while s < limit {
        out.push(s);
        // Gosper's hack: next larger integer with the same popcount
        let c = s & s.wrapping_neg();
        let r = s.wrapping_add(c);
        if r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
