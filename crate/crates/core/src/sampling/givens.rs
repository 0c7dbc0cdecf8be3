//! Orbital rotations on determinant-space statevectors.
//!
//! A unitary `U` acts on creation operators as `a†_p → Σ_q U_qp a†_q`. It is
//! factored into adjacent-mode 2×2 rotations and a diagonal phase, each of
//! which acts on string pairs without fermionic signs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::sampling::determinant::occupied;
use crate::sqd::strings::StringSpace;

type C = Complex64;

#[derive(Clone, Debug)]
pub struct GivensRotation {
    /// Acts on modes `(mode, mode + 1)`.
    pub mode: usize,
    /// Row-major 2×2 one-body matrix.
    pub g: [C; 4],
}

#[derive(Clone, Debug)]
pub struct GivensDecomposition {
    /// Applied last-to-first after the phases: `U = G_0 G_1 … G_{k−1} D`.
    pub rotations: Vec<GivensRotation>,
    pub phases: Vec<C>,
}

/// Factor a unitary into adjacent Givens rotations and diagonal phases.
pub fn givens_decompose(u: &DMatrix<C>) -> GivensDecomposition {
    let n = u.nrows();
    let mut m = u.clone();
    let mut rotations = Vec::new();
    for c in 0..n {
        for r in (c + 1..n).rev() {
            let a = m[(r - 1, c)];
            let b = m[(r, c)];
            if b.norm() < 1e-15 {
                continue;
            }
            let rho = (a.norm_sqr() + b.norm_sqr()).sqrt();
            // Q = [[ā, b̄], [−b, a]] / ρ zeroes m[r][c]
            let q = [a.conj() / rho, b.conj() / rho, -b / rho, a / rho];
            for k in 0..n {
                let (x, y) = (m[(r - 1, k)], m[(r, k)]);
                m[(r - 1, k)] = q[0] * x + q[1] * y;
                m[(r, k)] = q[2] * x + q[3] * y;
            }
            // U = … Q† … D; store Q†
            rotations.push(GivensRotation { mode: r - 1, g: [q[0].conj(), q[2].conj(), q[1].conj(), q[3].conj()] });
        }
    }
    let phases = (0..n).map(|k| m[(k, k)]).collect();
    GivensDecomposition { rotations, phases }
}

/// Precomputed string pairings for each adjacent mode pair of one spin sector.
#[derive(Clone, Debug)]
pub struct RotationPlan {
    /// For mode `p`: (I with p occupied & p+1 empty, J = I with p → p+1).
    pairs: Vec<Vec<(usize, usize)>>,
    /// For mode `p`: strings with both `p` and `p+1` occupied.
    both: Vec<Vec<usize>>,
    occ: Vec<Vec<usize>>,
}

impl RotationPlan {
    pub fn new(space: &StringSpace) -> Self {
        let n = space.n_orb;
        let mut pairs = vec![Vec::new(); n.saturating_sub(1)];
        let mut both = vec![Vec::new(); n.saturating_sub(1)];
        for (i, &s) in space.strings.iter().enumerate() {
            for p in 0..n.saturating_sub(1) {
                match (s >> p & 1, s >> (p + 1) & 1) {
                    (1, 0) => {
                        let t = s ^ (0b11 << p);
                        pairs[p].push((i, space.position(t).expect("full string space")));
                    }
                    (1, 1) => both[p].push(i),
                    _ => {}
                }
            }
        }
        let occ = space.strings.iter().map(|&s| occupied(s).collect()).collect();
        RotationPlan { pairs, both, occ }
    }
}

/// Apply `Û` to a statevector stored as an `na × nb` row-major matrix,
/// acting on the α index (`on_alpha`) or the β index.
pub fn apply_orbital_rotation(
    psi: &mut [C],
    na: usize,
    nb: usize,
    plan: &RotationPlan,
    dec: &GivensDecomposition,
    on_alpha: bool,
) {
    // the element with index `i` along the rotated axis and `k` along the other
    let at = |i: usize, k: usize| if on_alpha { i * nb + k } else { k * nb + i };
    let other = if on_alpha { nb } else { na };
    // D first
    for (i, occ) in plan.occ.iter().enumerate() {
        let f: C = occ.iter().map(|&p| dec.phases[p]).product();
        for k in 0..other {
            psi[at(i, k)] *= f;
        }
    }
    for rot in dec.rotations.iter().rev() {
        let [g00, g01, g10, g11] = rot.g;
        for &(i, j) in &plan.pairs[rot.mode] {
            for k in 0..other {
                let (x, y) = (psi[at(i, k)], psi[at(j, k)]);
                psi[at(i, k)] = g00 * x + g01 * y;
                psi[at(j, k)] = g10 * x + g11 * y;
            }
        }
        let det = g00 * g11 - g01 * g10;
        for &i in &plan.both[rot.mode] {
            for k in 0..other {
                psi[at(i, k)] *= det;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_unitary(n: usize, seed: u64) -> DMatrix<C> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        a.qr().q()
    }

    #[test]
    fn decomposition_reconstructs_unitary() {
        let u = random_unitary(5, 3);
        let dec = givens_decompose(&u);
        let n = 5;
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dec.phases.clone()));
        for rot in dec.rotations.iter().rev() {
            let mut g = DMatrix::<C>::identity(n, n);
            g[(rot.mode, rot.mode)] = rot.g[0];
            g[(rot.mode, rot.mode + 1)] = rot.g[1];
            g[(rot.mode + 1, rot.mode)] = rot.g[2];
            g[(rot.mode + 1, rot.mode + 1)] = rot.g[3];
            m = g * m;
        }
        assert!((m - u).iter().all(|x| x.norm() < 1e-12));
    }
}
