use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ember_core::integrals::{EriTensor, ImpurityHamiltonian};

/// Random real impurity Hamiltonian with exact 8-fold ERI symmetry.
pub fn impurity(n: usize, n_elec: usize, seed: u64) -> ImpurityHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h1 = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let v = if p == q { rng.gen_range(-2.0..0.0) } else { rng.gen_range(-0.3..0.3) };
            h1[(p, q)] = v;
            h1[(q, p)] = v;
        }
    }
    let mut eri = EriTensor::zeros(n);
    for (p, q, r, s) in EriTensor::canonical_quadruples(n) {
        let v = if p == q && r == s { rng.gen_range(0.2..0.8) } else { rng.gen_range(-0.1..0.1) };
        eri.set(p, q, r, s, v);
    }
    ImpurityHamiltonian {
        n_orb: n,
        n_elec_imp: n_elec,
        h1,
        eri_imp: eri,
        e_const: 0.0,
        frag_indices: (0..n / 2).collect(),
    }
}

pub fn unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}
