//! Brute-force second-quantized operators through the Jordan–Wigner
//! representation: every fermionic operator is built from explicit Pauli
//! X, Y, Z actions on qubit basis states (qubit k = spin orbital k, α block
//! first). Shares no sign bookkeeping with the library.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use ember_core::integrals::ImpurityHamiltonian;
use ember_core::sampling::Determinant;

type State = BTreeMap<u128, Complex64>;

fn pauli_x(st: &State, k: usize) -> State {
    st.iter().map(|(&b, &a)| (b ^ (1 << k), a)).collect()
}

fn pauli_y(st: &State, k: usize) -> State {
    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
    st.iter()
        .map(|(&b, &a)| {
            let f = if b >> k & 1 == 0 { Complex64::i() } else { -Complex64::i() };
            (b ^ (1 << k), a * f)
        })
        .collect()
}

fn pauli_z(st: &State, k: usize) -> State {
    st.iter().map(|(&b, &a)| (b, if b >> k & 1 == 0 { a } else { -a })).collect()
}

fn add(a: &State, b: &State, cb: Complex64) -> State {
    let mut out = a.clone();
    for (&k, &v) in b {
        *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v * cb;
    }
    out.retain(|_, v| v.norm() > 0.0);
    out
}

/// `a_j = Z_0 … Z_{j−1} (X_j + iY_j)/2`; creation uses `(X_j − iY_j)/2`.
fn ladder(st: &State, j: usize, dagger: bool) -> State {
    let x = pauli_x(st, j);
    let y = pauli_y(st, j);
    let coeff = if dagger { -Complex64::i() } else { Complex64::i() };
    let mut out: State = add(&x, &y, coeff).into_iter().map(|(k, v)| (k, v * 0.5)).collect();
    for k in 0..j {
        out = pauli_z(&out, k);
    }
    out.retain(|_, v| v.norm() > 1e-15);
    out
}

fn basis_index(d: &Determinant, n: usize) -> u128 {
    d.alpha as u128 | (d.beta as u128) << n
}

/// Dense `⟨D_i|H|D_j⟩` over `dets` (real part; the imaginary part is asserted zero).
pub fn hamiltonian_matrix(imp: &ImpurityHamiltonian, dets: &[Determinant]) -> DMatrix<f64> {
    let n = imp.n_orb;
    let m = 2 * n;
    let pos: BTreeMap<u128, usize> = dets.iter().enumerate().map(|(k, d)| (basis_index(d, n), k)).collect();
    let mut h = DMatrix::zeros(dets.len(), dets.len());
    for (j, d) in dets.iter().enumerate() {
        let ket: State = [(basis_index(d, n), Complex64::new(1.0, 0.0))].into_iter().collect();
        let mut out = State::new();
        for p in 0..m {
            for q in 0..m {
                if p / n != q / n {
                    continue;
                }
                let hpq = imp.h1[(p % n, q % n)];
                if hpq != 0.0 {
                    let t = ladder(&ladder(&ket, q, false), p, true);
                    out = add(&out, &t, Complex64::new(hpq, 0.0));
                }
                let aq = ladder(&ket, q, false);
                if aq.is_empty() {
                    continue;
                }
                for r in 0..m {
                    for s in 0..m {
                        if r / n != s / n {
                            continue;
                        }
                        let g = imp.eri_imp.at(p % n, q % n, r % n, s % n);
                        if g == 0.0 {
                            continue;
                        }
                        let t = ladder(&ladder(&ladder(&aq, s, false), r, true), p, true);
                        if !t.is_empty() {
                            out = add(&out, &t, Complex64::new(0.5 * g, 0.0));
                        }
                    }
                }
            }
        }
        for (b, v) in out {
            if let Some(&i) = pos.get(&b) {
                assert!(v.im.abs() < 1e-12);
                h[(i, j)] += v.re;
            }
        }
    }
    h
}
