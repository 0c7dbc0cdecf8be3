//! Fragment energy and electron count from impurity density matrices.

use crate::dmet::embedding::ImpurityModel;
use crate::error::{EmberError, Result};
use crate::linalg::DenseEri;
use crate::sqd::Rdms;

/// `E_A = Σ_{p∈A} [ Σ_q ½(t_pq + h̄_pq) D_qp + ½ Σ_{qrs} (pq|rs) P_pqrs ]` with the
/// unshifted `h̄`, and `N_A = Σ_{p∈A} D_pp`.
pub fn fragment_energy(model: &ImpurityModel, eri: &DenseEri, rdms: &Rdms) -> Result<(f64, f64)> {
    let n = model.base.n_orb;
    if rdms.one.nrows() != n || rdms.two.n != n || eri.n != n {
        return Err(EmberError::Invalid(format!(
            "density matrices of size {} for a {n}-orbital impurity",
            rdms.one.nrows()
        )));
    }
    let t = &model.hcore_projected;
    let h = &model.base.h1;
    let mut e = 0.0;
    let mut n_a = 0.0;
    let n3 = n * n * n;
    for &p in &model.base.frag_indices {
        n_a += rdms.one[(p, p)];
        for q in 0..n {
            e += 0.5 * (t[(p, q)] + h[(p, q)]) * rdms.one[(q, p)];
        }
        let block = &eri.data[p * n3..(p + 1) * n3];
        let pblock = &rdms.two.data[p * n3..(p + 1) * n3];
        e += 0.5 * block.iter().zip(pblock).map(|(g, x)| g * x).sum::<f64>();
    }
    Ok((e, n_a))
}
