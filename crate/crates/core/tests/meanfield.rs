mod common;

use ember_core::linalg::max_abs;
use ember_core::meanfield::{electronic_energy, fock_matrix, lowdin_localize, mp2_amplitudes, run_rhf, ScfOptions};
use nalgebra::DMatrix;

const MOLECULES: [&str; 7] =
    ["h2_sto3g", "h4_chain_sto3g", "h6_chain_sto3g", "h2o_sto3g", "hocn_sto3g", "nocl_sto3g", "hoscn_sto3g"];

#[test]
fn h2_nuclear_repulsion_from_geometry() {
    let b = common::bundle("h2_sto3g");
    assert_eq!(b.n_ao, 2);
    let bohr = 0.735 / 0.52917721092;
    assert!((b.e_nuc - 1.0 / bohr).abs() < 1e-6);
}

#[test]
fn rhf_matches_reference_energies() {
    for name in MOLECULES {
        let b = common::bundle(name);
        let r = run_rhf(&b, &ScfOptions::default()).unwrap();
        let reference = common::reference(name);
        assert!(r.converged);
        assert!(r.commutator_norm < 1e-10);
        assert!((b.e_nuc - reference.e_nuc).abs() < 1e-10, "{name} e_nuc");
        assert!((r.e_hf - reference.e_hf).abs() < 1e-6, "{name}: {} vs {}", r.e_hf, reference.e_hf);

        let trace = (&r.dm_ao * &b.overlap).trace();
        assert!((trace - b.n_elec as f64).abs() < 1e-8);
        let ortho = r.mo_coeff.transpose() * &b.overlap * &r.mo_coeff;
        assert!(max_abs(&(ortho - DMatrix::identity(b.n_ao, b.n_ao))) < 1e-8);
        let idem = &r.dm_ao * &b.overlap * &r.dm_ao - &r.dm_ao * 2.0;
        assert!(max_abs(&idem) < 1e-8);
        assert_eq!(r.mo_occ.iter().sum::<f64>(), b.n_elec as f64);
    }
}

#[test]
fn energy_invariant_under_occupied_rotation() {
    let b = common::bundle("h2o_sto3g");
    let r = run_rhf(&b, &ScfOptions::default()).unwrap();
    let n_occ = r.n_occ();
    let eri = b.eri.to_dense();
    // rotate occupied orbitals 0 and 3
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let mut rot = DMatrix::identity(b.n_ao, b.n_ao);
    rot[(0, 0)] = c;
    rot[(3, 3)] = c;
    rot[(0, 3)] = -s;
    rot[(3, 0)] = s;
    let cr = &r.mo_coeff * rot;
    let occ = cr.columns(0, n_occ);
    let dm = occ * occ.transpose() * 2.0;
    let f = fock_matrix(&b.hcore, &eri, &dm);
    let e = electronic_energy(&b.hcore, &f, &dm) + b.e_nuc;
    assert!((e - r.e_hf).abs() < 1e-10);
}

#[test]
fn mp2_matches_reference() {
    for name in ["h2_sto3g", "h4_chain_sto3g", "h2o_sto3g", "hocn_sto3g"] {
        let b = common::bundle(name);
        let r = run_rhf(&b, &ScfOptions::default()).unwrap();
        let t = mp2_amplitudes(&b, &r).unwrap();
        let e_ref = common::reference(name).e_mp2_corr.unwrap();
        assert!((t.e_corr - e_ref).abs() < 1e-6, "{name}: {} vs {e_ref}", t.e_corr);
        for i in 0..t.n_occ {
            for j in 0..t.n_occ {
                for a in 0..t.n_vir {
                    for bb in 0..t.n_vir {
                        assert!((t.get(i, j, a, bb) - t.get(j, i, bb, a)).abs() < 1e-12);
                    }
                }
            }
        }
    }
    let b = common::bundle("h2_sto3g");
    let t = mp2_amplitudes(&b, &run_rhf(&b, &ScfOptions::default()).unwrap()).unwrap();
    assert!(t.get(0, 0, 0, 0) < 0.0);
}

#[test]
fn lowdin_basis_properties() {
    let b = common::bundle("h2o_sto3g");
    let r = run_rhf(&b, &ScfOptions::default()).unwrap();
    let (plan, sys) = lowdin_localize(&b, &r).unwrap();
    let x = &plan.lowdin_transform;
    assert!(max_abs(&(x - x.transpose())) == 0.0);
    assert!(max_abs(&(x.transpose() * &b.overlap * x - DMatrix::identity(7, 7))) < 1e-10);
    let mut sizes: Vec<usize> = plan.fragments.iter().map(|f| f.len()).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 1, 5]);
    assert!((sys.dm.trace() - 10.0).abs() < 1e-8);
}

#[test]
fn identity_overlap_leaves_integrals_unchanged() {
    let mut b = common::bundle("h2_sto3g");
    b.overlap = DMatrix::identity(2, 2);
    let r = run_rhf(&b, &ScfOptions::default()).unwrap();
    let (plan, sys) = lowdin_localize(&b, &r).unwrap();
    assert!(max_abs(&(&plan.lowdin_transform - DMatrix::identity(2, 2))) < 1e-14);
    assert!(max_abs(&(&sys.hcore - &b.hcore)) < 1e-14);
    let dense = b.eri.to_dense();
    let diff = dense.data.iter().zip(&sys.eri.data).fold(0.0f64, |m, (a, c)| m.max((a - c).abs()));
    assert!(diff < 1e-14);
}
