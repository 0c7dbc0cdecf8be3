#![allow(dead_code)]

pub mod jw;
pub mod random;

use std::path::PathBuf;

use ember_core::integrals::{read_bundle, IntegralBundle};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn bundle(name: &str) -> IntegralBundle {
    read_bundle(fixture(&format!("{name}.bundle"))).expect("fixture bundle")
}

/// Reference values from an independent quantum-chemistry stack run on the
/// same fixtures: (e_nuc, e_hf, e_mp2_corr, e_fci).
pub struct Reference {
    pub e_nuc: f64,
    pub e_hf: f64,
    pub e_mp2_corr: Option<f64>,
    pub e_fci: Option<f64>,
}

pub fn reference(name: &str) -> Reference {
    match name {
        "h2_sto3g" => Reference {
            e_nuc: 0.7199689944489797,
            e_hf: -1.116998996754004,
            e_mp2_corr: Some(-0.013021879919123248),
            e_fci: Some(-1.1373060357534004),
        },
        "h4_chain_sto3g" => Reference {
            e_nuc: 2.29310124732,
            e_hf: -2.098545936998005,
            e_mp2_corr: Some(-0.04119808366270854),
            e_fci: Some(-2.1663874486347625),
        },
        "h6_chain_sto3g" => Reference {
            e_nuc: 4.603841735004002,
            e_hf: -3.1355322139663206,
            e_mp2_corr: Some(-0.06260577035761468),
            e_fci: Some(-3.236066279892343),
        },
        "h2o_sto3g" => Reference {
            e_nuc: 9.189533762934902,
            e_hf: -74.96302313846284,
            e_mp2_corr: Some(-0.035545651646918267),
            e_fci: Some(-75.01257824109088),
        },
        "hocn_sto3g" => Reference {
            e_nuc: 56.44927052404768,
            e_hf: -165.50130668457464,
            e_mp2_corr: Some(-0.18959035969541396),
            e_fci: None,
        },
        "nocl_sto3g" => Reference { e_nuc: 89.70140519468845, e_hf: -582.059871320567, e_mp2_corr: None, e_fci: None },
        "hoscn_sto3g" => {
            Reference { e_nuc: 136.6716961249382, e_hf: -558.6815217168426, e_mp2_corr: None, e_fci: None }
        }
        other => panic!("no reference for {other}"),
    }
}
