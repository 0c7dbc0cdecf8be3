mod common;

use std::collections::BTreeMap;

use common::random;
use ember_core::sampling::determinant::{all_strings, binomial};
use ember_core::sampling::{ConfigurationSampler, Determinant, DistributionSampler, SampleSet, SourceTag};
use ember_core::sqd::solver::diagonalize;
use ember_core::sqd::{
    expand_subspace, fci_solve, recover_configurations, sqd_solve_samples, OccupancyProfile, SqdOptions, StringSpace,
    SubspaceBasis,
};

// Upper 1% point of chi-square (Wilson–Hilferty).
fn chi2_crit_99(df: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + 2.3263 * a.sqrt()).powi(3)
}

#[test]
fn one_step_recovery_follows_vacancy_weights() {
    let profile = OccupancyProfile { alpha: vec![0.9, 0.6, 0.3, 0.1], beta: vec![0.9, 0.6, 0.3, 0.1] };
    let n = 100_000u64;
    let bad = Determinant::new(0b0111, 0b0011);
    let out = recover_configurations(&[(bad, n)], &profile, 2, 2, 11).unwrap();
    let eta = 1e-6;
    let w = [0.1 + eta, 0.4 + eta, 0.7 + eta];
    let total: f64 = w.iter().sum();
    for (removed, wk) in w.iter().enumerate() {
        let expect = wk / total;
        let got = out.iter().find(|(d, _)| d.alpha == 0b0111 ^ (1 << removed)).map_or(0, |x| x.1) as f64 / n as f64;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((got - expect).abs() < 5.0 * sigma, "orbital {removed}: {got} vs {expect}");
    }
    assert!(out.iter().all(|(d, _)| d.beta == 0b0011));
}

#[test]
fn hartree_fock_profile_repairs_to_reference() {
    let profile = OccupancyProfile::hartree_fock(4, 2, 2);
    let out = recover_configurations(&[(Determinant::new(0b0111, 0b0001), 50_000)], &profile, 2, 2, 3).unwrap();
    let hf = out.iter().find(|(d, _)| *d == Determinant::hartree_fock(2)).map_or(0, |x| x.1);
    assert!(hf as f64 / 50_000.0 > 0.999);
}

#[test]
fn half_noise_violation_fraction() {
    let basis = SubspaceBasis::full(4, 2, 2).unwrap();
    let mut probs = vec![0.0; basis.len()];
    probs[basis.position(&Determinant::hartree_fock(2)).unwrap()] = 1.0;
    let sampler = DistributionSampler::new(basis, &probs, 0.5, false).unwrap();
    let set = sampler.sample(200_000, 5).unwrap();
    let violating: u64 = set.counts.iter().filter(|(d, _)| !d.conforms(2, 2)).map(|(_, m)| m).sum();
    let conform = binomial(4, 2) as f64 / 16.0;
    let expect = 1.0 - conform * conform;
    let got = violating as f64 / set.shots as f64;
    assert!((got - expect).abs() < 0.01, "{got} vs {expect}");
}

#[test]
fn noiseless_frequencies_pass_chi_square() {
    let imp = random::impurity(4, 4, 21);
    let ci = fci_solve(&imp, 1e-10).unwrap();
    let probs: Vec<f64> = ci.coeffs.iter().map(|c| c * c).collect();
    let shots = 100_000u64;
    let sampler = DistributionSampler::new(ci.basis.clone(), &probs, 0.0, true).unwrap();
    let set = sampler.sample(shots, 9).unwrap();
    assert!(set.counts.keys().all(|d| d.conforms(2, 2)));
    let (mut chi2, mut bins, mut pooled_obs, mut pooled_exp) = (0.0, 0usize, 0.0, 0.0);
    for (k, d) in ci.basis.dets().enumerate() {
        let e = probs[k] * shots as f64;
        let o = set.counts.get(&d).copied().unwrap_or(0) as f64;
        if e < 5.0 {
            pooled_obs += o;
            pooled_exp += e;
        } else {
            chi2 += (o - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        chi2 += (pooled_obs - pooled_exp).powi(2) / pooled_exp.max(1e-300);
        bins += 1;
    }
    let crit = chi2_crit_99((bins - 1) as f64);
    assert!(chi2 < crit, "chi2 {chi2} over {bins} bins exceeds {crit}");
}

#[test]
fn nested_subspaces_refine_monotonically() {
    let imp = random::impurity(6, 6, 4);
    let strings = all_strings(6, 3);
    let mut last = f64::INFINITY;
    for m in [1, 3, 6, 10, 15, 20] {
        let space = StringSpace::new(6, 3, strings[..m].to_vec()).unwrap();
        let basis = SubspaceBasis::new(space.clone(), space).unwrap();
        let e = diagonalize(&imp, basis, 1e-11).unwrap().energy;
        assert!(e <= last + 1e-10, "energy rose from {last} to {e} at {m} strings");
        last = e;
    }
    let fci = fci_solve(&imp, 1e-11).unwrap().energy;
    assert!((last - fci).abs() < 1e-9);
}

#[test]
fn swapped_pairs_share_the_subspace() {
    let dets = [(Determinant::new(0b0011, 0b0101), 4), (Determinant::new(0b1001, 0b0011), 1)];
    let basis = expand_subspace(&dets, 4, 2, 1_000).unwrap();
    for (d, _) in dets {
        assert!(basis.position(&d).is_some());
        assert!(basis.position(&d.swapped()).is_some());
    }
    assert_eq!(basis.len(), 9);
}

#[test]
fn saturated_batches_agree() {
    let imp = random::impurity(4, 4, 8);
    let mut counts = BTreeMap::new();
    for (k, d) in SubspaceBasis::full(4, 2, 2).unwrap().dets().enumerate().filter(|(k, _)| k % 3 == 0) {
        counts.insert(d, 1 + k as u64);
    }
    counts.insert(Determinant::new(0b0111, 0b0011), 7);
    let samples = SampleSet::from_counts(counts, SourceTag::Noisy(0.0));
    let opts = SqdOptions { batches: 4, recovery_iters: 2, ..Default::default() };
    let res = sqd_solve_samples(&imp, &samples, &opts).unwrap();
    assert_eq!(res.diagnostics.iter().filter(|r| r.iteration == 0).count(), 1);
    for it in 1..=opts.recovery_iters {
        let rows: Vec<_> = res.diagnostics.iter().filter(|r| r.iteration == it).collect();
        assert_eq!(rows.len(), opts.batches);
        assert!(rows.iter().all(|r| (r.energy - rows[0].energy).abs() < 1e-12 && r.n_proj == rows[0].n_proj));
    }
}
