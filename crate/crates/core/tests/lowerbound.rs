use noisy_mds::align::align_matrices;
use noisy_mds::config::{center, centered_singular_values, distance_matrix, Configuration};
use noisy_mds::linalg::{two_to_inf_norm, Matrix};
use noisy_mds::lowerbound::{
    antipodal_base, build_fano_family, build_lecam_family, half_hamming, harmonic_scale, isotropic_base,
    kl_gaussian_dissimilarity, omega_embed, packing_check, tv_chi2_bound, varshamov_gilbert, verify_packing_properties,
    PackingCheck, PackingKind,
};
use noisy_mds::DissimilarityMatrix;
use proptest::prelude::*;

fn e1(p: usize) -> Vec<f64> {
    let mut v = vec![0.0; p];
    v[0] = 1.0;
    v
}

#[test]
fn codes_meet_their_size_and_separation() {
    for m in [8, 16, 24, 32] {
        let sep = (m as f64 / 8.0).ceil();
        let code = varshamov_gilbert(m, sep, m as u64).unwrap();
        assert!(code.words.len() >= 1 << (m / 8), "m={m}");
        for (i, a) in code.words.iter().enumerate() {
            for b in &code.words[i + 1..] {
                assert!(half_hamming(a, b) >= sep);
            }
        }
    }
    let code = varshamov_gilbert(16, 2.0, 1).unwrap();
    assert!(code.min_pairwise_distance() >= 2.0);
}

#[test]
fn omega_distance_relation_on_all_four_bit_words() {
    let words: Vec<Vec<u8>> = (0u8..16).map(|b| (0..4).map(|i| (b >> i) & 1).collect()).collect();
    for n in [8, 9] {
        for a in &words {
            for b in &words {
                let (wa, wb) = (omega_embed(a, n).unwrap(), omega_embed(b, n).unwrap());
                let l1: i32 = wa.iter().zip(&wb).map(|(x, y)| (*x as i32 - *y as i32).abs()).sum();
                assert_eq!(0.5 * l1 as f64, 2.0 * half_hamming(a, b));
            }
        }
    }
}

#[test]
fn fano_members_at_small_eta() {
    let (n, p, kappa) = (64, 3, 1.5);
    let base = isotropic_base(n, p, kappa, 4.0, 5).unwrap();
    let gamma = harmonic_scale(kappa);
    let code = varshamov_gilbert(32, 4.0, 9).unwrap();
    let fam = build_fano_family(&base.x, gamma / 100.0, &e1(p), &code).unwrap();
    for y in &fam.members {
        let scale = y.points.max_abs();
        for m in y.points.col_means() {
            assert!(m.abs() <= 1e-13 * scale);
        }
        let s = centered_singular_values(&y.points);
        assert!(s[p - 1] >= gamma - gamma / 100.0 - 1e-12);
        assert!(s[0] <= gamma + gamma / 100.0 + 1e-12);
    }
    let report = verify_packing_properties(&fam, kappa, 4.0);
    assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());

    let flat = build_fano_family(&base.x, 0.0, &e1(p), &code).unwrap();
    assert!(flat.members.iter().all(|y| y.points == base.x.points));
}

#[test]
fn lecam_members_are_separated_and_bounded() {
    let (n, p, kappa, rx) = (64, 3, 1.5, 4.0);
    let base = antipodal_base(n, p, kappa, rx, 2).unwrap();
    let gamma = harmonic_scale(kappa);
    let radius = two_to_inf_norm(&center(&base.x).points);
    assert!(radius <= gamma * rx / 2.0);
    let eta = 0.2;
    let fam = build_lecam_family(&base.x, eta).unwrap();
    for xk in &fam.members {
        let fit = align_matrices(&xk.points, &base.x.points).unwrap();
        assert!(fit.loss_two_inf >= eta / 2.0 - 1e-9);
        assert!(two_to_inf_norm(&center(xk).points) <= eta + gamma * rx / 2.0 + 1e-9);
    }
    let flat = build_lecam_family(&base.x, 0.0).unwrap();
    assert!(flat.members.iter().all(|y| y.points == base.x.points));
}

/// Σ_{k<ℓ} (a − b)² / (2σ²), entry by entry.
fn per_entry_kl(a: &Matrix, b: &Matrix, sigma: f64) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            s += (a[(k, l)] - b[(k, l)]).powi(2) / (2.0 * sigma * sigma);
        }
    }
    s
}

#[test]
fn kl_single_pair_gap() {
    let a = DissimilarityMatrix::from_matrix(Matrix::from_rows(&[[0.0, 3.0], [3.0, 0.0]])).unwrap();
    let b = DissimilarityMatrix::from_matrix(Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])).unwrap();
    assert!((kl_gaussian_dissimilarity(&a, &b, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(kl_gaussian_dissimilarity(&a, &a, 1.0).unwrap(), 0.0);
}

#[test]
fn tv_bound_behaviour() {
    let n = 32;
    let base = antipodal_base(n, 2, 1.2, 4.0, 3).unwrap();
    let zero = tv_chi2_bound(&build_lecam_family(&base.x, 0.0).unwrap(), 1.0).unwrap();
    assert!((zero.raw - (n as f64).powf(-0.5)).abs() <= 1e-12);

    let mut last = 0.0;
    for eta in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2] {
        let b = tv_chi2_bound(&build_lecam_family(&base.x, eta).unwrap(), 0.5).unwrap();
        assert!(b.raw >= last - 1e-15, "η={eta}");
        assert!(b.clamped <= 1.0);
        last = b.raw;
    }
    let wide = tv_chi2_bound(&build_lecam_family(&base.x, 0.2).unwrap(), 1e6).unwrap();
    assert!((wide.raw - (n as f64).powf(-0.5)).abs() <= 1e-6);
}

#[test]
fn full_checks_pass_for_both_kinds() {
    for kind in [PackingKind::Fano, PackingKind::LeCam] {
        for p in [2, 3, 4] {
            let report = packing_check(&PackingCheck {
                kind,
                n: 64,
                p,
                kappa: 1.5,
                rx: 4.0,
                eta: 0.05,
                sigma: 1.0,
                seed: 11,
            })
            .unwrap();
            assert!(report.all_passed(), "{kind} p={p}: {:?}", report.failures().collect::<Vec<_>>());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn omega_is_balanced(tau in prop::collection::vec(0u8..2, 0..20), odd in any::<bool>()) {
        let n = 2 * tau.len() + odd as usize;
        let w = omega_embed(&tau, n).unwrap();
        prop_assert_eq!(w.iter().filter(|&&v| v == 1).count(), w.iter().filter(|&&v| v == -1).count());
        prop_assert_eq!(w.iter().map(|&v| v as i32).sum::<i32>(), 0);
    }

    #[test]
    fn kl_matches_per_entry_sum(seed in any::<u64>(), eta in 0.0f64..0.5, sigma in 0.1f64..3.0) {
        let base = antipodal_base(24, 2, 1.3, 4.0, seed).unwrap();
        let fam = build_lecam_family(&base.x, eta).unwrap();
        let k = (seed % 24) as usize;
        let a = distance_matrix(&fam.members[k]);
        let b = distance_matrix(&base.x);
        let got = kl_gaussian_dissimilarity(&a, &b, sigma).unwrap();
        let want = per_entry_kl(a.as_matrix(), b.as_matrix(), sigma);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn code_separation_holds(m in 4usize..40, sep in 1u32..4, seed in any::<u64>()) {
        if let Ok(code) = varshamov_gilbert(m, sep as f64, seed) {
            prop_assert!(code.words.len() >= 2);
            for (i, a) in code.words.iter().enumerate() {
                for b in &code.words[i + 1..] {
                    prop_assert!(half_hamming(a, b) >= sep as f64);
                }
            }
        }
    }

    #[test]
    fn fano_members_are_centered(seed in any::<u64>(), eta in 0.0f64..0.3) {
        let base = isotropic_base(33, 3, 1.4, 4.0, seed).unwrap();
        let code = varshamov_gilbert(16, 2.0, seed).unwrap();
        let fam = build_fano_family(&base.x, eta, &e1(3), &code).unwrap();
        for y in &fam.members {
            let scale = y.points.max_abs();
            for m in y.points.col_means() {
                prop_assert!(m.abs() <= 1e-13 * scale);
            }
        }
    }
}

#[test]
fn uncentered_and_degenerate_bases_are_rejected() {
    let x = Configuration::from_rows(&[[1.0, 0.0], [2.0, 0.0], [3.0, 1.0], [4.0, 1.0]]);
    let code = varshamov_gilbert(8, 1.0, 0).unwrap();
    let _ = code;
    assert!(build_lecam_family(&x, 0.1).is_err());
}
