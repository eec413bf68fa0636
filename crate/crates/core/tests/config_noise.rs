use noisy_mds::config::{
    apply_condition_scaling, center, centered_singular_values, check_membership, condition_scales, distance_matrix,
    sample_unit_ball, Configuration,
};
use noisy_mds::linalg::{random_orthogonal, Matrix, SymMatrix};
use noisy_mds::noise::{
    apply_noise_model, conditional_moment_bound, sample_xi_matrix, MomentBound, NoiseModel, NoiseSpec, XiDistribution,
    XiFamily,
};
use noisy_mds::rng::Stream;
use proptest::prelude::*;

#[test]
fn ball_mean_is_near_zero() {
    let n = 100_000;
    let x = sample_unit_ball(n, 3, 2024);
    // Var = 1/5 per coordinate for the uniform 3-ball.
    let clt = 3.0 * (0.2 / n as f64).sqrt();
    for m in x.points.col_means() {
        assert!(m.abs() <= clt.max(0.02), "{m}");
    }
}

#[test]
fn condition_scaling_examples() {
    assert_eq!(condition_scales(3, 2.0).unwrap(), vec![0.5, 1.25, 2.0]);
    let x = sample_unit_ball(400, 3, 1);
    assert_eq!(apply_condition_scaling(&x, 1.0).unwrap().points, x.points);
    let before = centered_singular_values(&x.points);
    let after = centered_singular_values(&apply_condition_scaling(&x, 2.0).unwrap().points);
    assert!(after[0] / after[2] >= before[0] / before[2]);
}

#[test]
fn centering_examples() {
    let x = Configuration::from_rows(&[[0.0], [1.0], [2.0]]);
    assert_eq!(center(&x).points.as_slice(), &[-1.0, 0.0, 1.0]);
    let c = center(&sample_unit_ball(50, 2, 4));
    assert!(center(&c).points.sub(&c.points).max_abs() < 1e-14);
    let flat = Configuration::from_rows(&[[2.0, 3.0], [2.0, 3.0], [2.0, 3.0]]);
    assert_eq!(center(&flat).points.max_abs(), 0.0);
    assert_eq!(distance_matrix(&Configuration::from_rows(&[[5.0]])).n(), 1);
}

#[test]
fn membership_of_a_line_and_a_large_ellipsoid() {
    let x = Configuration::from_rows(&[[0.0], [1.0], [2.0]]);
    let r = check_membership(&x, 2.0, 10.0).unwrap();
    assert!((r.s_max - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);

    // Uniform 3-ball rows have covariance I/5, so HX/√n has singular values
    // near 1/√5 and S scales them further.
    let ball = sample_unit_ball(20_000, 3, 8);
    let x = apply_condition_scaling(&ball, 1.5).unwrap();
    let fit = check_membership(&x, 2.0, 10.0).unwrap().kappa_fit;
    let r = check_membership(&x, fit * 1.01, 10.0).unwrap();
    assert!(r.in_class);
}

#[test]
fn gaussian_variance_and_t_kurtosis() {
    let n = 2000;
    let xi = sample_xi_matrix(&XiDistribution::gaussian(1.0), n, 5);
    let m = xi.as_matrix();
    let vals: Vec<f64> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    assert!((var - 1.0).abs() < 0.05, "{var}");

    let mut s = Stream::new(9);
    let draws: Vec<f64> = (0..200_000).map(|_| s.student_t(5.0)).collect();
    let m2 = draws.iter().map(|v| v * v).sum::<f64>() / draws.len() as f64;
    let m4 = draws.iter().map(|v| v.powi(4)).sum::<f64>() / draws.len() as f64;
    assert!(m4 / (m2 * m2) - 3.0 > 0.0);
}

#[test]
fn moment_bound_examples() {
    let spec = |model, xi| NoiseSpec { model, xi };
    let g = XiDistribution::gaussian(0.7);
    match conditional_moment_bound(&spec(NoiseModel::Additive, g), 1.0, 2.0) {
        MomentBound::Finite(v) => assert!((v - 0.7).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    let t3 = XiDistribution::student_t(3.0, 1.0);
    assert_eq!(
        conditional_moment_bound(&spec(NoiseModel::Additive, t3), 1.0, 4.0),
        MomentBound::Unbounded
    );
    match conditional_moment_bound(&spec(NoiseModel::Multiplicative, XiDistribution::gaussian(1.0)), 2.0, 2.0) {
        MomentBound::Finite(v) => assert!((v - 2.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn moment_bound_dominates_monte_carlo() {
    let mut s = Stream::new(77);
    for model in NoiseModel::ALL {
        let xi = XiDistribution::student_t(7.0, 0.3);
        let spec = NoiseSpec { model, xi };
        let bound = match conditional_moment_bound(&spec, 1.0, 2.0) {
            MomentBound::Finite(b) => b,
            MomentBound::Unbounded => panic!("t7 has a second moment"),
        };
        for delta in [0.0, 0.3, 1.0] {
            let m = 100_000;
            let second: f64 = (0..m)
                .map(|_| {
                    let e = model.observe(delta, xi.draw(&mut s)) - delta;
                    e * e
                })
                .sum::<f64>()
                / m as f64;
            assert!(second.sqrt() <= bound * 1.02, "{model} δ={delta}: {} > {bound}", second.sqrt());
        }
    }
}

#[test]
fn noise_spec_text_round_trip() {
    let spec = NoiseSpec {
        model: NoiseModel::AbsMultiplicative,
        xi: XiDistribution::new(XiFamily::StudentT { dof: 5.0 }, 0.25).unwrap().with_mean_shift(0.1),
    };
    let text = spec.to_string();
    assert_eq!(text, "model=abs_multiplicative family=student_t dof=5 sigma=0.25 gamma=0.1");
    assert_eq!(text.parse::<NoiseSpec>().unwrap(), spec);
}

fn noisy_pair(n: usize, seed: u64, model: NoiseModel, q: f64) -> (Matrix, Matrix, Matrix) {
    let x = sample_unit_ball(n, 2, seed);
    let delta = distance_matrix(&x);
    let xi = sample_xi_matrix(&XiDistribution::student_t(q, 0.5), n, seed ^ 1);
    let spec = NoiseSpec { model, xi: XiDistribution::student_t(q, 0.5) };
    let d = apply_noise_model(&spec, &delta, &xi).unwrap();
    (delta.as_matrix().clone(), xi.into_matrix(), d.as_matrix().clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noisy_output_is_symmetric_and_hollow(
        n in 2usize..20, seed in any::<u64>(), model_index in 0usize..6, q in 3.0f64..10.0,
    ) {
        let model = NoiseModel::ALL[model_index];
        let (_, _, d) = noisy_pair(n, seed, model, q);
        for i in 0..n {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..n {
                prop_assert_eq!(d[(i, j)], d[(j, i)]);
            }
        }
        if matches!(model, NoiseModel::ThreshAdditive | NoiseModel::ThreshMultiplicative) {
            prop_assert!(d.as_slice().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn multiplicative_family_identities(n in 2usize..15, seed in any::<u64>()) {
        let (delta, xi, mult) = noisy_pair(n, seed, NoiseModel::Multiplicative, 5.0);
        let (_, _, abs_mult) = noisy_pair(n, seed, NoiseModel::AbsMultiplicative, 5.0);
        let (_, _, thresh) = noisy_pair(n, seed, NoiseModel::ThreshMultiplicative, 5.0);
        for i in 0..n {
            for j in 0..n {
                // δ(2ξ + ξ²) − δξ
                let extra = delta[(i, j)] * (xi[(i, j)] + xi[(i, j)] * xi[(i, j)]);
                prop_assert!((abs_mult[(i, j)] - mult[(i, j)] - extra).abs() <= 1e-12 * (1.0 + abs_mult[(i, j)].abs()));
                if xi[(i, j)] >= -1.0 {
                    prop_assert_eq!(thresh[(i, j)], mult[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic(n in 1usize..30, seed in any::<u64>()) {
        let dist = XiDistribution::student_t(7.0, 0.25);
        prop_assert_eq!(sample_xi_matrix(&dist, n, seed), sample_xi_matrix(&dist, n, seed));
    }

    #[test]
    fn membership_s_values_are_rotation_invariant(seed in any::<u64>()) {
        let x = sample_unit_ball(60, 3, seed);
        let q = random_orthogonal(3, seed.wrapping_add(1));
        let y = Configuration::new(x.points.matmul(&q), "rotated");
        let a = check_membership(&x, 3.0, 2.0).unwrap();
        let b = check_membership(&y, 3.0, 2.0).unwrap();
        prop_assert!((a.s_max - b.s_max).abs() <= 1e-9);
        prop_assert!((a.s_min - b.s_min).abs() <= 1e-9);
    }
}

#[test]
fn zero_scale_xi_is_zero() {
    let xi = sample_xi_matrix(&XiDistribution::gaussian(0.0), 6, 3);
    assert_eq!(xi, SymMatrix::zeros(6));
}
