use orderhull_core::samplers::{sample_set, sample_unit_direction};
use orderhull_core::{
    mean_width_batch, mean_width_estimate, support_expectation_estimate, support_value, Direction, MeanWidthConfig,
    ModelSpec, Params, Reduction, RngStream, Role, StreamId,
};
use proptest::prelude::*;

#[test]
fn gaussian_full_quadratic_mean_width_is_one() {
    // With ℓ = N and q = 2, h(θ) is the empirical second moment of a
    // standard Gaussian marginal, so its mean is 1 up to O(1/N).
    let params = Params::new(8, 10_000, 10_000, 2.0).unwrap();
    let cfg = MeanWidthConfig { n_directions: 16, n_replicates: 100, antithetic: false };
    let est = mean_width_estimate(ModelSpec::Gaussian, &params, &cfg, 77).unwrap();
    assert!((est.value - 1.0).abs() <= 3.0 * est.std_error, "{est:?}");
    assert!(est.std_error > 0.0 && est.std_error < 0.01);
}

#[test]
fn gaussian_single_point_mean_width() {
    // N = ℓ = q = 1: E|⟨g, θ⟩| = sqrt(2/π) for every θ.
    let params = Params::new(5, 1, 1, 1.0).unwrap();
    let cfg = MeanWidthConfig { n_directions: 8, n_replicates: 4000, antithetic: true };
    let est = mean_width_estimate(ModelSpec::Gaussian, &params, &cfg, 5).unwrap();
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    assert!((est.value - exact).abs() <= 3.0 * est.std_error, "{est:?}");
}

#[test]
fn batch_matches_single_estimates() {
    let cfg = MeanWidthConfig { n_directions: 6, n_replicates: 12, antithetic: false };
    let pairs = [(1, 1.0), (4, 3.0), (32, 2.0)];
    let batch =
        mean_width_batch(ModelSpec::ConeLp { p: 3.0 }, 6, 32, &pairs, &cfg, 8, 0, Reduction::FixedOrder).unwrap();
    for (&(ell, q), b) in pairs.iter().zip(&batch) {
        let single =
            mean_width_estimate(ModelSpec::ConeLp { p: 3.0 }, &Params::new(6, 32, ell, q).unwrap(), &cfg, 8).unwrap();
        assert_eq!(single.value.to_bits(), b.value.to_bits());
        assert_eq!(single.std_error.to_bits(), b.std_error.to_bits());
    }
}

#[test]
fn batch_estimates_are_ordered_like_the_pathwise_values() {
    let cfg = MeanWidthConfig { n_directions: 8, n_replicates: 20, antithetic: false };
    let pairs = [(1, 1.0), (1, 2.0), (8, 2.0), (64, 2.0), (64, 4.0)];
    let r = mean_width_batch(ModelSpec::Gaussian, 4, 64, &pairs, &cfg, 1, 0, Reduction::Unordered).unwrap();
    assert!(r[0].value <= r[1].value);
    assert!(r[1].value >= r[2].value && r[2].value >= r[3].value);
    assert!(r[3].value <= r[4].value);
}

#[test]
fn fixed_direction_and_mean_width_agree_for_gaussian_points() {
    let params = Params::new(6, 128, 8, 2.0).unwrap();
    let theta = Direction::normalize(vec![1.0, -1.0, 2.0, 0.0, 0.5, 3.0]).unwrap();
    let fixed = support_expectation_estimate(ModelSpec::Gaussian, &params, &theta, 3000, 10).unwrap();
    let cfg = MeanWidthConfig { n_directions: 4, n_replicates: 1000, antithetic: false };
    let width = mean_width_estimate(ModelSpec::Gaussian, &params, &cfg, 11).unwrap();
    let combined = (fixed.std_error.powi(2) + width.std_error.powi(2)).sqrt();
    assert!((fixed.value - width.value).abs() <= 4.0 * combined);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn support_is_homogeneous_under_power_of_two_scaling(
        n in 1usize..12, num_points in 1usize..80, k in -3i32..4, seed in 0u64..500, q in 1.0f64..6.0,
    ) {
        let params = Params::new(n, num_points, 1, 1.0).unwrap();
        let mut rng = RngStream::new(seed, StreamId::new(0, 0, Role::Samples)).unwrap();
        let set = sample_set(ModelSpec::Gaussian, &params, &mut rng).unwrap();
        let mut drng = RngStream::new(seed, StreamId::new(0, 0, Role::Directions)).unwrap();
        let theta = sample_unit_direction(n, &mut drng).unwrap();
        let c = 2f64.powi(k);
        let ell = 1 + num_points / 2;
        let base = support_value(&set, &theta, ell, q).unwrap();
        let scaled = support_value(&set.scaled(c), &theta, ell, q).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-14 * c * base.max(1e-300));
    }

    #[test]
    fn support_is_even(n in 1usize..10, num_points in 1usize..60, seed in 0u64..500) {
        let params = Params::new(n, num_points, 1, 1.0).unwrap();
        let mut rng = RngStream::new(seed, StreamId::new(1, 0, Role::Samples)).unwrap();
        let set = sample_set(ModelSpec::ConeLp { p: 1.3 }, &params, &mut rng).unwrap();
        let mut drng = RngStream::new(seed, StreamId::new(1, 0, Role::Directions)).unwrap();
        let theta = sample_unit_direction(n, &mut drng).unwrap();
        let flipped = Direction::from_unit(theta.coords().iter().map(|x| -x).collect()).unwrap();
        let ell = num_points.div_ceil(3);
        prop_assert_eq!(
            support_value(&set, &theta, ell, 2.5).unwrap(),
            support_value(&set, &flipped, ell, 2.5).unwrap()
        );
    }
}
