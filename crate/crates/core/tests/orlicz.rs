use orderhull_core::orlicz::{
    legendre_conjugate, luxemburg_norm, orlicz_inverse, EmpiricalDistribution, OrliczFunction,
};
use orderhull_core::samplers::sample_gaussian_vector;
use orderhull_core::stats::MeanSummary;
use orderhull_core::{orderstat_power_mean, RngStream, Role, StreamId};
use proptest::prelude::*;

fn gaussian_m(ell: f64) -> OrliczFunction {
    OrliczFunction::from_distribution(&EmpiricalDistribution::gaussian_abs(), ell).unwrap()
}

#[test]
fn certificates_hold_for_built_functions() {
    let laws = [
        EmpiricalDistribution::gaussian_abs(),
        EmpiricalDistribution::gaussian_abs_power(3.0).unwrap(),
        EmpiricalDistribution::constant(2.0).unwrap(),
        EmpiricalDistribution::from_samples(vec![0.1, 0.4, 0.4, 2.0, 7.5]).unwrap(),
    ];
    for law in &laws {
        for ell in [1.0, 3.0, 50.0] {
            let m = OrliczFunction::from_distribution(law, ell).unwrap();
            assert_eq!(m.eval(0.0), 0.0);
            let cert = m.certificate();
            assert!(cert.values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }
    for (ell, q) in [(1.0, 1.0), (4.0, 2.0), (64.0, 8.0)] {
        OrliczFunction::gaussian_q(ell, q).unwrap();
    }
}

#[test]
fn biconjugate_recovers_the_function() {
    // M**(t) = sup_x (tx − M*(x)), maximized over a grid of slopes.
    let m = gaussian_m(2.0);
    let slopes: Vec<f64> = (1..400).map(|i| 0.797 * i as f64 / 400.0).collect();
    let conj: Vec<f64> = slopes.iter().map(|&x| legendre_conjugate(&m, x).unwrap()).collect();
    for t in [0.8, 1.5, 3.0, 6.0] {
        let bi = slopes.iter().zip(&conj).map(|(x, c)| t * x - c).fold(f64::NEG_INFINITY, f64::max);
        let direct = m.eval(t);
        assert!((bi - direct).abs() <= 0.01 * direct, "t = {t}: {bi} vs {direct}");
    }
}

#[test]
fn norm_of_ones_is_reciprocal_inverse() {
    for ell in [1.0, 4.0, 16.0] {
        let m = gaussian_m(ell);
        for num_points in [20usize, 100, 1000] {
            let norm = luxemburg_norm(&m, &vec![1.0; num_points]).unwrap();
            let inv = orlicz_inverse(&m, 1.0 / num_points as f64).unwrap();
            assert!((norm * inv - 1.0).abs() <= 1e-8, "ell {ell} N {num_points}");
        }
    }
}

#[test]
fn orlicz_norm_tracks_top_order_statistics() {
    // (1/ℓ)‖1_N‖_{M_ℓ} against the Monte Carlo mean of (1/ℓ) Σ_{k≤ℓ} kmax |g_i|.
    let mut rng = RngStream::new(31, StreamId::new(0, 0, Role::Samples)).unwrap();
    for num_points in [64usize, 512, 4096] {
        for ell in [1usize, 8, num_points / 8, num_points] {
            let m = gaussian_m(ell as f64);
            let predicted = luxemburg_norm(&m, &vec![1.0; num_points]).unwrap() / ell as f64;
            let draws: Vec<f64> = (0..300)
                .map(|_| {
                    let g = sample_gaussian_vector(num_points, &mut rng).unwrap();
                    orderstat_power_mean(&g, ell, 1.0).unwrap()
                })
                .collect();
            let mc = MeanSummary::from_slice(&draws).mean;
            let ratio = mc / predicted;
            assert!((0.25..=4.0).contains(&ratio), "N {num_points} ell {ell}: ratio {ratio}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn luxemburg_is_a_norm(
        x in prop::collection::vec(-5.0f64..5.0, 1..12),
        y in prop::collection::vec(-5.0f64..5.0, 12),
        k in -4i32..5,
    ) {
        let m = gaussian_m(3.0);
        let y = &y[..x.len()];
        let nx = luxemburg_norm(&m, &x).unwrap();
        let ny = luxemburg_norm(&m, y).unwrap();
        let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let ns = luxemburg_norm(&m, &sum).unwrap();
        prop_assert!(ns <= (nx + ny) * (1.0 + 1e-9) + 1e-12);
        let c = 2f64.powi(k);
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let nc = luxemburg_norm(&m, &scaled).unwrap();
        prop_assert_eq!(nc, c * nx);
    }
}
