use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use statrs::distribution::{ContinuousCDF, Normal};
use tomocheck::tomogram::{QuadratureRecord, SampleMetadata};
use tomocheck::uncertainty::{variance_at, CheckConfig};
use tomocheck::{acquire, histogram_tomogram, AcquisitionPlan, FockState, GaussianState, QuadratureSampleSet, StateModel};

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n
}

fn vacuum_samples(phases: Vec<f64>, n: usize, seed: u64, noise: f64) -> QuadratureSampleSet {
    acquire(&GaussianState::vacuum().into(), &AcquisitionPlan::new(phases, n, seed, noise).unwrap())
}

#[test]
fn vacuum_variance_within_three_standard_errors() {
    let set = vacuum_samples(vec![0.0], 100_000, 42, 0.0);
    let xs = set.phase_values(0.0, 1e-6).unwrap();
    let se = (2.0 * 0.25 / 100_000.0f64).sqrt();
    assert!((se - 0.00224).abs() < 1e-5);
    assert!((sample_variance(&xs) - 0.5).abs() < 3.0 * se);
}

#[test]
fn detector_noise_adds_variance() {
    let set = vacuum_samples(vec![0.0], 100_000, 42, 0.3);
    let xs = set.phase_values(0.0, 1e-6).unwrap();
    let se = (2.0 * 0.59f64 * 0.59 / 100_000.0).sqrt();
    assert!((sample_variance(&xs) - 0.59).abs() < 3.0 * se);
}

#[test]
fn vacuum_samples_pass_kolmogorov_smirnov() {
    let set = vacuum_samples(vec![0.0], 100_000, 7, 0.0);
    let mut xs = set.phase_values(0.0, 1e-6).unwrap();
    xs.sort_by(f64::total_cmp);
    let cdf = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf.cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 0.006, "KS distance {d}");
}

#[test]
fn gaussian_moments_converge() {
    let state: StateModel = GaussianState::new(0.5, -0.3, 0.8, 0.45, 0.2).unwrap().into();
    let set = acquire(&state, &AcquisitionPlan::new(vec![0.0, 0.9, 2.0], 50_000, 3, 0.0).unwrap());
    for theta in [0.0, 0.9, 2.0] {
        let m1 = set.moment(theta, 1, 1e-6).unwrap();
        assert!((m1.estimate - state.quadrature_mean(theta)).abs() < 4.0 * m1.standard_error);
        let xs = set.phase_values(theta, 1e-6).unwrap();
        let var = state.quadrature_variance(theta);
        let se = (2.0 * var * var / xs.len() as f64).sqrt();
        assert!((sample_variance(&xs) - var).abs() < 4.0 * se);
    }
}

#[test]
fn number_state_samples_have_expected_variance() {
    for n in [1u32, 3, 6] {
        let state = StateModel::Fock(FockState::new(n));
        let set = acquire(&state, &AcquisitionPlan::new(vec![0.4], 40_000, 11, 0.0).unwrap());
        let xs = set.phase_values(0.4, 1e-6).unwrap();
        let var = (2.0 * n as f64 + 1.0) / 2.0;
        // fourth moment of |ψ_n|² is 3(2n² + 2n + 1)/4
        let m4 = 0.75 * (2.0 * (n * n) as f64 + 2.0 * n as f64 + 1.0);
        let se = ((m4 - var * var) / xs.len() as f64).sqrt();
        assert!((sample_variance(&xs) - var).abs() < 4.0 * se, "n = {n}");
    }
}

#[test]
fn second_moment_from_samples() {
    let set = vacuum_samples(vec![0.0], 100_000, 5, 0.0);
    let m = set.moment(0.0, 2, 1e-6).unwrap();
    assert_eq!(m.count, 100_000);
    assert!((m.estimate - 0.5).abs() < 3.0 * m.standard_error);
}

#[test]
fn bootstrap_error_shrinks_with_sample_size() {
    let cfg = CheckConfig::default();
    let small = vacuum_samples(vec![0.0], 20_000, 9, 0.0);
    let large = vacuum_samples(vec![0.0], 40_000, 9, 0.0);
    let a = variance_at((&small).into(), 0.0, &cfg).unwrap().standard_error;
    let b = variance_at((&large).into(), 0.0, &cfg).unwrap().standard_error;
    let ratio = b / a;
    assert!((ratio - 0.5f64.sqrt()).abs() < 0.2 * 0.5f64.sqrt(), "ratio {ratio}");
    // plug-in value for comparison
    let expected = (2.0 * 0.25 / 40_000.0f64).sqrt();
    assert!((b - expected).abs() < 0.2 * expected);
}

#[test]
fn sample_set_reflection_and_required_counts() {
    let records = (0..2000)
        .map(|i| QuadratureRecord {
            theta: if i % 2 == 0 { 0.0 } else { PI },
            x: (i as f64 * 0.37).sin(),
        })
        .collect();
    let set = QuadratureSampleSet::new(records, SampleMetadata::default());
    let vals = set.phase_values(0.0, 1e-6).unwrap();
    assert_eq!(vals.len(), 2000);
    assert!(set.phase_values(FRAC_PI_4, 1e-6).is_err());
}

#[test]
fn histogram_matches_density_with_many_samples() {
    let set = vacuum_samples(vec![0.0], 1_000_000, 1, 0.0);
    let g = histogram_tomogram(&set, 12, 200, (-6.0, 6.0)).unwrap();
    assert_eq!(g.thetas().len(), 1);
    let state: StateModel = GaussianState::vacuum().into();
    let sup = g
        .xs()
        .iter()
        .zip(g.row(0))
        .map(|(&x, &v)| (v - state.tomogram_density(0.0, x)).abs())
        .fold(0.0, f64::max);
    assert!(sup < 0.02, "sup error {sup}");
}

#[test]
fn histogram_moment_approaches_sample_moment() {
    let set = vacuum_samples(vec![FRAC_PI_2], 200_000, 2, 0.0);
    let exact = set.moment(FRAC_PI_2, 2, 1e-6).unwrap().estimate;
    let errors: Vec<f64> = [36usize, 71]
        .iter()
        .map(|&bins| {
            let g = histogram_tomogram(&set, 4, bins, (-5.0, 5.0)).unwrap();
            (g.moment(FRAC_PI_2, 2).unwrap() - exact).abs()
        })
        .collect();
    assert!(errors[1] < errors[0] / 2.0, "{errors:?}");
}
