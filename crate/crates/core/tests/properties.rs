use std::f64::consts::PI;

use proptest::prelude::*;
use tomocheck::quadrature::linspace;
use tomocheck::tomogram::{default_xs, equispaced_thetas};
use tomocheck::uncertainty::{f_scan, CheckConfig};
use tomocheck::{GaussianState, OpticalTomogramGrid, StateModel, SymplecticPoint};

fn vacuum_grid() -> OpticalTomogramGrid {
    OpticalTomogramGrid::from_state(&GaussianState::vacuum().into(), equispaced_thetas(48), default_xs()).unwrap()
}

fn gaussian() -> impl Strategy<Value = GaussianState> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.0..0.4f64, 0.0..PI, 0.0..0.5f64).prop_map(|(q, p, r, phi, nbar)| {
        let sq = GaussianState::squeezed_vacuum(r, phi).unwrap().covariance();
        let scale = 2.0 * nbar + 1.0;
        GaussianState::new(q, p, scale * sq.sigma_qq, scale * sq.sigma_pp, scale * sq.sigma_qp).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn symplectic_density_is_homogeneous(mu in -3.0..3.0f64, nu in -3.0..3.0f64, s in 0.1..5.0f64, x in -4.0..4.0f64) {
        prop_assume!(mu.hypot(nu) > 0.05);
        let g = vacuum_grid();
        let lhs = g.symplectic_density(SymplecticPoint::new(s * mu, s * nu).unwrap(), x).unwrap();
        let rhs = g.symplectic_density(SymplecticPoint::new(mu, nu).unwrap(), x / s).unwrap() / s;
        prop_assert!((lhs - rhs).abs() < 1e-4, "{lhs} vs {rhs}");
    }

    #[test]
    fn reflected_moments(k in 0usize..24, n in 1u32..5) {
        let state: StateModel = GaussianState::new(0.3, -0.4, 0.7, 0.5, 0.1).unwrap().into();
        let g = OpticalTomogramGrid::from_state(&state, equispaced_thetas(24), default_xs()).unwrap();
        let theta = PI * k as f64 / 24.0;
        let a = g.moment(theta, n).unwrap();
        let b = g.moment(theta + PI, n).unwrap();
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert!((b - sign * a).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn number_state_rows_do_not_depend_on_phase(n in 0u32..12) {
        let g = OpticalTomogramGrid::from_state(&StateModel::Fock(tomocheck::FockState::new(n)), equispaced_thetas(12), default_xs()).unwrap();
        for row in g.rows() {
            for (a, b) in row.iter().zip(g.row(0)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_gaussian_rows_are_normalized(state in gaussian()) {
        let g = OpticalTomogramGrid::from_state(&state.into(), equispaced_thetas(16), linspace(-12.0, 12.0, 481)).unwrap();
        prop_assert!(g.validate(1e-6).into_result().is_ok());
        for k in 0..16 {
            let theta = PI * k as f64 / 16.0;
            let m1 = g.moment(theta, 1).unwrap();
            prop_assert!(g.moment(theta, 2).unwrap() >= m1 * m1);
        }
    }

    #[test]
    fn uncertainty_function_tracks_determinant(state in gaussian()) {
        let model: StateModel = state.into();
        let g = OpticalTomogramGrid::from_state(&model, equispaced_thetas(48), linspace(-12.0, 12.0, 481)).unwrap();
        let cfg = CheckConfig::default();
        let thetas: Vec<f64> = (0..12).map(|k| PI * k as f64 / 12.0).collect();
        let report = f_scan((&g).into(), &thetas, &cfg).unwrap();
        let expected = state.covariance().determinant() - 0.25;
        for (_, f) in report.f_values() {
            prop_assert!((f - expected).abs() < 1e-6, "{f} vs {expected}");
        }
        prop_assert!(report.all_pass());
        prop_assert!(report.check_invariants().is_ok());
    }
}
