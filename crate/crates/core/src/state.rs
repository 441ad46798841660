//! Closed-form single-mode states.
//!
//! Every state here knows its exact optical tomogram, its second moments and
//! its Wigner function. Units are ħ = 1 with vacuum quadrature variance 1/2,
//! and Wigner functions are normalized so that they integrate to 2π over the
//! phase plane (the tomogram is the Wigner function integrated along a line
//! with measure dq dp / 2π).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};

/// Tolerance applied to the determinant bound when checking physicality.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-12;

/// Second moments of a single-mode state: (σqq, σpp, σqp).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub sigma_qq: f64,
    pub sigma_pp: f64,
    pub sigma_qp: f64,
}

impl Covariance {
    pub fn determinant(&self) -> f64 {
        self.sigma_qq * self.sigma_pp - self.sigma_qp * self.sigma_qp
    }

    /// Variance of the rotated quadrature `X = μ q + ν p`.
    pub fn quadrature_variance(&self, mu: f64, nu: f64) -> f64 {
        mu * mu * self.sigma_qq + nu * nu * self.sigma_pp + 2.0 * mu * nu * self.sigma_qp
    }
}

/// Gaussian state with means (q̄, p̄) and covariance (σqq, σpp, σqp).
///
/// Vacuum, coherent, squeezed and thermal states are all built through the
/// constructors below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianFields", into = "GaussianFields")]
pub struct GaussianState {
    mean_q: f64,
    mean_p: f64,
    cov: Covariance,
}

#[derive(Serialize, Deserialize)]
struct GaussianFields {
    #[serde(default)]
    mean_q: f64,
    #[serde(default)]
    mean_p: f64,
    sigma_qq: f64,
    sigma_pp: f64,
    sigma_qp: f64,
}

impl TryFrom<GaussianFields> for GaussianState {
    type Error = TomoError;

    fn try_from(f: GaussianFields) -> Result<Self> {
        GaussianState::new(f.mean_q, f.mean_p, f.sigma_qq, f.sigma_pp, f.sigma_qp)
    }
}

impl From<GaussianState> for GaussianFields {
    fn from(g: GaussianState) -> Self {
        GaussianFields {
            mean_q: g.mean_q,
            mean_p: g.mean_p,
            sigma_qq: g.cov.sigma_qq,
            sigma_pp: g.cov.sigma_pp,
            sigma_qp: g.cov.sigma_qp,
        }
    }
}

impl GaussianState {
    pub fn new(mean_q: f64, mean_p: f64, sigma_qq: f64, sigma_pp: f64, sigma_qp: f64) -> Result<Self> {
        let all = [mean_q, mean_p, sigma_qq, sigma_pp, sigma_qp];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(TomoError::InvalidParameter(
                "Gaussian state parameters must be finite".into(),
            ));
        }
        if sigma_qq <= 0.0 || sigma_pp <= 0.0 {
            return Err(TomoError::InvalidParameter(format!(
                "variances must be positive (sigma_qq = {sigma_qq}, sigma_pp = {sigma_pp})"
            )));
        }
        let cov = Covariance {
            sigma_qq,
            sigma_pp,
            sigma_qp,
        };
        let det = cov.determinant();
        if det < 0.25 - PHYSICALITY_TOLERANCE {
            return Err(TomoError::Unphysical { determinant: det });
        }
        Ok(GaussianState {
            mean_q,
            mean_p,
            cov,
        })
    }

    pub fn vacuum() -> Self {
        GaussianState {
            mean_q: 0.0,
            mean_p: 0.0,
            cov: Covariance {
                sigma_qq: 0.5,
                sigma_pp: 0.5,
                sigma_qp: 0.0,
            },
        }
    }

    /// Coherent state |α⟩: means (√2 Re α, √2 Im α), vacuum covariance.
    pub fn coherent(alpha_re: f64, alpha_im: f64) -> Result<Self> {
        let s2 = std::f64::consts::SQRT_2;
        GaussianState::new(s2 * alpha_re, s2 * alpha_im, 0.5, 0.5, 0.0)
    }

    /// Squeezed vacuum S(ξ)|0⟩ with ξ = r e^{iφ}. For φ = 0 the q quadrature
    /// is squeezed to e^{-2r}/2; the squeezed axis sits at angle φ/2.
    pub fn squeezed_vacuum(r: f64, phi: f64) -> Result<Self> {
        let a = (-2.0 * r).exp() / 2.0;
        let b = (2.0 * r).exp() / 2.0;
        let (s, c) = (phi / 2.0).sin_cos();
        GaussianState::new(
            0.0,
            0.0,
            c * c * a + s * s * b,
            s * s * a + c * c * b,
            c * s * (a - b),
        )
    }

    /// Thermal state with mean photon number n̄.
    pub fn thermal(nbar: f64) -> Result<Self> {
        if nbar.is_nan() || nbar < 0.0 {
            return Err(TomoError::InvalidParameter(format!(
                "mean photon number must be non-negative, got {nbar}"
            )));
        }
        let v = (2.0 * nbar + 1.0) / 2.0;
        GaussianState::new(0.0, 0.0, v, v, 0.0)
    }

    pub fn mean_q(&self) -> f64 {
        self.mean_q
    }

    pub fn mean_p(&self) -> f64 {
        self.mean_p
    }

    pub fn covariance(&self) -> Covariance {
        self.cov
    }
}

/// Number state |n⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockState {
    pub n: u32,
}

impl FockState {
    pub fn new(n: u32) -> Self {
        FockState { n }
    }
}

/// Any of the shipped analytic states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateModel {
    Gaussian(GaussianState),
    Fock(FockState),
}

impl From<GaussianState> for StateModel {
    fn from(g: GaussianState) -> Self {
        StateModel::Gaussian(g)
    }
}

impl From<FockState> for StateModel {
    fn from(f: FockState) -> Self {
        StateModel::Fock(f)
    }
}

impl StateModel {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            // serde wraps the TryFrom message; keep it readable
            TomoError::Parse(e.to_string())
        })
    }

    /// Mean of the quadrature X(θ) = q cos θ + p sin θ.
    pub fn quadrature_mean(&self, theta: f64) -> f64 {
        match self {
            StateModel::Gaussian(g) => {
                let (s, c) = theta.sin_cos();
                g.mean_q * c + g.mean_p * s
            }
            StateModel::Fock(_) => 0.0,
        }
    }

    /// Variance of X(θ).
    pub fn quadrature_variance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.exact_covariance().quadrature_variance(c, s)
    }

    /// Exact optical tomogram W(X, θ).
    pub fn tomogram_density(&self, theta: f64, x: f64) -> f64 {
        match self {
            StateModel::Gaussian(_) => normal_density(
                x,
                self.quadrature_mean(theta),
                self.quadrature_variance(theta),
            ),
            StateModel::Fock(f) => {
                let psi = hermite_function(f.n, x);
                psi * psi
            }
        }
    }

    pub fn exact_covariance(&self) -> Covariance {
        match self {
            StateModel::Gaussian(g) => g.cov,
            StateModel::Fock(f) => {
                let v = (2.0 * f.n as f64 + 1.0) / 2.0;
                Covariance {
                    sigma_qq: v,
                    sigma_pp: v,
                    sigma_qp: 0.0,
                }
            }
        }
    }

    /// Exact Wigner function, normalized to ∫∫ W dq dp = 2π.
    pub fn exact_wigner(&self, q: f64, p: f64) -> f64 {
        match self {
            StateModel::Gaussian(g) => {
                let c = g.cov;
                let det = c.determinant();
                let dq = q - g.mean_q;
                let dp = p - g.mean_p;
                // d^T Σ^{-1} d
                let quad = (c.sigma_pp * dq * dq - 2.0 * c.sigma_qp * dq * dp + c.sigma_qq * dp * dp) / det;
                (-0.5 * quad).exp() / det.sqrt()
            }
            StateModel::Fock(f) => {
                let r2 = q * q + p * p;
                let sign = if f.n % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * sign * laguerre(f.n, 2.0 * r2) * (-r2).exp()
            }
        }
    }
}

/// Normal density with the given mean and variance.
pub fn normal_density(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

/// Normalized Hermite-Gaussian ψₙ(x) (oscillator eigenfunction with ħ = m = ω = 1).
///
/// Uses the three-term recurrence on normalized functions so intermediate
/// values stay O(1) for large n.
pub fn hermite_function(n: u32, x: f64) -> f64 {
    let psi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n == 0 {
        return psi0;
    }
    let mut prev = psi0;
    let mut cur = std::f64::consts::SQRT_2 * x * psi0;
    for k in 1..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Laguerre polynomial Lₙ(t).
pub fn laguerre(n: u32, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 - t;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - t) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{linspace, trapezoid};

    fn vacuum() -> StateModel {
        GaussianState::vacuum().into()
    }

    #[test]
    fn vacuum_density_at_origin() {
        let v = vacuum().tomogram_density(0.0, 0.0);
        assert!((v - 1.0 / PI.sqrt()).abs() < 1e-15);
        let f0 = StateModel::from(FockState::new(0));
        assert!((f0.tomogram_density(1.3, 0.0) - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fock_one_density_matches_closed_form() {
        let f1 = StateModel::from(FockState::new(1));
        let expected = 2.0 * (-1.0f64).exp() / PI.sqrt();
        assert!((f1.tomogram_density(0.0, 1.0) - expected).abs() < 1e-15);
        assert!((expected - 0.415_107).abs() < 1e-6);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let xs = linspace(-12.0, 12.0, 2401);
        let dx = xs[1] - xs[0];
        for (m, n) in [(0u32, 0u32), (3, 3), (10, 10), (2, 5), (7, 8), (40, 40)] {
            let f: Vec<f64> = xs
                .iter()
                .map(|&x| hermite_function(m, x) * hermite_function(n, x))
                .collect();
            let expected = if m == n { 1.0 } else { 0.0 };
            assert!((trapezoid(&f, dx) - expected).abs() < 1e-10, "({m},{n})");
        }
    }

    #[test]
    fn hermite_recurrence_is_finite_for_large_n() {
        for &x in &[0.0, 3.0, 10.0, 14.0] {
            let v = hermite_function(100, x);
            assert!(v.is_finite());
            assert!(v.abs() < 1.0);
        }
    }

    #[test]
    fn covariance_of_presets() {
        assert_eq!(
            vacuum().exact_covariance(),
            Covariance { sigma_qq: 0.5, sigma_pp: 0.5, sigma_qp: 0.0 }
        );
        let c = StateModel::from(FockState::new(1)).exact_covariance();
        assert_eq!((c.sigma_qq, c.sigma_pp, c.sigma_qp), (1.5, 1.5, 0.0));
        let t = StateModel::from(GaussianState::thermal(1.0).unwrap()).exact_covariance();
        assert_eq!((t.sigma_qq, t.sigma_pp, t.sigma_qp), (1.5, 1.5, 0.0));
    }

    #[test]
    fn squeezed_state_saturates_the_bound() {
        for &(r, phi) in &[(0.5, 0.0), (1.0, 0.7), (0.3, 2.5)] {
            let g = GaussianState::squeezed_vacuum(r, phi).unwrap();
            assert!((g.covariance().determinant() - 0.25).abs() < 1e-12);
        }
        let g = GaussianState::squeezed_vacuum(0.5, 0.0).unwrap();
        assert!((g.covariance().sigma_qq - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        assert_eq!(g.covariance().sigma_qp, 0.0);
    }

    #[test]
    fn unphysical_gaussian_is_rejected() {
        let err = GaussianState::new(0.0, 0.0, 0.4, 0.5, 0.0).unwrap_err();
        assert!(matches!(err, TomoError::Unphysical { .. }));
        assert!(err.to_string().contains("physicality"));
        assert!(GaussianState::new(0.0, 0.0, -1.0, 0.5, 0.0).is_err());
        assert!(GaussianState::new(0.0, 0.0, 0.5, 0.5, 1e-7).is_ok());
        // boundary within tolerance
        assert!(GaussianState::new(0.0, 0.0, 0.5, 0.5 - 1e-13, 0.0).is_ok());
    }

    #[test]
    fn wigner_values() {
        assert!((vacuum().exact_wigner(0.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((StateModel::from(FockState::new(1)).exact_wigner(0.0, 0.0) + 2.0).abs() < 1e-15);
        assert!(vacuum().exact_wigner(10.0, 10.0) < 1e-80);
    }

    #[test]
    fn wigner_integrates_to_two_pi() {
        let xs = linspace(-8.0, 8.0, 321);
        let dx = xs[1] - xs[0];
        let states: Vec<StateModel> = vec![
            vacuum(),
            GaussianState::squeezed_vacuum(0.5, 1.0).unwrap().into(),
            GaussianState::coherent(1.0, -0.5).unwrap().into(),
            FockState::new(1).into(),
            FockState::new(4).into(),
        ];
        for s in states {
            let rows: Vec<f64> = xs
                .iter()
                .map(|&q| {
                    let row: Vec<f64> = xs.iter().map(|&p| s.exact_wigner(q, p)).collect();
                    trapezoid(&row, dx)
                })
                .collect();
            assert!((trapezoid(&rows, dx) - 2.0 * PI).abs() < 1e-9, "{s:?}");
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = StateModel::from_json(
            r#"{"kind":"gaussian","mean_q":0.5,"mean_p":0,"sigma_qq":1,"sigma_pp":1,"sigma_qp":0.5}"#,
        )
        .unwrap();
        let back = StateModel::from_json(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(g, back);
        let f = StateModel::from_json(r#"{"kind":"fock","n":3}"#).unwrap();
        assert_eq!(f, StateModel::Fock(FockState::new(3)));
        let bad = StateModel::from_json(
            r#"{"kind":"gaussian","mean_q":0,"mean_p":0,"sigma_qq":0.4,"sigma_pp":0.5,"sigma_qp":0}"#,
        )
        .unwrap_err();
        assert!(bad.to_string().contains("physicality"), "{bad}");
    }
}
