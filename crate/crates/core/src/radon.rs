//! Radon transforms between Wigner functions and optical tomograms.
//!
//! Forward: W(X, θ) = (1/2π) ∫ W(X cos θ − t sin θ, X sin θ + t cos θ) dt.
//!
//! Inverse (filtered back-projection): each tomogram row is convolved with
//! a band-limited ramp filter G_θ = (1/2π) ∫ |ω| Ŵ_θ(ω) e^{iωX} dω and the
//! filtered rows are accumulated as W(q, p) = ∫₀^π G_θ(q cos θ + p sin θ) dθ,
//! which is the polar form of the symplectic inversion integral.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::quadrature::{linspace, trapezoid};
use crate::spline::CubicSpline2d;
use crate::state::StateModel;
use crate::tomogram::{interp_uniform, AngleLookup, OpticalTomogramGrid, ANGLE_EPS};

/// Fewest distinct angles in [0, π) accepted by [`inverse_radon`].
pub const MIN_ANGLES: usize = 8;

/// Tag stored in Wigner JSON files.
pub const NORMALIZATION_TAG: &str = "integral_equals_2pi";

/// Default reconstruction grid: [−6, 6]² with 241 points per axis.
pub fn default_phase_axis() -> Vec<f64> {
    linspace(-6.0, 6.0, 241)
}

/// W(q, p) on a rectangular grid; `w[i][j]` is the value at (qs[i], ps[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    qs: Vec<f64>,
    ps: Vec<f64>,
    w: Vec<Vec<f64>>,
    reconstruction: Option<ReconstructionInfo>,
}

/// Parameters a reconstruction was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionInfo {
    pub angles: usize,
    pub angle_step: f64,
    pub dx: f64,
    pub cutoff_fraction: f64,
    pub cutoff_frequency: f64,
    pub apodization: Apodization,
}

#[derive(Serialize)]
struct WignerOut<'a> {
    qs: &'a [f64],
    ps: &'a [f64],
    w: &'a [Vec<f64>],
    normalization: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconstruction: Option<&'a ReconstructionInfo>,
}

#[derive(Deserialize)]
struct WignerIn {
    qs: Vec<f64>,
    ps: Vec<f64>,
    w: Vec<Vec<f64>>,
    #[serde(default)]
    normalization: Option<String>,
    #[serde(default)]
    reconstruction: Option<ReconstructionInfo>,
}

impl Serialize for WignerGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WignerOut {
            qs: &self.qs,
            ps: &self.ps,
            w: &self.w,
            normalization: NORMALIZATION_TAG,
            reconstruction: self.reconstruction.as_ref(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WignerGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = WignerIn::deserialize(d)?;
        if let Some(tag) = &raw.normalization {
            if tag != NORMALIZATION_TAG {
                return Err(serde::de::Error::custom(format!(
                    "unsupported Wigner normalization {tag:?}"
                )));
            }
        }
        let mut g = WignerGrid::new(raw.qs, raw.ps, raw.w).map_err(serde::de::Error::custom)?;
        g.reconstruction = raw.reconstruction;
        Ok(g)
    }
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 {
        return Err(TomoError::MalformedGrid(format!("{name} needs at least two points")));
    }
    let n = v.len();
    let step = (v[n - 1] - v[0]) / (n - 1) as f64;
    let scale = v[0].abs().max(v[n - 1].abs()).max(step);
    for pair in v.windows(2) {
        let d = pair[1] - pair[0];
        if d.is_nan() || d <= 0.0 || (d - step).abs() > 1e-12 * scale {
            return Err(TomoError::MalformedGrid(format!(
                "{name} must be strictly increasing and uniform"
            )));
        }
    }
    Ok(())
}

fn step(v: &[f64]) -> f64 {
    (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
}

impl WignerGrid {
    pub fn new(qs: Vec<f64>, ps: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        check_axis("qs", &qs)?;
        check_axis("ps", &ps)?;
        if w.len() != qs.len() || w.iter().any(|row| row.len() != ps.len()) {
            return Err(TomoError::MalformedGrid(format!(
                "Wigner values must be {} rows of {} entries",
                qs.len(),
                ps.len()
            )));
        }
        if w.iter().flatten().any(|v| !v.is_finite()) {
            return Err(TomoError::MalformedGrid("non-finite Wigner value".into()));
        }
        Ok(WignerGrid {
            qs,
            ps,
            w,
            reconstruction: None,
        })
    }

    /// Exact Wigner function of a state, tabulated.
    pub fn from_state(state: &StateModel, qs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        let w = qs
            .par_iter()
            .map(|&q| ps.iter().map(|&p| state.exact_wigner(q, p)).collect())
            .collect();
        WignerGrid::new(qs, ps, w)
    }

    pub fn qs(&self) -> &[f64] {
        &self.qs
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn reconstruction(&self) -> Option<&ReconstructionInfo> {
        self.reconstruction.as_ref()
    }

    /// ∫∫ W dq dp by the trapezoid rule; 2π for a normalized state.
    pub fn integral(&self) -> f64 {
        let dp = step(&self.ps);
        let rows: Vec<f64> = self.w.iter().map(|row| trapezoid(row, dp)).collect();
        trapezoid(&rows, step(&self.qs))
    }

    /// Bilinear value at (q, p); zero outside.
    pub fn value_at(&self, q: f64, p: f64) -> f64 {
        let nq = self.qs.len();
        let u = (q - self.qs[0]) / step(&self.qs);
        if u.is_nan() || u < 0.0 || u > (nq - 1) as f64 {
            return 0.0;
        }
        let i = (u.floor() as usize).min(nq - 2);
        let t = u - i as f64;
        (1.0 - t) * interp_uniform(&self.ps, &self.w[i], p) + t * interp_uniform(&self.ps, &self.w[i + 1], p)
    }

    pub fn min_value(&self) -> f64 {
        self.w.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.w.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid point with the largest value, as (q, p, W).
    pub fn peak(&self) -> (f64, f64, f64) {
        let mut best = (self.qs[0], self.ps[0], f64::NEG_INFINITY);
        for (i, row) in self.w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (self.qs[i], self.ps[j], v);
                }
            }
        }
        best
    }

    fn boundary_max(&self) -> f64 {
        let nq = self.qs.len();
        let mut m: f64 = 0.0;
        for (i, row) in self.w.iter().enumerate() {
            if i == 0 || i == nq - 1 {
                m = row.iter().fold(m, |a, v| a.max(v.abs()));
            } else {
                m = m.max(row[0].abs()).max(row[row.len() - 1].abs());
            }
        }
        m
    }
}

/// Settings for [`forward_radon`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardOptions {
    /// Largest boundary value allowed, relative to the largest |W|.
    pub tail_tolerance: f64,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions { tail_tolerance: 1e-2 }
    }
}

/// Projected tomogram together with each row's normalization defect.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardProjection {
    pub grid: OpticalTomogramGrid,
    /// |∫ row dX − 1| per θ; rows are not renormalized.
    pub defects: Vec<f64>,
}

impl ForwardProjection {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

/// Line integrals of a Wigner grid along every direction θ, divided by 2π.
///
/// The grid is interpolated with cubic B-splines and integrated with the
/// trapezoid rule along the transverse axis at the grid's own spacing.
pub fn forward_radon(
    wigner: &WignerGrid,
    thetas: &[f64],
    xs: &[f64],
    options: ForwardOptions,
) -> Result<ForwardProjection> {
    let peak = wigner.w.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let boundary = wigner.boundary_max();
    if peak > 0.0 && boundary > options.tail_tolerance * peak {
        return Err(TomoError::SupportTruncated {
            boundary,
            tolerance: options.tail_tolerance * peak,
        });
    }
    let spline = CubicSpline2d::new(&wigner.qs, &wigner.ps, &wigner.w);
    let h = step(&wigner.qs).min(step(&wigner.ps));
    let reach = [
        (wigner.qs[0], wigner.ps[0]),
        (wigner.qs[0], *wigner.ps.last().unwrap()),
        (*wigner.qs.last().unwrap(), wigner.ps[0]),
        (*wigner.qs.last().unwrap(), *wigner.ps.last().unwrap()),
    ]
    .iter()
    .map(|(q, p)| q.hypot(*p))
    .fold(0.0, f64::max);
    let half = (reach / h).ceil() as i64 + 1;
    let ts: Vec<f64> = (-half..=half).map(|k| k as f64 * h).collect();

    let rows: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&theta| {
            let (s, c) = theta.sin_cos();
            xs.iter()
                .map(|&x| {
                    let line: f64 = ts
                        .iter()
                        .map(|&t| spline.eval(x * c - t * s, x * s + t * c))
                        .sum();
                    line * h / (2.0 * PI)
                })
                .collect()
        })
        .collect();
    let grid = OpticalTomogramGrid::new(thetas.to_vec(), xs.to_vec(), rows)?;
    let defects = (0..thetas.len())
        .map(|i| (grid.row_integral(i) - 1.0).abs())
        .collect();
    Ok(ForwardProjection { grid, defects })
}

/// Frequency window applied on top of the ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Apodization {
    /// Pure ramp up to the cutoff.
    #[default]
    None,
    /// Ramp multiplied by cos(πω / 2ω_c), for noisy data.
    Cosine,
}

/// Settings for [`inverse_radon`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    /// Cutoff as a fraction of the X-grid Nyquist frequency π/dx.
    pub cutoff_fraction: f64,
    pub apodization: Apodization,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions {
            cutoff_fraction: 0.9,
            apodization: Apodization::None,
        }
    }
}

/// Ramp-filters one row: G_i = dx Σ_j h(i − j) T_j with the band-limited
/// ramp kernel, windowed in frequency.
struct RampFilter {
    n: usize,
    len: usize,
    kernel_hat: Vec<Complex<f64>>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl RampFilter {
    fn new(n: usize, dx: f64, options: &ReconstructionOptions) -> Self {
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);

        // spatial ramp kernel: inverse transform of |ω| band-limited at π/dx
        let mut kernel = vec![Complex::new(0.0, 0.0); len];
        kernel[0] = Complex::new(PI / (2.0 * dx * dx), 0.0);
        for k in (1..n).step_by(2) {
            let v = -2.0 / (PI * (k * k) as f64 * dx * dx);
            kernel[k] = Complex::new(v, 0.0);
            kernel[len - k] = Complex::new(v, 0.0);
        }
        fft.process(&mut kernel);

        let nyquist = PI / dx;
        let cutoff = options.cutoff_fraction * nyquist;
        for (m, value) in kernel.iter_mut().enumerate() {
            let idx = if m <= len / 2 { m as f64 } else { m as f64 - len as f64 };
            let omega = (2.0 * PI * idx / (len as f64 * dx)).abs();
            let window = if omega > cutoff {
                0.0
            } else {
                match options.apodization {
                    Apodization::None => 1.0,
                    Apodization::Cosine => (PI * omega / (2.0 * cutoff)).cos(),
                }
            };
            // dx for the convolution sum, 1/len for the unnormalized inverse
            *value *= window * dx / len as f64;
        }
        RampFilter {
            n,
            len,
            kernel_hat: kernel,
            fft,
            ifft,
        }
    }

    fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        for (b, &v) in buf.iter_mut().zip(row) {
            b.re = v;
        }
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.ifft.process(&mut buf);
        buf[..self.n].iter().map(|c| c.re).collect()
    }
}

/// Filtered back-projection estimate of W(q, p), normalized to ∫∫ W = 2π.
///
/// Uses the grid's distinct phases in [0, π) (rows at θ ≥ π are reflected)
/// with equal weights π/K. Needs at least [`MIN_ANGLES`] phases and no gap
/// wider than twice the mean spacing.
pub fn inverse_radon(
    grid: &OpticalTomogramGrid,
    qs: &[f64],
    ps: &[f64],
    options: ReconstructionOptions,
) -> Result<WignerGrid> {
    if !(options.cutoff_fraction > 0.0 && options.cutoff_fraction <= 1.0) {
        return Err(TomoError::InvalidParameter(format!(
            "cutoff fraction must be in (0, 1], got {}",
            options.cutoff_fraction
        )));
    }
    let angles = grid.folded_angles();
    let k = angles.len();
    if k < MIN_ANGLES {
        return Err(TomoError::InsufficientAngles {
            found: k,
            required: MIN_ANGLES,
        });
    }
    let spacing = PI / k as f64;
    for i in 0..k {
        let a = angles[i].0;
        let b = if i + 1 < k { angles[i + 1].0 } else { angles[0].0 + PI };
        if b - a > 2.0 * spacing + ANGLE_EPS {
            return Err(TomoError::AngleNotCovered {
                theta: (0.5 * (a + b)).rem_euclid(PI),
            });
        }
    }

    let dx = grid.dx();
    let xs = grid.xs();
    let filter = RampFilter::new(xs.len(), dx, &options);
    let filtered: Vec<(f64, f64, Vec<f64>)> = angles
        .par_iter()
        .map(|&(theta, row)| {
            let values = grid.resolved_row(&AngleLookup::Exact(row));
            let (s, c) = theta.sin_cos();
            (c, s, filter.apply(&values))
        })
        .collect();

    let weight = PI / k as f64;
    let w: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|&q| {
            ps.iter()
                .map(|&p| {
                    let mut acc = 0.0;
                    for (c, s, g) in &filtered {
                        acc += interp_uniform(xs, g, q * c + p * s);
                    }
                    acc * weight
                })
                .collect()
        })
        .collect();

    let mut out = WignerGrid::new(qs.to_vec(), ps.to_vec(), w)?;
    out.reconstruction = Some(ReconstructionInfo {
        angles: k,
        angle_step: spacing,
        dx,
        cutoff_fraction: options.cutoff_fraction,
        cutoff_frequency: options.cutoff_fraction * PI / dx,
        apodization: options.apodization,
    });
    Ok(out)
}
