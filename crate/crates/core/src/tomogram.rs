//! Gridded optical tomograms and raw homodyne records.
//!
//! A grid stores W(X, θ) row by row. Rows are looked up through an angle
//! table that also contains every row reflected to θ + π (with X mirrored),
//! so a grid measured over [0, π) answers queries over the full circle.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::quadrature::{linspace, Quadrature};
use crate::state::StateModel;

const TWO_PI: f64 = 2.0 * PI;

/// Two angles closer than this are the same phase.
pub const ANGLE_EPS: f64 = 1e-9;

/// Normalization tolerance for measured or histogrammed grids.
pub const EPS_NORM_MEASURED: f64 = 1e-3;
/// Normalization tolerance for analytically generated grids.
pub const EPS_NORM_ANALYTIC: f64 = 1e-6;

/// Default θ-interpolation reach: both bracketing rows must lie within this
/// distance of the requested angle.
pub const DEFAULT_MAX_NEIGHBOR_DISTANCE: f64 = PI / 24.0;

/// Default quadrature grid for analytic tomograms.
pub fn default_xs() -> Vec<f64> {
    linspace(-7.0, 7.0, 281)
}

/// `n` equispaced angles kπ/n over [0, π).
pub fn equispaced_thetas(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / n as f64).collect()
}

/// Reduces an angle into [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TWO_PI);
    if t >= TWO_PI {
        0.0
    } else {
        t
    }
}

/// Signed circular difference `a - b` in (-π, π].
fn circular_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TWO_PI);
    if d > PI {
        d - TWO_PI
    } else {
        d
    }
}

/// A grid row, possibly reflected (θ + π with X → −X).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowRef {
    pub index: usize,
    pub mirrored: bool,
}

/// How a requested angle resolves onto grid rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleLookup {
    Exact(RowRef),
    /// `(1 - weight) * lower + weight * upper`.
    Blend { lower: RowRef, upper: RowRef, weight: f64 },
}

impl AngleLookup {
    fn parts(&self) -> [(RowRef, f64); 2] {
        match *self {
            AngleLookup::Exact(r) => [(r, 1.0), (r, 0.0)],
            AngleLookup::Blend { lower, upper, weight } => [(lower, 1.0 - weight), (upper, weight)],
        }
    }
}

/// W(X, θ) sampled on a rectangular (θ, X) grid. Rows are indexed by θ.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTomogramGrid {
    thetas: Vec<f64>,
    xs: Vec<f64>,
    w: Vec<Vec<f64>>,
    angle_table: Vec<(f64, RowRef)>,
}

#[derive(Deserialize)]
struct GridFields {
    thetas: Vec<f64>,
    xs: Vec<f64>,
    w: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for OpticalTomogramGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = GridFields::deserialize(d)?;
        OpticalTomogramGrid::new(f.thetas, f.xs, f.w).map_err(serde::de::Error::custom)
    }
}

impl Serialize for OpticalTomogramGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("OpticalTomogramGrid", 3)?;
        st.serialize_field("thetas", &self.thetas)?;
        st.serialize_field("xs", &self.xs)?;
        st.serialize_field("w", &self.w)?;
        st.end()
    }
}

fn check_uniform(name: &str, values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(TomoError::MalformedGrid(format!("{name} needs at least two points")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(TomoError::MalformedGrid(format!("{name} contains non-finite values")));
    }
    let n = values.len();
    let step = (values[n - 1] - values[0]) / (n - 1) as f64;
    if step <= 0.0 {
        return Err(TomoError::MalformedGrid(format!("{name} must be strictly increasing")));
    }
    let scale = values[0].abs().max(values[n - 1].abs()).max(step);
    for pair in values.windows(2) {
        let d = pair[1] - pair[0];
        if d <= 0.0 {
            return Err(TomoError::MalformedGrid(format!("{name} must be strictly increasing")));
        }
        if (d - step).abs() > 1e-12 * scale {
            return Err(TomoError::MalformedGrid(format!(
                "{name} spacing is not uniform (step {d} vs {step})"
            )));
        }
    }
    Ok(step)
}

impl OpticalTomogramGrid {
    /// Builds a grid after structural checks. Normalization and sign are
    /// checked separately by [`validate`](Self::validate).
    pub fn new(thetas: Vec<f64>, xs: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(TomoError::MalformedGrid("no angles".into()));
        }
        for (i, &t) in thetas.iter().enumerate() {
            if !(0.0..TWO_PI).contains(&t) {
                return Err(TomoError::MalformedGrid(format!("theta {t} outside [0, 2pi)")));
            }
            if i > 0 && t <= thetas[i - 1] {
                return Err(TomoError::MalformedGrid("thetas must be strictly increasing".into()));
            }
        }
        check_uniform("xs", &xs)?;
        if w.len() != thetas.len() {
            return Err(TomoError::MalformedGrid(format!(
                "{} rows for {} angles",
                w.len(),
                thetas.len()
            )));
        }
        for row in &w {
            if row.len() != xs.len() {
                return Err(TomoError::MalformedGrid(format!(
                    "row of length {} for {} quadrature points",
                    row.len(),
                    xs.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(TomoError::MalformedGrid("non-finite density".into()));
            }
        }
        let angle_table = build_angle_table(&thetas);
        Ok(OpticalTomogramGrid {
            thetas,
            xs,
            w,
            angle_table,
        })
    }

    /// Tabulates `f(θ, X)` on the grid, rows in parallel.
    pub fn from_fn<F>(thetas: Vec<f64>, xs: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let w = thetas
            .par_iter()
            .map(|&t| xs.iter().map(|&x| f(t, x)).collect())
            .collect();
        OpticalTomogramGrid::new(thetas, xs, w)
    }

    /// Exact tomogram of an analytic state.
    pub fn from_state(state: &StateModel, thetas: Vec<f64>, xs: Vec<f64>) -> Result<Self> {
        OpticalTomogramGrid::from_fn(thetas, xs, |t, x| state.tomogram_density(t, x))
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.w[index]
    }

    pub fn dx(&self) -> f64 {
        let n = self.xs.len();
        (self.xs[n - 1] - self.xs[0]) / (n - 1) as f64
    }

    /// Integral of a row with the default rule.
    pub fn row_integral(&self, index: usize) -> f64 {
        Quadrature::Trapezoid.integrate(&self.w[index], self.dx())
    }

    /// Per-row normalization defects and negative entries.
    pub fn validate(&self, eps_norm: f64) -> ValidationReport {
        let rows: Vec<RowValidation> = (0..self.thetas.len())
            .map(|i| {
                let integral = self.row_integral(i);
                RowValidation {
                    theta: self.thetas[i],
                    integral,
                    defect: (integral - 1.0).abs(),
                }
            })
            .collect();
        let mut negatives = Vec::new();
        for (i, row) in self.w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    negatives.push(NegativeEntry {
                        theta: self.thetas[i],
                        x: self.xs[j],
                        value: v,
                    });
                }
            }
        }
        let max_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
        let passed = negatives.is_empty() && rows.iter().all(|r| r.defect <= eps_norm);
        ValidationReport {
            eps_norm,
            max_defect,
            rows,
            negatives,
            passed,
        }
    }

    /// Resolves an angle onto grid rows, using reflection and linear
    /// interpolation between rows within `max_neighbor_distance`.
    pub fn lookup(&self, theta: f64, max_neighbor_distance: f64) -> Result<AngleLookup> {
        if !theta.is_finite() {
            return Err(TomoError::AngleNotCovered { theta });
        }
        let t = wrap_angle(theta);
        let table = &self.angle_table;
        // first entry with angle > t
        let pos = table.partition_point(|(a, _)| *a <= t);
        let (lo_angle, lo_ref) = if pos == 0 {
            let (a, r) = table[table.len() - 1];
            (a - TWO_PI, r)
        } else {
            table[pos - 1]
        };
        let (hi_angle, hi_ref) = if pos == table.len() {
            let (a, r) = table[0];
            (a + TWO_PI, r)
        } else {
            table[pos]
        };
        let d_lo = t - lo_angle;
        let d_hi = hi_angle - t;
        if d_lo <= ANGLE_EPS {
            return Ok(AngleLookup::Exact(lo_ref));
        }
        if d_hi <= ANGLE_EPS {
            return Ok(AngleLookup::Exact(hi_ref));
        }
        if d_lo <= max_neighbor_distance && d_hi <= max_neighbor_distance {
            return Ok(AngleLookup::Blend {
                lower: lo_ref,
                upper: hi_ref,
                weight: d_lo / (d_lo + d_hi),
            });
        }
        Err(TomoError::AngleNotCovered { theta })
    }

    /// Density of one (possibly mirrored) row at `x`, linear in X, zero
    /// outside the grid.
    pub fn row_value(&self, row: RowRef, x: f64) -> f64 {
        let x = if row.mirrored { -x } else { x };
        interp_uniform(&self.xs, &self.w[row.index], x)
    }

    /// W(X, θ) with linear interpolation in θ and X.
    pub fn density(&self, theta: f64, x: f64) -> Result<f64> {
        let lookup = self.lookup(theta, DEFAULT_MAX_NEIGHBOR_DISTANCE)?;
        Ok(self.lookup_value(&lookup, x))
    }

    pub fn lookup_value(&self, lookup: &AngleLookup, x: f64) -> f64 {
        lookup
            .parts()
            .iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(r, w)| w * self.row_value(*r, x))
            .sum()
    }

    /// The tomogram row at an arbitrary angle, sampled on this grid's `xs`.
    pub fn resolved_row(&self, lookup: &AngleLookup) -> Vec<f64> {
        let symmetric = self.has_symmetric_xs();
        let mut out = vec![0.0; self.xs.len()];
        for (r, weight) in lookup.parts() {
            if weight == 0.0 {
                continue;
            }
            let row = &self.w[r.index];
            if !r.mirrored {
                for (o, v) in out.iter_mut().zip(row) {
                    *o += weight * v;
                }
            } else if symmetric {
                for (o, v) in out.iter_mut().zip(row.iter().rev()) {
                    *o += weight * v;
                }
            } else {
                for (o, &x) in out.iter_mut().zip(&self.xs) {
                    *o += weight * interp_uniform(&self.xs, row, -x);
                }
            }
        }
        out
    }

    fn has_symmetric_xs(&self) -> bool {
        let n = self.xs.len();
        let tol = 1e-9 * self.dx();
        (0..n / 2 + 1).all(|i| (self.xs[i] + self.xs[n - 1 - i]).abs() <= tol)
    }

    /// Symplectic tomogram W(X, μ, ν) = W(X/r, atan2(ν, μ)) / r, r = √(μ² + ν²).
    pub fn symplectic_density(&self, point: SymplecticPoint, x: f64) -> Result<f64> {
        self.symplectic_density_with(point, x, DEFAULT_MAX_NEIGHBOR_DISTANCE)
    }

    pub fn symplectic_density_with(
        &self,
        point: SymplecticPoint,
        x: f64,
        max_neighbor_distance: f64,
    ) -> Result<f64> {
        let r = point.radius();
        let lookup = self.lookup(point.angle(), max_neighbor_distance)?;
        Ok(self.lookup_value(&lookup, x / r) / r)
    }

    fn row_moment(&self, row: RowRef, n: u32, rule: Quadrature) -> f64 {
        let m = rule.integrate_weighted(&self.w[row.index], self.dx(), |i| self.xs[i].powi(n as i32));
        if row.mirrored && n % 2 == 1 {
            -m
        } else {
            m
        }
    }

    /// ⟨Xⁿ⟩ at θ by quadrature over the row.
    pub fn moment(&self, theta: f64, n: u32) -> Result<f64> {
        self.moment_with(theta, n, Quadrature::Trapezoid, DEFAULT_MAX_NEIGHBOR_DISTANCE)
    }

    pub fn moment_with(
        &self,
        theta: f64,
        n: u32,
        rule: Quadrature,
        max_neighbor_distance: f64,
    ) -> Result<f64> {
        if n == 0 {
            return Err(TomoError::InvalidParameter("moment order must be >= 1".into()));
        }
        let lookup = self.lookup(theta, max_neighbor_distance)?;
        Ok(lookup
            .parts()
            .iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(r, w)| w * self.row_moment(*r, n, rule))
            .sum())
    }

    /// Distinct phases in [0, π) after folding θ ≥ π onto θ − π.
    pub fn folded_angles(&self) -> Vec<(f64, RowRef)> {
        let mut out: Vec<(f64, RowRef)> = self
            .angle_table
            .iter()
            .copied()
            .filter(|(a, _)| *a < PI - ANGLE_EPS)
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

fn build_angle_table(thetas: &[f64]) -> Vec<(f64, RowRef)> {
    let mut table: Vec<(f64, RowRef)> = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, RowRef { index: i, mirrored: false }))
        .collect();
    for (i, &t) in thetas.iter().enumerate() {
        let reflected = wrap_angle(t + PI);
        let clash = thetas
            .iter()
            .any(|&o| circular_diff(o, reflected).abs() <= ANGLE_EPS);
        if !clash {
            table.push((reflected, RowRef { index: i, mirrored: true }));
        }
    }
    table.sort_by(|a, b| a.0.total_cmp(&b.0));
    table
}

/// Linear interpolation on a uniform grid; zero outside.
pub(crate) fn interp_uniform(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let x0 = xs[0];
    let dx = (xs[n - 1] - x0) / (n - 1) as f64;
    let u = (x - x0) / dx;
    if u.is_nan() || u < 0.0 || u > (n - 1) as f64 {
        // allow the last node exactly
        return 0.0;
    }
    let i = (u.floor() as usize).min(n - 2);
    let t = u - i as f64;
    ys[i] * (1.0 - t) + ys[i + 1] * t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowValidation {
    pub theta: f64,
    pub integral: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeEntry {
    pub theta: f64,
    pub x: f64,
    pub value: f64,
}

/// Outcome of [`OpticalTomogramGrid::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub eps_norm: f64,
    pub max_defect: f64,
    pub rows: Vec<RowValidation>,
    pub negatives: Vec<NegativeEntry>,
    pub passed: bool,
}

impl ValidationReport {
    /// First violation as an error, negative densities before normalization.
    pub fn into_result(self) -> Result<()> {
        if let Some(n) = self.negatives.first() {
            return Err(TomoError::NegativeDensity {
                theta: n.theta,
                x: n.x,
                value: n.value,
            });
        }
        if let Some(r) = self.rows.iter().find(|r| r.defect > self.eps_norm) {
            return Err(TomoError::NonNormalized {
                theta: r.theta,
                defect: r.defect,
            });
        }
        Ok(())
    }
}

/// The (μ, ν) pair of the symplectic tomogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticPoint {
    mu: f64,
    nu: f64,
}

impl SymplecticPoint {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || !nu.is_finite() || (mu == 0.0 && nu == 0.0) {
            return Err(TomoError::InvalidParameter(format!(
                "symplectic point ({mu}, {nu}) must be finite and non-zero"
            )));
        }
        Ok(SymplecticPoint { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn radius(&self) -> f64 {
        self.mu.hypot(self.nu)
    }

    /// Local-oscillator phase atan2(ν, μ) in [0, 2π).
    pub fn angle(&self) -> f64 {
        wrap_angle(self.nu.atan2(self.mu))
    }
}

/// One homodyne record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRecord {
    pub theta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

/// Default minimum number of records per phase used in a check.
pub const DEFAULT_MIN_SAMPLES_PER_PHASE: usize = 1000;
/// Default phase-matching tolerance for simulated data.
pub const DEFAULT_THETA_TOL: f64 = 1e-6;

/// Raw homodyne data: (θᵢ, Xᵢ) records plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSampleSet {
    records: Vec<QuadratureRecord>,
    metadata: SampleMetadata,
    min_samples_per_phase: usize,
}

/// Sample estimate of a moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub count: usize,
}

impl QuadratureSampleSet {
    pub fn new(records: Vec<QuadratureRecord>, metadata: SampleMetadata) -> Self {
        QuadratureSampleSet {
            records,
            metadata,
            min_samples_per_phase: DEFAULT_MIN_SAMPLES_PER_PHASE,
        }
    }

    pub fn with_min_samples_per_phase(mut self, min: usize) -> Self {
        self.min_samples_per_phase = min;
        self
    }

    pub fn records(&self) -> &[QuadratureRecord] {
        &self.records
    }

    pub fn metadata(&self) -> &SampleMetadata {
        &self.metadata
    }

    pub fn min_samples_per_phase(&self) -> usize {
        self.min_samples_per_phase
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Quadrature values recorded at `theta` (within `theta_tol`). Records
    /// at θ + π are folded in with X negated.
    pub fn values_at(&self, theta: f64, theta_tol: f64) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| fold_to_phase(r, theta, theta_tol))
            .collect()
    }

    /// Like [`values_at`](Self::values_at) but enforces the per-phase minimum.
    pub fn phase_values(&self, theta: f64, theta_tol: f64) -> Result<Vec<f64>> {
        let values = self.values_at(theta, theta_tol);
        if values.len() < self.min_samples_per_phase.max(1) {
            return Err(TomoError::InsufficientSamples {
                theta,
                count: values.len(),
                required: self.min_samples_per_phase.max(1),
            });
        }
        Ok(values)
    }

    /// Sample mean of Xⁿ at θ with its plug-in standard error.
    pub fn moment(&self, theta: f64, n: u32, theta_tol: f64) -> Result<MomentEstimate> {
        if n == 0 {
            return Err(TomoError::InvalidParameter("moment order must be >= 1".into()));
        }
        let values = self.phase_values(theta, theta_tol)?;
        let count = values.len() as f64;
        let powers: Vec<f64> = values.iter().map(|x| x.powi(n as i32)).collect();
        let mean = powers.iter().sum::<f64>() / count;
        let var = powers.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / count;
        Ok(MomentEstimate {
            estimate: mean,
            standard_error: (var / count).sqrt(),
            count: values.len(),
        })
    }

    /// Distinct phases present in the data, folded into [0, π) and merged
    /// within `theta_tol`.
    pub fn distinct_phases(&self, theta_tol: f64) -> Vec<f64> {
        let mut folded: Vec<f64> = self
            .records
            .iter()
            .map(|r| wrap_angle(r.theta).rem_euclid(PI))
            .collect();
        folded.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for t in folded {
            match out.last() {
                Some(&last) if t - last <= theta_tol => {}
                _ => out.push(t),
            }
        }
        // merge a phase just below π with one at 0
        if out.len() > 1 {
            let last = out[out.len() - 1];
            if PI - last + out[0] <= theta_tol {
                out.pop();
            }
        }
        out
    }
}

fn fold_to_phase(record: &QuadratureRecord, theta: f64, tol: f64) -> Option<f64> {
    let d = circular_diff(record.theta, theta);
    if d.abs() <= tol {
        return Some(record.x);
    }
    if circular_diff(d, PI).abs() <= tol {
        return Some(-record.x);
    }
    None
}

/// Bins raw records into a gridded tomogram.
///
/// θ-bins are centred on kπ/`theta_bins` after folding into [0, π); each
/// row is labelled with the mean phase of its records and normalized so
/// that its trapezoid integral is exactly one. Empty θ-bins are dropped.
/// Records outside `x_range` are clipped and logged.
pub fn histogram_tomogram(
    samples: &QuadratureSampleSet,
    theta_bins: usize,
    x_bins: usize,
    x_range: (f64, f64),
) -> Result<OpticalTomogramGrid> {
    if theta_bins == 0 || x_bins < 2 {
        return Err(TomoError::InvalidParameter(
            "need at least one theta bin and two x bins".into(),
        ));
    }
    let (lo, hi) = x_range;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(TomoError::InvalidParameter(format!("empty x range [{lo}, {hi}]")));
    }
    if samples.is_empty() {
        return Err(TomoError::InsufficientSamples {
            theta: 0.0,
            count: 0,
            required: samples.min_samples_per_phase().max(1),
        });
    }
    let width = (hi - lo) / x_bins as f64;
    let bin_of = |x: f64| -> Option<usize> {
        if x < lo || x > hi {
            return None;
        }
        Some((((x - lo) / width) as usize).min(x_bins - 1))
    };

    let nb = theta_bins;
    let mut counts = vec![vec![0u64; x_bins]; nb];
    // bin 0 also kept with X negated, for when its mean phase lands below 0
    let mut wrapped_counts = vec![0u64; x_bins];
    let mut totals = vec![0usize; nb];
    let mut phase_sums = vec![0.0f64; nb];
    let mut clipped = 0usize;

    for r in samples.records() {
        let mut t = wrap_angle(r.theta);
        let mut x = r.x;
        if t >= PI {
            t -= PI;
            x = -x;
        }
        let mut k = (t * nb as f64 / PI + 0.5).floor() as usize;
        if k >= nb {
            k = 0;
            t -= PI;
            x = -x;
        }
        totals[k] += 1;
        phase_sums[k] += t;
        match bin_of(x) {
            Some(j) => counts[k][j] += 1,
            None => clipped += 1,
        }
        if k == 0 {
            if let Some(j) = bin_of(-x) {
                wrapped_counts[j] += 1;
            }
        }
    }
    if clipped > 0 {
        log::warn!("histogram: {clipped} records outside x range [{lo}, {hi}] were clipped");
    }

    let xs: Vec<f64> = (0..x_bins).map(|j| lo + (j as f64 + 0.5) * width).collect();
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    let required = samples.min_samples_per_phase().max(1);
    for k in 0..nb {
        if totals[k] == 0 {
            continue;
        }
        let mut theta = phase_sums[k] / totals[k] as f64;
        let mut bin_counts = &counts[k];
        if k == 0 && theta < 0.0 {
            theta += PI;
            bin_counts = &wrapped_counts;
        }
        let kept: u64 = bin_counts.iter().sum();
        if totals[k] < required || kept == 0 {
            return Err(TomoError::InsufficientSamples {
                theta,
                count: kept as usize,
                required,
            });
        }
        let raw: Vec<f64> = bin_counts
            .iter()
            .map(|&c| c as f64 / (kept as f64 * width))
            .collect();
        let integral = Quadrature::Trapezoid.integrate(&raw, width);
        if integral <= 0.0 {
            return Err(TomoError::InsufficientSamples {
                theta,
                count: kept as usize,
                required,
            });
        }
        rows.push((theta, raw.into_iter().map(|v| v / integral).collect()));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (thetas, w): (Vec<f64>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    OpticalTomogramGrid::new(thetas, xs, w)
}
