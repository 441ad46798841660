//! Uncertainty relations from tomogram variances.
//!
//! Every quantity is built from the quadrature variance σXX(θ) at three
//! phases θ, θ + π/4 and θ + π/2:
//!
//! - covariance of the rotated frame: σXX(θ + π/4) − ½(σXX(θ) + σXX(θ + π/2))
//! - Heisenberg product: σXX(θ) · σXX(θ + π/2)
//! - Schrödinger-Robertson determinant: product − covariance²
//! - tomographic uncertainty function: F(θ) = determinant − 1/4
//!
//! At θ = 0 these are σQQ σPP, σQP and σQQ σPP − σQP². Sample-based errors
//! come from a nonparametric bootstrap in which replicate `b` of a phase is
//! a deterministic function of (seed, phase, b), so all quantities sharing
//! a phase are resampled jointly.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Result, TomoError};
use crate::quadrature::Quadrature;
use crate::tomogram::{
    wrap_angle, OpticalTomogramGrid, QuadratureSampleSet, DEFAULT_MAX_NEIGHBOR_DISTANCE, DEFAULT_THETA_TOL,
};

/// The lower bound shared by the Heisenberg and Schrödinger-Robertson relations.
pub const UNCERTAINTY_BOUND: f64 = 0.25;

/// Input to every check.
#[derive(Debug, Clone, Copy)]
pub enum TomographicData<'a> {
    Grid(&'a OpticalTomogramGrid),
    Samples(&'a QuadratureSampleSet),
}

impl<'a> From<&'a OpticalTomogramGrid> for TomographicData<'a> {
    fn from(g: &'a OpticalTomogramGrid) -> Self {
        TomographicData::Grid(g)
    }
}

impl<'a> From<&'a QuadratureSampleSet> for TomographicData<'a> {
    fn from(s: &'a QuadratureSampleSet) -> Self {
        TomographicData::Samples(s)
    }
}

impl TomographicData<'_> {
    pub fn source(&self) -> DataSource {
        match self {
            TomographicData::Grid(_) => DataSource::Grid,
            TomographicData::Samples(_) => DataSource::Samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Grid,
    Samples,
}

/// Knobs for the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub bootstrap_replicates: usize,
    /// Pass slack for sample data, in bootstrap standard errors.
    pub sample_slack_se: f64,
    /// Absolute pass slack for grid data.
    pub grid_slack: f64,
    pub theta_scan: Vec<f64>,
    /// Phase-matching tolerance for sample records.
    pub theta_tol: f64,
    /// θ-interpolation reach on grids.
    pub max_neighbor_distance: f64,
    pub quadrature: Quadrature,
    /// Report-level bootstrap seed.
    pub seed: u64,
}

/// Default scan: π/48 steps over [0, π).
pub fn default_theta_scan() -> Vec<f64> {
    (0..48).map(|k| PI * k as f64 / 48.0).collect()
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            bootstrap_replicates: 200,
            sample_slack_se: 3.0,
            grid_slack: 1e-9,
            theta_scan: default_theta_scan(),
            theta_tol: DEFAULT_THETA_TOL,
            max_neighbor_distance: DEFAULT_MAX_NEIGHBOR_DISTANCE,
            quadrature: Quadrature::Trapezoid,
            seed: 0,
        }
    }
}

impl CheckConfig {
    fn validate_for(&self, data: &TomographicData<'_>) -> Result<()> {
        if matches!(data, TomographicData::Samples(_)) && self.bootstrap_replicates < 2 {
            return Err(TomoError::InvalidParameter(
                "bootstrap_replicates must be >= 2 for sample data".into(),
            ));
        }
        Ok(())
    }

    fn slack(&self, source: DataSource, standard_error: f64) -> f64 {
        match source {
            DataSource::Grid => self.grid_slack,
            DataSource::Samples => self.sample_slack_se * standard_error,
        }
    }
}

/// A variance (or covariance) with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub value: f64,
    #[serde(rename = "se")]
    pub standard_error: f64,
    pub source: DataSource,
    pub theta: f64,
    /// Set when a variance came out negative; the raw value is kept.
    pub negative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub se: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FValue {
    pub theta: f64,
    pub f: f64,
    pub se: f64,
}

/// Quadrature variance at one phase, with bootstrap replicates for samples.
#[derive(Debug, Clone)]
struct PhaseStats {
    value: f64,
    replicates: Option<Vec<f64>>,
}

/// The three-phase combination underlying every relation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Triple {
    product: f64,
    covariance: f64,
    determinant: f64,
}

impl Triple {
    fn new(v0: f64, v1: f64, v2: f64) -> Triple {
        let product = v0 * v2;
        let covariance = v1 - 0.5 * (v0 + v2);
        Triple {
            product,
            covariance,
            determinant: product - covariance * covariance,
        }
    }

    fn f(&self) -> f64 {
        self.determinant - UNCERTAINTY_BOUND
    }
}

fn phase_key(theta: f64) -> i64 {
    let folded = wrap_angle(theta).rem_euclid(PI);
    let key = (folded * 1e9).round() as i64;
    if key == (PI * 1e9).round() as i64 {
        0
    } else {
        key
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn plug_in_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

fn bootstrap_variances(values: &[f64], replicates: usize, seed: u64, key: i64) -> Vec<f64> {
    let phase_seed = seed ^ splitmix64(key as u64);
    let n = values.len();
    (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(phase_seed);
            rng.set_stream(b as u64);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let x = values[rng.random_range(0..n)];
                sum += x;
                sum_sq += x * x;
            }
            let mean = sum / n as f64;
            sum_sq / n as f64 - mean * mean
        })
        .collect()
}

fn replicate_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Computes and caches per-phase variances for one data set.
struct Estimator<'a> {
    data: TomographicData<'a>,
    config: &'a CheckConfig,
    cache: HashMap<i64, std::result::Result<PhaseStats, TomoError>>,
}

impl<'a> Estimator<'a> {
    fn new(data: TomographicData<'a>, config: &'a CheckConfig) -> Result<Self> {
        config.validate_for(&data)?;
        Ok(Estimator {
            data,
            config,
            cache: HashMap::new(),
        })
    }

    fn compute(&self, theta: f64) -> Result<PhaseStats> {
        match self.data {
            TomographicData::Grid(g) => {
                let rule = self.config.quadrature;
                let reach = self.config.max_neighbor_distance;
                let m1 = g.moment_with(theta, 1, rule, reach)?;
                let m2 = g.moment_with(theta, 2, rule, reach)?;
                Ok(PhaseStats {
                    value: m2 - m1 * m1,
                    replicates: None,
                })
            }
            TomographicData::Samples(s) => {
                let values = s.phase_values(theta, self.config.theta_tol)?;
                let replicates = bootstrap_variances(
                    &values,
                    self.config.bootstrap_replicates,
                    self.config.seed,
                    phase_key(theta),
                );
                Ok(PhaseStats {
                    value: plug_in_variance(&values),
                    replicates: Some(replicates),
                })
            }
        }
    }

    /// Fills the cache for all phases, in parallel.
    fn prepare(&mut self, thetas: &[f64]) {
        let mut pending: Vec<(i64, f64)> = Vec::new();
        for &t in thetas {
            let k = phase_key(t);
            if !self.cache.contains_key(&k) && !pending.iter().any(|(pk, _)| *pk == k) {
                pending.push((k, t));
            }
        }
        let computed: Vec<(i64, Result<PhaseStats>)> =
            pending.par_iter().map(|&(k, t)| (k, self.compute(t))).collect();
        self.cache.extend(computed);
    }

    fn stats(&mut self, theta: f64) -> Result<PhaseStats> {
        self.prepare(&[theta]);
        self.cache[&phase_key(theta)].clone()
    }

    fn variance(&mut self, theta: f64) -> Result<VarianceEstimate> {
        let s = self.stats(theta)?;
        let se = s.replicates.as_deref().map(replicate_sd).unwrap_or(0.0);
        Ok(VarianceEstimate {
            value: s.value,
            standard_error: se,
            source: self.data.source(),
            theta,
            negative: s.value < 0.0,
        })
    }

    /// Applies `f` to the three-phase triple at θ and to each bootstrap
    /// replicate; returns (value, standard error).
    fn triple<F>(&mut self, theta: f64, f: F) -> Result<(f64, f64)>
    where
        F: Fn(&Triple) -> f64,
    {
        self.prepare(&[theta, theta + FRAC_PI_4, theta + FRAC_PI_2]);
        let s0 = self.stats(theta)?;
        let s1 = self.stats(theta + FRAC_PI_4)?;
        let s2 = self.stats(theta + FRAC_PI_2)?;
        let value = f(&Triple::new(s0.value, s1.value, s2.value));
        let se = match (&s0.replicates, &s1.replicates, &s2.replicates) {
            (Some(r0), Some(r1), Some(r2)) => {
                let reps: Vec<f64> = r0
                    .iter()
                    .zip(r1)
                    .zip(r2)
                    .map(|((a, b), c)| f(&Triple::new(*a, *b, *c)))
                    .collect();
                replicate_sd(&reps)
            }
            _ => 0.0,
        };
        Ok((value, se))
    }

    fn covariance(&mut self, theta0: f64) -> Result<VarianceEstimate> {
        let (value, se) = self.triple(theta0, |t| t.covariance)?;
        Ok(VarianceEstimate {
            value,
            standard_error: se,
            source: self.data.source(),
            theta: theta0,
            negative: false,
        })
    }

    fn bound_check<F>(&mut self, f: F) -> Result<BoundCheck>
    where
        F: Fn(&Triple) -> f64,
    {
        let (value, se) = self.triple(0.0, f)?;
        let slack = self.config.slack(self.data.source(), se);
        Ok(BoundCheck {
            value,
            se,
            bound: UNCERTAINTY_BOUND,
            slack,
            pass: value >= UNCERTAINTY_BOUND - slack,
        })
    }

    fn f_value(&mut self, theta: f64) -> Result<FValue> {
        let (f, se) = self.triple(theta, Triple::f)?;
        Ok(FValue { theta, f, se })
    }
}

/// σXX(θ) = ⟨X²⟩ − ⟨X⟩².
pub fn variance_at(data: TomographicData<'_>, theta: f64, config: &CheckConfig) -> Result<VarianceEstimate> {
    Estimator::new(data, config)?.variance(theta)
}

/// Covariance of the frame rotated by θ0:
/// σXX(θ0 + π/4) − ½(σXX(θ0) + σXX(θ0 + π/2)). At θ0 = 0 this is σQP.
pub fn covariance_qp(data: TomographicData<'_>, theta0: f64, config: &CheckConfig) -> Result<VarianceEstimate> {
    Estimator::new(data, config)?.covariance(theta0)
}

/// σXX(0) · σXX(π/2) against 1/4.
pub fn heisenberg_check(data: TomographicData<'_>, config: &CheckConfig) -> Result<BoundCheck> {
    let mut est = Estimator::new(data, config)?;
    let (value, se) = {
        est.prepare(&[0.0, FRAC_PI_2]);
        let s0 = est.stats(0.0)?;
        let s2 = est.stats(FRAC_PI_2)?;
        let value = s0.value * s2.value;
        let se = match (&s0.replicates, &s2.replicates) {
            (Some(a), Some(b)) => {
                replicate_sd(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
            }
            _ => 0.0,
        };
        (value, se)
    };
    let slack = config.slack(data.source(), se);
    Ok(BoundCheck {
        value,
        se,
        bound: UNCERTAINTY_BOUND,
        slack,
        pass: value >= UNCERTAINTY_BOUND - slack,
    })
}

/// σQQ σPP − σQP² against 1/4.
pub fn sr_check(data: TomographicData<'_>, config: &CheckConfig) -> Result<BoundCheck> {
    Estimator::new(data, config)?.bound_check(|t| t.determinant)
}

/// F(θ) with its bootstrap standard error (zero for grids).
pub fn uncertainty_function(data: TomographicData<'_>, theta: f64, config: &CheckConfig) -> Result<FValue> {
    Estimator::new(data, config)?.f_value(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisenbergEntry {
    pub product: f64,
    pub se: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrEntry {
    pub determinant: f64,
    pub se: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FCurvePoint {
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// F(0) next to the Schrödinger-Robertson determinant it must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub f_at_zero: f64,
    pub sr_determinant_minus_bound: f64,
    pub identical: bool,
}

/// Full result of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub sigma_qq: VarianceEstimate,
    pub sigma_pp: VarianceEstimate,
    pub sigma_qp: VarianceEstimate,
    pub heisenberg: HeisenbergEntry,
    pub sr: SrEntry,
    pub f_curve: Vec<FCurvePoint>,
    pub f_pass: bool,
    pub f_complete: bool,
    pub cross_check: CrossCheck,
    pub warnings: Vec<String>,
    pub config: CheckConfig,
    pub provenance: Map<String, Value>,
}

impl UncertaintyReport {
    pub fn all_pass(&self) -> bool {
        self.heisenberg.pass && self.sr.pass && self.f_pass
    }

    /// Successful (θ, F) points of the scan.
    pub fn f_values(&self) -> Vec<(f64, f64)> {
        self.f_curve
            .iter()
            .filter_map(|p| p.f.map(|f| (p.theta, f)))
            .collect()
    }

    /// Internal consistency: determinant = product − σQP² bit for bit,
    /// F(0) = determinant − 1/4, and the determinant never exceeds the product.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let cov = self.sigma_qp.value;
        if self.sr.determinant != self.heisenberg.product - cov * cov {
            return Err("sr determinant differs from product - sigma_qp^2".into());
        }
        if !self.cross_check.identical {
            return Err("F(0) differs from the sr determinant - 1/4".into());
        }
        if self.sr.determinant > self.heisenberg.product {
            return Err("sr determinant exceeds the heisenberg product".into());
        }
        Ok(())
    }
}

/// Runs every check and scans F over `thetas`.
///
/// Scan points whose phases are not covered are kept in the curve with an
/// error marker; the relations at θ = 0 must be computable.
pub fn f_scan(data: TomographicData<'_>, thetas: &[f64], config: &CheckConfig) -> Result<UncertaintyReport> {
    let mut est = Estimator::new(data, config)?;
    let mut needed = vec![0.0, FRAC_PI_4, FRAC_PI_2];
    for &t in thetas {
        needed.extend([t, t + FRAC_PI_4, t + FRAC_PI_2]);
    }
    est.prepare(&needed);

    let sigma_qq = est.variance(0.0)?;
    let sigma_pp = est.variance(FRAC_PI_2)?;
    let sigma_qp = est.covariance(0.0)?;
    let (product, product_se) = est.triple(0.0, |t| t.product)?;
    let sr = est.bound_check(|t| t.determinant)?;
    let f0 = est.f_value(0.0)?;
    let source = data.source();
    let heisenberg_slack = config.slack(source, product_se);

    let mut warnings = Vec::new();
    for (name, v) in [("sigma_qq", &sigma_qq), ("sigma_pp", &sigma_pp)] {
        if v.negative {
            warnings.push(format!("{name} is negative ({}) at theta = {}", v.value, v.theta));
        }
    }

    let mut f_curve = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let point = match est.f_value(theta) {
            Ok(fv) => {
                for t in [theta, theta + FRAC_PI_4, theta + FRAC_PI_2] {
                    if let Ok(v) = est.variance(t) {
                        if v.negative {
                            let msg = format!("negative variance {} at theta = {}", v.value, t);
                            if !warnings.contains(&msg) {
                                warnings.push(msg);
                            }
                        }
                    }
                }
                let slack = config.slack(source, fv.se);
                FCurvePoint {
                    theta,
                    f: Some(fv.f),
                    se: Some(fv.se),
                    pass: Some(fv.f >= -slack),
                    error: None,
                }
            }
            Err(e) => FCurvePoint {
                theta,
                f: None,
                se: None,
                pass: None,
                error: Some(e.to_string()),
            },
        };
        f_curve.push(point);
    }
    let evaluated = f_curve.iter().filter(|p| p.f.is_some()).count();
    let f_complete = evaluated == f_curve.len();
    if !f_complete {
        warnings.push(format!(
            "F scan is partial: {} of {} angles could not be evaluated",
            f_curve.len() - evaluated,
            f_curve.len()
        ));
    }
    let f_pass = evaluated > 0 && f_curve.iter().all(|p| p.pass.unwrap_or(true));

    let mut provenance = Map::new();
    provenance.insert("data_source".into(), json!(source));
    provenance.insert("bootstrap_seed".into(), json!(config.seed));
    if let TomographicData::Samples(s) = data {
        let meta = s.metadata();
        provenance.insert("input".into(), json!(meta.source));
        provenance.insert("sample_seed".into(), json!(meta.seed));
        provenance.insert("sample_rng".into(), json!(meta.rng));
        provenance.insert("records".into(), json!(s.len()));
        provenance.insert(
            "bootstrap_rng".into(),
            json!("ChaCha8Rng (rand_chacha 0.9); seed = bootstrap_seed ^ splitmix64(phase key), stream = replicate"),
        );
    }

    Ok(UncertaintyReport {
        sigma_qq,
        sigma_pp,
        sigma_qp,
        heisenberg: HeisenbergEntry {
            product,
            se: product_se,
            bound: UNCERTAINTY_BOUND,
            slack: heisenberg_slack,
            pass: product >= UNCERTAINTY_BOUND - heisenberg_slack,
        },
        sr: SrEntry {
            determinant: sr.value,
            se: sr.se,
            bound: UNCERTAINTY_BOUND,
            slack: sr.slack,
            pass: sr.pass,
        },
        f_curve,
        f_pass,
        f_complete,
        cross_check: CrossCheck {
            f_at_zero: f0.f,
            sr_determinant_minus_bound: sr.value - UNCERTAINTY_BOUND,
            identical: f0.f == sr.value - UNCERTAINTY_BOUND,
        },
        warnings,
        config: config.clone(),
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{FockState, GaussianState, StateModel};
    use crate::quadrature::linspace;
    use crate::tomogram::{default_xs, equispaced_thetas};

    // wide enough that variances up to ~1.5 lose < 1e-15 to truncation
    fn grid(state: StateModel) -> OpticalTomogramGrid {
        OpticalTomogramGrid::from_state(&state, equispaced_thetas(48), linspace(-10.0, 10.0, 401)).unwrap()
    }

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn variance_examples() {
        let vac = grid(GaussianState::vacuum().into());
        let v = variance_at((&vac).into(), PI / 3.0, &cfg()).unwrap();
        assert!((v.value - 0.5).abs() < 1e-9);
        assert_eq!(v.standard_error, 0.0);
        let sq = grid(GaussianState::squeezed_vacuum(0.5, 0.0).unwrap().into());
        let v0 = variance_at((&sq).into(), 0.0, &cfg()).unwrap().value;
        let v2 = variance_at((&sq).into(), FRAC_PI_2, &cfg()).unwrap().value;
        assert!((v0 - (-1.0f64).exp() / 2.0).abs() < 1e-9);
        assert!((v2 - 1.0f64.exp() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn covariance_examples() {
        let vac = grid(GaussianState::vacuum().into());
        assert!(covariance_qp((&vac).into(), 0.0, &cfg()).unwrap().value.abs() < 1e-12);
        let sq = grid(GaussianState::squeezed_vacuum(0.5, 0.0).unwrap().into());
        assert!(covariance_qp((&sq).into(), 0.0, &cfg()).unwrap().value.abs() < 1e-9);
        let corr = grid(GaussianState::new(0.0, 0.0, 1.0, 1.0, 0.5).unwrap().into());
        assert!((covariance_qp((&corr).into(), 0.0, &cfg()).unwrap().value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn heisenberg_examples() {
        let vac = grid(GaussianState::vacuum().into());
        let h = heisenberg_check((&vac).into(), &cfg()).unwrap();
        assert!((h.value - 0.25).abs() < 1e-12 && h.pass);
        let f1 = grid(FockState::new(1).into());
        let h = heisenberg_check((&f1).into(), &cfg()).unwrap();
        assert!((h.value - 2.25).abs() < 1e-9 && h.pass);
        let sq = grid(GaussianState::squeezed_vacuum(0.5, 0.0).unwrap().into());
        let h = heisenberg_check((&sq).into(), &cfg()).unwrap();
        assert!((h.value - 0.25).abs() < 1e-9 && h.pass);
    }

    #[test]
    fn sr_examples() {
        let vac = grid(GaussianState::vacuum().into());
        let s = sr_check((&vac).into(), &cfg()).unwrap();
        assert!((s.value - 0.25).abs() < 1e-12 && s.pass);
        let th = grid(GaussianState::thermal(1.0).unwrap().into());
        let s = sr_check((&th).into(), &cfg()).unwrap();
        assert!((s.value - 2.25).abs() < 1e-9 && s.pass);
        let corr = grid(GaussianState::new(0.0, 0.0, 1.0, 1.0, 0.5).unwrap().into());
        let s = sr_check((&corr).into(), &cfg()).unwrap();
        assert!((s.value - 0.75).abs() < 1e-8 && s.pass);
    }

    #[test]
    fn uncertainty_function_examples() {
        let vac = grid(GaussianState::vacuum().into());
        for k in 0..5 {
            let f = uncertainty_function((&vac).into(), k as f64 * 0.3, &cfg());
            // 0.3 steps are off-grid but within interpolation reach only sometimes
            if let Ok(f) = f {
                assert!(f.f.abs() < 1e-6);
            }
        }
        let f = uncertainty_function((&vac).into(), 0.0, &cfg()).unwrap();
        assert!(f.f.abs() < 1e-12);
        let sq = grid(GaussianState::squeezed_vacuum(0.5, 0.0).unwrap().into());
        assert!(uncertainty_function((&sq).into(), PI / 6.0, &cfg()).unwrap().f.abs() < 1e-6);
    }

    #[test]
    fn adversarial_grid_fails() {
        let g = OpticalTomogramGrid::from_fn(equispaced_thetas(48), default_xs(), |_, x| {
            crate::state::normal_density(x, 0.0, 0.4)
        })
        .unwrap();
        let report = f_scan((&g).into(), &equispaced_thetas(24), &cfg()).unwrap();
        assert!(!report.f_pass);
        assert!(!report.heisenberg.pass);
        assert!(!report.sr.pass);
        for (_, f) in report.f_values() {
            assert!((f + 0.09).abs() < 1e-6);
        }
        report.check_invariants().unwrap();
    }

    #[test]
    fn scan_reports_uncovered_angles() {
        let g = OpticalTomogramGrid::from_state(
            &GaussianState::vacuum().into(),
            equispaced_thetas(4),
            default_xs(),
        )
        .unwrap();
        let report = f_scan((&g).into(), &[0.0, 0.1], &cfg()).unwrap();
        assert!(report.f_curve[0].f.is_some());
        assert!(report.f_curve[1].error.is_some());
        assert!(!report.f_complete);
        assert!(report.f_pass);
    }

    #[test]
    fn missing_required_phase_is_an_error() {
        let g = OpticalTomogramGrid::from_state(&GaussianState::vacuum().into(), vec![0.0], default_xs()).unwrap();
        assert!(matches!(
            f_scan((&g).into(), &[0.0], &cfg()),
            Err(TomoError::AngleNotCovered { .. })
        ));
    }

    #[test]
    fn sample_config_needs_two_replicates() {
        let set = QuadratureSampleSet::new(vec![], Default::default());
        let config = CheckConfig {
            bootstrap_replicates: 1,
            ..cfg()
        };
        assert!(matches!(
            variance_at((&set).into(), 0.0, &config),
            Err(TomoError::InvalidParameter(_))
        ));
    }

    #[test]
    fn phase_keys_fold_reflections() {
        assert_eq!(phase_key(0.0), phase_key(PI));
        assert_eq!(phase_key(FRAC_PI_4), phase_key(FRAC_PI_4 + PI));
        assert_eq!(phase_key(PI - 1e-12), phase_key(0.0));
        assert_ne!(phase_key(0.0), phase_key(FRAC_PI_4));
    }
}
