//! Kernel-density models for grace-period pools.
//!
//! Gaussian kernels with Silverman bandwidth; mass falling below zero is
//! reflected about the origin so the support stays on nonnegative days and
//! the CDF starts at exactly zero. The CDF is evaluated in closed form via
//! the Gaussian CDF; the cached grid serves normalization checks and plot
//! exports only.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::evidence::{ClusterId, GracePool};

const MODEL_FILE_VERSION: u32 = 1;
const GRID_POINTS: usize = 2048;
const DEFAULT_MIN_SAMPLES: usize = 5;

#[derive(Debug, Error)]
pub enum KdeError {
    #[error("not enough samples to fit: have {have}, need {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("sample value {value} is negative")]
    NegativeSample { value: f64 },

    #[error("bandwidth must be positive, got {value}")]
    InvalidBandwidth { value: f64 },

    #[error("evaluation point {t} outside the domain [0, ∞)")]
    DomainError { t: f64 },

    #[error("unsupported model file version {found} (expected {MODEL_FILE_VERSION})")]
    UnsupportedModelVersion { found: u32 },

    #[error("model file parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Reflect,
}

/// Fit options; the sample floor defaults to 5.
#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub bandwidth_override: Option<f64>,
    pub min_samples: Option<usize>,
}

/// A fitted grace-period density for one cluster.
#[derive(Debug, Clone)]
pub struct KdeModel {
    cluster: ClusterId,
    samples: Vec<f64>,
    bandwidth: f64,
    kernel: Kernel,
    boundary: Boundary,
    grid_ts: Vec<f64>,
    grid_cdf: Vec<f64>,
}

impl KdeModel {
    /// Fits a model to a grace pool.
    pub fn fit(pool: &GracePool, options: &FitOptions) -> Result<Self, KdeError> {
        Self::fit_from_samples(pool.cluster.clone(), pool.days(), options)
    }

    /// Fits a model to raw day samples.
    pub fn fit_from_samples(
        cluster: ClusterId,
        samples: Vec<f64>,
        options: &FitOptions,
    ) -> Result<Self, KdeError> {
        let need = options.min_samples.unwrap_or(DEFAULT_MIN_SAMPLES);
        if samples.len() < need.max(1) {
            return Err(KdeError::InsufficientData {
                have: samples.len(),
                need: need.max(1),
            });
        }
        if let Some(&bad) = samples.iter().find(|s| **s < 0.0 || !s.is_finite()) {
            return Err(KdeError::NegativeSample { value: bad });
        }
        let bandwidth = match options.bandwidth_override {
            Some(h) if h > 0.0 => h,
            Some(h) => return Err(KdeError::InvalidBandwidth { value: h }),
            None => silverman_bandwidth(&samples),
        };
        Ok(Self::assemble(cluster, samples, bandwidth))
    }

    fn assemble(cluster: ClusterId, samples: Vec<f64>, bandwidth: f64) -> Self {
        let max_sample = samples.iter().cloned().fold(0.0f64, f64::max);
        let grid_end = max_sample + 6.0 * bandwidth;
        let mut model = KdeModel {
            cluster,
            samples,
            bandwidth,
            kernel: Kernel::Gaussian,
            boundary: Boundary::Reflect,
            grid_ts: Vec::with_capacity(GRID_POINTS),
            grid_cdf: Vec::with_capacity(GRID_POINTS),
        };
        for i in 0..GRID_POINTS {
            let t = grid_end * (i as f64) / ((GRID_POINTS - 1) as f64);
            model.grid_ts.push(t);
        }
        model.grid_cdf = model.grid_ts.iter().map(|&t| model.cdf_raw(t)).collect();
        model
    }

    pub fn cluster(&self) -> &ClusterId {
        &self.cluster
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn grid_end(&self) -> f64 {
        *self.grid_ts.last().expect("grid never empty")
    }

    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.grid_ts, &self.grid_cdf)
    }

    /// Closed-form reflected CDF, no domain or grid handling.
    fn cdf_raw(&self, t: f64) -> f64 {
        let m = self.samples.len() as f64;
        let h = self.bandwidth;
        let sum: f64 = self
            .samples
            .iter()
            .map(|&x| gaussian_cdf((t - x) / h) - gaussian_cdf((-t - x) / h))
            .sum();
        sum / m
    }

    /// CDF at `t` days. Past the grid end the value is 1 unless
    /// extrapolation is allowed, in which case the closed form is used.
    pub fn cdf_with(&self, t: f64, allow_extrapolation: bool) -> Result<f64, KdeError> {
        if t < 0.0 || t.is_nan() {
            return Err(KdeError::DomainError { t });
        }
        if t >= self.grid_end() && !allow_extrapolation {
            return Ok(1.0);
        }
        Ok(self.cdf_raw(t))
    }

    /// CDF under the default policy (clamped to 1 past the grid end).
    pub fn cdf(&self, t: f64) -> Result<f64, KdeError> {
        self.cdf_with(t, false)
    }

    /// Reflected density at `t` days.
    pub fn pdf(&self, t: f64) -> Result<f64, KdeError> {
        if t < 0.0 || t.is_nan() {
            return Err(KdeError::DomainError { t });
        }
        let m = self.samples.len() as f64;
        let h = self.bandwidth;
        let sum: f64 = self
            .samples
            .iter()
            .map(|&x| gaussian_pdf((t - x) / h) + gaussian_pdf((t + x) / h))
            .sum();
        Ok(sum / (m * h))
    }

    /// Survival function 1 − CDF.
    pub fn sf(&self, t: f64) -> Result<f64, KdeError> {
        Ok(1.0 - self.cdf(t)?)
    }

    /// Plot export: `t,pdf,cdf` over the cached grid.
    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from("t,pdf,cdf\n");
        for (&t, &c) in self.grid_ts.iter().zip(&self.grid_cdf) {
            let p = self.pdf(t).expect("grid points are nonnegative");
            let _ = writeln!(out, "{t},{p},{c}");
        }
        out
    }

    /// Versioned model file; the grid is recomputed on load, so a loaded
    /// model evaluates identically to the one serialized.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_FILE_VERSION,
            cluster: self.cluster.label().to_string(),
            samples: self.samples.clone(),
            bandwidth: self.bandwidth,
            kernel: self.kernel,
            boundary: self.boundary,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, KdeError> {
        let file: ModelFile =
            serde_json::from_slice(bytes).map_err(|e| KdeError::Parse(e.to_string()))?;
        if file.version != MODEL_FILE_VERSION {
            return Err(KdeError::UnsupportedModelVersion {
                found: file.version,
            });
        }
        if file.bandwidth <= 0.0 || !file.bandwidth.is_finite() {
            return Err(KdeError::InvalidBandwidth {
                value: file.bandwidth,
            });
        }
        if file.samples.is_empty() {
            return Err(KdeError::InsufficientData { have: 0, need: 1 });
        }
        if let Some(&bad) = file.samples.iter().find(|s| **s < 0.0 || !s.is_finite()) {
            return Err(KdeError::NegativeSample { value: bad });
        }
        Ok(Self::assemble(
            ClusterId(file.cluster),
            file.samples,
            file.bandwidth,
        ))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    cluster: String,
    samples: Vec<f64>,
    bandwidth: f64,
    kernel: Kernel,
    boundary: Boundary,
}

/// Anything evaluable as a CDF over nonnegative days.
pub trait CdfSource {
    /// CDF value at `t` days; callers guarantee `t >= 0`.
    fn cdf_at(&self, t: f64) -> f64;
}

impl CdfSource for KdeModel {
    fn cdf_at(&self, t: f64) -> f64 {
        self.cdf(t).expect("caller guarantees t >= 0")
    }
}

impl<F: Fn(f64) -> f64> CdfSource for F {
    fn cdf_at(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Evaluation-only view of a fitted model.
#[derive(Debug, Clone, Copy)]
pub struct CdfHandle<'a> {
    model: &'a KdeModel,
}

impl<'a> CdfHandle<'a> {
    pub fn new(model: &'a KdeModel) -> Self {
        CdfHandle { model }
    }

    pub fn cluster(&self) -> &ClusterId {
        self.model.cluster()
    }
}

impl CdfSource for CdfHandle<'_> {
    fn cdf_at(&self, t: f64) -> f64 {
        self.model.cdf_at(t)
    }
}

fn gaussian_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn gaussian_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Silverman's rule h = 0.9·min(σ, IQR/1.34)·m^(−1/5); falls back to σ
/// alone when the IQR vanishes, and to one day when σ is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let m = samples.len() as f64;
    let sigma = sample_std(samples);
    if sigma == 0.0 {
        return 1.0;
    }
    let iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    let scale = if iqr > 0.0 {
        sigma.min(iqr / 1.34)
    } else {
        sigma
    };
    0.9 * scale * m.powf(-0.2)
}

fn sample_std(samples: &[f64]) -> f64 {
    let m = samples.len() as f64;
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    var.sqrt()
}

/// Linear-interpolation quantile over the sorted samples.
fn quantile(samples: &[f64], p: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let idx = p * (sorted.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (idx - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster() -> ClusterId {
        ClusterId("SmallMedium×RemoteNetwork".into())
    }

    fn fit(samples: &[f64]) -> KdeModel {
        KdeModel::fit_from_samples(
            cluster(),
            samples.to_vec(),
            &FitOptions {
                bandwidth_override: None,
                min_samples: Some(1),
            },
        )
        .unwrap()
    }

    #[test]
    fn two_point_pool_uses_silverman() {
        let model = fit(&[30.0, 65.0]);
        assert_eq!(model.sample_count(), 2);
        // sigma = 24.75, IQR = 17.5 -> min(24.75, 17.5/1.34) * 0.9 * 2^(-1/5)
        let expected = 0.9 * (17.5 / 1.34) * 2f64.powf(-0.2);
        assert!((model.bandwidth() - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_is_insufficient() {
        let err = KdeModel::fit_from_samples(cluster(), vec![], &FitOptions::default());
        assert!(matches!(err, Err(KdeError::InsufficientData { .. })));
    }

    #[test]
    fn default_minimum_is_five_samples() {
        let err = KdeModel::fit_from_samples(cluster(), vec![30.0, 65.0], &FitOptions::default());
        assert!(matches!(
            err,
            Err(KdeError::InsufficientData { have: 2, need: 5 })
        ));
    }

    #[test]
    fn identical_samples_fall_back_to_unit_bandwidth() {
        let model = fit(&[100.0; 8]);
        assert_eq!(model.bandwidth(), 1.0);
        assert_eq!(model.cdf(0.0).unwrap(), 0.0);
        assert!((model.cdf(100.0).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cdf_is_zero_at_origin_and_one_at_grid_end() {
        let model = fit(&[30.0, 65.0, 120.0, 200.0, 310.0]);
        assert_eq!(model.cdf(0.0).unwrap(), 0.0);
        let end = model.grid_end();
        assert!(model.cdf(end - 1e-9).unwrap() > 1.0 - 1e-6);
        assert_eq!(model.cdf(end + 1.0).unwrap(), 1.0);
    }

    #[test]
    fn single_sample_median_is_half() {
        // reflection is negligible 100/h standard deviations away from 0
        let model = KdeModel::fit_from_samples(
            cluster(),
            vec![100.0],
            &FitOptions {
                bandwidth_override: Some(3.0),
                min_samples: Some(1),
            },
        )
        .unwrap();
        assert!((model.cdf(100.0).unwrap() - 0.5).abs() < 0.01);
    }

    #[test]
    fn negative_time_is_domain_error() {
        let model = fit(&[30.0, 65.0]);
        assert!(matches!(model.cdf(-1.0), Err(KdeError::DomainError { .. })));
        assert!(matches!(model.pdf(-0.5), Err(KdeError::DomainError { .. })));
    }

    #[test]
    fn sf_is_complement() {
        let model = fit(&[30.0, 65.0, 90.0]);
        assert_eq!(model.sf(0.0).unwrap(), 1.0);
        let t = 47.0;
        assert!((model.sf(t).unwrap() + model.cdf(t).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_is_nonnegative_on_grid() {
        let model = fit(&[3.0, 8.0, 15.0, 40.0, 41.0]);
        let (ts, _) = model.grid();
        assert!(ts.iter().all(|&t| model.pdf(t).unwrap() >= 0.0));
    }

    #[test]
    fn pdf_integrates_to_one_on_grid() {
        let model = fit(&[30.0, 65.0, 120.0, 200.0, 310.0, 12.0, 77.0]);
        let (ts, _) = model.grid();
        let mut integral = 0.0;
        for w in ts.windows(2) {
            let f0 = model.pdf(w[0]).unwrap();
            let f1 = model.pdf(w[1]).unwrap();
            integral += 0.5 * (f0 + f1) * (w[1] - w[0]);
        }
        assert!((integral - 1.0).abs() < 1e-3, "integral = {integral}");
    }

    #[test]
    fn round_trip_preserves_evaluation() {
        let model = fit(&[30.0, 65.0]);
        let loaded = KdeModel::from_json(model.to_json().as_bytes()).unwrap();
        let (ts, _) = model.grid();
        for &t in ts.iter().step_by(37) {
            assert_eq!(model.cdf(t).unwrap(), loaded.cdf(t).unwrap());
        }
    }

    #[test]
    fn bandwidth_override_persists() {
        let model = KdeModel::fit_from_samples(
            cluster(),
            vec![30.0, 65.0],
            &FitOptions {
                bandwidth_override: Some(7.5),
                min_samples: Some(1),
            },
        )
        .unwrap();
        let loaded = KdeModel::from_json(model.to_json().as_bytes()).unwrap();
        assert_eq!(loaded.bandwidth(), 7.5);
    }

    #[test]
    fn version_mismatch_rejected() {
        let model = fit(&[30.0, 65.0]);
        let json = model.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            KdeModel::from_json(json.as_bytes()),
            Err(KdeError::UnsupportedModelVersion { found: 9 })
        ));
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let model = fit(&[30.0, 65.0]);
        let json = model.to_json();
        let truncated = &json.as_bytes()[..json.len() / 2];
        assert!(matches!(
            KdeModel::from_json(truncated),
            Err(KdeError::Parse(_))
        ));
    }
}
