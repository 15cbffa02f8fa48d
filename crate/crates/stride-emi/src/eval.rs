//! Evaluation metrics over repeated-acquisition image stacks: voxelwise SNR,
//! EMI removal percentage, RMSE against a baseline mean, and Welch's t-test.
//!
//! Voxels whose statistic is undefined (constant series, vanishing
//! denominator) carry NaN in the maps and are excluded from summaries.

use crate::array::ComplexArray2D;
use crate::error::{Error, Result};
use crate::stats::student_t_two_sided_p;

/// Std guard below which a voxel statistic is flagged instead of computed.
pub const SATURATION_EPS: f64 = 1e-12;

/// Real-valued voxel map; NaN marks flagged voxels.
#[derive(Clone, Debug)]
pub struct RealMap {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMap {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("map buffer does not match its dimensions"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mean over `mask`ed voxels, NaN entries excluded. NaN when nothing
    /// qualifies.
    pub fn masked_mean(&self, mask: &BoolMap) -> f64 {
        assert_eq!((self.rows, self.cols), (mask.rows, mask.cols));
        let mut sum = 0.0;
        let mut count = 0usize;
        for (v, &m) in self.data.iter().zip(&mask.data) {
            if m && v.is_finite() {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }

    /// Masked finite values, for distribution-level tests.
    pub fn masked_values(&self, mask: &BoolMap) -> Vec<f64> {
        self.data
            .iter()
            .zip(&mask.data)
            .filter(|(v, &m)| m && v.is_finite())
            .map(|(v, _)| *v)
            .collect()
    }
}

/// Boolean voxel map.
#[derive(Clone, Debug)]
pub struct BoolMap {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BoolMap {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn invert(&self) -> BoolMap {
        BoolMap {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }
}

/// The metric maps of one method on one dataset.
#[derive(Clone, Debug)]
pub struct MetricMaps {
    pub snr: RealMap,
    pub emi_removal_pct: RealMap,
    pub rmse: RealMap,
    pub mask: BoolMap,
}

fn check_stack(stack: &[&ComplexArray2D]) -> Result<(usize, usize)> {
    let Some(first) = stack.first() else {
        return Err(Error::invalid("empty image stack"));
    };
    let shape = first.shape();
    for img in stack {
        if img.shape() != shape {
            return Err(Error::shape("stack images of differing shapes"));
        }
    }
    Ok(shape)
}

fn voxel_mean_std(stack: &[&ComplexArray2D], idx: usize) -> (f64, f64) {
    let n = stack.len() as f64;
    let mean = stack.iter().map(|img| img.as_slice()[idx].re).sum::<f64>() / n;
    let var = stack
        .iter()
        .map(|img| {
            let d = img.as_slice()[idx].re - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    (mean, var.sqrt())
}

/// Voxelwise mean / sample std (ddof = 1) over the repeats of a real-valued
/// image stack. Voxels with vanishing std are flagged NaN (saturated).
pub fn snr_map(stack: &[&ComplexArray2D]) -> Result<RealMap> {
    let (rows, cols) = check_stack(stack)?;
    if stack.len() < 2 {
        return Err(Error::invalid("SNR needs at least two repeats"));
    }
    let data = (0..rows * cols)
        .map(|idx| {
            let (mean, std) = voxel_mean_std(stack, idx);
            if std < SATURATION_EPS {
                f64::NAN
            } else {
                mean / std
            }
        })
        .collect();
    RealMap::new(rows, cols, data)
}

/// Voxelwise percent reduction of the std from the corrupted stack to the
/// corrected stack: 100 (sigma_corrupted - sigma_corrected) / sigma_corrupted.
/// Undefined (NaN) where the corrupted std vanishes.
pub fn emi_removal_map(
    corrected_stack: &[&ComplexArray2D],
    corrupted_stack: &[&ComplexArray2D],
) -> Result<RealMap> {
    let (rows, cols) = check_stack(corrected_stack)?;
    let corrupted_shape = check_stack(corrupted_stack)?;
    if (rows, cols) != corrupted_shape {
        return Err(Error::shape("corrected and corrupted stacks differ in shape"));
    }
    if corrected_stack.len() < 2 || corrupted_stack.len() < 2 {
        return Err(Error::invalid("EMI removal needs at least two repeats"));
    }
    let data = (0..rows * cols)
        .map(|idx| {
            let (_, s_corr) = voxel_mean_std(corrected_stack, idx);
            let (_, s_bad) = voxel_mean_std(corrupted_stack, idx);
            if s_bad < SATURATION_EPS {
                f64::NAN
            } else {
                100.0 * (s_bad - s_corr) / s_bad
            }
        })
        .collect();
    RealMap::new(rows, cols, data)
}

/// Voxelwise sqrt(mean over repeats of (x - ground_truth)^2).
pub fn rmse_map(stack: &[&ComplexArray2D], ground_truth: &ComplexArray2D) -> Result<RealMap> {
    let (rows, cols) = check_stack(stack)?;
    if ground_truth.shape() != (rows, cols) {
        return Err(Error::shape("ground truth shape differs from stack"));
    }
    let n = stack.len() as f64;
    let data = (0..rows * cols)
        .map(|idx| {
            let gt = ground_truth.as_slice()[idx].re;
            let mse = stack
                .iter()
                .map(|img| {
                    let d = img.as_slice()[idx].re - gt;
                    d * d
                })
                .sum::<f64>()
                / n;
            mse.sqrt()
        })
        .collect();
    RealMap::new(rows, cols, data)
}

/// Elementwise mean image of a stack (real part).
pub fn mean_image(stack: &[&ComplexArray2D]) -> Result<ComplexArray2D> {
    let (rows, cols) = check_stack(stack)?;
    let n = stack.len() as f64;
    let mut out = ComplexArray2D::zeros(rows, cols);
    for idx in 0..rows * cols {
        let mean = stack.iter().map(|img| img.as_slice()[idx].re).sum::<f64>() / n;
        out.as_mut_slice()[idx] = num_complex::Complex64::new(mean, 0.0);
    }
    Ok(out)
}

/// Voxels whose magnitude reaches `threshold_frac` times the maximum
/// magnitude of the baseline image.
pub fn make_mask(baseline_mean_image: &ComplexArray2D, threshold_frac: f64) -> BoolMap {
    let (rows, cols) = baseline_mean_image.shape();
    let max = baseline_mean_image
        .as_slice()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let threshold = threshold_frac * max;
    BoolMap {
        rows,
        cols,
        data: baseline_mean_image
            .as_slice()
            .iter()
            .map(|v| v.norm() >= threshold)
            .collect(),
    }
}

/// Default mask threshold: 10% of the baseline maximum.
pub const MASK_THRESHOLD_FRAC: f64 = 0.1;

/// Welch's unequal-variance t-test.
#[derive(Clone, Copy, Debug)]
pub struct WelchResult {
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub dof: f64,
    /// Two-sided p-value.
    pub p: f64,
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("Welch's t-test needs at least two samples per side"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var = |s: &[f64], m: f64| s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (s.len() as f64 - 1.0);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        // degenerate: both sides constant
        return Ok(if ma == mb {
            WelchResult { t: 0.0, dof: na + nb - 2.0, p: 1.0 }
        } else {
            WelchResult {
                t: (ma - mb).signum() * f64::INFINITY,
                dof: na + nb - 2.0,
                p: 0.0,
            }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2
        / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    Ok(WelchResult {
        t,
        dof,
        p: student_t_two_sided_p(t, dof),
    })
}

/// Masked scalar summary of one method on one scenario; one CSV row.
#[derive(Clone, Debug)]
pub struct MetricSummary {
    pub method: String,
    pub scenario: String,
    pub mean_snr: f64,
    pub mean_removal_pct: f64,
    /// Masked mean of the voxelwise RMSE map.
    pub rmse_total: f64,
}

pub fn summarize(maps: &MetricMaps, method: &str, scenario: &str) -> MetricSummary {
    MetricSummary {
        method: method.to_string(),
        scenario: scenario.to_string(),
        mean_snr: maps.snr.masked_mean(&maps.mask),
        mean_removal_pct: maps.emi_removal_pct.masked_mean(&maps.mask),
        rmse_total: maps.rmse.masked_mean(&maps.mask),
    }
}
