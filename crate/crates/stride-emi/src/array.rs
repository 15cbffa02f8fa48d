//! Complex 2-D arrays and the multi-coil acquisition container.
//!
//! Arrays are `kx` rows by `ky` columns, row-major, double-precision complex.
//! The readout direction runs down a column, so one acquired phase-encode
//! line in k-space and one image column both occupy a single `col` index.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexArray2D {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexArray2D {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Wraps an existing row-major buffer. Fails on length mismatch or
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "buffer of {} values cannot be {rows}x{cols}",
                data.len()
            )));
        }
        let arr = Self { rows, cols, data };
        if !arr.is_finite() {
            return Err(Error::NonFinite("array construction"));
        }
        Ok(arr)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Copy of column `col` (length `rows`).
    pub fn col(&self, col: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn set_col(&mut self, col: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self.set(i, col, *v);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Elementwise `self - other` (shapes must match).
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape("subtraction of differently shaped arrays"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }
}

/// Relative l2 distance between two equally shaped arrays; the denominator
/// is the norm of `reference`.
pub fn relative_error(a: &ComplexArray2D, reference: &ComplexArray2D) -> f64 {
    let num = a
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den = reference.norm2();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Which domain the channel arrays currently live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    KSpace,
    Image,
}

/// Informational metadata carried alongside an acquisition; none of it
/// influences the numerics.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AcquisitionMeta {
    #[serde(default)]
    pub scenario_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub te_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Filename of a samples-by-channels noise-only scan inside the dataset
    /// directory, when one was recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scan: Option<String>,
    /// True when the dataset directory also holds per-repeat combined
    /// magnitude images.
    #[serde(default)]
    pub combined: bool,
}

/// Repeated multi-channel acquisition: `repeats` x (imaging + sensor
/// channels), each channel a `kx` x `ky` complex array.
#[derive(Clone, Debug)]
pub struct MultiCoilAcquisition {
    repeats: usize,
    imaging_channels: usize,
    sensor_channels: usize,
    kx: usize,
    ky: usize,
    domain: Domain,
    /// repeat-major, imaging channels first, then sensors
    channels: Vec<ComplexArray2D>,
    pub meta: AcquisitionMeta,
}

impl MultiCoilAcquisition {
    pub fn new(
        repeats: usize,
        imaging_channels: usize,
        sensor_channels: usize,
        kx: usize,
        ky: usize,
        domain: Domain,
    ) -> Result<Self> {
        if imaging_channels == 0 {
            return Err(Error::invalid("at least one imaging channel is required"));
        }
        if repeats == 0 || kx == 0 || ky == 0 {
            return Err(Error::invalid("repeats and matrix dimensions must be positive"));
        }
        let n = repeats * (imaging_channels + sensor_channels);
        Ok(Self {
            repeats,
            imaging_channels,
            sensor_channels,
            kx,
            ky,
            domain,
            channels: vec![ComplexArray2D::zeros(kx, ky); n],
            meta: AcquisitionMeta::default(),
        })
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn imaging_channels(&self) -> usize {
        self.imaging_channels
    }

    pub fn sensor_channels(&self) -> usize {
        self.sensor_channels
    }

    pub fn total_channels(&self) -> usize {
        self.imaging_channels + self.sensor_channels
    }

    pub fn kx(&self) -> usize {
        self.kx
    }

    pub fn ky(&self) -> usize {
        self.ky
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn index(&self, repeat: usize, channel: usize) -> usize {
        assert!(repeat < self.repeats && channel < self.total_channels());
        repeat * self.total_channels() + channel
    }

    /// Channel `channel` of repeat `repeat`; imaging channels come first.
    pub fn channel(&self, repeat: usize, channel: usize) -> &ComplexArray2D {
        &self.channels[self.index(repeat, channel)]
    }

    pub fn channel_mut(&mut self, repeat: usize, channel: usize) -> &mut ComplexArray2D {
        let idx = self.index(repeat, channel);
        &mut self.channels[idx]
    }

    pub fn imaging(&self, repeat: usize, coil: usize) -> &ComplexArray2D {
        assert!(coil < self.imaging_channels);
        self.channel(repeat, coil)
    }

    pub fn sensor(&self, repeat: usize, sensor: usize) -> &ComplexArray2D {
        assert!(sensor < self.sensor_channels);
        self.channel(repeat, self.imaging_channels + sensor)
    }

    pub fn set_channel(&mut self, repeat: usize, channel: usize, arr: ComplexArray2D) -> Result<()> {
        if arr.shape() != (self.kx, self.ky) {
            return Err(Error::shape(format!(
                "channel array {}x{} does not match acquisition {}x{}",
                arr.rows(),
                arr.cols(),
                self.kx,
                self.ky
            )));
        }
        let idx = self.index(repeat, channel);
        self.channels[idx] = arr;
        Ok(())
    }

    /// All sensor images of one repeat, in sensor order.
    pub fn sensors_of(&self, repeat: usize) -> Vec<&ComplexArray2D> {
        (0..self.sensor_channels).map(|s| self.sensor(repeat, s)).collect()
    }

    /// Applies `f` to every channel array, keeping shape, flipping to `domain`.
    pub fn transform_channels(
        &self,
        domain: Domain,
        f: impl Fn(&ComplexArray2D) -> Result<ComplexArray2D> + Sync,
    ) -> Result<Self> {
        let mut out = self.clone();
        for (dst, src) in out.channels.iter_mut().zip(&self.channels) {
            *dst = f(src)?;
        }
        out.domain = domain;
        Ok(out)
    }
}
