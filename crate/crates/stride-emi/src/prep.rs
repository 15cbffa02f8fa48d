//! Acquisition preprocessing: noise pre-whitening, optimal hard-threshold
//! SVD denoising of the EMI sensors, and channel combination.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::{ComplexArray2D, MultiCoilAcquisition};
use crate::error::{Error, Result};
use crate::linalg::complex_svd;

/// Channel noise covariance estimated from a noise-only scan.
#[derive(Clone, Debug)]
pub struct NoiseCovariance {
    psi: DMatrix<Complex64>,
    samples: usize,
}

impl NoiseCovariance {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.psi
    }

    pub fn channels(&self) -> usize {
        self.psi.nrows()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Default Cholesky ridge: 1e-12 * trace / N.
    pub fn default_ridge(&self) -> f64 {
        let n = self.channels().max(1) as f64;
        let trace: f64 = self.psi.diagonal().iter().map(|c| c.re).sum();
        1e-12 * trace / n
    }
}

/// Sample covariance Psi = (1/S) sum of s s^H over the rows of a
/// samples-by-channels noise matrix. Hermitian by construction; zero samples
/// give the zero matrix. This orientation makes `L^-1 x` whitening exactly
/// consistent: E[(L^-1 s)(L^-1 s)^H] = I.
pub fn estimate_noise_covariance(noise_samples: &ComplexArray2D) -> NoiseCovariance {
    let (s, n) = noise_samples.shape();
    let m = DMatrix::from_fn(s, n, |i, j| noise_samples.get(i, j));
    let mut psi = (m.adjoint() * m).map(|c| c.conj());
    if s > 0 {
        psi /= Complex64::new(s as f64, 0.0);
    }
    NoiseCovariance { psi, samples: s }
}

/// L^-1 for Psi = L L^H, applied to channel vectors to decorrelate noise.
#[derive(Clone, Debug)]
pub struct WhiteningTransform {
    l_inv: DMatrix<Complex64>,
}

impl WhiteningTransform {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.l_inv
    }

    pub fn channels(&self) -> usize {
        self.l_inv.nrows()
    }
}

/// Cholesky of (Psi + ridge I); fails when that matrix is not positive
/// definite.
pub fn whitening_transform(cov: &NoiseCovariance, ridge: f64) -> Result<WhiteningTransform> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::invalid("ridge must be a small non-negative number"));
    }
    let n = cov.channels();
    if n == 0 {
        return Err(Error::invalid("covariance over zero channels"));
    }
    let mut psi = cov.psi.clone();
    for i in 0..n {
        psi[(i, i)] += Complex64::new(ridge, 0.0);
    }
    let chol = nalgebra::linalg::Cholesky::new(psi).ok_or_else(|| {
        Error::Numerical("noise covariance not positive definite after ridge".into())
    })?;
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::<Complex64>::identity(n, n))
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    Ok(WhiteningTransform { l_inv })
}

/// Multiplies the channel vector at every (repeat, kx, ky) sample by L^-1.
pub fn apply_prewhitening(
    acq: &MultiCoilAcquisition,
    transform: &WhiteningTransform,
) -> Result<MultiCoilAcquisition> {
    let n = acq.total_channels();
    if transform.channels() != n {
        return Err(Error::shape(format!(
            "whitening transform is over {} channels, acquisition has {n}",
            transform.channels()
        )));
    }
    let mut out = acq.clone();
    let (kx, ky) = (acq.kx(), acq.ky());
    let mut v = DVector::<Complex64>::zeros(n);
    for r in 0..acq.repeats() {
        for i in 0..kx {
            for j in 0..ky {
                for c in 0..n {
                    v[c] = acq.channel(r, c).get(i, j);
                }
                let w = &transform.l_inv * &v;
                for c in 0..n {
                    out.channel_mut(r, c).set(i, j, w[c]);
                }
            }
        }
    }
    Ok(out)
}

/// Thermal noise levels of the measurement model, per complex component.
#[derive(Clone, Copy, Debug)]
pub struct NoiseModel {
    pub sigma_img: f64,
    pub sigma_emi: f64,
}

/// lambda*(beta): optimal hard-threshold coefficient for a known noise
/// level, beta the aspect ratio m/n (0 < beta <= 1).
pub fn lambda_star(beta: f64) -> f64 {
    (2.0 * (beta + 1.0) + 8.0 * beta / ((beta + 1.0) + (beta * beta + 14.0 * beta + 1.0).sqrt()))
        .sqrt()
}

/// Median of the Marchenko-Pastur distribution with ratio beta, found by
/// bisection on the numerically integrated CDF.
pub fn marchenko_pastur_median(beta: f64) -> f64 {
    let lo = (1.0 - beta.sqrt()).powi(2);
    let hi = (1.0 + beta.sqrt()).powi(2);
    // CDF via the substitution t = lo + (hi-lo) sin^2(theta), which removes
    // the inverse-square-root edge singularities
    let cdf = |x: f64| -> f64 {
        let theta_max = ((x - lo) / (hi - lo)).clamp(0.0, 1.0).sqrt().asin();
        let steps = 2000;
        let h = theta_max / steps as f64;
        let integrand = |theta: f64| -> f64 {
            let t = lo + (hi - lo) * theta.sin().powi(2);
            if t <= 0.0 {
                // theta = 0 limit for beta = 1
                return (hi - lo) / (std::f64::consts::PI * beta * hi) * (hi - lo);
            }
            (hi - lo).powi(2) * (2.0 * theta).sin().powi(2)
                / (4.0 * std::f64::consts::PI * beta * t)
        };
        // composite Simpson
        let mut acc = integrand(0.0) + integrand(theta_max);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(i as f64 * h);
        }
        acc * h / 3.0
    };
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if cdf(mid) < 0.5 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    0.5 * (a + b)
}

/// omega(beta) = lambda*(beta) / sqrt(mu_beta): the factor applied to the
/// median singular value when the noise level is unknown.
pub fn median_threshold_coefficient(beta: f64) -> f64 {
    lambda_star(beta) / marchenko_pastur_median(beta).sqrt()
}

/// How the noise level entering the hard threshold is known.
#[derive(Clone, Copy, Debug)]
pub enum NoiseScale {
    /// Noise standard deviation is known.
    Known(f64),
    /// Unknown noise level; scale from the median singular value of the
    /// data matrix.
    FromMedianSv(f64),
}

/// Optimal singular-value hard threshold for an m-by-n matrix with aspect
/// ratio `beta` = m/n <= 1; `n_cols` is the larger dimension n.
pub fn optimal_hard_threshold(beta: f64, scale: NoiseScale, n_cols: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid(format!("aspect ratio {beta} outside (0, 1]")));
    }
    match scale {
        NoiseScale::Known(sigma) => {
            if sigma < 0.0 {
                return Err(Error::invalid("negative noise level"));
            }
            Ok(lambda_star(beta) * (n_cols as f64).sqrt() * sigma)
        }
        NoiseScale::FromMedianSv(median_sv) => {
            if median_sv < 0.0 {
                return Err(Error::invalid("negative median singular value"));
            }
            Ok(median_threshold_coefficient(beta) * median_sv)
        }
    }
}

fn median(sorted_desc: &[f64]) -> f64 {
    let n = sorted_desc.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted_desc[n / 2]
    } else {
        0.5 * (sorted_desc[n / 2 - 1] + sorted_desc[n / 2])
    }
}

/// Hard-thresholds each sensor channel across repeats: the repeats-by-samples
/// matrix of a sensor is reconstructed from the singular values that survive
/// the unknown-noise-level threshold. Imaging channels pass through.
pub fn denoise_sensors(acq: &MultiCoilAcquisition) -> Result<MultiCoilAcquisition> {
    if acq.sensor_channels() == 0 {
        return Err(Error::invalid("acquisition has no sensor channels to denoise"));
    }
    let mut out = acq.clone();
    let repeats = acq.repeats();
    let samples = acq.kx() * acq.ky();
    let beta = repeats.min(samples) as f64 / repeats.max(samples) as f64;
    for s in 0..acq.sensor_channels() {
        let channel = acq.imaging_channels() + s;
        let m = DMatrix::from_fn(repeats, samples, |r, i| {
            acq.channel(r, channel).as_slice()[i]
        });
        let svd = complex_svd(&m);
        let tau = optimal_hard_threshold(beta, NoiseScale::FromMedianSv(median(&svd.sigma)), 0)?;
        let mut cleaned = DMatrix::<Complex64>::zeros(repeats, samples);
        for (i, &sv) in svd.sigma.iter().enumerate() {
            if sv >= tau && sv > 0.0 {
                let scaled = svd.u.column(i) * Complex64::new(sv, 0.0);
                cleaned += scaled * svd.v.column(i).adjoint();
            }
        }
        for r in 0..repeats {
            let row: Vec<Complex64> = (0..samples).map(|i| cleaned[(r, i)]).collect();
            let arr = ComplexArray2D::from_vec(acq.kx(), acq.ky(), row)?;
            out.set_channel(r, channel, arr)?;
        }
    }
    Ok(out)
}

/// Voxelwise root-sum-of-squared magnitudes over imaging coils; the result
/// is real-valued (zero imaginary part).
pub fn sos_combine(coil_images: &[&ComplexArray2D]) -> Result<ComplexArray2D> {
    let Some(first) = coil_images.first() else {
        return Err(Error::invalid("sum-of-squares of an empty coil list"));
    };
    let (rows, cols) = first.shape();
    for img in coil_images {
        if img.shape() != (rows, cols) {
            return Err(Error::shape("coil images of differing shapes"));
        }
    }
    let mut out = ComplexArray2D::zeros(rows, cols);
    for idx in 0..rows * cols {
        let sum: f64 = coil_images.iter().map(|img| img.as_slice()[idx].norm_sqr()).sum();
        out.as_mut_slice()[idx] = Complex64::new(sum.sqrt(), 0.0);
    }
    Ok(out)
}

/// Elementwise arithmetic mean of equally shaped images.
pub fn complex_average(images: &[&ComplexArray2D]) -> Result<ComplexArray2D> {
    let Some(first) = images.first() else {
        return Err(Error::invalid("average of an empty image list"));
    };
    let (rows, cols) = first.shape();
    let mut out = ComplexArray2D::zeros(rows, cols);
    for img in images {
        if img.shape() != (rows, cols) {
            return Err(Error::shape("images of differing shapes"));
        }
        for (acc, v) in out.as_mut_slice().iter_mut().zip(img.as_slice()) {
            *acc += v;
        }
    }
    let scale = Complex64::new(1.0 / images.len() as f64, 0.0);
    Ok(out.scale(scale))
}
