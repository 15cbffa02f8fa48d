//! Per-column EMI subtraction regularized for total-variation smoothness.
//!
//! For each image column y the solver picks noise-subspace coefficients A
//! minimizing ||W (y - U A)||_2, where W is the first-difference operator
//! along the readout direction and U stacks nearby EMI-sensor image columns.
//! The closed-form solution is A = (W U)^+ W y; the corrected column is
//! y - U A. Columns are independent, so the loop is data-parallel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{ComplexArray2D, Domain, MultiCoilAcquisition};
use crate::error::{Error, Result};
use crate::fft::ifft2c;
use crate::linalg::{to_dvector, LstsqSolver};

/// First-difference operator along a length-`n` column:
/// (n-1) x n with W[i,i] = -1 and W[i,i+1] = +1.
#[derive(Clone, Copy, Debug)]
pub struct TvMatrix {
    n: usize,
}

impl TvMatrix {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "difference operator needs a column of at least 2 samples, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Column length the operator applies to.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.n - 1
    }

    /// Entry (i, j) of the dense representation.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j == i {
            -1.0
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    }

    /// W v: successive differences of `v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        v.windows(2).map(|w| w[1] - w[0]).collect()
    }

    fn apply_columns(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows(), m.ncols(), |i, j| m[(i + 1, j)] - m[(i, j)])
    }
}

/// Parameters of the per-column correction.
#[derive(Clone, Copy, Debug)]
pub struct StrideConfig {
    /// Number of adjacent sensor-image columns per sensor (odd).
    pub delta_y: usize,
    /// Relative singular-value cutoff of the pseudoinverse.
    pub pinv_rcond: f64,
    /// Hard-threshold the sensor channels before correcting.
    pub sensor_denoise: bool,
}

impl Default for StrideConfig {
    fn default() -> Self {
        Self {
            delta_y: 7,
            pinv_rcond: 1e-10,
            sensor_denoise: false,
        }
    }
}

impl StrideConfig {
    pub fn validate(&self, ky: usize) -> Result<()> {
        if self.delta_y == 0 || self.delta_y.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "window width {} must be a positive odd count",
                self.delta_y
            )));
        }
        if self.delta_y > ky {
            return Err(Error::invalid(format!(
                "window width {} exceeds the {ky} available columns",
                self.delta_y
            )));
        }
        if !(self.pinv_rcond > 0.0 && self.pinv_rcond < 1.0) {
            return Err(Error::invalid("pinv_rcond outside (0, 1)"));
        }
        Ok(())
    }
}

/// Cross-column extent in the readout direction; only same-column sensor
/// data enters the subspace.
pub const DELTA_X: usize = 1;

/// Sensor-image columns stacked as the noise subspace for one target column.
pub struct NoiseSubspace {
    matrix: DMatrix<Complex64>,
    window: Vec<usize>,
    sensors: usize,
}

impl NoiseSubspace {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Source image-column indices, shared by every sensor.
    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// U a.
    pub fn mul(&self, a: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * a
    }
}

/// Builds U for the column `col`: per sensor, the `delta_y` columns of its
/// image in a window centered on `col`, shifted inward at the edges so the
/// subspace always has sensors * delta_y columns.
pub fn build_noise_subspace(
    sensor_images: &[&ComplexArray2D],
    col: usize,
    cfg: &StrideConfig,
) -> Result<NoiseSubspace> {
    let Some(first) = sensor_images.first() else {
        return Ok(NoiseSubspace {
            matrix: DMatrix::zeros(0, 0),
            window: Vec::new(),
            sensors: 0,
        });
    };
    let (kx, ky) = first.shape();
    cfg.validate(ky)?;
    if col >= ky {
        return Err(Error::invalid(format!("column {col} out of 0..{ky}")));
    }
    for s in sensor_images {
        if s.shape() != (kx, ky) {
            return Err(Error::shape("sensor images of differing shapes"));
        }
    }
    let half = cfg.delta_y / 2;
    let start = col.saturating_sub(half).min(ky - cfg.delta_y);
    let window: Vec<usize> = (start..start + cfg.delta_y).collect();
    let mut matrix = DMatrix::zeros(kx, sensor_images.len() * cfg.delta_y);
    for (s, img) in sensor_images.iter().enumerate() {
        // columns at the rounding floor of the transform are exact zeros in
        // exact arithmetic; the relative singular-value cutoff downstream
        // would otherwise amplify pure float residue into the correction
        let floor = 1e-12
            * (0..ky)
                .map(|j| (0..kx).map(|i| img.get(i, j).norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
        for (w, &src) in window.iter().enumerate() {
            let dst = s * cfg.delta_y + w;
            let norm = (0..kx).map(|i| img.get(i, src).norm_sqr()).sum::<f64>().sqrt();
            if norm <= floor {
                continue;
            }
            for i in 0..kx {
                matrix[(i, dst)] = img.get(i, src);
            }
        }
    }
    Ok(NoiseSubspace {
        matrix,
        window,
        sensors: sensor_images.len(),
    })
}

/// Optimal noise-subspace coefficients for one column.
#[derive(Clone, Debug)]
pub struct SubspaceCoefficients {
    pub values: Vec<Complex64>,
}

/// Factorized solver for one target column, reusable across coils sharing
/// the same sensor data.
pub struct ColumnSolver {
    subspace: NoiseSubspace,
    tv: TvMatrix,
    solver: LstsqSolver,
}

impl ColumnSolver {
    pub fn new(subspace: NoiseSubspace, tv: TvMatrix, rcond: f64) -> Result<Self> {
        if subspace.matrix.nrows() != tv.n() && subspace.ncols() > 0 {
            return Err(Error::shape("noise subspace rows differ from column length"));
        }
        let wu = tv.apply_columns(&subspace.matrix);
        let solver = LstsqSolver::new(wu, rcond)?;
        Ok(Self { subspace, tv, solver })
    }

    /// A = (W U)^+ W y and the corrected column y - U A. When the weighted
    /// subspace is identically zero the input column is returned untouched.
    pub fn apply(&self, y_img: &[Complex64]) -> Result<(SubspaceCoefficients, Vec<Complex64>)> {
        if y_img.len() != self.tv.n() {
            return Err(Error::shape("column length differs from the solver's"));
        }
        if y_img.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("image column"));
        }
        if self.solver.rank() == 0 {
            return Ok((
                SubspaceCoefficients {
                    values: vec![Complex64::new(0.0, 0.0); self.subspace.ncols()],
                },
                y_img.to_vec(),
            ));
        }
        let wy = to_dvector(&self.tv.apply(y_img));
        let coeffs = self.solver.solve(&wy);
        let emi = self.subspace.mul(&coeffs);
        let corrected = y_img.iter().zip(emi.iter()).map(|(y, e)| y - e).collect();
        Ok((
            SubspaceCoefficients {
                values: coeffs.iter().cloned().collect(),
            },
            corrected,
        ))
    }
}

/// One-shot version of [`ColumnSolver::apply`] for a prebuilt subspace.
pub fn solve_column(
    y_img: &[Complex64],
    subspace: NoiseSubspace,
    tv: TvMatrix,
    rcond: f64,
) -> Result<(SubspaceCoefficients, Vec<Complex64>)> {
    ColumnSolver::new(subspace, tv, rcond)?.apply(y_img)
}

/// Corrects several coil images against shared sensor images. The per-column
/// factorization is computed once and applied to every coil.
pub fn correct_images(
    coil_images: &[&ComplexArray2D],
    sensor_images: &[&ComplexArray2D],
    cfg: &StrideConfig,
) -> Result<Vec<ComplexArray2D>> {
    let Some(first) = coil_images.first() else {
        return Ok(Vec::new());
    };
    let (kx, ky) = first.shape();
    for img in coil_images.iter().chain(sensor_images) {
        if img.shape() != (kx, ky) {
            return Err(Error::shape("coil and sensor images must share one shape"));
        }
    }
    if sensor_images.is_empty() {
        return Ok(coil_images.iter().map(|img| (*img).clone()).collect());
    }
    cfg.validate(ky)?;
    let tv = TvMatrix::new(kx)?;

    // per column: factorize once, correct every coil
    let columns: Vec<Vec<Vec<Complex64>>> = (0..ky)
        .into_par_iter()
        .map(|j| {
            let subspace = build_noise_subspace(sensor_images, j, cfg)?;
            let solver = ColumnSolver::new(subspace, tv, cfg.pinv_rcond)?;
            coil_images
                .iter()
                .map(|img| Ok(solver.apply(&img.col(j))?.1))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out: Vec<ComplexArray2D> = coil_images
        .iter()
        .map(|_| ComplexArray2D::zeros(kx, ky))
        .collect();
    for (j, per_coil) in columns.iter().enumerate() {
        for (c, col) in per_coil.iter().enumerate() {
            out[c].set_col(j, col);
        }
    }
    Ok(out)
}

/// Corrects a single coil image; see [`correct_images`].
pub fn correct_image(
    coil_image: &ComplexArray2D,
    sensor_images: &[&ComplexArray2D],
    cfg: &StrideConfig,
) -> Result<ComplexArray2D> {
    Ok(correct_images(&[coil_image], sensor_images, cfg)?.remove(0))
}

/// Transforms an acquisition to the image domain and corrects every imaging
/// coil against the sensor images of its own repeat. With `sensor_denoise`
/// set, the sensor channels are hard-threshold denoised first.
pub fn correct_acquisition(
    acq: &MultiCoilAcquisition,
    cfg: &StrideConfig,
) -> Result<MultiCoilAcquisition> {
    let denoised;
    let acq = if cfg.sensor_denoise && acq.sensor_channels() > 0 {
        denoised = crate::prep::denoise_sensors(acq)?;
        &denoised
    } else {
        acq
    };
    let mut img_acq = match acq.domain() {
        Domain::KSpace => acq.transform_channels(Domain::Image, ifft2c)?,
        Domain::Image => acq.clone(),
    };
    for r in 0..acq.repeats() {
        let sensors: Vec<ComplexArray2D> = (0..img_acq.sensor_channels())
            .map(|s| img_acq.sensor(r, s).clone())
            .collect();
        let sensor_refs: Vec<&ComplexArray2D> = sensors.iter().collect();
        let coils: Vec<ComplexArray2D> = (0..img_acq.imaging_channels())
            .map(|c| img_acq.imaging(r, c).clone())
            .collect();
        let coil_refs: Vec<&ComplexArray2D> = coils.iter().collect();
        let corrected = correct_images(&coil_refs, &sensor_refs, cfg)?;
        for (c, arr) in corrected.into_iter().enumerate() {
            img_acq.set_channel(r, c, arr)?;
        }
    }
    Ok(img_acq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normal_equation_solve;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cols(kx: usize, ky: usize, seed: u64) -> ComplexArray2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexArray2D::from_fn(kx, ky, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn tv_matrix_entries_n4() {
        let w = TvMatrix::new(4).unwrap();
        let expected = [
            [-1.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert_eq!(w.entry(i, j), e);
            }
        }
    }

    #[test]
    fn tv_annihilates_constants_and_differentiates_ramps() {
        let w = TvMatrix::new(4).unwrap();
        let constant = vec![c(3.5, -1.0); 4];
        assert!(w.apply(&constant).iter().all(|v| v.norm() == 0.0));
        let ramp: Vec<_> = (0..4).map(|i| c(i as f64, 0.0)).collect();
        assert_eq!(w.apply(&ramp), vec![c(1.0, 0.0); 3]);
    }

    #[test]
    fn tv_needs_two_samples() {
        assert!(TvMatrix::new(1).is_err());
        assert!(TvMatrix::new(0).is_err());
    }

    #[test]
    fn subspace_counts_and_window_clamping() {
        let s0 = random_cols(8, 16, 1);
        let s1 = random_cols(8, 16, 2);
        let cfg = StrideConfig { delta_y: 7, ..Default::default() };
        let u = build_noise_subspace(&[&s0, &s1], 8, &cfg).unwrap();
        assert_eq!(u.ncols(), 14);
        assert_eq!(u.window(), &[5, 6, 7, 8, 9, 10, 11]);

        let cfg3 = StrideConfig { delta_y: 3, ..Default::default() };
        let left = build_noise_subspace(&[&s0], 0, &cfg3).unwrap();
        assert_eq!(left.window(), &[0, 1, 2]);
        let right = build_noise_subspace(&[&s0], 15, &cfg3).unwrap();
        assert_eq!(right.window(), &[13, 14, 15]);
    }

    #[test]
    fn subspace_window_of_one_is_the_sensor_columns() {
        let s0 = random_cols(6, 5, 3);
        let s1 = random_cols(6, 5, 4);
        let cfg = StrideConfig { delta_y: 1, ..Default::default() };
        let u = build_noise_subspace(&[&s0, &s1], 3, &cfg).unwrap();
        assert_eq!(u.ncols(), 2);
        for i in 0..6 {
            assert_eq!(u.matrix()[(i, 0)], s0.get(i, 3));
            assert_eq!(u.matrix()[(i, 1)], s1.get(i, 3));
        }
    }

    #[test]
    fn subspace_rejects_oversized_window() {
        let s0 = random_cols(8, 4, 5);
        let cfg = StrideConfig { delta_y: 7, ..Default::default() };
        assert!(build_noise_subspace(&[&s0], 0, &cfg).is_err());
    }

    #[test]
    fn zero_subspace_returns_input_bit_exact() {
        let zeros = ComplexArray2D::zeros(8, 4);
        let cfg = StrideConfig { delta_y: 3, ..Default::default() };
        let u = build_noise_subspace(&[&zeros], 2, &cfg).unwrap();
        let y: Vec<_> = (0..8).map(|i| c(i as f64 * 0.3, -(i as f64))).collect();
        let (a, corrected) = solve_column(&y, u, TvMatrix::new(8).unwrap(), 1e-10).unwrap();
        assert!(a.values.iter().all(|v| v.norm() == 0.0));
        for (x, y) in corrected.iter().zip(&y) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn solve_column_matches_dense_oracle() {
        // kx=8, delta_y=1, one sensor: y = ramp + a*u with known a
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let kx = 8;
        let sensor = random_cols(kx, 3, 7);
        let a_true = c(0.8, -0.6);
        let u_col = sensor.col(1);
        let y: Vec<Complex64> = (0..kx)
            .map(|i| c(i as f64 * 0.1, 0.0) + a_true * u_col[i])
            .collect();
        let _ = &mut rng;

        let tv = TvMatrix::new(kx).unwrap();
        let cfg = StrideConfig { delta_y: 1, ..Default::default() };
        let subspace = build_noise_subspace(&[&sensor], 1, &cfg).unwrap();
        let wu = DMatrix::from_fn(kx - 1, 1, |i, _| u_col[i + 1] - u_col[i]);
        let wy = to_dvector(&tv.apply(&y));
        let oracle = normal_equation_solve(&wu, &wy);

        let (a_hat, corrected) = solve_column(&y, subspace, tv, 1e-10).unwrap();
        let rel = (a_hat.values[0] - oracle[0]).norm() / oracle[0].norm();
        assert!(rel < 1e-8, "coefficient deviates from oracle by {rel}");

        let tv_before: f64 = tv.apply(&y).iter().map(|v| v.norm_sqr()).sum();
        let tv_after: f64 = tv.apply(&corrected).iter().map(|v| v.norm_sqr()).sum();
        assert!(tv_after <= tv_before + 1e-12);
    }

    #[test]
    fn dc_shift_equivariance() {
        let sensor = random_cols(16, 8, 9);
        let cfg = StrideConfig { delta_y: 3, ..Default::default() };
        let tv = TvMatrix::new(16).unwrap();
        let y = random_cols(16, 1, 10).col(0);
        let shift = c(2.5, -1.25);
        let shifted: Vec<_> = y.iter().map(|v| v + shift).collect();

        let u1 = build_noise_subspace(&[&sensor], 4, &cfg).unwrap();
        let (a1, corr1) = solve_column(&y, u1, tv, 1e-10).unwrap();
        let u2 = build_noise_subspace(&[&sensor], 4, &cfg).unwrap();
        let (a2, corr2) = solve_column(&shifted, u2, tv, 1e-10).unwrap();

        for (x, y) in a1.values.iter().zip(&a2.values) {
            assert!((x - y).norm() < 1e-9);
        }
        for (x, y) in corr1.iter().zip(&corr2) {
            assert!((x + shift - y).norm() < 1e-9);
        }
    }

    #[test]
    fn residual_tv_is_optimal_among_random_alternatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sensor0 = random_cols(24, 12, 31);
        let sensor1 = random_cols(24, 12, 32);
        let cfg = StrideConfig { delta_y: 3, ..Default::default() };
        let tv = TvMatrix::new(24).unwrap();
        let y = random_cols(24, 1, 33).col(0);
        let subspace = build_noise_subspace(&[&sensor0, &sensor1], 5, &cfg).unwrap();
        let u = subspace.matrix().clone();
        let (a_hat, corrected) = solve_column(&y, subspace, tv, 1e-10).unwrap();
        let best: f64 = tv.apply(&corrected).iter().map(|v| v.norm_sqr()).sum();
        for _ in 0..1000 {
            let alt: DVector<Complex64> = DVector::from_fn(a_hat.values.len(), |i, _| {
                a_hat.values[i] + c(0.1 * (rng.gen::<f64>() - 0.5), 0.1 * (rng.gen::<f64>() - 0.5))
            });
            let emi = &u * &alt;
            let resid: Vec<Complex64> = y.iter().zip(emi.iter()).map(|(a, b)| a - b).collect();
            let alt_tv: f64 = tv.apply(&resid).iter().map(|v| v.norm_sqr()).sum();
            assert!(best <= alt_tv + 1e-12);
        }
    }

    #[test]
    fn explicit_normal_equation_form_matches_pinv_form() {
        // Eq-style explicit route (U^H W^H W U)^-1 U^H W^H W y on a
        // well-conditioned instance
        let sensor0 = random_cols(20, 9, 51);
        let sensor1 = random_cols(20, 9, 52);
        let cfg = StrideConfig { delta_y: 3, ..Default::default() };
        let tv = TvMatrix::new(20).unwrap();
        let y = random_cols(20, 1, 53).col(0);
        let subspace = build_noise_subspace(&[&sensor0, &sensor1], 4, &cfg).unwrap();
        let wu = tv.apply_columns(subspace.matrix());
        let wy = to_dvector(&tv.apply(&y));
        let oracle = normal_equation_solve(&wu, &wy);
        let (a_hat, _) = solve_column(&y, subspace, tv, 1e-10).unwrap();
        let a_vec = DVector::from_column_slice(&a_hat.values);
        let rel = (&a_vec - &oracle).norm() / oracle.norm();
        assert!(rel < 1e-8, "explicit-form mismatch {rel}");
    }

    #[test]
    fn correct_image_with_zero_sensors_is_identity() {
        let img = random_cols(12, 10, 61);
        let zeros = ComplexArray2D::zeros(12, 10);
        let cfg = StrideConfig { delta_y: 3, ..Default::default() };
        let out = correct_image(&img, &[&zeros], &cfg).unwrap();
        for (a, b) in out.as_slice().iter().zip(img.as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn correct_image_matches_per_column_solves() {
        let img = random_cols(12, 10, 62);
        let sensor = random_cols(12, 10, 63);
        let cfg = StrideConfig { delta_y: 3, ..Default::default() };
        let out = correct_image(&img, &[&sensor], &cfg).unwrap();
        let tv = TvMatrix::new(12).unwrap();
        // process columns in reverse order; results must be identical
        for j in (0..10).rev() {
            let u = build_noise_subspace(&[&sensor], j, &cfg).unwrap();
            let (_, col) = solve_column(&img.col(j), u, tv, cfg.pinv_rcond).unwrap();
            assert_eq!(out.col(j), col);
        }
    }

    #[test]
    fn correct_image_rejects_shape_mismatch() {
        let img = random_cols(12, 10, 64);
        let sensor = random_cols(12, 8, 65);
        let cfg = StrideConfig::default();
        assert!(correct_image(&img, &[&sensor], &cfg).is_err());
    }

    #[test]
    fn config_rejects_even_or_oversized_windows() {
        let cfg = StrideConfig { delta_y: 4, ..Default::default() };
        assert!(cfg.validate(16).is_err());
        let cfg = StrideConfig { delta_y: 9, ..Default::default() };
        assert!(cfg.validate(8).is_err());
        let cfg = StrideConfig { delta_y: 7, ..Default::default() };
        assert!(cfg.validate(8).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn optimality_and_dc_equivariance(seed in 0u64..500, kx in 4usize..24, shift_re in -3.0f64..3.0, shift_im in -3.0f64..3.0) {
            let sensor = random_cols(kx, 6, seed);
            let cfg = StrideConfig { delta_y: 3, ..Default::default() };
            let tv = TvMatrix::new(kx).unwrap();
            let y = random_cols(kx, 1, seed.wrapping_add(1)).col(0);

            let subspace = build_noise_subspace(&[&sensor], 2, &cfg).unwrap();
            let u = subspace.matrix().clone();
            let (a_hat, corrected) = solve_column(&y, subspace, tv, 1e-10).unwrap();
            let best: f64 = tv.apply(&corrected).iter().map(|v| v.norm_sqr()).sum();

            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
            for _ in 0..20 {
                let alt = DVector::from_fn(a_hat.values.len(), |i, _| {
                    a_hat.values[i]
                        + Complex64::new(0.2 * (rng.gen::<f64>() - 0.5), 0.2 * (rng.gen::<f64>() - 0.5))
                });
                let emi = &u * &alt;
                let resid: Vec<Complex64> = y.iter().zip(emi.iter()).map(|(a, b)| a - b).collect();
                let alt_tv: f64 = tv.apply(&resid).iter().map(|v| v.norm_sqr()).sum();
                prop_assert!(best <= alt_tv + 1e-10);
            }

            let shift = Complex64::new(shift_re, shift_im);
            let shifted: Vec<Complex64> = y.iter().map(|v| v + shift).collect();
            let subspace2 = build_noise_subspace(&[&sensor], 2, &cfg).unwrap();
            let (_, corr2) = solve_column(&shifted, subspace2, tv, 1e-10).unwrap();
            for (a, b) in corrected.iter().zip(&corr2) {
                prop_assert!((a + shift - b).norm() < 1e-8);
            }
        }
    }
}
