//! Centered, unitary 2-D Fourier transforms.
//!
//! Both directions use fftshift-style centering on both axes so that DC sits
//! at the array center and image columns line up with the per-column solver's
//! indexing. The pair is exactly inverse: each direction scales by
//! 1/sqrt(rows*cols).

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::array::ComplexArray2D;
use crate::error::{Error, Result};

/// Forward centered unitary 2-D FFT (image -> k-space).
pub fn fft2c(img: &ComplexArray2D) -> Result<ComplexArray2D> {
    transform(img, FftDirection::Forward)
}

/// Inverse centered unitary 2-D FFT (k-space -> image).
pub fn ifft2c(ksp: &ComplexArray2D) -> Result<ComplexArray2D> {
    transform(ksp, FftDirection::Inverse)
}

fn transform(arr: &ComplexArray2D, direction: FftDirection) -> Result<ComplexArray2D> {
    if !arr.is_finite() {
        return Err(Error::NonFinite("fft input"));
    }
    let (rows, cols) = arr.shape();
    let mut buf = shift2(arr.as_slice(), rows, cols, ShiftKind::Inverse);
    fft_2d(&mut buf, rows, cols, direction);
    let mut out = shift2(&buf, rows, cols, ShiftKind::Forward);
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    for v in &mut out {
        *v *= scale;
    }
    ComplexArray2D::from_vec(rows, cols, out)
}

fn fft_2d(buf: &mut [Complex64], rows: usize, cols: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();

    // rows are contiguous in row-major layout
    let row_fft = planner.plan_fft(cols, direction);
    let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(cols) {
        row_fft.process_with_scratch(row, &mut scratch);
    }

    // transpose, transform the other axis, transpose back
    let mut transposed = transpose(buf, rows, cols);
    let col_fft = planner.plan_fft(rows, direction);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex64::default());
    for row in transposed.chunks_exact_mut(rows) {
        col_fft.process_with_scratch(row, &mut scratch);
    }
    let back = transpose(&transposed, cols, rows);
    buf.copy_from_slice(&back);
}

fn transpose(m: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); m.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = m[i * cols + j];
        }
    }
    out
}

enum ShiftKind {
    /// fftshift: index 0 moves to floor(n/2)
    Forward,
    /// ifftshift: the exact inverse
    Inverse,
}

fn shift2(m: &[Complex64], rows: usize, cols: usize, kind: ShiftKind) -> Vec<Complex64> {
    let (dr, dc) = match kind {
        ShiftKind::Forward => (rows / 2, cols / 2),
        ShiftKind::Inverse => (rows - rows / 2, cols - cols / 2),
    };
    let mut out = vec![Complex64::default(); m.len()];
    for i in 0..rows {
        let ti = (i + dr) % rows;
        for j in 0..cols {
            let tj = (j + dc) % cols;
            out[ti * cols + tj] = m[i * cols + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::relative_error;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_array(rows: usize, cols: usize, seed: u64) -> ComplexArray2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexArray2D::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn impulse_at_center_transforms_to_constant() {
        let mut delta = ComplexArray2D::zeros(4, 4);
        delta.set(2, 2, Complex64::new(1.0, 0.0));
        let ksp = fft2c(&delta).unwrap();
        for v in ksp.as_slice() {
            assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_transforms_back_to_center_impulse() {
        let flat = ComplexArray2D::from_fn(4, 4, |_, _| Complex64::new(0.25, 0.0));
        let img = ifft2c(&flat).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i, j) == (2, 2) { 1.0 } else { 0.0 };
                assert!((img.get(i, j) - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = ComplexArray2D::zeros(8, 6);
        assert_eq!(ifft2c(&z).unwrap().norm2(), 0.0);
        assert_eq!(fft2c(&z).unwrap().norm2(), 0.0);
    }

    #[test]
    fn round_trip_32() {
        let x = random_array(32, 32, 1);
        let back = ifft2c(&fft2c(&x).unwrap()).unwrap();
        assert!(relative_error(&back, &x) < 1e-12);
        let fwd = fft2c(&ifft2c(&x).unwrap()).unwrap();
        assert!(relative_error(&fwd, &x) < 1e-12);
    }

    #[test]
    fn round_trip_large_and_odd_shapes() {
        for &(r, c) in &[(512usize, 512usize), (37, 64), (33, 21)] {
            let x = random_array(r, c, (r * c) as u64);
            let back = ifft2c(&fft2c(&x).unwrap()).unwrap();
            assert!(relative_error(&back, &x) < 1e-12, "{r}x{c}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut x = ComplexArray2D::zeros(4, 4);
        x.as_mut_slice()[5] = Complex64::new(f64::INFINITY, 0.0);
        assert!(fft2c(&x).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn parseval_and_inverse(seed in 0u64..1000, rows in 2usize..40, cols in 2usize..40) {
            let x = random_array(rows, cols, seed);
            let k = fft2c(&x).unwrap();
            let rel = (k.norm2() - x.norm2()).abs() / x.norm2();
            prop_assert!(rel < 1e-12);
            let back = ifft2c(&k).unwrap();
            prop_assert!(relative_error(&back, &x) < 1e-12);
        }
    }
}
