//! Rank-aware complex least squares built on a one-sided Jacobi SVD.
//!
//! Every solver in this crate shares the same policy: singular values below
//! `rcond` times the largest are treated as zero and the minimum-norm
//! solution is returned.
//!
//! The SVD is computed by one-sided Jacobi rotations rather than
//! bidiagonalization: the design matrices here are small, frequently
//! rank-deficient (noiseless sensors give exactly parallel columns), and
//! Jacobi stays accurate to machine precision in exactly that regime.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thin SVD `a = u * diag(sigma) * v^H` with `sigma` sorted descending.
pub struct ComplexSvd {
    pub u: DMatrix<Complex64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 64;

fn jacobi_svd_tall(a: &DMatrix<Complex64>) -> ComplexSvd {
    let (m, n) = (a.nrows(), a.ncols());
    debug_assert!(m >= n);
    let mut work = a.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = work[(i, p)];
                    let aq = work[(i, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    gamma += ap.conj() * aq;
                }
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // unitary 2x2 rotation orthogonalizing the column pair
                let phase = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let ap = work[(i, p)];
                    let aq = work[(i, q)];
                    work[(i, p)] = ap * c - aq * phase.conj() * s;
                    work[(i, q)] = ap * phase * s + aq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * phase.conj() * s;
                    v[(i, q)] = vp * phase * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| work.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = DMatrix::<Complex64>::zeros(m, n);
    let mut v_sorted = DMatrix::<Complex64>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, dst)] = work[(i, src)] / s;
            }
        }
        for i in 0..n {
            v_sorted[(i, dst)] = v[(i, src)];
        }
    }
    ComplexSvd { u, sigma, v: v_sorted }
}

/// Thin SVD of an arbitrary complex matrix. Wide matrices are factorized
/// through their adjoint.
pub fn complex_svd(a: &DMatrix<Complex64>) -> ComplexSvd {
    if a.nrows() >= a.ncols() {
        jacobi_svd_tall(a)
    } else {
        let t = jacobi_svd_tall(&a.adjoint());
        ComplexSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    }
}

/// SVD factorization of a design matrix, reusable across right-hand sides.
pub struct LstsqSolver {
    svd: ComplexSvd,
    /// reciprocal singular values, zeroed below the cutoff
    inv_s: Vec<f64>,
    rank: usize,
    ncols: usize,
}

impl LstsqSolver {
    /// Factorizes `a`. `rcond` must lie in (0, 1).
    pub fn new(a: DMatrix<Complex64>, rcond: f64) -> Result<Self> {
        if !(rcond > 0.0 && rcond < 1.0) {
            return Err(Error::invalid(format!("rcond {rcond} outside (0, 1)")));
        }
        if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("least-squares design matrix"));
        }
        let ncols = a.ncols();
        if a.nrows() == 0 || ncols == 0 {
            return Ok(Self {
                svd: ComplexSvd {
                    u: DMatrix::zeros(a.nrows(), 0),
                    sigma: Vec::new(),
                    v: DMatrix::zeros(ncols, 0),
                },
                inv_s: Vec::new(),
                rank: 0,
                ncols,
            });
        }
        let svd = complex_svd(&a);
        let max_sv = svd.sigma.first().copied().unwrap_or(0.0);
        let cutoff = rcond * max_sv;
        let mut rank = 0;
        let inv_s = svd
            .sigma
            .iter()
            .map(|&s| {
                if max_sv > 0.0 && s >= cutoff {
                    rank += 1;
                    1.0 / s
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { svd, inv_s, rank, ncols })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Minimum-norm least-squares solution for one right-hand side.
    pub fn solve(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        if self.rank == 0 {
            return DVector::zeros(self.ncols);
        }
        let mut coeffs = self.svd.u.adjoint() * b;
        for (c, &w) in coeffs.iter_mut().zip(&self.inv_s) {
            *c *= w;
        }
        &self.svd.v * coeffs
    }
}

/// One-shot minimum-norm least squares of `a x = b`.
pub fn lstsq(a: DMatrix<Complex64>, b: &DVector<Complex64>, rcond: f64) -> Result<DVector<Complex64>> {
    Ok(LstsqSolver::new(a, rcond)?.solve(b))
}

pub fn to_dvector(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

/// Test oracle: explicit normal equations solved by Gaussian elimination
/// with partial pivoting, a route fully independent of the SVD path. Only
/// valid on well-conditioned full-rank systems, which is all the tests
/// feed it.
#[cfg(test)]
pub(crate) fn normal_equation_solve(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
) -> DVector<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let gram = a.adjoint() * a;
    let rhs = a.adjoint() * b;
    let n = gram.nrows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| gram[(i, j)]).collect())
        .collect();
    let mut y: Vec<Complex64> = rhs.iter().cloned().collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| m[p][col].norm().partial_cmp(&m[q][col].norm()).unwrap())
            .unwrap();
        m.swap(col, piv);
        y.swap(col, piv);
        let d = m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / d;
            for k in col..n {
                let sub = f * m[col][k];
                m[r][k] -= sub;
            }
            let sub = f * y[col];
            y[r] -= sub;
        }
    }
    let mut x = vec![zero; n];
    for row in (0..n).rev() {
        let mut acc = y[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    DVector::from_vec(x)
}
