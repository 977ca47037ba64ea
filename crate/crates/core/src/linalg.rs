//! Dense symmetric helpers shared by the exact fBm generator and the
//! finite-dimensional densities.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative size of the first diagonal jitter, in units of the largest diagonal entry.
pub const JITTER_START: f64 = 1e-12;
/// Number of ×10 escalations after the first jittered attempt.
pub const JITTER_ESCALATIONS: u32 = 3;

/// Lower Cholesky factor together with the diagonal jitter that was needed.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub lower: DMatrix<f64>,
    /// Absolute jitter added to the diagonal; 0 when none was needed.
    pub jitter: f64,
}

impl CholeskyFactor {
    /// log det of the factored matrix (jitter included).
    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves L z = b.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lower
            .solve_lower_triangular(b)
            .expect("Cholesky factors have a positive diagonal")
    }
}

/// Cholesky factorization with bounded diagonal regularization.
///
/// Tries the matrix as given, then with jitter `1e-12·max_diag`, escalated
/// ×10 at most three times. Fails with [`Error::Cholesky`] afterwards.
pub fn cholesky_with_jitter(m: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let dim = m.nrows();
    if let Some(c) = m.clone().cholesky() {
        return Ok(CholeskyFactor {
            lower: c.unpack(),
            jitter: 0.0,
        });
    }
    let max_diag = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
    let mut jitter = JITTER_START * max_diag;
    for attempt in 0..=JITTER_ESCALATIONS {
        if attempt > 0 {
            jitter *= 10.0;
        }
        if jitter <= 0.0 {
            break;
        }
        let mut shifted = m.clone();
        for i in 0..dim {
            shifted[(i, i)] += jitter;
        }
        if let Some(c) = shifted.cholesky() {
            return Ok(CholeskyFactor {
                lower: c.unpack(),
                jitter,
            });
        }
    }
    Err(Error::Cholesky { dim, jitter })
}

/// Spectral condition number λ_max / λ_min of a symmetric matrix.
/// Infinite when the smallest eigenvalue is not positive.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let (lo, hi) = eigen_range(&eig.eigenvalues);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigen_range(&SymmetricEigen::new(m.clone()).eigenvalues).0
}

fn eigen_range(ev: &DVector<f64>) -> (f64, f64) {
    ev.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_spd_without_jitter() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let f = cholesky_with_jitter(&m).unwrap();
        assert_eq!(f.jitter, 0.0);
        let back = &f.lower * f.lower.transpose();
        assert!((back - m).abs().max() < 1e-14);
        assert!((f.log_det() - 8.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_psd_needs_jitter() {
        // rank one, PSD
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let m = &v * v.transpose();
        let f = cholesky_with_jitter(&m).unwrap();
        assert!(f.jitter > 0.0 && f.jitter <= 1e-9 * 9.0);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(cholesky_with_jitter(&m), Err(Error::Cholesky { dim: 2, .. })));
        assert!(condition_number(&m).is_infinite());
    }

    #[test]
    fn condition_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-3, 10.0]));
        assert!((condition_number(&m) - 1e4).abs() < 1e-8);
        assert!((min_eigenvalue(&m) - 1e-3).abs() < 1e-15);
    }
}
