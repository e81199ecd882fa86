use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Linear readout `y = W_out [x; 1]`; the last column holds the bias.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutWeights {
    weights: DMatrix<f64>,
}

impl ReadoutWeights {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("readout weights"));
        }
        Ok(ReadoutWeights { weights })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Applies the readout to a reservoir state, appending the bias term.
    pub fn apply(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.weights.ncols() - 1;
        if state.len() != n {
            return Err(Error::LengthMismatch {
                what: "readout state",
                expected: n,
                actual: state.len(),
            });
        }
        Ok(self.weights.columns(0, n) * state + self.weights.column(n))
    }
}

/// Tikhonov-regularized least squares `W = Y X^T (X X^T + lambda I)^-1`.
///
/// Columns of `x` and `y` are paired samples; `x` is used as given, so a
/// bias row must already be present if one is wanted.
pub fn train_readout(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> Result<ReadoutWeights> {
    if x.ncols() != y.ncols() {
        return Err(Error::LengthMismatch {
            what: "training columns",
            expected: x.ncols(),
            actual: y.ncols(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge penalty must be finite and >= 0, got {lambda}"
        )));
    }
    let mut normal = x * x.transpose();
    for i in 0..normal.nrows() {
        normal[(i, i)] += lambda;
    }
    let max_diag = normal.diagonal().iter().copied().fold(0.0, f64::max);
    let chol = Cholesky::new(normal).ok_or(Error::SingularNormalMatrix)?;
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|d| d * d)
        .fold(f64::INFINITY, f64::min);
    if !(min_pivot > max_diag * 1e-14) {
        return Err(Error::SingularNormalMatrix);
    }
    // A W^T = X Y^T with A symmetric.
    let rhs = x * y.transpose();
    ReadoutWeights::new(chol.solve(&rhs).transpose())
}

/// `||W X - Y||^2 + lambda ||W||^2`.
pub fn ridge_objective(w: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> f64 {
    (w * x - y).norm_squared() + lambda * w.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_fit() {
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let y = DMatrix::from_row_slice(1, 3, &[2.0, 4.0, 6.0]);
        let w = train_readout(&x, &y, 0.0).unwrap();
        assert!((w.matrix()[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heavy_ridge_shrinks_to_zero() {
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let y = DMatrix::from_row_slice(1, 3, &[2.0, 4.0, 6.0]);
        let w = train_readout(&x, &y, 1e12).unwrap();
        assert!(w.matrix().norm() < 1e-6);
    }

    #[test]
    fn singular_without_penalty() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let y = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        assert!(matches!(train_readout(&x, &y, 0.0), Err(Error::SingularNormalMatrix)));
        assert!(train_readout(&x, &y, 1e-3).is_ok());
    }

    #[test]
    fn recovers_planted_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(5, 40, |_, _| rng.random_range(-1.0..1.0));
        let g = DMatrix::from_fn(3, 5, |_, _| rng.random_range(-2.0..2.0));
        let y = &g * &x;
        let w = train_readout(&x, &y, 1e-12).unwrap();
        let err = (w.matrix() - &g).amax();
        assert!(err < 1e-6, "max abs error {err}");
    }

    #[test]
    fn mismatched_columns() {
        let x = DMatrix::zeros(2, 3);
        let y = DMatrix::zeros(1, 4);
        assert!(matches!(train_readout(&x, &y, 1.0), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn solution_is_a_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(6, 30, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(2, 30, |_, _| rng.random_range(-1.0..1.0));
        let lambda = 0.1;
        let w = train_readout(&x, &y, lambda).unwrap();
        let base = ridge_objective(w.matrix(), &x, &y, lambda);
        for i in 0..w.matrix().nrows() {
            for j in 0..w.matrix().ncols() {
                for delta in [-1e-3, 1e-3] {
                    let mut p = w.matrix().clone();
                    p[(i, j)] += delta;
                    assert!(ridge_objective(&p, &x, &y, lambda) >= base);
                }
            }
        }
    }
}
