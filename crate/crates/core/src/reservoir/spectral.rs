use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

/// Largest eigenvalue modulus, from the real Schur form.
///
/// Returns `None` if the QR iteration fails to converge.
pub fn spectral_radius(m: &DMatrix<f64>) -> Option<f64> {
    assert_eq!(m.nrows(), m.ncols(), "spectral radius needs a square matrix");
    if m.is_empty() {
        return Some(0.0);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)?;
    Some(
        schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rotation() {
        let d = DMatrix::from_diagonal_element(3, 3, 2.0);
        assert!((spectral_radius(&d).unwrap() - 2.0).abs() < 1e-14);

        // Complex pair 0.6 +- 0.8i has modulus 1.
        let r = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        assert!((spectral_radius(&r).unwrap() - 1.0).abs() < 1e-14);

        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(spectral_radius(&nil).unwrap() < 1e-12);
    }
}
