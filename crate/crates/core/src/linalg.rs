//! Small dense linear-algebra helpers shared by the bound computations.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;

/// Largest `|M - M†|` entry.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Largest `|M - Mᵀ|` entry.
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Trace norm `Tr √(M†M)` of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &DMatrix<Complex64>) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|v| v.abs()).sum())
}

/// Trace norm of a real antisymmetric 3×3 matrix `A`.
///
/// `iA` is Hermitian with spectrum `{0, ±|a|}` where `a` is the axial vector
/// of `A`, so the trace norm is `2|a|`.
pub fn antisymmetric3_trace_norm(a: &Matrix3<f64>) -> f64 {
    2.0 * axial_norm(a)
}

/// Smoothed variant `Σ (√(λ² + ε²) − ε)` over the spectrum `{0, ±|a|}`.
pub fn antisymmetric3_trace_norm_smoothed(a: &Matrix3<f64>, eps: f64) -> f64 {
    if eps == 0.0 {
        return antisymmetric3_trace_norm(a);
    }
    let n = axial_norm(a);
    2.0 * ((n * n + eps * eps).sqrt() - eps)
}

fn axial_norm(a: &Matrix3<f64>) -> f64 {
    let x = 0.5 * (a[(2, 1)] - a[(1, 2)]);
    let y = 0.5 * (a[(0, 2)] - a[(2, 0)]);
    let z = 0.5 * (a[(1, 0)] - a[(0, 1)]);
    (x * x + y * y + z * z).sqrt()
}

/// Inverse of the principal submatrix on `support`, embedded back into the
/// full dimension with zeros elsewhere.
pub fn inverse_on_support(m: &DMatrix<f64>, support: &[usize]) -> Result<DMatrix<f64>> {
    let k = support.len();
    let sub = DMatrix::from_fn(k, k, |i, j| m[(support[i], support[j])]);
    let inv = sub.cholesky().ok_or(Error::Singular)?.inverse();
    let mut full = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, &si) in support.iter().enumerate() {
        for (j, &sj) in support.iter().enumerate() {
            full[(si, sj)] = inv[(i, j)];
        }
    }
    Ok(full)
}

/// Complex copy of a real matrix.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trace_norm_of_zero_and_diagonal() {
        let zero = DMatrix::<Complex64>::zeros(3, 3);
        assert_eq!(trace_norm_hermitian(&zero).unwrap(), 0.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        assert!((trace_norm_hermitian(&d).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(trace_norm_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn quarter_antisymmetric_block() {
        // i × [[0, ¼, 0], [−¼, 0, 0], [0, 0, 0]]
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        m[(0, 1)] = Complex64::new(0.0, 0.25);
        m[(1, 0)] = Complex64::new(0.0, -0.25);
        assert!((trace_norm_hermitian(&m).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn inverse_on_support_embeds_zeros() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![7.0, 2.0, 4.0, 9.0]));
        let inv = inverse_on_support(&m, &[1, 2]).unwrap();
        assert_eq!(inv[(0, 0)], 0.0);
        assert_eq!(inv[(3, 3)], 0.0);
        assert!((inv[(1, 1)] - 0.5).abs() < 1e-15);
        assert!((inv[(2, 2)] - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn closed_form_matches_eigensolver(x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64) {
            let a = Matrix3::new(0.0, z, -y, -z, 0.0, x, y, -x, 0.0);
            let herm = DMatrix::from_fn(3, 3, |i, j| Complex64::new(0.0, a[(i, j)]));
            let generic = trace_norm_hermitian(&herm).unwrap();
            prop_assert!((generic - antisymmetric3_trace_norm(&a)).abs() < 1e-12);
        }
    }
}
