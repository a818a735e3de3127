//! Small dense linear-algebra helpers shared by the design modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Relative singular-value floor under which a constraint matrix is treated as rank deficient.
pub(crate) const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of the right null space of `rows` (m×n, m < n), computed from the SVD of
/// the zero-padded square matrix.
///
/// Each basis column is normalised so that its largest-magnitude entry (the first one on ties)
/// is real and positive, which makes the output reproducible across runs.
pub(crate) fn null_space<T>(rows: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (m, n) = rows.shape();
    if m >= n {
        return Err(Error::DegenerateGeometry(format!(
            "{m} constraint rows leave no null space in dimension {n}"
        )));
    }
    if m == 0 {
        return Ok(canonical_signs(DMatrix::identity(n, n)));
    }
    let mut padded = DMatrix::<T>::zeros(n, n);
    padded.rows_mut(0, m).copy_from(rows);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = svd.singular_values[order[0]];
    let smallest_kept = svd.singular_values[order[m - 1]];
    if !(largest > 0.0) || smallest_kept <= RANK_TOL * largest {
        return Err(Error::DegenerateGeometry(format!(
            "constraint matrix is rank deficient (singular value ratio {:.3e})",
            if largest > 0.0 { smallest_kept / largest } else { 0.0 }
        )));
    }

    let mut basis = DMatrix::<T>::zeros(n, n - m);
    for (col, &idx) in order[m..].iter().enumerate() {
        for row in 0..n {
            basis[(row, col)] = v_t[(idx, row)].conjugate();
        }
    }
    Ok(canonical_signs(basis))
}

fn canonical_signs<T>(mut basis: DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    for mut col in basis.column_iter_mut() {
        let largest = col.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        // first entry that ties with the largest, so rounding noise cannot flip the choice
        let pivot = col
            .iter()
            .copied()
            .find(|v| v.modulus() >= largest * (1.0 - 1e-9))
            .unwrap_or_else(T::zero);
        let modulus = pivot.modulus();
        if modulus > 0.0 {
            // unit-modulus phase that maps the pivot onto the positive real axis
            let phase = pivot.conjugate().unscale(modulus);
            col *= phase;
        }
    }
    basis
}

/// Hermitian part `(m + mᴴ)/2`.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Real part of `tr(a·b)` without forming the product.
pub(crate) fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_axis_aligned() {
        let rows = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let basis = null_space(&rows).unwrap();
        assert_eq!(basis.shape(), (2, 1));
        assert!((basis[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(basis[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn complex_null_space_is_orthonormal_complement() {
        let rows = CMatrix::from_row_slice(1, 3, &[C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.5)]);
        let basis = null_space(&rows).unwrap();
        assert_eq!(basis.shape(), (3, 2));
        assert!((&rows * &basis).norm() < 1e-14);
        let gram = basis.adjoint() * &basis;
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_rows_rejected() {
        let rows = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(null_space(&rows), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let recon = &vecs
            * CMatrix::from_diagonal(&DVector::from_iterator(2, vals.iter().map(|&v| C64::new(v, 0.0))))
            * vecs.adjoint();
        assert!((recon - m).norm() < 1e-12);
    }
}
