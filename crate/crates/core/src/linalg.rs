//! Small complex linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const J: C64 = C64::new(0.0, 1.0);

/// Column-stacking vectorization.
pub fn vec_of(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`] for an `n x n` matrix.
pub fn mat_of(v: &CVector, n: usize) -> CMatrix {
    assert_eq!(v.len(), n * n, "mat_of: length {} is not {}^2", v.len(), n);
    CMatrix::from_column_slice(n, n, v.as_slice())
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖Θ^H Θ − I‖_F`
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.ncols();
    frob(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// `‖Θ − Θ^T‖_F`
pub fn symmetry_residual(m: &CMatrix) -> f64 {
    frob(&(m - m.transpose()))
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    frob(&(m - m.adjoint()))
}

/// Principal angle in `[0, 2π)`; the angle of zero is zero.
pub fn wrapped_angle(z: C64) -> f64 {
    if z == C64::new(0.0, 0.0) {
        return 0.0;
    }
    let a = z.arg().rem_euclid(std::f64::consts::TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if a >= std::f64::consts::TAU {
        0.0
    } else {
        a
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
