//! Thin wrappers over nalgebra decompositions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Thin SVD `A = U diag(s) V^H`, singular values descending.
pub struct Svd<T: nalgebra::ComplexField> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    /// Columns are right singular vectors.
    pub v: DMatrix<T>,
}

fn sorted_svd<T>(a: DMatrix<T>) -> Svd<T>
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    let v = vt.adjoint();
    Svd {
        u: DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])].clone()),
        s: order.iter().map(|&i| s[i]).collect(),
        v: DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])].clone()),
    }
}

pub fn svd_complex(a: DMatrix<C64>) -> Svd<C64> {
    sorted_svd(a)
}

pub fn svd_real(a: DMatrix<f64>) -> Svd<f64> {
    sorted_svd(a)
}

/// `s_max / s_min`, infinite when the smallest singular value vanishes.
pub fn condition(s: &[f64]) -> f64 {
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        (Some(&a), Some(_)) if a > 0.0 => f64::INFINITY,
        _ => f64::INFINITY,
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(a: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let e = a.symmetric_eigen();
    let vals: Vec<f64> = e.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let v = &e.eigenvectors;
    (
        order.iter().map(|&i| vals[i]).collect(),
        DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]),
    )
}

/// Minimum-norm least-squares solution of a real system, singular values below `rcond * s_max` dropped.
pub fn lstsq_real(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = svd_real(a.clone());
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let utb = svd.u.transpose() * b;
    let mut coef = DVector::zeros(svd.s.len());
    for (i, &s) in svd.s.iter().enumerate() {
        if s > rcond * smax && s > 0.0 {
            coef[i] = utb[i] / s;
        }
    }
    svd.v * coef
}
