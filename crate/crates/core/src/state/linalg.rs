use nalgebra::DMatrix;

use super::C64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
///
/// The input is symmetrized as `(m + m†)/2` first so round-off asymmetry
/// cannot leak into the spectrum.
pub fn hermitian_eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Square root of a PSD matrix; eigenvalues below zero are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigh(m);
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        scaled.column_mut(k).scale_mut(s);
    }
    &scaled * vectors.adjoint()
}

/// Kronecker product `a ⊗ b`.
pub(crate) fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}
