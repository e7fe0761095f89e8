//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i theta}`
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn real(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMat>) -> CMat {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity(n)))
}

pub fn hermiticity_defect(h: &CMat) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// `min_phi max |a - e^{i phi} b|`, with phi taken from the overlap `Tr(b^† a)`.
pub fn phase_aligned_distance(a: &CMat, b: &CMat) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Phase `phi` such that `a ≈ e^{i phi} b`.
pub fn relative_phase(a: &CMat, b: &CMat) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    overlap.arg()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(h.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_herm(h: &CMat, t: f64) -> CMat {
    let (values, vectors) = eigh(h);
    let phases: Vec<C64> = values.iter().map(|&e| cis(-e * t)).collect();
    let scaled = CMat::from_fn(vectors.nrows(), vectors.ncols(), |r, k| vectors[(r, k)] * phases[k]);
    scaled * vectors.adjoint()
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = eigh(h);
    let scaled = CMat::from_fn(vectors.nrows(), vectors.ncols(), |r, k| {
        vectors[(r, k)] * f(values[k])
    });
    scaled * vectors.adjoint()
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn permutation_matrix(images: &[usize]) -> CMat {
    let n = images.len();
    let mut p = CMat::zeros(n, n);
    for (col, &row) in images.iter().enumerate() {
        p[(row, col)] = ONE;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_pauli_x_is_rotation() {
        let x = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let u = expm_herm(&x, 0.3);
        assert!((u[(0, 0)] - c(0.3f64.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - c(0.0, -0.3f64.sin())).norm() < 1e-14);
    }

    #[test]
    fn phase_aligned_distance_ignores_global_phase() {
        let a = real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = a.map(|z| z * cis(1.234));
        assert!(phase_aligned_distance(&a, &b) < 1e-14);
        assert!((relative_phase(&b, &a) - 1.234).abs() < 1e-14);
    }

    #[test]
    fn eigh_sorts_ascending() {
        let h = real(&[&[2.0, 0.0], &[0.0, -1.0]]);
        let (v, _) = eigh(&h);
        assert_eq!(v, vec![-1.0, 2.0]);
    }
}
