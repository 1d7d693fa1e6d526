//! Dense complex matrix helpers shared by the algebra, axiom and search code.
//!
//! Everything here works on plain `nalgebra` matrices; the block-structured
//! element types in [`crate::algebra`] wrap these.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance factor for accepting a matrix as self-adjoint:
/// `‖x − x*‖ ≤ SELF_ADJOINT_TOL · max(1, ‖x‖)`.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real part of the Frobenius inner product, `Re tr(x* y)`.
pub fn real_inner(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn self_adjoint_defect(m: &CMatrix) -> f64 {
    op_norm(&(m - m.adjoint()))
}

pub fn is_self_adjoint(m: &CMatrix) -> bool {
    self_adjoint_defect(m) <= SELF_ADJOINT_TOL * op_norm(m).max(1.0)
}

/// Eigendecomposition of the hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Reassembles `V diag(f(λ)) V*` from an eigendecomposition of the hermitian part.
pub fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let s = real(f(lambda));
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// Nearest matrix (Frobenius) with every eigenvalue at least `floor`.
pub fn clip_spectrum(m: &CMatrix, floor: f64) -> CMatrix {
    spectral_map(m, |lambda| lambda.max(floor))
}

/// Moore–Penrose pseudo-inverse of a hermitian matrix, dropping eigenvalues
/// with `|λ| ≤ cutoff`.
pub fn hermitian_pinv(m: &CMatrix, cutoff: f64) -> CMatrix {
    spectral_map(m, |lambda| if lambda.abs() > cutoff { 1.0 / lambda } else { 0.0 })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Index of the multi-index `digits` in a lexicographic (Kronecker) layout
/// with leg dimensions `dims`.
pub fn flatten_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

pub fn split_index(mut index: usize, dims: &[usize], digits: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Permutation `σ` on flat indices such that output leg `k` is input leg `perm[k]`.
pub fn leg_permutation(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    assert_eq!(dims.len(), perm.len());
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut digits = vec![0; dims.len()];
    let mut out_digits = vec![0; dims.len()];
    (0..total)
        .map(|i| {
            split_index(i, dims, &mut digits);
            for (k, &p) in perm.iter().enumerate() {
                out_digits[k] = digits[p];
            }
            flatten_index(&out_digits, &out_dims)
        })
        .collect()
}

/// Conjugates `m` by the leg permutation, i.e. `P m P*` where `P` reorders
/// tensor legs so that output leg `k` is input leg `perm[k]`.
pub fn permute_legs(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let sigma = leg_permutation(dims, perm);
    permute_indices(m, &sigma)
}

/// `out[σ(i), σ(j)] = m[i, j]`.
pub fn permute_indices(m: &CMatrix, sigma: &[usize]) -> CMatrix {
    let n = m.nrows();
    assert_eq!(sigma.len(), n);
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            out[(sigma[i], sigma[j])] = m[(i, j)];
        }
    }
    out
}

/// Gram–Schmidt with one reorthogonalisation pass over real vectors; drops
/// vectors whose residual norm falls below `tol` times their original norm.
pub fn orthonormalize(vectors: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        let start = dot(&v, &v).sqrt();
        if start == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > tol * start {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[real(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), real(2.0)]);
        let (values, vectors) = eigh(&m);
        assert!((values[0] - 1.0).abs() < 1e-14);
        assert!((values[1] - 3.0).abs() < 1e-14);
        let back = spectral_map(&m, |x| x);
        assert!(frobenius_norm(&(back - m)) < 1e-13);
        assert!(frobenius_norm(&(vectors.adjoint() * &vectors - CMatrix::identity(2, 2))) < 1e-13);
    }

    #[test]
    fn leg_swap_on_two_qubits() {
        // |01⟩ ↔ |10⟩
        let sigma = leg_permutation(&[2, 2], &[1, 0]);
        assert_eq!(sigma, vec![0, 2, 1, 3]);
        let sigma = leg_permutation(&[2, 3], &[1, 0]);
        // (p, q) -> (q, p) with output dims (3, 2)
        assert_eq!(sigma[1], 2);
        assert_eq!(sigma[3], 1);
    }

    #[test]
    fn clip_spectrum_drops_negative_part() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.0), real(-1.0)]));
        let c = clip_spectrum(&m, 0.0);
        assert!((c[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(c[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let b = orthonormalize(vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]], 1e-10);
        assert_eq!(b.len(), 2);
        assert!(dot(&b[0], &b[1]).abs() < 1e-15);
    }
}
