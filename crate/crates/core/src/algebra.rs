//! Multi-matrix algebras `A = M_{n_1} ⊕ … ⊕ M_{n_K}` and their tensor powers.
//!
//! `A` is represented faithfully on `C^D`, `D = Σ n_k`, as block-diagonal
//! matrices. Elements of `A⊗A` and `A⊗A⊗A` are `D²×D²` and `D³×D³` matrices
//! in lexicographic Kronecker order: the tensor index `(i_1, …, i_L)` maps to
//! `i_1·D^{L−1} + … + i_L`. For `D = 2` this is the usual identification
//! `e₁⊗e₁ ↦ f₁, e₁⊗e₂ ↦ f₂, e₂⊗e₁ ↦ f₃, e₂⊗e₂ ↦ f₄`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("algebra shape needs at least one block and every block size must be positive, got {0:?}")]
    InvalidShape(Vec<usize>),
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Box<AlgebraShape>, right: Box<AlgebraShape> },
    #[error("expected a {expected}×{expected} matrix, found {rows}×{cols}")]
    Dimension { expected: usize, rows: usize, cols: usize },
    #[error("entry ({row}, {col}) lies outside the block support of the algebra")]
    OutsideSupport { row: usize, col: usize },
    #[error("matrix is not self-adjoint (‖x − x*‖ = {defect:.3e})")]
    NotSelfAdjoint { defect: f64 },
}

/// Block sizes `(n_1, …, n_K)` of `A = ⊕ M_{n_k}`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    block_of: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(blocks: Vec<usize>) -> Result<Self, AlgebraError> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(AlgebraError::InvalidShape(blocks));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut block_of = Vec::new();
        let mut offset = 0;
        for (k, &n) in blocks.iter().enumerate() {
            offsets.push(offset);
            block_of.extend(std::iter::repeat_n(k, n));
            offset += n;
        }
        Ok(Self { blocks, offsets, block_of })
    }

    /// The full matrix algebra `M_n`.
    pub fn matrix(n: usize) -> Result<Self, AlgebraError> {
        Self::new(vec![n])
    }

    /// The commutative algebra of functions on `n` points.
    pub fn classical(n: usize) -> Result<Self, AlgebraError> {
        Self::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Representation dimension `D = Σ n_k`.
    pub fn dim(&self) -> usize {
        self.block_of.len()
    }

    /// Matrix size of an element with `legs` tensor factors, `D^legs`.
    pub fn tensor_dim(&self, legs: usize) -> usize {
        self.dim().pow(legs as u32)
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn block_of(&self, index: usize) -> usize {
        self.block_of[index]
    }

    pub fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block] + self.blocks[block]
    }

    pub fn is_classical(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// Shape of `A₁ ⊕ A₂`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        Self::new(blocks).expect("concatenation of valid shapes")
    }

    /// Real dimension of the self-adjoint part, `Σ n_k²`.
    pub fn self_adjoint_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Flat indices of the `legs`-fold tensor power grouped by support cell.
    /// Every element is block diagonal with respect to this partition.
    pub fn support_classes(&self, legs: usize) -> Vec<Vec<usize>> {
        let sig = self.signatures(legs);
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); self.num_blocks().pow(legs as u32)];
        for (i, s) in sig.into_iter().enumerate() {
            classes[s].push(i);
        }
        classes.retain(|c| !c.is_empty());
        classes
    }

    /// Block signature of every flat index of an `legs`-fold tensor power;
    /// two indices `r`, `c` are in the same support cell iff signatures agree.
    fn signatures(&self, legs: usize) -> Vec<usize> {
        let d = self.dim();
        let k = self.num_blocks();
        (0..self.tensor_dim(legs))
            .map(|mut i| {
                let mut sig = 0;
                let mut weight = 1;
                for _ in 0..legs {
                    sig += self.block_of[i % d] * weight;
                    weight *= k;
                    i /= d;
                }
                sig
            })
            .collect()
    }

    fn ensure_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self == other {
            Ok(())
        } else {
            Err(AlgebraError::ShapeMismatch { left: Box::new(self.clone()), right: Box::new(other.clone()) })
        }
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = AlgebraError;
    fn try_from(blocks: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(blocks)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(shape: AlgebraShape) -> Self {
        shape.blocks
    }
}

impl fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraShape{self}")
    }
}

/// An element of the `LEGS`-fold tensor power of `A`, stored densely.
///
/// The invariant is that `data` vanishes outside the block support of
/// `A^{⊗LEGS}`; every constructor enforces it.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<const LEGS: usize> {
    shape: AlgebraShape,
    data: CMatrix,
}

/// An element of `A`.
pub type AlgebraElement = Element<1>;
/// An element of `A⊗A`: candidate metrics, `P_δ`, test elements.
pub type BiElement = Element<2>;
/// An element of `A⊗A⊗A`: triangle defects and their parts.
pub type TriElement = Element<3>;

impl<const LEGS: usize> Element<LEGS> {
    pub const LEGS: usize = LEGS;

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let n = shape.tensor_dim(LEGS);
        Self { shape: shape.clone(), data: CMatrix::zeros(n, n) }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let n = shape.tensor_dim(LEGS);
        Self { shape: shape.clone(), data: CMatrix::identity(n, n) }
    }

    /// Wraps `data`, rejecting any nonzero entry outside the block support.
    pub fn from_matrix(shape: &AlgebraShape, data: CMatrix) -> Result<Self, AlgebraError> {
        let n = Self::check_dim(shape, &data)?;
        let sig = shape.signatures(LEGS);
        for c in 0..n {
            for r in 0..n {
                if sig[r] != sig[c] && data[(r, c)] != ZERO {
                    return Err(AlgebraError::OutsideSupport { row: r, col: c });
                }
            }
        }
        Ok(Self { shape: shape.clone(), data })
    }

    /// Wraps `data` after zeroing everything outside the block support.
    pub fn from_matrix_masked(shape: &AlgebraShape, mut data: CMatrix) -> Result<Self, AlgebraError> {
        let n = Self::check_dim(shape, &data)?;
        let sig = shape.signatures(LEGS);
        for c in 0..n {
            for r in 0..n {
                if sig[r] != sig[c] {
                    data[(r, c)] = ZERO;
                }
            }
        }
        Ok(Self { shape: shape.clone(), data })
    }

    pub fn from_real_diagonal(shape: &AlgebraShape, diag: &[f64]) -> Result<Self, AlgebraError> {
        let n = shape.tensor_dim(LEGS);
        if diag.len() != n {
            return Err(AlgebraError::Dimension { expected: n, rows: diag.len(), cols: 1 });
        }
        let data = CMatrix::from_diagonal(&CVector::from_iterator(n, diag.iter().map(|&x| linalg::real(x))));
        Ok(Self { shape: shape.clone(), data })
    }

    fn check_dim(shape: &AlgebraShape, data: &CMatrix) -> Result<usize, AlgebraError> {
        let n = shape.tensor_dim(LEGS);
        if data.nrows() != n || data.ncols() != n {
            return Err(AlgebraError::Dimension { expected: n, rows: data.nrows(), cols: data.ncols() });
        }
        Ok(n)
    }

    /// Support mask as a closure-friendly predicate.
    pub fn in_support(shape: &AlgebraShape) -> impl Fn(usize, usize) -> bool {
        let sig = shape.signatures(LEGS);
        move |r, c| sig[r] == sig[c]
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { shape: self.shape.clone(), data: self.data.adjoint() }
    }

    pub fn hermitian_part(&self) -> Self {
        Self { shape: self.shape.clone(), data: linalg::hermitian_part(&self.data) }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { shape: self.shape.clone(), data: &self.data * linalg::real(c) }
    }

    /// Largest singular value.
    /// Operator norm, taken one support cell at a time.
    pub fn op_norm(&self) -> f64 {
        self.shape.support_classes(LEGS).iter().map(|class| linalg::op_norm(&self.cell(class))).fold(0.0, f64::max)
    }

    /// Smallest singular value with a unit right singular vector.
    pub fn smallest_singular_pair(&self) -> (f64, CVector) {
        let n = self.data.nrows();
        let mut best = (f64::INFINITY, CVector::zeros(n));
        for class in self.shape.support_classes(LEGS) {
            let cell = self.cell(&class);
            let sigma = linalg::min_singular_value(&cell);
            if sigma < best.0 {
                let (_, vectors) = linalg::eigh(&(cell.adjoint() * &cell));
                let mut v = CVector::zeros(n);
                for (r, &i) in class.iter().enumerate() {
                    v[i] = vectors[(r, 0)];
                }
                best = (sigma, v);
            }
        }
        best
    }

    /// Submatrix on one support cell, e.g. a class of
    /// [`AlgebraShape::support_classes`].
    pub fn cell(&self, class: &[usize]) -> CMatrix {
        CMatrix::from_fn(class.len(), class.len(), |r, c| self.data[(class[r], class[c])])
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius_norm(&self.data)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn is_self_adjoint(&self) -> bool {
        linalg::is_self_adjoint(&self.data)
    }

    /// Smallest eigenvalue and a unit eigenvector. Fails for matrices that
    /// are not self-adjoint within `1e-10·max(1, ‖x‖)`.
    pub fn min_eig(&self) -> Result<(f64, CVector), AlgebraError> {
        if !self.is_self_adjoint() {
            return Err(AlgebraError::NotSelfAdjoint { defect: linalg::self_adjoint_defect(&self.data) });
        }
        Ok(self.lowest_eigenpair())
    }

    /// Smallest eigenvalue of the hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.lowest_eigenpair().0
    }

    /// Smallest eigenvalue of the hermitian part with a unit eigenvector,
    /// computed one support cell at a time.
    pub fn lowest_eigenpair(&self) -> (f64, CVector) {
        lowest_eigenpair_by_cells(&self.shape, LEGS, |r, c| self.data[(r, c)])
    }

    /// Sets every real and imaginary part with magnitude below `threshold` to 0.
    pub fn flush_small(&self, threshold: f64) -> Self {
        let data = self.data.map(|z| {
            let re = if z.re.abs() < threshold { 0.0 } else { z.re };
            let im = if z.im.abs() < threshold { 0.0 } else { z.im };
            C64::new(re, im)
        });
        Self { shape: self.shape.clone(), data }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.shape.ensure_same(&other.shape)?;
        Ok(Self { shape: self.shape.clone(), data: &self.data + &other.data })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.shape.ensure_same(&other.shape)?;
        Ok(Self { shape: self.shape.clone(), data: &self.data * &other.data })
    }
}

impl<const L: usize> Add for &Element<L> {
    type Output = Element<L>;
    /// Panics on shape mismatch; use [`Element::try_add`] for fallible input.
    fn add(self, rhs: Self) -> Element<L> {
        self.try_add(rhs).expect("shape mismatch in element addition")
    }
}

impl<const L: usize> Sub for &Element<L> {
    type Output = Element<L>;
    fn sub(self, rhs: Self) -> Element<L> {
        self.shape.ensure_same(&rhs.shape).expect("shape mismatch in element subtraction");
        Element { shape: self.shape.clone(), data: &self.data - &rhs.data }
    }
}

impl<const L: usize> Mul for &Element<L> {
    type Output = Element<L>;
    fn mul(self, rhs: Self) -> Element<L> {
        self.try_mul(rhs).expect("shape mismatch in element product")
    }
}

impl<const L: usize> Mul<C64> for &Element<L> {
    type Output = Element<L>;
    fn mul(self, rhs: C64) -> Element<L> {
        Element { shape: self.shape.clone(), data: &self.data * rhs }
    }
}

impl<const L: usize> Neg for &Element<L> {
    type Output = Element<L>;
    fn neg(self) -> Element<L> {
        self.scale(-1.0)
    }
}

/// Smallest eigenvalue and unit eigenvector of the hermitian part of the
/// `legs`-leg element with entries `entry(r, c)`, which must vanish outside
/// the block support. Only entries inside support cells are read.
pub fn lowest_eigenpair_by_cells(
    shape: &AlgebraShape,
    legs: usize,
    entry: impl Fn(usize, usize) -> C64,
) -> (f64, CVector) {
    let n = shape.tensor_dim(legs);
    let mut best = (f64::INFINITY, CVector::zeros(n));
    for class in shape.support_classes(legs) {
        let k = class.len();
        let sub = CMatrix::from_fn(k, k, |r, c| entry(class[r], class[c]));
        let (values, vectors) = linalg::eigh(&sub);
        if values[0] < best.0 {
            let mut v = CVector::zeros(n);
            for (r, &i) in class.iter().enumerate() {
                v[i] = vectors[(r, 0)];
            }
            best = (values[0], v);
        }
    }
    best
}

/// The unit `1_A`.
pub fn identity(shape: &AlgebraShape) -> AlgebraElement {
    AlgebraElement::identity(shape)
}

/// `x ⊗ y` in lexicographic Kronecker order.
pub fn tensor2(x: &AlgebraElement, y: &AlgebraElement) -> Result<BiElement, AlgebraError> {
    x.shape.ensure_same(&y.shape)?;
    Ok(BiElement { shape: x.shape.clone(), data: linalg::kron(&x.data, &y.data) })
}

/// `a ⊗ 1`.
pub fn left_factor(a: &AlgebraElement) -> BiElement {
    let one = CMatrix::identity(a.shape.dim(), a.shape.dim());
    BiElement { shape: a.shape.clone(), data: linalg::kron(&a.data, &one) }
}

/// `1 ⊗ a`.
pub fn right_factor(a: &AlgebraElement) -> BiElement {
    let one = CMatrix::identity(a.shape.dim(), a.shape.dim());
    BiElement { shape: a.shape.clone(), data: linalg::kron(&one, &a.data) }
}

/// `r ⊗ 1`.
pub fn extend_right(r: &BiElement) -> TriElement {
    let one = CMatrix::identity(r.shape.dim(), r.shape.dim());
    TriElement { shape: r.shape.clone(), data: linalg::kron(&r.data, &one) }
}

/// `1 ⊗ r`.
pub fn extend_left(r: &BiElement) -> TriElement {
    let one = CMatrix::identity(r.shape.dim(), r.shape.dim());
    TriElement { shape: r.shape.clone(), data: linalg::kron(&one, &r.data) }
}

/// The flip `a⊗b ↦ b⊗a`, i.e. conjugation by the swap of the two legs.
pub fn flip(r: &BiElement) -> BiElement {
    let d = r.shape.dim();
    BiElement { shape: r.shape.clone(), data: linalg::permute_legs(&r.data, &[d, d], &[1, 0]) }
}

/// `a⊗b ↦ a⊗1⊗b`, computed as `P₂₃ (r⊗1) P₂₃`.
pub fn mid_embed(r: &BiElement) -> TriElement {
    let d = r.shape.dim();
    let lifted = extend_right(r);
    TriElement { shape: r.shape.clone(), data: linalg::permute_legs(&lifted.data, &[d, d, d], &[0, 2, 1]) }
}

/// Multiplication `m(a⊗b) = ab`: `m(r)[a, d] = Σ_b r[(a,b), (b,d)]`.
pub fn mult_map(r: &BiElement) -> AlgebraElement {
    let d = r.shape.dim();
    let mut out = CMatrix::zeros(d, d);
    for a in 0..d {
        for e in 0..d {
            let mut acc = ZERO;
            for b in 0..d {
                acc += r.data[(a * d + b, b * d + e)];
            }
            out[(a, e)] = acc;
        }
    }
    AlgebraElement { shape: r.shape.clone(), data: out }
}

/// Adjoint of [`mult_map`] for the Frobenius inner products, restricted to
/// the block support: `(m*x)[(a,b),(c,e)] = x[a,e] δ_{bc}`.
pub fn mult_map_adjoint(x: &AlgebraElement) -> BiElement {
    let d = x.shape.dim();
    let shape = &x.shape;
    let mut out = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for e in 0..d {
            let v = x.data[(a, e)];
            if v == ZERO {
                continue;
            }
            for b in 0..d {
                if shape.block_of(b) == shape.block_of(a) && shape.block_of(b) == shape.block_of(e) {
                    out[(a * d + b, b * d + e)] = v;
                }
            }
        }
    }
    BiElement { shape: shape.clone(), data: out }
}

/// `P_δ`: the projection onto `⊕_i Sym²(C^{n_i})`, zero on cross-block cells.
pub fn diag_projector(shape: &AlgebraShape) -> BiElement {
    let d = shape.dim();
    let mut p = CMatrix::zeros(d * d, d * d);
    for k in 0..shape.num_blocks() {
        let range = shape.block_range(k);
        for a in range.clone() {
            for b in range.clone() {
                let row = a * d + b;
                p[(row, a * d + b)] += linalg::real(0.5);
                p[(row, b * d + a)] += linalg::real(0.5);
            }
        }
    }
    BiElement { shape: shape.clone(), data: p }
}

/// Orthonormal basis (as columns) of `H_δ^⊥`: cross-block product vectors
/// and antisymmetric vectors inside each diagonal block cell.
pub fn off_diagonal_basis(shape: &AlgebraShape) -> CMatrix {
    let d = shape.dim();
    let mut columns: Vec<CVector> = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..d {
        for b in 0..d {
            let same = shape.block_of(a) == shape.block_of(b);
            if !same {
                let mut v = CVector::zeros(d * d);
                v[a * d + b] = ONE;
                columns.push(v);
            } else if a < b {
                let mut v = CVector::zeros(d * d);
                v[a * d + b] = linalg::real(h);
                v[b * d + a] = linalg::real(-h);
                columns.push(v);
            }
        }
    }
    if columns.is_empty() {
        return CMatrix::zeros(d * d, 0);
    }
    CMatrix::from_columns(&columns)
}

/// Embeds a vector of block `block` into `C^D`.
pub fn embed_block_vector(shape: &AlgebraShape, block: usize, v: &CVector) -> CVector {
    let mut out = CVector::zeros(shape.dim());
    let offset = shape.offset(block);
    for (i, z) in v.iter().enumerate() {
        out[offset + i] = *z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    fn unit(shape: &AlgebraShape, i: usize, j: usize) -> AlgebraElement {
        let d = shape.dim();
        let mut m = CMatrix::zeros(d, d);
        m[(i, j)] = ONE;
        AlgebraElement::from_matrix(shape, m).unwrap()
    }

    #[test]
    fn identity_shapes() {
        let s = AlgebraShape::new(vec![2, 3]).unwrap();
        assert_eq!(identity(&s).matrix(), &CMatrix::identity(5, 5));
        let s = AlgebraShape::classical(2).unwrap();
        assert_eq!(identity(&s).matrix(), &CMatrix::identity(2, 2));
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(AlgebraShape::new(vec![]).is_err());
        assert!(AlgebraShape::new(vec![2, 0]).is_err());
    }

    #[test]
    fn support_is_enforced() {
        let s = AlgebraShape::new(vec![1, 1]).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!(matches!(AlgebraElement::from_matrix(&s, m.clone()), Err(AlgebraError::OutsideSupport { .. })));
        let masked = AlgebraElement::from_matrix_masked(&s, m).unwrap();
        assert_eq!(masked.matrix()[(0, 1)], ZERO);
    }

    #[test]
    fn matrix_units_land_at_lexicographic_position() {
        let s = AlgebraShape::matrix(2).unwrap();
        // 1_{11} ⊗ 1_{22}: maps e1⊗e2 to itself -> f2 -> index 1
        let t = tensor2(&unit(&s, 0, 0), &unit(&s, 1, 1)).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if (r, c) == (1, 1) { ONE } else { ZERO };
                assert_eq!(t.matrix()[(r, c)], expect);
            }
        }
    }

    #[test]
    fn flip_swaps_factors_on_units() {
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        let a = unit(&s, 0, 1);
        let b = unit(&s, 2, 2);
        let ab = tensor2(&a, &b).unwrap();
        let ba = tensor2(&b, &a).unwrap();
        assert_eq!(flip(&ab), ba);
    }

    #[test]
    fn mid_embed_on_units() {
        let s = AlgebraShape::matrix(2).unwrap();
        let a = unit(&s, 0, 1);
        let b = unit(&s, 1, 0);
        let got = mid_embed(&tensor2(&a, &b).unwrap());
        let one = CMatrix::identity(2, 2);
        let expect = linalg::kron(&linalg::kron(a.matrix(), &one), b.matrix());
        assert_eq!(got.matrix(), &expect);
        assert_eq!(mid_embed(&BiElement::identity(&s)), TriElement::identity(&s));
    }

    #[test]
    fn mult_map_on_units_and_unit() {
        let s = AlgebraShape::new(vec![2, 1]).unwrap();
        assert_eq!(mult_map(&BiElement::identity(&s)), identity(&s));
        let a = unit(&s, 0, 1);
        let b = unit(&s, 1, 0);
        let m = mult_map(&tensor2(&a, &b).unwrap());
        assert_eq!(m, unit(&s, 0, 0));
    }

    #[test]
    fn pdelta_small_cases() {
        let s = AlgebraShape::matrix(2).unwrap();
        let p = diag_projector(&s);
        let h = 0.5;
        let expect = [[1.0, 0.0, 0.0, 0.0], [0.0, h, h, 0.0], [0.0, h, h, 0.0], [0.0, 0.0, 0.0, 1.0]];
        for (r, row) in expect.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert_eq!(p.matrix()[(r, c)], real(v));
            }
        }
        let s = AlgebraShape::classical(2).unwrap();
        let p = diag_projector(&s);
        let diag: Vec<f64> = (0..4).map(|i| p.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.frobenius_norm(), 2f64.sqrt());
    }

    #[test]
    fn off_diagonal_basis_complements_pdelta() {
        for blocks in [vec![2], vec![3], vec![1, 2], vec![1, 1, 1]] {
            let s = AlgebraShape::new(blocks).unwrap();
            let p = diag_projector(&s);
            let v = off_diagonal_basis(&s);
            let q = &v * v.adjoint();
            let total = q + p.matrix();
            let n = s.tensor_dim(2);
            assert!(linalg::frobenius_norm(&(total - CMatrix::identity(n, n))) < 1e-14);
        }
    }

    #[test]
    fn op_norm_and_min_eig_basics() {
        let s = AlgebraShape::classical(2).unwrap();
        let r = BiElement::from_real_diagonal(&s, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((r.op_norm() - 1.0).abs() < 1e-14);
        assert!((BiElement::identity(&s).op_norm() - 1.0).abs() < 1e-14);
        let (lo, _) = diag_projector(&AlgebraShape::matrix(2).unwrap()).min_eig().unwrap();
        assert!(lo.abs() < 1e-14);
        let (lo, _) = BiElement::identity(&s).min_eig().unwrap();
        assert!((lo - 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_eig_rejects_non_self_adjoint() {
        let s = AlgebraShape::matrix(2).unwrap();
        assert!(matches!(unit(&s, 0, 1).min_eig(), Err(AlgebraError::NotSelfAdjoint { .. })));
    }
}
