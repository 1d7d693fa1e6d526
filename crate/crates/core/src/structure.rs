//! Orthogonal projections onto the linear constraint sets of a metric:
//! self-adjoint, flip-symmetric, supported in `A⊗A`, and either compressed to
//! `H_δ^⊥` (representation mode) or annihilated by the multiplication map
//! (algebraic mode).

use crate::algebra::{self, AlgebraElement, AlgebraShape, BiElement};
use crate::axioms::Mode;
use crate::linalg::{self, CMatrix, CVector, C64};

/// Orthogonal projection onto `ker(m) ∩ {flip-symmetric}` inside the block
/// support of `A⊗A`.
#[derive(Clone, Debug)]
pub struct MultiplicationKernel {
    shape: AlgebraShape,
    support: Vec<(usize, usize)>,
    gram_pinv: CMatrix,
}

impl MultiplicationKernel {
    pub fn new(shape: &AlgebraShape) -> Self {
        let d = shape.dim();
        let support: Vec<(usize, usize)> = (0..d)
            .flat_map(|a| (0..d).map(move |e| (a, e)))
            .filter(|&(a, e)| shape.block_of(a) == shape.block_of(e))
            .collect();
        let n = support.len();
        let mut gram = CMatrix::zeros(n, n);
        for (j, &(a, e)) in support.iter().enumerate() {
            let mut x = CMatrix::zeros(d, d);
            x[(a, e)] = linalg::ONE;
            let x = AlgebraElement::from_matrix(shape, x).expect("support entry");
            let image = algebra::mult_map(&sym_adjoint(&x));
            for (i, &(p, q)) in support.iter().enumerate() {
                gram[(i, j)] = image.matrix()[(p, q)];
            }
        }
        let gram_pinv = linalg::hermitian_pinv(&gram, 1e-12);
        Self { shape: shape.clone(), support, gram_pinv }
    }

    /// Projects a flip-symmetric element onto `ker(m)`; the result stays
    /// flip-symmetric and self-adjoint inputs stay self-adjoint.
    pub fn project_symmetric(&self, y: &BiElement) -> BiElement {
        let m = algebra::mult_map(y);
        let v = CVector::from_iterator(self.support.len(), self.support.iter().map(|&(a, e)| m.matrix()[(a, e)]));
        let coeff = &self.gram_pinv * v;
        let d = self.shape.dim();
        let mut x = CMatrix::zeros(d, d);
        for (k, &(a, e)) in self.support.iter().enumerate() {
            x[(a, e)] = coeff[k];
        }
        let x = AlgebraElement::from_matrix(&self.shape, x).expect("support entries");
        y - &sym_adjoint(&x)
    }
}

/// `(m* + 𝔉 m*)/2`, the adjoint of `m` restricted to flip-symmetric elements.
fn sym_adjoint(x: &AlgebraElement) -> BiElement {
    let lifted = algebra::mult_map_adjoint(x);
    (&lifted + &algebra::flip(&lifted)).scale(0.5)
}

/// The structural subspace for one verification mode.
#[derive(Clone, Debug)]
pub struct StructuralProjector {
    shape: AlgebraShape,
    mode: Mode,
    complement: CMatrix,
    kernel: Option<MultiplicationKernel>,
}

impl StructuralProjector {
    pub fn new(shape: &AlgebraShape, mode: Mode) -> Self {
        let n = shape.tensor_dim(2);
        let complement = CMatrix::identity(n, n) - algebra::diag_projector(shape).matrix();
        let kernel = match mode {
            Mode::Representation => None,
            Mode::Algebraic => Some(MultiplicationKernel::new(shape)),
        };
        Self { shape: shape.clone(), mode, complement, kernel }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `Q = 1 − P_δ`.
    pub fn complement(&self) -> &CMatrix {
        &self.complement
    }

    /// Hermitize, flip-symmetrize, re-mask, then either compress by `Q` or
    /// remove the component outside `ker(m)`. The maps commute, so the
    /// composite is the orthogonal projection onto the intersection.
    pub fn project(&self, r: &BiElement) -> BiElement {
        let h = r.hermitian_part();
        let sym = (&h + &algebra::flip(&h)).scale(0.5);
        let masked = BiElement::from_matrix_masked(&self.shape, sym.into_matrix()).expect("shape preserved");
        match &self.kernel {
            None => {
                let q = &self.complement;
                let compressed = q * masked.matrix() * q;
                BiElement::from_matrix_masked(&self.shape, compressed).expect("shape preserved")
            }
            Some(kernel) => kernel.project_symmetric(&masked),
        }
    }

    /// Real orthonormal basis (Frobenius, `Re tr(x*y)`) of the structural
    /// subspace, built by projecting the standard hermitian basis.
    pub fn basis(&self) -> Vec<BiElement> {
        let n = self.shape.tensor_dim(2);
        let in_support = BiElement::in_support(&self.shape);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut raw: Vec<Vec<f64>> = Vec::new();
        for c in 0..n {
            for r in 0..=c {
                if !in_support(r, c) {
                    continue;
                }
                let variants: Vec<(C64, C64)> = if r == c {
                    vec![(linalg::ONE, linalg::ONE)]
                } else {
                    vec![(linalg::real(h), linalg::real(h)), (C64::new(0.0, h), C64::new(0.0, -h))]
                };
                for (upper, lower) in variants {
                    let mut m = CMatrix::zeros(n, n);
                    m[(r, c)] = upper;
                    m[(c, r)] = lower;
                    let e = BiElement::from_matrix(&self.shape, m).expect("support entry");
                    raw.push(flatten(self.project(&e).matrix()));
                }
            }
        }
        linalg::orthonormalize(raw, 1e-9)
            .into_iter()
            .map(|v| BiElement::from_matrix_masked(&self.shape, unflatten(&v, n)).expect("shape preserved"))
            .collect()
    }
}

/// Stacks real and imaginary parts column-major.
pub(crate) fn flatten(m: &CMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub(crate) fn unflatten(v: &[f64], n: usize) -> CMatrix {
    CMatrix::from_iterator(n, n, v.chunks(2).map(|p| C64::new(p[0], p[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::m2_admissible;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bi(shape: &AlgebraShape, rng: &mut ChaCha8Rng) -> BiElement {
        let n = shape.tensor_dim(2);
        let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        BiElement::from_matrix_masked(shape, m).unwrap()
    }

    #[test]
    fn representation_projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for blocks in [vec![2], vec![3], vec![1, 2], vec![1, 1, 1]] {
            let shape = AlgebraShape::new(blocks).unwrap();
            let proj = StructuralProjector::new(&shape, Mode::Representation);
            let p = algebra::diag_projector(&shape);
            let x = random_bi(&shape, &mut rng);
            let y = proj.project(&x);
            assert!((&y * &p).op_norm() < 1e-12);
            assert!((&algebra::flip(&y) - &y).op_norm() < 1e-12);
            assert!((&y.adjoint() - &y).op_norm() < 1e-12);
            let yy = proj.project(&y);
            assert!((&yy - &y).op_norm() < 1e-12);
            // orthogonality of the residual against the subspace
            let z = proj.project(&random_bi(&shape, &mut rng));
            let resid = (&x.hermitian_part() - &y).into_matrix();
            assert!(linalg::real_inner(&resid, z.matrix()).abs() < 1e-10);
        }
    }

    #[test]
    fn algebraic_projection_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for blocks in [vec![2], vec![1, 2], vec![1, 1, 1]] {
            let shape = AlgebraShape::new(blocks).unwrap();
            let proj = StructuralProjector::new(&shape, Mode::Algebraic);
            let x = random_bi(&shape, &mut rng);
            let y = proj.project(&x);
            assert!(algebra::mult_map(&y).op_norm() < 1e-12);
            assert!((&algebra::flip(&y) - &y).op_norm() < 1e-12);
            assert!((&y.adjoint() - &y).op_norm() < 1e-12);
            assert!((&proj.project(&y) - &y).op_norm() < 1e-12);
            let z = proj.project(&random_bi(&shape, &mut rng));
            let resid = (&x.hermitian_part() - &y).into_matrix();
            assert!(linalg::real_inner(&resid, z.matrix()).abs() < 1e-10);
        }
    }

    #[test]
    fn pdelta_killed_and_m2_family_fixed() {
        let shape = AlgebraShape::matrix(2).unwrap();
        let proj = StructuralProjector::new(&shape, Mode::Representation);
        assert!(proj.project(&algebra::diag_projector(&shape)).op_norm() < 1e-15);
        let rho = m2_admissible(0.7).unwrap();
        assert!((&proj.project(&rho) - &rho).op_norm() < 1e-15);
        assert_eq!(proj.basis().len(), 1);
    }

    #[test]
    fn basis_dimensions() {
        // classical three points: distances d12, d13, d23
        let s = AlgebraShape::classical(3).unwrap();
        assert_eq!(StructuralProjector::new(&s, Mode::Representation).basis().len(), 3);
        // M_3: hermitian operators on the 3-dim antisymmetric subspace
        let s = AlgebraShape::matrix(3).unwrap();
        assert_eq!(StructuralProjector::new(&s, Mode::Representation).basis().len(), 9);
    }
}
