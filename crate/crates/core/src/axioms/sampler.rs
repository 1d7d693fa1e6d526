//! Test elements `ν ⪰ 0` with `𝔉(ν) = ν` and `m(ν) = 1` for the sampled
//! (iii)'' check.
//!
//! Each sample is `ν = B + tW` where `B` is a positive definite convex
//! combination of the two canonical elements, `W` is a random self-adjoint
//! direction inside `ker(m) ∩ {flip-symmetric}`, and `t` is drawn up to the
//! largest value keeping `ν` positive. Half of the draws sit exactly on that
//! boundary, where `ν` is singular.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::AxiomError;
use crate::algebra::{self, AlgebraShape, BiElement};
use crate::linalg::{self, CMatrix, C64};
use crate::structure::MultiplicationKernel;

const MAX_ATTEMPTS_PER_SAMPLE: usize = 8;

/// `1⊗1` and `Σ_i 2/(n_i+1)·P_δ|_{(i,i)}`; both satisfy `m(ν) = 1`.
pub fn canonical_test_elements(shape: &AlgebraShape) -> Vec<BiElement> {
    vec![BiElement::identity(shape), scaled_pdelta(shape)]
}

fn scaled_pdelta(shape: &AlgebraShape) -> BiElement {
    let d = shape.dim();
    let mut p = algebra::diag_projector(shape).into_matrix();
    for a in 0..d {
        for b in 0..d {
            if shape.block_of(a) != shape.block_of(b) {
                continue;
            }
            let n = shape.blocks()[shape.block_of(a)] as f64;
            let w = 2.0 / (n + 1.0);
            for c in 0..d * d {
                p[(a * d + b, c)] *= linalg::real(w);
            }
        }
    }
    BiElement::from_matrix(shape, p).expect("support of P_δ")
}

pub struct TestElementSampler {
    shape: AlgebraShape,
    kernel: MultiplicationKernel,
    identity: BiElement,
    pdelta: BiElement,
}

impl TestElementSampler {
    pub fn new(shape: &AlgebraShape) -> Self {
        Self {
            shape: shape.clone(),
            kernel: MultiplicationKernel::new(shape),
            identity: BiElement::identity(shape),
            pdelta: scaled_pdelta(shape),
        }
    }

    /// `count` samples; sample `k` uses ChaCha stream `k` of `seed`, so any
    /// subset can be regenerated independently.
    pub fn draw(&self, seed: u64, count: usize) -> Result<Vec<BiElement>, AxiomError> {
        (0..count)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                (0..MAX_ATTEMPTS_PER_SAMPLE)
                    .find_map(|_| self.sample(&mut rng))
                    .ok_or(AxiomError::SamplerExhausted { attempts: MAX_ATTEMPTS_PER_SAMPLE })
            })
            .collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Option<BiElement> {
        let theta: f64 = rng.random_range(0.05..=1.0);
        let base = &self.identity.scale(theta) + &self.pdelta.scale(1.0 - theta);

        let n = self.shape.tensor_dim(2);
        let raw = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let raw = BiElement::from_matrix_masked(&self.shape, raw).ok()?.hermitian_part();
        let sym = (&raw + &algebra::flip(&raw)).scale(0.5);
        let direction = self.kernel.project_symmetric(&sym).hermitian_part();
        let dir_norm = direction.op_norm();
        if dir_norm < 1e-12 {
            return Some(base);
        }

        // largest t with B + tW ⪰ 0: 1/λ_max(−B^{-1/2} W B^{-1/2})
        let lowest = self
            .shape
            .support_classes(2)
            .iter()
            .map(|class| {
                let inv_sqrt = linalg::spectral_map(&base.cell(class), |x| 1.0 / x.sqrt());
                linalg::min_eigenvalue(&(&inv_sqrt * direction.cell(class) * &inv_sqrt))
            })
            .fold(f64::INFINITY, f64::min);
        let t_max = if lowest < 0.0 { -1.0 / lowest } else { base.op_norm() / dir_norm * 4.0 };
        let t = if rng.random_bool(0.5) { t_max } else { t_max * rng.random_range(0.0..1.0) };

        let nu = (&base + &direction.scale(t)).hermitian_part();
        self.is_valid(&nu).then_some(nu)
    }

    fn is_valid(&self, nu: &BiElement) -> bool {
        let scale = nu.op_norm().max(1.0);
        let unit_defect = (&algebra::mult_map(nu) - &algebra::identity(&self.shape)).op_norm();
        let flip_defect = (&algebra::flip(nu) - nu).op_norm();
        nu.min_eigenvalue() >= -1e-10 * scale && unit_defect <= 1e-9 * scale && flip_defect <= 1e-10 * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_elements_satisfy_constraints() {
        for blocks in [vec![2], vec![1, 1], vec![3, 1]] {
            let shape = AlgebraShape::new(blocks).unwrap();
            let sampler = TestElementSampler::new(&shape);
            for nu in canonical_test_elements(&shape) {
                assert!(sampler.is_valid(&nu));
            }
        }
        let shape = AlgebraShape::classical(2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| scaled_pdelta(&shape).matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn samples_are_valid_and_reproducible() {
        let shape = AlgebraShape::new(vec![2, 1]).unwrap();
        let sampler = TestElementSampler::new(&shape);
        let a = sampler.draw(11, 12).unwrap();
        let b = sampler.draw(11, 12).unwrap();
        assert_eq!(a, b);
        for nu in &a {
            assert!(sampler.is_valid(nu));
        }
        // boundary draws are singular
        let singular = a.iter().filter(|nu| nu.min_eigenvalue().abs() < 1e-9).count();
        assert!(singular > 0);
    }
}
