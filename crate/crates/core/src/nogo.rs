//! The two-point noncommutative space `M₂`: the general solution of
//! (i)'–(iv)' fails the triangle inequality.
//!
//! The reference matrices are transcribed once below. [`run_nogo`] rebuilds
//! everything from the algebra module and compares.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, AlgebraShape};
use crate::axioms::{self, AxiomError, AxiomReport, Mode, ToleranceConfig};
use crate::linalg::{self, CMatrix};

/// `P_δ` on `C²⊗C²`, doubled to stay integral.
pub const PDELTA_TIMES_TWO: [[i8; 4]; 4] = [[2, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 2]];

/// `λ⁻¹ M` for `M = ρ⊗1 + 1⊗ρ − 𝔐(ρ)`.
pub const DEFECT_OVER_LAMBDA: [[i8; 8]; 8] = [
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, 0, 1, 0, 0, 0],
    [0, -1, 2, 0, -1, 0, 0, 0],
    [0, 0, 0, 0, 0, -1, 1, 0],
    [0, 1, -1, 0, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 2, -1, 0],
    [0, 0, 0, 1, 0, -1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
];

/// `X` with `λ⁻¹⟨MX, X⟩ = −2`.
pub const WITNESS: [f64; 8] = [0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];

pub fn reference_pdelta() -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| linalg::real(f64::from(PDELTA_TIMES_TWO[r][c]) / 2.0))
}

pub fn reference_defect(lambda: f64) -> CMatrix {
    CMatrix::from_fn(8, 8, |r, c| linalg::real(lambda * f64::from(DEFECT_OVER_LAMBDA[r][c])))
}

/// `(x₃−x₂−x₅)² + (x₃²−x₂²−x₅²) + (x₆−x₄−x₇)² + (x₆²−x₄²−x₇²)`, with
/// `x₁ … x₈` stored at indices 0 … 7.
pub fn quadratic_identity(x: &[f64; 8]) -> f64 {
    let [_, x2, x3, x4, x5, x6, x7, _] = *x;
    (x3 - x2 - x5).powi(2) + (x3 * x3 - x2 * x2 - x5 * x5) + (x6 - x4 - x7).powi(2) + (x6 * x6 - x4 * x4 - x7 * x7)
}

/// `⟨MX, X⟩` for real `X`.
pub fn quadratic_form(m: &CMatrix, x: &[f64; 8]) -> f64 {
    let mut total = 0.0;
    for r in 0..8 {
        for c in 0..8 {
            total += x[r] * m[(r, c)].re * x[c];
        }
    }
    total
}

/// Positions of nonzero entries, row-major.
pub fn layout(m: &CMatrix) -> Vec<bool> {
    (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| (r, c))).map(|(r, c)| m[(r, c)] != linalg::ZERO).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NogoReport {
    pub lambda: f64,
    /// `max |P_δ − reference|`; exact reproduction gives 0.
    pub pdelta_deviation: f64,
    /// `max |M − λ·reference|`.
    pub defect_deviation: f64,
    pub layout_matches: bool,
    pub identity_samples: usize,
    /// `max |λ⁻¹⟨MX,X⟩ − identity(X)| / ‖X‖²` over grid and random `X`.
    pub identity_max_error: f64,
    /// `⟨M·WITNESS, WITNESS⟩`, expected `−2λ`.
    pub witness_value: f64,
    pub min_eigenvalue: f64,
    pub report: AxiomReport,
}

impl NogoReport {
    /// Reproduction within the given tolerances, and the verifier failing
    /// exactly at the triangle inequality.
    pub fn reproduces(&self, entry_tol: f64, identity_tol: f64) -> bool {
        self.pdelta_deviation == 0.0
            && self.defect_deviation <= entry_tol
            && self.layout_matches
            && self.identity_max_error <= identity_tol
            && (self.witness_value + 2.0 * self.lambda).abs() <= entry_tol * self.lambda.max(1.0)
            && self.report.failing() == vec![axioms::Axiom::Triangle]
    }
}

/// Rebuilds `P_δ`, `ρ(λ)` and `M`, compares with the reference matrices and
/// evaluates the identity on the `{−1, 0, 1}` grid plus `samples` random
/// vectors.
pub fn run_nogo(lambda: f64, samples: usize, seed: u64) -> Result<NogoReport, AxiomError> {
    let shape = AlgebraShape::matrix(2)?;
    let pdelta = algebra::diag_projector(&shape);
    let pdelta_deviation = max_abs(&(pdelta.matrix() - reference_pdelta()));

    let rho = axioms::m2_admissible(lambda)?;
    let defect = axioms::triangle_defect(&rho);
    let expected = reference_defect(lambda);
    let defect_deviation = max_abs(&(defect.matrix() - &expected));
    let layout_matches =
        layout(defect.matrix()) == layout(&expected) && layout(pdelta.matrix()) == layout(&reference_pdelta());

    let mut identity_max_error = 0.0f64;
    let mut check = |x: &[f64; 8]| {
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 > 0.0 {
            let err = (quadratic_form(defect.matrix(), x) / lambda - quadratic_identity(x)).abs() / norm2;
            identity_max_error = identity_max_error.max(err);
        }
    };
    for code in 0..3usize.pow(8) {
        let mut x = [0.0; 8];
        let mut k = code;
        for v in x.iter_mut() {
            *v = (k % 3) as f64 - 1.0;
            k /= 3;
        }
        check(&x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x: [f64; 8] = std::array::from_fn(|_| rng.random_range(-10.0..10.0));
        check(&x);
    }

    let witness_value = quadratic_form(defect.matrix(), &WITNESS);
    let min_eigenvalue = defect.min_eigenvalue();
    let cfg = ToleranceConfig { seed, ..ToleranceConfig::default() };
    let report = axioms::verify(&rho, &shape, &cfg, Mode::Representation)?;
    Ok(NogoReport {
        lambda,
        pdelta_deviation,
        defect_deviation,
        layout_matches,
        identity_samples: 3usize.pow(8) + samples,
        identity_max_error,
        witness_value,
        min_eigenvalue,
        report,
    })
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
