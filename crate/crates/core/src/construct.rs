//! Building metrics: classical embeddings, conic combinations, direct sums
//! and tensor products.
//!
//! The same formulas serve both axiom sets; which axioms an output satisfies
//! is decided by running [`crate::axioms::verify`] on it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraShape, BiElement};
use crate::axioms::{MetricCandidate, Mode};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("not a metric: {0}")]
    InvalidMetric(String),
    #[error("the combination coefficient must be positive, got {0}")]
    NonPositiveCoefficient(f64),
    #[error("cross distance r = {r} is below max(‖ρ₁‖, ‖ρ₂‖)/2 = {bound}")]
    CrossDistanceTooSmall { r: f64, bound: f64 },
    #[error("the algebraic tensor product needs a commutative first factor, got shape {0}")]
    NoncommutativeFirstFactor(AlgebraShape),
}

/// Relative slack when validating classical metric axioms.
const METRIC_TOL: f64 = 1e-12;

/// A finite metric space given by its distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMetric", into = "RawMetric")]
pub struct FiniteMetricSpace {
    n: usize,
    d: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawMetric {
    n: usize,
    d: Vec<f64>,
}

impl TryFrom<RawMetric> for FiniteMetricSpace {
    type Error = ConstructError;
    fn try_from(raw: RawMetric) -> Result<Self, Self::Error> {
        Self::from_row_major(raw.n, raw.d)
    }
}

impl From<FiniteMetricSpace> for RawMetric {
    fn from(space: FiniteMetricSpace) -> Self {
        RawMetric { n: space.n, d: space.d }
    }
}

impl FiniteMetricSpace {
    pub fn from_row_major(n: usize, d: Vec<f64>) -> Result<Self, ConstructError> {
        if n == 0 {
            return Err(ConstructError::InvalidMetric("a metric space needs at least one point".into()));
        }
        if d.len() != n * n {
            return Err(ConstructError::InvalidMetric(format!("expected {} entries, found {}", n * n, d.len())));
        }
        if let Some(msg) = classical_violation(n, &d, METRIC_TOL) {
            return Err(ConstructError::InvalidMetric(msg));
        }
        Ok(Self { n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ConstructError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ConstructError::InvalidMetric("distance matrix must be square".into()));
        }
        Self::from_row_major(n, rows.concat())
    }

    /// The discrete metric on `n` points.
    pub fn discrete(n: usize) -> Self {
        let d = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 1.0 }).collect();
        Self::from_row_major(n, d).expect("discrete metric")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.d[x * self.n + y]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.d
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

/// First violated classical axiom (i)–(v), if any.
pub fn classical_violation(n: usize, d: &[f64], tol: f64) -> Option<String> {
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let at = |x: usize, y: usize| d[x * n + y];
    if let Some(k) = d.iter().position(|x| !x.is_finite()) {
        return Some(format!("entry {k} is not finite"));
    }
    for x in 0..n {
        if at(x, x) != 0.0 {
            return Some(format!("d({x},{x}) = {} is not zero", at(x, x)));
        }
        for y in 0..n {
            if x != y && at(x, y) <= 0.0 {
                return Some(format!("d({x},{y}) = {} is not positive", at(x, y)));
            }
            if (at(x, y) - at(y, x)).abs() > tol * scale {
                return Some(format!("d({x},{y}) ≠ d({y},{x})"));
            }
            for z in 0..n {
                if at(x, y) > at(x, z) + at(z, y) + tol * scale {
                    return Some(format!("triangle inequality fails for ({x},{y}) through {z}"));
                }
            }
        }
    }
    None
}

/// Diagonal element of `C(X)⊗C(X)` with entry `d(x,y)` at `(x,y)`; no axiom
/// checks are made.
pub fn embed_classical(n: usize, d: &[f64]) -> Result<BiElement, AlgebraError> {
    let shape = AlgebraShape::classical(n)?;
    BiElement::from_real_diagonal(&shape, d)
}

pub fn from_finite_metric(space: &FiniteMetricSpace) -> MetricCandidate {
    MetricCandidate::new(embed_classical(space.n, &space.d).expect("validated space"))
}

/// `ρ₁ + rρ₂` for `r > 0`.
pub fn conic_combine(m1: &MetricCandidate, m2: &MetricCandidate, r: f64) -> Result<MetricCandidate, ConstructError> {
    if !(r > 0.0) {
        return Err(ConstructError::NonPositiveCoefficient(r));
    }
    let rho = m1.rho.try_add(&m2.rho.scale(r))?;
    Ok(MetricCandidate::new(rho))
}

/// Smallest cross distance accepted by [`direct_sum`].
pub fn direct_sum_bound(m1: &MetricCandidate, m2: &MetricCandidate) -> f64 {
    0.5 * m1.rho.op_norm().max(m2.rho.op_norm())
}

/// Metric on `A₁ ⊕ A₂`: `ρ₁` and `ρ₂` on their diagonal cells and `r·1` on
/// both cross cells. Requires `r > 0` and `r ≥ max(‖ρ₁‖, ‖ρ₂‖)/2`.
pub fn direct_sum(m1: &MetricCandidate, m2: &MetricCandidate, r: f64) -> Result<MetricCandidate, ConstructError> {
    if !(r > 0.0) {
        return Err(ConstructError::NonPositiveCoefficient(r));
    }
    let bound = direct_sum_bound(m1, m2);
    if !(r >= bound * (1.0 - 4.0 * f64::EPSILON)) {
        return Err(ConstructError::CrossDistanceTooSmall { r, bound });
    }
    let s1 = m1.shape();
    let s2 = m2.shape();
    let shape = s1.concat(s2);
    let (d1, d2) = (s1.dim(), s2.dim());
    let d = d1 + d2;
    let r1 = m1.rho.matrix();
    let r2 = m2.rho.matrix();
    let mut out = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let first = |i: usize| i < d1;
                    let value = match (first(a), first(b), first(c), first(e)) {
                        (true, true, true, true) => r1[(a * d1 + b, c * d1 + e)],
                        (false, false, false, false) => {
                            let (a, b, c, e) = (a - d1, b - d1, c - d1, e - d1);
                            r2[(a * d2 + b, c * d2 + e)]
                        }
                        (true, false, true, false) | (false, true, false, true) if a == c && b == e => linalg::real(r),
                        _ => continue,
                    };
                    out[(a * d + b, c * d + e)] = value;
                }
            }
        }
    }
    Ok(MetricCandidate::new(BiElement::from_matrix(&shape, out)?))
}

/// Shape of `A₁⊗A₂`: blocks `n_i·m_j` in lexicographic `(i, j)` order.
pub fn product_shape(s1: &AlgebraShape, s2: &AlgebraShape) -> AlgebraShape {
    let blocks = s1.blocks().iter().flat_map(|&n| s2.blocks().iter().map(move |&m| n * m)).collect();
    AlgebraShape::new(blocks).expect("products of positive sizes")
}

/// Permutation of `C^{D₁}⊗C^{D₂}` (Kronecker order) that makes the blocks
/// `H_i⊗K_j` of `A₁⊗A₂` contiguous in `(i, j)` order.
fn product_block_order(s1: &AlgebraShape, s2: &AlgebraShape) -> Vec<usize> {
    let d2 = s2.dim();
    let mut sigma = vec![0; s1.dim() * d2];
    let mut next = 0;
    for i in 0..s1.num_blocks() {
        for j in 0..s2.num_blocks() {
            for p in s1.block_range(i) {
                for q in s2.block_range(j) {
                    sigma[p * d2 + q] = next;
                    next += 1;
                }
            }
        }
    }
    sigma
}

/// Metric on `A₁⊗A₂`: `ρ₁⊗1 + 1⊗ρ₂` with legs reordered from
/// `(A₁, A₁, A₂, A₂)` to `(A₁, A₂, A₁, A₂)`. In algebraic mode the first
/// factor must be commutative.
pub fn tensor_product(
    m1: &MetricCandidate,
    m2: &MetricCandidate,
    mode: Mode,
) -> Result<MetricCandidate, ConstructError> {
    let s1 = m1.shape();
    let s2 = m2.shape();
    if mode == Mode::Algebraic && !s1.is_classical() {
        return Err(ConstructError::NoncommutativeFirstFactor(s1.clone()));
    }
    let (d1, d2) = (s1.dim(), s2.dim());
    let one1 = CMatrix::identity(d1 * d1, d1 * d1);
    let one2 = CMatrix::identity(d2 * d2, d2 * d2);
    let grouped = linalg::kron(m1.rho.matrix(), &one2) + linalg::kron(&one1, m2.rho.matrix());
    let interleaved = linalg::permute_legs(&grouped, &[d1, d1, d2, d2], &[0, 2, 1, 3]);

    // relabel C^{D₁}⊗C^{D₂} so that the product blocks are contiguous
    let inner = product_block_order(s1, s2);
    let dd = d1 * d2;
    let sigma: Vec<usize> = (0..dd * dd).map(|k| inner[k / dd] * dd + inner[k % dd]).collect();
    let data = linalg::permute_indices(&interleaved, &sigma);
    let shape = product_shape(s1, s2);
    Ok(MetricCandidate::new(BiElement::from_matrix(&shape, data)?))
}
