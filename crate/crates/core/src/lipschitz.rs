//! Lipschitz seminorm and Monge–Kantorovich distance induced by a metric.
//!
//! For a metric `ρ` the seminorm is `‖a‖_Lip = ‖(a⊗1 − 1⊗a)ρ⁺‖`, where `ρ⁺`
//! inverts `ρ` on `H_δ^⊥` and vanishes on `H_δ`. The distance between states
//! is `d(φ, ψ) = sup { |⟨φ − ψ, a⟩| : a = a*, ‖a‖_Lip ≤ 1 }`.
//!
//! On commutative shapes the supremum is the Kantorovich transport cost and
//! is solved exactly as a linear program. Elsewhere it is bracketed: the lower
//! end by ascent on `⟨φ − ψ, a⟩ / ‖a‖_Lip`, the upper end by a dual
//! certificate `Y` with `L*(Y) = φ − ψ`, which bounds the supremum by the
//! trace norm `‖Y‖₁`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{self, AlgebraElement, AlgebraError, AlgebraShape, BiElement};
use crate::axioms::{self, ToleranceConfig};
use crate::linalg::{self, CMatrix, CVector, C64};

#[derive(Debug, Error)]
pub enum LipschitzError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("ρ does not satisfy {0}; the inverse on H_δ^⊥ is undefined")]
    NotAMetric(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("the Leibniz estimate needs commuting elements (‖ab − ba‖ = {0:.3e})")]
    NonCommuting(f64),
    #[error("pure-state bound needs states on distinct blocks, both are on block {0}")]
    SameBlock(usize),
    #[error("transport linear program failed: {0}")]
    Transport(String),
}

/// Tolerance for state validation (positivity and unit trace).
const STATE_TOL: f64 = 1e-10;

/// A state `a ↦ Σ_k tr(d_k a_k)` given by per-block density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    shape: AlgebraShape,
    densities: Vec<CMatrix>,
}

impl State {
    pub fn new(shape: &AlgebraShape, densities: Vec<CMatrix>) -> Result<Self, LipschitzError> {
        if densities.len() != shape.num_blocks() {
            return Err(LipschitzError::InvalidState(format!(
                "expected {} density blocks, found {}",
                shape.num_blocks(),
                densities.len()
            )));
        }
        let mut total = 0.0;
        for (k, (dk, &n)) in densities.iter().zip(shape.blocks()).enumerate() {
            if dk.nrows() != n || dk.ncols() != n {
                return Err(LipschitzError::InvalidState(format!("block {k} must be {n}×{n}")));
            }
            if linalg::self_adjoint_defect(dk) > STATE_TOL {
                return Err(LipschitzError::InvalidState(format!("block {k} is not self-adjoint")));
            }
            if linalg::min_eigenvalue(dk) < -STATE_TOL {
                return Err(LipschitzError::InvalidState(format!("block {k} is not positive")));
            }
            total += dk.trace().re;
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(LipschitzError::InvalidState(format!("total trace is {total}, expected 1")));
        }
        Ok(Self { shape: shape.clone(), densities })
    }

    /// Reads the per-block densities off a block-diagonal `D×D` matrix.
    pub fn from_density(density: &AlgebraElement) -> Result<Self, LipschitzError> {
        let shape = density.shape();
        let blocks = (0..shape.num_blocks())
            .map(|k| {
                let r = shape.block_range(k);
                density.matrix().view((r.start, r.start), (r.len(), r.len())).into_owned()
            })
            .collect();
        Self::new(shape, blocks)
    }

    /// Probability vector on a commutative shape.
    pub fn from_probabilities(shape: &AlgebraShape, p: &[f64]) -> Result<Self, LipschitzError> {
        if !shape.is_classical() {
            return Err(LipschitzError::InvalidState("probability vectors need a commutative shape".into()));
        }
        let blocks = p.iter().map(|&x| CMatrix::from_element(1, 1, linalg::real(x))).collect();
        Self::new(shape, blocks)
    }

    /// Point mass at `point` on a commutative shape.
    pub fn point_mass(shape: &AlgebraShape, point: usize) -> Result<Self, LipschitzError> {
        let mut p = vec![0.0; shape.dim()];
        *p.get_mut(point).ok_or_else(|| LipschitzError::InvalidState(format!("no point {point}")))? = 1.0;
        Self::from_probabilities(shape, &p)
    }

    pub fn from_pure(shape: &AlgebraShape, pure: &PureState) -> Result<Self, LipschitzError> {
        let blocks = shape
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, &n)| if k == pure.block { &pure.vector * pure.vector.adjoint() } else { CMatrix::zeros(n, n) })
            .collect();
        Self::new(shape, blocks)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn densities(&self) -> &[CMatrix] {
        &self.densities
    }

    /// Block-diagonal density matrix in `A`.
    pub fn density(&self) -> AlgebraElement {
        let d = self.shape.dim();
        let mut m = CMatrix::zeros(d, d);
        for (k, dk) in self.densities.iter().enumerate() {
            let o = self.shape.offset(k);
            m.view_mut((o, o), (dk.nrows(), dk.ncols())).copy_from(dk);
        }
        AlgebraElement::from_matrix(&self.shape, m).expect("block-diagonal by construction")
    }

    /// `⟨φ, a⟩ = Σ_k tr(d_k a_k)`.
    pub fn pairing(&self, a: &AlgebraElement) -> C64 {
        (self.density().matrix() * a.matrix()).trace()
    }

    /// The pure state this is, if it is one: rank one and supported on one block.
    pub fn as_pure(&self) -> Option<PureState> {
        let mut found = None;
        for (k, dk) in self.densities.iter().enumerate() {
            if dk.trace().re <= STATE_TOL {
                continue;
            }
            if found.is_some() {
                return None;
            }
            let (values, vectors) = linalg::eigh(dk);
            let top = *values.last().expect("nonempty block");
            if (top - 1.0).abs() > 1e-9 {
                return None;
            }
            found = Some(PureState { block: k, vector: vectors.column(values.len() - 1).into_owned() });
        }
        found
    }
}

/// `a ↦ ⟨π_i(a)v, v⟩` for a unit vector `v` of block `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub block: usize,
    pub vector: CVector,
}

impl PureState {
    pub fn new(shape: &AlgebraShape, block: usize, vector: CVector) -> Result<Self, LipschitzError> {
        let n = *shape.blocks().get(block).ok_or_else(|| LipschitzError::InvalidState(format!("no block {block}")))?;
        if vector.len() != n {
            return Err(LipschitzError::InvalidState(format!("block {block} needs a vector of length {n}")));
        }
        if (vector.norm() - 1.0).abs() > STATE_TOL {
            return Err(LipschitzError::InvalidState("pure-state vector must have unit norm".into()));
        }
        Ok(Self { block, vector })
    }
}

/// `ρ⁺`: inverse of `ρ` on `H_δ^⊥`, zero on `H_δ`. Requires (i)', (ii)' and
/// (iii)' under `cfg`.
pub fn metric_pseudo_inverse(rho: &BiElement, cfg: &ToleranceConfig) -> Result<BiElement, LipschitzError> {
    if !axioms::check_positive(rho, cfg).passed {
        return Err(LipschitzError::NotAMetric("(i)'"));
    }
    if !axioms::check_diag_vanish(rho, cfg).passed {
        return Err(LipschitzError::NotAMetric("(ii)'"));
    }
    if !axioms::check_nondegenerate(rho, cfg).passed {
        return Err(LipschitzError::NotAMetric("(iii)'"));
    }
    let basis = algebra::off_diagonal_basis(rho.shape());
    let n = rho.size();
    if basis.ncols() == 0 {
        return Ok(BiElement::zeros(rho.shape()));
    }
    let compressed = linalg::hermitian_part(&(basis.adjoint() * rho.matrix() * &basis));
    let inverse = compressed.cholesky().ok_or(LipschitzError::NotAMetric("(iii)'"))?.inverse();
    let full = &basis * inverse * basis.adjoint();
    debug_assert_eq!(full.nrows(), n);
    Ok(BiElement::from_matrix_masked(rho.shape(), full)?)
}

/// Controls for the iterative bracket on noncommutative shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Stop once the bracket is this narrow (relative), or once the lower
    /// end improves by less than `tol` over `window` iterations while the
    /// bracket is narrower than `gap_tol`.
    pub tol: f64,
    pub window: usize,
    pub gap_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iter: 5000, tol: 1e-8, window: 50, gap_tol: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    TransportLp,
    Ascent,
}

/// Bracket `lower ≤ d(φ, ψ) ≤ upper`; `upper = None` means no finite bound
/// is known, and `unbounded` that the supremum was shown to be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MkDistance {
    pub lower: f64,
    pub upper: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub unbounded: bool,
    pub method: DistanceMethod,
}

impl MkDistance {
    fn exact(value: f64, method: DistanceMethod) -> Self {
        Self { lower: value, upper: Some(value), converged: true, iterations: 0, unbounded: false, method }
    }

    pub fn width(&self) -> f64 {
        self.upper.map_or(f64::INFINITY, |u| u - self.lower)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibnizCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub holds: bool,
}

/// A verified metric together with `ρ⁺`.
#[derive(Clone, Debug)]
pub struct LipschitzContext {
    rho: BiElement,
    pinv: BiElement,
}

impl LipschitzContext {
    pub fn new(rho: &BiElement, cfg: &ToleranceConfig) -> Result<Self, LipschitzError> {
        Ok(Self { rho: rho.clone(), pinv: metric_pseudo_inverse(rho, cfg)? })
    }

    pub fn rho(&self) -> &BiElement {
        &self.rho
    }

    pub fn pseudo_inverse(&self) -> &BiElement {
        &self.pinv
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.rho.shape()
    }

    /// `(a⊗1 − 1⊗a)ρ⁺`.
    fn gradient_operator(&self, a: &AlgebraElement) -> CMatrix {
        let diff = &algebra::left_factor(a) - &algebra::right_factor(a);
        diff.matrix() * self.pinv.matrix()
    }

    pub fn seminorm(&self, a: &AlgebraElement) -> Result<f64, LipschitzError> {
        self.ensure_shape(a.shape())?;
        Ok(linalg::op_norm(&self.gradient_operator(a)))
    }

    /// `‖ab‖_Lip ≤ ‖a‖·‖b‖_Lip + ‖a‖_Lip·‖b‖` for commuting `a`, `b`.
    pub fn leibniz(&self, a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> Result<LeibnizCheck, LipschitzError> {
        let comm = (&(a * b) - &(b * a)).op_norm();
        if comm > tol * (a.op_norm() * b.op_norm()).max(1.0) {
            return Err(LipschitzError::NonCommuting(comm));
        }
        let lhs = self.seminorm(&(a * b))?;
        let rhs = a.op_norm() * self.seminorm(b)? + self.seminorm(a)? * b.op_norm();
        let slack = rhs - lhs;
        Ok(LeibnizCheck { lhs, rhs, slack, holds: slack >= -tol * rhs.max(1.0) })
    }

    /// `‖ρ(v⊗w)‖` for pure states on distinct blocks.
    pub fn pure_state_bound(&self, v: &PureState, w: &PureState) -> Result<f64, LipschitzError> {
        pure_state_bound(v, w, &self.rho)
    }

    pub fn mk_distance(&self, phi: &State, psi: &State, opts: &AscentOptions) -> Result<MkDistance, LipschitzError> {
        self.ensure_shape(phi.shape())?;
        self.ensure_shape(psi.shape())?;
        let delta = &phi.density() - &psi.density();
        if delta.op_norm() == 0.0 {
            return Ok(MkDistance::exact(0.0, DistanceMethod::TransportLp));
        }
        if self.shape().is_classical() {
            let value = transport_cost(&self.rho, phi, psi)?;
            return Ok(MkDistance::exact(value, DistanceMethod::TransportLp));
        }
        self.mk_bracket(phi, psi, opts)
    }

    /// The iterative bracket, used on every shape that is not commutative;
    /// available on commutative shapes too for cross-checking the LP.
    pub fn mk_bracket(&self, phi: &State, psi: &State, opts: &AscentOptions) -> Result<MkDistance, LipschitzError> {
        self.ensure_shape(phi.shape())?;
        self.ensure_shape(psi.shape())?;
        let delta = &phi.density() - &psi.density();
        let mut result = DualityBracket::new(self, &delta).run(opts);
        if let (Some(v), Some(w)) = (phi.as_pure(), psi.as_pure()) {
            if v.block != w.block {
                let bound = self.pure_state_bound(&v, &w)?;
                if !result.unbounded {
                    result.upper = Some(result.upper.map_or(bound, |u| u.min(bound)));
                }
            }
        }
        Ok(result)
    }

    fn ensure_shape(&self, shape: &AlgebraShape) -> Result<(), LipschitzError> {
        if shape != self.shape() {
            return Err(AlgebraError::ShapeMismatch {
                left: Box::new(self.shape().clone()),
                right: Box::new(shape.clone()),
            }
            .into());
        }
        Ok(())
    }
}

pub fn lip_seminorm(a: &AlgebraElement, rho: &BiElement, cfg: &ToleranceConfig) -> Result<f64, LipschitzError> {
    LipschitzContext::new(rho, cfg)?.seminorm(a)
}

pub fn check_leibniz(
    a: &AlgebraElement,
    b: &AlgebraElement,
    rho: &BiElement,
    cfg: &ToleranceConfig,
) -> Result<LeibnizCheck, LipschitzError> {
    LipschitzContext::new(rho, cfg)?.leibniz(a, b, cfg.eq_tol)
}

pub fn mk_distance(
    phi: &State,
    psi: &State,
    rho: &BiElement,
    cfg: &ToleranceConfig,
) -> Result<MkDistance, LipschitzError> {
    LipschitzContext::new(rho, cfg)?.mk_distance(phi, psi, &AscentOptions::default())
}

/// `‖ρ(v⊗w)‖` for unit vectors of distinct blocks.
pub fn pure_state_bound(v: &PureState, w: &PureState, rho: &BiElement) -> Result<f64, LipschitzError> {
    if v.block == w.block {
        return Err(LipschitzError::SameBlock(v.block));
    }
    let shape = rho.shape();
    let ve = algebra::embed_block_vector(shape, v.block, &v.vector);
    let we = algebra::embed_block_vector(shape, w.block, &w.vector);
    Ok((rho.matrix() * ve.kronecker(&we)).norm())
}

/// Kantorovich transport cost between two probability vectors on a
/// commutative shape, with costs `d(x, y) = ρ[(x,y),(x,y)]`.
fn transport_cost(rho: &BiElement, phi: &State, psi: &State) -> Result<f64, LipschitzError> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};

    let n = rho.shape().dim();
    let mass = |s: &State| -> Vec<f64> {
        let p: Vec<f64> = s.densities().iter().map(|d| d[(0, 0)].re.max(0.0)).collect();
        let total: f64 = p.iter().sum();
        p.into_iter().map(|x| x / total).collect()
    };
    let (p, q) = (mass(phi), mass(psi));
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<minilp::Variable>> = (0..n)
        .map(|x| {
            (0..n).map(|y| problem.add_var(rho.matrix()[(x * n + y, x * n + y)].re, (0.0, f64::INFINITY))).collect()
        })
        .collect();
    for x in 0..n {
        let row: Vec<(minilp::Variable, f64)> = (0..n).map(|y| (vars[x][y], 1.0)).collect();
        problem.add_constraint(row.as_slice(), ComparisonOp::Eq, p[x]);
        let col: Vec<(minilp::Variable, f64)> = (0..n).map(|y| (vars[y][x], 1.0)).collect();
        problem.add_constraint(col.as_slice(), ComparisonOp::Eq, q[x]);
    }
    let solution = problem.solve().map_err(|e| LipschitzError::Transport(e.to_string()))?;
    Ok(solution.objective())
}

/// The linear map `x ↦ L(x) = (a(x)⊗1 − 1⊗a(x))ρ⁺` over real coordinates of
/// self-adjoint `a(x) = Σ x_j e_j`.
struct DualityBracket {
    ops: Vec<CMatrix>,
    /// `δ_j = tr((φ − ψ) e_j)`.
    delta: DVector<f64>,
    /// Realified operator: columns are `flatten(L_j)`.
    realified: DMatrix<f64>,
}

impl DualityBracket {
    fn new(ctx: &LipschitzContext, delta: &AlgebraElement) -> Self {
        let basis = self_adjoint_basis(ctx.shape());
        let ops: Vec<CMatrix> = basis.iter().map(|e| ctx.gradient_operator(e)).collect();
        let coeffs = basis.iter().map(|e| (delta.matrix() * e.matrix()).trace().re);
        let delta = DVector::from_iterator(basis.len(), coeffs);
        let rows = ops.first().map_or(0, |m| 2 * m.len());
        let mut realified = DMatrix::zeros(rows, ops.len());
        for (j, op) in ops.iter().enumerate() {
            for (i, z) in op.iter().enumerate() {
                realified[(2 * i, j)] = z.re;
                realified[(2 * i + 1, j)] = z.im;
            }
        }
        Self { ops, delta, realified }
    }

    fn apply(&self, x: &DVector<f64>) -> CMatrix {
        let n = self.ops[0].nrows();
        let mut out = CMatrix::zeros(n, n);
        for (op, &c) in self.ops.iter().zip(x.iter()) {
            if c != 0.0 {
                out += op * linalg::real(c);
            }
        }
        out
    }

    fn ratio(&self, x: &DVector<f64>) -> f64 {
        let norm = linalg::op_norm(&self.apply(x));
        if norm == 0.0 {
            return 0.0;
        }
        self.delta.dot(x).abs() / norm
    }

    fn run(&self, opts: &AscentOptions) -> MkDistance {
        let m = self.delta.len();
        let gram = self.realified.transpose() * &self.realified;
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let cutoff = 1e-12 * top.max(1e-300);

        // component of δ in ker(L): the supremum is infinite along it
        let mut kernel_part = DVector::zeros(m);
        let mut gram_pinv = DMatrix::zeros(m, m);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let col = eig.eigenvectors.column(k);
            if lambda <= cutoff {
                kernel_part += col * col.dot(&self.delta);
            } else {
                gram_pinv += col * col.transpose() / lambda;
            }
        }
        if kernel_part.norm() > 1e-9 * self.delta.norm().max(1e-300) {
            return MkDistance {
                lower: self.ratio(&self.delta),
                upper: None,
                converged: true,
                iterations: 0,
                unbounded: true,
                method: DistanceMethod::Ascent,
            };
        }
        self.ascend(&gram_pinv, opts)
    }

    /// Splitting ascent on `max δ·x` subject to `‖L(x)‖ ≤ 1`.
    ///
    /// Each step solves a least-squares problem for `x`, moves `Z` to the
    /// nearest point of the unit operator-norm ball, and updates the scaled
    /// multiplier `U`. The lower end is the best renormalized ratio seen; the
    /// upper end is `‖Y‖₁` for `Y = βU` corrected onto `{L*(Y) = δ}`.
    fn ascend(&self, gram_pinv: &DMatrix<f64>, opts: &AscentOptions) -> MkDistance {
        let lr = &self.realified;
        let n = self.ops[0].nrows();
        let to_vec = |z: &CMatrix| DVector::from_iterator(2 * n * n, z.iter().flat_map(|c| [c.re, c.im]));

        let x0 = gram_pinv * &self.delta;
        let mut lower = self.ratio(&x0);
        let beta = lower.max(1e-300);
        let mut z = self.apply(&x0) / linalg::real(linalg::op_norm(&self.apply(&x0)).max(1e-300));
        let mut u = CMatrix::zeros(n, n);
        let mut upper = f64::INFINITY;
        let mut history = vec![lower];
        let mut iterations = 0;
        let mut converged = false;

        for it in 0..opts.max_iter {
            iterations = it + 1;
            let rhs = lr.transpose() * to_vec(&(&z - &u)) + &self.delta / beta;
            let x = gram_pinv * rhs;
            let lx = self.apply(&x);
            lower = lower.max(self.ratio(&x));
            z = clip_singular_values(&(&lx + &u), 1.0);
            u += &lx - &z;

            if it % 10 == 9 || it + 1 == opts.max_iter {
                let mut y = to_vec(&u) * beta;
                y += lr * (gram_pinv * (&self.delta - lr.transpose() * &y));
                let ym = CMatrix::from_iterator(n, n, y.as_slice().chunks(2).map(|p| C64::new(p[0], p[1])));
                upper = upper.min(linalg::nuclear_norm(&ym));
            }
            history.push(lower);
            if upper - lower <= opts.tol * lower.max(1.0) {
                converged = true;
                break;
            }
            if history.len() > opts.window {
                let past = history[history.len() - 1 - opts.window];
                if lower - past < opts.tol * lower.max(1.0) && upper - lower <= opts.gap_tol * lower.max(1.0) {
                    converged = true;
                    break;
                }
            }
        }
        MkDistance {
            lower,
            upper: Some(upper.max(lower)),
            converged,
            iterations,
            unbounded: false,
            method: DistanceMethod::Ascent,
        }
    }
}

/// Nearest point of `{‖Z‖ ≤ radius}` in Frobenius distance, as
/// `M·f(M*M)` with `f(t) = min(1, radius/√t)`.
fn clip_singular_values(m: &CMatrix, radius: f64) -> CMatrix {
    let gram = m.adjoint() * m;
    let r2 = radius * radius;
    m * linalg::spectral_map(&gram, |t| if t > r2 { radius / t.sqrt() } else { 1.0 })
}

/// Orthonormal real basis of the self-adjoint part of `A`.
pub fn self_adjoint_basis(shape: &AlgebraShape) -> Vec<AlgebraElement> {
    let d = shape.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(shape.self_adjoint_dim());
    for k in 0..shape.num_blocks() {
        for a in shape.block_range(k) {
            for b in shape.block_range(k) {
                let mut m = CMatrix::zeros(d, d);
                match a.cmp(&b) {
                    std::cmp::Ordering::Equal => m[(a, a)] = linalg::ONE,
                    std::cmp::Ordering::Less => {
                        m[(a, b)] = linalg::real(h);
                        m[(b, a)] = linalg::real(h);
                    }
                    std::cmp::Ordering::Greater => {
                        m[(b, a)] = C64::new(0.0, h);
                        m[(a, b)] = C64::new(0.0, -h);
                    }
                }
                out.push(AlgebraElement::from_matrix(shape, m).expect("block entry"));
            }
        }
    }
    out
}
