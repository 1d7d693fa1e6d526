//! Numerical feasibility search for metrics on a given shape.
//!
//! The unknown is the pair `(ρ, S)` with `S ∈ A⊗A⊗A`. Dykstra's algorithm
//! alternates between two closed convex sets of pairs:
//!
//! * the affine set `{ρ structural, tr ρ = τ, S = ρ⊗1 + 1⊗ρ − 𝔐(ρ)}`,
//! * the product cone `{ρ ⪰ ε on H_δ^⊥} × {S ⪰ 0}`.
//!
//! Only candidates that pass [`certify`] are reported as found. A run that
//! stalls says nothing rigorous about infeasibility.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{self, AlgebraError, AlgebraShape, BiElement, TriElement};
use crate::axioms::{self, Axiom, AxiomError, AxiomReport, MetricCandidate, Mode, StrictFloor, ToleranceConfig};
use crate::exchange::{ExchangeError, MatrixDocument, FLUSH_THRESHOLD};
use crate::linalg::{self, CMatrix, C64};
use crate::structure::StructuralProjector;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error("shape {0} has no structural directions with nonzero trace")]
    NoTraceDirection(AlgebraShape),
}

/// Which scale is pinned to exclude `ρ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `tr ρ = trace_target` throughout.
    Trace,
    /// Run with the trace gauge, then rescale the result to `‖ρ‖ = 1`.
    OpNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub shape: AlgebraShape,
    pub eps: f64,
    pub trace_target: f64,
    pub gauge: Gauge,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub residual_tol: f64,
    /// Diagnostic: omit the triangle cone and ignore (v) when certifying.
    #[serde(default)]
    pub drop_triangle: bool,
}

impl SearchConfig {
    /// Defaults: `ε = 10⁻⁶`, `tr ρ = D²`, 5000 iterations, 8 restarts.
    pub fn new(shape: AlgebraShape) -> Self {
        let d = shape.dim() as f64;
        Self {
            shape,
            eps: 1e-6,
            trace_target: d * d,
            gauge: Gauge::Trace,
            max_iter: 5000,
            restarts: 8,
            seed: 0,
            residual_tol: 1e-8,
            drop_triangle: false,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: &str| Err(SearchError::InvalidConfig(msg.to_string()));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive");
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return bad("residual_tol must be positive");
        }
        if !(self.trace_target > 0.0 && self.trace_target.is_finite()) {
            return bad("trace_target must be positive");
        }
        if self.max_iter == 0 || self.restarts == 0 {
            return bad("max_iter and restarts must be at least 1");
        }
        if self.shape.dim() > 12 {
            return bad("shapes with D > 12 are not supported");
        }
        Ok(())
    }

    /// Tolerances used by [`certify`]: psd `10⁻⁶`, floor `ε/2` at the
    /// trace gauge.
    pub fn certify_tolerances(&self) -> ToleranceConfig {
        ToleranceConfig {
            eq_tol: 1e-9,
            psd_tol: 1e-6,
            strict_floor: StrictFloor::Absolute(self.eps / 2.0),
            sample_count: 64,
            seed: self.seed,
        }
    }

    fn skipped_axioms(&self) -> &'static [Axiom] {
        if self.drop_triangle {
            &[Axiom::Triangle]
        } else {
            &[]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    CandidateFound,
    NoConvergence,
}

/// Distances of the affine iterate to the two cones, relative to `‖ρ‖_F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub iteration: usize,
    pub cone: f64,
    pub triangle: f64,
}

impl ResidualPoint {
    pub fn value(&self) -> f64 {
        self.cone.max(self.triangle)
    }
}

/// A certified (or rejected) candidate in exchange form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub rho: MatrixDocument,
    pub diameter: f64,
    pub report: AxiomReport,
}

impl CandidateRecord {
    pub fn to_candidate(&self) -> Result<MetricCandidate, ExchangeError> {
        let rho = self.rho.to_element::<2>()?;
        let mut candidate = MetricCandidate::new(rho);
        candidate.report = Some(self.report.clone());
        Ok(candidate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub seed: u64,
    pub iterations: usize,
    pub best_residual: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub mode: Mode,
    pub config: SearchConfig,
    pub candidate: Option<CandidateRecord>,
    /// History of the reported restart, at most 1000 points.
    pub residual_history: Vec<ResidualPoint>,
    pub best_residual: f64,
    pub seed_used: u64,
    pub restarts: Vec<RestartSummary>,
}

impl SearchOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Nearest positive semidefinite matrix in Frobenius distance to the
/// hermitian part of `x`.
pub fn project_psd(x: &CMatrix) -> CMatrix {
    linalg::clip_spectrum(x, 0.0)
}

/// Representation-mode structural projection; `_eps` is unused because the
/// floor belongs to the cone, not the subspace.
pub fn project_structure(rho: &BiElement, shape: &AlgebraShape, _eps: f64) -> Result<BiElement, SearchError> {
    if rho.shape() != shape {
        return Err(AlgebraError::ShapeMismatch {
            left: Box::new(rho.shape().clone()),
            right: Box::new(shape.clone()),
        }
        .into());
    }
    Ok(StructuralProjector::new(shape, Mode::Representation).project(rho))
}

/// [`axioms::verify`] at the search-grade tolerances of `cfg`.
pub fn certify(
    rho: &BiElement,
    shape: &AlgebraShape,
    cfg: &SearchConfig,
    mode: Mode,
) -> Result<AxiomReport, SearchError> {
    Ok(axioms::verify(rho, shape, &cfg.certify_tolerances(), mode)?)
}

/// Runs every restart (in parallel) and reports the best one: certified runs
/// first (lowest restart index), then lowest residual, then lowest index.
pub fn feasibility_search(cfg: &SearchConfig, mode: Mode) -> Result<SearchOutcome, SearchError> {
    cfg.validate()?;
    let problem = Problem::new(cfg, mode)?;
    let runs: Vec<RunResult> = (0..cfg.restarts).into_par_iter().map(|k| problem.run(k)).collect::<Result<_, _>>()?;

    let best = runs
        .iter()
        .min_by(|a, b| {
            // among certified runs residuals are round-off, so only the index counts
            let by_residual = if a.certified && b.certified {
                std::cmp::Ordering::Equal
            } else {
                a.best_residual.total_cmp(&b.best_residual)
            };
            b.certified.cmp(&a.certified).then(by_residual).then(a.index.cmp(&b.index))
        })
        .expect("at least one restart");

    let restarts = runs
        .iter()
        .map(|r| RestartSummary {
            index: r.index,
            seed: r.seed,
            iterations: r.iterations,
            best_residual: r.best_residual,
            certified: r.certified,
        })
        .collect();
    Ok(SearchOutcome {
        status: if best.certified { SearchStatus::CandidateFound } else { SearchStatus::NoConvergence },
        mode,
        config: cfg.clone(),
        candidate: best.candidate.clone(),
        residual_history: downsample(&best.history, 1000),
        best_residual: best.best_residual,
        seed_used: best.seed,
        restarts,
    })
}

fn downsample(history: &[ResidualPoint], max_points: usize) -> Vec<ResidualPoint> {
    if history.len() <= max_points {
        return history.to_vec();
    }
    let last = history.len() - 1;
    (0..max_points).map(|i| history[i * last / (max_points - 1)]).collect()
}

struct RunResult {
    index: usize,
    seed: u64,
    iterations: usize,
    best_residual: f64,
    certified: bool,
    candidate: Option<CandidateRecord>,
    history: Vec<ResidualPoint>,
}

/// Precomputed pieces shared by all restarts.
struct Problem<'a> {
    cfg: &'a SearchConfig,
    mode: Mode,
    projector: StructuralProjector,
    basis: Vec<BiElement>,
    images: Vec<TriElement>,
    traces: DVector<f64>,
    /// Cholesky factor of `I + K`, `K_ij = ⟨T B_i, T B_j⟩`.
    system: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    /// `(I + K)⁻¹ g` and `g·(I + K)⁻¹ g`.
    solved_traces: DVector<f64>,
    trace_norm: f64,
    /// Orthonormal basis of `H_δ^⊥` (representation) or `Q` (algebraic).
    complement_basis: CMatrix,
    complement: CMatrix,
}

impl<'a> Problem<'a> {
    fn new(cfg: &'a SearchConfig, mode: Mode) -> Result<Self, SearchError> {
        let shape = &cfg.shape;
        let projector = StructuralProjector::new(shape, mode);
        let basis = projector.basis();
        let images: Vec<TriElement> = basis.iter().map(axioms::triangle_defect).collect();
        let p = basis.len();
        let traces = DVector::from_iterator(p, basis.iter().map(|b| b.trace().re));
        if traces.norm() < 1e-12 {
            return Err(SearchError::NoTraceDirection(shape.clone()));
        }
        let mut gram = DMatrix::<f64>::identity(p, p);
        if !cfg.drop_triangle {
            for i in 0..p {
                for j in 0..=i {
                    let k = linalg::real_inner(images[i].matrix(), images[j].matrix());
                    gram[(i, j)] += k;
                    if i != j {
                        gram[(j, i)] += k;
                    }
                }
            }
        }
        let system = gram.cholesky().ok_or_else(|| SearchError::InvalidConfig("singular coupling system".into()))?;
        let solved_traces = system.solve(&traces);
        let trace_norm = traces.dot(&solved_traces);
        Ok(Self {
            cfg,
            mode,
            projector,
            basis,
            images,
            traces,
            system,
            solved_traces,
            trace_norm,
            complement_basis: algebra::off_diagonal_basis(shape),
            complement: CMatrix::identity(shape.tensor_dim(2), shape.tensor_dim(2))
                - algebra::diag_projector(shape).matrix(),
        })
    }

    fn target(&self) -> f64 {
        self.cfg.trace_target
    }

    fn assemble_rho(&self, c: &DVector<f64>) -> CMatrix {
        let n = self.cfg.shape.tensor_dim(2);
        let mut out = CMatrix::zeros(n, n);
        for (b, &x) in self.basis.iter().zip(c.iter()) {
            out += b.matrix() * linalg::real(x);
        }
        out
    }

    fn assemble_s(&self, c: &DVector<f64>) -> CMatrix {
        let n = self.cfg.shape.tensor_dim(3);
        let mut out = CMatrix::zeros(n, n);
        for (t, &x) in self.images.iter().zip(c.iter()) {
            out += t.matrix() * linalg::real(x);
        }
        out
    }

    /// Projection onto the affine set in the product inner product.
    fn project_affine(&self, rho: &CMatrix, s: &CMatrix) -> (CMatrix, CMatrix, DVector<f64>) {
        let p = self.basis.len();
        let mut rhs = DVector::from_iterator(p, self.basis.iter().map(|b| linalg::real_inner(b.matrix(), rho)));
        if !self.cfg.drop_triangle {
            for (j, t) in self.images.iter().enumerate() {
                rhs[j] += linalg::real_inner(t.matrix(), s);
            }
        }
        let free = self.system.solve(&rhs);
        let mu = (self.target() - self.traces.dot(&free)) / self.trace_norm;
        let c = free + &self.solved_traces * mu;
        let rho_a = self.assemble_rho(&c);
        let s_a = if self.cfg.drop_triangle { s.clone() } else { self.assemble_s(&c) };
        (rho_a, s_a, c)
    }

    /// Projection onto the shifted cone for `ρ`.
    fn project_cone(&self, rho: &CMatrix) -> CMatrix {
        let eps = self.cfg.eps;
        match self.mode {
            Mode::Representation => {
                let v = &self.complement_basis;
                if v.ncols() == 0 {
                    return CMatrix::zeros(rho.nrows(), rho.ncols());
                }
                let compressed = v.adjoint() * rho * v;
                v * linalg::clip_spectrum(&compressed, eps) * v.adjoint()
            }
            Mode::Algebraic => {
                let shift = &self.complement * linalg::real(eps);
                &shift + project_psd(&(rho - &shift))
            }
        }
    }

    fn project_triangle(&self, s: &CMatrix) -> CMatrix {
        if self.cfg.drop_triangle {
            s.clone()
        } else {
            project_psd(s)
        }
    }

    fn start(&self, rng: &mut ChaCha8Rng) -> (CMatrix, CMatrix) {
        let shape = &self.cfg.shape;
        let n = shape.tensor_dim(2);
        let g = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        let psd = &g * g.adjoint();
        let psd = BiElement::from_matrix_masked(shape, &psd / psd.trace()).expect("shape preserved");
        let structural = self.projector.project(&psd);
        let q = &self.complement;
        let compressed = BiElement::from_matrix_masked(shape, q * structural.matrix() * q).expect("shape preserved");
        let mut rho = self.projector.project(&compressed).into_matrix();
        let tr = rho.trace().re;
        if tr.abs() > 1e-12 {
            rho *= linalg::real(self.target() / tr);
        }
        let (rho, s, _) = self.project_affine(&rho, &self.triangle_of(&rho));
        (rho, s)
    }

    fn triangle_of(&self, rho: &CMatrix) -> CMatrix {
        if self.cfg.drop_triangle {
            let n = self.cfg.shape.tensor_dim(3);
            return CMatrix::zeros(n, n);
        }
        let r = BiElement::from_matrix_masked(&self.cfg.shape, rho.clone()).expect("shape preserved");
        axioms::triangle_defect(&r).into_matrix()
    }

    fn run(&self, index: usize) -> Result<RunResult, SearchError> {
        let seed = self.cfg.seed.wrapping_add(index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut rho, mut s) = self.start(&mut rng);
        let (mut p_rho, mut p_s) = (CMatrix::zeros(rho.nrows(), rho.ncols()), CMatrix::zeros(s.nrows(), s.ncols()));
        let (mut q_rho, mut q_s) = (p_rho.clone(), p_s.clone());

        let mut history = Vec::new();
        let mut best_residual = f64::INFINITY;
        let mut iterations = 0;
        let mut converged_at: Option<CMatrix> = None;
        for it in 0..self.cfg.max_iter {
            iterations = it + 1;
            // affine step
            let (ra, sa, _) = self.project_affine(&(&rho + &p_rho), &(&s + &p_s));
            p_rho = &rho + &p_rho - &ra;
            p_s = &s + &p_s - &sa;

            // cone step, which also measures the residual at the affine point
            let rb = self.project_cone(&(&ra + &q_rho));
            let sb = self.project_triangle(&(&sa + &q_s));
            q_rho = &ra + &q_rho - &rb;
            q_s = &sa + &q_s - &sb;

            let scale = linalg::frobenius_norm(&ra).max(1e-300);
            let point = ResidualPoint {
                iteration: it,
                cone: linalg::frobenius_norm(&(&ra - self.project_cone(&ra))) / scale,
                triangle: linalg::frobenius_norm(&(&sa - self.project_triangle(&sa))) / scale,
            };
            history.push(point);
            best_residual = best_residual.min(point.value());
            rho = rb;
            s = sb;
            if point.value() < self.cfg.residual_tol {
                converged_at = Some(ra);
                break;
            }
        }

        let candidate = match converged_at {
            Some(ra) => Some(self.finish(ra)?),
            None => None,
        };
        let certified = candidate.as_ref().is_some_and(|c| c.report.passed_excluding(self.cfg.skipped_axioms()));
        Ok(RunResult { index, seed, iterations, best_residual, certified, candidate, history })
    }

    /// Applies the gauge, flushes round-off and certifies.
    fn finish(&self, ra: CMatrix) -> Result<CandidateRecord, SearchError> {
        let shape = &self.cfg.shape;
        let mut rho = self.projector.project(&BiElement::from_matrix_masked(shape, ra)?);
        let mut cfg = self.cfg.clone();
        if self.cfg.gauge == Gauge::OpNorm {
            let norm = rho.op_norm();
            rho = rho.scale(1.0 / norm);
            cfg.eps /= norm;
        }
        let rho = rho.flush_small(FLUSH_THRESHOLD);
        let report = certify(&rho, shape, &cfg, self.mode)?;
        Ok(CandidateRecord { rho: MatrixDocument::from_element(&rho), diameter: rho.op_norm(), report })
    }
}
