//! The quantum-metric axioms and their numerical verification.
//!
//! A candidate `ρ ∈ A⊗A` is checked against
//!
//! * (i)'   `ρ ⪰ 0`
//! * (ii)'  `ρP_δ = P_δρ = 0`
//! * (iii)' `ρ` restricted to `H_δ^⊥` has no zero eigenvalue
//! * (iv)'  `𝔉(ρ) = ρ`
//! * (v)'   `𝔐(ρ) ≤ ρ⊗1 + 1⊗ρ`
//!
//! and, in algebraic mode, (ii)'' `m(ρ) = 0` and (iii)'' `ρ + ν` invertible
//! for every positive flip-symmetric `ν` with `m(ν) = 1` in place of (ii)'
//! and (iii)'.
//!
//! Tolerances are applied to `ρ/‖ρ‖`; margins are reported in the original
//! scale. Every check is always evaluated so a failing candidate gets a full
//! diagnostic profile.

mod sampler;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{self, AlgebraError, AlgebraShape, BiElement, TriElement};
use crate::linalg::{self, CMatrix, CVector, C64};

pub use sampler::{canonical_test_elements, TestElementSampler};

#[derive(Debug, Error)]
pub enum AxiomError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
    #[error("the M₂ family needs λ > 0, got {0}")]
    NonPositiveLambda(f64),
    #[error("could not draw a valid test element after {attempts} attempts")]
    SamplerExhausted { attempts: usize },
}

/// Which set of axioms to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// (i)'–(v)' relative to the identity representation.
    Representation,
    /// (i)', (ii)'', (iii)'', (iv)', (v)'.
    Algebraic,
}

impl Mode {
    pub fn axioms(self) -> [Axiom; 5] {
        match self {
            Mode::Representation => {
                [Axiom::Positive, Axiom::DiagVanish, Axiom::Nondegenerate, Axiom::FlipSymmetric, Axiom::Triangle]
            }
            Mode::Algebraic => {
                [Axiom::Positive, Axiom::AlgDiag, Axiom::AlgNondegenerate, Axiom::FlipSymmetric, Axiom::Triangle]
            }
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Representation => f.write_str("representation"),
            Mode::Algebraic => f.write_str("algebraic"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "representation" | "rep" => Ok(Mode::Representation),
            "algebraic" | "alg" => Ok(Mode::Algebraic),
            other => Err(format!("unknown mode `{other}` (expected representation or algebraic)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    #[serde(rename = "i")]
    Positive,
    #[serde(rename = "ii")]
    DiagVanish,
    #[serde(rename = "iii")]
    Nondegenerate,
    #[serde(rename = "iv")]
    FlipSymmetric,
    #[serde(rename = "v")]
    Triangle,
    #[serde(rename = "ii_alg")]
    AlgDiag,
    #[serde(rename = "iii_alg")]
    AlgNondegenerate,
}

impl Axiom {
    pub fn tag(self) -> &'static str {
        match self {
            Axiom::Positive => "i",
            Axiom::DiagVanish => "ii",
            Axiom::Nondegenerate => "iii",
            Axiom::FlipSymmetric => "iv",
            Axiom::Triangle => "v",
            Axiom::AlgDiag => "ii_alg",
            Axiom::AlgNondegenerate => "iii_alg",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axiom::Positive => "(i)'   positivity",
            Axiom::DiagVanish => "(ii)'  vanishing on the diagonal",
            Axiom::Nondegenerate => "(iii)' nondegeneracy off the diagonal",
            Axiom::FlipSymmetric => "(iv)'  flip symmetry",
            Axiom::Triangle => "(v)'   triangle inequality",
            Axiom::AlgDiag => "(ii)'' m(ρ) = 0",
            Axiom::AlgNondegenerate => "(iii)'' ρ + ν invertible (sampled)",
        }
    }
}

/// Floor `ε` for the nondegeneracy check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrictFloor {
    /// `ε = c·‖ρ‖`, or `c` when `ρ = 0`.
    Relative(f64),
    Absolute(f64),
}

impl StrictFloor {
    pub fn resolve(self, scale: f64) -> f64 {
        match self {
            StrictFloor::Relative(c) => c * scale,
            StrictFloor::Absolute(eps) => eps,
        }
    }

    fn value(self) -> f64 {
        match self {
            StrictFloor::Relative(c) | StrictFloor::Absolute(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eq_tol: f64,
    pub psd_tol: f64,
    pub strict_floor: StrictFloor,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { eq_tol: 1e-9, psd_tol: 1e-9, strict_floor: StrictFloor::Relative(1e-8), sample_count: 64, seed: 0 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), AxiomError> {
        let bad = |msg: &str| Err(AxiomError::InvalidTolerance(msg.to_string()));
        if !(self.eq_tol >= 0.0) || !(self.psd_tol >= 0.0) {
            return bad("eq_tol and psd_tol must be nonnegative");
        }
        if !(self.strict_floor.value() > 0.0) {
            return bad("the strict floor must be positive");
        }
        if self.sample_count == 0 {
            return bad("sample_count must be at least 1");
        }
        Ok(())
    }
}

/// Verdict on one axiom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomRecord {
    pub axiom: Axiom,
    pub passed: bool,
    /// Positive means satisfied with slack.
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<C64>>,
    /// The check's preconditions failed, so `passed` is false without the
    /// margin being meaningful on its own.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub indeterminate: bool,
}

impl AxiomRecord {
    fn new(axiom: Axiom, passed: bool, margin: f64) -> Self {
        Self { axiom, passed, margin, witness: None, indeterminate: false }
    }

    fn with_witness(mut self, v: &CVector) -> Self {
        if !self.passed {
            self.witness = Some(v.iter().copied().collect());
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub mode: Mode,
    pub shape: AlgebraShape,
    pub tolerances: ToleranceConfig,
    pub seed: u64,
    pub passed: bool,
    pub axioms: Vec<AxiomRecord>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn record(&self, axiom: Axiom) -> Option<&AxiomRecord> {
        self.axioms.iter().find(|r| r.axiom == axiom)
    }

    pub fn failing(&self) -> Vec<Axiom> {
        self.axioms.iter().filter(|r| !r.passed).map(|r| r.axiom).collect()
    }

    pub fn passed_excluding(&self, skip: &[Axiom]) -> bool {
        self.axioms.iter().filter(|r| !skip.contains(&r.axiom)).all(|r| r.passed)
    }
}

/// A candidate metric with its diameter and, once checked, its report.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCandidate {
    pub rho: BiElement,
    pub report: Option<AxiomReport>,
    pub diameter: f64,
}

impl MetricCandidate {
    pub fn new(rho: BiElement) -> Self {
        let diameter = rho.op_norm();
        Self { rho, report: None, diameter }
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.rho.shape()
    }

    /// Runs [`verify`] and stores the report.
    pub fn certify(&mut self, cfg: &ToleranceConfig, mode: Mode) -> Result<&AxiomReport, AxiomError> {
        let report = verify(&self.rho, self.rho.shape(), cfg, mode)?;
        Ok(self.report.insert(report))
    }

    pub fn is_certified(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.passed)
    }
}

/// Normalization scale: `‖ρ‖`, or 1 for `ρ = 0`.
fn scale_of(rho: &BiElement) -> f64 {
    let s = rho.op_norm();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

pub fn check_positive(rho: &BiElement, cfg: &ToleranceConfig) -> AxiomRecord {
    positive_record(rho, scale_of(rho), cfg)
}

fn positive_record(rho: &BiElement, scale: f64, cfg: &ToleranceConfig) -> AxiomRecord {
    let defect = linalg::self_adjoint_defect(rho.matrix());
    let (margin, vector) = rho.lowest_eigenpair();
    let passed = defect <= cfg.eq_tol * scale && margin >= -cfg.psd_tol * scale;
    AxiomRecord::new(Axiom::Positive, passed, margin).with_witness(&vector)
}

pub fn check_flip_symmetric(rho: &BiElement, cfg: &ToleranceConfig) -> AxiomRecord {
    flip_record(rho, scale_of(rho), cfg)
}

fn flip_record(rho: &BiElement, scale: f64, cfg: &ToleranceConfig) -> AxiomRecord {
    let defect = (&algebra::flip(rho) - rho).op_norm();
    AxiomRecord::new(Axiom::FlipSymmetric, defect <= cfg.eq_tol * scale, -defect)
}

pub fn check_diag_vanish(rho: &BiElement, cfg: &ToleranceConfig) -> AxiomRecord {
    diag_record(rho, &algebra::diag_projector(rho.shape()), scale_of(rho), cfg)
}

fn diag_record(rho: &BiElement, pdelta: &BiElement, scale: f64, cfg: &ToleranceConfig) -> AxiomRecord {
    let defect = rho
        .shape()
        .support_classes(2)
        .iter()
        .map(|class| {
            let (r, p) = (rho.cell(class), pdelta.cell(class));
            linalg::op_norm(&(&r * &p)).max(linalg::op_norm(&(&p * &r)))
        })
        .fold(0.0, f64::max);
    AxiomRecord::new(Axiom::DiagVanish, defect <= cfg.eq_tol * scale, -defect)
}

/// (iii)' as `λ_min(ρ + ‖ρ‖P_δ) ≥ ε`. Given (i)' and (ii)', `ρ` preserves
/// `H_δ^⊥` and the left side equals the smallest eigenvalue of `ρ|_{H_δ^⊥}`
/// (or `‖ρ‖` when `H_δ^⊥ = 0`).
pub fn check_nondegenerate(rho: &BiElement, cfg: &ToleranceConfig) -> AxiomRecord {
    let scale = scale_of(rho);
    let pdelta = algebra::diag_projector(rho.shape());
    let ok = positive_record(rho, scale, cfg).passed && diag_record(rho, &pdelta, scale, cfg).passed;
    nondegenerate_record(rho, &pdelta, scale, cfg, ok)
}

fn nondegenerate_record(
    rho: &BiElement,
    pdelta: &BiElement,
    scale: f64,
    cfg: &ToleranceConfig,
    preconditions: bool,
) -> AxiomRecord {
    let shifted = &rho.hermitian_part() + &pdelta.scale(scale);
    let (lowest, vector) = shifted.lowest_eigenpair();
    let margin = lowest - cfg.strict_floor.resolve(scale);
    let mut rec = AxiomRecord::new(Axiom::Nondegenerate, preconditions && margin >= 0.0, margin).with_witness(&vector);
    rec.indeterminate = !preconditions;
    rec
}

/// `ρ⊗1 + 1⊗ρ − 𝔐(ρ)`.
pub fn triangle_defect(rho: &BiElement) -> TriElement {
    let sum = &algebra::extend_right(rho) + &algebra::extend_left(rho);
    &sum - &algebra::mid_embed(rho)
}

/// Lowest eigenpair of [`triangle_defect`], read off `ρ` cell by cell
/// without forming the `D³×D³` matrix.
pub fn triangle_defect_lowest(rho: &BiElement) -> (f64, CVector) {
    let d = rho.shape().dim();
    let r = rho.matrix();
    let split = |x: usize| (x / (d * d), (x / d) % d, x % d);
    algebra::lowest_eigenpair_by_cells(rho.shape(), 3, |x, y| {
        let ((i, j, k), (i2, j2, k2)) = (split(x), split(y));
        let mut z = linalg::ZERO;
        if k == k2 {
            z += r[(i * d + j, i2 * d + j2)];
        }
        if i == i2 {
            z += r[(j * d + k, j2 * d + k2)];
        }
        if j == j2 {
            z -= r[(i * d + k, i2 * d + k2)];
        }
        z
    })
}

pub fn check_triangle(rho: &BiElement, cfg: &ToleranceConfig) -> AxiomRecord {
    triangle_record(rho, scale_of(rho), cfg)
}

fn triangle_record(rho: &BiElement, scale: f64, cfg: &ToleranceConfig) -> AxiomRecord {
    let (margin, vector) = triangle_defect_lowest(rho);
    AxiomRecord::new(Axiom::Triangle, margin >= -cfg.psd_tol * scale, margin).with_witness(&vector)
}

pub fn check_alg_diag(rho: &BiElement, cfg: &ToleranceConfig) -> AxiomRecord {
    alg_diag_record(rho, scale_of(rho), cfg)
}

fn alg_diag_record(rho: &BiElement, scale: f64, cfg: &ToleranceConfig) -> AxiomRecord {
    let defect = algebra::mult_map(rho).op_norm();
    AxiomRecord::new(Axiom::AlgDiag, defect <= cfg.eq_tol * scale, -defect)
}

/// Sampled falsification of (iii)''. A pass means no sampled `ν` made
/// `ρ + ν` singular; it is evidence, not a proof.
pub fn check_alg_nondegenerate_sampled(rho: &BiElement, cfg: &ToleranceConfig) -> Result<AxiomRecord, AxiomError> {
    let sampler = TestElementSampler::new(rho.shape());
    let mut worst = f64::INFINITY;
    let mut witness: Option<CVector> = None;
    let mut consider = |nu: &BiElement| {
        let (sigma, vector) = (rho + nu).smallest_singular_pair();
        if sigma < worst {
            worst = sigma;
            witness = Some(vector);
        }
    };
    for nu in canonical_test_elements(rho.shape()) {
        consider(&nu);
    }
    for nu in sampler.draw(cfg.seed, cfg.sample_count)? {
        consider(&nu);
    }
    let mut rec = AxiomRecord::new(Axiom::AlgNondegenerate, worst > cfg.eq_tol, worst - cfg.eq_tol);
    if let Some(w) = witness {
        rec = rec.with_witness(&w);
    }
    Ok(rec)
}

/// Runs the five checks of `mode`, never short-circuiting.
pub fn verify(
    rho: &BiElement,
    shape: &AlgebraShape,
    cfg: &ToleranceConfig,
    mode: Mode,
) -> Result<AxiomReport, AxiomError> {
    if rho.shape() != shape {
        return Err(AlgebraError::ShapeMismatch {
            left: Box::new(rho.shape().clone()),
            right: Box::new(shape.clone()),
        }
        .into());
    }
    cfg.validate()?;
    let scale = scale_of(rho);
    let positive = positive_record(rho, scale, cfg);
    let mut axioms = vec![positive.clone()];
    match mode {
        Mode::Representation => {
            let pdelta = algebra::diag_projector(shape);
            let diag = diag_record(rho, &pdelta, scale, cfg);
            let ok = positive.passed && diag.passed;
            axioms.push(diag);
            axioms.push(nondegenerate_record(rho, &pdelta, scale, cfg, ok));
        }
        Mode::Algebraic => {
            axioms.push(alg_diag_record(rho, scale, cfg));
            axioms.push(check_alg_nondegenerate_sampled(rho, cfg)?);
        }
    }
    axioms.push(flip_record(rho, scale, cfg));
    axioms.push(triangle_record(rho, scale, cfg));
    let passed = axioms.iter().all(|r| r.passed);
    Ok(AxiomReport { mode, shape: shape.clone(), tolerances: cfg.clone(), seed: cfg.seed, passed, axioms })
}

/// The general solution of (i)'–(iv)' on `M₂`: middle block `(λ, −λ; −λ, λ)`.
pub fn m2_admissible(lambda: f64) -> Result<BiElement, AxiomError> {
    if !(lambda > 0.0) {
        return Err(AxiomError::NonPositiveLambda(lambda));
    }
    let shape = AlgebraShape::matrix(2)?;
    let mut m = CMatrix::zeros(4, 4);
    m[(1, 1)] = linalg::real(lambda);
    m[(2, 2)] = linalg::real(lambda);
    m[(1, 2)] = linalg::real(-lambda);
    m[(2, 1)] = linalg::real(-lambda);
    Ok(BiElement::from_matrix(&shape, m)?)
}

/// `‖ρ‖`.
pub fn diameter(rho: &BiElement) -> f64 {
    rho.op_norm()
}

#[cfg(test)]
mod tests;
