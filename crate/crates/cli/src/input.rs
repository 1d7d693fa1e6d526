//! Reading and writing the files every subcommand shares.

use std::fs;
use std::path::Path;

use qmetric::algebra::{AlgebraElement, AlgebraShape, Element};
use qmetric::axioms::{AxiomError, MetricCandidate};
use qmetric::construct::{self, ConstructError, FiniteMetricSpace};
use qmetric::exchange::{self, ExchangeError, MatrixDocument};
use qmetric::lipschitz::{LipschitzError, State};
use qmetric::search::SearchError;
use qmetric::AlgebraError;
use thiserror::Error;

/// Every error maps to exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ExchangeError },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Lipschitz(#[from] LipschitzError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Exchange(#[from] ExchangeError),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_error(path: &Path) -> impl FnOnce(ExchangeError) -> CliError + '_ {
    move |source| CliError::Parse { path: path.display().to_string(), source }
}

pub fn read_element<const L: usize>(path: &Path) -> Result<Element<L>, CliError> {
    exchange::element_from_json(&read(path)?).map_err(parse_error(path))
}

pub fn read_metric(path: &Path) -> Result<FiniteMetricSpace, CliError> {
    exchange::parse_metric(&read(path)?).map_err(parse_error(path))
}

/// A matrix document of order 2, or else a finite metric space.
pub fn read_candidate(path: &Path) -> Result<MetricCandidate, CliError> {
    let text = read(path)?;
    match MatrixDocument::from_json(&text) {
        Ok(doc) => Ok(MetricCandidate::new(doc.to_element::<2>().map_err(parse_error(path))?)),
        Err(_) => {
            let space = exchange::parse_metric(&text).map_err(parse_error(path))?;
            Ok(construct::from_finite_metric(&space))
        }
    }
}

/// `3`, `1,1,1` or `(2,1)`.
pub fn parse_shape(text: &str) -> Result<AlgebraShape, CliError> {
    let trimmed = text.trim().trim_start_matches('(').trim_end_matches(')');
    let blocks = trimmed
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("bad shape `{text}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AlgebraShape::new(blocks)?)
}

fn parse_list(text: &str) -> Option<Vec<f64>> {
    text.split(',').map(|t| t.trim().parse::<f64>().ok()).collect()
}

/// Comma-separated function values on a commutative shape, or a path to a
/// matrix document of order 1.
pub fn parse_element(spec: &str, shape: &AlgebraShape) -> Result<AlgebraElement, CliError> {
    if let Some(values) = parse_list(spec) {
        if !shape.is_classical() {
            return Err(CliError::Usage("function values need a commutative shape; pass a document".into()));
        }
        return Ok(AlgebraElement::from_real_diagonal(shape, &values)?);
    }
    let a: AlgebraElement = read_element(Path::new(spec))?;
    ensure_shape(a.shape(), shape)?;
    Ok(a)
}

/// A point index, comma-separated probabilities, or a state document.
pub fn parse_state(spec: &str, shape: &AlgebraShape) -> Result<State, CliError> {
    if let Ok(point) = spec.trim().parse::<usize>() {
        return Ok(State::point_mass(shape, point)?);
    }
    if let Some(p) = parse_list(spec) {
        return Ok(State::from_probabilities(shape, &p)?);
    }
    let path = Path::new(spec);
    let state = MatrixDocument::from_json(&read(path)?).and_then(|d| d.to_state()).map_err(parse_error(path))?;
    ensure_shape(state.shape(), shape)?;
    Ok(state)
}

fn ensure_shape(found: &AlgebraShape, expected: &AlgebraShape) -> Result<(), CliError> {
    if found != expected {
        return Err(
            AlgebraError::ShapeMismatch { left: Box::new(expected.clone()), right: Box::new(found.clone()) }.into()
        );
    }
    Ok(())
}
