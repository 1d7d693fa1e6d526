//! File formats shared by every command: the matrix document for elements of
//! `A`, `A⊗A`, `A⊗A⊗A` and states, plus the JSON and lower-triangle text
//! formats for finite metric spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraShape, Element};
use crate::construct::{ConstructError, FiniteMetricSpace};
use crate::linalg::{CMatrix, C64};
use crate::lipschitz::{LipschitzError, State};

/// Writers emit real and imaginary parts below this magnitude as exact 0.
pub const FLUSH_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    State(#[from] LipschitzError),
    #[error("document has order {found}, expected {expected}")]
    Order { expected: usize, found: usize },
    #[error("document declares {rows}×{cols} with {entries} entries")]
    EntryCount { rows: usize, cols: usize, entries: usize },
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("state trace field is {declared}, density trace is {actual}")]
    TraceMismatch { declared: f64, actual: f64 },
    #[error("line {line}: {message}")]
    Text { line: usize, message: String },
}

/// `{shape, order, rows, cols, data: [[re, im], …], trace?}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub shape: AlgebraShape,
    pub order: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
}

fn flush(x: f64) -> f64 {
    if x.abs() < FLUSH_THRESHOLD {
        0.0
    } else {
        x
    }
}

impl MatrixDocument {
    pub fn from_element<const L: usize>(e: &Element<L>) -> Self {
        Self::from_matrix(e.shape(), L, e.matrix(), None)
    }

    /// Block-diagonal density with its `trace` field.
    pub fn from_state(state: &State) -> Self {
        let density = state.density();
        let trace = flush(density.trace().re);
        Self::from_matrix(state.shape(), 1, density.matrix(), Some(trace))
    }

    fn from_matrix(shape: &AlgebraShape, order: usize, m: &CMatrix, trace: Option<f64>) -> Self {
        let data = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| [flush(m[(r, c)].re), flush(m[(r, c)].im)])
            .collect();
        Self { shape: shape.clone(), order, rows: m.nrows(), cols: m.ncols(), data, trace }
    }

    fn to_matrix(&self) -> Result<CMatrix, ExchangeError> {
        if self.data.len() != self.rows * self.cols {
            return Err(ExchangeError::EntryCount { rows: self.rows, cols: self.cols, entries: self.data.len() });
        }
        if let Some(k) = self.data.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(ExchangeError::NonFinite(k));
        }
        Ok(CMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|&[re, im]| C64::new(re, im))))
    }

    /// Rejects documents with the wrong order, wrong size, or entries
    /// outside the block support.
    pub fn to_element<const L: usize>(&self) -> Result<Element<L>, ExchangeError> {
        if self.order != L {
            return Err(ExchangeError::Order { expected: L, found: self.order });
        }
        Ok(Element::<L>::from_matrix(&self.shape, self.to_matrix()?)?)
    }

    pub fn to_state(&self) -> Result<State, ExchangeError> {
        let density = self.to_element::<1>()?;
        if let Some(declared) = self.trace {
            let actual = density.trace().re;
            if (declared - actual).abs() > 1e-10 {
                return Err(ExchangeError::TraceMismatch { declared, actual });
            }
        }
        Ok(State::from_density(&density)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ExchangeError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn element_to_json<const L: usize>(e: &Element<L>) -> String {
    MatrixDocument::from_element(e).to_json()
}

pub fn element_from_json<const L: usize>(text: &str) -> Result<Element<L>, ExchangeError> {
    MatrixDocument::from_json(text)?.to_element()
}

/// Parses either the JSON document `{n, d}` or the lower-triangle text
/// format, chosen by the first non-blank character.
pub fn parse_metric(text: &str) -> Result<FiniteMetricSpace, ExchangeError> {
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(text)?)
    } else {
        parse_metric_text(text)
    }
}

/// Lower triangle including the zero diagonal: line `k` holds `d(k, 0) …
/// d(k, k)`. Blank lines and lines starting with `#` are skipped.
pub fn parse_metric_text(text: &str) -> Result<FiniteMetricSpace, ExchangeError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| ExchangeError::Text { line: lineno + 1, message: format!("{tok:?}: {e}") })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != rows.len() + 1 {
            return Err(ExchangeError::Text {
                line: lineno + 1,
                message: format!("row {} needs {} entries, found {}", rows.len(), rows.len() + 1, values.len()),
            });
        }
        rows.push(values);
    }
    let n = rows.len();
    let mut full = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            full[i][j] = v;
            full[j][i] = v;
        }
    }
    Ok(FiniteMetricSpace::from_rows(&full)?)
}

pub fn metric_to_text(space: &FiniteMetricSpace) -> String {
    let mut out = String::new();
    for i in 0..space.len() {
        let row: Vec<String> = (0..=i).map(|j| format!("{}", space.distance(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
