//! Set representations and their calculus: zonotopes, matrix zonotopes,
//! interval matrices, and interval boxes.
//!
//! All types are immutable values; operations are pure and either exact
//! (linear map, Minkowski sum, Cartesian product) or guaranteed
//! over-approximations (interval conversion, set products, order
//! reduction).

mod matzono;
mod zonotope;

pub use matzono::MatrixZonotope;
pub use zonotope::{PointMembership, Zonotope, MEMBERSHIP_TOL};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Error)]
pub enum SetError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch { context: &'static str, expected: usize, got: usize },
    #[error("non-finite value in set data")]
    NonFinite,
    #[error("interval has lower > upper at index {index}")]
    EmptyInterval { index: usize },
    #[error("membership query indeterminate: {0}")]
    Indeterminate(String),
    #[error("{0}")]
    Invalid(String),
}

/// Axis-aligned interval vector, the 1-column specialization of an
/// interval matrix used for state, input, and disturbance domains.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "IntervalBoxWire", into = "IntervalBoxWire")]
pub struct IntervalBox {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct IntervalBoxWire {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<IntervalBoxWire> for IntervalBox {
    type Error = SetError;
    fn try_from(w: IntervalBoxWire) -> Result<Self, SetError> {
        IntervalBox::new(DVector::from_vec(w.lower), DVector::from_vec(w.upper))
    }
}

impl From<IntervalBox> for IntervalBoxWire {
    fn from(b: IntervalBox) -> Self {
        Self { lower: b.lower.iter().copied().collect(), upper: b.upper.iter().copied().collect() }
    }
}

impl IntervalBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self, SetError> {
        if lower.len() != upper.len() {
            return Err(SetError::DimensionMismatch {
                context: "interval box bounds",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(SetError::NonFinite);
        }
        for i in 0..lower.len() {
            if lower[i] > upper[i] {
                return Err(SetError::EmptyInterval { index: i });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_slices(lower: &[f64], upper: &[f64]) -> Result<Self, SetError> {
        Self::new(DVector::from_column_slice(lower), DVector::from_column_slice(upper))
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn center(&self) -> DVector<f64> {
        (&self.lower + &self.upper) * 0.5
    }

    pub fn radius(&self) -> DVector<f64> {
        (&self.upper - &self.lower) * 0.5
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && (0..self.dim()).all(|i| x[i] >= self.lower[i] - tol && x[i] <= self.upper[i] + tol)
    }

    /// Is `other` contained in `self`?
    pub fn contains_box(&self, other: &IntervalBox, tol: f64) -> bool {
        other.dim() == self.dim()
            && (0..self.dim())
                .all(|i| other.lower[i] >= self.lower[i] - tol && other.upper[i] <= self.upper[i] + tol)
    }

    pub fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| crate::rng::uniform(rng, self.lower[i], self.upper[i])),
        )
    }

    /// All `2^n` corner points, in a fixed lexicographic order.
    pub fn corners(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        assert!(n <= 24, "corner enumeration is exponential");
        (0..(1usize << n))
            .map(|mask| {
                DVector::from_iterator(
                    n,
                    (0..n).map(|i| if mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] }),
                )
            })
            .collect()
    }

    /// Zonotope with this box as its exact set: axis-aligned generators for
    /// every coordinate of nonzero width.
    pub fn to_zonotope(&self) -> Zonotope {
        let n = self.dim();
        let radius = self.radius();
        let cols: Vec<usize> = (0..n).filter(|&i| radius[i] != 0.0).collect();
        let mut gens = DMatrix::zeros(n, cols.len());
        for (j, &i) in cols.iter().enumerate() {
            gens[(i, j)] = radius[i];
        }
        Zonotope::new(self.center(), gens).expect("box zonotope is always valid")
    }

    /// Degree-1 polynomial description `{ z : all polys >= 0 }` of the box,
    /// over an ambient space of `nvars` variables: first `z_i - lower_i` for
    /// every coordinate, then `upper_i - z_i`.
    pub fn to_polys(&self, nvars: usize, vars: &[usize]) -> Vec<Polynomial> {
        assert_eq!(vars.len(), self.dim(), "one ambient variable per box coordinate");
        let mut out = Vec::with_capacity(2 * self.dim());
        for (i, &v) in vars.iter().enumerate() {
            let mut p = Polynomial::constant(nvars, -self.lower[i]);
            p.add_term(Monomial::var(nvars, v), 1.0);
            out.push(p);
        }
        for (i, &v) in vars.iter().enumerate() {
            let mut p = Polynomial::constant(nvars, self.upper[i]);
            p.add_term(Monomial::var(nvars, v), -1.0);
            out.push(p);
        }
        out
    }
}

/// Elementwise lower/upper bounds on a matrix; the coarsest outer hull of a
/// matrix zonotope.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "IntervalMatrixWire", into = "IntervalMatrixWire")]
pub struct IntervalMatrix {
    lower: DMatrix<f64>,
    upper: DMatrix<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct IntervalMatrixWire {
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, SetError> {
    let nr = rows.len();
    let nc = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(SetError::Invalid("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl TryFrom<IntervalMatrixWire> for IntervalMatrix {
    type Error = SetError;
    fn try_from(w: IntervalMatrixWire) -> Result<Self, SetError> {
        IntervalMatrix::new(rows_to_matrix(&w.lower)?, rows_to_matrix(&w.upper)?)
    }
}

impl From<IntervalMatrix> for IntervalMatrixWire {
    fn from(m: IntervalMatrix) -> Self {
        Self { lower: matrix_to_rows(&m.lower), upper: matrix_to_rows(&m.upper) }
    }
}

impl IntervalMatrix {
    pub fn new(lower: DMatrix<f64>, upper: DMatrix<f64>) -> Result<Self, SetError> {
        if lower.shape() != upper.shape() {
            return Err(SetError::DimensionMismatch {
                context: "interval matrix bounds",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(SetError::NonFinite);
        }
        for (i, (l, u)) in lower.iter().zip(upper.iter()).enumerate() {
            if l > u {
                return Err(SetError::EmptyInterval { index: i });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DMatrix<f64> {
        &self.upper
    }

    pub fn nrows(&self) -> usize {
        self.lower.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.lower.ncols()
    }

    pub fn center(&self) -> DMatrix<f64> {
        (&self.lower + &self.upper) * 0.5
    }

    pub fn width(&self) -> DMatrix<f64> {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &DMatrix<f64>, tol: f64) -> bool {
        x.shape() == self.lower.shape()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }

    /// Entry interval `[lower_ij, upper_ij]`.
    pub fn entry(&self, i: usize, j: usize) -> (f64, f64) {
        (self.lower[(i, j)], self.upper[(i, j)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_polys_match_table_layout() {
        // state box x0 in [-4,2], x1 in [0,5]
        let b = IntervalBox::from_slices(&[-4.0, 0.0], &[2.0, 5.0]).unwrap();
        let polys = b.to_polys(2, &[0, 1]);
        let shown: Vec<String> = polys.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown[0], "4*1 + 1*x0");
        assert_eq!(shown[1], "1*x1");
        assert_eq!(shown[2], "2*1 + -1*x0");
        assert_eq!(shown[3], "5*1 + -1*x1");
    }

    #[test]
    fn degenerate_point_box_polys() {
        let b = IntervalBox::from_slices(&[0.0], &[0.0]).unwrap();
        let polys = b.to_polys(1, &[0]);
        assert_eq!(polys[0].to_string(), "1*x0");
        assert_eq!(polys[1].to_string(), "-1*x0");
    }

    #[test]
    fn box_polys_classify_membership() {
        let b = IntervalBox::from_slices(&[-1.0, 2.0], &[3.0, 4.0]).unwrap();
        let polys = b.to_polys(2, &[0, 1]);
        let mut rng = crate::rng::stream(11, 0);
        let wide = IntervalBox::from_slices(&[-3.0, 0.0], &[5.0, 6.0]).unwrap();
        for _ in 0..1000 {
            let x = wide.sample(&mut rng);
            let by_polys = polys.iter().all(|p| p.eval(x.as_slice()) >= 0.0);
            let by_interval = b.contains(&x, 0.0);
            assert_eq!(by_polys, by_interval);
        }
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(IntervalBox::from_slices(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn interval_box_json_round_trip() {
        let b = IntervalBox::from_slices(&[-4.0, 0.0], &[2.0, 5.0]).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"lower":[-4.0,0.0],"upper":[2.0,5.0]}"#);
        let c: IntervalBox = serde_json::from_str(&s).unwrap();
        assert_eq!(b, c);
    }
}
