//! Basis expansions and design-matrix construction.
//!
//! Every basis is laid out bias-first: column 0 is the constant function, so
//! weight 0 is always the bias. This is also the serialization order of
//! model weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Basis functions mapping a raw input point to a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BasisSpec {
    /// `d` monomials `1, x, …, x^(d-1)` of a scalar input.
    Polynomial(usize),
    /// `(1, x_1, …, x_n)` for an `n`-attribute input.
    Linear(usize),
    /// `(1, x, y)`.
    Linear2D,
    /// `(1, x1, x2, x1², x1·x2, x2²)`.
    QuadraticLift2D,
}

impl BasisSpec {
    /// Number of raw coordinates the basis consumes.
    pub fn raw_dim(&self) -> usize {
        match *self {
            BasisSpec::Polynomial(_) => 1,
            BasisSpec::Linear(n) => n,
            BasisSpec::Linear2D | BasisSpec::QuadraticLift2D => 2,
        }
    }

    /// Number of columns of the design matrix (weights of a model).
    pub fn n_features(&self) -> usize {
        match *self {
            BasisSpec::Polynomial(d) => d,
            BasisSpec::Linear(n) => n + 1,
            BasisSpec::Linear2D => 3,
            BasisSpec::QuadraticLift2D => 6,
        }
    }

    /// Whether the basis is an affine function of two raw coordinates, so
    /// that its level sets are straight lines in the plane.
    pub fn is_planar_linear(&self) -> bool {
        matches!(self, BasisSpec::Linear2D | BasisSpec::Linear(2))
    }

    /// Evaluates the basis at one raw point.
    pub fn expand(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.raw_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.raw_dim(),
                found: point.len(),
            });
        }
        let mut out = Vec::with_capacity(self.n_features());
        self.expand_into(point, &mut out);
        Ok(out)
    }

    fn expand_into(&self, p: &[f64], out: &mut Vec<f64>) {
        match *self {
            BasisSpec::Polynomial(d) => {
                let mut v = 1.0;
                for _ in 0..d {
                    out.push(v);
                    v *= p[0];
                }
            }
            BasisSpec::Linear(_) | BasisSpec::Linear2D => {
                out.push(1.0);
                out.extend_from_slice(p);
            }
            BasisSpec::QuadraticLift2D => {
                let (x1, x2) = (p[0], p[1]);
                out.extend_from_slice(&[1.0, x1, x2, x1 * x1, x1 * x2, x2 * x2]);
            }
        }
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSpec::Polynomial(d) => write!(f, "poly:{d}"),
            BasisSpec::Linear(n) => write!(f, "linear:{n}"),
            BasisSpec::Linear2D => f.write_str("linear2d"),
            BasisSpec::QuadraticLift2D => f.write_str("quad2d"),
        }
    }
}

impl FromStr for BasisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownBasis(s.to_string());
        match s {
            "linear2d" => Ok(BasisSpec::Linear2D),
            "quad2d" => Ok(BasisSpec::QuadraticLift2D),
            _ => {
                let (kind, n) = s.split_once(':').ok_or_else(unknown)?;
                let n: usize = n.parse().map_err(|_| unknown())?;
                match kind {
                    "poly" if n >= 1 => Ok(BasisSpec::Polynomial(n)),
                    "poly" => Err(Error::DegreeZero),
                    "linear" if n >= 1 => Ok(BasisSpec::Linear(n)),
                    _ => Err(unknown()),
                }
            }
        }
    }
}

impl TryFrom<String> for BasisSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BasisSpec> for String {
    fn from(b: BasisSpec) -> String {
        b.to_string()
    }
}

/// N×M matrix of basis evaluations, one row per data point.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub matrix: DenseMatrix,
    pub basis: BasisSpec,
    pub raw_dim: usize,
}

impl DesignMatrix {
    /// Expands every row of `raw` (N × raw_dim) through `basis`.
    pub fn build(basis: BasisSpec, raw: &DenseMatrix) -> Result<Self> {
        if let BasisSpec::Polynomial(0) = basis {
            return Err(Error::DegreeZero);
        }
        if raw.cols() != basis.raw_dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.raw_dim(),
                found: raw.cols(),
            });
        }
        let m = basis.n_features();
        if let BasisSpec::Polynomial(d) = basis {
            if raw.rows() < d {
                log::warn!(
                    "polynomial basis with {d} functions on only {} points; normal equations will be singular",
                    raw.rows()
                );
            }
        }
        let mut data = Vec::with_capacity(raw.rows() * m);
        for r in raw.row_iter() {
            basis.expand_into(r, &mut data);
        }
        Ok(DesignMatrix {
            matrix: DenseMatrix::new(raw.rows(), m, data)?,
            basis,
            raw_dim: basis.raw_dim(),
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Vandermonde design matrix: entry (i, j) = xs[i]^j for j < degree.
pub fn polynomial_design(xs: &[f64], degree: usize) -> Result<DesignMatrix> {
    if degree < 1 {
        return Err(Error::DegreeZero);
    }
    let raw = DenseMatrix::new(xs.len(), 1, xs.to_vec())?;
    DesignMatrix::build(BasisSpec::Polynomial(degree), &raw)
}

/// Rows `(1, x_i, y_i)`.
pub fn linear2d_design(points: &[(f64, f64)]) -> Result<DesignMatrix> {
    DesignMatrix::build(BasisSpec::Linear2D, &pairs_to_matrix(points)?)
}

/// Rows `(1, x1, x2, x1², x1·x2, x2²)`.
pub fn quadratic_lift(points: &[(f64, f64)]) -> Result<DesignMatrix> {
    DesignMatrix::build(BasisSpec::QuadraticLift2D, &pairs_to_matrix(points)?)
}

/// Rows `(1, x_i1, …, x_in)` for an N×n raw matrix.
pub fn linear_design(raw: &DenseMatrix) -> Result<DesignMatrix> {
    DesignMatrix::build(BasisSpec::Linear(raw.cols()), raw)
}

fn pairs_to_matrix(points: &[(f64, f64)]) -> Result<DenseMatrix> {
    let data = points.iter().flat_map(|&(x, y)| [x, y]).collect();
    DenseMatrix::new(points.len(), 2, data)
}
