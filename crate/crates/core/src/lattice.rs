//! Concrete vector-lattice values.
//!
//! Two models of the value lattice are provided: the real line (`Scalar`) and
//! a function lattice on `[0, 1]` represented by samples on the uniform grid
//! `k / (N - 1)`, `k = 0..N` (`Grid`). Order, suprema and infima are
//! coordinatewise, so `|x| = x ∨ (-x)` is the coordinatewise absolute value.
//!
//! A scalar combined with a grid is promoted to the constant function. Two
//! grids of different sizes never combine.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid size used when none is specified.
pub const DEFAULT_GRID_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Scalar,
    Grid(usize),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => write!(f, "scalar"),
            Shape::Grid(n) => write!(f, "grid[{n}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Scalar(f64),
    Grid(Vec<f64>),
}

/// An element of the value lattice. All coordinates are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub struct LatticeValue(Repr);

impl TryFrom<Repr> for LatticeValue {
    type Error = Error;

    fn try_from(repr: Repr) -> Result<Self> {
        match repr {
            Repr::Scalar(x) => LatticeValue::scalar(x),
            Repr::Grid(v) => LatticeValue::grid(v),
        }
    }
}

impl From<LatticeValue> for Repr {
    fn from(v: LatticeValue) -> Repr {
        v.0
    }
}

impl LatticeValue {
    pub fn scalar(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "scalar lattice value",
            });
        }
        Ok(LatticeValue(Repr::Scalar(value)))
    }

    pub fn grid(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(
                "grid",
                format!("needs at least 2 samples, got {}", samples.len()),
            ));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "grid lattice value",
            });
        }
        Ok(LatticeValue(Repr::Grid(samples)))
    }

    /// Samples `f` at the grid points `k / (size - 1)`.
    pub fn sample(size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::invalid("grid size", "must be at least 2"));
        }
        let h = 1.0 / (size - 1) as f64;
        LatticeValue::grid((0..size).map(|k| f(k as f64 * h)).collect())
    }

    pub fn zero(shape: Shape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn constant(shape: Shape, c: f64) -> Self {
        match shape {
            Shape::Scalar => LatticeValue(Repr::Scalar(c)),
            Shape::Grid(n) => LatticeValue(Repr::Grid(vec![c; n])),
        }
    }

    /// Builds a value of the given shape from raw coordinates, checking finiteness.
    pub(crate) fn from_coords(shape: Shape, coords: Vec<f64>) -> Result<Self> {
        match shape {
            Shape::Scalar => {
                debug_assert_eq!(coords.len(), 1);
                LatticeValue::scalar(coords[0])
            }
            Shape::Grid(_) => LatticeValue::grid(coords),
        }
    }

    pub fn shape(&self) -> Shape {
        match &self.0 {
            Repr::Scalar(_) => Shape::Scalar,
            Repr::Grid(v) => Shape::Grid(v.len()),
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self.0 {
            Repr::Scalar(x) => Some(x),
            Repr::Grid(_) => None,
        }
    }

    /// Coordinates; a scalar has exactly one.
    pub fn coords(&self) -> &[f64] {
        match &self.0 {
            Repr::Scalar(x) => std::slice::from_ref(x),
            Repr::Grid(v) => v,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&x| x == 0.0)
    }

    /// Coordinatewise map. Fails if `f` produces a non-finite coordinate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        match &self.0 {
            Repr::Scalar(x) => LatticeValue::scalar(f(*x)),
            Repr::Grid(v) => LatticeValue::grid(v.iter().map(|&x| f(x)).collect()),
        }
    }

    fn map_total(&self, f: impl Fn(f64) -> f64) -> Self {
        match &self.0 {
            Repr::Scalar(x) => LatticeValue(Repr::Scalar(f(*x))),
            Repr::Grid(v) => LatticeValue(Repr::Grid(v.iter().map(|&x| f(x)).collect())),
        }
    }

    fn common_shape(&self, other: &Self) -> Result<Shape> {
        match (self.shape(), other.shape()) {
            (Shape::Scalar, s) | (s, Shape::Scalar) => Ok(s),
            (Shape::Grid(a), Shape::Grid(b)) if a == b => Ok(Shape::Grid(a)),
            (left, right) => Err(Error::ShapeMismatch { left, right }),
        }
    }

    /// Coordinatewise combination with scalar promotion.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let shape = self.common_shape(other)?;
        match shape {
            Shape::Scalar => LatticeValue::scalar(f(self.coords()[0], other.coords()[0])),
            Shape::Grid(n) => {
                let a = self.coords();
                let b = other.coords();
                let at = |c: &[f64], k: usize| if c.len() == 1 { c[0] } else { c[k] };
                LatticeValue::grid((0..n).map(|k| f(at(a, k), at(b, k))).collect())
            }
        }
    }

    fn all_pairs(&self, other: &Self, pred: impl Fn(f64, f64) -> bool) -> Result<bool> {
        let shape = self.common_shape(other)?;
        let a = self.coords();
        let b = other.coords();
        let n = match shape {
            Shape::Scalar => 1,
            Shape::Grid(n) => n,
        };
        let at = |c: &[f64], k: usize| if c.len() == 1 { c[0] } else { c[k] };
        Ok((0..n).all(|k| pred(at(a, k), at(b, k))))
    }

    pub fn abs(&self) -> Self {
        self.map_total(f64::abs)
    }

    pub fn neg(&self) -> Self {
        self.map_total(|x| -x)
    }

    pub fn sup(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, f64::max)
    }

    pub fn inf(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, f64::min)
    }

    /// Partial order: every coordinate of `self` is at most the matching coordinate of `other`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.all_pairs(other, |x, y| x <= y)
    }

    /// `self <= other + tol` coordinatewise.
    pub fn leq_within(&self, other: &Self, tol: f64) -> Result<bool> {
        self.all_pairs(other, |x, y| x <= y + tol)
    }

    /// `a·x + b·y`.
    pub fn linear(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite {
                context: "linear combination coefficient",
            });
        }
        x.zip_with(y, |u, v| a * u + b * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear(1.0, self, -1.0, other)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite {
                context: "scale factor",
            });
        }
        self.map(|x| c * x)
    }

    /// Norm of the concrete model: `|x|` for scalars, the trapezoidal `L^p([0,1])`
    /// norm for grids (`p = ∞` gives the maximum modulus).
    pub fn pnorm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid("p", format!("need p >= 1, got {p}")));
        }
        match &self.0 {
            Repr::Scalar(x) => Ok(x.abs()),
            Repr::Grid(v) => {
                if p.is_infinite() {
                    return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
                }
                let h = 1.0 / (v.len() - 1) as f64;
                let last = v.len() - 1;
                let sum: f64 = v
                    .iter()
                    .enumerate()
                    .map(|(k, x)| {
                        let w = if k == 0 || k == last { 0.5 } else { 1.0 };
                        w * x.abs().powf(p)
                    })
                    .sum();
                Ok((h * sum).powf(1.0 / p))
            }
        }
    }

    /// Largest coordinate modulus.
    pub fn max_abs(&self) -> f64 {
        self.coords().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// A strictly positive lattice element used to dominate errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderUnit(LatticeValue);

impl OrderUnit {
    pub fn new(unit: LatticeValue) -> Result<Self> {
        if unit.coords().iter().any(|&x| x <= 0.0) {
            return Err(Error::invalid(
                "order unit",
                "every coordinate must be strictly positive",
            ));
        }
        Ok(OrderUnit(unit))
    }

    /// The constant function 1 (scalar 1, promoted against grids).
    pub fn one() -> Self {
        OrderUnit(LatticeValue::constant(Shape::Scalar, 1.0))
    }

    pub fn value(&self) -> &LatticeValue {
        &self.0
    }

    /// Whether `x <= sigma·unit + tol` coordinatewise.
    pub fn dominates(&self, sigma: f64, x: &LatticeValue, tol: f64) -> Result<bool> {
        let bound = self.0.scale(sigma)?;
        x.leq_within(&bound, tol)
    }
}
