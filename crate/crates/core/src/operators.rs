//! The operators `(T_n f)(s) = ∫_0^∞ L_n(t/s) Υ_n(f(t)) dt/t` and their uniform error.
//!
//! Since `Υ_n(0) = 0`, the integrand vanishes off `supp f`, so every operator
//! value is an integral over the compact support only; no semi-infinite
//! quadrature is involved. In the log variable the integrand is
//! `ℓ_n(x - ln s) · Υ_n(f(e^x))`, split at the signal breakpoints and at the
//! kernel breakpoints shifted by `ln s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_n, Kernel};
use crate::lattice::{LatticeValue, Shape};
use crate::nonlinearity::UpsilonMap;
use crate::quadrature::{integrate_log, integrate_log_lattice, QuadratureConfig};
use crate::signal::{LatticeFunction, Signal};

pub const DEFAULT_GRID_POINTS: usize = 201;

/// Evaluation points `s_1 < ... < s_M` in `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SGrid {
    points: Vec<f64>,
}

impl SGrid {
    /// `count` points equally spaced in `ln s` over `[lo, hi]`, endpoints included.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid(
                "grid",
                format!("need 0 < s_lo < s_hi, got [{lo}, {hi}]"),
            ));
        }
        if count < 2 {
            return Err(Error::invalid("grid", "need at least two points"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| (a + i as f64 * step).exp()).collect();
        points[0] = lo;
        points[count - 1] = hi;
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("grid", "no points"));
        }
        if points.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("grid", "points must be positive and finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "points must be strictly increasing"));
        }
        Ok(SGrid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(T_n f)(s)`.
pub fn apply_operator(
    k: &dyn Kernel,
    m: &UpsilonMap,
    n: u32,
    f: &Signal,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<LatticeValue> {
    check_n(n)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", format!("need s > 0, got {s}")));
    }
    let ls = s.ln();
    let (x_lo, x_hi) = f.support().log_bounds();
    let mut breaks: Vec<f64> = f.breakpoints().iter().map(|t| t.ln()).collect();
    breaks.extend(k.log_breakpoints().iter().map(|b| b + ls));
    let cfg = cfg.with_min_density(k.panel_density(n));

    match f.direction() {
        None => {
            let v = integrate_log(
                |x| {
                    let w = k.log_density(n, x - ls);
                    if w == 0.0 {
                        return 0.0;
                    }
                    w * m.apply_scalar(n, f.profile(x.exp()))
                },
                x_lo,
                x_hi,
                &breaks,
                &cfg,
            )?;
            LatticeValue::scalar(v)
        }
        Some(u) => {
            let shape = u.shape();
            let v = integrate_log_lattice(
                |x| {
                    let w = k.log_density(n, x - ls);
                    let p = f.profile(x.exp());
                    if w == 0.0 || p == 0.0 {
                        return Ok(LatticeValue::zero(shape));
                    }
                    u.map(|c| w * m.apply_scalar(n, p * c))
                },
                x_lo,
                x_hi,
                &breaks,
                &cfg,
            )?;
            // an empty quadrature reports a scalar zero; keep the signal's shape
            if v.shape() != shape {
                return Ok(LatticeValue::zero(shape));
            }
            Ok(v)
        }
    }
}

/// `T_n f` on every grid point; evaluated concurrently, returned in grid order.
pub fn operator_curve(
    k: &dyn Kernel,
    m: &UpsilonMap,
    n: u32,
    f: &Signal,
    grid: &SGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<LatticeValue>> {
    grid.points()
        .par_iter()
        .map(|&s| apply_operator(k, m, n, f, s, cfg))
        .collect()
}

/// `max_s ‖T_n f(s) - f(s)‖_∞` over the grid.
pub fn uniform_error(
    k: &dyn Kernel,
    m: &UpsilonMap,
    n: u32,
    f: &Signal,
    grid: &SGrid,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let curve = operator_curve(k, m, n, f, grid, cfg)?;
    curve
        .iter()
        .zip(grid.points())
        .try_fold(0.0f64, |acc, (tf, &s)| {
            let err = tf.sub(&f.eval(s)?)?.pnorm(f64::INFINITY)?;
            Ok(acc.max(err))
        })
}

/// `T_n f` as a function of `s`.
#[derive(Debug, Clone, Copy)]
pub struct OperatorImage<'a> {
    pub kernel: &'a dyn Kernel,
    pub map: &'a UpsilonMap,
    pub n: u32,
    pub signal: &'a Signal,
    pub cfg: &'a QuadratureConfig,
}

impl LatticeFunction for OperatorImage<'_> {
    fn eval(&self, s: f64) -> Result<LatticeValue> {
        apply_operator(self.kernel, self.map, self.n, self.signal, s, self.cfg)
    }

    fn shape(&self) -> Shape {
        self.signal.shape()
    }

    fn breakpoints(&self) -> Vec<f64> {
        // T_n f inherits kinks where a kernel breakpoint meets a support endpoint
        let supp = self.signal.support();
        let mut out = self.signal.breakpoints();
        for b in self.kernel.log_breakpoints() {
            out.push(supp.lo() * (-b).exp());
            out.push(supp.hi() * (-b).exp());
        }
        out
    }

    fn panel_density(&self) -> usize {
        self.kernel.panel_density(self.n)
    }
}

/// `T_n f - f`.
#[derive(Debug, Clone, Copy)]
pub struct Residual<'a>(pub OperatorImage<'a>);

impl LatticeFunction for Residual<'_> {
    fn eval(&self, s: f64) -> Result<LatticeValue> {
        self.0.eval(s)?.sub(&self.0.signal.eval(s)?)
    }

    fn shape(&self) -> Shape {
        self.0.shape()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }

    fn panel_density(&self) -> usize {
        self.0.panel_density()
    }
}
