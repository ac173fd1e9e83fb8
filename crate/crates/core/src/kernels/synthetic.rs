//! Kernels built for counterexamples: a rescaled kernel (mass `c ≠ 1`) and a
//! log-uniform kernel that never concentrates.

use super::{AnalyticTail, Kernel};
use crate::error::{Error, Result};

/// `c · L_n` for an inner kernel `L_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledKernel<K> {
    inner: K,
    factor: f64,
}

impl<K: Kernel> ScaledKernel<K> {
    pub fn new(inner: K, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid("kernel scale", "must be positive and finite"));
        }
        Ok(ScaledKernel { inner, factor })
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl<K: Kernel> Kernel for ScaledKernel<K> {
    fn label(&self) -> String {
        format!("{}x{}", self.factor, self.inner.label())
    }

    fn log_density(&self, n: u32, x: f64) -> f64 {
        self.factor * self.inner.log_density(n, x)
    }

    fn log_breakpoints(&self) -> Vec<f64> {
        self.inner.log_breakpoints()
    }

    fn panel_density(&self, n: u32) -> usize {
        self.inner.panel_density(n)
    }

    fn mass_above(&self, n: u32, x: f64) -> f64 {
        self.factor * self.inner.mass_above(n, x)
    }

    fn mass_below(&self, n: u32, x: f64) -> f64 {
        self.factor * self.inner.mass_below(n, x)
    }

    fn nominal_mass(&self) -> Option<f64> {
        self.inner.nominal_mass().map(|m| self.factor * m)
    }

    fn analytic_tail(&self, n: u32, delta: f64) -> Option<AnalyticTail> {
        self.inner.analytic_tail(n, delta).map(|t| AnalyticTail {
            value: self.factor * t.value,
            ..t
        })
    }

    fn tail_rate_constant(&self, delta: f64) -> Option<f64> {
        self.inner.tail_rate_constant(delta).map(|k| self.factor * k)
    }

    fn closed_window(&self, n: u32, a: f64, b: f64, s: f64) -> Option<f64> {
        self.inner.closed_window(n, a, b, s).map(|v| self.factor * v)
    }

    fn sup_value(&self, n: u32) -> f64 {
        self.factor * self.inner.sup_value(n)
    }
}

/// Uniform density on `[e^-w, e^w]` in the Haar measure, identical for every `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogUniformKernel {
    half_width: f64,
}

impl LogUniformKernel {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid("half width", "must be positive and finite"));
        }
        Ok(LogUniformKernel { half_width })
    }

    fn height(&self) -> f64 {
        0.5 / self.half_width
    }
}

impl Kernel for LogUniformKernel {
    fn label(&self) -> String {
        format!("log-uniform(w={})", self.half_width)
    }

    fn log_density(&self, _n: u32, x: f64) -> f64 {
        if x.abs() <= self.half_width {
            self.height()
        } else {
            0.0
        }
    }

    fn log_breakpoints(&self) -> Vec<f64> {
        vec![-self.half_width, self.half_width]
    }

    fn panel_density(&self, _n: u32) -> usize {
        1
    }

    fn mass_above(&self, _n: u32, x: f64) -> f64 {
        let w = self.half_width;
        (w - x.clamp(-w, w)) * self.height()
    }

    fn mass_below(&self, _n: u32, x: f64) -> f64 {
        let w = self.half_width;
        (x.clamp(-w, w) + w) * self.height()
    }

    fn nominal_mass(&self) -> Option<f64> {
        Some(1.0)
    }

    fn analytic_tail(&self, _n: u32, delta: f64) -> Option<AnalyticTail> {
        Some(AnalyticTail {
            value: 2.0 * self.mass_above(1, delta.ln()),
            tag: super::TailTag::Exact,
            in_regime: true,
        })
    }

    fn sup_value(&self, _n: u32) -> f64 {
        self.height()
    }
}
