//! Kernel families `n ↦ L_n` on `(0, ∞)`.
//!
//! Kernels are described through their log density `ℓ_n(x) = L_n(e^x)`, so
//! that Haar integrals `∫ L_n(t) dt/t` become Lebesgue integrals of `ℓ_n`.
//! Semi-infinite masses are assembled as a quadrature over `[-R, R]` plus the
//! exact mass beyond `±R`, which each kernel supplies in closed form.

mod diagnostics;
mod special;
mod synthetic;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_log, QuadratureConfig};

pub use diagnostics::{mpc_tail_limit_check, window_lq_diagnostic, LqDiagnostic, LqMeasure};
pub use special::{cauchy_power_tail, double_factorial, erf, erfc, poisson_cauchy_constant};
pub use synthetic::{LogUniformKernel, ScaledKernel};

/// Whether an analytic tail value is the exact tail mass or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailTag {
    Exact,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTail {
    pub value: f64,
    pub tag: TailTag,
    /// False when the bound is only asserted for `n` beyond an unspecified threshold
    /// and this `n` lies below the threshold used here.
    pub in_regime: bool,
}

/// Tail mass `∫_{(0,∞) \ [1/δ, δ]} L_n dt/t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMass {
    pub numeric: f64,
    pub analytic: Option<AnalyticTail>,
}

impl TailMass {
    /// Checks the numeric tail against the analytic value: agreement within
    /// `exact_tol` for exact values, `numeric <= bound·(1 + 1e-8)` for bounds.
    /// Bounds outside their regime and kernels without analytic tails pass vacuously.
    pub fn consistent(&self, exact_tol: f64) -> bool {
        match self.analytic {
            None => true,
            Some(AnalyticTail {
                value,
                tag: TailTag::Exact,
                ..
            }) => (self.numeric - value).abs() <= exact_tol,
            Some(AnalyticTail {
                in_regime: false, ..
            }) => true,
            Some(AnalyticTail { value, .. }) => self.numeric <= value * (1.0 + 1e-8),
        }
    }
}

/// A family of non-negative densities `n ↦ L_n` on `(0, ∞)`.
pub trait Kernel: Send + Sync + fmt::Debug {
    fn label(&self) -> String;

    /// `L_n(e^x)`.
    fn log_density(&self, n: u32, x: f64) -> f64;

    /// Log coordinates where the density jumps.
    fn log_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Panels per unit of `ln t` needed to resolve `ℓ_n`; the kernels concentrate
    /// on a log scale of order `1/n`.
    fn panel_density(&self, n: u32) -> usize {
        4 * n as usize
    }

    /// Exact `∫_x^∞ ℓ_n(y) dy`.
    fn mass_above(&self, n: u32, x: f64) -> f64;

    /// Exact `∫_{-∞}^x ℓ_n(y) dy`.
    fn mass_below(&self, n: u32, x: f64) -> f64;

    /// Total mass when known in closed form.
    fn nominal_mass(&self) -> Option<f64> {
        None
    }

    fn analytic_tail(&self, _n: u32, _delta: f64) -> Option<AnalyticTail> {
        None
    }

    /// A constant `K` with `analytic_tail(n, δ) <= K/n` for large `n`.
    fn tail_rate_constant(&self, _delta: f64) -> Option<f64> {
        None
    }

    /// Closed form of `∫_a^b L_n(t/s) dt/t`, if one is available.
    fn closed_window(&self, _n: u32, _a: f64, _b: f64, _s: f64) -> Option<f64> {
        None
    }

    /// `sup_t L_n(t)`.
    fn sup_value(&self, n: u32) -> f64;
}

/// Exponent `p >= 2` of the Mellin–Poisson–Cauchy kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PoissonOrder(u32);

impl PoissonOrder {
    pub fn new(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid(
                "p",
                format!("Poisson-Cauchy order must be at least 2, got {p}"),
            ));
        }
        Ok(PoissonOrder(p))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for PoissonOrder {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        PoissonOrder::new(p)
    }
}

impl From<PoissonOrder> for u32 {
    fn from(p: PoissonOrder) -> u32 {
        p.0
    }
}

/// The three built-in kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `L_n(t) = n t^n` on `(0, 1)`, zero for `t >= 1`.
    Moment,
    /// Mellin–Gauss–Weierstrass, `L_n(t) = n/(2√π) exp(-(n²/4) ln² t)`.
    GaussWeierstrass,
    /// Mellin–Poisson–Cauchy, `L_n(t) = C_p n / (1 + n² ln² t)^p`.
    PoissonCauchy(PoissonOrder),
}

impl KernelFamily {
    pub fn poisson_cauchy(p: u32) -> Result<Self> {
        Ok(KernelFamily::PoissonCauchy(PoissonOrder::new(p)?))
    }

    /// Threshold `⌈4 / ln δ⌉` above which the Gauss–Weierstrass tail bound is enforced.
    pub fn gauss_bound_threshold(delta: f64) -> u32 {
        (4.0 / delta.ln()).ceil().max(1.0) as u32
    }
}

impl Kernel for KernelFamily {
    fn label(&self) -> String {
        match self {
            KernelFamily::Moment => "moment".into(),
            KernelFamily::GaussWeierstrass => "mgw".into(),
            KernelFamily::PoissonCauchy(p) => format!("mpc(p={})", p.get()),
        }
    }

    fn log_density(&self, n: u32, x: f64) -> f64 {
        let nf = n as f64;
        match self {
            KernelFamily::Moment => {
                if x < 0.0 {
                    nf * (nf * x).exp()
                } else {
                    0.0
                }
            }
            KernelFamily::GaussWeierstrass => {
                nf / (2.0 * PI.sqrt()) * (-0.25 * nf * nf * x * x).exp()
            }
            KernelFamily::PoissonCauchy(p) => {
                let y = nf * x;
                poisson_cauchy_constant(p.get()) * nf / (1.0 + y * y).powi(p.get() as i32)
            }
        }
    }

    fn log_breakpoints(&self) -> Vec<f64> {
        match self {
            KernelFamily::Moment => vec![0.0],
            _ => Vec::new(),
        }
    }

    fn mass_above(&self, n: u32, x: f64) -> f64 {
        let nf = n as f64;
        match self {
            KernelFamily::Moment => {
                if x >= 0.0 {
                    0.0
                } else {
                    -(nf * x).exp_m1()
                }
            }
            KernelFamily::GaussWeierstrass => 0.5 * erfc(0.5 * nf * x),
            KernelFamily::PoissonCauchy(p) => {
                let c = poisson_cauchy_constant(p.get());
                let tail = c * cauchy_power_tail(p.get(), nf * x.abs());
                if x >= 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
        }
    }

    fn mass_below(&self, n: u32, x: f64) -> f64 {
        match self {
            KernelFamily::Moment => (n as f64 * x.min(0.0)).exp(),
            // both remaining families are even in x
            _ => self.mass_above(n, -x),
        }
    }

    fn nominal_mass(&self) -> Option<f64> {
        Some(1.0)
    }

    fn analytic_tail(&self, n: u32, delta: f64) -> Option<AnalyticTail> {
        let nf = n as f64;
        let ld = delta.ln();
        Some(match self {
            KernelFamily::Moment => AnalyticTail {
                value: (-nf * ld).exp(),
                tag: TailTag::Exact,
                in_regime: true,
            },
            KernelFamily::GaussWeierstrass => AnalyticTail {
                value: 2.0 / PI.sqrt() * (-0.5 * nf * ld).exp(),
                tag: TailTag::Bound,
                in_regime: n >= KernelFamily::gauss_bound_threshold(delta),
            },
            KernelFamily::PoissonCauchy(p) => AnalyticTail {
                // π - 2 arctan(y) = 2 arctan(1/y) for y > 0
                value: poisson_cauchy_constant(p.get()) * 2.0 * (1.0 / (nf * ld)).atan(),
                tag: TailTag::Bound,
                in_regime: true,
            },
        })
    }

    fn tail_rate_constant(&self, delta: f64) -> Option<f64> {
        match self {
            KernelFamily::Moment | KernelFamily::GaussWeierstrass => Some(1.0),
            KernelFamily::PoissonCauchy(p) => {
                Some(2.0 * poisson_cauchy_constant(p.get()) / delta.ln())
            }
        }
    }

    fn closed_window(&self, n: u32, a: f64, b: f64, s: f64) -> Option<f64> {
        let ni = n as i32;
        match self {
            KernelFamily::Moment => Some(if s >= b {
                (b / s).powi(ni) - (a / s).powi(ni)
            } else if s >= a {
                1.0 - (a / s).powi(ni)
            } else {
                0.0
            }),
            KernelFamily::GaussWeierstrass => {
                let half = 0.5 * n as f64;
                let lo = half * (a / s).ln();
                let hi = half * (b / s).ln();
                Some(if lo >= 0.0 {
                    0.5 * (erfc(lo) - erfc(hi))
                } else if hi <= 0.0 {
                    0.5 * (erfc(-hi) - erfc(-lo))
                } else {
                    0.5 * (erf(hi) - erf(lo))
                })
            }
            KernelFamily::PoissonCauchy(_) => None,
        }
    }

    fn sup_value(&self, n: u32) -> f64 {
        let nf = n as f64;
        match self {
            KernelFamily::Moment => nf,
            KernelFamily::GaussWeierstrass => nf / (2.0 * PI.sqrt()),
            KernelFamily::PoissonCauchy(p) => poisson_cauchy_constant(p.get()) * nf,
        }
    }
}

pub(crate) fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "kernel index must be at least 1"));
    }
    Ok(())
}

/// `L_n(t)`.
pub fn kernel_eval(k: &dyn Kernel, n: u32, t: f64) -> Result<f64> {
    check_n(n)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", format!("need t > 0, got {t}")));
    }
    Ok(k.log_density(n, t.ln()))
}

fn kernel_cfg(k: &dyn Kernel, n: u32, cfg: &QuadratureConfig) -> QuadratureConfig {
    cfg.with_min_density(k.panel_density(n))
}

/// Numeric `∫_{x_lo}^{x_hi} ℓ_n(x) dx` for a finite log interval.
pub fn log_mass_between(
    k: &dyn Kernel,
    n: u32,
    x_lo: f64,
    x_hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_n(n)?;
    integrate_log(
        |x| k.log_density(n, x),
        x_lo,
        x_hi,
        &k.log_breakpoints(),
        &kernel_cfg(k, n, cfg),
    )
}

fn mass_below_numeric(k: &dyn Kernel, n: u32, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let r = cfg.max_log_halfwidth;
    if x <= -r {
        Ok(k.mass_below(n, x))
    } else {
        Ok(k.mass_below(n, -r) + log_mass_between(k, n, -r, x, cfg)?)
    }
}

fn mass_above_numeric(k: &dyn Kernel, n: u32, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let r = cfg.max_log_halfwidth;
    if x >= r {
        Ok(k.mass_above(n, x))
    } else {
        Ok(log_mass_between(k, n, x, r, cfg)? + k.mass_above(n, r))
    }
}

/// `∫_0^∞ L_n(t) dt/t`: quadrature over `[e^-R, e^R]` plus the exact mass beyond.
pub fn normalization(k: &dyn Kernel, n: u32, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let r = cfg.max_log_halfwidth;
    Ok(k.mass_below(n, -r) + log_mass_between(k, n, -r, r, cfg)? + k.mass_above(n, r))
}

/// Haar mass of `(0, lo] ∪ [hi, ∞)`.
pub fn mass_outside(
    k: &dyn Kernel,
    n: u32,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::invalid(
            "window",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    cfg.validate()?;
    Ok(mass_below_numeric(k, n, lo.ln(), cfg)? + mass_above_numeric(k, n, hi.ln(), cfg)?)
}

/// Tail mass outside `[1/δ, δ]`, numerically and, where available, analytically.
pub fn tail_mass(k: &dyn Kernel, n: u32, delta: f64, cfg: &QuadratureConfig) -> Result<TailMass> {
    check_n(n)?;
    if !(delta > 1.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", format!("need δ > 1, got {delta}")));
    }
    Ok(TailMass {
        numeric: mass_outside(k, n, 1.0 / delta, delta, cfg)?,
        analytic: k.analytic_tail(n, delta),
    })
}

fn check_window(a: f64, b: f64, s: f64) -> Result<()> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::invalid(
            "window",
            format!("need 0 < a < b, got [{a}, {b}]"),
        ));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", format!("need s > 0, got {s}")));
    }
    Ok(())
}

/// `∫_a^b L_n(t/s) dt/t` by Haar quadrature, ignoring closed forms.
pub fn window_integral_numeric(
    k: &dyn Kernel,
    n: u32,
    a: f64,
    b: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_n(n)?;
    check_window(a, b, s)?;
    let ls = s.ln();
    let breaks: Vec<f64> = k.log_breakpoints().iter().map(|bp| bp + ls).collect();
    integrate_log(
        |x| k.log_density(n, x - ls),
        a.ln(),
        b.ln(),
        &breaks,
        &kernel_cfg(k, n, cfg),
    )
}

/// `∫_a^b L_n(t/s) dt/t`, in closed form when the kernel has one.
pub fn window_integral(
    k: &dyn Kernel,
    n: u32,
    a: f64,
    b: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_n(n)?;
    check_window(a, b, s)?;
    match k.closed_window(n, a, b, s) {
        Some(v) => Ok(v),
        None => window_integral_numeric(k, n, a, b, s, cfg),
    }
}
