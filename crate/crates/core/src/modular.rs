//! Power-type Orlicz modulars `ρ(f) = ∫ φ(|f(t)|) dt/t` with `φ(u) = |u|^q`.
//!
//! For lattice-valued functions the modular is taken coordinatewise; reports
//! collapse it to a real number by the largest coordinate. The residual
//! `T_n f - f` is not compactly supported, so tables integrate it over a finite
//! window and attach a bound for the part outside.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{mass_outside, normalization, Kernel};
use crate::lattice::LatticeValue;
use crate::nonlinearity::UpsilonMap;
use crate::operators::{OperatorImage, Residual};
use crate::quadrature::{integrate_log_lattice, LogInterval, QuadratureConfig};
use crate::signal::{LatticeFunction, Signal};

/// Log half-margin `W` added on each side of `supp f` by [`default_window`].
pub const DEFAULT_WINDOW_MARGIN: f64 = 3.0;

/// Scales `a` scanned by [`modular_scale_scan`].
pub const DEFAULT_SCALES: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

/// Slack for the modular property checks, relative to `max(1, rhs)`.
pub const PROPERTY_TOL: f64 = 1e-9;

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::invalid("q", format!("need finite q >= 1, got {q}")));
    }
    Ok(())
}

fn check_scale(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", format!("need finite a > 0, got {a}")));
    }
    Ok(())
}

/// `φ(u) = |u|^q` coordinatewise.
pub fn phi_pow(u: &LatticeValue, q: f64) -> Result<LatticeValue> {
    check_q(q)?;
    u.map(|x| x.abs().powf(q))
}

/// An extended non-negative modular value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModularValue {
    Finite(LatticeValue),
    Infinite,
}

impl ModularValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ModularValue::Finite(_))
    }

    /// Largest coordinate, or `+∞`.
    pub fn total(&self) -> f64 {
        match self {
            ModularValue::Finite(v) => v.max_abs(),
            ModularValue::Infinite => f64::INFINITY,
        }
    }
}

/// `ρ(a f)` restricted to `window`.
pub fn modular_of(
    f: &dyn LatticeFunction,
    window: &LogInterval,
    q: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<ModularValue> {
    check_q(q)?;
    check_scale(a)?;
    let (x_lo, x_hi) = window.log_bounds();
    let breaks: Vec<f64> = f.breakpoints().iter().filter(|t| **t > 0.0).map(|t| t.ln()).collect();
    let cfg = cfg.with_min_density(f.panel_density());
    let shape = f.shape();
    let result = integrate_log_lattice(
        |x| f.eval(x.exp())?.map(|c| (a * c).abs().powf(q)),
        x_lo,
        x_hi,
        &breaks,
        &cfg,
    );
    match result {
        // an empty window reports a scalar zero; keep the function's shape
        Ok(v) if v.shape() != shape => Ok(ModularValue::Finite(LatticeValue::zero(shape))),
        Ok(v) => Ok(ModularValue::Finite(v)),
        // |a f|^q overflowed, or its integral did
        Err(Error::NonFinite { .. }) | Err(Error::NonFiniteIntegrand { .. }) => {
            Ok(ModularValue::Infinite)
        }
        Err(e) => Err(e),
    }
}

/// `ρ(a f)` over the support of a signal. Zero crossings of the profile are
/// made breakpoints first, so that `|f|^q` is smooth on every panel.
pub fn modular_of_signal(f: &Signal, q: f64, a: f64, cfg: &QuadratureConfig) -> Result<ModularValue> {
    let supp = f.support();
    if f.is_indicator() {
        return modular_of(f, &supp, q, a, cfg);
    }
    modular_of(&f.abs()?, &supp, q, a, cfg)
}

/// `ρ(a (f - g))`.
pub fn modular_distance(
    f: &Signal,
    g: &Signal,
    q: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<ModularValue> {
    modular_of_signal(&Signal::linear_combination(1.0, f, -1.0, g)?, q, a, cfg)
}

/// `supp f` widened by [`DEFAULT_WINDOW_MARGIN`] in log scale on each side.
pub fn default_window(f: &Signal) -> LogInterval {
    let supp = f.support();
    let w = DEFAULT_WINDOW_MARGIN.exp();
    LogInterval::new(supp.lo() / w, supp.hi() * w).expect("widened support is a valid window")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularRow {
    pub n: u32,
    /// `ρ(a (T_n f - f))` over the window; largest coordinate for lattice signals.
    pub modular_error: f64,
    /// Upper bound for the same modular over the complement of the window.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularReport {
    pub kernel: String,
    pub map: String,
    pub q: f64,
    pub a: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub rows: Vec<ModularRow>,
}

/// Bound on `∫_{s ∉ window} |a T_n f(s)|^q ds/s`, valid when `supp f ⊂ window`.
///
/// Off the window `|T_n f(s)| <= ‖f‖_∞ W(s)` with `W(s) = ∫_supp L_n(t/s) dt/t <= M`,
/// the total mass. Hence `W^q <= M^{q-1} W`, and integrating `W` over the
/// complement of `[lo, hi]` gives at most `μ(supp f)` times the kernel mass
/// outside `[t_m/hi, t_0/lo]`.
fn modular_tail_bound(
    k: &dyn Kernel,
    n: u32,
    f: &Signal,
    window: &LogInterval,
    q: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let supp = f.support();
    let mass = normalization(k, n, cfg)?;
    let (lo, hi) = (supp.hi() / window.hi(), supp.lo() / window.lo());
    let outside = if lo < hi {
        mass_outside(k, n, lo, hi, cfg)?
    } else {
        mass
    };
    Ok((a * f.sup_norm()).powf(q) * mass.powf(q - 1.0) * supp.measure() * outside)
}

/// `ρ(a (T_n f - f))` over `window` for each `n`, with tail bounds.
#[allow(clippy::too_many_arguments)]
pub fn modular_table(
    k: &dyn Kernel,
    m: &UpsilonMap,
    f: &Signal,
    q: f64,
    a: f64,
    n_list: &[u32],
    window: &LogInterval,
    cfg: &QuadratureConfig,
) -> Result<ModularReport> {
    check_q(q)?;
    check_scale(a)?;
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n list", "must be nonempty and strictly increasing"));
    }
    let supp = f.support();
    if !(window.lo() <= supp.lo() && supp.hi() <= window.hi()) {
        return Err(Error::invalid("window", "must contain the support of the signal"));
    }
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let image = OperatorImage {
                kernel: k,
                map: m,
                n,
                signal: f,
                cfg,
            };
            let value = modular_of(&Residual(image), window, q, a, cfg)?;
            Ok(ModularRow {
                n,
                modular_error: value.total(),
                tail_bound: modular_tail_bound(k, n, f, window, q, a, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModularReport {
        kernel: k.label(),
        map: m.label().to_string(),
        q,
        a,
        window_lo: window.lo(),
        window_hi: window.hi(),
        rows,
    })
}

/// `ρ(a (T_n f - f))` over `window` for each scale `a`.
#[allow(clippy::too_many_arguments)]
pub fn modular_scale_scan(
    k: &dyn Kernel,
    m: &UpsilonMap,
    n: u32,
    f: &Signal,
    q: f64,
    scales: &[f64],
    window: &LogInterval,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    let image = OperatorImage {
        kernel: k,
        map: m,
        n,
        signal: f,
        cfg,
    };
    scales
        .iter()
        .map(|&a| Ok((a, modular_of(&Residual(image), window, q, a, cfg)?.total())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModularProperty {
    /// `ρ(0) = 0`.
    Zero,
    /// `ρ(-f) = ρ(f)`.
    Symmetry,
    /// `ρ(c₁f + c₂h) <= ρ(f) + ρ(h)` for convex weights.
    Subconvexity,
    /// `|f| <= |h|` implies `ρ(f) <= ρ(h)`.
    Monotonicity,
    /// `ρ(c₁f + c₂h) <= c₁ρ(f) + c₂ρ(h)` for convex weights.
    Convexity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyVerdict {
    Holds,
    Falsified {
        property: ModularProperty,
        /// Index of the offending pair; `None` for the zero signal.
        sample: Option<usize>,
        lhs: f64,
        rhs: f64,
    },
}

impl PropertyVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, PropertyVerdict::Holds)
    }
}

/// Checks the modular axioms, monotonicity and convexity of `ρ = ρ^{|·|^q}`
/// on each pair `(f, h)`, with one fixed (`½`) and one random convex weight.
pub fn modular_properties_check(
    samples: &[(Signal, Signal)],
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<PropertyVerdict> {
    check_q(q)?;
    if samples.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    let rho = |f: &Signal| -> Result<f64> { Ok(modular_of_signal(f, q, 1.0, cfg)?.total()) };
    let violated = |lhs: f64, rhs: f64| lhs > rhs + PROPERTY_TOL * rhs.abs().max(1.0);

    let zero = rho(&Signal::zero())?;
    if zero != 0.0 {
        return Ok(PropertyVerdict::Falsified {
            property: ModularProperty::Zero,
            sample: None,
            lhs: zero,
            rhs: 0.0,
        });
    }

    for (i, (f, h)) in samples.iter().enumerate() {
        let fail = |property, lhs, rhs| {
            Ok(PropertyVerdict::Falsified {
                property,
                sample: Some(i),
                lhs,
                rhs,
            })
        };
        let (rf, rh) = (rho(f)?, rho(h)?);

        let rneg = rho(&f.neg()?)?;
        if (rneg - rf).abs() > PROPERTY_TOL * rf.max(1.0) {
            return fail(ModularProperty::Symmetry, rneg, rf);
        }

        let dominating = Signal::linear_combination(1.0, &f.abs()?, 1.0, &h.abs()?)?;
        let rdom = rho(&dominating)?;
        if violated(rf, rdom) {
            return fail(ModularProperty::Monotonicity, rf, rdom);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f_6475_6c61_72 ^ i as u64);
        for c1 in [0.5, rng.gen_range(0.0..=1.0)] {
            let c2 = 1.0 - c1;
            let rmix = rho(&Signal::linear_combination(c1, f, c2, h)?)?;
            if violated(rmix, rf + rh) {
                return fail(ModularProperty::Subconvexity, rmix, rf + rh);
            }
            if violated(rmix, c1 * rf + c2 * rh) {
                return fail(ModularProperty::Convexity, rmix, c1 * rf + c2 * rh);
            }
        }
    }
    Ok(PropertyVerdict::Holds)
}
