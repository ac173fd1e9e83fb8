//! Compactly supported signals `f : (0, ∞) → X`.
//!
//! A signal is a piecewise-linear profile vanishing at both ends of its
//! support, optionally multiplied by a fixed lattice direction `u₀`, so that
//! `f(t) = profile(t) · u₀`. Without a direction the signal is scalar valued.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeValue, Shape};
use crate::quadrature::LogInterval;

/// A function of `t > 0` with values in the lattice, as consumed by the
/// operator and modular routines.
pub trait LatticeFunction: Sync {
    fn eval(&self, t: f64) -> Result<LatticeValue>;

    fn shape(&self) -> Shape;

    /// Points in `t` where the function has kinks or jumps.
    fn breakpoints(&self) -> Vec<f64>;

    /// Panels per unit of `ln t` needed to resolve the function.
    fn panel_density(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Profile {
    PiecewiseLinear(Vec<(f64, f64)>),
    /// `χ_[lo, hi]`, only admitted for operator oracles.
    Indicator { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    profile: Profile,
    direction: Option<LatticeValue>,
}

impl Signal {
    /// Piecewise-linear profile through `knots = [(t_0, 0), ..., (t_m, 0)]`.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("signal", "needs at least two breakpoints"));
        }
        if knots.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinite {
                context: "signal breakpoint",
            });
        }
        if knots[0].0 <= 0.0 {
            return Err(Error::invalid("signal", "breakpoints must be positive"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "signal",
                "breakpoints must be strictly increasing",
            ));
        }
        if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 0.0 {
            return Err(Error::invalid(
                "signal",
                "profile must vanish at both ends of its support",
            ));
        }
        Ok(Signal {
            profile: Profile::PiecewiseLinear(knots),
            direction: None,
        })
    }

    /// The triangle `(t-1)χ_[1,2] + (3-t)χ_[2,3]`.
    pub fn hat() -> Self {
        Signal::new(vec![(1.0, 0.0), (2.0, 1.0), (3.0, 0.0)]).expect("valid hat signal")
    }

    /// The zero signal.
    pub fn zero() -> Self {
        Signal::new(vec![(1.0, 0.0), (2.0, 0.0)]).expect("valid zero signal")
    }

    /// The indicator `χ_[lo, hi]`. It is discontinuous, so it lies outside the
    /// domain of compactly supported continuous signals; use it only as an oracle.
    #[cfg(any(test, feature = "indicator-signals"))]
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        LogInterval::new(lo, hi)?;
        Ok(Signal {
            profile: Profile::Indicator { lo, hi },
            direction: None,
        })
    }

    /// Parses `"t0:y0,t1:y1,..."`.
    pub fn parse(spec: &str) -> Result<Self> {
        let knots = spec
            .split(',')
            .map(|pair| {
                let (t, y) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::invalid("signal", format!("expected t:y, got {pair:?}")))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::invalid("signal", format!("{v:?}: {e}")))
                };
                Ok((parse(t)?, parse(y)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Signal::new(knots)
    }

    pub fn with_direction(self, direction: LatticeValue) -> Self {
        Signal {
            direction: Some(direction),
            ..self
        }
    }

    pub fn direction(&self) -> Option<&LatticeValue> {
        self.direction.as_ref()
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.profile, Profile::Indicator { .. })
    }

    pub fn knots(&self) -> Option<&[(f64, f64)]> {
        match &self.profile {
            Profile::PiecewiseLinear(k) => Some(k),
            Profile::Indicator { .. } => None,
        }
    }

    pub fn support(&self) -> LogInterval {
        let (lo, hi) = match &self.profile {
            Profile::PiecewiseLinear(k) => (k[0].0, k[k.len() - 1].0),
            Profile::Indicator { lo, hi } => (*lo, *hi),
        };
        LogInterval::new(lo, hi).expect("support validated at construction")
    }

    /// The scalar profile at `t`.
    pub fn profile(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::Indicator { lo, hi } => {
                if *lo <= t && t <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::PiecewiseLinear(k) => {
                if t <= k[0].0 || t >= k[k.len() - 1].0 {
                    return 0.0;
                }
                let i = k.partition_point(|&(ti, _)| ti <= t);
                let (t0, y0) = k[i - 1];
                let (t1, y1) = k[i];
                y0 + (y1 - y0) * ((t - t0) / (t1 - t0))
            }
        }
    }

    /// `max_t |f(t)|`, coordinatewise maximum for lattice directions.
    pub fn sup_norm(&self) -> f64 {
        let peak = match &self.profile {
            Profile::PiecewiseLinear(k) => k.iter().fold(0.0f64, |m, &(_, y)| m.max(y.abs())),
            Profile::Indicator { .. } => 1.0,
        };
        peak * self.direction.as_ref().map_or(1.0, LatticeValue::max_abs)
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }

    fn knots_or_err(&self) -> Result<&[(f64, f64)]> {
        self.knots()
            .ok_or_else(|| Error::invalid("signal", "indicator signals do not support arithmetic"))
    }

    /// `a·f + b·g` as a piecewise-linear signal on the union of breakpoints.
    /// Both signals must share the same direction (or both be scalar).
    pub fn linear_combination(a: f64, f: &Signal, b: f64, g: &Signal) -> Result<Signal> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite {
                context: "signal combination coefficient",
            });
        }
        if f.direction != g.direction {
            return Err(Error::invalid(
                "signal",
                "combined signals must share one direction",
            ));
        }
        let mut ts: Vec<f64> = f
            .knots_or_err()?
            .iter()
            .chain(g.knots_or_err()?)
            .map(|&(t, _)| t)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let knots = ts
            .into_iter()
            .map(|t| (t, a * f.profile(t) + b * g.profile(t)))
            .collect();
        Ok(Signal {
            profile: Profile::PiecewiseLinear(knots),
            direction: f.direction.clone(),
        })
    }

    pub fn scale(&self, c: f64) -> Result<Signal> {
        Signal::linear_combination(c, self, 0.0, self)
    }

    pub fn neg(&self) -> Result<Signal> {
        self.scale(-1.0)
    }

    /// `|f|`, with the zero crossings of the profile inserted as breakpoints.
    pub fn abs(&self) -> Result<Signal> {
        let k = self.knots_or_err()?;
        let mut out = Vec::with_capacity(k.len() * 2);
        out.push((k[0].0, k[0].1.abs()));
        for w in k.windows(2) {
            let ((t0, y0), (t1, y1)) = (w[0], w[1]);
            if y0 * y1 < 0.0 {
                let tc = t0 + (t1 - t0) * (y0 / (y0 - y1));
                if tc > t0 && tc < t1 {
                    out.push((tc, 0.0));
                }
            }
            out.push((t1, y1.abs()));
        }
        Ok(Signal {
            profile: Profile::PiecewiseLinear(out),
            direction: self.direction.as_ref().map(LatticeValue::abs),
        })
    }
}

impl LatticeFunction for Signal {
    fn eval(&self, t: f64) -> Result<LatticeValue> {
        if !(t > 0.0) {
            return Err(Error::invalid("t", format!("signals live on t > 0, got {t}")));
        }
        let p = self.profile(t);
        match &self.direction {
            None => LatticeValue::scalar(p),
            Some(u) => u.scale(p),
        }
    }

    fn shape(&self) -> Shape {
        self.direction.as_ref().map_or(Shape::Scalar, LatticeValue::shape)
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::PiecewiseLinear(k) => k.iter().map(|&(t, _)| t).collect(),
            Profile::Indicator { lo, hi } => vec![*lo, *hi],
        }
    }
}
