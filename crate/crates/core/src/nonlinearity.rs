//! Pointwise maps `Υ_n : X → X` and their Lipschitz comparators `ψ_n`.
//!
//! The kernel of the operator factors as `K_n(t, u) = L_n(t) Υ_n(u)`. Two maps
//! ship: the identity (linear operators) and the saturating map
//! `Υ_n(u) = n u |u| / (n |u| + 1)`, applied coordinatewise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeValue, OrderUnit};

/// Slack for floating-point comparisons of map values.
pub const MAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonKind {
    Identity,
    Saturating,
}

/// `ψ_n : X⁺ → X⁺` bounding `|Υ_n(u) - Υ_n(v)| <= ψ_n(|u - v|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PsiComparator {
    #[default]
    Identity,
    /// `ψ_n(x) = factor · x`.
    Linear { factor: f64 },
}

impl PsiComparator {
    pub fn linear(factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(
                "comparator factor",
                "must be positive and finite",
            ));
        }
        Ok(PsiComparator::Linear { factor })
    }

    pub fn apply(&self, _n: u32, x: &LatticeValue) -> Result<LatticeValue> {
        match *self {
            PsiComparator::Identity => Ok(x.clone()),
            PsiComparator::Linear { factor } => x.scale(factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonMap {
    kind: UpsilonKind,
    comparator: PsiComparator,
}

impl UpsilonMap {
    pub fn identity() -> Self {
        UpsilonMap {
            kind: UpsilonKind::Identity,
            comparator: PsiComparator::Identity,
        }
    }

    pub fn saturating() -> Self {
        UpsilonMap {
            kind: UpsilonKind::Saturating,
            comparator: PsiComparator::Identity,
        }
    }

    pub fn new(kind: UpsilonKind) -> Self {
        match kind {
            UpsilonKind::Identity => Self::identity(),
            UpsilonKind::Saturating => Self::saturating(),
        }
    }

    pub fn with_comparator(self, comparator: PsiComparator) -> Self {
        UpsilonMap { comparator, ..self }
    }

    pub fn kind(&self) -> UpsilonKind {
        self.kind
    }

    pub fn comparator(&self) -> PsiComparator {
        self.comparator
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            UpsilonKind::Identity => "identity",
            UpsilonKind::Saturating => "saturating",
        }
    }

    /// `Υ_n` on one real coordinate.
    #[inline]
    pub fn apply_scalar(&self, n: u32, u: f64) -> f64 {
        match self.kind {
            UpsilonKind::Identity => u,
            UpsilonKind::Saturating => {
                if u == 0.0 {
                    return 0.0;
                }
                let nu = n as f64 * u.abs();
                u * (nu / (nu + 1.0))
            }
        }
    }

    pub fn apply(&self, n: u32, u: &LatticeValue) -> Result<LatticeValue> {
        check_n(n)?;
        u.map(|x| self.apply_scalar(n, x))
    }

    /// `|Υ_n(u) - u|`.
    pub fn deviation(&self, n: u32, u: &LatticeValue) -> Result<LatticeValue> {
        Ok(self.apply(n, u)?.sub(u)?.abs())
    }

    /// `(σ_n, v)` with `|Υ_n(u) - u| <= σ_n v` for every `u`.
    pub fn deviation_bound(&self, n: u32) -> (f64, OrderUnit) {
        let sigma = match self.kind {
            UpsilonKind::Identity => 0.0,
            // |u| / (n|u| + 1) < 1/n
            UpsilonKind::Saturating => 1.0 / n as f64,
        };
        (sigma, OrderUnit::one())
    }

    /// Whether `σ_n` is known in closed form to be nonincreasing with infimum 0.
    pub fn sigma_is_null_sequence(&self) -> bool {
        true
    }

    /// `|Υ_n(u) - Υ_n(v)| <= ψ_n(|u - v|)` coordinatewise, up to [`MAP_TOL`].
    pub fn lipschitz_check(&self, n: u32, u: &LatticeValue, v: &LatticeValue) -> Result<bool> {
        let lhs = self.apply(n, u)?.sub(&self.apply(n, v)?)?.abs();
        let rhs = self.comparator.apply(n, &u.sub(v)?.abs())?;
        lhs.leq_within(&rhs, MAP_TOL)
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "map index must be at least 1"));
    }
    Ok(())
}
