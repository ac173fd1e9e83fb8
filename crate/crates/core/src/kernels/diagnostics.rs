use serde::{Deserialize, Serialize};

use super::{check_n, window_integral, Kernel};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_log, QuadratureConfig};

/// Measure on `(0, ∞)` used for the `L^q` norm of the window map `s ↦ ∫_a^b L_n(t/s) dt/t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LqMeasure {
    /// `ds`.
    #[default]
    Lebesgue,
    /// `ds/s`.
    Haar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqDiagnostic {
    /// `L^q` norms over `[a e^-2 2^-j, b e^2 2^j]`, `j = 0..=depth`.
    pub truncated_norms: Vec<f64>,
    /// Last increment `norm[depth] - norm[depth - 1]`.
    pub cauchy_gap: f64,
}

/// Evidence that the window map lies in `L^q(0, ∞)`: its norms over nested
/// truncations and the last increment. The core `[a e^-2, b e^2]` is where the
/// map is merely continuous; outside it the map has explicit decaying tails.
#[allow(clippy::too_many_arguments)]
pub fn window_lq_diagnostic(
    k: &dyn Kernel,
    n: u32,
    a: f64,
    b: f64,
    q: f64,
    depth: usize,
    measure: LqMeasure,
    cfg: &QuadratureConfig,
) -> Result<LqDiagnostic> {
    check_n(n)?;
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::invalid(
            "window",
            format!("need 0 < a < b, got [{a}, {b}]"),
        ));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::invalid("q", format!("need finite q >= 1, got {q}")));
    }
    if depth == 0 {
        return Err(Error::invalid("depth", "need at least one nesting step"));
    }
    let outer = cfg.with_min_density(k.panel_density(n));
    let breaks = [a.ln(), b.ln()];

    // F(s)^q as a function of x = ln s, including the Lebesgue Jacobian.
    let integrand = |x: f64| -> Result<f64> {
        let s = x.exp();
        let f = window_integral(k, n, a, b, s, cfg)?.abs();
        let jac = match measure {
            LqMeasure::Lebesgue => s,
            LqMeasure::Haar => 1.0,
        };
        Ok(f.powf(q) * jac)
    };
    let piece = |x0: f64, x1: f64| -> Result<f64> {
        // integrate_log takes an infallible integrand; carry the first error out
        let mut failure = None;
        let v = integrate_log(
            |x| match integrand(x) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            x0,
            x1,
            &breaks,
            &outer,
        );
        match failure {
            Some(e) => Err(e),
            None => v,
        }
    };

    let ln2 = std::f64::consts::LN_2;
    let core_lo = a.ln() - 2.0;
    let core_hi = b.ln() + 2.0;
    let mut total = piece(core_lo, core_hi)?;
    let mut norms = vec![total.powf(1.0 / q)];
    for j in 1..=depth {
        let (jf, jp) = (j as f64, (j - 1) as f64);
        total += piece(core_lo - jf * ln2, core_lo - jp * ln2)?;
        total += piece(core_hi + jp * ln2, core_hi + jf * ln2)?;
        norms.push(total.powf(1.0 / q));
    }
    let cauchy_gap = norms[depth] - norms[depth - 1];
    Ok(LqDiagnostic {
        truncated_norms: norms,
        cauchy_gap,
    })
}

/// `n (π - 2 arctan(n ln δ))` for each `n`; the sequence tends to `2 / ln δ`.
pub fn mpc_tail_limit_check(delta: f64, n_list: &[u32]) -> Result<Vec<f64>> {
    if !(delta > 1.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", format!("need δ > 1, got {delta}")));
    }
    let ld = delta.ln();
    n_list
        .iter()
        .map(|&n| {
            check_n(n)?;
            let nf = n as f64;
            Ok(nf * 2.0 * (1.0 / (nf * ld)).atan())
        })
        .collect()
}
