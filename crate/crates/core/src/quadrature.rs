//! Integration against the Haar measure `dt/t` of the multiplicative group `(0, ∞)`.
//!
//! Every integral is computed in the log variable: with `t = e^x`,
//! `∫_lo^hi g(t) dt/t = ∫_{ln lo}^{ln hi} g(e^x) dx`, evaluated with composite
//! Gauss–Legendre panels of fixed width. Integrands are assumed smooth on each
//! panel, so callers pass known discontinuities and kinks as breakpoints.
//! Panel sums are accumulated sequentially with compensated summation, which
//! makes every result reproducible bit for bit.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeValue, Shape};

const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Composite panels per unit length of `ln t`.
    pub panels_per_unit_log: usize,
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    pub abs_tol: f64,
    /// Half-width `R` of the log window `[e^-R, e^R]` used before analytic tails take over.
    pub max_log_halfwidth: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            panels_per_unit_log: 64,
            nodes_per_panel: 8,
            abs_tol: 1e-10,
            max_log_halfwidth: 40.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels_per_unit_log == 0 {
            return Err(Error::invalid("panels_per_unit_log", "must be positive"));
        }
        if self.nodes_per_panel == 0 || self.nodes_per_panel > MAX_ORDER {
            return Err(Error::invalid(
                "nodes_per_panel",
                format!("must be in 1..={MAX_ORDER}"),
            ));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return Err(Error::invalid("abs_tol", "must lie in (0, 1)"));
        }
        if !(self.max_log_halfwidth > 0.0 && self.max_log_halfwidth.is_finite()) {
            return Err(Error::invalid("max_log_halfwidth", "must be positive"));
        }
        Ok(())
    }

    /// Copy with at least `density` panels per unit of `ln t`.
    pub fn with_min_density(&self, density: usize) -> Self {
        QuadratureConfig {
            panels_per_unit_log: self.panels_per_unit_log.max(density),
            ..*self
        }
    }

    /// Copy with the panel density multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        QuadratureConfig {
            panels_per_unit_log: self.panels_per_unit_log * factor.max(1),
            ..*self
        }
    }
}

/// A compact interval `[lo, hi]` of `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogInterval {
    lo: f64,
    hi: f64,
}

impl LogInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::invalid(
                "window",
                format!("need 0 < lo < hi < ∞, got [{lo}, {hi}]"),
            ));
        }
        Ok(LogInterval { lo, hi })
    }

    /// `[c·e^-w, c·e^w]`.
    pub fn around(center: f64, log_halfwidth: f64) -> Result<Self> {
        LogInterval::new(center * (-log_halfwidth).exp(), center * log_halfwidth.exp())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn log_bounds(&self) -> (f64, f64) {
        (self.lo.ln(), self.hi.ln())
    }

    /// Haar measure `ln(hi / lo)`.
    pub fn measure(&self) -> f64 {
        (self.hi / self.lo).ln()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// Distance `|ln t1 - ln t2|` on the multiplicative group.
pub fn d_ln(t1: f64, t2: f64) -> Result<f64> {
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::invalid(
            "point",
            format!("d_ln needs positive arguments, got {t1}, {t2}"),
        ));
    }
    Ok((t1.ln() - t2.ln()).abs())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the three-term Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        let nf = order as f64;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

fn rule(order: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<OnceLock<GaussLegendre>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=MAX_ORDER).map(|_| OnceLock::new()).collect());
    rules[order].get_or_init(|| GaussLegendre::new(order))
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Splits `[x_lo, x_hi]` at the breakpoints lying strictly inside it.
pub fn split_pieces(x_lo: f64, x_hi: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > x_lo && b < x_hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut start = x_lo;
    for c in cuts {
        pieces.push((start, c));
        start = c;
    }
    pieces.push((start, x_hi));
    pieces
}

/// Visits every quadrature node `(x, weight)` of the composite rule over the pieces.
fn for_each_node(
    pieces: &[(f64, f64)],
    cfg: &QuadratureConfig,
    mut visit: impl FnMut(f64, f64) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    let gl = rule(cfg.nodes_per_panel);
    for &(a, b) in pieces {
        if !(b > a) {
            continue;
        }
        let panels = (((b - a) * cfg.panels_per_unit_log as f64).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        for j in 0..panels {
            let left = a + j as f64 * h;
            let mid = left + 0.5 * h;
            for (xi, wi) in gl.nodes().iter().zip(gl.weights()) {
                visit(mid + 0.5 * h * xi, 0.5 * h * wi)?;
            }
        }
    }
    Ok(())
}

/// `∫_{x_lo}^{x_hi} g(x) dx` in the log variable, split at `breakpoints` (log coordinates).
pub fn integrate_log(
    mut g: impl FnMut(f64) -> f64,
    x_lo: f64,
    x_hi: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(x_lo.is_finite() && x_hi.is_finite() && x_lo <= x_hi) {
        return Err(Error::invalid(
            "log window",
            format!("need finite x_lo <= x_hi, got [{x_lo}, {x_hi}]"),
        ));
    }
    let pieces = split_pieces(x_lo, x_hi, breakpoints);
    let mut acc = CompensatedSum::default();
    for_each_node(&pieces, cfg, |x, w| {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                at: x.exp(),
                value: v,
            });
        }
        acc.add(w * v);
        Ok(())
    })?;
    Ok(acc.value())
}

/// `∫_window g(t) dt/t`.
pub fn integrate_haar(
    g: impl Fn(f64) -> f64,
    window: &LogInterval,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    integrate_haar_split(g, window, &[], cfg)
}

/// `∫_window g(t) dt/t`, with panels aligned to the given breakpoints (in `t`).
pub fn integrate_haar_split(
    g: impl Fn(f64) -> f64,
    window: &LogInterval,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (x_lo, x_hi) = window.log_bounds();
    let log_breaks: Vec<f64> = breakpoints
        .iter()
        .filter(|&&b| b > 0.0)
        .map(|b| b.ln())
        .collect();
    integrate_log(|x| g(x.exp()), x_lo, x_hi, &log_breaks, cfg)
}

/// Coordinatewise `∫ g(x) dx` of a lattice-valued integrand in the log variable.
pub fn integrate_log_lattice(
    mut g: impl FnMut(f64) -> Result<LatticeValue>,
    x_lo: f64,
    x_hi: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<LatticeValue> {
    if !(x_lo.is_finite() && x_hi.is_finite() && x_lo <= x_hi) {
        return Err(Error::invalid(
            "log window",
            format!("need finite x_lo <= x_hi, got [{x_lo}, {x_hi}]"),
        ));
    }
    let pieces = split_pieces(x_lo, x_hi, breakpoints);
    let mut shape: Option<Shape> = None;
    let mut acc: Vec<CompensatedSum> = Vec::new();
    for_each_node(&pieces, cfg, |x, w| {
        let v = g(x)?;
        match shape {
            None => {
                shape = Some(v.shape());
                acc = vec![CompensatedSum::default(); v.coords().len()];
            }
            Some(s) if s != v.shape() => {
                return Err(Error::InconsistentIntegrand {
                    expected: s,
                    found: v.shape(),
                });
            }
            Some(_) => {}
        }
        for (a, c) in acc.iter_mut().zip(v.coords()) {
            a.add(w * c);
        }
        Ok(())
    })?;
    match shape {
        Some(s) => LatticeValue::from_coords(s, acc.iter().map(CompensatedSum::value).collect()),
        // empty window: zero, but the shape is unknown; report it as a scalar
        None => Ok(LatticeValue::zero(Shape::Scalar)),
    }
}

/// Coordinatewise `∫_window g(t) dt/t` of a lattice-valued integrand.
pub fn integrate_haar_lattice(
    g: impl Fn(f64) -> Result<LatticeValue>,
    window: &LogInterval,
    cfg: &QuadratureConfig,
) -> Result<LatticeValue> {
    let (x_lo, x_hi) = window.log_bounds();
    integrate_log_lattice(|x| g(x.exp()), x_lo, x_hi, &[], cfg)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;

    use proptest::prelude::*;

    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for order in 1..=20 {
            let gl = GaussLegendre::new(order);
            let wsum: f64 = gl.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "order {order}");
            for deg in 0..(2 * order) {
                let q: f64 = gl
                    .nodes()
                    .iter()
                    .zip(gl.weights())
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "order {order} degree {deg}");
            }
        }
    }

    #[test]
    fn d_ln_examples() {
        assert!((d_ln(1.0, E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(d_ln(3.7, 3.7).unwrap(), 0.0);
        assert!((d_ln(2.0, 8.0).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!(d_ln(0.0, 1.0).is_err());
        assert!(d_ln(1.0, -2.0).is_err());
    }

    #[test]
    fn haar_measure_of_windows() {
        let w = LogInterval::new(1.0, E).unwrap();
        assert!((integrate_haar(|_| 1.0, &w, &cfg()).unwrap() - 1.0).abs() < 1e-12);
        let w = LogInterval::new(1.0, E * E).unwrap();
        assert!((integrate_haar(|_| 1.0, &w, &cfg()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moment_density_integrates_to_one() {
        let w = LogInterval::new(1e-12, 1.0).unwrap();
        let v = integrate_haar(|t| 3.0 * t.powi(3), &w, &cfg()).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(LogInterval::new(0.0, 1.0).is_err());
        assert!(LogInterval::new(2.0, 1.0).is_err());
        assert!(LogInterval::new(1.0, f64::INFINITY).is_err());
        let w = LogInterval::new(0.5, 2.0).unwrap();
        let err = integrate_haar(|t| if t > 1.0 { f64::NAN } else { 0.0 }, &w, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
        let bad = QuadratureConfig {
            nodes_per_panel: 0,
            ..cfg()
        };
        assert!(integrate_haar(|_| 1.0, &w, &bad).is_err());
    }

    #[test]
    fn lattice_integrals() {
        let w = LogInterval::new(1.0, E).unwrap();
        let one = integrate_haar_lattice(|_| LatticeValue::scalar(1.0), &w, &cfg()).unwrap();
        assert!((one.as_scalar().unwrap() - 1.0).abs() < 1e-12);

        let u = LatticeValue::sample(33, |x| (3.0 * x).sin() - 0.2).unwrap();
        let c = 2.5;
        let v = integrate_haar_lattice(|_| u.scale(c), &w, &cfg()).unwrap();
        let expected = u.scale(c).unwrap();
        for (a, b) in v.coords().iter().zip(expected.coords()) {
            assert!((a - b).abs() < 1e-12);
        }

        let mixed = integrate_haar_lattice(
            |t| {
                if t < 2.0 {
                    LatticeValue::scalar(1.0)
                } else {
                    Ok(u.clone())
                }
            },
            &w,
            &cfg(),
        );
        assert!(matches!(mixed, Err(Error::InconsistentIntegrand { .. })));
    }

    #[test]
    fn scalar_lattice_agrees_with_real() {
        let w = LogInterval::new(0.3, 7.0).unwrap();
        let h = |t: f64| (t - 1.0).abs() * (-t).exp();
        let a = integrate_haar_split(h, &w, &[1.0], &cfg()).unwrap();
        let b = integrate_log_lattice(
            |x| LatticeValue::scalar(h(x.exp())),
            w.log_bounds().0,
            w.log_bounds().1,
            &[0.0],
            &cfg(),
        )
        .unwrap();
        assert_eq!(a, b.as_scalar().unwrap());
    }

    /// Piecewise-linear function through the given knots, zero outside.
    fn pl(knots: &[(f64, f64)], t: f64) -> f64 {
        for w in knots.windows(2) {
            let ((t0, y0), (t1, y1)) = (w[0], w[1]);
            if t >= t0 && t <= t1 {
                return y0 + (y1 - y0) * (t - t0) / (t1 - t0);
            }
        }
        0.0
    }

    fn knots() -> impl Strategy<Value = Vec<(f64, f64)>> {
        (prop::collection::vec(0.05..1.0f64, 3..7), prop::collection::vec(-2.0..2.0f64, 3..7))
            .prop_map(|(gaps, ys)| {
                let mut t = 0.5;
                gaps.iter()
                    .zip(ys)
                    .map(|(g, y)| {
                        t += g;
                        (t, y)
                    })
                    .collect()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn factorization(k in knots()) {
            let w = LogInterval::new(0.5, 6.0).unwrap();
            let breaks: Vec<f64> = k.iter().map(|p| p.0.ln()).collect();
            let u = LatticeValue::sample(9, |x| 1.0 - 2.0 * x * x).unwrap();
            let (x0, x1) = w.log_bounds();
            let scalar = integrate_log(|x| pl(&k, x.exp()), x0, x1, &breaks, &cfg()).unwrap();
            let lattice = integrate_log_lattice(|x| u.scale(pl(&k, x.exp())), x0, x1, &breaks, &cfg()).unwrap();
            for (a, b) in lattice.coords().iter().zip(u.coords()) {
                prop_assert!((a - scalar * b).abs() < 1e-12);
            }
        }

        #[test]
        fn linearity(a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let w = LogInterval::new(0.2, 9.0).unwrap();
            let g = |t: f64| (t.ln()).cos();
            let h = |t: f64| 1.0 / (1.0 + t * t);
            let lhs = integrate_haar(|t| a * g(t) + b * h(t), &w, &cfg()).unwrap();
            let rhs = a * integrate_haar(g, &w, &cfg()).unwrap() + b * integrate_haar(h, &w, &cfg()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn monotonicity(c in 0.0..2.0f64) {
            let w = LogInterval::new(0.2, 9.0).unwrap();
            let g = |t: f64| (-t).exp();
            let h = |t: f64| (-t).exp() + c * t / (1.0 + t);
            prop_assert!(integrate_haar(g, &w, &cfg()).unwrap() <= integrate_haar(h, &w, &cfg()).unwrap() + 1e-12);
        }

        #[test]
        fn scale_invariance(s in 0.01..100.0f64) {
            let w = LogInterval::new(0.5, 4.0).unwrap();
            let ws = LogInterval::new(0.5 * s, 4.0 * s).unwrap();
            let g = |t: f64| t.ln().sin().powi(2) + 1.0 / (1.0 + t);
            let base = integrate_haar(g, &w, &cfg()).unwrap();
            let moved = integrate_haar(|t| g(t / s), &ws, &cfg()).unwrap();
            prop_assert!((base - moved).abs() < cfg().abs_tol);
        }

        #[test]
        fn panel_doubling_is_stable(lo in 0.1..1.0f64, span in 0.5..5.0f64) {
            let w = LogInterval::new(lo, lo * span.exp()).unwrap();
            let g = |t: f64| (-(t.ln() - 0.3).powi(2)).exp() * (1.0 + t.sqrt());
            let a = integrate_haar(g, &w, &cfg()).unwrap();
            let b = integrate_haar(g, &w, &cfg().refined(2)).unwrap();
            prop_assert!((a - b).abs() < cfg().abs_tol);
        }
    }
}
