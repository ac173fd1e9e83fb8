//! Checks that a kernel/map pair is U-singular, i.e. that `T_n f → f`.
//!
//! Six conditions are checked, each with a status and the numeric evidence it
//! rests on:
//!
//! | id                       | condition                                                    |
//! |--------------------------|--------------------------------------------------------------|
//! | `bounded_mass`           | `∫ L_n dt/t <= D` for every `n`                              |
//! | `index_set`              | the limsup over `H` equals the limsup over `ℕ` (`H = ℕ`)     |
//! | `positivity`             | `∫ L_n dt/t > 0` for every `n`                               |
//! | `tail_vanishing`         | `∫_{(0,∞)∖[1/δ,δ]} L_n dt/t → 0` for every `δ > 1`          |
//! | `identity_approximation` | `⋁_u |∫ L_n Υ_n(u) dt/t - u| <= ε_n z` with `ε_n ↓ 0`        |
//! | `compact_tail`           | `sup_{t∈C} ∫_{(0,∞)∖B} L_n(s/t) ds/s → 0` for some `B ⊃ C`  |
//!
//! Limits are made falsifiable by a threshold at the largest `n` together with
//! a nonincreasing trend over the last decade of `n`. The supremum over all `u`
//! cannot be sampled; it is verified analytically when the kernel is normalized
//! and the map carries a deviation bound `|Υ_n(u) - u| <= σ_n v` with `σ_n ↓ 0`,
//! and otherwise only evidenced on a probe set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{log_mass_between, normalization, tail_mass, Kernel, TailTag};
use crate::lattice::{LatticeValue, DEFAULT_GRID_SIZE};
use crate::nonlinearity::UpsilonMap;
use crate::quadrature::{LogInterval, QuadratureConfig};

pub const DEFAULT_N_LIST: [u32; 12] = [1, 2, 3, 5, 10, 20, 30, 50, 75, 100, 150, 200];
pub const DEFAULT_TOL_TAIL: f64 = 1e-3;
pub const DEFAULT_PROBE_TOL: f64 = 1e-9;
/// Log margins tried, in order, when searching for an enclosing set `B`.
pub const COMPACT_TAIL_MARGINS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
const COMPACT_TAIL_POINTS: usize = 17;
const MASS_REL_TOL: f64 = 1e-8;
const NORMALIZED_TOL: f64 = 1e-9;
/// Absolute slack for the nonincreasing-trend test on tails.
const TREND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    BoundedMass,
    IndexSet,
    Positivity,
    TailVanishing,
    IdentityApproximation,
    CompactTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    VerifiedAnalytically,
    /// The numbers look right, but the analytic bound only applies beyond the tested `n`.
    BoundRegimeOnly,
    Failed,
}

impl Status {
    pub fn is_verified(self) -> bool {
        matches!(self, Status::Verified | Status::VerifiedAnalytically)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassWitness {
    pub bound: f64,
    pub n: Vec<u32>,
    pub mass: Vec<f64>,
    pub counterexample_n: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSetWitness {
    pub h: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub delta: f64,
    pub n: Vec<u32>,
    pub numeric: Vec<f64>,
    /// Exact tail or upper bound, where the kernel provides one.
    pub analytic: Vec<Option<f64>>,
    pub analytic_tag: Option<TailTag>,
    /// `K` with `tail <= K/n`, where known.
    pub rate_constant: Option<f64>,
    pub below_tolerance: bool,
    pub nonincreasing: bool,
    pub analytic_consistent: bool,
    /// Whether the analytic bound applies at the largest `n`.
    pub in_regime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCounterexample {
    pub delta: f64,
    pub n: u32,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailWitness {
    pub tol_tail: f64,
    pub rows: Vec<TailRow>,
    pub counterexample: Option<TailCounterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCounterexample {
    pub n: u32,
    pub probe: LatticeValue,
    /// `max_i |mass·Υ_n(u) - u|_i`.
    pub deviation: f64,
    pub allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityWitness {
    /// Whether normalization and a null deviation sequence were both established.
    pub analytic_route: bool,
    pub n: Vec<u32>,
    pub mass: Vec<f64>,
    /// `σ_n`, the bound `ε_n` with `z = v = 1`.
    pub sigma: Vec<f64>,
    pub probes: usize,
    /// Largest `deviation - σ_n` over all probes and `n`.
    pub max_excess: f64,
    pub counterexample: Option<ProbeCounterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactTailWitness {
    pub c_lo: f64,
    pub c_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
    pub tol_tail: f64,
    pub n: Vec<u32>,
    /// `max_{t ∈ C} ∫_{(0,∞)∖B} L_n(s/t) ds/s` on a grid of `t`.
    pub tail: Vec<f64>,
    pub counterexample_n: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Mass(MassWitness),
    IndexSet(IndexSetWitness),
    Tail(TailWitness),
    Identity(IdentityWitness),
    CompactTail(CompactTailWitness),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub id: ConditionId,
    pub status: Status,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub kernel: String,
    pub map: String,
    pub h_descriptor: String,
    pub overall: bool,
    pub conditions: Vec<ConditionEntry>,
}

impl SingularityReport {
    pub fn failed(&self) -> Vec<ConditionId> {
        self.conditions
            .iter()
            .filter(|c| c.status == Status::Failed)
            .map(|c| c.id)
            .collect()
    }

    pub fn status(&self, id: ConditionId) -> Option<Status> {
        self.conditions.iter().find(|c| c.id == id).map(|c| c.status)
    }
}

fn check_n_list(n_list: &[u32]) -> Result<()> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "n list",
            "must be nonempty, positive and strictly increasing",
        ));
    }
    Ok(())
}

fn masses(k: &dyn Kernel, n_list: &[u32], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    n_list.par_iter().map(|&n| normalization(k, n, cfg)).collect()
}

/// Whether `values` is nonincreasing over the entries with `n >= n_max / 10`.
fn nonincreasing_last_decade(n_list: &[u32], values: &[f64]) -> bool {
    let n_max = *n_list.last().expect("nonempty");
    let start = n_list.iter().position(|&n| n * 10 >= n_max).unwrap_or(0);
    values[start..].windows(2).all(|w| w[1] <= w[0] + TREND_SLACK)
}

/// Total mass bounded by `d1`.
pub fn check_total_mass(
    k: &dyn Kernel,
    n_list: &[u32],
    d1: f64,
    cfg: &QuadratureConfig,
) -> Result<ConditionEntry> {
    check_n_list(n_list)?;
    if !(d1 > 0.0 && d1.is_finite()) {
        return Err(Error::invalid("D", format!("need D > 0, got {d1}")));
    }
    let mass = masses(k, n_list, cfg)?;
    let counterexample_n = n_list
        .iter()
        .zip(&mass)
        .find(|(_, &m)| m > d1 * (1.0 + MASS_REL_TOL))
        .map(|(&n, _)| n);
    Ok(ConditionEntry {
        id: ConditionId::BoundedMass,
        status: if counterexample_n.is_none() {
            Status::Verified
        } else {
            Status::Failed
        },
        witness: Witness::Mass(MassWitness {
            bound: d1,
            n: n_list.to_vec(),
            mass,
            counterexample_n,
        }),
    })
}

/// `H = ℕ`, so the index-set condition holds by definition.
pub fn index_set_entry() -> ConditionEntry {
    ConditionEntry {
        id: ConditionId::IndexSet,
        status: Status::VerifiedAnalytically,
        witness: Witness::IndexSet(IndexSetWitness {
            h: "N".to_string(),
            rationale: "the index set is all of N, so both limsups are taken over the same sequence"
                .to_string(),
        }),
    }
}

/// Every mass exceeds `cfg.abs_tol`.
pub fn check_positivity(
    k: &dyn Kernel,
    n_list: &[u32],
    cfg: &QuadratureConfig,
) -> Result<ConditionEntry> {
    check_n_list(n_list)?;
    let mass = masses(k, n_list, cfg)?;
    let counterexample_n = n_list
        .iter()
        .zip(&mass)
        .find(|(_, &m)| !(m > cfg.abs_tol))
        .map(|(&n, _)| n);
    Ok(ConditionEntry {
        id: ConditionId::Positivity,
        status: if counterexample_n.is_none() {
            Status::Verified
        } else {
            Status::Failed
        },
        witness: Witness::Mass(MassWitness {
            bound: cfg.abs_tol,
            n: n_list.to_vec(),
            mass,
            counterexample_n,
        }),
    })
}

fn tail_row(
    k: &dyn Kernel,
    delta: f64,
    n_list: &[u32],
    tol_tail: f64,
    cfg: &QuadratureConfig,
) -> Result<(TailRow, Option<TailCounterexample>)> {
    let tails = n_list
        .par_iter()
        .map(|&n| tail_mass(k, n, delta, cfg))
        .collect::<Result<Vec<_>>>()?;
    let numeric: Vec<f64> = tails.iter().map(|t| t.numeric).collect();
    let last = tails.len() - 1;
    let n_max = n_list[last];
    let rate_constant = k.tail_rate_constant(delta);

    let below_tolerance = numeric[last] < tol_tail;
    let nonincreasing = nonincreasing_last_decade(n_list, &numeric);
    let mut counterexample = None;
    let mut analytic_consistent = true;
    for (t, &n) in tails.iter().zip(n_list) {
        if !t.consistent(1e-12) {
            analytic_consistent = false;
            counterexample.get_or_insert(TailCounterexample {
                delta,
                n,
                tail: t.numeric,
            });
        }
    }
    let in_regime = tails[last].analytic.is_some_and(|a| a.in_regime);
    // the 1/n domination, checked where the analytic value applies
    if let (Some(kc), Some(a)) = (rate_constant, tails[last].analytic) {
        if a.in_regime && n_max as f64 * a.value > kc * (1.0 + 1e-9) {
            analytic_consistent = false;
            counterexample.get_or_insert(TailCounterexample {
                delta,
                n: n_max,
                tail: a.value,
            });
        }
    }
    if !below_tolerance || !nonincreasing {
        counterexample.get_or_insert(TailCounterexample {
            delta,
            n: n_max,
            tail: numeric[last],
        });
    }
    let row = TailRow {
        delta,
        n: n_list.to_vec(),
        numeric,
        analytic: tails.iter().map(|t| t.analytic.map(|a| a.value)).collect(),
        analytic_tag: tails[last].analytic.map(|a| a.tag),
        rate_constant,
        below_tolerance,
        nonincreasing,
        analytic_consistent,
        in_regime,
    };
    Ok((row, counterexample))
}

/// Tails outside `[1/δ, δ]` fall below `tol_tail` by the largest `n`, with a
/// nonincreasing trend, and agree with the kernel's analytic tail where it has one.
pub fn check_tail_vanishing(
    k: &dyn Kernel,
    deltas: &[f64],
    n_list: &[u32],
    tol_tail: f64,
    cfg: &QuadratureConfig,
) -> Result<ConditionEntry> {
    check_n_list(n_list)?;
    if deltas.is_empty() {
        return Err(Error::invalid("delta list", "must be nonempty"));
    }
    if !(tol_tail > 0.0) {
        return Err(Error::invalid("tail tolerance", "must be positive"));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    let mut counterexample = None;
    for &delta in deltas {
        let (row, cx) = tail_row(k, delta, n_list, tol_tail, cfg)?;
        if counterexample.is_none() {
            counterexample = cx;
        }
        rows.push(row);
    }
    let status = if counterexample.is_some() {
        Status::Failed
    } else if rows
        .iter()
        .any(|r| r.analytic_tag == Some(TailTag::Bound) && !r.in_regime)
    {
        Status::BoundRegimeOnly
    } else {
        Status::Verified
    };
    Ok(ConditionEntry {
        id: ConditionId::TailVanishing,
        status,
        witness: Witness::Tail(TailWitness {
            tol_tail,
            rows,
            counterexample,
        }),
    })
}

/// `{±1, ±0.1, ±10}` as scalars, then eight seeded grids of mixed sign.
pub fn default_probes() -> Vec<LatticeValue> {
    let mut probes: Vec<LatticeValue> = [1.0, -1.0, 0.1, -0.1, 10.0, -10.0]
        .iter()
        .map(|&x| LatticeValue::scalar(x).expect("finite"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7072_6f62_6573);
    for _ in 0..8 {
        let samples: Vec<f64> = (0..DEFAULT_GRID_SIZE).map(|_| rng.gen_range(-10.0..10.0)).collect();
        probes.push(LatticeValue::grid(samples).expect("finite samples"));
    }
    probes
}

/// `|∫ L_n Υ_n(u) dt/t - u| = |mass_n Υ_n(u) - u| <= σ_n v` on every probe.
pub fn check_identity_approx(
    k: &dyn Kernel,
    m: &UpsilonMap,
    n_list: &[u32],
    probes: &[LatticeValue],
    probe_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<ConditionEntry> {
    check_n_list(n_list)?;
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    if probes.iter().any(LatticeValue::is_zero) {
        return Err(Error::invalid("probe set", "probes must be nonzero"));
    }
    let mass = masses(k, n_list, cfg)?;
    let sigma: Vec<f64> = n_list.iter().map(|&n| m.deviation_bound(n).0).collect();
    let normalized = mass.iter().all(|&x| (x - 1.0).abs() <= NORMALIZED_TOL);
    let null_sigma = m.sigma_is_null_sequence() && sigma.windows(2).all(|w| w[1] <= w[0]);

    let mut max_excess = f64::NEG_INFINITY;
    let mut counterexample = None;
    for ((&n, &mass_n), &sigma_n) in n_list.iter().zip(&mass).zip(&sigma) {
        let (_, unit) = m.deviation_bound(n);
        for u in probes {
            let dev = m.apply(n, u)?.scale(mass_n)?.sub(u)?.abs();
            let allowance = LatticeValue::constant(dev.shape(), sigma_n).zip_with(
                unit.value(),
                |s, v| s * v,
            )?;
            let excess = dev
                .coords()
                .iter()
                .zip(allowance.coords().iter().cycle())
                .map(|(d, a)| d - a)
                .fold(f64::NEG_INFINITY, f64::max);
            max_excess = max_excess.max(excess);
            if excess > probe_tol && counterexample.is_none() {
                counterexample = Some(ProbeCounterexample {
                    n,
                    probe: u.clone(),
                    deviation: dev.max_abs(),
                    allowance: sigma_n,
                });
            }
        }
    }
    let analytic_route = normalized && null_sigma;
    let status = match (&counterexample, analytic_route) {
        (Some(_), _) => Status::Failed,
        (None, true) => Status::VerifiedAnalytically,
        (None, false) => Status::Verified,
    };
    Ok(ConditionEntry {
        id: ConditionId::IdentityApproximation,
        status,
        witness: Witness::Identity(IdentityWitness {
            analytic_route,
            n: n_list.to_vec(),
            mass,
            sigma,
            probes: probes.len(),
            max_excess,
            counterexample,
        }),
    })
}

/// `sup_{t∈C} ∫_{(0,∞)∖B} L_n(s/t) ds/s` vanishes along `n_list`. `B` must
/// contain `C` with a positive log margin on both sides.
pub fn check_compact_tail(
    k: &dyn Kernel,
    c: &LogInterval,
    b: &LogInterval,
    n_list: &[u32],
    tol_tail: f64,
    cfg: &QuadratureConfig,
) -> Result<ConditionEntry> {
    check_n_list(n_list)?;
    if !(b.lo() < c.lo() && c.hi() < b.hi()) {
        return Err(Error::invalid(
            "compact tail window",
            "B must enclose C with a positive margin in log scale",
        ));
    }
    let (c_lo, c_hi) = c.log_bounds();
    let ts: Vec<f64> = (0..COMPACT_TAIL_POINTS)
        .map(|i| c_lo + (c_hi - c_lo) * i as f64 / (COMPACT_TAIL_POINTS - 1) as f64)
        .collect();
    let (b_lo, b_hi) = b.log_bounds();
    let tail = n_list
        .par_iter()
        .map(|&n| {
            // ∫_{s∉B} L_n(s/t) ds/s = mass - ∫_{ln B - ln t} ℓ_n
            let mass = normalization(k, n, cfg)?;
            ts.iter().try_fold(0.0f64, |acc, &x| {
                let inside = log_mass_between(k, n, b_lo - x, b_hi - x, cfg)?;
                Ok(acc.max((mass - inside).max(0.0)))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let last = tail.len() - 1;
    let ok = tail[last] < tol_tail && nonincreasing_last_decade(n_list, &tail);
    Ok(ConditionEntry {
        id: ConditionId::CompactTail,
        status: if ok { Status::Verified } else { Status::Failed },
        witness: Witness::CompactTail(CompactTailWitness {
            c_lo: c.lo(),
            c_hi: c.hi(),
            b_lo: b.lo(),
            b_hi: b.hi(),
            tol_tail,
            n: n_list.to_vec(),
            tail,
            counterexample_n: (!ok).then_some(n_list[last]),
        }),
    })
}

/// Tries `B = C` widened by each of [`COMPACT_TAIL_MARGINS`]; the condition asks
/// only for some `B`, so the first verified margin wins.
pub fn search_compact_tail(
    k: &dyn Kernel,
    c: &LogInterval,
    n_list: &[u32],
    tol_tail: f64,
    cfg: &QuadratureConfig,
) -> Result<ConditionEntry> {
    let mut last = None;
    for margin in COMPACT_TAIL_MARGINS {
        let w = f64::exp(margin);
        let b = LogInterval::new(c.lo() / w, c.hi() * w)?;
        let entry = check_compact_tail(k, c, &b, n_list, tol_tail, cfg)?;
        if entry.status.is_verified() {
            return Ok(entry);
        }
        last = Some(entry);
    }
    Ok(last.expect("at least one margin"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SingularityParams {
    /// Mass bound `D`.
    pub d1: f64,
    pub n_list: Vec<u32>,
    pub deltas: Vec<f64>,
    pub tol_tail: f64,
    /// `None` selects [`default_probes`].
    pub probes: Option<Vec<LatticeValue>>,
    pub probe_tol: f64,
    /// The compact set `C` of the compact-tail condition.
    pub compact: LogInterval,
}

impl Default for SingularityParams {
    fn default() -> Self {
        SingularityParams {
            d1: 1.0,
            n_list: DEFAULT_N_LIST.to_vec(),
            deltas: vec![1.5, 2.0, std::f64::consts::E],
            tol_tail: DEFAULT_TOL_TAIL,
            probes: None,
            probe_tol: DEFAULT_PROBE_TOL,
            compact: LogInterval::new(1.0, 3.0).expect("valid window"),
        }
    }
}

/// All six conditions; U-singular iff each is verified.
pub fn full_report(
    k: &dyn Kernel,
    m: &UpsilonMap,
    params: &SingularityParams,
    cfg: &QuadratureConfig,
) -> Result<SingularityReport> {
    cfg.validate()?;
    let default;
    let probes = match &params.probes {
        Some(p) => p.as_slice(),
        None => {
            default = default_probes();
            default.as_slice()
        }
    };
    let conditions = vec![
        check_total_mass(k, &params.n_list, params.d1, cfg)?,
        index_set_entry(),
        check_positivity(k, &params.n_list, cfg)?,
        check_tail_vanishing(k, &params.deltas, &params.n_list, params.tol_tail, cfg)?,
        check_identity_approx(k, m, &params.n_list, probes, params.probe_tol, cfg)?,
        search_compact_tail(k, &params.compact, &params.n_list, params.tol_tail, cfg)?,
    ];
    Ok(SingularityReport {
        kernel: k.label(),
        map: m.label().to_string(),
        h_descriptor: "N".to_string(),
        overall: conditions.iter().all(|c| c.status.is_verified()),
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelFamily, LogUniformKernel, ScaledKernel};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn short() -> Vec<u32> {
        vec![1, 2, 5, 10, 20, 50]
    }

    /// A kernel with no mass at all.
    #[derive(Debug)]
    struct Vanishing;

    impl Kernel for Vanishing {
        fn label(&self) -> String {
            "zero".into()
        }
        fn log_density(&self, _n: u32, _x: f64) -> f64 {
            0.0
        }
        fn mass_above(&self, _n: u32, _x: f64) -> f64 {
            0.0
        }
        fn mass_below(&self, _n: u32, _x: f64) -> f64 {
            0.0
        }
        fn sup_value(&self, _n: u32) -> f64 {
            0.0
        }
    }

    #[test]
    fn total_mass_examples() {
        let e = check_total_mass(&KernelFamily::Moment, &short(), 1.0, &cfg()).unwrap();
        assert_eq!(e.status, Status::Verified);
        let mpc = KernelFamily::poisson_cauchy(3).unwrap();
        assert_eq!(check_total_mass(&mpc, &short(), 1.0, &cfg()).unwrap().status, Status::Verified);
        let doubled = ScaledKernel::new(KernelFamily::Moment, 2.0).unwrap();
        let e = check_total_mass(&doubled, &short(), 1.0, &cfg()).unwrap();
        assert_eq!(e.status, Status::Failed);
        let Witness::Mass(w) = e.witness else { panic!() };
        assert_eq!(w.counterexample_n, Some(1));
        assert!((w.mass[0] - 2.0).abs() < 1e-10);
        assert!(check_total_mass(&doubled, &short(), 0.0, &cfg()).is_err());
    }

    #[test]
    fn positivity_examples() {
        for k in [KernelFamily::Moment, KernelFamily::GaussWeierstrass, KernelFamily::poisson_cauchy(2).unwrap()] {
            assert_eq!(check_positivity(&k, &short(), &cfg()).unwrap().status, Status::Verified);
        }
        assert_eq!(check_positivity(&KernelFamily::Moment, &[1], &cfg()).unwrap().status, Status::Verified);
        let e = check_positivity(&Vanishing, &short(), &cfg()).unwrap();
        assert_eq!(e.status, Status::Failed);
    }

    #[test]
    fn tail_examples() {
        let e = check_tail_vanishing(&KernelFamily::Moment, &[2.0], &[1, 5, 10], 1e-3, &cfg()).unwrap();
        assert_eq!(e.status, Status::Verified);
        let Witness::Tail(w) = &e.witness else { panic!() };
        assert!(w.rows[0].numeric[2] < 1e-3);
        assert!((w.rows[0].numeric[2] - 2f64.powi(-10)).abs() < 1e-12);

        let mpc = KernelFamily::poisson_cauchy(2).unwrap();
        let e = check_tail_vanishing(&mpc, &[std::f64::consts::E], &DEFAULT_N_LIST, 1e-3, &cfg()).unwrap();
        assert_eq!(e.status, Status::Verified);
        let Witness::Tail(w) = &e.witness else { panic!() };
        let row = &w.rows[0];
        for (num, bound) in row.numeric.iter().zip(&row.analytic) {
            assert!(*num <= bound.unwrap());
        }
        assert!((row.rate_constant.unwrap() - 4.0 / std::f64::consts::PI).abs() < 1e-14);

        let flat = LogUniformKernel::new(2.0).unwrap();
        let e = check_tail_vanishing(&flat, &[2.0], &DEFAULT_N_LIST, 1e-3, &cfg()).unwrap();
        assert_eq!(e.status, Status::Failed);
        let Witness::Tail(w) = &e.witness else { panic!() };
        assert_eq!(w.counterexample.as_ref().unwrap().n, 200);
    }

    #[test]
    fn gauss_below_regime_is_flagged() {
        // ⌈4 / ln 1.01⌉ = 402 exceeds every tested n
        let e = check_tail_vanishing(&KernelFamily::GaussWeierstrass, &[1.01], &[100, 200, 400], 1.0, &cfg())
            .unwrap();
        assert_eq!(e.status, Status::BoundRegimeOnly);
    }

    #[test]
    fn identity_examples() {
        let probes = default_probes();
        assert_eq!(probes.len(), 14);
        let e = check_identity_approx(&KernelFamily::Moment, &UpsilonMap::identity(), &short(), &probes, 1e-9, &cfg())
            .unwrap();
        assert_eq!(e.status, Status::VerifiedAnalytically);
        let Witness::Identity(w) = &e.witness else { panic!() };
        assert!(w.sigma.iter().all(|&s| s == 0.0));

        let e = check_identity_approx(
            &KernelFamily::GaussWeierstrass,
            &UpsilonMap::saturating(),
            &short(),
            &probes,
            1e-9,
            &cfg(),
        )
        .unwrap();
        assert_eq!(e.status, Status::VerifiedAnalytically);
        let Witness::Identity(w) = &e.witness else { panic!() };
        assert_eq!(w.sigma[3], 0.1);

        let doubled = ScaledKernel::new(KernelFamily::Moment, 2.0).unwrap();
        let e = check_identity_approx(&doubled, &UpsilonMap::identity(), &short(), &probes, 1e-9, &cfg()).unwrap();
        assert_eq!(e.status, Status::Failed);
        let Witness::Identity(w) = &e.witness else { panic!() };
        let cx = w.counterexample.as_ref().unwrap();
        assert_eq!(cx.probe, LatticeValue::scalar(1.0).unwrap());
        assert!((cx.deviation - 1.0).abs() < 1e-9);

        assert_eq!(
            check_identity_approx(&doubled, &UpsilonMap::identity(), &short(), &[], 1e-9, &cfg()),
            Err(Error::EmptyProbeSet)
        );
    }

    #[test]
    fn compact_tail_examples() {
        let c = LogInterval::new(1.0, 3.0).unwrap();
        let b = LogInterval::new(1.0 / std::f64::consts::E, 3.0 * std::f64::consts::E).unwrap();
        for k in [KernelFamily::Moment, KernelFamily::GaussWeierstrass] {
            let e = check_compact_tail(&k, &c, &b, &DEFAULT_N_LIST, 1e-3, &cfg()).unwrap();
            assert_eq!(e.status, Status::Verified, "{k:?}");
        }
        // moment: the worst t is the left end of C, where the tail is (1/e)^n
        let e = check_compact_tail(&KernelFamily::Moment, &c, &b, &[1, 5, 10], 1e-3, &cfg()).unwrap();
        let Witness::CompactTail(w) = &e.witness else { panic!() };
        for (tail, n) in w.tail.iter().zip([1, 5, 10]) {
            assert!((tail - (-(n as f64)).exp()).abs() < 1e-12, "n={n}: {tail}");
        }
        assert!(check_compact_tail(&KernelFamily::Moment, &c, &c, &short(), 1e-3, &cfg()).is_err());

        let flat = LogUniformKernel::new(2.0).unwrap();
        assert_eq!(check_compact_tail(&flat, &c, &b, &short(), 1e-3, &cfg()).unwrap().status, Status::Failed);
        let e = search_compact_tail(&flat, &c, &short(), 1e-3, &cfg()).unwrap();
        assert_eq!(e.status, Status::Verified);
    }

    #[test]
    fn report_is_deterministic_and_ordered() {
        let params = SingularityParams {
            n_list: short(),
            ..Default::default()
        };
        let k = KernelFamily::Moment;
        let id = UpsilonMap::identity();
        let a = full_report(&k, &id, &params, &cfg()).unwrap();
        let b = full_report(&k, &id, &params, &cfg()).unwrap();
        let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(ja, jb);
        assert!(a.overall);
        let ids: Vec<ConditionId> = a.conditions.iter().map(|c| c.id).collect();
        assert_eq!(
            ids,
            [
                ConditionId::BoundedMass,
                ConditionId::IndexSet,
                ConditionId::Positivity,
                ConditionId::TailVanishing,
                ConditionId::IdentityApproximation,
                ConditionId::CompactTail
            ]
        );
        let keys = ["\"kernel\"", "\"map\"", "\"h_descriptor\"", "\"overall\"", "\"conditions\""];
        let pos: Vec<usize> = keys.iter().map(|k| ja.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a.status(ConditionId::IndexSet), Some(Status::VerifiedAnalytically));
    }
}
