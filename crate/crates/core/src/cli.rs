//! The `mellin` command line: figure data, tables and verification reports.
//!
//! Exit codes: 0 success, 2 usage error, 3 verification failure, 4 numeric or
//! I/O failure. Options may also come from a JSON file (`--config`); flags
//! given on the command line take precedence over it.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::kernels::{
    tail_mass, window_integral, Kernel, KernelFamily, ScaledKernel, TailTag,
};
use crate::modular::{default_window, modular_table};
use crate::nonlinearity::{UpsilonKind, UpsilonMap};
use crate::operators::{operator_curve, SGrid, DEFAULT_GRID_POINTS};
use crate::quadrature::{LogInterval, QuadratureConfig};
use crate::signal::Signal;
use crate::singularity::{full_report, SingularityParams, DEFAULT_N_LIST};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mellin", version, about = "Mellin-type approximation operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Window integrals s ↦ ∫_a^b L_n(t/s) dt/t for several n.
    KernelPlot(Opts),
    /// A signal and its operator images T_n f on an s-grid.
    Approximate(Opts),
    /// Kernel tails outside [1/δ, δ], numeric and analytic.
    TailTable(Opts),
    /// Windowed modular errors ρ(a (T_n f - f)).
    ModularTable(Opts),
    /// U-singularity report for a kernel/map pair (JSON).
    Singularity(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Moment,
    Mgw,
    Mpc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Saturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand, also accepted as a JSON config.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Opts {
    #[arg(long, value_enum)]
    pub kernel: Option<KernelKind>,
    /// Order of the Poisson–Cauchy kernel (p >= 2).
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, value_enum)]
    pub map: Option<MapKind>,
    /// Comma-separated kernel indices.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub s_lo: Option<f64>,
    #[arg(long)]
    pub s_hi: Option<f64>,
    #[arg(long)]
    pub s_count: Option<usize>,
    #[arg(long)]
    pub window_lo: Option<f64>,
    #[arg(long)]
    pub window_hi: Option<f64>,
    /// Comma-separated δ values (> 1).
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Piecewise-linear signal "t0:y0,t1:y1,...".
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub panels_per_unit_log: Option<usize>,
    #[arg(long)]
    pub nodes_per_panel: Option<usize>,
    // multiplies the kernel; used to exercise failing verdicts
    #[arg(long, hide = true)]
    pub kernel_scale: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Opts {
    /// `self` with unset fields taken from `base`.
    fn over(self, base: Opts) -> Opts {
        fn list<T>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        Opts {
            kernel: self.kernel.or(base.kernel),
            p: self.p.or(base.p),
            map: self.map.or(base.map),
            n: list(self.n, base.n),
            q: self.q.or(base.q),
            a: self.a.or(base.a),
            s_lo: self.s_lo.or(base.s_lo),
            s_hi: self.s_hi.or(base.s_hi),
            s_count: self.s_count.or(base.s_count),
            window_lo: self.window_lo.or(base.window_lo),
            window_hi: self.window_hi.or(base.window_hi),
            delta: list(self.delta, base.delta),
            signal: self.signal.or(base.signal),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            panels_per_unit_log: self.panels_per_unit_log.or(base.panels_per_unit_log),
            nodes_per_panel: self.nodes_per_panel.or(base.nodes_per_panel),
            kernel_scale: self.kernel_scale.or(base.kernel_scale),
            config: self.config,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_precondition() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

struct Output {
    text: String,
    verified: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `args` (including the program name), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let (opts, cmd): (Opts, fn(&Opts) -> CmdResult<Output>) = match cli.command {
        Command::KernelPlot(o) => (o, kernel_plot),
        Command::Approximate(o) => (o, approximate),
        Command::TailTable(o) => (o, tail_table),
        Command::ModularTable(o) => (o, cmd_modular_table),
        Command::Singularity(o) => (o, singularity),
    };
    let result = load_config(opts).and_then(|o| {
        let out = cmd(&o)?;
        emit(&out.text, o.out.as_deref(), stdout)?;
        Ok(out.verified)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFICATION,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_NUMERIC
        }
    }
}

fn load_config(opts: Opts) -> CmdResult<Opts> {
    let Some(path) = opts.config.clone() else {
        return Ok(opts);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let base: Opts = serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    Ok(opts.over(base))
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> CmdResult<()> {
    let io = |e: std::io::Error| Failure::Numeric(format!("cannot write output: {e}"));
    match path {
        None => stdout.write_all(text.as_bytes()).map_err(io),
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.persist(p).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn quadrature(o: &Opts) -> CmdResult<QuadratureConfig> {
    let mut cfg = QuadratureConfig::default();
    if let Some(p) = o.panels_per_unit_log {
        cfg.panels_per_unit_log = p;
    }
    if let Some(k) = o.nodes_per_panel {
        cfg.nodes_per_panel = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn kernel(o: &Opts) -> CmdResult<Box<dyn Kernel>> {
    let kind = o.kernel.unwrap_or(KernelKind::Moment);
    let family = match (kind, o.p) {
        (KernelKind::Mpc, p) => KernelFamily::poisson_cauchy(p.unwrap_or(3))?,
        (_, Some(_)) => return Err(usage("--p applies only to --kernel mpc")),
        (KernelKind::Moment, None) => KernelFamily::Moment,
        (KernelKind::Mgw, None) => KernelFamily::GaussWeierstrass,
    };
    Ok(match o.kernel_scale {
        None => Box::new(family),
        Some(c) => Box::new(ScaledKernel::new(family, c)?),
    })
}

fn map(o: &Opts) -> UpsilonMap {
    UpsilonMap::new(match o.map.unwrap_or(MapKind::Identity) {
        MapKind::Identity => UpsilonKind::Identity,
        MapKind::Saturating => UpsilonKind::Saturating,
    })
}

fn n_list(o: &Opts, default: &[u32]) -> CmdResult<Vec<u32>> {
    let n = if o.n.is_empty() {
        default.to_vec()
    } else {
        o.n.clone()
    };
    if n.iter().any(|&x| x == 0) {
        return Err(usage("--n values must be at least 1"));
    }
    Ok(n)
}

fn grid(o: &Opts, lo: f64, hi: f64) -> CmdResult<SGrid> {
    Ok(SGrid::log_spaced(
        o.s_lo.unwrap_or(lo),
        o.s_hi.unwrap_or(hi),
        o.s_count.unwrap_or(DEFAULT_GRID_POINTS),
    )?)
}

fn signal(o: &Opts) -> CmdResult<Signal> {
    match &o.signal {
        None => Ok(Signal::hat()),
        Some(s) => Ok(Signal::parse(s)?),
    }
}

fn format(o: &Opts) -> Format {
    o.format.unwrap_or(Format::Csv)
}

fn json<T: Serialize>(value: &T) -> CmdResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Numeric(format!("cannot serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct Series {
    n: u32,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct SeriesTable<'a> {
    kernel: String,
    s: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    f: Option<Vec<f64>>,
    series: Vec<Series>,
}

fn series_csv(first: &[(&str, &[f64])], series: &[Series], prefix: &str, s: &[f64]) -> String {
    let mut out = String::from("s");
    for (name, _) in first {
        let _ = write!(out, ",{name}");
    }
    for col in series {
        let _ = write!(out, ",{prefix}{}", col.n);
    }
    out.push('\n');
    for (i, si) in s.iter().enumerate() {
        out.push_str(&fmt_f(*si));
        for (_, col) in first {
            let _ = write!(out, ",{}", fmt_f(col[i]));
        }
        for col in series {
            let _ = write!(out, ",{}", fmt_f(col.values[i]));
        }
        out.push('\n');
    }
    out
}

fn kernel_plot(o: &Opts) -> CmdResult<Output> {
    let cfg = quadrature(o)?;
    let k = kernel(o)?;
    let ns = n_list(o, &[2, 3, 4])?;
    let (a, b) = (o.window_lo.unwrap_or(1.0), o.window_hi.unwrap_or(5.0));
    LogInterval::new(a, b)?;
    let g = grid(o, 0.2, 25.0)?;
    let series = ns
        .iter()
        .map(|&n| {
            let values = g
                .points()
                .iter()
                .map(|&s| window_integral(k.as_ref(), n, a, b, s, &cfg))
                .collect::<crate::Result<Vec<f64>>>()?;
            Ok(Series { n, values })
        })
        .collect::<CmdResult<Vec<_>>>()?;
    let text = match format(o) {
        Format::Csv => series_csv(&[], &series, "value_n", g.points()),
        Format::Json => json(&SeriesTable {
            kernel: k.label(),
            s: g.points(),
            f: None,
            series,
        })?,
    };
    Ok(Output { text, verified: true })
}

fn approximate(o: &Opts) -> CmdResult<Output> {
    let cfg = quadrature(o)?;
    let k = kernel(o)?;
    let m = map(o);
    let f = signal(o)?;
    let ns = n_list(o, &[5, 10, 15, 20, 40])?;
    let g = grid(o, 0.5, 4.0)?;
    let fs: Vec<f64> = g.points().iter().map(|&s| f.profile(s)).collect();
    let series = ns
        .iter()
        .map(|&n| {
            let curve = operator_curve(k.as_ref(), &m, n, &f, &g, &cfg)?;
            let values = curve.iter().map(|v| v.as_scalar().unwrap_or(f64::NAN)).collect();
            Ok(Series { n, values })
        })
        .collect::<CmdResult<Vec<_>>>()?;
    let text = match format(o) {
        Format::Csv => series_csv(&[("f", &fs)], &series, "T_n", g.points()),
        Format::Json => json(&SeriesTable {
            kernel: k.label(),
            s: g.points(),
            f: Some(fs),
            series,
        })?,
    };
    Ok(Output { text, verified: true })
}

#[derive(Serialize)]
struct TailTableRow {
    delta: f64,
    n: u32,
    numeric: f64,
    analytic: Option<f64>,
    analytic_tag: Option<TailTag>,
    in_regime: Option<bool>,
    consistent: bool,
}

fn tail_table(o: &Opts) -> CmdResult<Output> {
    let cfg = quadrature(o)?;
    let k = kernel(o)?;
    let ns = n_list(o, &DEFAULT_N_LIST)?;
    let deltas = if o.delta.is_empty() {
        vec![1.5, 2.0, std::f64::consts::E]
    } else {
        o.delta.clone()
    };
    let mut rows = Vec::new();
    for &delta in &deltas {
        for &n in &ns {
            let t = tail_mass(k.as_ref(), n, delta, &cfg)?;
            rows.push(TailTableRow {
                delta,
                n,
                numeric: t.numeric,
                analytic: t.analytic.map(|a| a.value),
                analytic_tag: t.analytic.map(|a| a.tag),
                in_regime: t.analytic.map(|a| a.in_regime),
                consistent: t.consistent(1e-12),
            });
        }
    }
    let verified = rows.iter().all(|r| r.consistent);
    let text = match format(o) {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut out = String::from("delta,n,numeric_tail,analytic_tail,analytic_tag,in_regime\n");
            for r in &rows {
                let tag = match r.analytic_tag {
                    Some(TailTag::Exact) => "exact",
                    Some(TailTag::Bound) => "bound",
                    None => "none",
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f(r.delta),
                    r.n,
                    fmt_f(r.numeric),
                    r.analytic.map_or("nan".to_string(), fmt_f),
                    tag,
                    r.in_regime.map_or("none".to_string(), |b| b.to_string()),
                );
            }
            out
        }
    };
    Ok(Output { text, verified })
}

fn cmd_modular_table(o: &Opts) -> CmdResult<Output> {
    let cfg = quadrature(o)?;
    let k = kernel(o)?;
    let m = map(o);
    let f = signal(o)?;
    let ns = n_list(o, &[5, 10, 20, 40])?;
    let window = match (o.window_lo, o.window_hi) {
        (None, None) => default_window(&f),
        (lo, hi) => {
            let d = default_window(&f);
            LogInterval::new(lo.unwrap_or(d.lo()), hi.unwrap_or(d.hi()))?
        }
    };
    let report = modular_table(
        k.as_ref(),
        &m,
        &f,
        o.q.unwrap_or(2.0),
        o.a.unwrap_or(1.0),
        &ns,
        &window,
        &cfg,
    )?;
    let text = match format(o) {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut out = String::from("n,modular_error,window_lo,window_hi,tail_bound\n");
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    fmt_f(r.modular_error),
                    fmt_f(report.window_lo),
                    fmt_f(report.window_hi),
                    fmt_f(r.tail_bound)
                );
            }
            out
        }
    };
    Ok(Output { text, verified: true })
}

fn singularity(o: &Opts) -> CmdResult<Output> {
    if o.format == Some(Format::Csv) {
        return Err(usage("the singularity report is only available as JSON"));
    }
    let cfg = quadrature(o)?;
    let k = kernel(o)?;
    let m = map(o);
    let mut params = SingularityParams::default();
    if !o.n.is_empty() {
        params.n_list = n_list(o, &[])?;
    }
    if !o.delta.is_empty() {
        params.deltas = o.delta.clone();
    }
    let report = full_report(k.as_ref(), &m, &params, &cfg)?;
    Ok(Output {
        text: json(&report)?,
        verified: report.overall,
    })
}
