//! Command line front end: every experiment as a reproducible table.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::acceptance::{run_suite, SuiteConfig};
use crate::equilibrium::{band_edges, omega_prime_blend, omega_prime_periodic, Geometry};
use crate::error::{LabError, Result};
use crate::kernel::{
    christoffel_ratio, error_ledger, kernel, scaling_kernel, KernelReport, Residue,
};
use crate::numeric::fmt17;
use crate::oracles::{constant_coefficient_oracle, gaussian_oracle, DensityOracle};
use crate::oscsum::{sinc_limit_sum, sinc_limit_target, weighted_exponential_sum, OscSpec};
use crate::params::{ClassTag, ParameterModel};
use crate::poly::{eval_poly_derivative, eval_poly_sequence};

#[derive(Parser, Debug)]
#[command(
    name = "cdklab",
    version,
    about = "Christoffel-Darboux kernel experiments for Jacobi matrices"
)]
pub struct Cli {
    /// Worker threads for grid sweeps.
    #[arg(long, env = "CDKLAB_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ModelArg {
    /// Model description in JSON.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleName {
    /// Constant coefficients; taken from the model's envelope.
    Semicircle,
    /// `a_n = sqrt(n+1)`, `b_n = 0`.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OscKind {
    /// Weighted exponential sum with its bound bookkeeping.
    Exp,
    /// Double-sine average at moving points.
    Sinc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OscFixture {
    /// `gamma_k = 1/sqrt(k+1)`, `theta_k(x) = 1 + gamma_k x`.
    Canonical,
    /// `gamma_k = (k+1)^-s`, `theta_k(x) = theta0 + x + amp (k+1)^-q`.
    PowerLaw,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Polynomial values (and derivatives) up to degree n.
    Poly {
        #[command(flatten)]
        model: ModelArg,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x: Vec<f64>,
        #[arg(long)]
        n: usize,
        /// Associated family index.
        #[arg(long, default_value_t = 0)]
        shift: usize,
        /// Also emit first derivatives (shift 0 only).
        #[arg(long)]
        derivative: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Kernel by direct summation and by the closed form.
    Kernel {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        y: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Diagonal kernel against its normalizer.
    Ratio {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x: Vec<f64>,
        /// Restrict to degrees congruent to this residue modulo the window.
        #[arg(long)]
        residue: Option<usize>,
        /// Known orthogonality density for the predicted column.
        #[arg(long, value_enum)]
        oracle: Option<OracleName>,
        #[command(flatten)]
        output: Output,
    },
    /// Kernel at points scaled by the normalizer, against the sine kernel.
    Scaling {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        u: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        v: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Band intervals of the envelope, or of the blend for blend models.
    Bands {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        output: Output,
    },
    /// Equilibrium density in both forms.
    Density {
        #[command(flatten)]
        model: ModelArg,
        /// Evaluation points; defaults to Chebyshev points of every band.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Points per band when --x is omitted.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Emit NaN for points outside the bands instead of failing.
        #[arg(long)]
        tolerate_edges: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Weighted phase sums.
    Oscsum {
        #[arg(long, value_enum, default_value = "exp")]
        kind: OscKind,
        #[arg(long, value_enum, default_value = "canonical")]
        fixture: OscFixture,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        theta0: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.3)]
        amp: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        a: f64,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "0"
        )]
        b: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Error bound ledger.
    Ledger {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Points for the sup norms.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        grid: Vec<f64>,
        #[arg(long)]
        residue: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Acceptance battery with one PASS/FAIL line per criterion.
    Suite {
        /// Criterion ids to run; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Multiplier applied to every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance: f64,
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        /// Also write the individual checks as a table.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(usize),
    B(bool),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => fmt17(*v),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => serde_json::Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::U(v) => Value::from(*v),
            Cell::B(v) => Value::from(*v),
            Cell::S(v) => Value::from(v.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::F(v.unwrap_or(f64::NAN))
    }
}

/// Header plus rows, written in row order.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| LabError::numerical(format!("csv: {e}"));
                w.write_record(&self.header).map_err(io)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::csv)).map_err(io)?;
                }
                w.into_inner()
                    .map_err(|e| LabError::numerical(format!("csv: {e}")))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| (h.to_string(), c.json()))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut s = serde_json::to_vec_pretty(&rows)
                    .map_err(|e| LabError::numerical(e.to_string()))?;
                s.push(b'\n');
                Ok(s)
            }
        }
    }
}

fn emit(table: &Table, output: &Output) -> Result<()> {
    write_bytes(&table.render(output.format)?, output.out.as_deref())
}

fn write_bytes(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| LabError::config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| LabError::numerical(format!("stdout: {e}")))
        }
    }
}

fn check_degrees(n: &[usize]) -> Result<()> {
    if n.is_empty() {
        return Err(LabError::config("--n needs at least one value"));
    }
    if n[0] == 0 || n.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::config(
            "--n values must be positive and increasing",
        ));
    }
    Ok(())
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(LabError::config(format!(
            "--{name} needs at least one value"
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(LabError::config(format!("--{name} values must be finite")));
    }
    Ok(())
}

fn load(m: &ModelArg) -> Result<ParameterModel> {
    let model = ParameterModel::load(&m.model)?;
    for w in model.class_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(model)
}

fn geometry(model: &ParameterModel) -> Geometry {
    if model.class() == ClassTag::PeriodicBlend {
        Geometry::Blend
    } else {
        Geometry::Periodic
    }
}

fn oracle_for(model: &ParameterModel, name: OracleName) -> Result<DensityOracle> {
    match name {
        OracleName::Semicircle => {
            let env = model.envelope();
            let (a, b) = (env.alpha(0), env.beta(0));
            if env.alphas().iter().any(|&v| v != a) || env.betas().iter().any(|&v| v != b) {
                return Err(LabError::config(
                    "the semicircle oracle needs a constant envelope",
                ));
            }
            Ok(constant_coefficient_oracle(a, b).1)
        }
        OracleName::Gaussian => Ok(gaussian_oracle().1),
    }
}

fn grid_pairs<A: Copy + Sync, B: Copy + Sync>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect()
}

fn report_row(r: &KernelReport) -> Vec<Cell> {
    vec![
        r.n.into(),
        r.x.into(),
        r.k_direct.into(),
        r.k_cd.into(),
        r.rho.into(),
        r.rho_alt.into(),
        r.predicted.into(),
        r.ratio.into(),
        r.observed_error.into(),
        r.mu_hat.into(),
    ]
}

fn cmd_poly(
    model: &ModelArg,
    xs: &[f64],
    n: usize,
    shift: usize,
    derivative: bool,
    output: &Output,
) -> Result<()> {
    check_grid("x", xs)?;
    if derivative && shift != 0 {
        return Err(LabError::config(
            "--derivative is only available for shift 0",
        ));
    }
    let model = load(model)?;
    let header: &[&str] = if derivative {
        &["x", "n", "p", "dp"]
    } else {
        &["x", "n", "p"]
    };
    let mut t = Table::new(header);
    // (x, values, derivatives, overflowed)
    type Sample = (f64, Vec<f64>, Option<Vec<f64>>, bool);
    let samples: Vec<Result<Sample>> = xs
        .par_iter()
        .map(|&x| {
            if derivative {
                let s = eval_poly_derivative(&model, x, n)?;
                Ok((x, s.values, Some(s.derivs), s.overflowed))
            } else {
                let s = eval_poly_sequence(&model, shift, x, n)?;
                Ok((x, s.values, None, s.overflowed))
            }
        })
        .collect();
    for s in samples {
        let (x, values, derivs, overflowed) = s?;
        if overflowed {
            eprintln!(
                "warning: overflow at x = {x} after degree {}",
                values.len().saturating_sub(1)
            );
        }
        for (k, v) in values.iter().enumerate() {
            let mut row = vec![x.into(), k.into(), (*v).into()];
            if let Some(d) = &derivs {
                row.push(d[k].into());
            }
            t.rows.push(row);
        }
    }
    emit(&t, output)
}

fn cmd_kernel(
    model: &ModelArg,
    ns: &[usize],
    xs: &[f64],
    ys: &[f64],
    output: &Output,
) -> Result<()> {
    check_degrees(ns)?;
    check_grid("x", xs)?;
    check_grid("y", ys)?;
    let model = load(model)?;
    let jobs: Vec<(usize, (f64, f64))> = grid_pairs(ns, &grid_pairs(xs, ys));
    let rows: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(n, (x, y))| {
            let k = kernel(&model, n, x, y)?;
            Ok(vec![
                n.into(),
                x.into(),
                y.into(),
                k.direct.into(),
                k.cd.into(),
            ])
        })
        .collect();
    let mut t = Table::new(&["n", "x", "y", "K_direct", "K_cd"]);
    t.rows = rows.into_iter().collect::<Result<_>>()?;
    emit(&t, output)
}

fn cmd_ratio(
    model: &ModelArg,
    ns: &[usize],
    xs: &[f64],
    residue: Option<usize>,
    oracle: Option<OracleName>,
    output: &Output,
) -> Result<()> {
    check_degrees(ns)?;
    check_grid("x", xs)?;
    let model = load(model)?;
    let oracle = oracle.map(|o| oracle_for(&model, o)).transpose()?;
    let residue = residue.map_or(Residue::All, Residue::Class);
    let jobs = grid_pairs(ns, xs);
    let rows: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(n, x)| {
            Ok(report_row(&christoffel_ratio(
                &model,
                residue,
                n,
                x,
                oracle.as_ref(),
            )?))
        })
        .collect();
    let mut t = Table::new(&[
        "n",
        "x",
        "K_direct",
        "K_cd",
        "rho",
        "rho_alt",
        "predicted",
        "ratio",
        "observed_error",
        "mu_hat",
    ]);
    t.rows = rows.into_iter().collect::<Result<_>>()?;
    emit(&t, output)
}

fn cmd_scaling(
    model: &ModelArg,
    ns: &[usize],
    x: f64,
    us: &[f64],
    vs: &[f64],
    output: &Output,
) -> Result<()> {
    check_degrees(ns)?;
    check_grid("u", us)?;
    check_grid("v", vs)?;
    let model = load(model)?;
    let jobs = grid_pairs(ns, &grid_pairs(us, vs));
    let rows: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(n, (u, v))| {
            let r = scaling_kernel(&model, n, x, u, v)?;
            Ok(vec![
                n.into(),
                x.into(),
                u.into(),
                v.into(),
                r.rho.into(),
                r.k_direct.into(),
                r.k_cd.into(),
                r.ratio.into(),
                r.predicted.into(),
                r.observed_error.into(),
            ])
        })
        .collect();
    let mut t = Table::new(&[
        "n",
        "x",
        "u",
        "v",
        "rho",
        "K_direct",
        "K_cd",
        "ratio",
        "predicted",
        "error",
    ]);
    t.rows = rows.into_iter().collect::<Result<_>>()?;
    emit(&t, output)
}

fn cmd_bands(model: &ModelArg, output: &Output) -> Result<()> {
    let model = load(model)?;
    let mut t = Table::new(&["band", "left", "right"]);
    for (k, [l, r]) in band_edges(model.envelope(), geometry(&model))
        .into_iter()
        .enumerate()
    {
        t.rows.push(vec![k.into(), l.into(), r.into()]);
    }
    emit(&t, output)
}

fn cmd_density(
    model: &ModelArg,
    xs: &[f64],
    samples: usize,
    tolerate: bool,
    output: &Output,
) -> Result<()> {
    let model = load(model)?;
    let env = model.envelope();
    let geo = geometry(&model);
    let points: Vec<f64> = if xs.is_empty() {
        if samples == 0 {
            return Err(LabError::config("--samples must be positive"));
        }
        band_edges(env, geo)
            .into_iter()
            .flat_map(|[l, r]| {
                let (c, h) = ((l + r) / 2.0, (r - l) / 2.0);
                (0..samples).map(move |k| {
                    c - h * (std::f64::consts::PI * (k as f64 + 0.5) / samples as f64).cos()
                })
            })
            .collect()
    } else {
        check_grid("x", xs)?;
        xs.to_vec()
    };
    let rows: Vec<Result<Vec<Cell>>> = points
        .par_iter()
        .map(|&x| {
            let d = match geo {
                Geometry::Periodic => omega_prime_periodic(env, x),
                Geometry::Blend => omega_prime_blend(env, x),
            };
            match d {
                Ok(d) => Ok(vec![x.into(), d.sum_form.into(), d.trace_form.into()]),
                Err(LabError::NotInBand { .. } | LabError::BandEdge { .. }) if tolerate => {
                    Ok(vec![x.into(), f64::NAN.into(), f64::NAN.into()])
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut t = Table::new(&["x", "sum_form", "trace_form"]);
    t.rows = rows.into_iter().collect::<Result<_>>()?;
    emit(&t, output)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oscsum(
    kind: OscKind,
    fixture: OscFixture,
    (s, theta0, amp, q): (f64, f64, f64, f64),
    ns: &[usize],
    x: f64,
    a: f64,
    bs: &[f64],
    output: &Output,
) -> Result<()> {
    check_degrees(ns)?;
    let spec = match fixture {
        OscFixture::Canonical => OscSpec::canonical(),
        OscFixture::PowerLaw => {
            if !(s > 0.0 && s <= 1.0) {
                return Err(LabError::config(
                    "--s must lie in (0, 1] so the weights are not summable",
                ));
            }
            OscSpec::power_law(s, theta0, amp, q)
        }
    };
    for w in spec.hypothesis_warnings(x, *ns.last().expect("checked non-empty")) {
        eprintln!("warning: {w}");
    }
    let t = match kind {
        OscKind::Exp => {
            let rows: Vec<Result<Vec<Cell>>> = ns
                .par_iter()
                .map(|&n| {
                    let r = weighted_exponential_sum(&spec, x, n)?;
                    Ok(vec![
                        n.into(),
                        x.into(),
                        r.re.into(),
                        r.im.into(),
                        r.total_weight.into(),
                        r.normalized.into(),
                        r.bound_terms.into(),
                        r.fitted_constant.into(),
                    ])
                })
                .collect();
            let mut t = Table::new(&[
                "n",
                "x",
                "re",
                "im",
                "total_weight",
                "normalized",
                "bound_terms",
                "fitted_constant",
            ]);
            t.rows = rows.into_iter().collect::<Result<_>>()?;
            t
        }
        OscKind::Sinc => {
            check_grid("b", bs)?;
            let psi = spec.psi.as_ref().map(|p| p(x));
            let jobs = grid_pairs(ns, bs);
            let rows: Vec<Result<Vec<Cell>>> = jobs
                .par_iter()
                .map(|&(n, b)| {
                    let v = sinc_limit_sum(&spec, n, x, a, b)?;
                    let target = psi.map(|p| sinc_limit_target(p, b - a));
                    Ok(vec![
                        n.into(),
                        x.into(),
                        a.into(),
                        b.into(),
                        v.into(),
                        target.into(),
                    ])
                })
                .collect();
            let mut t = Table::new(&["n", "x", "a", "b", "value", "target"]);
            t.rows = rows.into_iter().collect::<Result<_>>()?;
            t
        }
    };
    emit(&t, output)
}

fn cmd_ledger(
    model: &ModelArg,
    ns: &[usize],
    grid: &[f64],
    residue: Option<usize>,
    output: &Output,
) -> Result<()> {
    check_degrees(ns)?;
    check_grid("grid", grid)?;
    let model = load(model)?;
    let reports: Vec<Result<_>> = ns
        .par_iter()
        .map(|&n| error_ledger(&model, residue, n, grid))
        .collect();
    let mut t = Table::new(&["n", "ledger", "truncated"]);
    for r in reports {
        let r = r?;
        for w in &r.warnings {
            eprintln!("warning: n = {}: {w}", r.n);
        }
        t.rows
            .push(vec![r.n.into(), r.value.into(), Cell::B(r.truncated)]);
    }
    emit(&t, output)
}

fn cmd_suite(
    only: &[u32],
    tolerance: f64,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<bool> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(LabError::config(
            "--tolerance must be a positive multiplier",
        ));
    }
    let cfg = SuiteConfig {
        seed,
        tolerance_scale: tolerance,
    };
    let reports = run_suite(&cfg, only)?;
    let mut t = Table::new(&["criterion", "check", "passed", "detail"]);
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        write!(stdout, "{r}").map_err(|e| LabError::numerical(format!("stdout: {e}")))?;
        for c in &r.checks {
            t.rows.push(vec![
                (r.id as usize).into(),
                Cell::S(c.label.clone()),
                Cell::B(c.passed),
                Cell::S(c.detail.clone()),
            ]);
        }
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(stdout, "{passed}/{} criteria passed", reports.len())
        .map_err(|e| LabError::numerical(e.to_string()))?;
    drop(stdout);
    if let Some(p) = out {
        write_bytes(&t.render(format)?, Some(p))?;
    }
    Ok(passed == reports.len())
}

fn dispatch(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(LabError::config("thread count must be positive"));
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Poly {
            model,
            x,
            n,
            shift,
            derivative,
            output,
        } => cmd_poly(&model, &x, n, shift, derivative, &output)?,
        Command::Kernel {
            model,
            n,
            x,
            y,
            output,
        } => cmd_kernel(&model, &n, &x, &y, &output)?,
        Command::Ratio {
            model,
            n,
            x,
            residue,
            oracle,
            output,
        } => cmd_ratio(&model, &n, &x, residue, oracle, &output)?,
        Command::Scaling {
            model,
            n,
            x,
            u,
            v,
            output,
        } => cmd_scaling(&model, &n, x, &u, &v, &output)?,
        Command::Bands { model, output } => cmd_bands(&model, &output)?,
        Command::Density {
            model,
            x,
            samples,
            tolerate_edges,
            output,
        } => cmd_density(&model, &x, samples, tolerate_edges, &output)?,
        Command::Oscsum {
            kind,
            fixture,
            s,
            theta0,
            amp,
            q,
            n,
            x,
            a,
            b,
            output,
        } => cmd_oscsum(kind, fixture, (s, theta0, amp, q), &n, x, a, &b, &output)?,
        Command::Ledger {
            model,
            n,
            grid,
            residue,
            output,
        } => cmd_ledger(&model, &n, &grid, residue, &output)?,
        Command::Suite {
            only,
            tolerance,
            seed,
            out,
            format,
        } => {
            if !cmd_suite(&only, tolerance, seed, out.as_deref(), format)? {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code: 0 on success, 2 for configuration
/// problems, 1 for numerical failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
