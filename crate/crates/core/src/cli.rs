//! The `painleve` command line.
//!
//! Reports go to stdout or `--out FILE`. Exit status: 0 when every check passes,
//! 1 when something failed, 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::backlund::{
    self, apply_to_solution, find_shift_words, is_commutative, parse_solution_word,
    riccati_leaf_value, sigma_group, SolutionGenerator,
};
use crate::isomonodromy::ode::{IntegrateOptions, Path, Trajectory};
use crate::isomonodromy::{
    flow_rhs, integrate_piv, lax_residual, piv_fd_residuals, reducible_lax_residual, riccati_rhs,
    LaxPairData, PivState, RiccatiSign,
};
use crate::monodromy::{
    charpoly_formula, closed_form, direction_table_deviation, fiber_singularity, invariant_flags,
    matrix_invariants, rank3_top_monodromy_exact, singular_directions, stokes_product, Rank3Stokes,
};
use crate::noumi_yamada::{self, ny_lax_residual, ny_rhs, EpsTriple, NyState};
use crate::rank2_moduli::{parse_rational, reducible_presence, ThetaParams};
use crate::{Error, C64};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "painleve",
    version,
    about = "Painlevé IV: flows, Lax pairs, Bäcklund maps and Stokes data"
)]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate PIV or the symmetric system along a path in t.
    Integrate {
        #[command(subcommand)]
        system: IntegrateSystem,
    },
    /// Run a verification batch.
    Verify(VerifyArgs),
    /// Integrate PIV and push the trajectory through a word in s1, s2, s3, p.
    Backlund(BacklundArgs),
    /// Singularity, Jordan and flag data of M(x) at x = (x1, x2, x3, x4).
    Classify(ClassifyArgs),
    /// Which reducible types occur for rational (θ0, θ∞).
    Presence(PresenceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug, Clone)]
pub struct PathArgs {
    /// Path vertices separated by ':', e.g. `0:1` or `0:1+1i:2`.
    #[arg(long = "t", value_parser = parse_path)]
    pub path: Path,
    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    /// Arc-length spacing of the output grid.
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(clap::Args, Debug, Clone)]
pub struct PivArgs {
    #[arg(long = "theta0", value_parser = parse_c64, allow_hyphen_values = true)]
    pub theta0: C64,
    #[arg(long = "thetainf", value_parser = parse_c64, allow_hyphen_values = true)]
    pub theta_inf: C64,
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true)]
    pub q0: C64,
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true)]
    pub qp0: C64,
}

#[derive(Subcommand, Debug)]
pub enum IntegrateSystem {
    Piv {
        #[command(flatten)]
        init: PivArgs,
        #[command(flatten)]
        path: PathArgs,
    },
    Ny {
        /// ε1,ε2,ε3 with zero sum.
        #[arg(long, value_parser = parse_c64_list::<3>, allow_hyphen_values = true)]
        eps: [C64; 3],
        /// f0,f1,f2 at the start of the path.
        #[arg(long, value_parser = parse_c64_list::<3>, allow_hyphen_values = true)]
        f: [C64; 3],
        /// Allowed drift of f0 + f1 + f2 − t.
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        drift_tol: f64,
        #[command(flatten)]
        path: PathArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Lax,
    NyLax,
    ReducibleLax,
    Lattice,
    StokesDirections,
    Charpoly,
    Group,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupAction {
    Sigma,
    Tilde,
    All,
}

#[derive(clap::Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: Check,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pass threshold on the residual.
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = GroupAction::All)]
    pub action: GroupAction,
    /// Longest word searched for the shift elements.
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
}

#[derive(clap::Args, Debug, Clone)]
pub struct BacklundArgs {
    /// Word in s1, s2, s3, p acting right to left; `id` for the identity.
    #[arg(long)]
    pub word: String,
    #[command(flatten)]
    pub init: PivArgs,
    #[command(flatten)]
    pub path: PathArgs,
    /// Abort when |q' + q² + tq/2 + (1 − θ0)/2| drops below this before an s2.
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub abort_margin: f64,
    /// Warn below this leaf value.
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub warn_margin: f64,
    /// Pass threshold for the residual column.
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub residual_tol: f64,
}

#[derive(clap::Args, Debug, Clone)]
pub struct ClassifyArgs {
    #[arg(long, value_parser = parse_c64_list::<4>, allow_hyphen_values = true)]
    pub x: [C64; 4],
    /// Eigenvalue ordering μ1,μ2,μ3 for the flag computation; defaults to every ordering
    /// of the computed spectrum.
    #[arg(long, value_parser = parse_c64_list::<3>, allow_hyphen_values = true)]
    pub mu: Option<[C64; 3]>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct PresenceArgs {
    #[arg(long = "theta0", allow_hyphen_values = true)]
    pub theta0: String,
    #[arg(long = "thetainf", allow_hyphen_values = true)]
    pub theta_inf: String,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} must be positive"))
    }
}

pub fn parse_c64(s: &str) -> std::result::Result<C64, String> {
    C64::from_str(s.trim()).map_err(|_| format!("not a complex number: {s}"))
}

fn parse_c64_list<const N: usize>(s: &str) -> std::result::Result<[C64; N], String> {
    let v: Vec<C64> = s
        .split(',')
        .map(parse_c64)
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<C64>| format!("expected {N} values, got {}", v.len()))
}

fn parse_path(s: &str) -> std::result::Result<Path, String> {
    let v: Vec<C64> = s
        .split(':')
        .map(parse_c64)
        .collect::<std::result::Result<_, _>>()?;
    if v.len() < 2 {
        return Err("a path needs a start and an end, e.g. 0:1".into());
    }
    Path::polygon(v).map_err(|e| e.to_string())
}

/// Outcome of a subcommand before it is written out.
struct Report {
    body: String,
    pass: bool,
}

/// Parses `args` (including the program name) and runs the command, writing the
/// report to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return if code == 0 { EXIT_PASS } else { EXIT_USAGE };
        }
    };
    let result = match &cli.command {
        Command::Integrate { system } => cmd_integrate(system),
        Command::Verify(v) => cmd_verify(v),
        Command::Backlund(b) => cmd_backlund(b, stderr),
        Command::Classify(c) => cmd_classify(c),
        Command::Presence(p) => cmd_presence(p),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return match e {
                Error::InvalidInput(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            };
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &report.body).map_err(|e| e.to_string()),
        None => stdout
            .write_all(report.body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_FAIL;
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cj(z: C64) -> Value {
    json!([z.re, z.im])
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_c(out: &mut String, z: C64) {
    let _ = write!(out, ",{},{}", num(z.re), num(z.im));
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

fn options(p: &PathArgs) -> IntegrateOptions {
    IntegrateOptions {
        tol: p.tol,
        sample_step: Some(p.step),
        ..IntegrateOptions::default()
    }
}

/// PIV residual along uniformly sampled (t, q, q'), or `None` when the samples do
/// not allow the finite difference (too few, or a path with corners).
fn fd_residual(states: &[PivState], p: &ThetaParams) -> Option<f64> {
    let ts: Vec<C64> = states.iter().map(|s| s.t).collect();
    let q: Vec<C64> = states.iter().map(|s| s.q).collect();
    let qp: Vec<C64> = states.iter().map(|s| s.qprime).collect();
    piv_fd_residuals(&ts, &q, &qp, p)
        .ok()
        .map(|r| r.into_iter().fold(0.0, f64::max))
}

fn piv_states(traj: &Trajectory) -> Vec<PivState> {
    traj.samples
        .iter()
        .map(|s| PivState {
            t: s.t,
            q: s.y[0],
            qprime: s.y[1],
        })
        .collect()
}

fn cmd_integrate(sys: &IntegrateSystem) -> crate::Result<Report> {
    match sys {
        IntegrateSystem::Piv { init, path } => {
            let p = ThetaParams::new(init.theta0, init.theta_inf);
            let start = PivState {
                t: path.path.start(),
                q: init.q0,
                qprime: init.qp0,
            };
            let traj = integrate_piv(&p, start, &path.path, &options(path))?;
            let states = piv_states(&traj);
            let resid = fd_residual(&states, &p);
            let footer = vec![
                ("termination", Value::from(traj.termination.label())),
                ("max_step_error", Value::from(traj.max_error)),
                ("fd_residual", resid.map(Value::from).unwrap_or(Value::Null)),
            ];
            let rows: Vec<[C64; 2]> = states.iter().map(|s| [s.q, s.qprime]).collect();
            let ts: Vec<C64> = states.iter().map(|s| s.t).collect();
            let body = render_rows(path.format, &["q", "qp"], &ts, &rows, &[], &footer);
            Ok(Report {
                body,
                pass: traj.completed(),
            })
        }
        IntegrateSystem::Ny {
            eps,
            f,
            drift_tol,
            path,
        } => {
            let e = EpsTriple::try_new(eps[0], eps[1], eps[2])?;
            let e2 = e;
            let traj = crate::isomonodromy::ode::integrate(
                move |t, y| {
                    Ok(ny_rhs(
                        &NyState {
                            t,
                            f: [y[0], y[1], y[2]],
                        },
                        &e2,
                    )
                    .to_vec())
                },
                f,
                &path.path,
                &IntegrateOptions {
                    watch: vec![0, 1, 2],
                    ..options(path)
                },
            )?;
            let offset = f[0] + f[1] + f[2] - path.path.start();
            let drift = traj
                .samples
                .iter()
                .map(|s| (s.y[0] + s.y[1] + s.y[2] - s.t - offset).norm())
                .fold(0.0, f64::max);
            let ts: Vec<C64> = traj.samples.iter().map(|s| s.t).collect();
            let rows: Vec<[C64; 3]> = traj
                .samples
                .iter()
                .map(|s| [s.y[0], s.y[1], s.y[2]])
                .collect();
            let footer = vec![
                ("termination", Value::from(traj.termination.label())),
                ("max_step_error", Value::from(traj.max_error)),
                ("sum_drift", Value::from(drift)),
            ];
            let body = render_rows(path.format, &["f0", "f1", "f2"], &ts, &rows, &[], &footer);
            Ok(Report {
                body,
                pass: traj.completed() && drift <= *drift_tol,
            })
        }
    }
}

fn render_rows<const N: usize>(
    format: Format,
    names: &[&str],
    ts: &[C64],
    rows: &[[C64; N]],
    extra: &[(&str, Vec<f64>)],
    footer: &[(&str, Value)],
) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("t_re,t_im");
            for n in names {
                let _ = write!(out, ",{n}_re,{n}_im");
            }
            for (n, _) in extra {
                let _ = write!(out, ",{n}");
            }
            out.push('\n');
            for (i, (t, row)) in ts.iter().zip(rows).enumerate() {
                let _ = write!(out, "{},{}", num(t.re), num(t.im));
                for z in row {
                    csv_c(&mut out, *z);
                }
                for (_, col) in extra {
                    let _ = write!(out, ",{}", num(col[i]));
                }
                out.push('\n');
            }
            out.push('#');
            for (i, (k, v)) in footer.iter().enumerate() {
                let v = match v {
                    Value::Number(n) => n.as_f64().map(num).unwrap_or_else(|| n.to_string()),
                    Value::String(s) => s.clone(),
                    Value::Null => "na".into(),
                    other => other.to_string(),
                };
                let _ = write!(out, "{}{k}={v}", if i == 0 { " " } else { "," });
            }
            out.push('\n');
            out
        }
        Format::Json => {
            let samples: Vec<Value> = ts
                .iter()
                .zip(rows)
                .enumerate()
                .map(|(i, (t, row))| {
                    let mut m = serde_json::Map::new();
                    m.insert("t".into(), cj(*t));
                    for (n, z) in names.iter().zip(row) {
                        m.insert((*n).into(), cj(*z));
                    }
                    for (n, col) in extra {
                        m.insert((*n).into(), Value::from(col[i]));
                    }
                    Value::Object(m)
                })
                .collect();
            let mut top = serde_json::Map::new();
            top.insert("schema".into(), json!(1));
            top.insert("samples".into(), Value::Array(samples));
            for (k, v) in footer {
                top.insert((*k).into(), v.clone());
            }
            to_json(&Value::Object(top))
        }
    }
}

// ---------------------------------------------------------------- verify

fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64))
}

fn rc(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

struct CheckResult {
    name: &'static str,
    max_residual: f64,
    tolerance: f64,
    samples: usize,
    extra: Vec<(&'static str, Value)>,
}

impl CheckResult {
    fn pass(&self) -> bool {
        self.max_residual <= self.tolerance
    }

    fn json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("max_residual".into(), json!(self.max_residual));
        m.insert("tolerance".into(), json!(self.tolerance));
        m.insert("samples".into(), json!(self.samples));
        m.insert("pass".into(), json!(self.pass()));
        for (k, v) in &self.extra {
            m.insert((*k).into(), v.clone());
        }
        Value::Object(m)
    }
}

/// Runs `f` on `n` independently seeded samples in parallel and returns the largest
/// residual; errors count as infinite.
fn batch<F>(n: usize, seed: u64, f: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> crate::Result<f64> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(&mut sample_rng(seed, i)).unwrap_or(f64::INFINITY))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

fn rank2_lax_sample(rng: &mut ChaCha8Rng) -> crate::Result<f64> {
    let q = loop {
        let q = rc(rng, 2.0);
        if q.norm() >= 0.1 {
            break q;
        }
    };
    let (a0, t) = (rc(rng, 2.0), rc(rng, 2.0));
    let p = ThetaParams::new(rc(rng, 2.0), rc(rng, 2.0));
    let d = LaxPairData::new(q, a0, t, p)?;
    let (qd, ad) = flow_rhs(t, q, a0, &p)?;
    Ok(lax_residual(&d, qd, ad).max_abs())
}

fn ny_lax_sample(rng: &mut ChaCha8Rng) -> crate::Result<f64> {
    let e = EpsTriple::new(rc(rng, 1.0), rc(rng, 1.0));
    let s = NyState::on_locus(rc(rng, 2.0), rc(rng, 2.0), rc(rng, 2.0));
    Ok(ny_lax_residual(&s, &e).max_abs())
}

fn reducible_sample(rng: &mut ChaCha8Rng) -> crate::Result<f64> {
    let sign = if rng.gen_bool(0.5) {
        RiccatiSign::Plus
    } else {
        RiccatiSign::Minus
    };
    let (q, t, d) = (rc(rng, 2.0), rc(rng, 2.0), rc(rng, 2.0));
    Ok(reducible_lax_residual(q, riccati_rhs(t, q, d, sign), t, d, sign).max_abs())
}

fn lattice_sample(rng: &mut ChaCha8Rng) -> crate::Result<f64> {
    let t = rc(rng, 3.0);
    Ok(noumi_yamada::verify_h_basis_change(t)?.max(noumi_yamada::verify_lambda1(t)?))
}

fn charpoly_sample(rng: &mut ChaCha8Rng) -> crate::Result<f64> {
    let x = [0; 4].map(|_| rc(rng, 1.0));
    let p = stokes_product(x);
    let c = closed_form(x);
    let mut dev: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            dev = dev.max((p[i][j] - c[i][j]).norm());
        }
    }
    let (e1, e2) = charpoly_formula(x);
    let (tr, m2, det) = matrix_invariants(&p);
    Ok(dev
        .max((e1 - tr).norm())
        .max((e2 - m2).norm())
        .max((det - 1.0).norm()))
}

fn charpoly_exact_sample(rng: &mut ChaCha8Rng) -> crate::Result<f64> {
    let x =
        [0; 4].map(|_| num_rational::Rational64::new(rng.gen_range(-60..60), rng.gen_range(1..30)));
    let m = rank3_top_monodromy_exact(x)?;
    let (tr, m2, det) = matrix_invariants(&m);
    let ok = charpoly_formula(x) == (tr, m2) && det == num_rational::Rational64::from_integer(1);
    Ok(if ok { 0.0 } else { f64::INFINITY })
}

fn cmd_verify(v: &VerifyArgs) -> crate::Result<Report> {
    let n = v.samples;
    let simple = |name, f: fn(&mut ChaCha8Rng) -> crate::Result<f64>| CheckResult {
        name,
        max_residual: batch(n, v.seed, f),
        tolerance: v.tol,
        samples: n,
        extra: vec![],
    };
    let results = match v.check {
        Check::Lax => vec![simple("rank2-lax", rank2_lax_sample)],
        Check::NyLax => vec![simple("ny-lax", ny_lax_sample)],
        Check::ReducibleLax => vec![simple("reducible-lax", reducible_sample)],
        Check::Lattice => vec![simple("lattice-h-basis", lattice_sample)],
        Check::Charpoly => vec![
            simple("charpoly-float", charpoly_sample),
            CheckResult {
                tolerance: 0.0,
                ..simple("charpoly-exact", charpoly_exact_sample)
            },
        ],
        Check::StokesDirections => {
            let rows: Vec<Value> = singular_directions()
                .iter()
                .map(|r| json!({"k": r.k, "l": r.l, "phi": r.phi, "d": r.d}))
                .collect();
            vec![CheckResult {
                name: "stokes-directions",
                max_residual: direction_table_deviation(),
                tolerance: v.tol,
                samples: rows.len(),
                extra: vec![("rows", Value::Array(rows))],
            }]
        }
        Check::Group => {
            let mut out = Vec::new();
            if matches!(v.action, GroupAction::Sigma | GroupAction::All) {
                let g = sigma_group();
                let ok = g.len() == 16 && is_commutative(&g);
                out.push(CheckResult {
                    name: "sigma-group",
                    max_residual: if ok { 0.0 } else { 1.0 },
                    tolerance: 0.0,
                    samples: g.len(),
                    extra: vec![
                        ("order", json!(g.len())),
                        ("commutative", json!(is_commutative(&g))),
                    ],
                });
            }
            if matches!(v.action, GroupAction::Tilde | GroupAction::All) {
                let (w0, winf) = find_shift_words(v.max_len);
                let show = |w: &Option<backlund::GroupWord>| {
                    w.as_ref()
                        .map(|w| json!(w.to_string()))
                        .unwrap_or(Value::Null)
                };
                out.push(CheckResult {
                    name: "tilde-shifts",
                    max_residual: if w0.is_some() && winf.is_some() {
                        0.0
                    } else {
                        1.0
                    },
                    tolerance: 0.0,
                    samples: 2,
                    extra: vec![
                        ("theta0_shift_word", show(&w0)),
                        ("thetainf_shift_word", show(&winf)),
                    ],
                });
            }
            out
        }
    };
    let pass = results.iter().all(CheckResult::pass);
    let body = to_json(&json!({
        "schema": 1,
        "command": "verify",
        "seed": v.seed,
        "samples": n,
        "checks": results.iter().map(CheckResult::json).collect::<Vec<_>>(),
        "pass": pass,
    }));
    Ok(Report { body, pass })
}

// ---------------------------------------------------------------- backlund

fn cmd_backlund(b: &BacklundArgs, stderr: &mut dyn Write) -> crate::Result<Report> {
    let word = parse_solution_word(&b.word)?;
    let p = ThetaParams::new(b.init.theta0, b.init.theta_inf);
    let start = PivState {
        t: b.path.path.start(),
        q: b.init.q0,
        qprime: b.init.qp0,
    };
    let traj = integrate_piv(&p, start, &b.path.path, &options(&b.path))?;
    let states = piv_states(&traj);

    // leaf values before every s2, smallest first
    let mut min_leaf: Option<C64> = None;
    let mut out_states = Vec::with_capacity(states.len());
    let mut target = p;
    for s in &states {
        let (mut cur, mut cp) = (*s, p);
        for &g in word.iter().rev() {
            if g == SolutionGenerator::S2 {
                let leaf = riccati_leaf_value(cur.q, cur.qprime, cur.t, &cp);
                if min_leaf.is_none_or(|m| leaf.norm() < m.norm()) {
                    min_leaf = Some(leaf);
                }
                if leaf.norm() < b.abort_margin {
                    return Err(Error::SingularLocus { leaf });
                }
            }
            (cur, cp) = apply_to_solution(g, &cur, &cp)?;
        }
        target = cp;
        out_states.push(cur);
    }
    if let Some(l) = min_leaf {
        if l.norm() < b.warn_margin {
            let _ = writeln!(
                stderr,
                "warning: close to the singular locus, leaf identity value {:.3e}",
                l.norm()
            );
        }
    }
    let ts: Vec<C64> = out_states.iter().map(|s| s.t).collect();
    let q: Vec<C64> = out_states.iter().map(|s| s.q).collect();
    let qp: Vec<C64> = out_states.iter().map(|s| s.qprime).collect();
    let (resid, fd_ok) = match piv_fd_residuals(&ts, &q, &qp, &target) {
        Ok(r) => (r, true),
        Err(_) => (vec![f64::NAN; ts.len()], false),
    };
    let worst = resid.iter().copied().fold(0.0, f64::max);
    let rows: Vec<[C64; 2]> = out_states.iter().map(|s| [s.q, s.qprime]).collect();
    let footer = vec![
        ("target_theta0_re", Value::from(target.theta0.re)),
        ("target_theta0_im", Value::from(target.theta0.im)),
        ("target_thetainf_re", Value::from(target.theta_inf.re)),
        ("target_thetainf_im", Value::from(target.theta_inf.im)),
        ("termination", Value::from(traj.termination.label())),
        (
            "max_residual",
            if fd_ok {
                Value::from(worst)
            } else {
                Value::Null
            },
        ),
        (
            "min_leaf",
            min_leaf
                .map(|l| Value::from(l.norm()))
                .unwrap_or(Value::Null),
        ),
    ];
    let body = render_rows(
        b.path.format,
        &["q", "qp"],
        &ts,
        &rows,
        &[("piv_residual", resid)],
        &footer,
    );
    let pass = traj.completed() && (!fd_ok || worst <= b.residual_tol);
    Ok(Report { body, pass })
}

// ---------------------------------------------------------------- classify, presence

fn permutations(mu: [C64; 3]) -> Vec<[C64; 3]> {
    let mut out: Vec<[C64; 3]> = Vec::new();
    for (i, j, k) in [
        (0, 1, 2),
        (0, 2, 1),
        (1, 0, 2),
        (1, 2, 0),
        (2, 0, 1),
        (2, 1, 0),
    ] {
        let m = [mu[i], mu[j], mu[k]];
        if !out.iter().any(|o| o == &m) {
            out.push(m);
        }
    }
    out
}

fn cmd_classify(c: &ClassifyArgs) -> crate::Result<Report> {
    let x = Rank3Stokes::new(c.x);
    let rep = fiber_singularity(&x)?;
    let orderings = match c.mu {
        Some(mu) => vec![mu],
        None => {
            // spectrum with multiplicity, using cluster means
            let mut mu = Vec::new();
            for e in &rep.eigenvalues {
                mu.extend(std::iter::repeat_n(e.value, e.algebraic));
            }
            permutations([mu[0], mu[1], mu[2]])
        }
    };
    let mut flags = Vec::new();
    for mu in orderings {
        let fs = invariant_flags(&x, mu)?;
        flags.push(json!({
            "mu": mu.iter().map(|z| cj(*z)).collect::<Vec<_>>(),
            "components": fs.components,
            "eigenspace_dims": [fs.eigenspace_dims.0, fs.eigenspace_dims.1],
            "representatives": fs.representatives.len(),
        }));
    }
    let cp = x.charpoly();
    let body = to_json(&json!({
        "schema": 1,
        "command": "classify",
        "x": c.x.iter().map(|z| cj(*z)).collect::<Vec<_>>(),
        "e1": cj(cp.e1),
        "e2": cj(cp.e2),
        "class": rep.class,
        "jacobian_rank": rep.jacobian_rank,
        "jacobian_singular_values": rep.jacobian_singular_values,
        "jordan_blocks": rep.jordan_blocks,
        "eigenvalues": rep.eigenvalues.iter().map(|e| json!({
            "value": cj(e.value), "algebraic": e.algebraic, "geometric": e.geometric,
        })).collect::<Vec<_>>(),
        "flags": flags,
    }));
    Ok(Report { body, pass: true })
}

fn cmd_presence(p: &PresenceArgs) -> crate::Result<Report> {
    let t0 = parse_rational(&p.theta0)?;
    let ti = parse_rational(&p.theta_inf)?;
    let r = reducible_presence(t0, ti);
    let body = to_json(&json!({
        "schema": 1,
        "command": "presence",
        "theta0": t0.to_string(),
        "thetainf": ti.to_string(),
        "type1": r.type1,
        "type2": r.type2,
    }));
    Ok(Report { body, pass: true })
}
