//! Command-line front end: builds sets, estimates K_p bounds, sweeps
//! scales, cross-checks the norm oracles, runs selector experiments and
//! emits diagnostics.
//!
//! Every output file embeds the serialized run configuration and its hash
//! in header comments, and every random decision flows from the `--seed`
//! flag, so any output can be reproduced from its own header. Exit codes:
//! 0 success, 2 validation failure (size windows, retries), 1 usage error.

use clap::{Args, Parser, Subcommand};
use lambda_lab_core::diagnose;
use lambda_lab_core::expsum::{self, Coefficients, NormConfig, NormMethod};
use lambda_lab_core::io as fsio;
use lambda_lab_core::kp::{self, Probe};
use lambda_lab_core::manifolds::{FrequencySet, ManifoldKind, ManifoldSpec};
use lambda_lab_core::report;
use lambda_lab_core::select;
use lambda_lab_core::{construct, Error as CoreError};
use num_rational::Ratio;
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "lambda-lab",
    about = "Frequency-set constructions on curved manifolds and their K_p probes",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug, Serialize)]
enum Cmd {
    /// Build a frequency set and write it as fset/1 JSON.
    Build(BuildArgs),
    /// Estimate K_p (or K_p*) lower bounds for a stored set.
    Estimate(EstimateArgs),
    /// Build + estimate across a list of scales and fit the exponent.
    Sweep(SweepArgs),
    /// Cross-check exact-even, energy-count and Monte-Carlo norms.
    Oracle(OracleArgs),
    /// Random-selector experiments (size concentration, K_p tails).
    Experiment(ExperimentArgs),
    /// Distribution and necessity diagnostics for a stored set.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    /// paraboloid | sphere | hyperbolic | momentcurve | cone | dirichlet
    #[arg(long, default_value = "paraboloid")]
    manifold: String,
    /// Ambient dimension.
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long = "R")]
    r: u64,
    /// fullgrid | capwise | squares | hyperbolic | moment | smallcap | select
    #[arg(long, default_value = "fullgrid")]
    method: String,
    /// Exponent for smallcap / select targets (rational, e.g. 5 or 9/2).
    #[arg(long)]
    p: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    p: f64,
    /// Comma list of constant | random | cap | ascent.
    #[arg(long, default_value = "constant,random")]
    probes: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// auto | exact-even | quadrature | monte-carlo
    #[arg(long, default_value = "auto")]
    norm_method: String,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 64)]
    random_trials: u32,
    /// Cap-probe grid exponent (rational in (0,1]).
    #[arg(long, default_value = "1/2")]
    beta: String,
    #[arg(long, default_value_t = 50)]
    ascent_iterations: u32,
    #[arg(long, default_value_t = 8)]
    ascent_restarts: u32,
    /// Report K_p* (l^p normalization) instead of K_p.
    #[arg(long, default_value_t = false)]
    star: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, default_value = "momentcurve")]
    manifold: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Comma list of scales, e.g. 64,128,256,512.
    #[arg(long = "R")]
    r: String,
    #[arg(long, default_value = "fullgrid")]
    method: String,
    #[arg(long)]
    p: f64,
    /// Comma list of probes to run at each scale.
    #[arg(long, default_value = "constant")]
    probe: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "auto")]
    norm_method: String,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 16)]
    random_trials: u32,
    #[arg(long, default_value = "1/2")]
    beta: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    /// Number of random pure-lattice sets to cross-check.
    #[arg(long, default_value_t = 20)]
    sets: u64,
    #[arg(long, default_value_t = 24)]
    max_points: usize,
    #[arg(long, default_value_t = 4.0)]
    p: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ExperimentArgs {
    /// concentration | kptail
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1000)]
    m: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Set file for kptail (falls back to a full grid when given
    /// --manifold/--d/--R instead).
    #[arg(long)]
    set: Option<PathBuf>,
    #[arg(long, default_value = "momentcurve")]
    manifold: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long = "R", default_value_t = 128)]
    r: u64,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 6.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DiagnoseArgs {
    #[arg(long)]
    set: PathBuf,
    /// interference | necessity | balls | equidist
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 4.0)]
    p: f64,
    #[arg(long, default_value = "1/2")]
    beta: String,
    /// Comma list of radii for the ball-count diagnostic.
    #[arg(long, default_value = "0.03125,0.0625,0.125,0.25")]
    radii: String,
    /// Cap side for the equidistribution diagnostic.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    #[arg(long, default_value_t = 3)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Run the CLI; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, anything else is a
            // usage error.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Validation(_) => 2,
                CliError::Usage(_) => 1,
            }
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Validation(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SizeWindow { .. } | CoreError::RetriesExhausted { .. } => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Experiment(a) => cmd_experiment(a),
        Cmd::Diagnose(a) => cmd_diagnose(a),
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>, CliError> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| CliError::Usage(format!("expected a rational number, got {s:?}")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den == 0 {
                return Err(CliError::Usage("rational with zero denominator".into()));
            }
            Ok(Ratio::new(parse_int(num)?, den))
        }
        None => Ok(Ratio::from_integer(parse_int(s)?)),
    }
}

fn parse_manifold(name: &str, d: usize) -> Result<ManifoldSpec, CliError> {
    if name == "dirichlet" {
        // The flat 1-D lattice: the degenerate moment curve.
        return ManifoldSpec::new(ManifoldKind::MomentCurve, 1).map_err(Into::into);
    }
    let kind = ManifoldKind::parse(name).map_err(CliError::from)?;
    ManifoldSpec::new(kind, d).map_err(Into::into)
}

fn parse_norm_method(s: &str) -> Result<Option<NormMethod>, CliError> {
    match s {
        "auto" => Ok(None),
        "exact-even" | "exact" => Ok(Some(NormMethod::ExactEven)),
        "quadrature" | "quad" => Ok(Some(NormMethod::Quadrature)),
        "monte-carlo" | "mc" => Ok(Some(NormMethod::MonteCarlo)),
        other => Err(CliError::Usage(format!("unknown norm method {other:?}"))),
    }
}

fn parse_probes(args_probes: &str, e: &EstimateLike) -> Result<Vec<Probe>, CliError> {
    args_probes
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|name| match name {
            "constant" => Ok(Probe::Constant),
            "random" => Ok(Probe::Random {
                trials: e.random_trials,
            }),
            "cap" => Ok(Probe::Cap {
                beta: parse_ratio(&e.beta)?,
            }),
            "ascent" => Ok(Probe::Ascent {
                iterations: e.ascent_iterations,
                restarts: e.ascent_restarts,
            }),
            other => Err(CliError::Usage(format!("unknown probe {other:?}"))),
        })
        .collect()
}

/// The probe knobs shared by estimate and sweep.
struct EstimateLike {
    random_trials: u32,
    beta: String,
    ascent_iterations: u32,
    ascent_restarts: u32,
}

fn config_json<T: Serialize>(cmd: &str, args: &T) -> String {
    serde_json::json!({ "command": cmd, "args": args }).to_string()
}

fn write_with_header(path: &Path, config: &str, seed: u64, body: &str) -> CliResult {
    let text = format!("{}{}", report::header_comment(config, seed), body);
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("writing {path:?}: {e}")))?;
    Ok(())
}

/// A generic log-log plotting script written beside each CSV; keeps the
/// artifact free of plotting dependencies.
fn emit_plot_script(csv_path: &Path) -> CliResult {
    let script_path = csv_path.with_extension("plot.py");
    let csv_name = csv_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data.csv".into());
    let script = format!(
        r##"#!/usr/bin/env python3
"""Generic plotter for lambda-lab CSV output (log-log when possible)."""
import csv, os, sys

path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "{csv_name}")
rows = []
with open(path) as fh:
    for line in fh:
        if not line.startswith("#"):
            rows.append(line)
reader = csv.DictReader(rows)
data = list(reader)
if not data:
    sys.exit("no rows in " + path)

def _is_num(v):
    try:
        float(v)
        return True
    except (TypeError, ValueError):
        return False

numeric = [c for c in reader.fieldnames
           if all(_is_num(r[c]) for r in data)]
if len(numeric) < 2:
    sys.exit("nothing numeric to plot")
x_col, y_col = numeric[0], numeric[1]
xs = [float(r[x_col]) for r in data]
ys = [float(r[y_col]) for r in data]

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
fig, ax = plt.subplots()
ax.plot(xs, ys, "o-")
if all(v > 0 for v in xs) and all(v > 0 for v in ys):
    ax.set_xscale("log")
    ax.set_yscale("log")
ax.set_xlabel(x_col)
ax.set_ylabel(y_col)
ax.set_title(os.path.basename(path))
out = path + ".png"
fig.savefig(out, dpi=150)
print("wrote", out)
"##
    );
    std::fs::write(&script_path, script)
        .map_err(|e| CliError::Usage(format!("writing {script_path:?}: {e}")))?;
    Ok(())
}

fn build_set(
    method: &str,
    spec: &ManifoldSpec,
    r: u64,
    p: Option<Ratio<i64>>,
    seed: u64,
) -> Result<FrequencySet, CliError> {
    let need_p = || p.ok_or_else(|| CliError::Usage(format!("method {method:?} needs --p")));
    let fs = match method {
        "fullgrid" => FrequencySet::full_grid(spec, r)?,
        "capwise" => construct::capwise_build(spec, r, seed)?,
        "squares" => construct::squares_build(r, spec)?,
        "hyperbolic" => {
            let outcome = construct::hyperbolic_build(r, seed)?;
            if !outcome.accepted {
                return Err(CliError::Validation(format!(
                    "hyperbolic validator rejected all draws (worst probe table attached \
                     to the best draw); threshold {}",
                    outcome.threshold
                )));
            }
            outcome.subset
        }
        "moment" => construct::moment_build(spec.d, r, seed)?,
        "smallcap" => {
            let p = need_p()?;
            construct::smallcap_build(spec.d, r, p, seed)?
        }
        "select" => {
            let p = need_p()?;
            let pf = *p.numer() as f64 / *p.denom() as f64;
            construct::fullgrid_select_build(spec, r, pf, seed)?
        }
        other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
    };
    Ok(fs)
}

fn cmd_build(a: &BuildArgs) -> CliResult {
    let spec = parse_manifold(&a.manifold, a.d)?;
    let p = a.p.as_deref().map(parse_ratio).transpose()?;
    let mut fs = build_set(&a.method, &spec, a.r, p, a.seed)?;
    // Embed the run configuration for reproducibility.
    let config = config_json("build", a);
    let mut params = std::mem::take(&mut fs.provenance.params);
    if params.is_null() {
        params = serde_json::json!({});
    }
    if let serde_json::Value::Object(map) = &mut params {
        map.insert(
            "run_config".into(),
            serde_json::from_str(&config).unwrap_or_default(),
        );
        map.insert(
            "config_hash".into(),
            serde_json::json!(format!("{:016x}", report::config_hash(config.as_bytes()))),
        );
    }
    fs.provenance.params = params;
    fsio::save_set(&fs, &a.out)?;
    println!(
        "wrote {} points (kind {}, R {}) to {}",
        fs.len(),
        fs.spec.kind.as_str(),
        fs.r,
        a.out.display()
    );
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult {
    let fs = fsio::load_set(&a.set)?;
    let like = EstimateLike {
        random_trials: a.random_trials,
        beta: a.beta.clone(),
        ascent_iterations: a.ascent_iterations,
        ascent_restarts: a.ascent_restarts,
    };
    let probes = parse_probes(&a.probes, &like)?;
    let cfg = NormConfig {
        method: parse_norm_method(&a.norm_method)?,
        mc_samples: a.samples,
        seed: a.seed,
        ..Default::default()
    };
    let reports = if a.star {
        kp::estimate_kp_star(&fs, a.p, &probes, &cfg, a.seed)?
    } else {
        kp::estimate_kp(&fs, a.p, &probes, &cfg, a.seed)?
    };
    let id = report::set_id(&fs);
    let mut body = String::new();
    writeln!(body, "{}", report::KP_COLUMNS).unwrap();
    for rep in &reports {
        writeln!(body, "{}", report::kp_row(&id, rep)).unwrap();
    }
    write_with_header(&a.out, &config_json("estimate", a), a.seed, &body)?;
    emit_plot_script(&a.out)?;
    for rep in &reports {
        println!(
            "{}: K_{}{} >= {:.6} ({})",
            rep.probe,
            rep.p,
            if a.star { "*" } else { "" },
            rep.bound,
            rep.method.as_str()
        );
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> CliResult {
    let scales: Vec<u64> =
        a.r.split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad scale {s:?}")))
            })
            .collect::<Result<_, _>>()?;
    if scales.len() < 2 {
        return Err(CliError::Usage("sweep needs at least two scales".into()));
    }
    let like = EstimateLike {
        random_trials: a.random_trials,
        beta: a.beta.clone(),
        ascent_iterations: 50,
        ascent_restarts: 8,
    };
    let probes = parse_probes(&a.probe, &like)?;
    let cfg = NormConfig {
        method: parse_norm_method(&a.norm_method)?,
        mc_samples: a.samples,
        seed: a.seed,
        ..Default::default()
    };

    let mut body = String::new();
    writeln!(body, "{}", report::KP_COLUMNS).unwrap();
    let mut per_probe: Vec<(String, Vec<(f64, f64)>)> = probes
        .iter()
        .map(|p| (p.name().to_string(), vec![]))
        .collect();
    for &r in &scales {
        let spec = parse_manifold(&a.manifold, a.d)?;
        let p_ratio = approx_ratio(a.p);
        let fs = build_set(&a.method, &spec, r, Some(p_ratio), a.seed)?;
        let id = report::set_id(&fs);
        let reports = kp::estimate_kp(&fs, a.p, &probes, &cfg, a.seed)?;
        for (slot, rep) in reports.iter().enumerate() {
            writeln!(body, "{}", report::kp_row(&id, rep)).unwrap();
            per_probe[slot].1.push((r as f64, rep.bound));
        }
    }

    let mut summary = String::new();
    writeln!(summary, "probe,slope,halfwidth,points").unwrap();
    let mut printed = String::new();
    for (name, pairs) in &per_probe {
        match diagnose::scaling_regression(pairs) {
            Ok(fit) => {
                writeln!(
                    summary,
                    "{},{},{},{}",
                    name,
                    fit.slope,
                    fit.halfwidth,
                    pairs.len()
                )
                .unwrap();
                writeln!(
                    printed,
                    "{name}: slope {:.4} +/- {:.4} over {} scales",
                    fit.slope,
                    fit.halfwidth,
                    pairs.len()
                )
                .unwrap();
            }
            Err(e) => {
                writeln!(summary, "{name},,,{}", pairs.len()).unwrap();
                writeln!(printed, "{name}: no fit ({e})").unwrap();
            }
        }
    }

    let config = config_json("sweep", a);
    write_with_header(&a.out, &config, a.seed, &body)?;
    let summary_path = a.out.with_extension("summary.csv");
    write_with_header(&summary_path, &config, a.seed, &summary)?;
    emit_plot_script(&a.out)?;
    print!("{printed}");
    println!("wrote {} and {}", a.out.display(), summary_path.display());
    Ok(())
}

/// Closest small rational to a float exponent (used only to thread a p
/// value into constructions that want a rational).
fn approx_ratio(p: f64) -> Ratio<i64> {
    for den in 1..=64i64 {
        let num = (p * den as f64).round();
        if ((num / den as f64) - p).abs() < 1e-9 {
            return Ratio::new(num as i64, den);
        }
    }
    Ratio::from_integer(p.round() as i64)
}

fn cmd_oracle(a: &OracleArgs) -> CliResult {
    let two_k = if (a.p.round() - a.p).abs() < 1e-9 && (a.p as u64).is_multiple_of(2) {
        a.p as u32
    } else {
        return Err(CliError::Usage(
            "oracle cross-checks need an even integer p".into(),
        ));
    };
    let k = two_k / 2;
    let mut body = String::new();
    writeln!(
        body,
        "set,size,exact_integral,energy_count,mc_value,mc_se,rel_exact_energy,mc_sigmas"
    )
    .unwrap();
    let mut worst_rel = 0.0f64;
    let mut worst_sigmas = 0.0f64;
    for t in 0..a.sets {
        let fs = random_lattice_set(a.seed, t, a.max_points);
        let coeffs = Coefficients::constant(fs.len());
        let exact = expsum::exact_even_norm(&fs, &coeffs, two_k, 1 << 33)?;
        let freqs: Vec<Vec<i64>> = fs.points.iter().map(|p| p.n.clone()).collect();
        let energy = expsum::count_energy(&freqs, k, 1 << 33)? as f64;
        let mc = expsum::norm_lp(
            &fs,
            &coeffs,
            a.p,
            &NormConfig {
                method: Some(NormMethod::MonteCarlo),
                mc_samples: a.samples,
                seed: a.seed.wrapping_add(t),
                ..Default::default()
            },
        )?;
        let rel = (exact - energy).abs() / energy.abs().max(1e-300);
        let exact_value = exact.max(0.0).powf(1.0 / a.p);
        let sigmas = (mc.value - exact_value).abs() / mc.error.max(1e-300);
        worst_rel = worst_rel.max(rel);
        worst_sigmas = worst_sigmas.max(sigmas);
        writeln!(
            body,
            "{t},{},{exact},{energy},{},{},{rel},{sigmas}",
            fs.len(),
            mc.value,
            mc.error
        )
        .unwrap();
    }
    write_with_header(&a.out, &config_json("oracle", a), a.seed, &body)?;
    emit_plot_script(&a.out)?;
    println!(
        "{} sets: worst exact/energy relative error {worst_rel:.3e}, worst MC deviation {worst_sigmas:.2} sigma",
        a.sets
    );
    if worst_rel > 1e-9 || worst_sigmas > 3.0 {
        return Err(CliError::Validation(
            "oracle cross-check outside tolerance".into(),
        ));
    }
    Ok(())
}

fn random_lattice_set(seed: u64, index: u64, max_points: usize) -> FrequencySet {
    FrequencySet::random_integer_1d(seed, index, max_points, 256)
}

fn cmd_experiment(a: &ExperimentArgs) -> CliResult {
    match a.kind.as_str() {
        "concentration" => {
            let rep = select::concentration_experiment(a.m, a.delta, a.trials, a.seed)?;
            let mut body = String::new();
            writeln!(body, "{}", report::EXPERIMENT_COLUMNS).unwrap();
            let lo = a.m as f64 * a.delta / 2.0;
            let hi = 3.0 * a.m as f64 * a.delta / 2.0;
            for (t, &size) in rep.sizes.iter().enumerate() {
                let inside = (size as f64) >= lo && (size as f64) <= hi;
                writeln!(
                    body,
                    "{}",
                    report::experiment_row(t as u64, size, inside, 0.0, a.seed)
                )
                .unwrap();
            }
            write_with_header(&a.out, &config_json("experiment", a), a.seed, &body)?;
            emit_plot_script(&a.out)?;
            println!(
                "inside fraction {} over {} trials (window [{lo}, {hi}])",
                rep.inside_fraction, a.trials
            );
        }
        "kptail" => {
            let fs = match &a.set {
                Some(path) => fsio::load_set(path)?,
                None => {
                    let spec = parse_manifold(&a.manifold, a.d)?;
                    FrequencySet::full_grid(&spec, a.r)?
                }
            };
            let rep = select::kp_tail_experiment(
                &fs,
                a.q,
                a.p,
                a.trials,
                a.seed,
                &NormConfig::default(),
            )?;
            let mut body = String::new();
            writeln!(body, "{}", report::EXPERIMENT_COLUMNS).unwrap();
            for (t, &b) in rep.bounds.iter().enumerate() {
                writeln!(
                    body,
                    "{}",
                    report::experiment_row(t as u64, 0, true, b, a.seed)
                )
                .unwrap();
            }
            write_with_header(&a.out, &config_json("experiment", a), a.seed, &body)?;
            let mut exc = String::new();
            writeln!(exc, "{}", report::EXCEEDANCE_COLUMNS).unwrap();
            for &(u, f) in &rep.exceedance {
                writeln!(exc, "{}", report::exceedance_row(u, f)).unwrap();
            }
            let exc_path = a.out.with_extension("exceedance.csv");
            write_with_header(&exc_path, &config_json("experiment", a), a.seed, &exc)?;
            emit_plot_script(&exc_path)?;
            println!(
                "delta {:.5}, median bound {:.4}, log-exceedance slope vs u^2: {:.4}",
                rep.plan.delta,
                rep.quantile(0.5),
                rep.log_exceedance_slope
            );
        }
        other => return Err(CliError::Usage(format!("unknown experiment {other:?}"))),
    }
    Ok(())
}

fn cmd_diagnose(a: &DiagnoseArgs) -> CliResult {
    let fs = fsio::load_set(&a.set)?;
    let mut body = String::new();
    writeln!(body, "{}", report::DIAG_COLUMNS).unwrap();
    match a.kind.as_str() {
        "interference" => {
            let members: Vec<usize> = (0..fs.len()).collect();
            let ratio = diagnose::interference_lower(&fs, &members, a.grid)?;
            writeln!(
                body,
                "{}",
                report::diag_row("interference", fs.r, a.grid as f64, ratio, 0.0, a.seed)
            )
            .unwrap();
            println!("interference lower bound {ratio:.6}");
        }
        "necessity" => {
            let beta = parse_ratio(&a.beta)?;
            let row = diagnose::necessity_probe(&fs, a.p, beta, &NormConfig::default())?;
            writeln!(
                body,
                "{}",
                report::diag_row("necessity", fs.r, a.p, row.ratio, row.norm.error, a.seed)
            )
            .unwrap();
            println!(
                "densest cap of {} points: ratio {:.6}",
                row.cap_size, row.ratio
            );
        }
        "balls" => {
            let radii: Vec<f64> = a
                .radii
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Usage(format!("bad radius {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            let bc = diagnose::ball_counts(&fs, &radii)?;
            for &(r, frac) in &bc.rows {
                writeln!(
                    body,
                    "{}",
                    report::diag_row("ball", fs.r, r, frac, 0.0, a.seed)
                )
                .unwrap();
            }
            if let Some(alpha) = &bc.alpha {
                writeln!(
                    body,
                    "{}",
                    report::diag_row(
                        "ball_alpha",
                        fs.r,
                        0.0,
                        alpha.slope,
                        alpha.halfwidth,
                        a.seed
                    )
                )
                .unwrap();
                println!("fitted nonconcentration exponent {:.4}", alpha.slope);
            }
        }
        "equidist" => {
            let rep = diagnose::cap_equidistribution(&fs, a.delta)?;
            for (label, value) in [
                ("equidist_min", rep.min as f64),
                ("equidist_median", rep.median as f64),
                ("equidist_max", rep.max as f64),
                ("equidist_predicted", rep.predicted),
            ] {
                writeln!(
                    body,
                    "{}",
                    report::diag_row(label, fs.r, rep.delta, value, 0.0, a.seed)
                )
                .unwrap();
            }
            println!(
                "caps {}^m: min {} median {} max {} predicted {:.2}",
                rep.cells_per_axis, rep.min, rep.median, rep.max, rep.predicted
            );
        }
        other => return Err(CliError::Usage(format!("unknown diagnostic {other:?}"))),
    }
    write_with_header(&a.out, &config_json("diagnose", a), a.seed, &body)?;
    emit_plot_script(&a.out)?;
    Ok(())
}
