//! Command-line driver: `verify`, `cybe`, `lax`, `flow`, `simulate`,
//! `project`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input (parse, config or
//! I/O), 3 divergence. Every run that gets past argument parsing writes
//! `manifest.json` into the output directory.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{resolve_algebra, validate_crossed_module, CrossedModule, GradedElement};
use crate::bialgebra::{
    check_dt_minus, coboundary_delta, decompose, load_rmatrix, pairing_from_sym,
    validate_cobracket, validate_cocycle, TwoRMatrix,
};
use crate::error::{Error, Result};
use crate::lattice::{
    kappa_defect, monodromy_1d, read_snapshot, run, su2_defining, tbar_project, SimConfig,
};
use crate::lax::{
    build_2lax, check_l_conditions, induced_1lax, lax_residual, naive_quadratic,
    quadratic_hamiltonian,
};
use crate::poisson::{random_points, GradedPoint, GradedPolynomial, Mode, PoissonStructure};
use crate::representations::{adjoint_2rep, conservation_monitor, trace_polys};

pub const DEFAULT_VALIDATOR_TOL: f64 = 1e-9;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "lie2", version, about = "Lie 2-bialgebras, 2-Lax pairs and spin-rectangle dynamics")]
pub struct Cli {
    /// Tolerance override; defaults are 1e-9 for validators and 1e-8 for
    /// residuals.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for lattice RHS evaluation (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, default_value = "lie2-out")]
    pub output_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the crossed-module axioms of a built-in or an algebra file.
    Verify {
        algebra: String,
    },
    /// Check the 2-graded r-matrix conditions and the induced cobracket.
    Cybe(AlgebraArgs),
    /// Build the 2-Lax pair and report its residuals.
    Lax(LaxArgs),
    /// Integrate a Hamiltonian flow on g*[1] and monitor trace polynomials.
    Flow(FlowArgs),
    /// Run a lattice simulation from a TOML or JSON config.
    Simulate {
        config: PathBuf,
    },
    /// Apply the t̄ projection and the boundary monodromy to a snapshot.
    Project {
        snapshot: PathBuf,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct AlgebraArgs {
    /// Built-in name (id_su2, id_sl2, skeletal_u1) or algebra JSON path.
    pub algebra: String,
    /// r-matrix JSON with fields R1, R2; defaults to the built-in's own.
    #[arg(long)]
    pub rmatrix: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LaxArgs {
    #[command(flatten)]
    pub alg: AlgebraArgs,
    /// quadratic, naive, beta<k>, alpha<k> (1-based) or a polynomial JSON path.
    #[arg(long, default_value = "quadratic")]
    pub hamiltonian: String,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 4)]
    pub kmax: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FlowArgs {
    #[command(flatten)]
    pub alg: AlgebraArgs,
    #[arg(long, default_value = "quadratic")]
    pub hamiltonian: String,
    #[arg(long, default_value = "rmatrix")]
    pub mode: String,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Initial point `g1,..,gn;f1,..,fm`; random in [-1,1] from --seed if absent.
    #[arg(long, conflicts_with = "l_value")]
    pub point: Option<String>,
    /// Initial value of L, same format as --point; the point is L's preimage.
    #[arg(long)]
    pub l_value: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub kmax: usize,
    /// Record every `stride`-th point in the CSV outputs.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

/// Provenance record written for every run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub versions: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub exit_code: u8,
    pub error: Option<String>,
}

/// SHA-256 hex digest of `bytes`.
pub fn config_hash(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of one command: a JSON report and whether every check passed.
struct Outcome {
    report: Value,
    pass: bool,
    outputs: Vec<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Divergence { .. } => 3,
        Error::Parse { .. } | Error::Io { .. } | Error::Config(_) | Error::Dimension { .. } => 2,
        _ => 1,
    }
}

fn resolve_rmatrix(cm: &CrossedModule, path: Option<&Path>) -> Result<TwoRMatrix> {
    let r = match path {
        Some(p) => load_rmatrix(p)?,
        None => TwoRMatrix::for_builtin(&cm.name).ok_or_else(|| {
            Error::Config(format!("no default r-matrix for {}; pass --rmatrix", cm.name))
        })?,
    };
    r.check(cm)?;
    Ok(r)
}

/// Parses the `--hamiltonian` argument.
pub fn resolve_hamiltonian(source: &str, cm: &CrossedModule, r: &TwoRMatrix) -> Result<GradedPolynomial> {
    let (n, m) = (cm.n, cm.m);
    let index = |rest: &str, bound: usize| -> Result<usize> {
        match rest.parse::<usize>() {
            Ok(k) if (1..=bound).contains(&k) => Ok(k - 1),
            _ => Err(Error::Config(format!("bad coordinate in hamiltonian {source:?}"))),
        }
    };
    match source {
        "quadratic" => quadratic_hamiltonian(cm, r),
        "naive" => Ok(naive_quadratic(n, m)),
        s if s.starts_with("beta") => Ok(GradedPolynomial::beta(n, m, index(&s[4..], n)?)),
        s if s.starts_with("alpha") => Ok(GradedPolynomial::alpha(n, m, index(&s[5..], m)?)),
        path => {
            let h = GradedPolynomial::load(Path::new(path))?;
            if h.n != n || h.m != m {
                return Err(Error::Config(format!(
                    "hamiltonian has ({}, {}) coordinates, algebra needs ({n}, {m})",
                    h.n, h.m
                )));
            }
            Ok(h)
        }
    }
}

fn parse_point(s: &str, n: usize, m: usize) -> Result<GradedPoint> {
    let (g, f) = s
        .split_once(';')
        .ok_or_else(|| Error::Config("point must look like g1,..,gn;f1,..,fm".into()))?;
    let parse = |t: &str| -> Result<Vec<f64>> {
        t.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {x:?} in point")))
            })
            .collect()
    };
    let p = GradedPoint::new(parse(g)?, parse(f)?);
    p.check(n, m)?;
    Ok(p)
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn residuals_json(rep: &crate::algebra::AxiomReport) -> Value {
    let checks: serde_json::Map<String, Value> = rep
        .checks
        .iter()
        .map(|c| (c.name.clone(), json!({"residual": c.residual, "pass": c.pass})))
        .collect();
    let diags: serde_json::Map<String, Value> = rep
        .diagnostics
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    json!({"pass": rep.pass, "tol": rep.tol, "checks": checks, "diagnostics": diags, "failed": rep.failed()})
}

fn cmd_verify(algebra: &str, tol: f64) -> Result<Outcome> {
    let cm = resolve_algebra(algebra)?;
    let rep = validate_crossed_module(&cm, tol);
    Ok(Outcome {
        pass: rep.pass,
        report: json!({"algebra": cm.name, "n": cm.n, "m": cm.m, "axioms": residuals_json(&rep)}),
        outputs: vec![],
    })
}

fn cmd_cybe(args: &AlgebraArgs, tol: f64) -> Result<Outcome> {
    let cm = resolve_algebra(&args.algebra)?;
    let r = resolve_rmatrix(&cm, args.rmatrix.as_deref())?;
    let (skew, sym) = decompose(&r);
    let dt = check_dt_minus(&cm, &skew);
    let pairing = pairing_from_sym(&cm, &sym, tol);
    let delta = coboundary_delta(&cm, &skew);
    let coc = validate_cocycle(&cm, &delta, tol);
    let cob = validate_cobracket(&cm, &delta, tol);
    let pairing_json = match &pairing {
        Ok(p) => json!({"ok": true, "invariance": p.invariance_residual, "t_symmetry": p.t_symmetry_residual}),
        Err(e) => json!({"ok": false, "error": e.to_string()}),
    };
    let pass = dt < tol && pairing.is_ok() && coc.pass && cob.pass;
    Ok(Outcome {
        pass,
        report: json!({
            "algebra": cm.name,
            "dt_minus": dt,
            "pairing": pairing_json,
            "cocycle": residuals_json(&coc),
            "cobracket": residuals_json(&cob),
            "pass": pass,
        }),
        outputs: vec![],
    })
}

fn cmd_lax(args: &LaxArgs, tol: f64, seed: u64) -> Result<Outcome> {
    if args.points == 0 {
        return Err(Error::Config("--points must be at least 1".into()));
    }
    if args.kmax == 0 {
        return Err(Error::Config("--kmax must be at least 1".into()));
    }
    let cm = resolve_algebra(&args.alg.algebra)?;
    let r = resolve_rmatrix(&cm, args.alg.rmatrix.as_deref())?;
    let h = resolve_hamiltonian(&args.hamiltonian, &cm, &r)?;
    let pair = build_2lax(&cm, &r, &h, DEFAULT_VALIDATOR_TOL)?;
    let pts = random_points(cm.n, cm.m, args.points, seed);
    let mut lax_max = 0.0f64;
    for p in &pts {
        lax_max = lax_max.max(lax_residual(&pair, &cm, p)?);
    }
    let lc = check_l_conditions(&pair, &cm, &pts);
    let ind = induced_1lax(&pair, &cm, &pts)?;
    let rep = adjoint_2rep(&cm);
    let mut fk = Vec::new();
    for p in pts.iter().take(5) {
        fk.push(trace_polys(&cm, &rep, &pair.l_at(p), args.kmax)?);
    }
    let invariance = crate::poisson::check_invariance(&cm, &h, &pts);
    let pass = lax_max < tol
        && invariance < tol
        && lc.t_compat == 0.0
        && lc.ll_residual < tol
        && lc.sign_consistent
        && ind.residual < tol;
    Ok(Outcome {
        pass,
        report: json!({
            "algebra": cm.name,
            "hamiltonian": h.to_string(),
            "points": args.points,
            "invariance_residual": invariance,
            "lax_residual_max": lax_max,
            "lax_sign": "{H,L}_R = [L,P]",
            "l_conditions": lc,
            "induced_1lax": ind,
            "trace_polys_first_points": fk,
            "tol": tol,
            "pass": pass,
        }),
        outputs: vec![],
    })
}

fn cmd_flow(args: &FlowArgs, tol: f64, seed: u64, out: &Path) -> Result<Outcome> {
    let cm = resolve_algebra(&args.alg.algebra)?;
    let r = resolve_rmatrix(&cm, args.alg.rmatrix.as_deref())?;
    let mode: Mode = args.mode.parse()?;
    let h = resolve_hamiltonian(&args.hamiltonian, &cm, &r)?;
    let pair = build_2lax(&cm, &r, &h, DEFAULT_VALIDATOR_TOL)?;
    let p0 = match (&args.point, &args.l_value) {
        (Some(s), _) => parse_point(s, cm.n, cm.m)?,
        (None, Some(s)) => {
            let z = parse_point(s, cm.n, cm.m)?;
            pair.point_for(&GradedElement::new(z.g, z.f))?
        }
        (None, None) => random_points(cm.n, cm.m, 1, seed).remove(0),
    };
    let ps = PoissonStructure::new(&cm, Some(&r), mode, DEFAULT_VALIDATOR_TOL)?;
    let traj = ps.flow(&h, &p0, args.dt, args.steps)?;
    let rep = adjoint_2rep(&cm);
    let table = conservation_monitor(&cm, &rep, &pair, &traj, args.dt, args.kmax, args.stride)?;
    let traj_path = out.join("trajectory.csv");
    let drift_path = out.join("drift.csv");
    let io = |e: csv::Error| Error::Io {
        path: traj_path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(&traj_path).map_err(io)?;
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend((1..=cm.n).map(|i| format!("g{i}")));
    header.extend((1..=cm.m).map(|a| format!("f{a}")));
    w.write_record(&header).map_err(io)?;
    let stride = args.stride.max(1);
    for (s, p) in traj.iter().enumerate() {
        if s % stride != 0 && s + 1 != traj.len() {
            continue;
        }
        let mut rec = vec![s.to_string(), format!("{:e}", s as f64 * args.dt)];
        rec.extend(p.coords().iter().map(|v| format!("{v:e}")));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: traj_path.display().to_string(),
        source,
    })?;
    table.write_csv(&drift_path)?;
    let h0 = h.eval_at(&p0);
    let h1 = h.eval_at(traj.last().expect("nonempty"));
    let h_drift = (h1 - h0).abs() / h0.abs().max(1.0);
    Ok(Outcome {
        pass: h_drift < tol.max(DEFAULT_RESIDUAL_TOL),
        report: json!({
            "algebra": cm.name,
            "mode": args.mode,
            "hamiltonian": h.to_string(),
            "dt": args.dt,
            "steps": args.steps,
            "initial_point": p0,
            "final_point": traj.last(),
            "hamiltonian_relative_drift": h_drift,
            "trace_poly_relative_drift": table.rel_drift,
            "eigenvalue_drift": table.max_eig_drift,
        }),
        outputs: vec![traj_path, drift_path],
    })
}

fn cmd_simulate(config: &Path, out: &Path) -> Result<Outcome> {
    let mut cfg = SimConfig::load(config)?;
    cfg.output = Some(out.to_path_buf());
    let res = run(&cfg)?;
    let first = res.observables.first().expect("initial row");
    let last = res.observables.last().expect("initial row");
    Ok(Outcome {
        pass: true,
        report: json!({
            "mode": cfg.mode,
            "Lu": cfg.lu,
            "Lv": cfg.lv,
            "steps": cfg.steps,
            "dt": cfg.dt,
            "initial": first,
            "final": last,
        }),
        outputs: res.files,
    })
}

fn cmd_project(snapshot: &Path, out: &Path) -> Result<Outcome> {
    let st = read_snapshot(snapshot)?;
    let kb = tbar_project(&st);
    let path = out.join("tbar_projection.csv");
    let io = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record(["p", "k1", "k2", "k3"]).map_err(io)?;
    for (p, k) in kb.iter().enumerate() {
        w.write_record(&[
            p.to_string(),
            format!("{:e}", k[0]),
            format!("{:e}", k[1]),
            format!("{:e}", k[2]),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mono = monodromy_1d(&st.kappa, st.ell, &su2_defining());
    Ok(Outcome {
        pass: true,
        report: json!({
            "Lu": st.lu,
            "Lv": st.lv,
            "time": st.time,
            "kappa_defect": kappa_defect(&st),
            "monodromy_trace": [mono.trace.re, mono.trace.im],
            "neg_ln_trace": [mono.neg_ln_trace.re, mono.neg_ln_trace.im],
            "neg_det_ln_first_order": [mono.neg_det_ln_first_order.re, mono.neg_det_ln_first_order.im],
            "first_order_cells": mono.first_order_cells,
        }),
        outputs: vec![path],
    })
}

fn command_config(cli: &Cli) -> (String, Value, Vec<String>) {
    match &cli.command {
        Command::Verify { algebra } => ("verify".into(), json!({"algebra": algebra}), vec![algebra.clone()]),
        Command::Cybe(a) => ("cybe".into(), json!(a), inputs_of(a)),
        Command::Lax(a) => ("lax".into(), json!(a), inputs_of(&a.alg)),
        Command::Flow(a) => ("flow".into(), json!(a), inputs_of(&a.alg)),
        Command::Simulate { config } => {
            let text = std::fs::read_to_string(config).unwrap_or_default();
            (
                "simulate".into(),
                json!({"config": config, "config_text": text}),
                vec![config.display().to_string()],
            )
        }
        Command::Project { snapshot } => (
            "project".into(),
            json!({"snapshot": snapshot}),
            vec![snapshot.display().to_string()],
        ),
    }
}

fn inputs_of(a: &AlgebraArgs) -> Vec<String> {
    let mut v = vec![a.algebra.clone()];
    if let Some(p) = &a.rmatrix {
        v.push(p.display().to_string());
    }
    v
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    let start = Instant::now();
    let out = cli.output_dir.clone();
    let (name, config, inputs) = command_config(cli);
    let hashed = json!({"command": name, "config": config, "tol": cli.tol, "seed": cli.seed});
    let hash = config_hash(hashed.to_string().as_bytes());
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return 2;
    }
    let validator_tol = cli.tol.unwrap_or(DEFAULT_VALIDATOR_TOL);
    let residual_tol = cli.tol.unwrap_or(DEFAULT_RESIDUAL_TOL);
    let body = || -> Result<Outcome> {
        match &cli.command {
            Command::Verify { algebra } => cmd_verify(algebra, validator_tol),
            Command::Cybe(a) => cmd_cybe(a, validator_tol),
            Command::Lax(a) => cmd_lax(a, residual_tol, cli.seed),
            Command::Flow(a) => cmd_flow(a, residual_tol, cli.seed, &out),
            Command::Simulate { config } => cmd_simulate(config, &out),
            Command::Project { snapshot } => cmd_project(snapshot, &out),
        }
    };
    let result = if cli.threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
            Ok(pool) => pool.install(body),
            Err(e) => Err(Error::Config(format!("thread pool: {e}"))),
        }
    } else {
        body()
    };
    let report_path = out.join("report.json");
    let (code, mut outputs, error) = match result {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.report).expect("report serializes"));
            let code = if o.pass { 0 } else { 1 };
            match write_json(&report_path, &o.report) {
                Ok(()) => {
                    let mut outs = o.outputs;
                    outs.push(report_path);
                    (code, outs, None)
                }
                Err(e) => (2, o.outputs, Some(e.to_string())),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code_for(&e), vec![], Some(e.to_string()))
        }
    };
    let manifest_path = out.join("manifest.json");
    outputs.push(manifest_path.clone());
    let manifest = RunManifest {
        command: name,
        config_hash: hash,
        seed: cli.seed,
        versions: json!({"lie2": env!("CARGO_PKG_VERSION")}),
        inputs,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
        exit_code: code,
        error,
    };
    if let Err(e) = write_json(&manifest_path, &manifest) {
        eprintln!("error: {e}");
        return 2;
    }
    code
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(execute(&cli))
}
