use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use spectral_transport::lab::{self, ReproConfig, ReproReport};
use spectral_transport::transport::kantorovich_dual;
use spectral_transport::{
    cost_matrix, spectral_distance, wasserstein_primal, AlgebraElement, CostMatrix, Error,
    SolverOptions, State,
};

use crate::config::{Loaded, TripleConfig};
use crate::{exit, Cli, Command};

/// What a command prints and how it exits.
#[derive(Debug, Default, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: exit::OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("{}\n", stderr.into()),
        }
    }
}

/// Tolerance on `W − d` below which a comparison is flagged as an internal error.
const GAP_TOL: f64 = 1e-6;

fn solver_failure(e: &Error) -> Outcome {
    let code = match e {
        Error::NotConverged { .. } | Error::Lp(_) => exit::NOT_CONVERGED,
        Error::Pair { source, .. } if matches!(**source, Error::NotConverged { .. }) => {
            exit::NOT_CONVERGED
        }
        _ => exit::CONFIG,
    };
    Outcome::fail(code, format!("error: {e}"))
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else if x < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

/// `1.0`, `0.25`, `inf`; rounded to 10 significant digits, well below solver tolerances.
fn show(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x:?}");
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    format!("{rounded:?}")
}

fn show_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| show(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn witness_json(w: &AlgebraElement) -> Value {
    match w {
        AlgebraElement::Diagonal(z) => Value::Array(z.iter().map(|c| num(c.re)).collect()),
        AlgebraElement::Matrix(m) => Value::Array(
            (0..m.rows())
                .map(|i| {
                    Value::Array(
                        (0..m.cols())
                            .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                            .collect(),
                    )
                })
                .collect(),
        ),
    }
}

fn witness_text(w: &AlgebraElement) -> String {
    match w {
        AlgebraElement::Diagonal(z) => show_list(&z.iter().map(|c| c.re).collect::<Vec<_>>()),
        AlgebraElement::Matrix(m) => {
            let rows: Vec<String> = (0..m.rows())
                .map(|i| {
                    let cells: Vec<String> = (0..m.cols())
                        .map(|j| format!("{:?}{:+?}i", m[(i, j)].re, m[(i, j)].im))
                        .collect();
                    format!("[{}]", cells.join(", "))
                })
                .collect();
            format!("[{}]", rows.join(", "))
        }
    }
}

fn load(path: &Path, tol: Option<f64>) -> Result<Loaded, Outcome> {
    let display = path.display().to_string();
    let mut loaded = TripleConfig::load(path)
        .and_then(|c| c.validate(&display))
        .map_err(|e| Outcome::fail(exit::CONFIG, format!("error: {e}")))?;
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Outcome::fail(
                exit::CONFIG,
                format!("error: --tol must be positive, got {t}"),
            ));
        }
        loaded.solver.tol = t;
    }
    Ok(loaded)
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

/// Resolves a state token: a config name, `pure:K`, `bloch:X,Y,Z`, or comma-separated weights.
pub fn parse_state(token: &str, loaded: &Loaded) -> Result<State, String> {
    if let Some(s) = loaded.states.get(token) {
        return Ok(s.clone());
    }
    let state = if let Some(k) = token.strip_prefix("pure:") {
        let k: usize = k.trim().parse().map_err(|e| format!("`{token}`: {e}"))?;
        if k == 0 {
            return Err(format!("`{token}`: pure states are numbered from 1"));
        }
        loaded.triple.pure_state(k - 1).map_err(|e| e.to_string())?
    } else if let Some(r) = token.strip_prefix("bloch:") {
        let r = parse_floats(r)?;
        let r: [f64; 3] = r
            .try_into()
            .map_err(|_| format!("`{token}`: a Bloch vector has three components"))?;
        State::from_bloch(r).map_err(|e| e.to_string())?
    } else if token.contains(',') || token.parse::<f64>().is_ok() {
        State::probability(parse_floats(token)?).map_err(|e| e.to_string())?
    } else {
        let known: Vec<&str> = loaded.states.keys().map(String::as_str).collect();
        return Err(format!(
            "unknown state `{token}` (config defines: {})",
            if known.is_empty() {
                "none".to_string()
            } else {
                known.join(", ")
            }
        ));
    };
    loaded
        .triple
        .check_state(&state)
        .map_err(|e| e.to_string())?;
    Ok(state)
}

fn states(loaded: &Loaded, phi: &str, psi: &str) -> Result<(State, State), Outcome> {
    let parse = |t: &str| {
        parse_state(t, loaded).map_err(|e| Outcome::fail(exit::CONFIG, format!("error: {e}")))
    };
    Ok((parse(phi)?, parse(psi)?))
}

fn commutative_cost(loaded: &Loaded) -> Result<CostMatrix, Outcome> {
    if !loaded.triple.is_commutative() {
        return Err(Outcome::fail(
            exit::CONFIG,
            "error: transport needs a commutative algebra (pure states of a matrix algebra form a continuum)",
        ));
    }
    cost_matrix(&loaded.triple, &loaded.solver).map_err(|e| solver_failure(&e))
}

/// Executes `cli`.
pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Distance { config, phi, psi } => distance(cli, config, phi, psi),
        Command::Wasserstein { config, phi, psi } => wasserstein(cli, config, phi, psi),
        Command::Compare { config, phi, psi } => compare(cli, config, phi, psi),
        Command::CostMatrix { config } => cost_matrix_cmd(cli, config),
        Command::GridScan {
            config,
            resolution,
            reference,
        } => grid_scan(cli, config, *resolution, reference.as_deref()),
        Command::ReproPaper => repro(cli),
    };
    result.unwrap_or_else(|o| o)
}

fn distance(cli: &Cli, config: &Path, phi: &str, psi: &str) -> Result<Outcome, Outcome> {
    let loaded = load(config, cli.tol)?;
    let (a, b) = states(&loaded, phi, psi)?;
    let r = spectral_distance(&loaded.triple, &a, &b, &loaded.solver)
        .map_err(|e| solver_failure(&e))?;
    let stdout = if cli.json {
        let v = json!({
            "value": num(r.value),
            "witness": r.witness.as_ref().map(witness_json),
            "iterations": r.iterations,
            "certified_gap": num(r.certified_gap),
        });
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else {
        let mut s = format!("{}\n", show(r.value));
        if let Some(w) = &r.witness {
            let _ = writeln!(s, "witness: {}", witness_text(w));
        }
        let _ = writeln!(s, "iterations: {}", r.iterations);
        let _ = writeln!(s, "certified gap: {:.3e}", r.certified_gap);
        s
    };
    let code = if r.is_infinite() {
        exit::INFINITE
    } else {
        exit::OK
    };
    Ok(Outcome {
        code,
        stdout,
        stderr: String::new(),
    })
}

fn wasserstein(cli: &Cli, config: &Path, phi: &str, psi: &str) -> Result<Outcome, Outcome> {
    let loaded = load(config, cli.tol)?;
    let (a, b) = states(&loaded, phi, psi)?;
    let cost = commutative_cost(&loaded)?;
    let (mu, nu) = (a.weights().unwrap(), b.weights().unwrap());
    let primal = wasserstein_primal(&cost, mu, nu).map_err(|e| solver_failure(&e))?;
    let dual = if cost.is_finite() {
        Some(kantorovich_dual(&cost, mu, nu).map_err(|e| solver_failure(&e))?)
    } else {
        None
    };
    let plan = primal.plan.to_rows();
    let stdout = if cli.json {
        let v = json!({
            "value": num(primal.value),
            "plan": plan,
            "potential": dual.as_ref().map(|d| d.potential.f.clone()),
            "dual_value": dual.as_ref().map(|d| num(d.value)),
            "duality_gap": dual.as_ref().map(|d| num((primal.value - d.value).abs())),
        });
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else {
        let mut s = format!("{}\n", show(primal.value));
        let _ = writeln!(s, "plan:");
        for row in &plan {
            let _ = writeln!(s, "  {}", show_list(row));
        }
        match &dual {
            Some(d) => {
                let _ = writeln!(s, "potential: {}", show_list(&d.potential.f));
                let _ = writeln!(s, "dual value: {}", show(d.value));
                let _ = writeln!(s, "duality gap: {:.3e}", (primal.value - d.value).abs());
            }
            None => {
                let _ = writeln!(
                    s,
                    "potential: none (some pure states are infinitely far apart)"
                );
            }
        }
        s
    };
    let code = if primal.value.is_infinite() {
        exit::INFINITE
    } else {
        exit::OK
    };
    Ok(Outcome {
        code,
        stdout,
        stderr: String::new(),
    })
}

fn gap(w: f64, d: f64) -> f64 {
    if w == d {
        0.0
    } else {
        w - d
    }
}

fn compare(cli: &Cli, config: &Path, phi: &str, psi: &str) -> Result<Outcome, Outcome> {
    let loaded = load(config, cli.tol)?;
    let (a, b) = states(&loaded, phi, psi)?;
    let cost = commutative_cost(&loaded)?;
    let d = spectral_distance(&loaded.triple, &a, &b, &loaded.solver)
        .map_err(|e| solver_failure(&e))?
        .value;
    let w = wasserstein_primal(&cost, a.weights().unwrap(), b.weights().unwrap())
        .map_err(|e| solver_failure(&e))?
        .value;
    let g = gap(w, d);
    let stdout = if cli.json {
        let v = json!({"d": num(d), "w": num(w), "gap": num(g)});
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else if cli.csv {
        format!("d,w,gap\n{d},{w},{g}\n")
    } else {
        format!("d   = {}\nW   = {}\ngap = {}\n", show(d), show(w), show(g))
    };
    let mut out = Outcome::ok(stdout);
    if g < -GAP_TOL {
        out.code = exit::CHECK_FAILED;
        out.stderr = format!("internal error: W − d = {g:e} is below −{GAP_TOL:e}\n");
    } else if d.is_infinite() || w.is_infinite() {
        out.code = exit::INFINITE;
    }
    Ok(out)
}

fn cost_matrix_cmd(cli: &Cli, config: &Path) -> Result<Outcome, Outcome> {
    let loaded = load(config, cli.tol)?;
    let cost = commutative_cost(&loaded)?;
    let rows = cost.rows();
    let stdout = if cli.json {
        let v = json!({
            "size": cost.size(),
            "entries": rows.iter().map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else if cli.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.write_record(r.iter().map(|x| x.to_string())).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    } else {
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| show(x)).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        let mut s = String::new();
        for r in &cells {
            let line: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
            let _ = writeln!(s, "{}", line.join("  "));
        }
        s
    };
    Ok(Outcome::ok(stdout))
}

/// Weights `(λ₁, λ₂, 1 − λ₁ − λ₂)` on a grid with `resolution` points per edge.
pub fn simplex_grid(resolution: usize) -> Vec<[f64; 3]> {
    let m = (resolution - 1) as f64;
    let mut out = Vec::new();
    for i in 0..resolution {
        for j in 0..resolution - i {
            let (a, b) = (i as f64 / m, j as f64 / m);
            let c = (resolution - 1 - i - j) as f64 / m;
            out.push([a, b, c]);
        }
    }
    out
}

#[derive(serde::Serialize)]
struct GridRow {
    lambda1: f64,
    lambda2: f64,
    lambda1p: f64,
    lambda2p: f64,
    d: f64,
    w: f64,
    gap: f64,
}

fn grid_scan(
    cli: &Cli,
    config: &Path,
    resolution: usize,
    reference: Option<&str>,
) -> Result<Outcome, Outcome> {
    let loaded = load(config, cli.tol)?;
    if !loaded.triple.is_commutative() || loaded.triple.algebra().size() != 3 {
        return Err(Outcome::fail(
            exit::CONFIG,
            "error: unsupported: grid-scan needs the commutative algebra ℂ³",
        ));
    }
    if resolution < 2 {
        return Err(Outcome::fail(
            exit::CONFIG,
            "error: --resolution must be at least 2",
        ));
    }
    let cost = commutative_cost(&loaded)?;
    let grid = simplex_grid(resolution);
    let states: Vec<State> = grid
        .iter()
        .map(|w| State::probability(w.to_vec()).expect("grid points are in the simplex"))
        .collect();
    let pairs: Vec<(State, State)> = match reference {
        Some(token) => {
            let r = parse_state(token, &loaded)
                .map_err(|e| Outcome::fail(exit::CONFIG, format!("error: {e}")))?;
            states.iter().map(|s| (s.clone(), r.clone())).collect()
        }
        None => states
            .iter()
            .flat_map(|a| states.iter().map(move |b| (a.clone(), b.clone())))
            .collect(),
    };
    let rows: Vec<GridRow> = pairs
        .par_iter()
        .map(|(a, b)| {
            let d = spectral_distance(&loaded.triple, a, b, &loaded.solver)?.value;
            let (x, y) = (a.weights().unwrap(), b.weights().unwrap());
            let w = wasserstein_primal(&cost, x, y)?.value;
            Ok(GridRow {
                lambda1: x[0],
                lambda2: x[1],
                lambda1p: y[0],
                lambda2p: y[1],
                d,
                w,
                gap: gap(w, d),
            })
        })
        .collect::<Result<_, Error>>()
        .map_err(|e| solver_failure(&e))?;

    let stdout = if cli.json {
        let v: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "lambda1": r.lambda1, "lambda2": r.lambda2,
                    "lambda1p": r.lambda1p, "lambda2p": r.lambda2p,
                    "d": num(r.d), "w": num(r.w), "gap": num(r.gap),
                })
            })
            .collect();
        format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "lambda1", "lambda2", "lambda1p", "lambda2p", "d", "w", "gap",
        ])
        .unwrap();
        for r in &rows {
            w.write_record(
                [
                    r.lambda1, r.lambda2, r.lambda1p, r.lambda2p, r.d, r.w, r.gap,
                ]
                .map(|x| x.to_string()),
            )
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    };
    let mut out = Outcome::ok(stdout);
    let bad = rows.iter().filter(|r| r.gap < -GAP_TOL).count();
    if bad > 0 {
        out.code = exit::CHECK_FAILED;
        out.stderr = format!("internal error: {bad} rows have W − d below −{GAP_TOL:e}\n");
    }
    Ok(out)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn summary(r: &ReproReport) -> String {
    let mut s = String::new();
    for b in &r.closed_forms {
        let worst_d = b
            .rows
            .iter()
            .filter_map(|x| x.closed_form_d.map(|c| (x.d_value - c).abs()))
            .fold(0.0, f64::max);
        let worst_w = b
            .rows
            .iter()
            .filter_map(|x| x.closed_form_w.map(|c| (x.w_value - c).abs()))
            .fold(0.0, f64::max);
        let _ = writeln!(
            s,
            "{} closed forms at α = {}, β = {}: {} pairs, max |d − closed| {:.3e}, max |W − closed| {:.3e}",
            verdict(b.pass),
            b.params.alpha,
            b.params.beta,
            b.rows.len(),
            worst_d,
            worst_w
        );
    }
    let _ = writeln!(
        s,
        "{} opposite signs: d ≤ W on {} pairs",
        verdict(r.opposite_signs.iter().all(|x| x.pass)),
        r.opposite_signs.len()
    );
    let _ = writeln!(
        s,
        "{} inequality: {} trials (seed {}), {} violations, min W − d {:.3e}",
        verdict(r.inequality.pass),
        r.inequality.trials,
        r.inequality.seed,
        r.inequality.violations.len(),
        r.inequality.min_slack
    );
    let worst_seg = r
        .segments
        .iter()
        .map(|x| (x.d - x.w).abs())
        .fold(0.0, f64::max);
    let _ = writeln!(
        s,
        "{} segments: {} segments, max |d − W| {:.3e}",
        verdict(r.segments.iter().all(|x| x.pass)),
        r.segments.len(),
        worst_seg
    );
    let _ = writeln!(
        s,
        "{} disconnected point: d(δ₁, δ₂) = {}, W across = {}, W within = {}",
        verdict(r.disconnected.pass),
        show(r.disconnected.d12),
        show(r.disconnected.w_moving),
        show(r.disconnected.w_staying)
    );
    let sizes: Vec<String> = r
        .probe
        .series
        .first()
        .map(|s| s.results.iter().map(|p| p.samples.to_string()).collect())
        .unwrap_or_default();
    let medians: Vec<String> = r
        .probe
        .median_gaps
        .iter()
        .map(|g| format!("{g:.3e}"))
        .collect();
    let _ = writeln!(
        s,
        "{} M₂(ℂ) probe: {} pairs, N = {}, median w_grid − d = {}",
        verdict(r.probe.pass),
        r.probe.series.len(),
        sizes.join("/"),
        medians.join(" / ")
    );
    let _ = writeln!(s, "{} overall", verdict(r.pass));
    s
}

fn repro(cli: &Cli) -> Result<Outcome, Outcome> {
    if cli.samples < 32 || !cli.samples.is_multiple_of(4) {
        return Err(Outcome::fail(
            exit::CONFIG,
            format!(
                "error: --samples must be a multiple of 4 and at least 32, got {}",
                cli.samples
            ),
        ));
    }
    let mut opts = SolverOptions::default();
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Outcome::fail(
                exit::CONFIG,
                format!("error: --tol must be positive, got {t}"),
            ));
        }
        opts.tol = t;
    }
    let config = ReproConfig {
        seed: cli.seed,
        samples: cli.samples,
        ..ReproConfig::default()
    };
    let report = lab::run_repro(&config, &opts).map_err(|e| solver_failure(&e))?;
    let serialized = serde_json::to_string_pretty(&report).unwrap();
    let mut out = if cli.json {
        Outcome::ok(format!("{serialized}\n"))
    } else {
        Outcome::ok(summary(&report))
    };
    if !report.pass {
        out.code = exit::CHECK_FAILED;
        if !cli.json {
            out.stderr = format!("{serialized}\n");
        }
    }
    Ok(out)
}
