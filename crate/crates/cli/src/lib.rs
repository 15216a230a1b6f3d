//! Experiment runner: reads one JSON config, runs one experiment, writes CSV
//! tables, SVG charts and a `report.json`.

pub mod config;
pub mod plot;

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use halfline::evolution::{
    geometric_j_list, growth_experiment, loglog_slope, max_over_j, temporal_green, temporal_green_whole,
    HalfLineField,
};
use halfline::greens::{
    err_bound_fit, rc_analytic, rc_empirical, ru_analytic, whole_line_asymptotic_check, BoundaryLayers,
    ErrFitOptions,
};
use halfline::resolvent::inverse_laplace_table;
use halfline::scheme::{check_hypothesis_one, HypothesisOneOptions};
use halfline::spectral::{check_hypothesis_two, HypothesisTwoOptions, Verdict};
use halfline::Error as CoreError;
use serde_json::{json, Value};

pub use config::ExperimentConfig;
use plot::Series;

/// Failures that end a run. Hypothesis failures are not errors: they come back
/// as a report with exit status 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Simulate,
    Layers,
    ErrMap,
    Growth,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Simulate => "simulate",
            Command::Layers => "layers",
            Command::ErrMap => "err-map",
            Command::Growth => "growth",
            Command::Oracle => "oracle",
        }
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    /// 0 when the run completed and the hypotheses hold, 2 on hypothesis failure.
    pub exit: i32,
    pub report: Value,
}

/// Exit status for an error: 1 for usage and numeric failures.
pub fn exit_code(_e: &CliError) -> i32 {
    1
}

struct Out {
    dir: PathBuf,
}

impl Out {
    fn csv(&self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        let mut f = std::io::BufWriter::new(fs::File::create(self.dir.join(name))?);
        writeln!(f, "{header}")?;
        for r in rows {
            writeln!(f, "{r}")?;
        }
        f.flush()?;
        Ok(())
    }

    fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        fs::write(self.dir.join(name), body)?;
        Ok(())
    }
}

fn fmt_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

/// Runs `command` and writes its artifacts into `out_dir` (created if needed).
pub fn run(command: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, CliError> {
    fs::create_dir_all(out_dir)?;
    let out = Out { dir: out_dir.to_path_buf() };
    let start = Instant::now();
    let (exit, mut report) = match command {
        Command::Check => check(cfg, &out)?,
        Command::Simulate => simulate(cfg, &out)?,
        Command::Layers => layers(cfg, &out)?,
        Command::ErrMap => err_map(cfg, &out)?,
        Command::Growth => growth(cfg, &out)?,
        Command::Oracle => oracle(cfg, &out)?,
    };
    if let Value::Object(m) = &mut report {
        m.insert("command".into(), json!(command.name()));
        m.insert("scheme_id".into(), json!(cfg.scheme_id));
        m.insert("scheme".into(), serde_json::to_value(&cfg.scheme).unwrap());
        m.insert("tolerances".into(), tolerances_json(cfg));
        m.insert("runtime_seconds".into(), json!(start.elapsed().as_secs_f64()));
    }
    out.text("report.json", &serde_json::to_string_pretty(&report).unwrap())?;
    Ok(RunOutcome { exit, report })
}

fn tolerances_json(cfg: &ExperimentConfig) -> Value {
    let t = &cfg.tolerances;
    json!({
        "consistency": t.consistency,
        "coefficient": t.coefficient,
        "residue": t.residue,
        "unit_circle": t.unit_circle,
        "oracle": t.oracle,
        "err_noise_floor": t.err_noise_floor,
        "crossover_radius": t.crossover_radius,
    })
}

fn h1_options(cfg: &ExperimentConfig) -> HypothesisOneOptions {
    HypothesisOneOptions {
        tol: cfg.tolerances.consistency,
        coefficient_tol: cfg.tolerances.coefficient,
        crossover_radius: cfg.tolerances.crossover_radius,
        ..Default::default()
    }
}

/// Builds the layer data, turning a failed hypothesis into exit status 2.
fn layer_data(cfg: &ExperimentConfig) -> Result<Result<BoundaryLayers, Value>, CliError> {
    match BoundaryLayers::new(&cfg.scheme) {
        Ok(l) => Ok(Ok(l)),
        Err(CoreError::Precondition(m)) => Ok(Err(json!({ "verdict": Value::Null, "failure": m }))),
        Err(e) => Err(e.into()),
    }
}

fn check(cfg: &ExperimentConfig, out: &Out) -> Result<(i32, Value), CliError> {
    let h1 = check_hypothesis_one(&cfg.scheme, h1_options(cfg))?;
    if !h1.satisfied {
        return Ok((2, json!({ "verdict": Value::Null, "hypothesis_one": h1 })));
    }
    let opts = HypothesisTwoOptions { residue_tol: cfg.tolerances.residue, ..Default::default() };
    let h2 = check_hypothesis_two(&cfg.scheme, &opts)?;
    out.csv(
        "hypothesis_two.csv",
        "radius,samples,skipped,min_abs_delta,min_normalized_delta,witness_re,witness_im",
        h2.radii.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.radius, r.samples, r.skipped, r.min_abs_delta, r.min_normalized_delta, r.witness.re, r.witness.im
            )
        }),
    )?;
    if !h2.satisfied {
        return Ok((2, json!({ "verdict": Value::Null, "hypothesis_one": h1, "hypothesis_two": h2 })));
    }
    let verdict = Verdict::from_residue(h2.residue_condition);
    Ok((0, json!({ "verdict": verdict.as_str(), "hypothesis_one": h1, "hypothesis_two": h2 })))
}

fn simulate(cfg: &ExperimentConfig, out: &Out) -> Result<(i32, Value), CliError> {
    let s = &cfg.scheme;
    let ns = cfg.grids.n.clone().unwrap_or_else(|| vec![0, 25, 50, 100, 200, 500]);
    let j0s = cfg.grids.j0.clone().unwrap_or_else(|| vec![50]);
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &j0 in &j0s {
        for &n in &ns {
            let g = temporal_green(s, n, j0);
            let gw = temporal_green_whole(s, n);
            let hi = j0 + n * s.r;
            let mut pts = Vec::new();
            for j in 1..=hi {
                let (a, b) = (g.get(j as isize), gw.get(j as isize - j0 as isize));
                rows.push(format!("{n},{j0},{j},{a},{b},{}", a - b));
                pts.push((j as f64, a));
            }
            if j0 == j0s[0] {
                series.push(Series { name: format!("n = {n}"), points: pts });
            }
        }
    }
    out.csv("green.csv", "n,j0,j,green,whole_line,difference", rows)?;
    out.text(
        "green.svg",
        &plot::line_chart(&format!("Green's function from j0 = {}", j0s[0]), "j", "G(n, j0, j)", &series, false, false),
    )?;
    Ok((0, json!({ "n": ns, "j0": j0s })))
}

fn layers(cfg: &ExperimentConfig, out: &Out) -> Result<(i32, Value), CliError> {
    let l = match layer_data(cfg)? {
        Ok(l) => l,
        Err(rep) => return Ok((2, rep)),
    };
    let j_max = cfg.grids.j.as_ref().and_then(|j| j.iter().max().copied()).unwrap_or(40);
    let j0s = cfg.grids.j0.clone().unwrap_or_else(|| vec![50]);
    let ns = cfg.grids.n.clone().unwrap_or_else(|| vec![500, 1000]);
    let rc = rc_analytic(&l, j_max);
    out.csv("rc.csv", "j,rc", rc.rc.iter().enumerate().map(|(i, v)| format!("{},{v}", i + 1)))?;
    let ru = ru_analytic(&l, 20, j_max);
    out.csv(
        "ru.csv",
        "j0,j,ru",
        ru.ru.iter().enumerate().flat_map(|(a, row)| {
            row.iter().enumerate().map(move |(b, v)| format!("{},{},{v}", a + 1, b + 1)).collect::<Vec<_>>()
        }),
    )?;
    let mut rows = Vec::new();
    let mut empirical = Vec::new();
    let mut series = vec![Series {
        name: "analytic |rc|".into(),
        points: rc.rc.iter().enumerate().map(|(i, v)| ((i + 1) as f64, v.abs())).collect(),
    }];
    for &j0 in &j0s {
        for &n in &ns {
            let (emp, warn) = rc_empirical(&l, j0, n, j_max);
            let mut sup: f64 = 0.0;
            for (i, v) in emp.rc.iter().enumerate() {
                rows.push(format!("{n},{j0},{},{v},{}", i + 1, rc.rc[i]));
                sup = sup.max((v - rc.rc[i]).abs());
            }
            series.push(Series {
                name: format!("empirical n={n} j0={j0}"),
                points: emp.rc.iter().enumerate().map(|(i, v)| ((i + 1) as f64, v.abs())).collect(),
            });
            empirical.push(json!({ "n": n, "j0": j0, "sup_error": sup, "warning": warn }));
        }
    }
    out.csv("rc_empirical.csv", "n,j0,j,rc_empirical,rc_analytic", rows)?;
    out.text("rc.svg", &plot::line_chart("Boundary layer", "j", "|rc(j)|", &series, false, true))?;
    Ok((
        0,
        json!({
            "alpha": l.alpha,
            "mu": l.gauss.mu,
            "beta": l.gauss.beta,
            "delta_prime_one": l.delta_prime,
            "rc_fit": rc.rc_fit,
            "rc_imaginary_residue": rc.imaginary_residue,
            "ru_fit": ru.ru_fit,
            "ru_imaginary_residue": ru.imaginary_residue,
            "empirical": empirical,
        }),
    ))
}

fn err_map(cfg: &ExperimentConfig, out: &Out) -> Result<(i32, Value), CliError> {
    let l = match layer_data(cfg)? {
        Ok(l) => l,
        Err(rep) => return Ok((2, rep)),
    };
    let ns = cfg.grids.n.clone().unwrap_or_else(|| (1..=200).map(|k| 10 * k).collect());
    let j0s = cfg.grids.j0.clone().unwrap_or_else(|| (1..=1000).collect());
    let js = cfg.grids.j.clone().unwrap_or_else(|| vec![1]);
    let opts = ErrFitOptions { noise_floor: cfg.tolerances.err_noise_floor, ..Default::default() };
    let rep = err_bound_fit(&l, &ns, &j0s, &js, &opts)?;
    for (k, &j) in js.iter().enumerate() {
        let name = if k == 0 { "err_map.csv".to_string() } else { format!("err_map_j{j}.csv") };
        out.csv(
            &name,
            "n,j0,scaled_err",
            rep.heatmap.iter().filter(|c| c.j == j).map(|c| format!("{},{},{}", c.n, c.j0, c.scaled_err)),
        )?;
    }
    // Coarsen to at most 100 × 100 cells for the picture (max over each block).
    let n_hi = *ns.iter().max().unwrap() as f64;
    let j_hi = *j0s.iter().max().unwrap() as f64;
    let mut grid = std::collections::BTreeMap::<(u32, u32), f64>::new();
    for c in rep.heatmap.iter().filter(|c| c.j == js[0]) {
        let key = ((c.n as f64 / n_hi * 99.0) as u32, (c.j0 as f64 / j_hi * 99.0) as u32);
        let e = grid.entry(key).or_insert(0.0);
        *e = e.max(c.scaled_err);
    }
    let cells: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|(&(a, b), &v)| (a as f64 * n_hi / 99.0, b as f64 * j_hi / 99.0, v))
        .collect();
    out.text("err_map.svg", &plot::heatmap("n^(1/2mu) |Err| at j = first grid value", "n", "j0", &cells))?;
    let asym = whole_line_asymptotic_check(&l, &[100, 400, 1600]);
    Ok((
        0,
        json!({
            "c0": rep.c0,
            "positive_c0_found": rep.c0.is_some(),
            "trials": rep.trials,
            "cells": rep.cells,
            "cells_below_noise_floor": rep.cells_below_floor,
            "whole_line_asymptotics": asym,
        }),
    ))
}

fn growth(cfg: &ExperimentConfig, out: &Out) -> Result<(i32, Value), CliError> {
    let js = cfg.grids.big_j.clone().unwrap_or_else(|| geometric_j_list(23000));
    let qs: Vec<f64> = cfg
        .grids
        .q
        .clone()
        .map(|q| q.iter().map(|x| x.value()).collect())
        .unwrap_or_else(|| vec![f64::INFINITY, 2.0]);
    let n_max = cfg.grids.n_max.unwrap_or(2000);
    let (lo, hi) = cfg.grids.fit_window.unwrap_or((200.min(n_max), n_max));
    let rec = growth_experiment(&cfg.scheme, &qs, &js, n_max)?;
    let id = &cfg.scheme_id;
    out.csv(
        "growth.csv",
        "scheme_id,q,J,n,ratio",
        rec.iter().map(|r| format!("{id},{},{},{},{}", fmt_q(r.q), r.j, r.n, r.ratio)),
    )?;
    let mut summary = Vec::new();
    let mut max_rows = Vec::new();
    let mut series = Vec::new();
    for &q in &qs {
        let m = max_over_j(&rec, q);
        let slope = loglog_slope(&m, lo, hi);
        let tail: Vec<f64> = m.iter().filter(|p| p.0 >= 500).map(|p| p.1).collect();
        let variation = if tail.is_empty() {
            Value::Null
        } else {
            let mx = tail.iter().cloned().fold(0.0, f64::max);
            let mn = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            json!((mx - mn) / mx)
        };
        max_rows.extend(m.iter().map(|(n, v)| format!("{},{n},{v}", fmt_q(q))));
        series.push(Series { name: format!("q = {}", fmt_q(q)), points: m.iter().map(|&(n, v)| (n as f64, v)).collect() });
        summary.push(json!({ "q": fmt_q(q), "slope": slope, "fit_window": [lo, hi], "relative_variation_after_500": variation }));
    }
    out.csv("growth_max.csv", "q,n,max_ratio", max_rows)?;
    out.text("growth.svg", &plot::line_chart("max over J of ||T^n u_J|| / ||u_J||", "n", "ratio", &series, true, true))?;
    Ok((0, json!({ "slopes": summary, "J": js, "n_max": n_max })))
}

fn oracle(cfg: &ExperimentConfig, out: &Out) -> Result<(i32, Value), CliError> {
    let s = &cfg.scheme;
    let n_max = cfg.grids.n_max.unwrap_or(50);
    let j0s = cfg.grids.j0.clone().unwrap_or_else(|| (1..=30).collect());
    let j_max = cfg.grids.j.as_ref().and_then(|j| j.iter().max().copied()).unwrap_or(30);
    let r0s = cfg.grids.r0.clone().unwrap_or_else(|| vec![0.02, 0.05, 0.2]);
    let tol = cfg.tolerances.oracle;
    // Time-stepped reference: stepped[j0 index][n][j − 1].
    let stepped: Vec<Vec<Vec<f64>>> = j0s
        .iter()
        .map(|&j0| {
            let mut f = HalfLineField::dirac(s, j0);
            let mut rows = Vec::new();
            for _ in 0..=n_max {
                rows.push((1..=j_max).map(|j| f.get(j as isize)).collect());
                f = halfline::evolution::apply_half_line(s, &f).expect("ghosts are recomputed");
            }
            rows
        })
        .collect();
    let mut rows = Vec::new();
    let mut per_r0 = Vec::new();
    let mut tables = Vec::new();
    for &r0 in &r0s {
        let t = Instant::now();
        let tab = inverse_laplace_table(s, n_max, &j0s, j_max, r0, None)?;
        let (mut worst, mut imag): (f64, f64) = (0.0, 0.0);
        for n in 0..=n_max {
            for (ji, &j0) in j0s.iter().enumerate() {
                for j in 1..=j_max {
                    let v = tab.values[n][ji][j - 1];
                    let reference = stepped[ji][n][j - 1];
                    let d = (v.re - reference).abs();
                    worst = worst.max(d);
                    imag = imag.max(v.im.abs());
                    rows.push(format!("{r0},{n},{j0},{j},{},{reference},{d}", v.re));
                }
            }
        }
        per_r0.push(json!({
            "r0": r0, "nodes": tab.nodes, "max_abs_diff": worst, "max_imaginary": imag,
            "pass": worst < tol, "seconds": t.elapsed().as_secs_f64(),
        }));
        tables.push(tab);
    }
    let mut cross: f64 = 0.0;
    for a in &tables {
        for b in &tables {
            for (x, y) in a.values.iter().flatten().flatten().zip(b.values.iter().flatten().flatten()) {
                cross = cross.max((x.re - y.re).abs());
            }
        }
    }
    out.csv("oracle.csv", "r0,n,j0,j,contour,stepped,abs_diff", rows)?;
    Ok((0, json!({ "per_r0": per_r0, "cross_r0_max_diff": cross, "r0_independent": cross < tol })))
}
