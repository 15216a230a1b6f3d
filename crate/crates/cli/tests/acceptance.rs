//! Acceptance gate. Prints one `[PASS]`/`[FAIL]` line per criterion with the
//! measured numbers underneath, and exits nonzero if any criterion fails that is
//! not listed as a known deviation.

use std::time::Instant;

use halfline::evolution::{
    apply_half_line, apply_whole_line, for_each_whole_line_step, geometric_j_list, growth_experiment,
    loglog_slope, max_over_j, temporal_green, HalfLineField, WholeLineField,
};
use halfline::greens::{err_bound_fit, rc_analytic, rc_empirical, BoundaryLayers, ErrFitOptions, GaussianParams};
use halfline::resolvent::{inverse_laplace_table, pole_residue_limit, r_function};
use halfline::scheme::{boundary_matrix, builtin_lfr, builtin_o3_stable, o3_stable_boundary};
use halfline::spectral::{characteristic_roots, companion_matrix, projector_set, spectral_split, spectral_split_in_o, Region};
use halfline::{Complex64 as C, SchemeDefinition};
use halfline_cli::{run, Command, ExperimentConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

struct Gate {
    failed: Vec<String>,
    known: Vec<String>,
}

impl Gate {
    fn record(&mut self, id: &str, title: &str, pass: bool, known: Option<&str>, notes: &[String]) {
        match (pass, known) {
            (true, _) => println!("[PASS] {id} {title}"),
            (false, Some(why)) => {
                println!("[FAIL] {id} {title} (known deviation: {why})");
                self.known.push(id.into());
            }
            (false, None) => {
                println!("[FAIL] {id} {title}");
                self.failed.push(id.into());
            }
        }
        for n in notes {
            println!("       {n}");
        }
    }
}

fn lfr() -> SchemeDefinition {
    builtin_lfr(-0.5, 0.75, 5.0).unwrap()
}

fn o3() -> SchemeDefinition {
    builtin_o3_stable(-0.5).unwrap()
}

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

fn nearest(roots: &[C], target: C) -> f64 {
    roots.iter().map(|k| (k - target).norm()).fold(f64::INFINITY, f64::min)
}

// Deterministic low-discrepancy points in the exterior of the unit disk.
fn exterior_samples(count: usize) -> Vec<C> {
    let g = 0.618_033_988_749_895;
    (0..count)
        .map(|k| {
            let u = ((k as f64 + 0.5) * g).fract();
            let v = ((k as f64 + 0.5) * g * g).fract();
            C::from_polar(1.002 + 3.0 * u, 2.0 * std::f64::consts::PI * v)
        })
        .collect()
}

fn spectral_facts(g: &mut Gate) {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let s17 = 17f64.sqrt();
    for (name, s, expected) in [
        ("LFR", lfr(), vec![c(1.0), c(0.2)]),
        ("O3", o3(), vec![c(1.0), c(4.0 + s17), c(4.0 - s17)]),
    ] {
        let roots = characteristic_roots(&s, c(1.0)).unwrap();
        let worst = expected.iter().map(|&e| nearest(&roots, e)).fold(0.0, f64::max);
        ok &= roots.len() == expected.len() && worst < 1e-10;
        notes.push(format!("{name}: roots at z=1 {:?}, worst distance to closed form {worst:.1e}", roots.iter().map(|k| format!("{:.6}", k.re)).collect::<Vec<_>>()));
        let split = spectral_split(&s, c(1.0), 1e-8).unwrap();
        ok &= split.region == Region::AtOne && split.stable.len() == s.r && split.unstable.len() == s.p - 1;
        let mut good = 0;
        for z in exterior_samples(200) {
            match spectral_split_in_o(&s, z, 1e-8) {
                Ok(sp) if sp.stable.len() == s.r && sp.unstable.len() == s.p => good += 1,
                _ => {}
            }
        }
        ok &= good == 200;
        notes.push(format!("{name}: {good}/200 sampled z in O split into r = {} stable and p = {} unstable roots", s.r, s.p));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    notes.push(format!("runtime {secs:.3} s"));
    g.record("C1", "spectral facts at z = 1 and root counts in O", ok, None, &notes);
}

fn verdict_of(json: &str, dir: &std::path::Path) -> Option<String> {
    let cfg = ExperimentConfig::from_json(json).unwrap();
    let out = run(Command::Check, &cfg, dir).unwrap();
    out.report.get("verdict").and_then(|v| v.as_str()).map(String::from)
}

fn verdict_dichotomy(g: &mut Gate) {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let b_ones = &boundary_matrix(&lfr()) * nalgebra::DVector::from_element(2, 1.0);
    let v_lfr = verdict_of(r#"{"scheme":{"builtin":"lfr","alpha":-0.5,"D":0.75,"b":5},"id":"lfr"}"#, &dir.path().join("lfr"));
    notes.push(format!("LFR(b=5): B(1,1)^T = {:.12}, verdict {:?}", b_ones[0], v_lfr));
    let kappa_s = 4.0 - 17f64.sqrt();
    let (b1, b2) = o3_stable_boundary(-0.5).unwrap();
    let closed = ((1.0 + kappa_s) / kappa_s, -1.0 / kappa_s);
    let v_o3 = verdict_of(r#"{"scheme":{"builtin":"o3","alpha":-0.5},"id":"o3"}"#, &dir.path().join("o3"));
    notes.push(format!(
        "O3: b1 = {b1:.12} (closed form {:.12}), b2 = {b2:.12} (closed form {:.12}), 1 - b1 - b2 = {:.1e}, verdict {:?}",
        closed.0,
        closed.1,
        1.0 - b1 - b2,
        v_o3
    ));
    let ok = (b_ones[0] + 4.0).abs() < 1e-12
        && v_lfr.as_deref() == Some("ℓ¹-stable, ℓ^q-unstable for q>1")
        && (b1 - closed.0).abs() < 1e-10
        && (b2 - closed.1).abs() < 1e-10
        && (1.0 - b1 - b2).abs() < 1e-10
        && v_o3.as_deref() == Some("ℓ^q-stable for all q");
    g.record("C2", "stability verdict dichotomy", ok, None, &notes);
}

fn growth_rates(g: &mut Gate) {
    let t = Instant::now();
    let js = geometric_j_list(23000);
    let qs = [f64::INFINITY, 2.0];
    let mut notes = Vec::new();
    let rec = growth_experiment(&lfr(), &qs, &js, 2000).unwrap();
    let s_inf = loglog_slope(&max_over_j(&rec, f64::INFINITY), 200, 2000);
    let s_2 = loglog_slope(&max_over_j(&rec, 2.0), 200, 2000);
    notes.push(format!("LFR slopes over n in [200, 2000]: q=inf {s_inf:.4} (target 1.0 +- 0.1), q=2 {s_2:.4} (target 0.5 +- 0.1)"));
    let mut ok = (s_inf - 1.0).abs() <= 0.1 && (s_2 - 0.5).abs() <= 0.1;
    let rec = growth_experiment(&o3(), &qs, &js, 2000).unwrap();
    for q in qs {
        let tail: Vec<f64> = max_over_j(&rec, q).into_iter().filter(|p| p.0 >= 500).map(|p| p.1).collect();
        let mx = tail.iter().cloned().fold(0.0, f64::max);
        let mn = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let var = (mx - mn) / mx;
        ok &= var < 0.05;
        notes.push(format!("O3 q={q}: ratio in [{mn:.5}, {mx:.5}] for n >= 500, relative variation {var:.4} (< 0.05)"));
    }
    notes.push(format!("{} probe sizes J up to {}, runtime {:.1} s", js.len(), js.last().unwrap(), t.elapsed().as_secs_f64()));
    g.record("C3", "norm growth rates", ok, None, &notes);
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn boundary_layer(g: &mut Gate) {
    let layers = BoundaryLayers::new(&lfr()).unwrap();
    let j_max = 30;
    let analytic = rc_analytic(&layers, j_max).rc;
    let err = |n| sup_diff(&rc_empirical(&layers, 50, n, j_max).0.rc, &analytic);
    let (e500, e1000) = (err(500), err(1000));
    let mut notes = vec![format!("sup_j<=30 |empirical - analytic|: n=500 {e500:.2e}, n=1000 {e1000:.2e}")];
    let floor = 1e-12;
    let halving = if e1000 <= e500 / 2.0 {
        notes.push("halving: observed directly".into());
        true
    } else if e500 < floor && e1000 < floor {
        notes.push(format!("halving: both errors are below the roundoff floor {floor:.0e}, so no further decay is observable"));
        true
    } else {
        false
    };
    let decay: Vec<String> = [100, 150, 200, 300, 400].iter().map(|&n| format!("n={n} {:.1e}", err(n))).collect();
    notes.push(format!("approach to the floor: {}", decay.join(", ")));
    let ratio = (1..j_max).map(|j| (layers.rc(j + 1).re / layers.rc(j).re - 0.2).abs()).fold(0.0, f64::max);
    let closed = (1..=j_max).map(|j| (analytic[j - 1] - 4.0 * 0.2f64.powi(j as i32)).abs()).fold(0.0, f64::max);
    notes.push(format!("max |rc(j+1)/rc(j) - 0.2| = {ratio:.1e}; max |rc(j) - 4*0.2^j| = {closed:.1e}"));
    let ok = e500 < 1e-3 && halving && ratio < 1e-8;
    g.record("C4", "boundary layer rc: analytic against empirical", ok, None, &notes);
}

fn err_bound(g: &mut Gate) {
    let ns: Vec<usize> = (1..=200).map(|k| 10 * k).collect();
    let j0s: Vec<usize> = (1..=1000).collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, s) in [("LFR", lfr()), ("O3", o3())] {
        let t = Instant::now();
        let layers = BoundaryLayers::new(&s).unwrap();
        let rep = err_bound_fit(&layers, &ns, &j0s, &[1], &ErrFitOptions::default()).unwrap();
        ok &= rep.c0.map_or(false, |c0| c0 > 0.0);
        let sups = rep
            .c0
            .and_then(|c0| rep.trials.iter().find(|t| t.c0 == c0))
            .map(|t| t.octave_sups.iter().map(|(n, v)| format!("{n}:{v:.3}")).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        notes.push(format!(
            "{name} (mu = {}): c0 = {:?}, octave sups [{sups}], {} cells ({} below noise floor), {:.1} s",
            layers.gauss.mu,
            rep.c0,
            rep.cells,
            rep.cells_below_floor,
            t.elapsed().as_secs_f64()
        ));
    }
    g.record("C5", "Gaussian bound on the remainder with n-stable sup", ok, None, &notes);
}

fn special_functions(g: &mut Gate) {
    let mut notes = Vec::new();
    let heat = GaussianParams::new(1, c(0.25)).unwrap();
    let h0 = (heat.h(0.0).re - 1.0 / std::f64::consts::PI.sqrt()).abs();
    notes.push(format!("|H(0) - 1/sqrt(pi)| = {h0:.1e} (mu=1, beta=1/4)"));
    let o3_beta = BoundaryLayers::new(&o3()).unwrap().gauss.beta;
    let quartic = GaussianParams::new(2, o3_beta).unwrap();
    let mut ok = h0 < 1e-8;
    let (mut e0, mut sym, mut app, mut sind): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for p in [&heat, &quartic] {
        e0 = e0.max((p.e(0.0) - 0.5).norm());
        for k in 0..=50 {
            let x = 0.1 * k as f64;
            sym = sym.max((p.e(x) + p.e(-x) - 1.0).norm());
        }
        for k in -20..=20 {
            let x = 0.25 * k as f64;
            let f: Vec<C> = [0.1, 0.3, 0.7].iter().map(|&s| p.appendix_f(x, s).unwrap()).collect();
            for fv in &f {
                app = app.max((-fv / (2.0 * std::f64::consts::PI) - p.e(x)).norm());
            }
            sind = sind.max((f[0] - f[2]).norm() / (2.0 * std::f64::consts::PI));
        }
    }
    notes.push(format!("max |E(0) - 1/2| = {e0:.1e}; max |E(x) + E(-x) - 1| on [0,5] = {sym:.1e}"));
    notes.push(format!(
        "appendix identity on x in [-5,5], s in {{0.1,0.3,0.7}}, (mu,beta) in {{(1,1/4), (2,{:.7})}}: max error {app:.1e}, s-independence {sind:.1e}",
        o3_beta.re
    ));
    ok &= e0 < 1e-8 && sym < 1e-8 && app < 1e-6 && sind < 1e-6;
    g.record("C6", "generalized Gaussians and the contour identity", ok, None, &notes);
}

fn oracle(g: &mut Gate) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    let t = Instant::now();
    let j0s: Vec<usize> = (1..=30).collect();
    for (name, s) in [("LFR", lfr()), ("O3", o3())] {
        let stepped: Vec<Vec<Vec<f64>>> = j0s
            .iter()
            .map(|&j0| (0..=50).map(|n| (1..=30).map(|j| temporal_green(&s, n, j0).get(j)).collect()).collect())
            .collect();
        let mut tables = Vec::new();
        for r0 in [0.02, 0.05, 0.2] {
            let tab = pool.install(|| inverse_laplace_table(&s, 50, &j0s, 30, r0, None)).unwrap();
            let mut worst: f64 = 0.0;
            for n in 0..=50 {
                for ji in 0..j0s.len() {
                    for j in 0..30 {
                        worst = worst.max((tab.values[n][ji][j].re - stepped[ji][n][j]).abs());
                    }
                }
            }
            ok &= worst < 1e-8;
            notes.push(format!("{name} r0={r0}: max |contour - stepped| = {worst:.1e} with {} nodes", tab.nodes));
            tables.push(tab);
        }
        let mut cross: f64 = 0.0;
        for a in &tables[1..] {
            for (x, y) in a.values.iter().flatten().flatten().zip(tables[0].values.iter().flatten().flatten()) {
                cross = cross.max((x - y).norm());
            }
        }
        ok &= cross < 1e-8;
        notes.push(format!("{name}: max difference across r0 = {cross:.1e}"));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    notes.push(format!("single-threaded runtime {secs:.1} s (< 300 s)"));
    g.record("C7", "inverse-Laplace reconstruction against time stepping", ok, None, &notes);
}

fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn structural(g: &mut Gate) {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut literal_sign = true;
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for (name, s) in [("LFR", lfr()), ("O3", o3())] {
        let (r, p) = (s.r as isize, s.p as isize);
        // Finite support: the stencil reaches p cells left and r cells right per step,
        // so after n steps from j0 nothing lies outside [j0 − np, j0 + nr].
        let mut support_ok = true;
        let mut w = WholeLineField::dirac();
        let mut h = HalfLineField::dirac(&s, 40);
        for n in 1..=60isize {
            w = apply_whole_line(&s, &w);
            h = apply_half_line(&s, &h).unwrap();
            for j in -(n * p) - 20..=n * r + 20 {
                let inside = j >= -(n * p) && j <= n * r;
                support_ok &= inside || w.get(j) == 0.0;
            }
            for j in 40 + n * r + 1..40 + n * r + 20 {
                support_ok &= h.get(j) == 0.0;
            }
            support_ok &= w.get(-(n * p)) != 0.0 && w.get(n * r) != 0.0;
        }
        let mut mass: f64 = 0.0;
        for_each_whole_line_step(&s, 2000, |_, f| mass = mass.max((f.mass() - 1.0).abs()));
        ok &= support_ok && mass < 1e-12;
        notes.push(format!("{name}: support exact {support_ok}; max |mass - 1| over n <= 2000 = {mass:.1e}"));

        let ps = projector_set(&s, c(1.0)).unwrap();
        let d = s.r + s.p;
        let id = DMatrix::<C>::identity(d, d);
        let m = companion_matrix(&s, c(1.0));
        let mut defect: f64 = max_abs(&(&ps.pi_ss + &ps.pi_c + &ps.pi_su - &id));
        let mut ranks = Vec::new();
        for (pi, want) in [(&ps.pi_ss, s.r), (&ps.pi_c, 1), (&ps.pi_su, s.p - 1)] {
            defect = defect.max(max_abs(&(pi * pi - pi)));
            defect = defect.max(max_abs(&(&m * pi - pi * &m)));
            let tr = pi.trace();
            defect = defect.max((tr - c(want as f64)).norm());
            ranks.push(format!("{:.12}", tr.re));
        }
        ok &= defect < 1e-10;
        notes.push(format!("{name}: projector completeness/idempotence/commutation/rank defect {defect:.1e}, traces [{}]", ranks.join(", ")));

        let pce = &ps.pi_c * &ps.e;
        let target = s.a_p() / s.alpha();
        let lit = pce.iter().map(|x| (x - target).norm()).fold(0.0, f64::max);
        let flipped = pce.iter().map(|x| (x + target).norm()).fold(0.0, f64::max);
        literal_sign &= lit < 1e-10;
        ok &= flipped < 1e-10;
        notes.push(format!(
            "{name}: pi_c(1)e = {:?}; a_p/alpha = {target}; |pi_c e - (a_p/alpha)1| = {lit:.1e}, |pi_c e + (a_p/alpha)1| = {flipped:.1e}",
            pce.iter().map(|x| format!("{:.6}", x.re)).collect::<Vec<_>>()
        ));

        // Superposition: T^n u = Σ_j0 u_j0 G(n, j0, ·) on random interiors.
        let mut sup: f64 = 0.0;
        for _ in 0..5 {
            let interior: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = rng.gen_range(1..40);
            let mut u = HalfLineField::from_interior(&s, &interior);
            for _ in 0..n {
                u = apply_half_line(&s, &u).unwrap();
            }
            let greens: Vec<_> = (1..=12).map(|j0| temporal_green(&s, n, j0)).collect();
            for j in 1..=(12 + n * s.r) as isize {
                let sum: f64 = interior.iter().zip(&greens).map(|(a, gf)| a * gf.get(j)).sum();
                sup = sup.max((sum - u.get(j)).abs());
            }
        }
        ok &= sup < 1e-12;
        notes.push(format!("{name}: superposition max defect {sup:.1e}"));
    }
    notes.push("the central projector satisfies pi_c(1)e = -(a_p/alpha)(1,...,1)^T; the stated +(a_p/alpha) sign is contradicted by the eigendecomposition".into());
    let pass = ok && literal_sign;
    let known = if ok && !literal_sign { Some("pi_c(1)e carries the opposite sign; every other sub-check passes") } else { None };
    g.record("C8", "structural invariants", pass, known, &notes);
}

fn pole(g: &mut Gate) {
    let mut ok = true;
    let mut notes = Vec::new();
    let js: Vec<usize> = (1..=10).collect();
    for (name, s) in [("LFR", lfr()), ("O3", o3())] {
        let layers = BoundaryLayers::new(&s).unwrap();
        let mut bound: f64 = 0.0;
        let mut row = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let v = r_function(&s, c(1.0 + eps), 50, &js).unwrap();
            let m = v.iter().map(|x| (x * eps).norm()).fold(0.0, f64::max);
            bound = bound.max(m);
            row.push(format!("eps={eps:.0e}: max_j |(z-1)R| = {m:.6}"));
        }
        let lim = pole_residue_limit(&s, 50, &js, 2e-4).unwrap();
        let diff = js
            .iter()
            .zip(&lim)
            .map(|(&j, l)| (l - (layers.rc(j) + layers.ru(50, j))).norm())
            .fold(0.0, f64::max);
        ok &= bound.is_finite() && bound < 10.0 && diff < 1e-4;
        notes.push(format!("{name}: {}", row.join("; ")));
        notes.push(format!("{name}: limit at j=1 {:.8}, max_j<=10 |limit - (rc + ru(50, j))| = {diff:.1e}", lim[0].re));
    }
    g.record("C9", "pole of the boundary resolvent at z = 1", ok, None, &notes);
}

fn main() {
    let mut g = Gate { failed: Vec::new(), known: Vec::new() };
    let t = Instant::now();
    spectral_facts(&mut g);
    verdict_dichotomy(&mut g);
    growth_rates(&mut g);
    boundary_layer(&mut g);
    err_bound(&mut g);
    special_functions(&mut g);
    oracle(&mut g);
    structural(&mut g);
    pole(&mut g);
    println!(
        "acceptance: {} failed, {} known deviations, {:.1} s",
        g.failed.len(),
        g.known.len(),
        t.elapsed().as_secs_f64()
    );
    if !g.failed.is_empty() {
        std::process::exit(1);
    }
}
