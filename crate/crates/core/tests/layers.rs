use halfline::evolution::{temporal_green, temporal_green_whole};
use halfline::greens::{
    err_bound_fit, err_field, rc_analytic, ru_analytic, whole_line_asymptotic_check, BoundaryLayers, ErrFitOptions,
    GaussianParams,
};
use halfline::resolvent::pole_residue_limit;
use halfline::scheme::{boundary_matrix, builtin_lfr, builtin_o3, builtin_o3_stable};
use halfline::spectral::{
    boundary_images, lopatinskii_derivative_at_one, residue_condition, stable_basis, stable_roots,
};
use halfline::{Complex64 as C, SchemeDefinition};
use nalgebra::DVector;
use proptest::prelude::*;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

fn lfr() -> SchemeDefinition {
    builtin_lfr(-0.5, 0.75, 5.0).unwrap()
}

fn o3() -> SchemeDefinition {
    builtin_o3_stable(-0.5).unwrap()
}

/// An O3 boundary with `Δ(1) = 0` and a free second coefficient.
fn o3_with_b2(b2: f64) -> SchemeDefinition {
    let ks = stable_roots(&o3(), c(1.0)).unwrap()[0].re;
    builtin_o3(-0.5, (1.0 - b2 * ks * ks) / ks, b2).unwrap()
}

/// `𝓡ᶜ` rebuilt from a stable basis rescaled by `scale`: the Cramer coefficients
/// and `Δ'(1)` both pick up the same factor.
fn rc_with_scaled_basis(s: &SchemeDefinition, scale: C, j: usize) -> C {
    let bmat = boundary_matrix(s);
    let mut basis = stable_basis(s, c(1.0)).unwrap();
    for v in basis.vectors.iter_mut() {
        *v *= scale;
    }
    let imgs = boundary_images(&bmat, &basis);
    let y = (&bmat * DVector::from_element(bmat.ncols(), 1.0)).map(c);
    let dp = lopatinskii_derivative_at_one(s, 1e-2).unwrap() * scale.powi(s.r as i32);
    let alpha = s.alpha();
    (0..s.r)
        .map(|k| {
            let mut m = imgs.clone();
            m.set_column(k, &y);
            let w = m.determinant() / (alpha * dp);
            // p-th coordinate (index p − 1) of 𝕄(1)^{j−1} w e_k.
            let e = &basis.vectors[k];
            w * e[s.p - 1] * basis.eigenvalues[k].powi(j as i32 - 1)
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_function_matches_erfc(beta in 0.05f64..2.0, x in -6.0f64..6.0) {
        let g = GaussianParams::new(1, c(beta)).unwrap();
        let exact = 0.5 * libm::erfc(x / (2.0 * beta.sqrt()));
        prop_assert!((g.e(x).re - exact).abs() < 1e-10, "{} vs {exact}", g.e(x));
        let h = (-x * x / (4.0 * beta)).exp() / (4.0 * std::f64::consts::PI * beta).sqrt();
        prop_assert!((g.h(x).re - h).abs() < 1e-10);
    }

    #[test]
    fn quartic_kernel_is_even_and_splits(beta in 0.01f64..1.0, x in 0.0f64..8.0) {
        let g = GaussianParams::new(2, c(beta)).unwrap();
        prop_assert!((g.h(x) - g.h(-x)).norm() < 1e-13);
        prop_assert!((g.e(x) + g.e(-x) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn rc_ignores_basis_scaling(k in 0.1f64..10.0, t in 0.0f64..6.28, j in 1usize..15, b2 in -2.0f64..2.0) {
        for s in [lfr(), o3_with_b2(b2)] {
            let layers = BoundaryLayers::new(&s).unwrap();
            let v = rc_with_scaled_basis(&s, C::from_polar(k, t), j);
            let want = layers.rc(j);
            prop_assert!((v - want).norm() < 1e-9 * want.norm().max(1e-3), "{v} vs {want}");
        }
    }

    #[test]
    fn rc_vanishes_exactly_when_the_residue_condition_holds(b2 in -3.0f64..3.0, alpha in -0.9f64..-0.1, d in 0.0f64..1.0) {
        // O3 boundaries with Δ(1) = 0: residue condition iff 1 − b1 − b2 = 0.
        let s = o3_with_b2(b2);
        let layers = BoundaryLayers::new(&s).unwrap();
        let max_rc = (1..=30).map(|j| layers.rc(j).norm()).fold(0.0, f64::max);
        prop_assert_eq!(residue_condition(&s, 1e-10).unwrap(), max_rc < 1e-10);
        // LFR with the only admissible boundary b = 1/κ_s(1): never satisfied.
        let dd = alpha * alpha + 0.05 + d * (0.9 - alpha * alpha);
        prop_assume!((dd + alpha).abs() > 1e-2);
        let s = builtin_lfr(alpha, dd, (dd - alpha) / (dd + alpha)).unwrap();
        let layers = BoundaryLayers::new(&s).unwrap();
        let max_rc = (1..=30).map(|j| layers.rc(j).norm()).fold(0.0, f64::max);
        prop_assert!(!residue_condition(&s, 1e-10).unwrap());
        prop_assert!(max_rc >= 1e-10);
    }
}

#[test]
fn error_function_limits() {
    let g = GaussianParams::new(1, c(0.25)).unwrap();
    assert!((g.e(-10.0).re - 1.0).abs() < 1e-8);
    assert!(g.e(10.0).norm() < 1e-8);
    assert!((g.h(0.0).re - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
    let f = g.appendix_f(0.5, 0.3).unwrap();
    assert!((-f / (2.0 * std::f64::consts::PI) - g.e(0.5)).norm() < 1e-6);
    assert!(g.appendix_f(25.0, 0.3).unwrap().norm() < 1e-6);
}

#[test]
fn stable_o3_stable_boundary_layers() {
    let layers = BoundaryLayers::new(&o3()).unwrap();
    let rc = rc_analytic(&layers, 40);
    assert!(rc.rc.iter().all(|v| v.abs() < 1e-12));
    let ru = ru_analytic(&layers, 30, 30);
    let fit = ru.ru_fit.expect("ru decays");
    assert!(fit.c > 0.0);
    assert!(ru.ru[29][0].abs() < 1e-20 * ru.ru[0][0].abs().max(1.0) + 1e-20);
    assert!(ru.imaginary_residue < 1e-12);
}

#[test]
fn lfr_has_no_unstable_layer() {
    let layers = BoundaryLayers::new(&lfr()).unwrap();
    for j0 in 1..10 {
        for j in 1..10 {
            assert!(layers.ru(j0, j).norm() < 1e-15);
        }
    }
    for j in 1..20 {
        assert!((layers.rc(j) - layers.rc_via_projectors(j)).norm() < 1e-10);
    }
}

#[test]
fn unstable_layer_matches_the_resolvent_pole() {
    // For O3, 𝓡ᶜ = 0 and the pole of R(z, j0, ·) at 1 is carried by 𝓡ᵘ alone.
    let s = o3();
    let layers = BoundaryLayers::new(&s).unwrap();
    let js: Vec<usize> = (1..=6).collect();
    for j0 in [1usize, 2, 4] {
        let lim = pole_residue_limit(&s, j0, &js, 2e-4).unwrap();
        for (&j, l) in js.iter().zip(&lim) {
            let want = layers.rc(j) + layers.ru(j0, j);
            assert!((l - want).norm() < 1e-6, "j0 = {j0}, j = {j}: {l} vs {want}");
        }
    }
    // And 𝒢 − 𝒢̃ settles on 𝓡ᵘ once the wave has passed the boundary.
    for j0 in [1usize, 3] {
        let g = temporal_green(&s, 1500, j0);
        let gw = temporal_green_whole(&s, 1500);
        for j in 1..8 {
            let d = g.get(j) - gw.get(j - j0 as isize);
            assert!((d - layers.ru(j0, j as usize).re).abs() < 1e-8, "j0 = {j0}, j = {j}");
        }
    }
}

#[test]
fn remainder_before_the_wave_reaches_the_boundary() {
    let layers = BoundaryLayers::new(&lfr()).unwrap();
    let (n, j0) = (10, 30);
    let err = err_field(&layers, n, j0, 40);
    for (i, v) in err.values.iter().enumerate() {
        let want = -(layers.activation(n, j0) * layers.rc(i + 1)).re;
        assert!((v - want).abs() < 1e-15, "j = {}", i + 1);
    }
    assert_eq!(err_field(&layers, 0, 3, 5).values, vec![0.0; 5]);
}

#[test]
fn bound_fit_rejects_large_rates() {
    let layers = BoundaryLayers::new(&lfr()).unwrap();
    let ns: Vec<usize> = (1..=60).map(|k| 10 * k).collect();
    let j0s: Vec<usize> = (1..=300).collect();
    let rep = err_bound_fit(&layers, &ns, &j0s, &[1], &ErrFitOptions::default()).unwrap();
    assert!(rep.c0.unwrap() > 0.0);
    let big = rep.trials.iter().find(|t| t.c0 >= 2.0).unwrap();
    assert!(!big.stable);
}

#[test]
fn whole_line_profile_approaches_the_gaussian() {
    for s in [lfr(), o3()] {
        let layers = BoundaryLayers::new(&s).unwrap();
        let t = whole_line_asymptotic_check(&layers, &[100, 400, 1600]);
        assert!(t[0].1 > t[1].1 && t[1].1 > t[2].1, "{t:?}");
    }
}
