//! Generalized Gaussians, boundary layers and the remainder of the Green's
//! function expansion.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{for_each_green_row, temporal_green, temporal_green_whole, WholeLineField};
use crate::scheme::{boundary_matrix, check_hypothesis_one, HypothesisOneOptions, SchemeDefinition};
use crate::spectral::{
    boundary_images, lopatinskii_derivative_at_one, projector_set, stable_basis, EigenClass, ProjectorSet,
    StableBasis,
};

type C = Complex64;

const MIN_NODES: usize = 2048;
const ENVELOPE_EXPONENT: f64 = 40.0;

/// `(μ, β)` of the kernel `e^{−βu^{2μ}}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussianParams {
    pub mu: usize,
    pub beta: C,
    /// Beyond `|x| > x_cut` the error function is 0 or 1 to below `2e-15`.
    pub x_cut: f64,
}

impl GaussianParams {
    pub fn new(mu: usize, beta: C) -> Result<Self> {
        if mu < 1 {
            return Err(Error::Domain("mu must be at least 1".into()));
        }
        if !(beta.re > 0.0) {
            return Err(Error::Domain(format!("Re(beta) = {} must be positive", beta.re)));
        }
        let mut p = Self { mu, beta, x_cut: f64::INFINITY };
        let mut x = 2.0;
        while x < 1e3 {
            let quiet = (0..=16).all(|k| p.e_quadrature(x * (1.0 + k as f64 / 16.0)).norm() < 2e-15);
            if quiet {
                break;
            }
            x *= 1.25;
        }
        p.x_cut = x;
        Ok(p)
    }

    /// Half-width where `Re(β)U^{2μ}` reaches the envelope exponent.
    fn cutoff(&self) -> f64 {
        (ENVELOPE_EXPONENT / self.beta.re).powf(1.0 / (2 * self.mu) as f64)
    }

    fn grid(&self, x: f64) -> (f64, usize) {
        let u = self.cutoff();
        let mut h = u / MIN_NODES as f64;
        if x != 0.0 {
            h = h.min(2.0 * PI / (16.0 * x.abs()));
        }
        (h, (u / h).ceil() as usize)
    }

    fn kernel(&self, u: f64) -> C {
        (-self.beta * u.powi(2 * self.mu as i32)).exp()
    }

    /// `H(x) = (1/2π)∫ e^{iux} e^{−βu^{2μ}} du`.
    pub fn h(&self, x: f64) -> C {
        let (h, n) = self.grid(x);
        let mut s = self.kernel(0.0) * 0.5;
        for k in 1..=n {
            let u = k as f64 * h;
            s += self.kernel(u) * (u * x).cos();
        }
        s * h / PI
    }

    /// `E(x) = ∫_x^∞ H = 1/2 − (1/π)∫_0^∞ sin(ux)/u · e^{−βu^{2μ}} du`.
    ///
    /// The single integral is entire in `u`, so the trapezoid rule converges
    /// spectrally; it also makes `E(x) + E(−x) = 1` hold by construction.
    pub fn e(&self, x: f64) -> C {
        if x > self.x_cut {
            C::new(0.0, 0.0)
        } else if x < -self.x_cut {
            C::new(1.0, 0.0)
        } else {
            self.e_quadrature(x)
        }
    }

    fn e_quadrature(&self, x: f64) -> C {
        let (h, n) = self.grid(x);
        let mut s = C::new(x * 0.5, 0.0);
        for k in 1..=n {
            let u = k as f64 * h;
            s += self.kernel(u) * ((u * x).sin() / u);
        }
        C::new(0.5, 0.0) - s * h / PI
    }

    /// `𝓕(x, s) = ∫ g(u, x, s) / (i(u + is)) du` with
    /// `g = exp(i(u+is)x − β(u+is)^{2μ})`, integrated along `Im = s`.
    pub fn appendix_f(&self, x: f64, s: f64) -> Result<C> {
        if !(s > 0.0) {
            return Err(Error::Domain("s must be positive".into()));
        }
        let i = C::new(0.0, 1.0);
        let u_max = 1.5 * (60.0 / self.beta.re).powf(1.0 / (2 * self.mu) as f64) + 1.0 + 2.0 * s;
        // The pole at u = −is sits at distance s from the contour.
        let h = (2.0 * PI * s / 45.0).min(2.0 * PI / (16.0 * x.abs().max(1.0)));
        let n = (u_max / h).ceil() as i64;
        let mut acc = C::new(0.0, 0.0);
        for k in -n..=n {
            let w = C::new(k as f64 * h, s);
            let g = (i * w * x - self.beta * w.powi(2 * self.mu as i32)).exp();
            acc += g / (i * w);
        }
        Ok(acc * h)
    }
}

pub fn gaussian_h(params: &GaussianParams, x: f64) -> C {
    params.h(x)
}

pub fn gaussian_e(params: &GaussianParams, x: f64) -> C {
    params.e(x)
}

pub fn appendix_f(params: &GaussianParams, x: f64, s: f64) -> Result<C> {
    params.appendix_f(x, s)
}

/// Fitted bound `|v| ≤ C e^{−c·t}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpFit {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

/// Log-linear least squares on the last 20% of the points (sorted by `t`),
/// then the smallest `C` making the bound hold on every point.
pub fn fit_exponential(points: &[(f64, f64)]) -> Option<ExpFit> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|(_, v)| v.abs() > 1e-250).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pts.len() < 5 {
        return None;
    }
    let t_lo = pts[0].0 + 0.8 * (pts[pts.len() - 1].0 - pts[0].0);
    let tail: Vec<(f64, f64)> = pts.iter().filter(|p| p.0 >= t_lo).map(|&(t, v)| (t, v.abs().ln())).collect();
    if tail.len() < 2 {
        return None;
    }
    let m = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let num: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if den == 0.0 {
        return None;
    }
    let c = -num / den;
    let big_c = pts.iter().map(|&(t, v)| v.abs().ln() + c * t).fold(f64::NEG_INFINITY, f64::max).exp();
    Some(ExpFit { c, big_c })
}

/// Everything at `z = 1` that the boundary layers are built from.
#[derive(Debug, Clone)]
pub struct BoundaryLayers {
    pub scheme: SchemeDefinition,
    pub alpha: f64,
    pub gauss: GaussianParams,
    pub delta_prime: C,
    basis: StableBasis,
    images: DMatrix<C>,
    bmat: DMatrix<C>,
    pub projectors: ProjectorSet,
}

fn replace_column_det(m: &DMatrix<C>, k: usize, y: &DVector<C>) -> C {
    let mut m = m.clone();
    m.set_column(k, y);
    m.determinant()
}

impl BoundaryLayers {
    /// Gathers `α, μ, β`, the stable basis at 1, `Δ'(1)` and the projectors at 1.
    pub fn new(scheme: &SchemeDefinition) -> Result<Self> {
        let h1 = check_hypothesis_one(scheme, HypothesisOneOptions::default())?;
        if !h1.satisfied {
            return Err(Error::Precondition(format!(
                "symbol hypothesis fails: {}",
                h1.failure.unwrap_or_default()
            )));
        }
        let gauss = GaussianParams::new(h1.mu, h1.beta)?;
        let one = C::new(1.0, 0.0);
        let basis = stable_basis(scheme, one)?;
        let b = boundary_matrix(scheme);
        let images = boundary_images(&b, &basis);
        let delta_prime = lopatinskii_derivative_at_one(scheme, 1e-2)?;
        let projectors = projector_set(scheme, one)?;
        Ok(Self {
            scheme: scheme.clone(),
            alpha: h1.alpha,
            gauss,
            delta_prime,
            basis,
            images,
            bmat: b.map(|x| C::new(x, 0.0)),
            projectors,
        })
    }

    /// `Σ_k w_k κ_k^{j−1+r}`: the `p`-th coordinate of `𝕄(1)^{j−1} Σ_k w_k e_k(1)`,
    /// evaluated on the stable eigenbasis.
    fn stable_sum(&self, w: &[C], j: usize) -> C {
        let r = self.scheme.r as i32;
        w.iter()
            .zip(&self.basis.eigenvalues)
            .map(|(wk, k)| wk * k.powi(j as i32 - 1 + r))
            .sum()
    }

    /// `D(1)y = com(𝓑e_1…𝓑e_r)ᵀ y / Δ'(1)`, by Cramer's rule.
    fn d_apply(&self, y: &DVector<C>) -> Vec<C> {
        (0..self.scheme.r)
            .map(|k| replace_column_det(&self.images, k, y) / self.delta_prime)
            .collect()
    }

    /// `𝓡ᶜ(j) = (1/(αΔ'(1))) Σ_k det(𝓑e_1, …, 𝓑(1…1)ᵀ at slot k, …, 𝓑e_r) κ_k^{j−1+r}`.
    pub fn rc(&self, j: usize) -> C {
        let ones = DVector::from_element(self.bmat.ncols(), C::new(1.0, 0.0));
        let y = &self.bmat * ones;
        let w: Vec<C> = (0..self.scheme.r)
            .map(|k| replace_column_det(&self.images, k, &y) / (self.alpha * self.delta_prime))
            .collect();
        self.stable_sum(&w, j)
    }

    /// `𝓡ᶜ(j)` through the central projector: the `p`-th coordinate of
    /// `𝕄(1)^{j−1}Vᶜ` with `Vᶜ = −E D(1) 𝓑 (1/a_p) πᶜ(1) e`.
    pub fn rc_via_projectors(&self, j: usize) -> C {
        let x = &self.projectors.pi_c * &self.projectors.e / C::new(self.scheme.a_p(), 0.0);
        let w = self.d_apply(&(&self.bmat * x));
        -self.stable_sum(&w, j)
    }

    /// `𝓡ᵘ(j0, j)`: the `p`-th coordinate of `𝕄(1)^{j−1}Vᵘ(1, j0)` with
    /// `Vᵘ = −E D(1) 𝓑 (1/a_p) 𝕄(1)^{−j0} π^{su}(1) e`.
    pub fn ru(&self, j0: usize, j: usize) -> C {
        let e = &self.projectors.e;
        let x = self.projectors.power_on_class(EigenClass::StronglyUnstable, -(j0 as i64), e) / C::new(self.scheme.a_p(), 0.0);
        let w = self.d_apply(&(&self.bmat * x));
        -self.stable_sum(&w, j)
    }

    /// `E((j0 + nα)/n^{1/2μ})`, the activation of `𝓡ᶜ`.
    pub fn activation(&self, n: usize, j0: usize) -> C {
        let nf = n as f64;
        let x = (j0 as f64 + nf * self.alpha) / nf.powf(1.0 / (2 * self.gauss.mu) as f64);
        self.gauss.e(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Analytic,
    Empirical,
}

/// `𝓡ᶜ(j)` for `j = 1..=J_max` and `𝓡ᵘ(j0, j)` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryLayerProfile {
    pub rc: Vec<f64>,
    pub rc_fit: Option<ExpFit>,
    /// `ru[j0 − 1][j − 1]`.
    pub ru: Vec<Vec<f64>>,
    /// Fit against `j + j0`.
    pub ru_fit: Option<ExpFit>,
    pub provenance: Provenance,
    /// Largest discarded imaginary part.
    pub imaginary_residue: f64,
}

pub fn rc_analytic(layers: &BoundaryLayers, j_max: usize) -> BoundaryLayerProfile {
    let vals: Vec<C> = (1..=j_max).map(|j| layers.rc(j)).collect();
    let rc: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let pts: Vec<(f64, f64)> = rc.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
    BoundaryLayerProfile {
        rc_fit: fit_exponential(&pts),
        rc,
        ru: Vec::new(),
        ru_fit: None,
        provenance: Provenance::Analytic,
        imaginary_residue: vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max),
    }
}

pub fn ru_analytic(layers: &BoundaryLayers, j0_max: usize, j_max: usize) -> BoundaryLayerProfile {
    let mut imag: f64 = 0.0;
    let mut pts = Vec::new();
    let ru: Vec<Vec<f64>> = (1..=j0_max)
        .map(|j0| {
            (1..=j_max)
                .map(|j| {
                    let v = layers.ru(j0, j);
                    imag = imag.max(v.im.abs());
                    pts.push(((j0 + j) as f64, v.re));
                    v.re
                })
                .collect()
        })
        .collect();
    BoundaryLayerProfile {
        rc: Vec::new(),
        rc_fit: None,
        ru_fit: fit_exponential(&pts),
        ru,
        provenance: Provenance::Analytic,
        imaginary_residue: imag,
    }
}

/// Empirical `𝓡ᶜ` on `j = 1..=j_max`:
/// `(𝒢(n,j0,j) − 𝒢̃(n,j−j0) − 1_{np≥j0}𝓡ᵘ(j0,j)) / E((j0+nα)/n^{1/2μ})`.
///
/// Returns the profile and a warning when `n < 10 j0/|α|`.
pub fn rc_empirical(
    layers: &BoundaryLayers,
    j0: usize,
    n: usize,
    j_max: usize,
) -> (BoundaryLayerProfile, Option<String>) {
    let s = &layers.scheme;
    let warn = if (n as f64) < 10.0 * j0 as f64 / layers.alpha.abs() {
        Some(format!("n = {n} is short of 10 j0/|alpha|; the layer is not fully activated"))
    } else {
        None
    };
    let g = temporal_green(s, n, j0);
    let gw = temporal_green_whole(s, n);
    let act = if n == 0 { C::new(0.0, 0.0) } else { layers.activation(n, j0) };
    let active_u = n * s.p >= j0;
    let rc: Vec<f64> = (1..=j_max)
        .map(|j| {
            let mut d = g.get(j as isize) - gw.get(j as isize - j0 as isize);
            if active_u {
                d -= layers.ru(j0, j).re;
            }
            if act.norm() == 0.0 {
                d
            } else {
                (C::new(d, 0.0) / act).re
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rc.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
    (
        BoundaryLayerProfile {
            rc_fit: fit_exponential(&pts),
            rc,
            ru: Vec::new(),
            ru_fit: None,
            provenance: Provenance::Empirical,
            imaginary_residue: 0.0,
        },
        warn,
    )
}

/// `Err(n, j0, j)` on `j = 1..=j_max`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrField {
    pub n: usize,
    pub j0: usize,
    pub values: Vec<f64>,
}

/// `Err = 𝒢 − 𝒢̃ − 1_{np≥j0}𝓡ᵘ − E((j0+nα)/n^{1/2μ})𝓡ᶜ`.
pub fn err_field(layers: &BoundaryLayers, n: usize, j0: usize, j_max: usize) -> ErrField {
    let s = &layers.scheme;
    let g = temporal_green(s, n, j0);
    let gw = temporal_green_whole(s, n);
    let values = (1..=j_max)
        .map(|j| err_value(layers, n, j0, j, g.get(j as isize), &gw_field(&gw), None))
        .collect();
    ErrField { n, j0, values }
}

fn gw_field(g: &crate::evolution::GreenField) -> &WholeLineField {
    match &g.field {
        crate::evolution::Field::Whole(w) => w,
        _ => unreachable!(),
    }
}

fn err_value(
    layers: &BoundaryLayers,
    n: usize,
    j0: usize,
    j: usize,
    g: f64,
    gw: &WholeLineField,
    activation: Option<C>,
) -> f64 {
    let mut v = g - gw.get(j as isize - j0 as isize);
    if n * layers.scheme.p >= j0 {
        v -= layers.ru(j0, j).re;
    }
    if n > 0 {
        let act = activation.unwrap_or_else(|| layers.activation(n, j0));
        v -= (act * layers.rc(j)).re;
    }
    v
}

/// Options for [`err_bound_fit`].
#[derive(Debug, Clone)]
pub struct ErrFitOptions {
    /// Trial decay rates, tried in increasing order.
    pub c0_trials: Vec<f64>,
    /// Cells with `|Err|` below this are roundoff and are left out.
    pub noise_floor: f64,
    /// Allowed ratio between the latest octave sups and the earlier ones.
    pub octave_growth: f64,
}

impl Default for ErrFitOptions {
    fn default() -> Self {
        Self {
            c0_trials: vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            noise_floor: 1e-14,
            octave_growth: 1.25,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatCell {
    pub n: usize,
    pub j0: usize,
    pub j: usize,
    /// `n^{1/2μ}|Err|`.
    pub scaled_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub c0: f64,
    /// Sup of the normalized quantity on each octave `[2^k, 2^{k+1})` of `n`.
    pub octave_sups: Vec<(usize, f64)>,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrFitReport {
    /// Largest trial `c0` with an n-stable sup, if any.
    pub c0: Option<f64>,
    pub trials: Vec<TrialResult>,
    pub cells: usize,
    pub cells_below_floor: usize,
    pub heatmap: Vec<HeatCell>,
}

/// Largest trial `c0` for which
/// `n^{1/2μ}|Err|·e^{c0 j}·exp(c0(|nα+j0|/n^{1/2μ})^{2μ/(2μ−1)})`
/// has a sup over the grid that does not grow across octaves of `n`.
pub fn err_bound_fit(
    layers: &BoundaryLayers,
    n_list: &[usize],
    j0_list: &[usize],
    j_list: &[usize],
    opts: &ErrFitOptions,
) -> Result<ErrFitReport> {
    if n_list.is_empty() || j0_list.is_empty() || j_list.is_empty() {
        return Err(Error::Domain("err_bound_fit needs nonempty grids".into()));
    }
    let mu = layers.gauss.mu as f64;
    let alpha = layers.alpha;
    let mut ns: Vec<usize> = n_list.iter().copied().filter(|&n| n > 0).collect();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().unwrap();
    let j0_max = *j0_list.iter().max().unwrap();
    let s = &layers.scheme;

    // Activation coefficients depend on (n, j0) only.
    let act: Vec<Vec<C>> = ns
        .par_iter()
        .map(|&n| j0_list.iter().map(|&j0| layers.activation(n, j0)).collect())
        .collect();
    let mut whole: Vec<WholeLineField> = Vec::with_capacity(ns.len());
    crate::evolution::for_each_whole_line_step(s, n_max, |n, f| {
        if ns.binary_search(&n).is_ok() {
            whole.push(f.clone());
        }
    });

    // (n, j0, j, log of n^{1/2μ}|Err|, Gaussian exponent term)
    let mut cells: Vec<(usize, usize, usize, f64, f64)> = Vec::new();
    let mut below = 0;
    let mut heatmap = Vec::new();
    for &j in j_list {
        for_each_green_row(s, j, n_max, j0_max, |n, row| {
            let Ok(ni) = ns.binary_search(&n) else { return };
            for (ji, &j0) in j0_list.iter().enumerate() {
                let v = err_value(layers, n, j0, j, row[j0 - 1], &whole[ni], Some(act[ni][ji]));
                let nf = n as f64;
                let scale = nf.powf(1.0 / (2.0 * mu));
                heatmap.push(HeatCell { n, j0, j, scaled_err: scale * v.abs() });
                if v.abs() < opts.noise_floor {
                    below += 1;
                    continue;
                }
                let gauss = ((nf * alpha + j0 as f64).abs() / scale).powf(2.0 * mu / (2.0 * mu - 1.0));
                cells.push((n, j0, j, (scale * v.abs()).ln(), gauss));
            }
        });
    }

    let octave = |n: usize| usize::BITS - 1 - n.leading_zeros();
    let trials: Vec<TrialResult> = opts
        .c0_trials
        .iter()
        .map(|&c0| {
            let mut sups: std::collections::BTreeMap<u32, f64> = Default::default();
            for &(n, _, j, logv, gauss) in &cells {
                let q = logv + c0 * j as f64 + c0 * gauss;
                let e = sups.entry(octave(n)).or_insert(f64::NEG_INFINITY);
                *e = e.max(q);
            }
            let octave_sups: Vec<(usize, f64)> = sups.iter().map(|(&k, &v)| (1usize << k, v.exp())).collect();
            // Skip the first octave as transient, then compare the last two with the rest.
            let body: Vec<f64> = octave_sups.iter().skip(1).map(|p| p.1).collect();
            let stable = if body.len() >= 3 {
                let split = body.len() - 2;
                let early = body[..split].iter().cloned().fold(0.0, f64::max);
                let late = body[split..].iter().cloned().fold(0.0, f64::max);
                late.is_finite() && late <= opts.octave_growth * early
            } else {
                false
            };
            TrialResult { c0, octave_sups, stable }
        })
        .collect();
    let c0 = trials.iter().filter(|t| t.stable).map(|t| t.c0).fold(None, |m: Option<f64>, c| {
        Some(m.map_or(c, |m| m.max(c)))
    });
    Ok(ErrFitReport { c0, trials, cells: cells.len() + below, cells_below_floor: below, heatmap })
}

/// `n^{1/2μ} sup_j |𝒢̃(n,j) − n^{−1/2μ}H((j−nα)/n^{1/2μ})|` for each `n`.
pub fn whole_line_asymptotic_check(layers: &BoundaryLayers, n_list: &[usize]) -> Vec<(usize, f64)> {
    let mu = layers.gauss.mu as f64;
    n_list
        .par_iter()
        .map(|&n| {
            let g = temporal_green_whole(&layers.scheme, n);
            let w = gw_field(&g);
            let nf = n as f64;
            let scale = nf.powf(1.0 / (2.0 * mu));
            let sup = (w.j_min..=w.j_max())
                .map(|j| {
                    let x = (j as f64 - nf * layers.alpha) / scale;
                    (C::new(w.get(j), 0.0) - layers.gauss.h(x) / scale).norm()
                })
                .fold(0.0, f64::max);
            (n, scale * sup)
        })
        .collect()
}
