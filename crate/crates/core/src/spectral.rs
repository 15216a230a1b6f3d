//! Eigenstructure of the companion matrix `𝕄(z)`, the Lopatinskii determinant
//! and the conditions that decide the stability class.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly;
use crate::scheme::{boundary_matrix, symbol_on_circle, SchemeDefinition};

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// The `(p+r) × (p+r)` companion matrix of `(z − 𝒯)w = 0` acting on
/// `(w_{j+p-1}, …, w_{j-r})ᵀ`.
pub fn companion_matrix(scheme: &SchemeDefinition, z: C) -> DMatrix<C> {
    let (r, p) = (scheme.r, scheme.p);
    let d = p + r;
    let ap = scheme.a_p();
    let mut m = DMatrix::zeros(d, d);
    for col in 0..d {
        let l = p as isize - 1 - col as isize;
        let zl = if l == 0 { z } else { c(0.0) };
        m[(0, col)] = (zl - scheme.coef(l)) / ap;
    }
    for i in 1..d {
        m[(i, i - 1)] = c(1.0);
    }
    m
}

/// The eigenvector `(κ^{d-1}, …, κ, 1)ᵀ` of `𝕄(z)` for the eigenvalue `κ`.
pub fn vandermonde(kappa: C, d: usize) -> DVector<C> {
    let mut v = DVector::from_element(d, c(1.0));
    for i in (0..d.saturating_sub(1)).rev() {
        v[i] = v[i + 1] * kappa;
    }
    v
}

/// Roots of `Σ a_j κ^{j+r} − zκ^r`, i.e. the `p + r` eigenvalues of `𝕄(z)`.
pub fn characteristic_roots(scheme: &SchemeDefinition, z: C) -> Result<Vec<C>> {
    poly::roots(&scheme.characteristic_polynomial(z))
}

/// Where `z` sits relative to the curve `F(𝕊¹)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Winding number zero: the resolvent set shared with the whole-line operator.
    InsideO,
    OnCurve,
    AtOne,
    Other,
}

#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub z: C,
    pub stable: Vec<C>,
    pub unstable: Vec<C>,
    pub central: Option<C>,
    pub region: Region,
}

/// Winding number of `θ ↦ F(e^{iθ}) − z` around 0, by summing argument increments.
pub fn winding_number(scheme: &SchemeDefinition, z: C, samples: usize) -> i64 {
    let mut total = 0.0;
    let mut prev = symbol_on_circle(scheme, 0.0) - z;
    for k in 1..=samples {
        let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let cur = symbol_on_circle(scheme, t) - z;
        total += (cur / prev).arg();
        prev = cur;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

fn by_modulus_then_arg(a: &C, b: &C) -> std::cmp::Ordering {
    a.norm()
        .partial_cmp(&b.norm())
        .unwrap()
        .then(a.arg().partial_cmp(&b.arg()).unwrap())
}

/// Splits the eigenvalues of `𝕄(z)` by modulus against the band `unit_tol`.
///
/// The region is read independently of the roots: `z = 1`, a root on the circle,
/// or the argument principle. Inside `𝒪` there must be `r` stable and `p`
/// unstable roots; at `z = 1` exactly one root is central.
pub fn spectral_split(scheme: &SchemeDefinition, z: C, unit_tol: f64) -> Result<SpectralSplit> {
    let roots = characteristic_roots(scheme, z)?;
    let (r, p) = (scheme.r, scheme.p);
    let at_one = (z - 1.0).norm() < 1e-14;
    let mut central = None;
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    let mut on_circle = false;
    for &k in &roots {
        let m = k.norm();
        if (m - 1.0).abs() <= unit_tol {
            on_circle = true;
            if at_one && (k - 1.0).norm() <= unit_tol.max(1e-10) && central.is_none() {
                central = Some(k);
                continue;
            }
            if m < 1.0 {
                stable.push(k)
            } else {
                unstable.push(k)
            }
        } else if m < 1.0 {
            stable.push(k);
        } else {
            unstable.push(k);
        }
    }
    stable.sort_by(by_modulus_then_arg);
    unstable.sort_by(by_modulus_then_arg);
    let region = if at_one {
        Region::AtOne
    } else if on_circle {
        Region::OnCurve
    } else if winding_number(scheme, z, 4096) == 0 {
        Region::InsideO
    } else {
        Region::Other
    };
    match region {
        Region::InsideO if stable.len() != r || unstable.len() != p => {
            return Err(Error::Classification(format!(
                "z = {z} has {} stable and {} unstable roots, expected {r} and {p}",
                stable.len(),
                unstable.len()
            )))
        }
        Region::AtOne if central.is_none() || stable.len() != r || unstable.len() != p - 1 => {
            return Err(Error::Classification(format!(
                "z = 1 split is {} stable / {} unstable / central {:?}",
                stable.len(),
                unstable.len(),
                central
            )))
        }
        _ => {}
    }
    Ok(SpectralSplit { z, stable, unstable, central, region })
}

/// Like [`spectral_split`], but `z` is claimed to lie in `𝒪`.
pub fn spectral_split_in_o(scheme: &SchemeDefinition, z: C, unit_tol: f64) -> Result<SpectralSplit> {
    let s = spectral_split(scheme, z, unit_tol)?;
    if s.region != Region::InsideO {
        return Err(Error::Classification(format!(
            "z = {z} is classified {:?}, too close to the essential spectrum",
            s.region
        )));
    }
    Ok(s)
}

/// Vandermonde eigenvectors spanning `E^s(z)`, ordered by `(|κ|, arg κ)`.
#[derive(Debug, Clone)]
pub struct StableBasis {
    pub z: C,
    pub vectors: Vec<DVector<C>>,
    pub eigenvalues: Vec<C>,
}

/// Stable roots at `z`; at `z = 1` the root at 1 is excluded.
pub fn stable_roots(scheme: &SchemeDefinition, z: C) -> Result<Vec<C>> {
    let mut roots = characteristic_roots(scheme, z)?;
    if (z - 1.0).norm() < 1e-14 {
        let (i, _) = roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - 1.0).norm().partial_cmp(&(b.1 - 1.0).norm()).unwrap())
            .unwrap();
        roots.remove(i);
    }
    let mut s: Vec<C> = roots.into_iter().filter(|k| k.norm() < 1.0).collect();
    s.sort_by(by_modulus_then_arg);
    if s.len() != scheme.r {
        return Err(Error::Classification(format!(
            "expected {} stable roots at z = {z}, found {}",
            scheme.r,
            s.len()
        )));
    }
    Ok(s)
}

fn basis_from_roots(roots: &[C], d: usize, z: C) -> Result<StableBasis> {
    for i in 0..roots.len() {
        for k in i + 1..roots.len() {
            if (roots[i] - roots[k]).norm() <= 1e-8 {
                return Err(Error::Multiplicity(format!(
                    "stable roots {} and {} coincide at z = {z}",
                    roots[i], roots[k]
                )));
            }
        }
    }
    Ok(StableBasis {
        z,
        vectors: roots.iter().map(|&k| vandermonde(k, d)).collect(),
        eigenvalues: roots.to_vec(),
    })
}

pub fn stable_basis(scheme: &SchemeDefinition, z: C) -> Result<StableBasis> {
    let roots = stable_roots(scheme, z)?;
    basis_from_roots(&roots, scheme.p + scheme.r, z)
}

/// Identifier of the basis convention behind every Lopatinskii value.
pub const BASIS_ID: &str = "vandermonde, sorted by (|kappa|, arg kappa)";

#[derive(Debug, Clone, Serialize)]
pub struct LopatinskiiValue {
    pub z: C,
    pub delta: C,
    /// `|Δ| / Π_k ‖𝓑‖‖e_k‖`, a scale-free size of the determinant.
    pub normalized: f64,
    pub basis_id: &'static str,
}

/// The `r × r` matrix `(𝓑e_1, …, 𝓑e_r)`.
pub fn boundary_images(bmat: &DMatrix<f64>, basis: &StableBasis) -> DMatrix<C> {
    let bc = bmat.map(c);
    let r = basis.vectors.len();
    let mut m = DMatrix::zeros(bmat.nrows(), r);
    for (k, e) in basis.vectors.iter().enumerate() {
        m.set_column(k, &(&bc * e));
    }
    m
}

fn lopatinskii_of_basis(bmat: &DMatrix<f64>, basis: &StableBasis) -> LopatinskiiValue {
    let delta = boundary_images(bmat, basis).determinant();
    let bn = bmat.norm();
    let scale: f64 = basis.vectors.iter().map(|e| bn * e.norm()).product();
    LopatinskiiValue { z: basis.z, delta, normalized: delta.norm() / scale, basis_id: BASIS_ID }
}

/// `Δ(z) = det(𝓑e_1(z), …, 𝓑e_r(z))`.
pub fn lopatinskii(scheme: &SchemeDefinition, z: C) -> Result<LopatinskiiValue> {
    let basis = stable_basis(scheme, z)?;
    Ok(lopatinskii_of_basis(&boundary_matrix(scheme), &basis))
}

/// Matches each reference root to its nearest neighbour among `roots`.
fn track(reference: &[C], roots: &[C]) -> Result<Vec<C>> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::with_capacity(reference.len());
    for &k in reference {
        let mut d: Vec<(f64, usize)> = roots.iter().enumerate().map(|(i, x)| ((x - k).norm(), i)).collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if d.len() > 1 && d[0].0 >= 0.5 * d[1].0 {
            return Err(Error::Tracking(format!("root {k} has two candidates at similar distance")));
        }
        if used[d[0].1] {
            return Err(Error::Tracking(format!("root {k} collides with another tracked root")));
        }
        used[d[0].1] = true;
        out.push(roots[d[0].1]);
    }
    Ok(out)
}

/// `Δ` at `z` using the stable roots at 1 continued to `z` by nearest matching.
fn lopatinskii_tracked(scheme: &SchemeDefinition, bmat: &DMatrix<f64>, reference: &[C], z: C) -> Result<C> {
    let roots = characteristic_roots(scheme, z)?;
    let tracked = track(reference, &roots)?;
    let basis = basis_from_roots(&tracked, scheme.p + scheme.r, z)?;
    Ok(lopatinskii_of_basis(bmat, &basis).delta)
}

/// `Δ'(1)` by central differences with root tracking and Richardson
/// extrapolation (a full Romberg table), halving `h` until the extrapolated
/// value settles to `1e-6`.
pub fn lopatinskii_derivative_at_one(scheme: &SchemeDefinition, h: f64) -> Result<C> {
    let one = c(1.0);
    let d1 = lopatinskii(scheme, one)?;
    if d1.normalized > 1e-8 {
        return Err(Error::Precondition(format!("Delta(1) = {} does not vanish", d1.delta)));
    }
    let bmat = boundary_matrix(scheme);
    let reference = stable_roots(scheme, one)?;
    let diff = |h: f64| -> Result<C> {
        let up = lopatinskii_tracked(scheme, &bmat, &reference, c(1.0 + h))?;
        let dn = lopatinskii_tracked(scheme, &bmat, &reference, c(1.0 - h))?;
        Ok((up - dn) / (2.0 * h))
    };
    // Romberg table over h, h/2, h/4, …: the central difference expands in even powers of h.
    // Shrink the starting step until every stable root can be followed; small
    // |α| moves the central root fast.
    let mut h = h;
    let first = loop {
        match diff(h) {
            Ok(v) => break v,
            Err(Error::Tracking(_)) if h > 1e-6 => h /= 4.0,
            Err(e) => return Err(e),
        }
    };
    let mut rows: Vec<Vec<C>> = vec![vec![first]];
    let mut best: Option<(C, f64)> = None;
    for k in 1..30 {
        h /= 2.0;
        let mut row = vec![diff(h)?];
        for m in 1..=k {
            let f = 4f64.powi(m as i32);
            let v = (row[m - 1] * f - rows[k - 1][m - 1]) / (f - 1.0);
            row.push(v);
        }
        let cur = row[k];
        let change = (cur - rows[k - 1][k - 1]).norm();
        rows.push(row);
        // Once settled to 1e-6, keep refining while the changes shrink; stop
        // when roundoff takes over.
        match best {
            Some((_, prev_change)) if change >= prev_change => break,
            _ => {}
        }
        if change <= 1e-6 * cur.norm().max(1e-300) || best.is_some() {
            best = Some((cur, change));
        }
    }
    if let Some((v, _)) = best {
        return Ok(v);
    }
    Err(Error::Tracking("finite differences of Delta did not settle".into()))
}

/// Which invariant subspace an eigenvalue belongs to near `z = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenClass {
    StronglyStable,
    Central,
    StronglyUnstable,
}

/// Spectral projectors of `𝕄(z)` onto `E^{ss} ⊕ E^c ⊕ E^{su}`.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    pub z: C,
    pub pi_ss: DMatrix<C>,
    pub pi_c: DMatrix<C>,
    pub pi_su: DMatrix<C>,
    /// Row of `V⁻¹` belonging to the central eigenvalue, so `L·R_c = 1`.
    pub left_central: DVector<C>,
    pub central_vector: DVector<C>,
    pub e: DVector<C>,
    /// Eigenvalues in the column order of `v`.
    pub eigenvalues: Vec<C>,
    pub classes: Vec<EigenClass>,
    pub v: DMatrix<C>,
    pub v_inv: DMatrix<C>,
}

impl ProjectorSet {
    /// `𝕄(z)^k x` restricted to one invariant subspace; `k` may be negative.
    pub fn power_on_class(&self, class: EigenClass, k: i64, x: &DVector<C>) -> DVector<C> {
        let coords = &self.v_inv * x;
        let mut out = DVector::zeros(x.len());
        for (i, (&kappa, &cl)) in self.eigenvalues.iter().zip(&self.classes).enumerate() {
            if cl == class {
                out += self.v.column(i) * (coords[i] * kappa.powi(k as i32));
            }
        }
        out
    }
}

const COND_LIMIT: f64 = 1e10;

/// Projectors from the eigendecomposition `𝕄(z) = V diag(κ) V⁻¹`.
/// The central eigenvalue is the one nearest 1.
pub fn projector_set(scheme: &SchemeDefinition, z: C) -> Result<ProjectorSet> {
    let d = scheme.p + scheme.r;
    let roots = characteristic_roots(scheme, z)?;
    let ci = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).norm().partial_cmp(&(b.1 - 1.0).norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let central = roots[ci];
    let mut ss: Vec<C> = Vec::new();
    let mut su: Vec<C> = Vec::new();
    for (i, &k) in roots.iter().enumerate() {
        if i == ci {
            continue;
        }
        if k.norm() < 1.0 {
            ss.push(k)
        } else {
            su.push(k)
        }
    }
    ss.sort_by(by_modulus_then_arg);
    su.sort_by(by_modulus_then_arg);
    let mut eigenvalues = ss.clone();
    let mut classes = vec![EigenClass::StronglyStable; ss.len()];
    eigenvalues.push(central);
    classes.push(EigenClass::Central);
    eigenvalues.extend(&su);
    classes.extend(std::iter::repeat(EigenClass::StronglyUnstable).take(su.len()));
    for i in 0..d {
        for k in i + 1..d {
            if (eigenvalues[i] - eigenvalues[k]).norm() <= 1e-8 {
                return Err(Error::Multiplicity(format!("eigenvalues coincide at z = {z}")));
            }
        }
    }

    let mut v = DMatrix::zeros(d, d);
    for (i, &k) in eigenvalues.iter().enumerate() {
        v.set_column(i, &vandermonde(k, d));
    }
    let sv = v.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= COND_LIMIT) {
        return Err(Error::Conditioning(cond));
    }
    let v_inv = v
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Conditioning(f64::INFINITY))?;

    let proj = |class: EigenClass| -> DMatrix<C> {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if classes[i] == class {
                m += v.column(i) * v_inv.row(i);
            }
        }
        m
    };
    let c_idx = ss.len();
    let mut e = DVector::zeros(d);
    e[0] = c(1.0);
    Ok(ProjectorSet {
        z,
        pi_ss: proj(EigenClass::StronglyStable),
        pi_c: proj(EigenClass::Central),
        pi_su: proj(EigenClass::StronglyUnstable),
        left_central: v_inv.row(c_idx).transpose(),
        central_vector: v.column(c_idx).into_owned(),
        e,
        eigenvalues,
        classes,
        v,
        v_inv,
    })
}

/// Distance of `𝓑(1,…,1)ᵀ` from `span{𝓑e_k(1)}` by least squares.
pub fn residue_residual(scheme: &SchemeDefinition) -> Result<f64> {
    let bmat = boundary_matrix(scheme);
    let basis = stable_basis(scheme, c(1.0))?;
    let imgs = boundary_images(&bmat, &basis);
    let ones = DVector::from_element(bmat.ncols(), 1.0);
    let y = (&bmat * ones).map(c);
    let emax = basis.vectors.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let thresh = 1e-8 * bmat.norm() * emax;
    let svd = imgs.svd(true, false);
    let u = svd.u.unwrap();
    let mut proj = DVector::zeros(y.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > thresh {
            let col = u.column(i);
            proj += col * col.dotc(&y);
        }
    }
    Ok((y - proj).norm())
}

/// Whether `𝓑(1,…,1)ᵀ ∈ 𝓑E^s(1)`.
///
/// The residual is measured against `tol·‖𝓑‖·√(p+r)`, the size of `𝓑` acting on
/// `(1,…,1)ᵀ`, so that a vector that vanishes up to roundoff counts as zero.
pub fn residue_condition(scheme: &SchemeDefinition, tol: f64) -> Result<bool> {
    let res = residue_residual(scheme)?;
    let bmat = boundary_matrix(scheme);
    let scale = bmat.norm() * ((scheme.p + scheme.r) as f64).sqrt();
    Ok(res <= tol * scale)
}

/// Options for [`check_hypothesis_two`].
#[derive(Debug, Clone)]
pub struct HypothesisTwoOptions {
    pub annulus_samples: usize,
    pub radii: Vec<f64>,
    /// Points of the unit circle closer than this to 1 are left to the local analysis.
    pub exclusion: f64,
    /// Smallest acceptable normalized `|Δ|` away from 1.
    pub zero_tol: f64,
    pub residue_tol: f64,
    pub derivative_step: f64,
}

impl Default for HypothesisTwoOptions {
    fn default() -> Self {
        Self {
            annulus_samples: 720,
            radii: vec![1.0, 1.01, 1.1, 1.5, 2.0, 4.0],
            exclusion: 0.05,
            zero_tol: 1e-6,
            residue_tol: 1e-10,
            derivative_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSummary {
    pub radius: f64,
    pub samples: usize,
    pub skipped: usize,
    pub min_abs_delta: f64,
    pub min_normalized_delta: f64,
    pub witness: C,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisTwoReport {
    pub satisfied: bool,
    pub failure: Option<String>,
    pub radii: Vec<RadiusSummary>,
    pub delta_one: C,
    pub delta_one_normalized: f64,
    pub delta_prime_one: Option<C>,
    pub residue_condition: bool,
    /// Sampling covers finitely many circles; this is evidence, not proof.
    pub coverage: String,
}

/// Samples `Δ` on circles `|z| = ρ ≥ 1` and checks `Δ(1) = 0`, `Δ'(1) ≠ 0`.
pub fn check_hypothesis_two(
    scheme: &SchemeDefinition,
    opts: &HypothesisTwoOptions,
) -> Result<HypothesisTwoReport> {
    if opts.radii.iter().any(|&r| r < 1.0) {
        return Err(Error::Domain("sampling radii must be at least 1".into()));
    }
    let bmat = boundary_matrix(scheme);
    let mut radii = Vec::new();
    let mut failure = None;
    for &rho in &opts.radii {
        let pts: Vec<C> = (0..opts.annulus_samples)
            .map(|k| C::from_polar(rho, 2.0 * std::f64::consts::PI * k as f64 / opts.annulus_samples as f64))
            .filter(|z| rho > 1.0 || (z - 1.0).norm() >= opts.exclusion)
            .collect();
        let vals: Vec<Option<LopatinskiiValue>> = pts
            .par_iter()
            .map(|&z| {
                stable_basis(scheme, z).ok().map(|b| lopatinskii_of_basis(&bmat, &b))
            })
            .collect();
        let skipped = vals.iter().filter(|v| v.is_none()).count();
        let mut best: Option<&LopatinskiiValue> = None;
        for v in vals.iter().flatten() {
            if best.map_or(true, |b| v.normalized < b.normalized) {
                best = Some(v);
            }
        }
        let best = best.ok_or_else(|| Error::Classification(format!("no usable samples at radius {rho}")))?;
        if best.normalized < opts.zero_tol && failure.is_none() {
            failure = Some(format!(
                "Godunov-Ryabenkii violation: Delta nearly vanishes at z = {}",
                best.z
            ));
        }
        radii.push(RadiusSummary {
            radius: rho,
            samples: pts.len(),
            skipped,
            min_abs_delta: best.delta.norm(),
            min_normalized_delta: best.normalized,
            witness: best.z,
        });
    }
    let d1 = lopatinskii(scheme, c(1.0))?;
    let mut delta_prime = None;
    if d1.normalized > 1e-8 {
        failure.get_or_insert_with(|| format!("Delta(1) = {} does not vanish", d1.delta));
    } else {
        match lopatinskii_derivative_at_one(scheme, opts.derivative_step) {
            Ok(dp) => {
                if dp.norm() < 1e-8 {
                    failure.get_or_insert_with(|| "Delta'(1) vanishes: the zero at 1 is not simple".into());
                }
                delta_prime = Some(dp);
            }
            Err(e) => {
                failure.get_or_insert_with(|| format!("Delta'(1) unavailable: {e}"));
            }
        }
    }
    let residue = residue_condition(scheme, opts.residue_tol)?;
    Ok(HypothesisTwoReport {
        satisfied: failure.is_none(),
        failure,
        radii,
        delta_one: d1.delta,
        delta_one_normalized: d1.normalized,
        delta_prime_one: delta_prime,
        residue_condition: residue,
        coverage: format!(
            "{} points on each of {} circles, |z - 1| >= {} on the unit circle",
            opts.annulus_samples,
            opts.radii.len(),
            opts.exclusion
        ),
    })
}

/// The two stability classes for schemes meeting both hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    StableAllQ,
    L1StableOnly,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::StableAllQ => "ℓ^q-stable for all q",
            Verdict::L1StableOnly => "ℓ¹-stable, ℓ^q-unstable for q>1",
        }
    }

    pub fn from_residue(residue_condition: bool) -> Self {
        if residue_condition {
            Verdict::StableAllQ
        } else {
            Verdict::L1StableOnly
        }
    }
}
