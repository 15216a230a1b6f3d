//! Spatial Green's functions by direct resolvent solves, and the contour
//! reconstruction of temporal Green's functions from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scheme::{symbol_on_circle, SchemeDefinition};
use crate::spectral::{characteristic_roots, lopatinskii};

type C = Complex64;

/// Banded matrix with room for the fill-in of partial pivoting, factored in place.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<C>,
    /// Multipliers of step `k`, `kl` per step.
    mult: Vec<C>,
    piv: Vec<usize>,
    factored: bool,
}

impl BandedLu {
    /// Zero `n × n` matrix with `kl` sub- and `ku` super-diagonals.
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            ab: vec![C::new(0.0, 0.0); n * width],
            mult: vec![C::new(0.0, 0.0); n * kl],
            piv: vec![0; n],
            factored: false,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: C) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        if j + self.kl < i || j > i + self.ku + self.kl {
            C::new(0.0, 0.0)
        } else {
            self.ab[self.idx(i, j)]
        }
    }

    /// Gaussian elimination with partial pivoting. Fails when a pivot drops
    /// below `1e-14` times the largest entry.
    pub fn factor(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.ab.iter().fold(0.0_f64, |m, x| m.max(x.norm()));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.idx(k, k)].norm();
            for i in k + 1..=last {
                let v = self.ab[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::NearSpectrum(format!("banded system is singular at row {k}")));
            }
            self.piv[k] = p;
            let c_hi = (k + ku + kl).min(n - 1);
            if p != k {
                for col in k..=c_hi {
                    let (a, b) = (self.idx(k, col), self.idx(p, col));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in k + 1..=last {
                let l = self.ab[self.idx(i, k)] / pivot;
                self.mult[k * kl + (i - k - 1)] = l;
                if l.norm() == 0.0 {
                    continue;
                }
                for col in k + 1..=c_hi {
                    let u = self.ab[self.idx(k, col)];
                    let t = self.idx(i, col);
                    self.ab[t] -= l * u;
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves in place; `factor` must have succeeded.
    pub fn solve(&self, b: &mut [C]) {
        assert!(self.factored, "factor before solving");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk.norm() == 0.0 {
                continue;
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.mult[k * kl + (i - k - 1)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for col in i + 1..=(i + ku + kl).min(n - 1) {
                s -= self.ab[self.idx(i, col)] * b[col];
            }
            b[i] = s / self.ab[self.idx(i, i)];
        }
    }
}

/// `G(z, j0, ·)` or `G̃(z, ·)` on a window; `values[i]` sits at `j_min + i`.
#[derive(Debug, Clone, Serialize)]
pub struct ResolventField {
    pub z: C,
    pub j0: Option<usize>,
    pub j_min: isize,
    pub values: Vec<C>,
    /// Size of the neglected far field, relative to the largest value.
    pub truncation_residual: f64,
}

impl ResolventField {
    pub fn get(&self, j: isize) -> C {
        let i = j - self.j_min;
        if i < 0 {
            C::new(0.0, 0.0)
        } else {
            self.values.get(i as usize).copied().unwrap_or(C::new(0.0, 0.0))
        }
    }
}

/// Roots at `z` must keep away from the unit circle.
fn circle_gap(scheme: &SchemeDefinition, z: C) -> Result<(f64, f64)> {
    let roots = characteristic_roots(scheme, z)?;
    let gap = roots.iter().map(|k| (k.norm() - 1.0).abs()).fold(f64::INFINITY, f64::min);
    if gap < 1e-10 {
        return Err(Error::NearSpectrum(format!("z = {z} lies on the symbol curve")));
    }
    let max_stable = roots.iter().map(|k| k.norm()).filter(|&m| m < 1.0).fold(0.0, f64::max);
    let min_unstable = roots.iter().map(|k| k.norm()).filter(|&m| m > 1.0).fold(f64::INFINITY, f64::min);
    Ok((max_stable, min_unstable))
}

fn decay_length(rate: f64) -> usize {
    // Cells needed for |rate|^L to reach e^{-40}.
    if rate <= 0.0 {
        0
    } else {
        (40.0 / -rate.ln()).ceil() as usize
    }
}

/// The factored truncated system `(z − 𝒯)w = f` on `1 − r ≤ j ≤ J`.
#[derive(Debug, Clone)]
pub struct HalfLineResolvent {
    pub z: C,
    pub j_trunc: usize,
    r: usize,
    p: usize,
    lu: BandedLu,
    scheme: SchemeDefinition,
}

impl HalfLineResolvent {
    /// Checks that `z` is neither on the symbol curve nor a zero of `Δ`, then factors.
    pub fn new(scheme: &SchemeDefinition, z: C, j_trunc: usize) -> Result<Self> {
        circle_gap(scheme, z)?;
        if let Ok(l) = lopatinskii(scheme, z) {
            if l.normalized < 1e-10 {
                return Err(Error::NearSpectrum(format!("Delta(z) vanishes at z = {z}: eigenvalue of the operator")));
            }
        }
        Self::factor_unchecked(scheme, z, j_trunc)
    }

    fn factor_unchecked(scheme: &SchemeDefinition, z: C, j_trunc: usize) -> Result<Self> {
        let (r, p) = (scheme.r, scheme.p);
        let n = j_trunc + r;
        let kl = r;
        let ku = (p + r - 1).max(1);
        let mut lu = BandedLu::new(n, kl, ku);
        let row = |j: isize| (j + r as isize - 1) as usize;
        for g in 0..r {
            let j = -(g as isize);
            lu.add(row(j), row(j), C::new(1.0, 0.0));
            for k in 1..=scheme.p_b {
                lu.add(row(j), row(k as isize), C::new(-scheme.bcoef(k, j), 0.0));
            }
        }
        for j in 1..=j_trunc as isize {
            lu.add(row(j), row(j), z);
            for k in -(r as isize)..=p as isize {
                let jj = j + k;
                if jj <= j_trunc as isize {
                    lu.add(row(j), row(jj), C::new(-scheme.coef(k), 0.0));
                }
            }
        }
        lu.factor()?;
        Ok(Self { z, j_trunc, r, p, lu, scheme: scheme.clone() })
    }

    /// `G(z, j0, ·)` with the truncation residual.
    pub fn solve(&self, j0: usize) -> ResolventField {
        assert!(j0 >= 1 && j0 <= self.j_trunc);
        let n = self.j_trunc + self.r;
        let mut b = vec![C::new(0.0, 0.0); n];
        b[j0 - 1 + self.r] = C::new(1.0, 0.0);
        self.lu.solve(&mut b);
        let peak = b.iter().fold(0.0_f64, |m, x| m.max(x.norm()));
        let tail = b[n - (self.p + self.r).min(n)..].iter().fold(0.0_f64, |m, x| m.max(x.norm()));
        let inner = self.inner_residual(&b, j0);
        ResolventField {
            z: self.z,
            j0: Some(j0),
            j_min: 1 - self.r as isize,
            values: b,
            truncation_residual: (tail / peak.max(1e-300)).max(inner),
        }
    }

    /// Residual of the untruncated equations on the first 80% of the window.
    fn inner_residual(&self, w: &[C], j0: usize) -> f64 {
        let s = &self.scheme;
        let get = |j: isize| w.get((j + self.r as isize - 1) as usize).copied().unwrap_or(C::new(0.0, 0.0));
        let top = (0.8 * self.j_trunc as f64) as isize;
        let mut worst: f64 = 0.0;
        for j in 1..=top {
            let mut v = self.z * get(j);
            for k in -(s.r as isize)..=s.p as isize {
                v -= s.coef(k) * get(j + k);
            }
            if j == j0 as isize {
                v -= 1.0;
            }
            worst = worst.max(v.norm());
        }
        worst
    }
}

/// Default truncation: `j0` plus enough cells for the stable roots to decay by `e^{-40}`.
pub fn default_truncation(scheme: &SchemeDefinition, z: C, j0: usize) -> Result<usize> {
    let (max_stable, _) = circle_gap(scheme, z)?;
    Ok(j0 + decay_length(max_stable).max(200))
}

/// `G(z, j0, ·) = (z − 𝒯)^{-1} δ_{j0}`. The window doubles until the far-field
/// residual falls below `1e-13`.
pub fn spatial_green_half(
    scheme: &SchemeDefinition,
    z: C,
    j0: usize,
    j_trunc: Option<usize>,
) -> Result<ResolventField> {
    let mut jt = match j_trunc {
        Some(j) => {
            if j < j0 + 200 {
                return Err(Error::Domain("the truncation must reach j0 + 200".into()));
            }
            j
        }
        None => default_truncation(scheme, z, j0)?,
    };
    let mut res = HalfLineResolvent::new(scheme, z, jt)?;
    for _ in 0..6 {
        let f = res.solve(j0);
        if f.truncation_residual <= 1e-13 {
            return Ok(f);
        }
        jt = j0 + 2 * (jt - j0);
        res = HalfLineResolvent::factor_unchecked(scheme, z, jt)?;
    }
    Ok(res.solve(j0))
}

/// `G̃(z, j) = (1/2π)∫ e^{ijθ} / (z − F(e^{iθ})) dθ` for `j ∈ [lo, hi]`, trapezoid
/// nodes doubled until the values settle. The sign of the exponent is the one
/// for which `(z − ℒ)G̃ = δ̃` holds; the result records that residual.
pub fn spatial_green_whole(scheme: &SchemeDefinition, z: C, lo: isize, hi: isize) -> Result<ResolventField> {
    circle_gap(scheme, z)?;
    let (r, p) = (scheme.r as isize, scheme.p as isize);
    // Extra cells on both sides so the identity can be checked on [lo, hi].
    let (elo, ehi) = (lo - r, hi + p);
    let eval = |m: usize| -> Vec<C> {
        let inv: Vec<C> = (0..m)
            .map(|k| 1.0 / (z - symbol_on_circle(scheme, 2.0 * PI * k as f64 / m as f64)))
            .collect();
        (elo..=ehi)
            .into_par_iter()
            .map(|j| {
                let mut s = C::new(0.0, 0.0);
                for (k, v) in inv.iter().enumerate() {
                    // Reduce j·k mod m before scaling to keep the phase exact.
                    let ph = ((j as i128 * k as i128).rem_euclid(m as i128)) as f64;
                    s += v * C::from_polar(1.0, 2.0 * PI * ph / m as f64);
                }
                s / m as f64
            })
            .collect()
    };
    let mut m = 256;
    let mut prev = eval(m);
    let mut settled = false;
    while m < (1 << 22) {
        m *= 2;
        let cur = eval(m);
        let peak = cur.iter().fold(0.0_f64, |a, x| a.max(x.norm()));
        let change = cur.iter().zip(&prev).fold(0.0_f64, |a, (x, y)| a.max((x - y).norm()));
        prev = cur;
        if change <= 1e-12 * peak.max(1.0) {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::Quadrature(format!("Fourier nodes did not settle at z = {z}")));
    }
    let get = |j: isize| prev[(j - elo) as usize];
    let mut resid: f64 = 0.0;
    for j in lo..=hi {
        let mut v = z * get(j);
        for k in -r..=p {
            v -= scheme.coef(k) * get(j + k);
        }
        if j == 0 {
            v -= 1.0;
        }
        resid = resid.max(v.norm());
    }
    if resid > 1e-10 {
        return Err(Error::Quadrature(format!("resolvent identity residual {resid:e} at z = {z}")));
    }
    Ok(ResolventField {
        z,
        j0: None,
        j_min: lo,
        values: prev[(lo - elo) as usize..=(hi - elo) as usize].to_vec(),
        truncation_residual: resid,
    })
}

/// `G̃(z, ·)` on `[lo, hi]` by a truncated banded solve with zero far field,
/// padded on each side until the neglected tail is below `e^{-40}`.
pub fn spatial_green_whole_banded(scheme: &SchemeDefinition, z: C, lo: isize, hi: isize) -> Result<ResolventField> {
    let (max_stable, min_unstable) = circle_gap(scheme, z)?;
    let pad_right = decay_length(max_stable).max(50) as isize;
    let pad_left = decay_length(1.0 / min_unstable).max(50) as isize;
    let (a, b) = (lo.min(0) - pad_left, hi.max(0) + pad_right);
    let n = (b - a + 1) as usize;
    let (r, p) = (scheme.r, scheme.p);
    let mut lu = BandedLu::new(n, r, p);
    for i in 0..n {
        lu.add(i, i, z);
        for k in -(r as isize)..=p as isize {
            let c = i as isize + k;
            if c >= 0 && (c as usize) < n {
                lu.add(i, c as usize, C::new(-scheme.coef(k), 0.0));
            }
        }
    }
    lu.factor()?;
    let mut rhs = vec![C::new(0.0, 0.0); n];
    rhs[(-a) as usize] = C::new(1.0, 0.0);
    lu.solve(&mut rhs);
    let peak = rhs.iter().fold(0.0_f64, |m, x| m.max(x.norm()));
    let edge = rhs[0].norm().max(rhs[n - 1].norm());
    Ok(ResolventField {
        z,
        j0: None,
        j_min: lo,
        values: rhs[(lo - a) as usize..=(hi - a) as usize].to_vec(),
        truncation_residual: edge / peak,
    })
}

/// `R(z, j0, j) = G(z, j0, j) − G̃(z, j − j0)` for each `j` in `js`.
pub fn r_function(scheme: &SchemeDefinition, z: C, j0: usize, js: &[usize]) -> Result<Vec<C>> {
    let g = spatial_green_half(scheme, z, j0, None)?;
    let lo = *js.iter().min().unwrap() as isize - j0 as isize;
    let hi = *js.iter().max().unwrap() as isize - j0 as isize;
    let gw = spatial_green_whole(scheme, z, lo, hi)?;
    Ok(js.iter().map(|&j| g.get(j as isize) - gw.get(j as isize - j0 as isize)).collect())
}

/// `(z − 1)R(z, j0, j)` at `z = 1 + ε` for `ε, ε/2, ε/4`, combined by Richardson
/// extrapolation into the value at `z = 1`.
pub fn pole_residue_limit(scheme: &SchemeDefinition, j0: usize, js: &[usize], eps: f64) -> Result<Vec<C>> {
    let p = |e: f64| -> Result<Vec<C>> {
        Ok(r_function(scheme, C::new(1.0 + e, 0.0), j0, js)?.into_iter().map(|v| v * e).collect())
    };
    let (p1, p2, p4) = (p(eps)?, p(eps / 2.0)?, p(eps / 4.0)?);
    Ok((0..js.len())
        .map(|i| {
            let r1 = p2[i] * 2.0 - p1[i];
            let r2 = p4[i] * 2.0 - p2[i];
            (r2 * 4.0 - r1) / 3.0
        })
        .collect())
}

/// A contour value with its diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Reconstruction {
    pub value: f64,
    pub imaginary: f64,
    pub nodes: usize,
}

const MAX_NODES: usize = 1 << 16;

/// `(1/2πi)∮_{|z|=e^{r0}} z^n G(z, j0, j) dz`, trapezoid nodes doubled from
/// `4(n+p+r)` until the value changes by less than `1e-9`.
pub fn inverse_laplace_reconstruct(
    scheme: &SchemeDefinition,
    n: usize,
    j0: usize,
    j: usize,
    r0: f64,
    nodes: Option<usize>,
) -> Result<Reconstruction> {
    let t = inverse_laplace_table(scheme, n, &[j0], j, r0, nodes)?;
    let v = t.values[n][0][j - 1];
    Ok(Reconstruction { value: v.re, imaginary: v.im, nodes: t.nodes })
}

/// Contour reconstructions for every `n ≤ n_max`, `j0 ∈ j0s`, `j ≤ j_max`.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionTable {
    pub r0: f64,
    pub nodes: usize,
    /// `values[n][index of j0][j − 1]`.
    pub values: Vec<Vec<Vec<C>>>,
}

/// Batched inverse Laplace: one factorization per node serves every source.
pub fn inverse_laplace_table(
    scheme: &SchemeDefinition,
    n_max: usize,
    j0s: &[usize],
    j_max: usize,
    r0: f64,
    nodes: Option<usize>,
) -> Result<ReconstructionTable> {
    if !(r0 > 0.0) {
        return Err(Error::Domain("r0 must be positive".into()));
    }
    let rho = r0.exp();
    let j0_max = *j0s.iter().max().ok_or_else(|| Error::Domain("no sources".into()))?;
    let zero = C::new(0.0, 0.0);
    // Σ_k z_k^{n+1} G(z_k) over a set of angles.
    let partial = |angles: Vec<f64>| -> Result<Vec<Vec<Vec<C>>>> {
        let per_node: Vec<Result<Vec<Vec<Vec<C>>>>> = angles
            .par_iter()
            .map(|&th| {
                let z = C::from_polar(rho, th);
                let jt = default_truncation(scheme, z, j0_max.max(j_max))?;
                let res = HalfLineResolvent::new(scheme, z, jt)?;
                let mut acc = vec![vec![vec![zero; j_max]; j0s.len()]; n_max + 1];
                for (ji, &j0) in j0s.iter().enumerate() {
                    let g = res.solve(j0);
                    let mut zp = z;
                    for row in acc.iter_mut() {
                        for j in 1..=j_max {
                            row[ji][j - 1] = zp * g.get(j as isize);
                        }
                        zp *= z;
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = vec![vec![vec![zero; j_max]; j0s.len()]; n_max + 1];
        for part in per_node {
            let part = part?;
            for (t, p) in total.iter_mut().zip(part) {
                for (ta, pa) in t.iter_mut().zip(p) {
                    for (x, y) in ta.iter_mut().zip(pa) {
                        *x += y;
                    }
                }
            }
        }
        Ok(total)
    };
    let mut m = nodes.unwrap_or(4 * (n_max + scheme.p + scheme.r));
    let mut sum = partial((0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect())?;
    let scale = |s: &Vec<Vec<Vec<C>>>, m: usize| -> Vec<Vec<Vec<C>>> {
        s.iter()
            .map(|a| a.iter().map(|b| b.iter().map(|x| x / m as f64).collect()).collect())
            .collect()
    };
    let mut prev = scale(&sum, m);
    loop {
        if m >= MAX_NODES {
            return Err(Error::Quadrature(format!("contour reconstruction unsettled at {m} nodes")));
        }
        // Refine: the new nodes sit halfway between the old ones.
        let extra = partial((0..m).map(|k| 2.0 * PI * (k as f64 + 0.5) / m as f64).collect())?;
        for (t, p) in sum.iter_mut().zip(&extra) {
            for (ta, pa) in t.iter_mut().zip(p) {
                for (x, y) in ta.iter_mut().zip(pa) {
                    *x += y;
                }
            }
        }
        m *= 2;
        let cur = scale(&sum, m);
        let change = cur
            .iter()
            .flatten()
            .flatten()
            .zip(prev.iter().flatten().flatten())
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).norm()));
        prev = cur;
        if change < 1e-9 {
            break;
        }
    }
    Ok(ReconstructionTable { r0, nodes: m, values: prev })
}

/// `(1/2πi)∮ z^n G̃(z, j) dz` for the whole-line Green's function.
pub fn inverse_laplace_whole(scheme: &SchemeDefinition, n: usize, j: isize, r0: f64) -> Result<Reconstruction> {
    let rho = r0.exp();
    let eval = |m: usize, offset: f64| -> Result<C> {
        let vals: Vec<Result<C>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let z = C::from_polar(rho, 2.0 * PI * (k as f64 + offset) / m as f64);
                let g = spatial_green_whole(scheme, z, j, j)?;
                Ok(z.powu(n as u32 + 1) * g.get(j))
            })
            .collect();
        vals.into_iter().sum()
    };
    let mut m = 4 * (n + scheme.p + scheme.r);
    let mut sum = eval(m, 0.0)?;
    let mut prev = sum / m as f64;
    while m < MAX_NODES {
        sum += eval(m, 0.5)?;
        m *= 2;
        let cur = sum / m as f64;
        if (cur - prev).norm() < 1e-9 {
            return Ok(Reconstruction { value: cur.re, imaginary: cur.im, nodes: m });
        }
        prev = cur;
    }
    Err(Error::Quadrature("whole-line contour reconstruction unsettled".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::builtin_lfr;

    #[test]
    fn banded_matches_dense() {
        // Tridiagonal system with a forced pivot swap in the first row.
        let n = 6;
        let mut lu = BandedLu::new(n, 1, 2);
        let mut dense = nalgebra::DMatrix::<C>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(1)..=(i + 2).min(n - 1) {
                let v = C::new(((i * 7 + j * 3) % 5) as f64 - 1.0, (i as f64 - j as f64) * 0.1);
                let v = if i == 0 && j == 0 { C::new(0.0, 0.0) } else { v };
                lu.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<C> = (0..n).map(|i| C::new(i as f64 + 1.0, 0.5)).collect();
        let mut x = b.clone();
        lu.factor().unwrap();
        lu.solve(&mut x);
        let xv = nalgebra::DVector::from_vec(x);
        let bv = nalgebra::DVector::from_vec(b);
        assert!((dense * xv - bv).norm() < 1e-12);
    }

    #[test]
    fn half_line_green_decays() {
        let s = builtin_lfr(-0.5, 0.75, 5.0).unwrap();
        let g = spatial_green_half(&s, C::new(2.0, 0.0), 5, None).unwrap();
        assert!(g.truncation_residual < 1e-10);
        assert!(g.get(40).norm() < 1e-20);
    }

    #[test]
    fn whole_line_two_routes() {
        let s = builtin_lfr(-0.5, 0.75, 5.0).unwrap();
        let z = C::new(2.0, 0.0);
        let f = spatial_green_whole(&s, z, -5, 5).unwrap();
        let b = spatial_green_whole_banded(&s, z, -5, 5).unwrap();
        for j in -5..=5 {
            assert!((f.get(j) - b.get(j)).norm() < 1e-10);
        }
    }

    #[test]
    fn eigenvalue_is_rejected() {
        // b = 1/κ_s(z0) puts an eigenvalue of the half-line operator at z0 = 2.
        let ks = (14.0 - 176f64.sqrt()) / 10.0;
        let s = builtin_lfr(-0.5, 0.75, 1.0 / ks).unwrap();
        assert!(matches!(
            spatial_green_half(&s, C::new(2.0, 0.0), 5, None),
            Err(Error::NearSpectrum(_))
        ));
    }

    #[test]
    fn contour_matches_stepping() {
        let s = builtin_lfr(-0.5, 0.75, 5.0).unwrap();
        let rec = inverse_laplace_reconstruct(&s, 20, 10, 5, 0.05, None).unwrap();
        let g = crate::evolution::temporal_green(&s, 20, 10).get(5);
        assert!((rec.value - g).abs() < 1e-8);
        assert!(rec.imaginary.abs() < 1e-9);
    }
}
