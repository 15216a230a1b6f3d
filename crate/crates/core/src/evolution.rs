//! Time stepping of the half-line operator `𝒯` and the whole-line operator `ℒ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scheme::SchemeDefinition;

/// A finitely supported sequence on `j ≥ 1 − r`. `values[i]` holds `u_{i+1-r}`;
/// everything past the end is zero. The first `r` entries are the ghost cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineField {
    pub r: usize,
    pub values: Vec<f64>,
}

impl HalfLineField {
    /// Field with the given interior values `u_1, u_2, …`; ghosts are filled
    /// from the boundary conditions.
    pub fn from_interior(scheme: &SchemeDefinition, interior: &[f64]) -> Self {
        let mut values = vec![0.0; scheme.r];
        values.extend_from_slice(interior);
        let mut f = Self { r: scheme.r, values };
        f.fill_ghosts(scheme);
        f
    }

    /// The Dirac mass `δ_{j0}`, `j0 ≥ 1`.
    pub fn dirac(scheme: &SchemeDefinition, j0: usize) -> Self {
        assert!(j0 >= 1, "Dirac masses sit at j0 >= 1");
        let mut interior = vec![0.0; j0];
        interior[j0 - 1] = 1.0;
        Self::from_interior(scheme, &interior)
    }

    pub fn base_index(&self) -> isize {
        1 - self.r as isize
    }

    /// `u_j`, zero beyond the stored window.
    pub fn get(&self, j: isize) -> f64 {
        let i = j - self.base_index();
        if i < 0 {
            panic!("index {j} lies left of the ghost cells");
        }
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Interior values `u_1, u_2, …` of the stored window.
    pub fn interior(&self) -> &[f64] {
        &self.values[self.r..]
    }

    fn fill_ghosts(&mut self, scheme: &SchemeDefinition) {
        let r = self.r;
        for g in 0..r {
            let j = -(g as isize);
            let mut s = 0.0;
            for k in 1..=scheme.p_b {
                s += scheme.bcoef(k, j) * self.values.get(r + k - 1).copied().unwrap_or(0.0);
            }
            self.values[r - 1 - g] = s;
        }
    }

    /// Largest violation of the ghost relations.
    pub fn ghost_defect(&self, scheme: &SchemeDefinition) -> f64 {
        let mut g = self.clone();
        g.fill_ghosts(scheme);
        (0..self.r)
            .map(|i| (g.values[i] - self.values[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// A finitely supported sequence on `ℤ`; `values[i]` holds `w_{j_min + i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WholeLineField {
    pub j_min: isize,
    pub values: Vec<f64>,
}

impl WholeLineField {
    pub fn dirac() -> Self {
        Self { j_min: 0, values: vec![1.0] }
    }

    pub fn j_max(&self) -> isize {
        self.j_min + self.values.len() as isize - 1
    }

    pub fn get(&self, j: isize) -> f64 {
        let i = j - self.j_min;
        if i < 0 {
            0.0
        } else {
            self.values.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn mass(&self) -> f64 {
        neumaier_sum(self.values.iter().copied())
    }

    pub fn l1_norm(&self) -> f64 {
        neumaier_sum(self.values.iter().map(|x| x.abs()))
    }
}

/// Either kind of field.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Half(HalfLineField),
    Whole(WholeLineField),
}

/// `𝒢(n, j0, ·) = 𝒯ⁿ δ_{j0}` or `𝒢̃(n, ·) = ℒⁿ δ̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenField {
    pub n: usize,
    /// `None` for the whole-line Green's function.
    pub j0: Option<usize>,
    pub field: Field,
}

impl GreenField {
    pub fn get(&self, j: isize) -> f64 {
        match &self.field {
            Field::Half(f) => f.get(j),
            Field::Whole(f) => f.get(j),
        }
    }
}

const GHOST_TOL: f64 = 1e-10;

/// One step of `𝒯`. Fails if the incoming ghosts break the boundary relations.
pub fn apply_half_line(scheme: &SchemeDefinition, field: &HalfLineField) -> Result<HalfLineField> {
    if field.r != scheme.r {
        return Err(Error::Contract("field and scheme disagree on r".into()));
    }
    let scale = field.interior().iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let defect = field.ghost_defect(scheme);
    if defect > GHOST_TOL * scale {
        return Err(Error::Contract(format!("ghost cells off by {defect:e}")));
    }
    let mut out = HalfLineField { r: field.r, values: Vec::new() };
    step_half_into(scheme, &field.values, &mut out.values);
    Ok(out)
}

/// Writes `𝒯u` (ghosts included) into `dst`; the window grows by `r`.
fn step_half_into(scheme: &SchemeDefinition, src: &[f64], dst: &mut Vec<f64>) {
    let r = scheme.r;
    let width = scheme.a.len();
    let n_int = src.len() - r + r;
    dst.clear();
    dst.resize(r + n_int, 0.0);
    // u_j with j ≥ 1 sits at index j − 1 + r; stencil covers indices j−1 .. j−1+p+r.
    for jj in 0..n_int {
        let lo = jj;
        let hi = (jj + width).min(src.len());
        let mut s = 0.0;
        if lo < hi {
            for (c, x) in scheme.a[..hi - lo].iter().zip(&src[lo..hi]) {
                s += c * x;
            }
        }
        dst[r + jj] = s;
    }
    for g in 0..r {
        let j = -(g as isize);
        let mut s = 0.0;
        for k in 1..=scheme.p_b {
            s += scheme.bcoef(k, j) * dst.get(r + k - 1).copied().unwrap_or(0.0);
        }
        dst[r - 1 - g] = s;
    }
}

/// One step of `ℒ`; the window widens by `p` on the left and `r` on the right.
pub fn apply_whole_line(scheme: &SchemeDefinition, field: &WholeLineField) -> WholeLineField {
    let (r, p) = (scheme.r as isize, scheme.p as isize);
    let j_min = field.j_min - p;
    let len = field.values.len() + (p + r) as usize;
    let mut values = vec![0.0; len];
    for (i, out) in values.iter_mut().enumerate() {
        let j = j_min + i as isize;
        let mut s = 0.0;
        for k in -r..=p {
            s += scheme.coef(k) * field.get(j + k);
        }
        *out = s;
    }
    WholeLineField { j_min, values }
}

/// `𝒢(n, j0, ·)`.
pub fn temporal_green(scheme: &SchemeDefinition, n: usize, j0: usize) -> GreenField {
    let mut cur = HalfLineField::dirac(scheme, j0).values;
    let mut next = Vec::with_capacity(cur.len() + n * scheme.r);
    for _ in 0..n {
        step_half_into(scheme, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    GreenField {
        n,
        j0: Some(j0),
        field: Field::Half(HalfLineField { r: scheme.r, values: cur }),
    }
}

/// `𝒢̃(n, ·)`.
pub fn temporal_green_whole(scheme: &SchemeDefinition, n: usize) -> GreenField {
    let mut f = WholeLineField::dirac();
    for _ in 0..n {
        f = apply_whole_line(scheme, &f);
    }
    GreenField { n, j0: None, field: Field::Whole(f) }
}

/// Calls `visit(n, 𝒢̃(n, ·))` for `n = 0..=n_max`.
pub fn for_each_whole_line_step(
    scheme: &SchemeDefinition,
    n_max: usize,
    mut visit: impl FnMut(usize, &WholeLineField),
) {
    let mut f = WholeLineField::dirac();
    visit(0, &f);
    for n in 1..=n_max {
        f = apply_whole_line(scheme, &f);
        visit(n, &f);
    }
}

/// Calls `visit(n, row)` for `n = 0..=n_max`, where `row[j0 − 1] = 𝒢(n, j0, j)`
/// for `j0 = 1..=j0_max` at the fixed target `j`.
///
/// Uses `𝒢(n, j0, j) = ((𝒯ᵀ)ⁿ e_j)_{j0}` so that one evolution covers every source.
pub fn for_each_green_row(
    scheme: &SchemeDefinition,
    j: usize,
    n_max: usize,
    j0_max: usize,
    mut visit: impl FnMut(usize, &[f64]),
) {
    assert!(j >= 1);
    let (r, p) = (scheme.r as isize, scheme.p as isize);
    let len = j + n_max * scheme.p + 1;
    // v[m − 1] is the weight on u_m.
    let mut v = vec![0.0; len];
    let mut w = vec![0.0; len];
    v[j - 1] = 1.0;
    let mut hi = j; // v vanishes beyond index hi
    let row = |v: &[f64]| -> Vec<f64> { (0..j0_max).map(|i| v.get(i).copied().unwrap_or(0.0)).collect() };
    visit(0, &row(&v));
    for n in 1..=n_max {
        w[..(hi + scheme.p).min(len)].iter_mut().for_each(|x| *x = 0.0);
        for jj in 1..=hi as isize {
            let vj = v[(jj - 1) as usize];
            if vj == 0.0 {
                continue;
            }
            for k in -r..=p {
                let idx = jj + k;
                let ak = scheme.coef(k);
                if idx >= 1 {
                    w[(idx - 1) as usize] += ak * vj;
                } else {
                    for m in 1..=scheme.p_b {
                        w[m - 1] += ak * scheme.bcoef(m, idx) * vj;
                    }
                }
            }
        }
        hi = (hi + scheme.p).min(len);
        std::mem::swap(&mut v, &mut w);
        visit(n, &row(&v));
    }
}

/// Neumaier-compensated sum.
pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn lq_norm(values: &[f64], q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("norm exponent {q} is below 1")));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    let scale = values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s = neumaier_sum(values.iter().map(|x| (x.abs() / scale).powf(q)));
    Ok(scale * s.powf(1.0 / q))
}

/// `ℓ^q` norm over `j ≥ 1`; `q = f64::INFINITY` gives the sup norm.
pub fn hq_norm(field: &HalfLineField, q: f64) -> Result<f64> {
    lq_norm(field.interior(), q)
}

/// One line of a growth table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthRecord {
    pub q: f64,
    #[serde(rename = "J")]
    pub j: usize,
    pub n: usize,
    pub ratio: f64,
}

/// Evolves `u_J = Σ_{j0 ≤ J} δ_{j0}` for every `J` and records
/// `‖𝒯ⁿ u_J‖ / ‖u_J‖` in every requested `ℓ^q` norm for `n = 1..=n_max`.
/// Each ratio is a lower bound for `‖𝒯ⁿ‖`.
pub fn growth_experiment(
    scheme: &SchemeDefinition,
    qs: &[f64],
    j_list: &[usize],
    n_max: usize,
) -> Result<Vec<GrowthRecord>> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    if let Some(q) = qs.iter().find(|q| !(**q >= 1.0)) {
        return Err(Error::Domain(format!("norm exponent {q} is below 1")));
    }
    let per_j: Vec<Vec<GrowthRecord>> = j_list
        .par_iter()
        .map(|&jj| {
            let u0 = HalfLineField::from_interior(scheme, &vec![1.0; jj]);
            let norms0: Vec<f64> = qs.iter().map(|&q| lq_norm(u0.interior(), q).unwrap()).collect();
            let mut cur = u0.values;
            let mut next = Vec::with_capacity(cur.len() + n_max * scheme.r);
            let mut out = Vec::with_capacity(n_max * qs.len());
            for n in 1..=n_max {
                step_half_into(scheme, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                for (qi, &q) in qs.iter().enumerate() {
                    let v = lq_norm(&cur[scheme.r..], q).unwrap();
                    out.push(GrowthRecord { q, j: jj, n, ratio: v / norms0[qi] });
                }
            }
            out
        })
        .collect();
    Ok(per_j.into_iter().flatten().collect())
}

/// For each `n`, the largest ratio over all `J` at exponent `q`.
pub fn max_over_j(records: &[GrowthRecord], q: f64) -> Vec<(usize, f64)> {
    let mut best: std::collections::BTreeMap<usize, f64> = Default::default();
    for rec in records.iter().filter(|r| r.q == q) {
        let e = best.entry(rec.n).or_insert(0.0);
        *e = e.max(rec.ratio);
    }
    best.into_iter().collect()
}

/// Least-squares slope of `log y` against `log n` over `n ∈ [n_lo, n_hi]`.
pub fn loglog_slope(points: &[(usize, f64)], n_lo: usize, n_hi: usize) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, y)| *n >= n_lo && *n <= n_hi && *y > 0.0)
        .map(|&(n, y)| ((n as f64).ln(), y.ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// The probe sizes `J` used by default: rounded powers of 1.25 up to `j_max`.
pub fn geometric_j_list(j_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut x = 1.0_f64;
    while x.round() as usize <= j_max {
        let j = x.round() as usize;
        if out.last() != Some(&j) {
            out.push(j);
        }
        x *= 1.25;
    }
    out
}
