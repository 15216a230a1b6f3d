//! Scheme definitions, symbols, and the consistency/dissipativity/diffusivity check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// An explicit one-step scheme on the half-line `j ≥ 1`:
///
/// ```text
/// u^{n+1}_j = Σ_{k=-r}^{p} a_k u^n_{j+k}           j ≥ 1
/// u^n_j     = Σ_{k=1}^{p_b} b_{k,j} u^n_k          j ∈ {1-r..0}
/// ```
///
/// `a` is stored from index `-r` upward. `b` holds one row per ghost cell,
/// ghost `0` first, and each row lists `b_{1,j} .. b_{p_b,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme")]
pub struct SchemeDefinition {
    pub r: usize,
    pub p: usize,
    pub a: Vec<f64>,
    pub p_b: usize,
    pub b: Vec<Vec<f64>>,
    pub lambda: f64,
    pub v: f64,
}

/// A coefficient as written in a JSON document: a number, or a string holding
/// a decimal or a rational `num/den`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Coefficient {
    Number(f64),
    Text(String),
}

impl Coefficient {
    fn value(&self) -> Result<f64> {
        match self {
            Coefficient::Number(x) => Ok(*x),
            Coefficient::Text(s) => parse_coefficient(s),
        }
    }
}

/// Parses `"0.125"`, `"-1/16"` or `"1e-3"`.
pub fn parse_coefficient(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot read coefficient {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad())?;
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(bad());
        }
        Ok(n / d)
    } else {
        s.parse().map_err(|_| bad())
    }
}

#[derive(Deserialize)]
struct RawScheme {
    r: usize,
    p: usize,
    a: Vec<Coefficient>,
    p_b: usize,
    b: Vec<Vec<Coefficient>>,
    lambda: Coefficient,
    v: Coefficient,
}

impl TryFrom<RawScheme> for SchemeDefinition {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        let a = raw.a.iter().map(Coefficient::value).collect::<Result<Vec<_>>>()?;
        let b = raw
            .b
            .iter()
            .map(|row| row.iter().map(Coefficient::value).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SchemeDefinition::new(raw.r, raw.p, a, raw.p_b, b, raw.lambda.value()?, raw.v.value()?)
    }
}

impl SchemeDefinition {
    /// Builds a scheme and checks its invariants.
    pub fn new(
        r: usize,
        p: usize,
        a: Vec<f64>,
        p_b: usize,
        b: Vec<Vec<f64>>,
        lambda: f64,
        v: f64,
    ) -> Result<Self> {
        if r < 1 || p < 1 {
            return Err(Error::InvalidScheme("r and p must be at least 1".into()));
        }
        if a.len() != p + r + 1 {
            return Err(Error::InvalidScheme(format!(
                "expected {} interior coefficients, got {}",
                p + r + 1,
                a.len()
            )));
        }
        if a[0] == 0.0 || a[p + r] == 0.0 {
            return Err(Error::InvalidScheme("a_{-r} and a_p must be nonzero".into()));
        }
        if p_b > p {
            return Err(Error::InvalidScheme("p_b must not exceed p".into()));
        }
        if b.len() != r {
            return Err(Error::InvalidScheme(format!(
                "expected {r} boundary rows, got {}",
                b.len()
            )));
        }
        if b.iter().any(|row| row.len() != p_b) {
            return Err(Error::InvalidScheme(format!(
                "each boundary row must hold p_b = {p_b} coefficients"
            )));
        }
        if a.iter().chain(b.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidScheme("coefficients must be finite".into()));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidScheme("lambda must be positive".into()));
        }
        if !(v < 0.0) {
            return Err(Error::InvalidScheme("v must be negative".into()));
        }
        Ok(Self { r, p, a, p_b, b, lambda, v })
    }

    /// Interior coefficient `a_k` for `k ∈ {-r..p}`.
    #[inline]
    pub fn coef(&self, k: isize) -> f64 {
        self.a[(k + self.r as isize) as usize]
    }

    /// Boundary coefficient `b_{k,j}` for `k ∈ {1..p_b}`, `j ∈ {1-r..0}`.
    #[inline]
    pub fn bcoef(&self, k: usize, j: isize) -> f64 {
        self.b[(-j) as usize][k - 1]
    }

    /// `a_p`, the rightmost interior coefficient.
    pub fn a_p(&self) -> f64 {
        self.a[self.p + self.r]
    }

    /// `-F'(1) = -Σ k a_k`.
    pub fn alpha(&self) -> f64 {
        -(-(self.r as isize)..=self.p as isize)
            .map(|k| k as f64 * self.coef(k))
            .sum::<f64>()
    }

    /// Characteristic polynomial `Σ a_j κ^{j+r} − z κ^r`, constant term first.
    pub fn characteristic_polynomial(&self, z: Complex64) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = self.a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        c[self.r] -= z;
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `F(κ) = Σ a_j κ^j`.
pub fn symbol_eval(scheme: &SchemeDefinition, kappa: Complex64) -> Result<Complex64> {
    if kappa.norm() == 0.0 {
        return Err(Error::Domain("the symbol is not defined at κ = 0".into()));
    }
    Ok(symbol_unchecked(scheme, kappa))
}

pub(crate) fn symbol_unchecked(scheme: &SchemeDefinition, kappa: Complex64) -> Complex64 {
    // κ^{-r} Σ a_j κ^{j+r}, evaluated by Horner.
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in scheme.a.iter().rev() {
        acc = acc * kappa + c;
    }
    acc / kappa.powi(scheme.r as i32)
}

/// `F'(κ)`.
pub fn symbol_derivative(scheme: &SchemeDefinition, kappa: Complex64) -> Complex64 {
    (-(scheme.r as isize)..=scheme.p as isize)
        .filter(|&k| k != 0)
        .map(|k| scheme.coef(k) * k as f64 * kappa.powi(k as i32 - 1))
        .sum()
}

/// `F(e^{it})`.
pub fn symbol_on_circle(scheme: &SchemeDefinition, t: f64) -> Complex64 {
    symbol_unchecked(scheme, Complex64::from_polar(1.0, t))
}

/// Options for [`check_hypothesis_one`].
#[derive(Debug, Clone, Copy)]
pub struct HypothesisOneOptions {
    /// Highest series coefficient computed (at least 2).
    pub order: usize,
    /// Number of sampled points on the circle (at least 1000).
    pub grid_size: usize,
    /// Tolerance on `|F(1) − 1|`.
    pub tol: f64,
    /// Threshold under which a series coefficient counts as vanishing.
    pub coefficient_tol: f64,
    /// Below this `|t|` the sampled check hands over to the series.
    pub crossover_radius: f64,
}

impl Default for HypothesisOneOptions {
    fn default() -> Self {
        Self {
            order: 8,
            grid_size: 100_000,
            tol: 1e-12,
            coefficient_tol: 1e-8,
            crossover_radius: 0.05,
        }
    }
}

/// Result of the check on the symbol near and away from `κ = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub satisfied: bool,
    /// Reason for failure, if any.
    pub failure: Option<String>,
    pub alpha: f64,
    /// Diffusivity order; the leading dissipative term is `t^{2μ}`.
    pub mu: usize,
    pub beta: Complex64,
    pub consistency_residual: f64,
    pub dissipativity_margin: f64,
    /// `t` where `|F(e^{it})| ≥ 1` was observed.
    pub witness_t: Option<f64>,
    /// Coefficients of `log F(e^{it}) + iαt`, from `t^0` to `t^order`.
    pub series: Vec<Complex64>,
}

/// Taylor coefficients of `log F(e^{it})` in `t`, from order 0 to `order`.
pub fn log_symbol_series(scheme: &SchemeDefinition, order: usize) -> Vec<Complex64> {
    // F(e^{it}) = Σ c_m t^m with c_m = Σ_j a_j (ij)^m / m!.
    let i = Complex64::new(0.0, 1.0);
    let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
    for k in -(scheme.r as isize)..=scheme.p as isize {
        let ak = scheme.coef(k);
        let mut term = Complex64::new(ak, 0.0);
        c[0] += term;
        for m in 1..=order {
            term = term * i * k as f64 / m as f64;
            c[m] += term;
        }
    }
    // g = log f: f g' = f'  ⇒  m c_0 g_m = m c_m − Σ_{k=1}^{m-1} k g_k c_{m-k}.
    let mut g = vec![Complex64::new(0.0, 0.0); order + 1];
    g[0] = c[0].ln();
    for m in 1..=order {
        let mut s = c[m] * m as f64;
        for k in 1..m {
            s -= g[k] * c[m - k] * k as f64;
        }
        g[m] = s / (c[0] * m as f64);
    }
    g
}

/// Checks consistency `F(1) = 1`, dissipativity `|F(e^{it})| < 1` for `t ≠ 0`,
/// and reads `α`, `μ`, `β` from the expansion
/// `log F(e^{it}) = −iαt − βt^{2μ} + …`.
pub fn check_hypothesis_one(
    scheme: &SchemeDefinition,
    opts: HypothesisOneOptions,
) -> Result<HypothesisReport> {
    if opts.order < 2 {
        return Err(Error::Domain("series order must be at least 2".into()));
    }
    if opts.grid_size < 1000 {
        return Err(Error::Domain("grid size must be at least 1000".into()));
    }
    let f1: f64 = scheme.a.iter().sum();
    let consistency_residual = (f1 - 1.0).abs();
    let g = log_symbol_series(scheme, opts.order);
    let i = Complex64::new(0.0, 1.0);
    let alpha_c = i * g[1];
    let alpha = alpha_c.re;

    let mut series = g.clone();
    series[1] += i * alpha;

    let mut mu = 0;
    let mut beta = Complex64::new(0.0, 0.0);
    let mut failure = None;
    if consistency_residual > opts.tol {
        failure = Some(format!("consistency: |F(1) - 1| = {consistency_residual:e}"));
    }
    if failure.is_none() && alpha_c.im.abs() > opts.coefficient_tol {
        failure = Some("consistency: F'(1) is not real".into());
    }
    if failure.is_none() {
        match (2..=opts.order).find(|&m| g[m].norm() > opts.coefficient_tol) {
            None => failure = Some(format!("no nonvanishing series term up to order {}", opts.order)),
            Some(m) if m % 2 == 1 => {
                failure = Some(format!("first nonvanishing series term has odd order {m}"))
            }
            Some(m) => {
                mu = m / 2;
                beta = -g[m];
                if beta.re <= 0.0 {
                    failure = Some(format!("Re(beta) = {} is not positive", beta.re));
                }
            }
        }
    }

    // Sample |F(e^{it})| on both sides of the crossover neighbourhood.
    let t0 = opts.crossover_radius;
    let span = std::f64::consts::PI - t0;
    let half = opts.grid_size / 2;
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for k in 0..=half {
        let t = t0 + span * k as f64 / half as f64;
        for tt in [t, -t] {
            let m = 1.0 - symbol_on_circle(scheme, tt).norm();
            if m < margin {
                margin = m;
                if m <= 0.0 {
                    witness = Some(tt);
                }
            }
        }
    }
    if failure.is_none() && margin <= 0.0 {
        failure = Some(format!(
            "dissipativity: |F(e^(it))| >= 1 at t = {}",
            witness.unwrap_or(f64::NAN)
        ));
    }
    if failure.is_none() && !(alpha > -(scheme.p as f64) && alpha < 0.0) {
        failure = Some(format!("alpha = {alpha} lies outside ]-p, 0["));
    }

    Ok(HypothesisReport {
        satisfied: failure.is_none(),
        failure,
        alpha,
        mu,
        beta,
        consistency_residual,
        dissipativity_margin: margin,
        witness_t: witness,
        series,
    })
}

/// The `r × (p+r)` matrix of the boundary conditions acting on
/// `(u_p, …, u_{1-r})ᵀ`. Row `i` belongs to ghost cell `j = -i`.
pub fn boundary_matrix(scheme: &SchemeDefinition) -> DMatrix<f64> {
    let (r, p) = (scheme.r, scheme.p);
    let col = |j: isize| (p as isize - j) as usize;
    let mut m = DMatrix::zeros(r, p + r);
    for i in 0..r {
        let j = -(i as isize);
        m[(i, col(j))] = 1.0;
        for k in 1..=scheme.p_b {
            m[(i, col(k as isize))] -= scheme.bcoef(k, j);
        }
    }
    m
}

/// Modified Lax-Friedrichs scheme with ghost cell `u_0 = b u_1`.
///
/// Requires `α² < D < 1`, `D ≠ −α` and `α < 0`.
pub fn builtin_lfr(alpha: f64, d: f64, b: f64) -> Result<SchemeDefinition> {
    if !(alpha * alpha < d && d < 1.0) {
        return Err(Error::InvalidScheme(format!(
            "LFR needs alpha^2 < D < 1 (alpha = {alpha}, D = {d})"
        )));
    }
    if d == -alpha {
        return Err(Error::InvalidScheme("LFR needs D != -alpha".into()));
    }
    if !(alpha < 0.0) {
        return Err(Error::InvalidScheme("LFR needs a negative alpha".into()));
    }
    SchemeDefinition::new(
        1,
        1,
        vec![(d + alpha) / 2.0, 1.0 - d, (d - alpha) / 2.0],
        1,
        vec![vec![b]],
        1.0,
        alpha,
    )
}

/// Third-order upwind-biased scheme with ghost cell `u_0 = b₁ u_1 + b₂ u_2`.
///
/// Requires `α ∈ ]−1, 0[`.
pub fn builtin_o3(alpha: f64, b1: f64, b2: f64) -> Result<SchemeDefinition> {
    if !(alpha > -1.0 && alpha < 0.0) {
        return Err(Error::InvalidScheme(format!("O3 needs alpha in ]-1, 0[ (got {alpha})")));
    }
    let a = vec![
        alpha * (1.0 + alpha) * (2.0 + alpha) / 6.0,
        (1.0 - alpha * alpha) * (2.0 + alpha) / 2.0,
        -alpha * (1.0 - alpha) * (2.0 + alpha) / 2.0,
        alpha * (1.0 - alpha * alpha) / 6.0,
    ];
    SchemeDefinition::new(1, 2, a, 2, vec![vec![b1, b2]], 1.0, alpha)
}

/// The O3 boundary `b₁ = (1 + κ_s)/κ_s`, `b₂ = −1/κ_s`, where `κ_s` is the
/// root of `F(κ) = 1` inside the unit disk. With this choice `1 − b₁ − b₂ = 0`.
pub fn o3_stable_boundary(alpha: f64) -> Result<(f64, f64)> {
    let probe = builtin_o3(alpha, 0.0, 0.0)?;
    let roots = poly::roots(&probe.characteristic_polynomial(Complex64::new(1.0, 0.0)))?;
    let ks = roots
        .iter()
        .filter(|k| k.norm() < 1.0 - 1e-8)
        .min_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
        .ok_or_else(|| Error::Classification("no stable root at z = 1".into()))?;
    let ks = ks.re;
    Ok(((1.0 + ks) / ks, -1.0 / ks))
}

/// O3 with the boundary of [`o3_stable_boundary`].
pub fn builtin_o3_stable(alpha: f64) -> Result<SchemeDefinition> {
    let (b1, b2) = o3_stable_boundary(alpha)?;
    builtin_o3(alpha, b1, b2)
}
