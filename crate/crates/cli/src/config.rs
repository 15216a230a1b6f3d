use std::path::PathBuf;

use halfline::scheme::{builtin_lfr, builtin_o3, builtin_o3_stable, SchemeDefinition};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scheme: SchemeDefinition,
    pub scheme_id: String,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
}

/// Grid overrides. Absent lists fall back to per-experiment defaults; present
/// lists must be nonempty.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub n: Option<Vec<usize>>,
    pub j0: Option<Vec<usize>>,
    pub j: Option<Vec<usize>>,
    #[serde(rename = "J")]
    pub big_j: Option<Vec<usize>>,
    pub q: Option<Vec<NormExponent>>,
    pub n_max: Option<usize>,
    pub r0: Option<Vec<f64>>,
    pub fit_window: Option<(usize, usize)>,
}

/// A norm exponent: a number ≥ 1 or the string "inf".
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum NormExponent {
    Finite(f64),
    Named(Infinity),
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl NormExponent {
    pub fn value(self) -> f64 {
        match self {
            NormExponent::Finite(q) => q,
            NormExponent::Named(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub consistency: f64,
    pub coefficient: f64,
    pub residue: f64,
    pub unit_circle: f64,
    pub oracle: f64,
    pub err_noise_floor: f64,
    pub crossover_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            consistency: 1e-12,
            coefficient: 1e-8,
            residue: 1e-10,
            unit_circle: 1e-8,
            oracle: 1e-8,
            err_noise_floor: 1e-14,
            crossover_radius: 0.05,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scheme: Value,
    id: Option<String>,
    #[serde(default)]
    grids: Grids,
    #[serde(default)]
    tolerances: Tolerances,
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LfrParams {
    alpha: f64,
    #[serde(rename = "D")]
    d: f64,
    b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct O3Params {
    alpha: f64,
    b1: Option<f64>,
    b2: Option<f64>,
}

fn parse_at<T: serde::de::DeserializeOwned>(v: Value, path: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let at = if inner == "." { path.to_string() } else { format!("{path}.{inner}") };
        CliError::Usage(format!("{at}: {}", e.inner()))
    })
}

fn parse_scheme(v: Value) -> Result<(SchemeDefinition, String), CliError> {
    let Value::Object(mut map) = v else {
        return Err(CliError::Usage("scheme: expected an object".into()));
    };
    let Some(name) = map.remove("builtin") else {
        let s: SchemeDefinition = parse_at(Value::Object(map), "scheme")?;
        return Ok((s, "inline".into()));
    };
    let name = name
        .as_str()
        .ok_or_else(|| CliError::Usage("scheme.builtin: expected a string".into()))?
        .to_string();
    let scheme = match name.as_str() {
        "lfr" => {
            let p: LfrParams = parse_at(Value::Object(map), "scheme")?;
            builtin_lfr(p.alpha, p.d, p.b)
        }
        "o3" => {
            let p: O3Params = parse_at(Value::Object(map), "scheme")?;
            match (p.b1, p.b2) {
                (None, None) => builtin_o3_stable(p.alpha),
                (Some(b1), Some(b2)) => builtin_o3(p.alpha, b1, b2),
                _ => return Err(CliError::Usage("scheme: give both b1 and b2 or neither".into())),
            }
        }
        other => return Err(CliError::Usage(format!("scheme.builtin: unknown builtin {other:?}"))),
    }
    .map_err(|e| CliError::Usage(format!("scheme: {e}")))?;
    Ok((scheme, name))
}

fn nonempty<T>(v: &Option<Vec<T>>, path: &str) -> Result<(), CliError> {
    match v {
        Some(x) if x.is_empty() => Err(CliError::Usage(format!("{path}: must be nonempty"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            CliError::Usage(format!("{}: {}", e.path(), e.inner()))
        })?;
        let (scheme, name) = parse_scheme(raw.scheme)?;
        let g = &raw.grids;
        nonempty(&g.n, "grids.n")?;
        nonempty(&g.j0, "grids.j0")?;
        nonempty(&g.j, "grids.j")?;
        nonempty(&g.big_j, "grids.J")?;
        nonempty(&g.q, "grids.q")?;
        nonempty(&g.r0, "grids.r0")?;
        if let Some(q) = g.q.as_ref().and_then(|q| q.iter().find(|q| !(q.value() >= 1.0))) {
            return Err(CliError::Usage(format!("grids.q: exponent {} is below 1", q.value())));
        }
        for (path, list) in [("grids.j0", &g.j0), ("grids.j", &g.j), ("grids.J", &g.big_j)] {
            if list.as_ref().is_some_and(|l| l.contains(&0)) {
                return Err(CliError::Usage(format!("{path}: indices start at 1")));
            }
        }
        if g.r0.as_ref().is_some_and(|r| r.iter().any(|&x| !(x > 0.0))) {
            return Err(CliError::Usage("grids.r0: radii exponents must be positive".into()));
        }
        let t = &raw.tolerances;
        for (path, v) in [
            ("tolerances.consistency", t.consistency),
            ("tolerances.coefficient", t.coefficient),
            ("tolerances.residue", t.residue),
            ("tolerances.unit_circle", t.unit_circle),
            ("tolerances.oracle", t.oracle),
            ("tolerances.err_noise_floor", t.err_noise_floor),
            ("tolerances.crossover_radius", t.crossover_radius),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Usage(format!("{path}: must be positive")));
            }
        }
        Ok(Self {
            scheme,
            scheme_id: raw.id.unwrap_or(name),
            grids: raw.grids,
            tolerances: raw.tolerances,
            out: raw.out,
        })
    }
}
