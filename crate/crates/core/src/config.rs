//! Verification configs: a TOML file with shared keys at the top level and
//! exactly one table naming the family.
//!
//! ```toml
//! domain = [0.5, 1.5, 0.5, 1.5]   # x0, x1, y0, y1
//! grid = [9, 9]                   # optional, default 9 x 9
//! tolerance = 1e-8                # optional, default 1e-8 (1e-5 for case_iv)
//! lambda = -3.0                   # optional override
//! normalization = "auto"          # n0 | n1 | auto
//! quadrature_resolution = 21      # optional
//!
//! [einstein]
//! a = 1.0
//! b = 0.0
//! c = 0.0
//! A = 1.0
//! B = 1.0
//! theta = 1.0
//! ```
//!
//! Family tables and their keys:
//!
//! | table                 | keys                                                        |
//! |-----------------------|-------------------------------------------------------------|
//! | `general`             | `q` (in x, y), `A`, `B` (in t), `theta`                     |
//! | `axisymmetric`        | `q`, `A`, `B`                                               |
//! | `einstein`            | `a`, `b`, `c`, `A`, `B`, `theta`                            |
//! | `schwarzschild`       | `m`, or `A` and `B` (in t)                                  |
//! | `plebanski_demianski` | `a0`, `b0`, `p` (4 ascending coefficients), `sign`          |
//! | `case_iv`             | `a0`, `b0`, `lambda`, `init` (z, f, f', f''), `z_range`, `form`, `max_step` |
//! | `case_v`              | `alpha`, `c`, `k1`, `k2`                                    |
//! | `product_surface`     | `kind` (cosh, sinh, sin), `A`, `B`, `swap_xy`, `sigma`, `tau` |

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::expr::{compile_expression, compile_profile};
use crate::grid::Box2;
use crate::ode::{OdeForm, OdeStateIV};
use crate::profile::Profile1;
use crate::soliton::Normalization;
use crate::zoo::{CaseVParams, EinsteinParams, PdParams, PdSign, ProductSurfaceParams, SchwarzschildParams, SurfaceKind};

/// Normalization requested for the scalar `λ` equation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationChoice {
    N0,
    N1,
    #[default]
    Auto,
}

impl NormalizationChoice {
    pub fn candidates(self) -> Vec<Normalization> {
        match self {
            NormalizationChoice::N0 => vec![Normalization::N0],
            NormalizationChoice::N1 => vec![Normalization::N1],
            NormalizationChoice::Auto => Normalization::ALL.to_vec(),
        }
    }
}

impl FromStr for NormalizationChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n0" => Ok(NormalizationChoice::N0),
            "n1" => Ok(NormalizationChoice::N1),
            "auto" => Ok(NormalizationChoice::Auto),
            other => Err(Error::config("normalization", format!("expected n0, n1 or auto, got `{other}`"))),
        }
    }
}

/// `A` and `B` for the Schwarzschild family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchwarzschildSource {
    Mass(f64),
    Profiles { a: String, b: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseIVConfig {
    pub a0: f64,
    pub b0: f64,
    pub lambda: f64,
    pub init: OdeStateIV,
    pub z_range: (f64, f64),
    pub form: OdeForm,
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    General { q: String, a: String, b: String, theta: f64 },
    Axisymmetric { q: String, a: String, b: String },
    Einstein(EinsteinParams),
    Schwarzschild(SchwarzschildSource),
    PlebanskiDemianski(PdParams),
    CaseIv(CaseIVConfig),
    CaseV(CaseVParams),
    ProductSurface(ProductSurfaceParams),
}

impl FamilyParams {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyParams::General { .. } => "general",
            FamilyParams::Axisymmetric { .. } => "axisymmetric",
            FamilyParams::Einstein(_) => "einstein",
            FamilyParams::Schwarzschild(_) => "schwarzschild",
            FamilyParams::PlebanskiDemianski(_) => "plebanski_demianski",
            FamilyParams::CaseIv(_) => "case_iv",
            FamilyParams::CaseV(_) => "case_v",
            FamilyParams::ProductSurface(_) => "product_surface",
        }
    }
}

pub const FAMILY_NAMES: [&str; 8] = [
    "general",
    "axisymmetric",
    "einstein",
    "schwarzschild",
    "plebanski_demianski",
    "case_iv",
    "case_v",
    "product_surface",
];

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_TOLERANCE_CASE_IV: f64 = 1e-5;
pub const DEFAULT_GRID: (usize, usize) = (9, 9);
pub const DEFAULT_QUADRATURE_RESOLUTION: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub params: FamilyParams,
    pub domain: Box2,
    pub grid: (usize, usize),
    pub tolerance: f64,
    pub lambda: Option<f64>,
    pub normalization: NormalizationChoice,
    pub quadrature_resolution: usize,
}

impl FamilyConfig {
    pub fn new(params: FamilyParams, domain: Box2) -> Self {
        let tolerance = match params {
            FamilyParams::CaseIv(_) => DEFAULT_TOLERANCE_CASE_IV,
            _ => DEFAULT_TOLERANCE,
        };
        FamilyConfig {
            params,
            domain,
            grid: DEFAULT_GRID,
            tolerance,
            lambda: None,
            normalization: NormalizationChoice::Auto,
            quadrature_resolution: DEFAULT_QUADRATURE_RESOLUTION,
        }
    }

    /// Checks the invariants shared by every family.
    pub fn validate(&self) -> Result<()> {
        let (nx, ny) = self.grid;
        if nx < 2 || ny < 2 {
            return Err(Error::config("grid", format!("needs at least 2 x 2 points, got {nx} x {ny}")));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::config("tolerance", format!("must be positive, got {}", self.tolerance)));
        }
        let d = self.domain;
        Box2::new(d.x0, d.x1, d.y0, d.y1).map_err(|e| Error::config("domain", e.to_string()))?;
        if self.quadrature_resolution < 3 {
            return Err(Error::config("quadrature_resolution", "must be at least 3"));
        }
        if self.lambda.is_some_and(|l| !l.is_finite()) {
            return Err(Error::config("lambda", "must be finite"));
        }
        Ok(())
    }
}

impl fmt::Display for FamilyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {} ({} x {}, tol {:e})",
            self.params.name(),
            self.domain,
            self.grid.0,
            self.grid.1,
            self.tolerance
        )
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<FamilyConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Parses and validates a config; expressions are compiled to catch errors
/// early.
pub fn parse_config(text: &str) -> Result<FamilyConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::Config {
            field: "<syntax>".into(),
            line,
            msg: e.message().to_string(),
        }
    })?;
    Reader { text, table: &table, prefix: "" }.config()
}

/// Field access with errors that name the key and, when it can be found
/// textually, its line.
struct Reader<'a> {
    text: &'a str,
    table: &'a Table,
    prefix: &'a str,
}

impl<'a> Reader<'a> {
    fn err(&self, key: &str, msg: impl Into<String>) -> Error {
        let field = if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        };
        Error::Config {
            line: find_line(self.text, self.prefix, key),
            field,
            msg: msg.into(),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.get(key)
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(self.err(key, format!("expected a number, got {}", other.type_str()))),
        }
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| self.err(key, "missing"))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(self.err(key, format!("expected a boolean, got {}", other.type_str()))),
        }
    }

    fn str_opt(&self, key: &str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(self.err(key, format!("expected a string, got {}", other.type_str()))),
        }
    }

    fn str(&self, key: &str) -> Result<&'a str> {
        self.str_opt(key)?.ok_or_else(|| self.err(key, "missing"))
    }

    fn numbers(&self, key: &str, len: usize) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let bad = || self.err(key, format!("expected an array of {len} numbers"));
        let arr = v.as_array().ok_or_else(bad)?;
        if arr.len() != len {
            return Err(bad());
        }
        arr.iter()
            .map(|x| match x {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn field_expr(&self, key: &str) -> Result<String> {
        let src = self.str(key)?;
        compile_expression(src).map_err(|e| self.err(key, e.to_string()))?;
        Ok(src.to_string())
    }

    fn profile_expr(&self, key: &str) -> Result<String> {
        let src = self.str(key)?;
        compile_profile(src).map_err(|e| self.err(key, e.to_string()))?;
        Ok(src.to_string())
    }

    fn only_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.err(k, format!("unknown key; expected one of {}", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    fn config(&self) -> Result<FamilyConfig> {
        const SHARED: [&str; 6] = [
            "domain",
            "grid",
            "tolerance",
            "lambda",
            "normalization",
            "quadrature_resolution",
        ];
        let mut family = None;
        for (k, v) in self.table {
            if SHARED.contains(&k.as_str()) {
                continue;
            }
            match (FAMILY_NAMES.iter().find(|n| **n == k), v) {
                (Some(name), Value::Table(t)) => {
                    if let Some((first, _)) = family {
                        return Err(self.err(k, format!("only one family table is allowed; also found {first}")));
                    }
                    family = Some((*name, t));
                }
                (Some(_), _) => return Err(self.err(k, "expected a table")),
                (None, _) => {
                    return Err(self.err(
                        k,
                        format!("unknown key; families are {}", FAMILY_NAMES.join(", ")),
                    ))
                }
            }
        }
        let (name, section) = family.ok_or_else(|| self.err("family", "no family table"))?;
        let sub = Reader {
            text: self.text,
            table: section,
            prefix: name,
        };
        let params = sub.family(name)?;

        let d = self.numbers("domain", 4)?.ok_or_else(|| self.err("domain", "missing"))?;
        let domain = Box2::new(d[0], d[1], d[2], d[3]).map_err(|e| self.err("domain", e.to_string()))?;
        let mut cfg = FamilyConfig::new(params, domain);
        if let Some(g) = self.numbers("grid", 2)? {
            if g.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                return Err(self.err("grid", "expected two non-negative integers"));
            }
            cfg.grid = (g[0] as usize, g[1] as usize);
            if cfg.grid.0 < 2 || cfg.grid.1 < 2 {
                return Err(self.err("grid", format!("needs at least 2 x 2 points, got {} x {}", g[0], g[1])));
            }
        }
        if let Some(t) = self.f64_opt("tolerance")? {
            if !(t > 0.0) {
                return Err(self.err("tolerance", format!("must be positive, got {t}")));
            }
            cfg.tolerance = t;
        }
        cfg.lambda = self.f64_opt("lambda")?;
        if let Some(n) = self.str_opt("normalization")? {
            cfg.normalization = n.parse().map_err(|_| self.err("normalization", "expected n0, n1 or auto"))?;
        }
        if let Some(r) = self.f64_opt("quadrature_resolution")? {
            if r.fract() != 0.0 || r < 3.0 {
                return Err(self.err("quadrature_resolution", "expected an integer >= 3"));
            }
            cfg.quadrature_resolution = r as usize;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn family(&self, name: &str) -> Result<FamilyParams> {
        Ok(match name {
            "general" => {
                self.only_keys(&["q", "A", "B", "theta"])?;
                FamilyParams::General {
                    q: self.field_expr("q")?,
                    a: self.profile_expr("A")?,
                    b: self.profile_expr("B")?,
                    theta: self.f64("theta")?,
                }
            }
            "axisymmetric" => {
                self.only_keys(&["q", "A", "B"])?;
                FamilyParams::Axisymmetric {
                    q: self.field_expr("q")?,
                    a: self.profile_expr("A")?,
                    b: self.profile_expr("B")?,
                }
            }
            "einstein" => {
                self.only_keys(&["a", "b", "c", "A", "B", "theta"])?;
                FamilyParams::Einstein(EinsteinParams {
                    a: self.f64_or("a", 0.0)?,
                    b: self.f64_or("b", 0.0)?,
                    c: self.f64_or("c", 0.0)?,
                    big_a: self.f64_or("A", 1.0)?,
                    big_b: self.f64_or("B", 1.0)?,
                    theta: self.f64_or("theta", std::f64::consts::FRAC_PI_2)?,
                })
            }
            "schwarzschild" => {
                self.only_keys(&["m", "A", "B"])?;
                match self.f64_opt("m")? {
                    Some(m) => {
                        if self.get("A").is_some() || self.get("B").is_some() {
                            return Err(self.err("m", "give either m or A and B, not both"));
                        }
                        FamilyParams::Schwarzschild(SchwarzschildSource::Mass(m))
                    }
                    None => FamilyParams::Schwarzschild(SchwarzschildSource::Profiles {
                        a: self.profile_expr("A")?,
                        b: self.profile_expr("B")?,
                    }),
                }
            }
            "plebanski_demianski" => {
                self.only_keys(&["a0", "b0", "p", "sign"])?;
                let p = self.numbers("p", 4)?.ok_or_else(|| self.err("p", "missing"))?;
                let sign = match self.str_opt("sign")?.unwrap_or("minus") {
                    "plus" | "+" => PdSign::Plus,
                    "minus" | "-" => PdSign::Minus,
                    other => return Err(self.err("sign", format!("expected plus or minus, got `{other}`"))),
                };
                FamilyParams::PlebanskiDemianski(PdParams {
                    a0: self.f64("a0")?,
                    b0: self.f64("b0")?,
                    p: [p[0], p[1], p[2], p[3]],
                    sign,
                })
            }
            "case_iv" => {
                self.only_keys(&["a0", "b0", "lambda", "init", "z_range", "form", "max_step"])?;
                let init = self.numbers("init", 4)?.ok_or_else(|| self.err("init", "missing"))?;
                let z_range = self.numbers("z_range", 2)?.ok_or_else(|| self.err("z_range", "missing"))?;
                let form = match self.str_opt("form")?.unwrap_or("consistent") {
                    "consistent" => OdeForm::Consistent,
                    "as_printed" => OdeForm::AsPrinted,
                    other => {
                        return Err(self.err("form", format!("expected consistent or as_printed, got `{other}`")))
                    }
                };
                let max_step = self.f64_or("max_step", crate::ode::IntegratorConfig::default().max_step)?;
                if !(max_step > 0.0) {
                    return Err(self.err("max_step", "must be positive"));
                }
                let (z0, z1) = (z_range[0], z_range[1]);
                if !(z0 <= init[0] && init[0] <= z1 && z0 < z1) {
                    return Err(self.err("z_range", format!("must be increasing and contain init z = {}", init[0])));
                }
                FamilyParams::CaseIv(CaseIVConfig {
                    a0: self.f64("a0")?,
                    b0: self.f64("b0")?,
                    lambda: self.f64("lambda")?,
                    init: OdeStateIV {
                        z: init[0],
                        f: init[1],
                        f1: init[2],
                        f2: init[3],
                    },
                    z_range: (z0, z1),
                    form,
                    max_step,
                })
            }
            "case_v" => {
                self.only_keys(&["alpha", "c", "k1", "k2"])?;
                let alpha = self.f64("alpha")?;
                if alpha == 0.5 {
                    return Err(self.err("alpha", "alpha = 1/2 excluded"));
                }
                FamilyParams::CaseV(CaseVParams {
                    alpha,
                    c: self.f64("c")?,
                    k1: self.f64("k1")?,
                    k2: self.f64("k2")?,
                })
            }
            "product_surface" => {
                self.only_keys(&["kind", "A", "B", "swap_xy", "sigma", "tau"])?;
                let kind = match self.str("kind")? {
                    "cosh" => SurfaceKind::Cosh,
                    "sinh" => SurfaceKind::Sinh,
                    "sin" => SurfaceKind::Sin,
                    other => return Err(self.err("kind", format!("expected cosh, sinh or sin, got `{other}`"))),
                };
                FamilyParams::ProductSurface(ProductSurfaceParams {
                    kind,
                    big_a: self.f64_or("A", 1.0)?,
                    big_b: self.f64_or("B", 1.0)?,
                    swap_xy: self.bool_or("swap_xy", false)?,
                    sigma: self.f64_or("sigma", 1.0)?,
                    tau: self.f64_or("tau", 0.0)?,
                })
            }
            _ => unreachable!("family names are checked by the caller"),
        })
    }
}

/// Line of `key = ...` inside `[section]` (or before any section when
/// `section` is empty), if it can be found textually.
fn find_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
            if section.is_empty() && current == key {
                return Some(i + 1);
            }
            continue;
        }
        let matches_key = line
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        if current == section && matches_key {
            return Some(i + 1);
        }
    }
    None
}

/// A compiled univariate profile, shared.
pub(crate) fn shared_profile(src: &str) -> Result<Arc<dyn Profile1>> {
    Ok(Arc::new(compile_profile(src)?))
}

/// Schwarzschild coefficients for a mass parameter.
pub(crate) fn schwarzschild_mass(m: f64) -> SchwarzschildParams {
    SchwarzschildParams::verified(m)
}
