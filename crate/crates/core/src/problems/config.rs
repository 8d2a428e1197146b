//! TOML problem configuration.
//!
//! ```toml
//! name = "custom"
//! lambda_lower = 1.0              # optional
//! eps_consistent_source = false   # optional
//!
//! [domain]
//! kind = "rectangle"              # "interval" | "rectangle" | "disk"
//! x = [-2.0, 2.0]                 # rectangle
//! y = [-2.0, 2.0]                 # rectangle
//! # bounds = [0.0, 1.0]           # interval
//! # radius = 2.0                  # disk
//!
//! [coefficients]
//! a11 = "2 + sin(10*x*y)/2"
//! a12 = "0"                       # 2-D only, default 0
//! a22 = "1"                       # 2-D only, default 1
//! b1 = "0"                        # optional
//! b2 = "0"                        # optional
//! c = "0"                         # optional
//! f = "1"                         # optional when [boundary] exact is set
//!
//! [boundary]
//! exact = "test1"                 # built-in exact solution; omit for u = 0
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::builtin::{exact_solution, ManufacturedSource};
use super::{constant, parse_scalar_field, BoundaryData, Domain, Field, MatrixField, ProblemSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub dimension: Option<usize>,
    pub lambda_lower: Option<f64>,
    #[serde(default)]
    pub eps_consistent_source: bool,
    pub domain: DomainConfig,
    pub coefficients: CoefficientConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
}

fn default_name() -> String {
    "custom".to_string()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { bounds: [f64; 2] },
    Rectangle { x: [f64; 2], y: [f64; 2] },
    Disk { radius: f64 },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub a11: String,
    pub a12: Option<String>,
    pub a22: Option<String>,
    pub b1: Option<String>,
    pub b2: Option<String>,
    pub c: Option<String>,
    pub f: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub exact: Option<String>,
}

pub fn load_problem_config(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path)?;
    let config: ProblemConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
    problem_from_config(&config)
}

fn field_from(key: &str, text: &str) -> Result<Field> {
    parse_scalar_field(text)
        .map(|e| Arc::new(e) as Field)
        .map_err(|e| Error::Config(format!("coefficient {key}: {e}")))
}

fn optional(key: &str, text: &Option<String>) -> Result<Option<Field>> {
    text.as_deref().map(|t| field_from(key, t)).transpose()
}

pub fn problem_from_config(config: &ProblemConfig) -> Result<ProblemSpec> {
    let domain = match config.domain {
        DomainConfig::Interval { bounds } => Domain::Interval { a: bounds[0], b: bounds[1] },
        DomainConfig::Rectangle { x, y } => Domain::Rectangle { x: (x[0], x[1]), y: (y[0], y[1]) },
        DomainConfig::Disk { radius } => Domain::Disk { radius },
    };
    if let Some(d) = config.dimension {
        if d != domain.dimension() {
            return Err(Error::Config(format!("dimension {d} does not match the {}-D domain", domain.dimension())));
        }
    }
    let co = &config.coefficients;
    let a = MatrixField {
        a11: field_from("a11", &co.a11)?,
        a12: optional("a12", &co.a12)?.unwrap_or_else(|| constant(0.0)),
        a22: optional("a22", &co.a22)?.unwrap_or_else(|| constant(1.0)),
    };
    let (b1, b2) = (optional("b1", &co.b1)?, optional("b2", &co.b2)?);
    let b = if b1.is_some() || b2.is_some() {
        Some([b1.unwrap_or_else(|| constant(0.0)), b2.unwrap_or_else(|| constant(0.0))])
    } else {
        None
    };
    let c = optional("c", &co.c)?;
    let exact = match &config.boundary.exact {
        Some(name) => Some(exact_solution(name).ok_or_else(|| Error::UnknownProblem(name.clone()))?),
        None => None,
    };
    let f = match (optional("f", &co.f)?, &exact) {
        (Some(f), _) => f,
        (None, Some(e)) => Arc::new(ManufacturedSource {
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
            exact: e.clone(),
            dimension: domain.dimension(),
        }),
        (None, None) => return Err(Error::Config("coefficient f is required without an exact solution".into())),
    };
    if config.eps_consistent_source && exact.as_ref().map_or(true, |e| e.bilaplacian.is_none()) {
        return Err(Error::Config("eps_consistent_source needs an exact solution with a bilaplacian".into()));
    }
    Ok(ProblemSpec {
        name: config.name.clone(),
        domain,
        a,
        b,
        c,
        f,
        boundary: if exact.is_some() { BoundaryData::Exact } else { BoundaryData::Homogeneous },
        exact,
        eps_consistent_source: config.eps_consistent_source,
        lambda_lower: config.lambda_lower,
    })
}
