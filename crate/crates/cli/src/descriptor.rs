//! Loading and saving JSON descriptors with located errors.

use std::path::Path;

use ptlab_core::logreg::{BaseElem, BaseRing, LogRegPresentation};
use ptlab_core::monoid::{AffineMonoid, MonoidDescriptor, MonoidError};
use ptlab_core::tower::{Tower, TowerDesc, TowerError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    ParseError { line: usize, column: usize, field: String, message: String },
    #[error("invariant violation at `{field}`: {message}")]
    InvariantViolation { field: String, message: String },
}

fn violation(field: impl Into<String>, message: impl ToString) -> DescriptorError {
    DescriptorError::InvariantViolation { field: field.into(), message: message.to_string() }
}

/// A JSON schema whose invariants are checked at load time.
pub trait Descriptor: Serialize + DeserializeOwned {
    type Built;
    fn build(&self) -> Result<Self::Built, DescriptorError>;
}

fn monoid_violation(prefix: &str, e: MonoidError) -> DescriptorError {
    match e {
        MonoidError::BadGeneratorLength { index, .. } => violation(format!("{prefix}generators[{index}]"), e),
        MonoidError::BadScaleBase(_) => violation(format!("{prefix}scale_base"), e),
        other => violation(prefix.trim_end_matches('.'), other),
    }
}

impl Descriptor for MonoidDescriptor {
    type Built = AffineMonoid;

    fn build(&self) -> Result<AffineMonoid, DescriptorError> {
        AffineMonoid::try_from(self.clone()).map_err(|e| monoid_violation("", e))
    }
}

impl Descriptor for TowerDesc {
    type Built = Tower;

    fn build(&self) -> Result<Tower, DescriptorError> {
        Tower::build(self.clone()).map_err(|e| match e {
            TowerError::InvalidTower { field, message } => violation(field, message),
            other => violation("", other),
        })
    }
}

impl Descriptor for LogRegPresentation {
    type Built = AffineMonoid;

    fn build(&self) -> Result<AffineMonoid, DescriptorError> {
        AffineMonoid::try_from(self.monoid.clone()).map_err(|e| monoid_violation("monoid.", e))?;
        let n = self.monoid.ambient_rank + self.free_rank;
        for (i, t) in self.f.iter().enumerate() {
            if t.exponent.len() != n {
                return Err(violation(format!("f[{i}].exponent"), format!("expected length {n}")));
            }
        }
        self.validate().map_err(|e| violation("", e))
    }
}

/// Base ring, elements and Kummer exponents for the regularity commands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityInput {
    pub base: BaseRing,
    #[serde(default)]
    pub elements: Vec<BaseElem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exponents: Vec<u32>,
}

impl Descriptor for RegularityInput {
    type Built = ();

    fn build(&self) -> Result<(), DescriptorError> {
        ptlab_core::logreg::omega_dim(&self.base).map_err(|e| violation("base", e))?;
        for (i, f) in self.elements.iter().enumerate() {
            for (k, (e, _)) in f.terms.iter().enumerate() {
                if e.len() > self.base.d {
                    return Err(violation(format!("elements[{i}].terms[{k}]"), "more exponents than variables"));
                }
            }
        }
        if !self.exponents.is_empty() && self.exponents.len() != self.elements.len() {
            return Err(violation("exponents", "need one exponent per element"));
        }
        if let Some(i) = self.exponents.iter().position(|&e| e < 2) {
            return Err(violation(format!("exponents[{i}]"), "must be at least 2"));
        }
        Ok(())
    }
}

/// Parses and validates a descriptor from JSON text.
pub fn parse_descriptor<D: Descriptor>(text: &str) -> Result<(D, D::Built), DescriptorError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let d: D = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        DescriptorError::ParseError { line: inner.line(), column: inner.column(), field, message: inner.to_string() }
    })?;
    de.end().map_err(|e| DescriptorError::ParseError {
        line: e.line(),
        column: e.column(),
        field: ".".into(),
        message: e.to_string(),
    })?;
    let built = d.build()?;
    Ok((d, built))
}

pub fn load_descriptor<D: Descriptor>(path: &Path) -> Result<(D, D::Built), DescriptorError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DescriptorError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_descriptor(&text)
}

/// Canonical JSON: sorted keys, two-space indentation, trailing newline.
pub fn to_canonical_json<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("report serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

pub fn save_descriptor<D: Descriptor>(d: &D) -> String {
    to_canonical_json(d)
}
