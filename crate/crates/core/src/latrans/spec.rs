//! Wire format for transformation families:
//! `{"theory":..., "kind":"unitary"|"isometry"|"kraus"|"zoo", "name":?, "matrices":[...]}`.

use serde::{Deserialize, Serialize};

use super::family::{lift_channel, lift_isometry, TransFamily};
use super::zoo::zoo_family;
use crate::error::Error;
use crate::linalg::ComplexMatrix;
use crate::smt::TheoryTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilySpecKind {
    Unitary,
    Isometry,
    Kraus,
    Zoo,
}

/// Declarative description of a family, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub theory: TheoryTag,
    pub kind: FamilySpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<ComplexMatrix>,
    /// System dimension for zoo families (defaults to 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Phase parameter for zoo families that take one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl FamilySpec {
    pub fn unitary(matrix: ComplexMatrix) -> Self {
        Self {
            theory: TheoryTag::Pure,
            kind: FamilySpecKind::Unitary,
            name: None,
            matrices: vec![matrix],
            dim: None,
            theta: None,
        }
    }

    pub fn kraus(matrices: Vec<ComplexMatrix>) -> Self {
        Self {
            theory: TheoryTag::Mixed,
            kind: FamilySpecKind::Kraus,
            name: None,
            matrices,
            dim: None,
            theta: None,
        }
    }

    pub fn zoo(name: &str, dim: usize, theta: Option<f64>) -> Result<Self, Error> {
        // Instantiate once so unknown names fail at spec construction.
        let family = zoo_family(name, dim, theta)?;
        Ok(Self {
            theory: family.theory(),
            kind: FamilySpecKind::Zoo,
            name: Some(name.to_string()),
            matrices: Vec::new(),
            dim: Some(dim),
            theta,
        })
    }

    /// Build the executable family this spec describes.
    pub fn build(&self) -> Result<TransFamily, Error> {
        match self.kind {
            FamilySpecKind::Unitary | FamilySpecKind::Isometry => {
                if self.theory != TheoryTag::Pure {
                    return Err(Error::Parse(
                        "unitary/isometry family specs must declare theory \"pure\"".into(),
                    ));
                }
                let [matrix] = self.matrices.as_slice() else {
                    return Err(Error::Parse(
                        "unitary/isometry family specs need exactly one matrix".into(),
                    ));
                };
                let family = lift_isometry(matrix)?;
                if self.kind == FamilySpecKind::Unitary && !matrix.is_square() {
                    return Err(Error::Parse("unitary family spec has a non-square matrix".into()));
                }
                Ok(family)
            }
            FamilySpecKind::Kraus => {
                if self.theory != TheoryTag::Mixed {
                    return Err(Error::Parse("kraus family specs must declare theory \"mixed\"".into()));
                }
                lift_channel(&self.matrices)
            }
            FamilySpecKind::Zoo => {
                let name = self
                    .name
                    .as_deref()
                    .ok_or_else(|| Error::Parse("zoo family spec needs a name".into()))?;
                let family = zoo_family(name, self.dim.unwrap_or(2), self.theta)?;
                if family.theory() != self.theory {
                    return Err(Error::Parse(format!(
                        "zoo family `{name}` belongs to the {:?} theory",
                        family.theory()
                    )));
                }
                Ok(family)
            }
        }
    }

    pub fn from_json(json: &str) -> Result<Self, Error> {
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
    }
}
