//! JSON file formats for POVMs and joint POVMs.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "outcomes": 2,
//!   "effects": [ [[[1,0],[0,0]], [[0,0],[0,0]]], [[[0,0],[0,0]], [[0,0],[1,0]]] ],
//!   "labels": ["+1", "-1"],
//!   "family": {"family": "qubit_dichotomic", "alpha": 0.0, "a": [0,0,1]}
//! }
//! ```
//!
//! Each matrix entry is a `[re, im]` pair. Floats are written in the
//! shortest decimal form that parses back to the same bits, so a
//! write/read cycle is lossless.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::povm::{Family, JointPovm, Povm};
use crate::tolerance::HERMITIAN_TOL;

type MatrixRepr = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmFile {
    dim: usize,
    outcomes: usize,
    effects: Vec<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    dim: usize,
    shape: [usize; 2],
    /// Row-major over `(x, y)`.
    effects: Vec<MatrixRepr>,
}

fn matrix_to_repr(h: &HermitianOperator) -> MatrixRepr {
    h.rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn repr_to_matrix(dim: usize, m: &MatrixRepr, which: usize, tol: f64) -> Result<HermitianOperator> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!("effect {which} is not a {dim}x{dim} matrix")));
    }
    let entries = m.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
    HermitianOperator::with_tolerance(dim, entries, tol)
}

pub fn povm_to_json(p: &Povm) -> String {
    let file = PovmFile {
        dim: p.dim(),
        outcomes: p.outcomes(),
        effects: p.effects().iter().map(matrix_to_repr).collect(),
        labels: Some(p.labels().to_vec()),
        family: p.family().cloned(),
    };
    serde_json::to_string_pretty(&file).expect("POVM serialization cannot fail")
}

/// Parses a POVM document. Malformed text and inconsistent shapes are
/// [`Error::Parse`]; non-Hermitian effects surface as
/// [`Error::NonHermitianInput`]. Positivity and completeness are not
/// checked here.
pub fn povm_from_json(text: &str) -> Result<Povm> {
    povm_from_json_with(text, HERMITIAN_TOL)
}

/// [`povm_from_json`] with an explicit Hermiticity tolerance.
pub fn povm_from_json_with(text: &str, hermitian_tol: f64) -> Result<Povm> {
    let file: PovmFile = serde_json::from_str(text)?;
    if file.dim == 0 {
        return Err(Error::Parse("dim must be positive".into()));
    }
    if file.effects.len() != file.outcomes {
        return Err(Error::Parse(format!(
            "outcomes = {} but {} effects given",
            file.outcomes,
            file.effects.len()
        )));
    }
    if file.outcomes == 0 {
        return Err(Error::Parse("at least one effect required".into()));
    }
    let effects = file
        .effects
        .iter()
        .enumerate()
        .map(|(k, m)| repr_to_matrix(file.dim, m, k, hermitian_tol))
        .collect::<Result<Vec<_>>>()?;
    let povm = match file.labels {
        Some(labels) => {
            if labels.len() != file.outcomes {
                return Err(Error::Parse("label count does not match outcomes".into()));
            }
            Povm::with_labels(effects, labels)?
        }
        None => Povm::new(effects)?,
    };
    Ok(match file.family {
        Some(f) => povm.with_family(f),
        None => povm,
    })
}

pub fn read_povm(path: &Path) -> Result<Povm> {
    povm_from_json(&fs::read_to_string(path)?)
}

pub fn read_povm_with(path: &Path, hermitian_tol: f64) -> Result<Povm> {
    povm_from_json_with(&fs::read_to_string(path)?, hermitian_tol)
}

pub fn write_povm(path: &Path, p: &Povm) -> Result<()> {
    fs::write(path, povm_to_json(p) + "\n")?;
    Ok(())
}

pub fn joint_to_json(g: &JointPovm) -> String {
    let (n, m) = g.shape();
    let file = JointFile {
        dim: g.dim(),
        shape: [n, m],
        effects: g.effects().iter().map(matrix_to_repr).collect(),
    };
    serde_json::to_string_pretty(&file).expect("joint serialization cannot fail")
}

pub fn joint_from_json(text: &str) -> Result<JointPovm> {
    let file: JointFile = serde_json::from_str(text)?;
    let [n, m] = file.shape;
    if file.dim == 0 || file.effects.len() != n * m {
        return Err(Error::Parse("joint POVM shape does not match its effects".into()));
    }
    let effects = file
        .effects
        .iter()
        .enumerate()
        .map(|(k, e)| repr_to_matrix(file.dim, e, k, HERMITIAN_TOL))
        .collect::<Result<Vec<_>>>()?;
    JointPovm::new(n, m, effects)
}

pub fn write_joint(path: &Path, g: &JointPovm) -> Result<()> {
    fs::write(path, joint_to_json(g) + "\n")?;
    Ok(())
}
