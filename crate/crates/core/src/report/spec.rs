//! Input documents for states and free sets, and the short names the CLI accepts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_sets::{make_free_set, FreeSet, FreeSetSpec};
use crate::linalg::hermitian::QuantumState;
use crate::synthesis::named_state;

use super::json::{parse_complex, parse_document, parse_matrix, to_canonical_string};

/// `{"kind": "named"|"pure"|"dense", ...}` with complex numbers as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Named { name: String },
    Pure { amplitudes: Vec<[f64; 2]> },
    Dense { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeSetKindName {
    Incoherent,
    StabilizerQubit,
    StabilizerTwoQubit,
    SeparablePpt,
    Polytope,
}

/// `{"kind": ..., "dims": [...]?, "vertices": [StateSpec]?}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSetDescriptor {
    pub kind: FreeSetKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<StateSpec>>,
}

impl StateSpec {
    pub fn resolve(&self) -> Result<QuantumState> {
        match self {
            StateSpec::Named { name } => named_state(name),
            StateSpec::Pure { amplitudes } => QuantumState::from_ket(&amplitudes.iter().map(parse_complex).collect::<Vec<_>>()),
            StateSpec::Dense { matrix } => QuantumState::from_matrix(parse_matrix(matrix)?),
        }
    }

    pub fn to_canonical(&self) -> String {
        to_canonical_string(&serde_json::to_value(self).expect("spec serializes"))
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let v = parse_document(text, origin)?;
        serde_json::from_value(v).map_err(|e| Error::invalid(format!("{origin}: {e}")))
    }
}

impl FreeSetDescriptor {
    /// `state_dim` fills in a missing incoherent dimension.
    pub fn resolve(&self, state_dim: Option<usize>) -> Result<FreeSet> {
        let dims = self.dims.as_deref();
        let spec = match self.kind {
            FreeSetKindName::Incoherent => {
                let dim = match dims {
                    Some([d]) => *d,
                    None => state_dim.ok_or_else(|| Error::invalid("incoherent free set needs dims"))?,
                    Some(other) => return Err(Error::invalid(format!("incoherent dims must have one entry, got {other:?}"))),
                };
                FreeSetSpec::Incoherent { dim }
            }
            FreeSetKindName::StabilizerQubit => FreeSetSpec::StabilizerQubit,
            FreeSetKindName::StabilizerTwoQubit => FreeSetSpec::StabilizerTwoQubit,
            FreeSetKindName::SeparablePpt => match dims {
                Some([a, b]) => FreeSetSpec::SeparablePpt { dim_a: *a, dim_b: *b },
                None => FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 },
                Some(other) => return Err(Error::invalid(format!("separable_ppt dims must have two entries, got {other:?}"))),
            },
            FreeSetKindName::Polytope => {
                let vs = self.vertices.as_ref().ok_or_else(|| Error::invalid("polytope free set needs vertices"))?;
                let vertices = vs
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.resolve().map_err(|e| Error::invalid(format!("vertices[{i}]: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                FreeSetSpec::Polytope { vertices }
            }
        };
        make_free_set(&spec)
    }

    pub fn to_canonical(&self) -> String {
        to_canonical_string(&serde_json::to_value(self).expect("spec serializes"))
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let v = parse_document(text, origin)?;
        serde_json::from_value(v).map_err(|e| Error::invalid(format!("{origin}: {e}")))
    }

    /// `incoherent[:d]`, `stabilizer_qubit`, `stabilizer_two_qubit`, `separable_ppt[:AxB]`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (base, arg) = match name.split_once(':') {
            Some((b, a)) => (b, Some(a)),
            None => (name, None),
        };
        let bad = || Error::invalid(format!("bad free set name '{name}'"));
        let (kind, dims) = match (base, arg) {
            ("incoherent", None) => (FreeSetKindName::Incoherent, None),
            ("incoherent", Some(d)) => (FreeSetKindName::Incoherent, Some(vec![d.parse().map_err(|_| bad())?])),
            ("stabilizer_qubit", None) => (FreeSetKindName::StabilizerQubit, None),
            ("stabilizer_two_qubit", None) => (FreeSetKindName::StabilizerTwoQubit, None),
            ("separable_ppt", None) => (FreeSetKindName::SeparablePpt, None),
            ("separable_ppt", Some(ab)) => {
                let (a, b) = ab.split_once('x').ok_or_else(bad)?;
                (FreeSetKindName::SeparablePpt, Some(vec![a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?]))
            }
            ("polytope", _) => return Err(Error::invalid("polytope free sets must be given as a file")),
            _ => return Err(bad()),
        };
        Ok(FreeSetDescriptor { kind, dims, vertices: None })
    }
}

/// An existing file is parsed as a document; anything else as a short name.
pub fn load_state(arg: &str) -> Result<(StateSpec, QuantumState)> {
    let spec = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| Error::invalid(format!("{arg}: {e}")))?;
        StateSpec::parse(&text, arg)?
    } else {
        StateSpec::Named { name: arg.to_string() }
    };
    let state = spec.resolve()?;
    Ok((spec, state))
}

pub fn load_free_set(arg: &str, state_dim: Option<usize>) -> Result<(FreeSetDescriptor, FreeSet)> {
    let desc = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| Error::invalid(format!("{arg}: {e}")))?;
        FreeSetDescriptor::parse(&text, arg)?
    } else {
        FreeSetDescriptor::from_name(arg)?
    };
    let set = desc.resolve(state_dim)?;
    Ok((desc, set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documents() {
        let s = StateSpec::parse(r#"{"kind": "pure", "amplitudes": [[1, 0], [0, 0]]}"#, "mem").unwrap();
        assert_eq!(s.resolve().unwrap().dim(), 2);
        let again = StateSpec::parse(&s.to_canonical(), "mem").unwrap();
        assert_eq!(s, again);
        let err = StateSpec::parse("{\"kind\": \"pure\",\n \"amps\": []}", "f.json").unwrap_err();
        assert!(err.to_string().contains("f.json"), "{err}");
        let f = FreeSetDescriptor::parse(r#"{"kind": "separable_ppt", "dims": [2, 2]}"#, "mem").unwrap();
        assert_eq!(f.resolve(None).unwrap().dim(), 4);
        assert!(FreeSetDescriptor::from_name("incoherent:3").unwrap().resolve(None).unwrap().dim() == 3);
        assert!(FreeSetDescriptor::from_name("separable_ppt:2x3").is_ok());
        assert!(FreeSetDescriptor::from_name("polytope").is_err());
        assert!(FreeSetDescriptor::from_name("magic").is_err());
    }
}
