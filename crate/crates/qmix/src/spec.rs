//! Generator specs: the JSON input schema and its translation into a `Generator`.
//!
//! Matrices are nested arrays of `[re, im]` pairs, row-major.

use std::path::Path;

use qmix_core::generators::DaviesSpec;
use qmix_core::operator::{CMatrix, Hermitian, C64};
use qmix_core::{Error, Generator, WeightedSpace};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Generic {
        #[serde(default)]
        hamiltonian: Option<MatrixJson>,
        lindblad_ops: Vec<MatrixJson>,
    },
    Depolarizing {
        dim: usize,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Projection {
        sigma: MatrixJson,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Davies {
        hamiltonian: MatrixJson,
        couplings: Vec<MatrixJson>,
        beta: f64,
        #[serde(default)]
        bohr_tol: Option<f64>,
        /// Adds i[H,·]; the result is no longer reversible.
        #[serde(default)]
        coherent: bool,
    },
    Channel {
        kraus: Vec<MatrixJson>,
        #[serde(default)]
        lazy: bool,
    },
    RandomUnitary {
        dim: usize,
        #[serde(rename = "D")]
        unitaries: usize,
        seed: u64,
        /// Replace the channel by ½(T + T*).
        #[serde(default)]
        reversible: bool,
    },
}

pub fn matrix_from_json(m: &MatrixJson, field: &str) -> CliResult<CMatrix> {
    let n = m.len();
    if n == 0 {
        return Err(CliError::malformed("matrix is empty", field));
    }
    if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(CliError::malformed(
            format!(
                "row {i} has {} entries, expected {n} (matrices must be square)",
                row.len()
            ),
            field,
        ));
    }
    if m.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::malformed("non-finite entry", field));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        C64::new(m[i][j][0], m[i][j][1])
    }))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn hermitian_from_json(m: &MatrixJson, field: &str) -> CliResult<Hermitian> {
    Hermitian::new(matrix_from_json(m, field)?)
        .map_err(|e| CliError::malformed(e.to_string(), field))
}

fn matrices(ms: &[MatrixJson], field: &str) -> CliResult<Vec<CMatrix>> {
    ms.iter()
        .enumerate()
        .map(|(i, m)| matrix_from_json(m, &format!("{field}[{i}]")))
        .collect()
}

fn same_dim(ms: &[CMatrix], d: usize, field: &str) -> CliResult<()> {
    match ms.iter().position(|m| m.nrows() != d) {
        Some(i) => Err(CliError::malformed(
            format!("dimension {} does not match {d}", ms[i].nrows()),
            format!("{field}[{i}]"),
        )),
        None => Ok(()),
    }
}

/// 1-based line and column of the first `"key":` occurrence.
fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(off) = text[from..].find(&needle) {
        let at = from + off;
        from = at + needle.len();
        if text[from..].trim_start().starts_with(':') {
            let line = text[..at].matches('\n').count() + 1;
            let column = at - text[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
            return Some((line, column));
        }
    }
    None
}

/// Semantic construction errors are attributed to a spec field; primitivity is
/// passed through so it maps to its own exit code.
fn in_field(field: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::NotPrimitive(note) => CliError::NotPrimitive(note),
        other => CliError::malformed(other.to_string(), field),
    }
}

impl GeneratorSpec {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        // syntax errors carry serde's own position; shape errors from the tagged
        // enum do not, so the offending key is located in the source instead
        let value: serde_json::Value = serde_json::from_str(text)?;
        serde_json::from_value(value).map_err(|e| {
            let message = e.to_string();
            let field = message.split('`').nth(1).map(str::to_string);
            let (line, column) = field
                .as_deref()
                .and_then(|f| locate_key(text, f))
                .map_or((None, None), |(l, c)| (Some(l), Some(c)));
            CliError::Malformed {
                message,
                field,
                line,
                column,
            }
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::Generic { .. } => "generic",
            GeneratorSpec::Depolarizing { .. } => "depolarizing",
            GeneratorSpec::Projection { .. } => "projection",
            GeneratorSpec::Davies { .. } => "davies",
            GeneratorSpec::Channel { .. } => "channel",
            GeneratorSpec::RandomUnitary { .. } => "random_unitary",
        }
    }

    /// Builds the generator; a successfully built but non-primitive generator
    /// is reported as `NotPrimitive`.
    pub fn build(&self) -> CliResult<Generator> {
        let g = match self {
            GeneratorSpec::Generic {
                hamiltonian,
                lindblad_ops,
            } => {
                let ops = matrices(lindblad_ops, "lindblad_ops")?;
                let h = match hamiltonian {
                    Some(h) => hermitian_from_json(h, "hamiltonian")?,
                    None => {
                        let d = ops.first().map(|m| m.nrows()).ok_or_else(|| {
                            CliError::malformed(
                                "need a hamiltonian or at least one jump operator",
                                "lindblad_ops",
                            )
                        })?;
                        Hermitian::zeros(d)
                    }
                };
                same_dim(&ops, h.dim(), "lindblad_ops")?;
                Generator::lindblad(h, ops).map_err(in_field("lindblad_ops"))?
            }
            GeneratorSpec::Depolarizing { dim, gamma } => {
                Generator::depolarizing(*dim, *gamma).map_err(in_field("dim"))?
            }
            GeneratorSpec::Projection { sigma, gamma } => {
                let s = hermitian_from_json(sigma, "sigma")?;
                let space = WeightedSpace::new(s).map_err(in_field("sigma"))?;
                Generator::projection(space, *gamma).map_err(in_field("gamma"))?
            }
            GeneratorSpec::Davies {
                hamiltonian,
                couplings,
                beta,
                bohr_tol,
                coherent,
            } => {
                let h = hermitian_from_json(hamiltonian, "hamiltonian")?;
                let cs = couplings
                    .iter()
                    .enumerate()
                    .map(|(i, m)| hermitian_from_json(m, &format!("couplings[{i}]")))
                    .collect::<CliResult<Vec<_>>>()?;
                if let Some(i) = cs.iter().position(|c| c.dim() != h.dim()) {
                    return Err(CliError::malformed(
                        "dimension does not match the hamiltonian",
                        format!("couplings[{i}]"),
                    ));
                }
                let mut spec = DaviesSpec::new(h, cs, *beta);
                spec.bohr_tol = *bohr_tol;
                spec.coherent = *coherent;
                Generator::davies(&spec).map_err(in_field("couplings"))?
            }
            GeneratorSpec::Channel { kraus, lazy } => {
                let ks = matrices(kraus, "kraus")?;
                if let Some(first) = ks.first() {
                    same_dim(&ks, first.nrows(), "kraus")?;
                }
                Generator::lift_channel(&ks, *lazy).map_err(in_field("kraus"))?
            }
            GeneratorSpec::RandomUnitary {
                dim,
                unitaries,
                seed,
                reversible,
            } => Generator::random_unitary(*dim, *unitaries, *seed, *reversible)
                .map_err(in_field("D"))?,
        };
        if !g.is_primitive() {
            return Err(CliError::NotPrimitive(
                g.primitivity_note()
                    .unwrap_or("no unique full-rank stationary state")
                    .to_string(),
            ));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        let texts = [
            r#"{"family":"depolarizing","dim":3,"gamma":0.5}"#,
            r#"{"family":"projection","sigma":[[[0.7,0],[0,0]],[[0,0],[0.3,0]]]}"#,
            r#"{"family":"davies","hamiltonian":[[[0.5,0],[0,0]],[[0,0],[-0.5,0]]],"couplings":[[[[0,0],[1,0]],[[1,0],[0,0]]]],"beta":1.0}"#,
            r#"{"family":"channel","kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]],"lazy":true}"#,
            r#"{"family":"random_unitary","dim":3,"D":2,"seed":5,"reversible":true}"#,
            r#"{"family":"generic","lindblad_ops":[[[[0,0],[1,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[1,0],[0,0]]]]}"#,
        ];
        for t in texts {
            let spec = GeneratorSpec::from_json_str(t).unwrap();
            let family = spec.family();
            match spec.build() {
                Ok(g) => assert!(g.is_primitive(), "{family}"),
                // the identity channel has every state stationary
                Err(CliError::NotPrimitive(_)) => assert_eq!(family, "channel"),
                Err(e) => panic!("{family}: {e:?}"),
            }
        }
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64 - 0.5));
        let back = matrix_from_json(&matrix_to_json(&m), "m").unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn unknown_field_is_malformed_with_position() {
        let err =
            GeneratorSpec::from_json_str("{\"family\":\"depolarizing\",\n\"dim\":2,\"gama\":1}")
                .unwrap_err();
        match err {
            CliError::Malformed {
                line,
                column,
                field,
                message,
            } => {
                assert_eq!((line, column), (Some(2), Some(9)));
                assert_eq!(field.as_deref(), Some("gama"));
                assert!(message.contains("gama"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_matrix_names_the_field() {
        let spec = GeneratorSpec::from_json_str(
            r#"{"family":"projection","sigma":[[[1,0]],[[0,0],[1,0]]]}"#,
        )
        .unwrap();
        match spec.build().unwrap_err() {
            CliError::Malformed { field, .. } => assert_eq!(field.as_deref(), Some("sigma")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pure_hamiltonian_is_not_primitive() {
        let spec = GeneratorSpec::from_json_str(
            r#"{"family":"generic","hamiltonian":[[[1,0],[0,0]],[[0,0],[-1,0]]],"lindblad_ops":[]}"#,
        )
        .unwrap();
        assert!(matches!(spec.build(), Err(CliError::NotPrimitive(_))));
    }
}
