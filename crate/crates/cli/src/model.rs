//! Model files and the number encoding shared with reports.

use std::collections::HashMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use sqdb_core::entropy::ClassicalChain;
use sqdb_core::involution::{Involution, JumpFamily, TcConstants};
use sqdb_core::lindblad::{Hamiltonian, LindbladGenerator};
use sqdb_core::linalg::{CMatrix, C64};

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-9;

/// A float that serializes as a JSON number when finite and as `"inf"`,
/// `"-inf"` or `"nan"` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Num, E> {
                Ok(Num(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Num, E> {
                Ok(Num(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Num, E> {
                Ok(Num(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Num, E> {
                match s {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(s), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Complex entries travel as `[re, im]`; plain numbers are accepted on input
/// as real entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([Num; 2]),
    Real(Num),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Complex([re, im]) => C64::new(re.0, im.0),
            Entry::Real(re) => C64::new(re.0, 0.0),
        }
    }
}

impl From<C64> for Entry {
    fn from(z: C64) -> Self {
        Entry::Complex([Num(z.re), Num(z.im)])
    }
}

pub type MatrixRows = Vec<Vec<Entry>>;

pub fn matrix_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn to_matrix(rows: &MatrixRows, dim: usize, what: &str) -> Result<CMatrix, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Validation(format!("{what} must be {dim}×{dim}")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| rows[i][j].value()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpSpec {
    pub id: String,
    pub matrix: MatrixRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Options {
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub hamiltonian: MatrixRows,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum InvolutionChoice {
    /// Pair jumps as declared by their `partner` fields.
    #[default]
    Declared,
    /// Treat every jump as its own partner.
    Singlets,
}

/// A validated model: the generator plus the jump ids in file order.
#[derive(Debug, Clone)]
pub struct Model {
    pub generator: LindbladGenerator,
    pub ids: Vec<String>,
    pub tol: f64,
    pub warnings: Vec<String>,
}

pub fn parse_model(text: &str) -> Result<ModelFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

fn resolve_tol(file_tol: Option<f64>, flag: Option<f64>) -> Result<f64, CliError> {
    let tol = flag.or(file_tol).unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Validation(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn declared_involution(jumps: &[JumpSpec], index: &HashMap<&str, usize>) -> Result<Involution, CliError> {
    let mut map: Vec<usize> = (0..jumps.len()).collect();
    for (k, j) in jumps.iter().enumerate() {
        if let Some(p) = &j.partner {
            let q = *index
                .get(p.as_str())
                .ok_or_else(|| CliError::Validation(format!("jump {:?}: unknown partner {p:?}", j.id)))?;
            map[k] = q;
        }
    }
    for (k, &q) in map.iter().enumerate() {
        if map[q] != k {
            return Err(CliError::Validation(format!(
                "partner relation is not an involution: {:?} → {:?} but {:?} → {:?}",
                jumps[k].id, jumps[q].id, jumps[q].id, jumps[map[q]].id
            )));
        }
    }
    Involution::new(map).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn build_model(file: &ModelFile, tol_flag: Option<f64>, choice: InvolutionChoice) -> Result<Model, CliError> {
    let tol = resolve_tol(file.options.tol, tol_flag)?;
    let d = file.dim;
    if d == 0 {
        return Err(CliError::Validation("dim must be positive".into()));
    }
    let mut warnings = Vec::new();
    let h = Hamiltonian::new(to_matrix(&file.hamiltonian, d, "hamiltonian")?, tol)
        .map_err(|e| CliError::Validation(format!("hamiltonian: {e}")))?;

    let mut index = HashMap::new();
    for (k, j) in file.jumps.iter().enumerate() {
        if index.insert(j.id.as_str(), k).is_some() {
            return Err(CliError::Validation(format!("duplicate jump id {:?}", j.id)));
        }
    }
    let ops = file
        .jumps
        .iter()
        .map(|j| to_matrix(&j.matrix, d, &format!("jump {:?}", j.id)))
        .collect::<Result<Vec<_>, _>>()?;

    let declared = file.jumps.iter().any(|j| j.partner.is_some());
    let involution = match choice {
        InvolutionChoice::Singlets => Involution::singlets(ops.len()),
        InvolutionChoice::Declared => {
            if !declared && !file.jumps.is_empty() {
                warnings.push("no partners declared; treating every jump as a singlet".into());
            }
            declared_involution(&file.jumps, &index)?
        }
    };

    let mut family = JumpFamily::new(d, ops, involution.clone()).map_err(|e| CliError::Validation(e.to_string()))?;
    let given = file.jumps.iter().filter(|j| j.c.is_some()).count();
    if given > 0 {
        if given < file.jumps.len() {
            return Err(CliError::Validation("c must be given for every jump or for none".into()));
        }
        if choice == InvolutionChoice::Singlets && declared {
            warnings.push("declared c values ignored under --involution singlets".into());
        } else {
            let values = file.jumps.iter().map(|j| j.c.unwrap_or(1.0)).collect();
            let tc = TcConstants::new(values, &involution, tol).map_err(|e| CliError::Validation(format!("c values: {e}")))?;
            family = family.with_tc(tc).map_err(|e| CliError::Validation(e.to_string()))?;
        }
    }
    let generator = LindbladGenerator::new(h, family).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(Model { generator, ids: file.jumps.iter().map(|j| j.id.clone()).collect(), tol, warnings })
}

/// Classical rates file: a square array with `W(i,j)` (rate `j → i`) in row
/// `i`, column `j`; the diagonal is ignored.
pub fn parse_rates(text: &str) -> Result<ClassicalChain, CliError> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Validation("rates must form a non-empty square array".into()));
    }
    ClassicalChain::from_rows(&rows).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn classical_tol(flag: Option<f64>) -> Result<f64, CliError> {
    resolve_tol(None, flag)
}
