//! Command implementations behind the `sqdb` binary. Each command parses a
//! file, delegates to one library operation and returns a [`Report`].

pub mod model;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use sqdb_core::detailed_balance::{construct_zero_epr_representation, dissipative_symmetry_check, sqdb_check};
use sqdb_core::entropy::{
    classical_detailed_balance, classical_epr, classical_jump_pairs, classical_stationary, quantum_epr, EprReport,
};
use sqdb_core::involution::{detect_tc, JumpFamily};
use sqdb_core::lindblad::{schrodinger_superoperator, stationary_state, LindbladGenerator};
use sqdb_core::linalg::vec;
use sqdb_core::representations::{is_special, make_special, make_special_tc, SpecialDiagnostics};

use model::{build_model, classical_tol, matrix_rows, parse_model, parse_rates, InvolutionChoice, Model, Num};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("analysis failed: {0}")]
    Analysis(#[from] sqdb_core::Error),
}

impl CliError {
    /// 2 for unusable input, 1 when the analysis itself could not complete.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    /// SHA-256 of the input file bytes.
    pub input_digest: String,
    pub tol: Num,
    pub verdicts: BTreeMap<String, bool>,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are always serializable");
        s.push('\n');
        s
    }

    /// One line for standard error.
    pub fn summary(&self) -> String {
        let verdicts: Vec<String> = self.verdicts.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut line = format!("{}: {}", self.command, verdicts.join(", "));
        if !self.warnings.is_empty() {
            line.push_str(&format!(" ({} warning(s))", self.warnings.len()));
        }
        line
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn num(x: f64) -> Num {
    Num(x)
}

fn jumps_json(jumps: &JumpFamily, ids: Option<&[String]>) -> Value {
    let inv = jumps.involution();
    let tc = jumps.tc();
    let label = |k: usize| ids.map_or_else(|| format!("J{k}"), |ids| ids[k].clone());
    Value::Array(
        jumps
            .operators()
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let mut entry = json!({ "id": label(k), "partner": label(inv.partner(k)), "matrix": matrix_rows(l) });
                if let Some(tc) = tc {
                    entry["c"] = json!(num(tc.values()[k]));
                }
                entry
            })
            .collect(),
    )
}

fn generator_json(g: &LindbladGenerator, ids: Option<&[String]>) -> Value {
    json!({ "hamiltonian": matrix_rows(g.hamiltonian().matrix()), "jumps": jumps_json(g.jumps(), ids) })
}

fn epr_json(e: &EprReport) -> Value {
    let terms: Vec<Value> = e
        .orbit_terms
        .iter()
        .map(|t| {
            json!({
                "representative": t.representative,
                "partner": t.partner,
                "weight": num(t.weight),
                "flux": num(t.flux),
                "force": num(t.force),
                "contribution": num(if t.infinite { f64::INFINITY } else { t.contribution }),
            })
        })
        .collect();
    let mut out = json!({
        "sigma": num(if e.infinite { f64::INFINITY } else { e.sigma }),
        "zero_threshold": num(e.zero_threshold_used),
        "orbits": terms,
    });
    if let Some(b) = &e.basis {
        out["basis"] = json!(matrix_rows(b));
    }
    out
}

fn diagnostics_json(d: &SpecialDiagnostics) -> Value {
    json!({
        "traces": d.traces.iter().copied().map(num).collect::<Vec<_>>(),
        "min_singular_value": num(d.min_singular_value),
        "traceless": d.traceless,
        "independent": d.independent,
    })
}

struct Loaded {
    model: Model,
    digest: String,
}

fn load(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Loaded, CliError> {
    let file = parse_model(text)?;
    Ok(Loaded { model: build_model(&file, tol, choice)?, digest: digest(text.as_bytes()) })
}

fn report(command: &str, l: &Loaded, verdicts: &[(&str, bool)], results: Value, mut warnings: Vec<String>) -> Report {
    let mut all = l.model.warnings.clone();
    all.append(&mut warnings);
    Report {
        command: command.into(),
        input_digest: l.digest.clone(),
        tol: num(l.model.tol),
        verdicts: verdicts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        results,
        warnings: all,
    }
}

pub fn cmd_stationary(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Report, CliError> {
    let l = load(text, tol, choice)?;
    let g = &l.model.generator;
    let rho = stationary_state(g, l.model.tol)?;
    let residual = schrodinger_superoperator(g).matrix * vec(rho.matrix());
    let results = json!({
        "state": matrix_rows(rho.matrix()),
        "eigenvalues": rho.spectrum().eigenvalues.iter().copied().map(num).collect::<Vec<_>>(),
        "residual": num(residual.norm()),
    });
    Ok(report("stationary", &l, &[("faithful", rho.is_faithful())], results, vec![]))
}

pub fn cmd_epr(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Report, CliError> {
    let l = load(text, tol, choice)?;
    let g = &l.model.generator;
    let rho = stationary_state(g, l.model.tol)?;
    let e = quantum_epr(&rho, g.jumps())?;
    let mut warnings = vec![];
    let spectrum = &rho.spectrum().eigenvalues;
    if spectrum.windows(2).any(|w| (w[1] - w[0]).abs() <= l.model.tol) {
        warnings.push("stationary state has degenerate eigenvalues; EPR evaluated in the reported basis".into());
    }
    let results = json!({ "state": matrix_rows(rho.matrix()), "epr": epr_json(&e) });
    Ok(report("epr", &l, &[("zero_epr", e.is_zero(l.model.tol))], results, warnings))
}

pub fn cmd_sqdb(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Report, CliError> {
    let l = load(text, tol, choice)?;
    let g = &l.model.generator;
    let outcome = sqdb_check(g, l.model.tol)?;
    let sym = dissipative_symmetry_check(g, &outcome.state, l.model.tol)?;
    let c = &outcome.certificate;
    let ids = (!outcome.specialized).then_some(l.model.ids.as_slice());
    let results = json!({
        "u": matrix_rows(&c.u),
        "solve_residual": num(c.solve_residual),
        "symmetry_defect": num(c.symmetry_defect),
        "unitarity_defect": num(c.unitarity_defect),
        "scale": num(c.scale),
        "k": c.k_operator.as_ref().map(matrix_rows),
        "k_residual": c.k_residual.map(num),
        "state": matrix_rows(outcome.state.matrix()),
        "specialized": outcome.specialized,
        "representation": generator_json(&outcome.representation, ids),
        "dissipative_asymmetry": num(sym.asymmetry),
        "hamiltonian_commutator": num(sym.commutator_defect),
    });
    let verdicts = [("sqdb", c.verdict), ("dissipative_symmetry", sym.sqdb)];
    Ok(report("sqdb", &l, &verdicts, results, vec![]))
}

pub fn cmd_specialize(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Report, CliError> {
    let l = load(text, tol, choice)?;
    let g = &l.model.generator;
    let t = l.model.tol;
    let before = is_special(g, t);
    let (special, rep) = make_special(g, t)?;
    let after = is_special(&special, t);
    let mut results = json!({
        "input": diagnostics_json(&before),
        "output": diagnostics_json(&after),
        "original_count": rep.original_count,
        "reduced_count": rep.reduced_count,
        "involution_reset": rep.involution_reset,
        "choi_weights": rep.weights.iter().copied().map(num).collect::<Vec<_>>(),
        "special": generator_json(&special, None),
    });
    let mut warnings = vec![];
    if rep.involution_reset {
        warnings.push("special form is all-singlets; declared pairing and c values were not carried over".into());
    }
    let mut verdicts = vec![("input_special", before.is_special()), ("output_special", after.is_special())];
    if g.jumps().tc().is_some() {
        match make_special_tc(g, t) {
            Ok(tc) => {
                results["special_tc"] = generator_json(&tc, Some(&l.model.ids));
                verdicts.push(("special_tc", true));
            }
            Err(e) => {
                results["special_tc_obstruction"] = json!(e.to_string());
                verdicts.push(("special_tc", false));
            }
        }
    }
    Ok(report("specialize", &l, &verdicts, results, warnings))
}

pub fn cmd_zero_epr_rep(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Report, CliError> {
    let l = load(text, tol, choice)?;
    let g = &l.model.generator;
    let inv = g.jumps().involution().clone();
    match construct_zero_epr_representation(g, &inv, l.model.tol) {
        Ok(z) => {
            let results = json!({
                "representation": generator_json(&z.generator, None),
                "mixing": matrix_rows(z.mixing.matrix()),
                "u": matrix_rows(&z.certificate.u),
                "relation_residual": num(z.relation_residual),
                "takagi_residual": num(z.takagi_residual),
                "superoperator_residual": num(z.superoperator_residual),
                "epr": epr_json(&z.epr),
            });
            let verdicts = [("constructed", true), ("zero_epr", z.epr.is_zero(l.model.tol))];
            Ok(report("zero-epr-rep", &l, &verdicts, results, vec![]))
        }
        Err(sqdb_core::Error::SqdbRequired) => {
            let results = json!({ "obstruction": sqdb_core::Error::SqdbRequired.to_string() });
            Ok(report("zero-epr-rep", &l, &[("constructed", false)], results, vec![]))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_tc_check(text: &str, tol: Option<f64>, choice: InvolutionChoice) -> Result<Report, CliError> {
    let l = load(text, tol, choice)?;
    let r = detect_tc(l.model.generator.jumps(), l.model.tol);
    let ids = &l.model.ids;
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            json!({
                "id": ids[e.index],
                "partner": ids[e.partner],
                "c": model::Entry::from(e.c),
                "residual": num(e.residual),
                "accepted": e.accepted,
            })
        })
        .collect();
    let results = json!({
        "entries": entries,
        "consistency_defect": num(r.consistency_defect),
        "constants": r.constants.as_ref().map(|c| c.values().iter().copied().map(num).collect::<Vec<_>>()),
    });
    Ok(report("tc-check", &l, &[("tc", r.success())], results, vec![]))
}

pub fn cmd_classical(text: &str, tol: Option<f64>) -> Result<Report, CliError> {
    let chain = parse_rates(text)?;
    let t = classical_tol(tol)?;
    let pi = classical_stationary(&chain, t)?;
    let e = classical_epr(&chain, &pi, t)?;
    let db = classical_detailed_balance(&chain, &pi, t)?;
    let results = json!({
        "stationary": pi.iter().copied().map(num).collect::<Vec<_>>(),
        "epr": epr_json(&e),
        "jump_pairs": classical_jump_pairs(&chain),
    });
    Ok(Report {
        command: "classical".into(),
        input_digest: digest(text.as_bytes()),
        tol: num(t),
        verdicts: [("detailed_balance".to_string(), db), ("zero_epr".to_string(), e.is_zero(t))].into(),
        results,
        warnings: vec![],
    })
}
