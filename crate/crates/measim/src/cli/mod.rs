//! Command-line front end: problem-file (de)serialization, rate reports,
//! protocol simulation runs, lemma suites, and plot-ready CSV series.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cq::{Ensemble, Povm, QuantumInstrument, Refinement};
use crate::error::{Error, Result};
use crate::qcore::{DensityOperator, Operator, SystemLayout};
use crate::tol;

mod commands;
mod parallel;

pub use commands::{
    cmd_rates, cmd_simulate, cmd_verify, rates_report, simulate_report, SimulateArgs, VerifyArgs,
};
pub use parallel::parallel_map;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes: 0 success, 1 usage/parse, 2 verification failure, 3 size limit.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::SizeLimit(_) => 3,
        Error::Parse(_) => 1,
        _ => 2,
    }
}

/// Complex matrix as nested arrays of `[re, im]` pairs, row-major.
pub type MatrixDef = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiStateDef {
    pub matrix: MatrixDef,
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmDef {
    pub labels: Vec<String>,
    pub elements: Vec<MatrixDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeDef {
    pub label: String,
    pub kraus: Vec<MatrixDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentDef {
    pub outcomes: Vec<OutcomeDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleDef {
    pub probs: Vec<f64>,
    pub states: Vec<MatrixDef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementDef {
    pub internal: PovmDef,
    pub post_processing: Vec<Vec<f64>>,
    pub output_labels: Vec<String>,
}

/// One problem instance: states, measurements and refinements in JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<MatrixDef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_multi: Option<MultiStateDef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm: Option<PovmDef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm_second: Option<PovmDef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instrument: Option<InstrumentDef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refinements: Vec<RefinementDef>,
}

fn parse_err(field: &str, what: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{field}: {what}"))
}

pub fn matrix_from_def(def: &MatrixDef, field: &str) -> Result<Operator> {
    Operator::from_rows(def).map_err(|e| parse_err(field, e))
}

pub fn matrix_to_def(op: &Operator) -> MatrixDef {
    (0..op.dim())
        .map(|i| {
            (0..op.dim())
                .map(|j| {
                    let v = op.get(i, j);
                    [v.re, v.im]
                })
                .collect()
        })
        .collect()
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.version != "1" {
            return Err(Error::Parse(format!(
                "unsupported version {}",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn density(&self) -> Result<DensityOperator> {
        let def = self
            .state
            .as_ref()
            .ok_or_else(|| parse_err("state", "missing"))?;
        DensityOperator::new(matrix_from_def(def, "state")?).map_err(|e| parse_err("state", e))
    }

    pub fn multi_state(&self) -> Result<(DensityOperator, SystemLayout)> {
        let def = self
            .state_multi
            .as_ref()
            .ok_or_else(|| parse_err("state_multi", "missing"))?;
        let op = matrix_from_def(&def.matrix, "state_multi.matrix")?;
        let labels: Vec<&str> = def.labels.iter().map(|s| s.as_str()).collect();
        let layout =
            SystemLayout::new(&labels, &def.dims).map_err(|e| parse_err("state_multi", e))?;
        layout
            .check_operator(&op)
            .map_err(|e| parse_err("state_multi", e))?;
        let rho = DensityOperator::new(op).map_err(|e| parse_err("state_multi.matrix", e))?;
        Ok((rho, layout))
    }

    pub fn povm(&self) -> Result<Povm> {
        povm_from_def(
            self.povm
                .as_ref()
                .ok_or_else(|| parse_err("povm", "missing"))?,
            "povm",
        )
    }

    pub fn povm_second(&self) -> Result<Povm> {
        povm_from_def(
            self.povm_second
                .as_ref()
                .ok_or_else(|| parse_err("povm_second", "missing"))?,
            "povm_second",
        )
    }

    pub fn instrument(&self) -> Result<QuantumInstrument> {
        let def = self
            .instrument
            .as_ref()
            .ok_or_else(|| parse_err("instrument", "missing"))?;
        let families = def
            .outcomes
            .iter()
            .map(|o| {
                let kraus = o
                    .kraus
                    .iter()
                    .map(|m| matrix_from_def(m, "instrument.kraus"))
                    .collect::<Result<Vec<_>>>()?;
                Ok((o.label.clone(), kraus))
            })
            .collect::<Result<Vec<_>>>()?;
        QuantumInstrument::new(families).map_err(|e| parse_err("instrument", e))
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        let def = self
            .ensemble
            .as_ref()
            .ok_or_else(|| parse_err("ensemble", "missing"))?;
        let states = def
            .states
            .iter()
            .enumerate()
            .map(|(i, m)| {
                DensityOperator::new(matrix_from_def(m, "ensemble.states")?)
                    .map_err(|e| parse_err(&format!("ensemble.states[{i}]"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(def.probs.clone(), states).map_err(|e| parse_err("ensemble", e))
    }

    pub fn refinements(&self) -> Result<Vec<Refinement>> {
        self.refinements
            .iter()
            .enumerate()
            .map(|(i, def)| {
                let internal = povm_from_def(&def.internal, "refinement.internal")?;
                Refinement::new(
                    internal,
                    def.post_processing.clone(),
                    def.output_labels.clone(),
                )
                .map_err(|e| parse_err(&format!("refinements[{i}]"), e))
            })
            .collect()
    }
}

fn povm_from_def(def: &PovmDef, field: &str) -> Result<Povm> {
    let elements = def
        .elements
        .iter()
        .map(|m| matrix_from_def(m, field))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements, def.labels.clone()).map_err(|e| parse_err(field, e))
}

pub fn povm_to_def(povm: &Povm) -> PovmDef {
    PovmDef {
        labels: povm.labels().to_vec(),
        elements: povm.elements().iter().map(matrix_to_def).collect(),
    }
}

/// Tolerances echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ToleranceSet {
    pub herm: f64,
    pub psd: f64,
    pub trace: f64,
    pub entropy: f64,
    pub recon: f64,
    pub complete: f64,
    pub lemma: f64,
    pub ambient_cap: usize,
}

impl ToleranceSet {
    pub fn current() -> Self {
        ToleranceSet {
            herm: tol::HERM,
            psd: tol::PSD,
            trace: tol::TRACE,
            entropy: tol::ENTROPY,
            recon: tol::RECON,
            complete: tol::COMPLETE,
            lemma: tol::LEMMA,
            ambient_cap: tol::ambient_cap(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
}

/// Self-contained run report: the command echo plus seed and tolerances make
/// the run reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: ToleranceSet,
    pub outputs: serde_json::Value,
    pub checks: Vec<CheckLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u128>,
}

impl RunReport {
    pub fn new(command: Vec<String>, seed: Option<u64>) -> Self {
        RunReport {
            tool_version: TOOL_VERSION.into(),
            command,
            seed,
            tolerances: ToleranceSet::current(),
            outputs: json!({}),
            checks: Vec::new(),
            wall_clock_ms: None,
        }
    }

    pub fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(CheckLine {
            name: name.into(),
            pass,
        });
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Flatten scalar report fields into one CSV row; vectors are skipped.
pub fn csv_from_reports(rows: &[serde_json::Value]) -> String {
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        if let serde_json::Value::Object(map) = row {
            for (k, v) in map {
                if !matches!(
                    v,
                    serde_json::Value::Array(_) | serde_json::Value::Object(_)
                ) && !columns.contains(k)
                {
                    columns.push(k.clone());
                }
            }
        }
    }
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let mut cells = Vec::with_capacity(columns.len());
        for col in &columns {
            let cell = match row.get(col) {
                Some(serde_json::Value::Number(n)) => n.to_string(),
                Some(serde_json::Value::Bool(b)) => b.to_string(),
                Some(serde_json::Value::String(s)) => s.clone(),
                _ => String::new(),
            };
            cells.push(cell);
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
