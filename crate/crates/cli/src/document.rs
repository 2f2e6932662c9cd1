//! The process-spec file: a JSON document naming states and symbols, with
//! transitions and an optional Gram table for a quantum memory.
//!
//! ```json
//! {
//!   "inputs": ["a", "b"],
//!   "outputs": ["0", "1"],
//!   "states": ["s0", "s1"],
//!   "input_distribution": {"a": 0.5, "b": 0.5},
//!   "transitions": [{"from": "s0", "x": "a", "y": "0", "p": 1.0, "to": "s1"}],
//!   "encoding": {"gram": [[1, 0.5], [0.5, 1]]}
//! }
//! ```
//!
//! Gram entries are real numbers or `[re, im]` pairs. Transitions that are
//! not listed have probability zero.

use crate::CliError;
use agent_thermo::entropy::{Distribution, GramKernel, C64};
use agent_thermo::transducer::{self, InputModel, MachineSpec, Transducer, Transition, Violation};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub states: Vec<String>,
    pub input_distribution: serde_json::Map<String, serde_json::Value>,
    pub transitions: Vec<TransitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<EncodingEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub from: String,
    pub x: String,
    pub y: String,
    pub p: f64,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingEntry {
    pub gram: Vec<Vec<GramValue>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GramValue {
    Real(f64),
    Complex([f64; 2]),
}

impl GramValue {
    fn to_c64(self) -> C64 {
        match self {
            GramValue::Real(r) => C64::new(r, 0.0),
            GramValue::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A parsed and validated spec.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub document: SpecDocument,
    pub machine: Transducer,
    pub input: InputModel,
    pub gram: Option<GramKernel>,
}

impl LoadedSpec {
    pub fn state_name(&self, s: usize) -> &str {
        &self.document.states[s]
    }

    /// "x/y" for a joint symbol z = x·|Y| + y.
    pub fn symbol_name(&self, z: u32) -> String {
        let ny = self.document.outputs.len();
        let z = z as usize;
        format!("{}/{}", self.document.inputs[z / ny], self.document.outputs[z % ny])
    }
}

pub fn read_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| match e {
        CliError::Spec(msg) => CliError::Spec(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_spec(text: &str) -> Result<LoadedSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let document: SpecDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Spec(if path == "." { inner.to_string() } else { format!("{path}: {inner}") })
    })?;
    build(document)
}

fn index_of(names: &[String], kind: &str) -> Result<HashMap<String, usize>, String> {
    let mut map = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(format!("{kind}: duplicate name {n:?}"));
        }
    }
    Ok(map)
}

fn build(document: SpecDocument) -> Result<LoadedSpec, CliError> {
    let mut problems = Vec::new();
    let lookups: Vec<HashMap<String, usize>> = [
        (&document.states, "states"),
        (&document.inputs, "inputs"),
        (&document.outputs, "outputs"),
    ]
    .into_iter()
    .map(|(names, kind)| {
        index_of(names, kind).unwrap_or_else(|e| {
            problems.push(e);
            HashMap::new()
        })
    })
    .collect();
    let (states, inputs, outputs) = (&lookups[0], &lookups[1], &lookups[2]);

    let mut transitions = Vec::with_capacity(document.transitions.len());
    for (k, t) in document.transitions.iter().enumerate() {
        let mut field = |map: &HashMap<String, usize>, value: &str, name: &str, kind: &str| {
            map.get(value).copied().or_else(|| {
                problems.push(format!("transitions[{k}].{name}: unknown {kind} {value:?}"));
                None
            })
        };
        let from = field(states, &t.from, "from", "state");
        let x = field(inputs, &t.x, "x", "input");
        let y = field(outputs, &t.y, "y", "output");
        let to = field(states, &t.to, "to", "state");
        if let (Some(from), Some(input), Some(output), Some(to)) = (from, x, y, to) {
            transitions.push((k, Transition { from, input, output, prob: t.p, to }));
        }
    }

    let mut q = vec![0.0; document.inputs.len()];
    for (name, value) in &document.input_distribution {
        match (inputs.get(name), value.as_f64()) {
            (Some(&i), Some(p)) => q[i] = p,
            (None, _) => problems.push(format!("input_distribution.{name}: unknown input")),
            (_, None) => problems.push(format!("input_distribution.{name}: not a number")),
        }
    }
    let input = match Distribution::new(q) {
        Ok(d) => Some(InputModel::new(d, document.outputs.len())),
        Err(e) => {
            problems.push(format!("input_distribution: {e}"));
            None
        }
    };

    if !problems.is_empty() {
        return Err(CliError::Spec(problems.join("\n")));
    }

    let spec = MachineSpec {
        states: document.states.len(),
        inputs: document.inputs.len(),
        outputs: document.outputs.len(),
        transitions: transitions.iter().map(|&(_, t)| t).collect(),
    };
    let report = transducer::validate(&spec);
    if !report.is_valid() {
        let original: Vec<usize> = transitions.iter().map(|&(k, _)| k).collect();
        let lines: Vec<String> = report.violations.iter().map(|v| describe(v, &document, &original, &spec)).collect();
        return Err(CliError::Spec(lines.join("\n")));
    }
    let machine = Transducer::new(&spec).map_err(|e| CliError::Spec(e.to_string()))?;

    let gram = match &document.encoding {
        None => None,
        Some(enc) => Some(gram_kernel(enc, document.states.len())?),
    };
    Ok(LoadedSpec { document, machine, input: input.expect("checked above"), gram })
}

fn gram_kernel(enc: &EncodingEntry, n: usize) -> Result<GramKernel, CliError> {
    if enc.gram.len() != n || enc.gram.iter().any(|row| row.len() != n) {
        return Err(CliError::Spec(format!("encoding.gram: expected a {n}×{n} table, one row per state")));
    }
    let m = DMatrix::from_fn(n, n, |i, j| enc.gram[i][j].to_c64());
    GramKernel::new(m).map_err(|e| CliError::Spec(format!("encoding.gram: {e}")))
}

/// Re-express a validation finding with the document's names.
fn describe(v: &Violation, doc: &SpecDocument, original: &[usize], spec: &MachineSpec) -> String {
    let entry = |k: usize| {
        let t = &doc.transitions[original[k]];
        format!("transitions[{}] ({} --{}/{}--> {})", original[k], t.from, t.x, t.y, t.to)
    };
    match v {
        Violation::ProbabilityRange { transition, prob } => {
            format!("{}: probability {prob} outside [0, 1]", entry(*transition))
        }
        Violation::Stochasticity { state, input, sum } => {
            let listed: Vec<String> = spec
                .transitions
                .iter()
                .enumerate()
                .filter(|(_, t)| t.from == *state && t.input == *input)
                .map(|(k, _)| format!("transitions[{}]", original[k]))
                .collect();
            format!(
                "stochasticity: state {}, input {}: probabilities sum to {sum} ({})",
                doc.states[*state],
                doc.inputs[*input],
                if listed.is_empty() { "no transitions listed".into() } else { listed.join(", ") }
            )
        }
        Violation::Unifilarity { state, input, output, successors } => {
            let names: Vec<&str> = successors.iter().map(|&s| doc.states[s].as_str()).collect();
            format!(
                "unifilarity: state {}, input {}, output {} leads to {}",
                doc.states[*state],
                doc.inputs[*input],
                doc.outputs[*output],
                names.join(" and ")
            )
        }
        other => other.to_string(),
    }
}

/// Spec document for a machine, naming states with `states`.
pub fn document_for(
    machine: &Transducer,
    states: Vec<String>,
    inputs: &[String],
    outputs: &[String],
    input_distribution: &serde_json::Map<String, serde_json::Value>,
) -> SpecDocument {
    let mut transitions = Vec::new();
    for j in 0..machine.states() {
        for x in 0..machine.inputs() {
            for y in 0..machine.outputs() {
                let p = machine.prob(j, x, y);
                if p > 0.0 {
                    transitions.push(TransitionEntry {
                        from: states[j].clone(),
                        x: inputs[x].clone(),
                        y: outputs[y].clone(),
                        p,
                        to: states[machine.next(j, x, y)].clone(),
                    });
                }
            }
        }
    }
    SpecDocument {
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        states,
        input_distribution: input_distribution.clone(),
        transitions,
        encoding: None,
    }
}
