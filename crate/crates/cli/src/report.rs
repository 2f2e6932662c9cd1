//! JSON reports and CSV tables. Every number is rounded to 12 significant
//! digits, so re-reading and re-writing a report reproduces it byte for byte.

use crate::document::LoadedSpec;
use agent_thermo::case_studies::{BrownianRow, ClockRow};
use agent_thermo::quantum_encoding::GramEncoding;
use agent_thermo::thermo::ThermoReport;
use agent_thermo::transducer::Step;
use serde_json::{json, Map, Value};
use std::path::Path;

/// Bit-valued figures smaller than this are written as 0.
pub const BIT_FLOOR: f64 = 1e-12;

pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest text for the rounded value; scientific outside [1e-4, 1e15).
pub fn fmt_num(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 || (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn num(x: f64) -> Value {
    Value::from(round12(x))
}

/// Rate or information in bits; float dust around zero reads as zero.
fn bits(x: f64) -> Value {
    num(if x.abs() < BIT_FLOOR { 0.0 } else { x })
}

pub fn to_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn gram_table(enc: &GramEncoding) -> Value {
    let n = enc.dim();
    let real = enc.gram.is_real();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let z = enc.gram.entry(i, j);
                            if real {
                                bits(z.re)
                            } else {
                                json!([bits(z.re), bits(z.im)])
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn analysis_document(
    original: &LoadedSpec,
    min: &LoadedSpec,
    state_map: &[usize],
    path: &Path,
    budget: u64,
    r: &ThermoReport,
    systematic: &GramEncoding,
) -> Value {
    let name = |s: usize| Value::from(min.state_name(s));
    let mut mapping = Map::new();
    for (s, &c) in state_map.iter().enumerate() {
        mapping.insert(original.state_name(s).to_string(), name(c));
    }

    let encodings: Vec<Value> = r
        .encodings
        .iter()
        .map(|e| {
            let failures: Vec<Value> = e
                .feasibility
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "input": min.document.inputs[f.input],
                        "pair": [name(f.i), name(f.j)],
                        "overlap": num(f.overlap),
                        "bound": num(f.bound),
                    })
                })
                .collect();
            let mut obj = json!({
                "label": e.label,
                "provenance": e.provenance.to_string(),
                "memory_information_bits": bits(e.memory_information),
                "memory_entropy_bits": bits(e.memory_entropy),
                "work_rate": bits(e.rate),
                "advantage_gap": bits(e.gap.gap),
                "advantage_gap_cross_check": bits(e.gap.cross_check),
                "online_dissipation": bits(e.online_dissipation),
                "necessary_condition_holds": e.feasibility.holds(),
                "necessary_condition_failures": failures,
            });
            if e.label == "systematic" {
                obj["gram"] = gram_table(systematic);
            }
            if let Some(j) = r.joules(e.rate) {
                obj["work_rate_joules"] = num(j);
            }
            obj
        })
        .collect();

    let witness = match &r.advantage.witness {
        Some(w) => json!({
            "pair": [name(w.pair.0), name(w.pair.1)],
            "state": name(w.state),
            "word": w.word.iter().map(|&z| min.symbol_name(z)).collect::<Vec<_>>(),
            "posterior_shift": num(w.shift),
        }),
        None => Value::Null,
    };

    let mut classical = json!({
        "memory_information_bits": bits(r.classical_information),
        "work_rate": bits(r.classical_rate),
        "landauer_floor": bits(r.landauer_floor),
        "conditional_output_entropy_bits": bits(r.conditional_output_entropy),
        "online_cost": bits(r.online_cost.rate),
        "online_cost_next_step_form": bits(r.online_cost.next_step_form),
    });
    if let Some(j) = r.joules(r.classical_rate) {
        classical["work_rate_joules"] = num(j);
        classical["landauer_floor_joules"] = num(r.joules(r.landauer_floor).expect("scale present"));
    }

    let stationary = agent_thermo::transducer::steady_state(&min.machine, &min.input)
        .map(|pi| {
            let mut m = Map::new();
            for (s, &w) in pi.weights().iter().enumerate() {
                m.insert(min.state_name(s).to_string(), num(w));
            }
            Value::Object(m)
        })
        .unwrap_or(Value::Null);

    json!({
        "tool": { "name": "agent-thermo", "version": env!("CARGO_PKG_VERSION") },
        "input": {
            "spec": path.display().to_string(),
            "stride": r.stride,
            "kT_joules": r.kt_scale.map(num),
            "budget": budget,
            "inputs": original.document.inputs,
            "outputs": original.document.outputs,
            "states": original.document.states,
            "input_distribution": original.document.input_distribution,
            "encoding_supplied": original.gram.is_some(),
        },
        "units": "kT ln 2 per time step unless noted",
        "machine": {
            "states": original.machine.states(),
            "causal_states": r.states,
            "state_map": mapping,
            "stationary": stationary,
        },
        "classical": classical,
        "encodings": encodings,
        "advantage": {
            "predicted": r.advantage.advantage,
            "wasteful_pairs": r.advantage.wasteful_pairs.iter().map(|&(i, j)| json!([name(i), name(j)])).collect::<Vec<_>>(),
            "witness": witness,
        },
    })
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ASCII output")
}

/// Columns: N, H_classical_bits, H_quantum_bits, gap_kTln2.
pub fn brownian_csv(rows: &[BrownianRow]) -> String {
    let mut w = csv_writer();
    w.write_record(["N", "H_classical_bits", "H_quantum_bits", "gap_kTln2"]).expect("in-memory write");
    for r in rows {
        w.write_record([r.n.to_string(), fmt_num(r.h_classical), fmt_num(r.h_quantum), fmt_num(r.gap)])
            .expect("in-memory write");
    }
    finish(w)
}

/// Columns: dt, L, classical_dissipation_per_time, quantum_dissipation_per_time.
pub fn clock_csv(rows: &[ClockRow]) -> String {
    let mut w = csv_writer();
    w.write_record(["dt", "L", "classical_dissipation_per_time", "quantum_dissipation_per_time"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            fmt_num(r.dt),
            r.stride.to_string(),
            fmt_num(r.classical_per_time),
            fmt_num(r.quantum_per_time),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Columns: t, x, y, state (the state the input found).
pub fn trajectory_csv(spec: &LoadedSpec, run: &[Step]) -> String {
    let mut w = csv_writer();
    w.write_record(["t", "x", "y", "state"]).expect("in-memory write");
    for s in run {
        w.write_record([
            s.t.to_string().as_str(),
            &spec.document.inputs[s.input],
            &spec.document.outputs[s.output],
            spec.state_name(s.state),
        ])
        .expect("in-memory write");
    }
    finish(w)
}
