//! Circuit data model, JSON (de)serialization, validation, noise-model
//! attachment and ideal-unitary construction.
//!
//! A circuit is the ordered product `U_1 U_2 ... U_N` applied to an initial
//! state, where the LAST element of the gate list acts FIRST. Angles are
//! radians; the JSON parser also accepts exact "pi"-expressions such as
//! `"pi/4"` or `"-3*pi/4"` so bound values like `3pi/8` do not pick up
//! decimal-literal drift.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::gates::{builtin_gate, ResolvedGate};
use crate::numerics::{self, c, CMatrix, MAX_QUBITS};
use crate::{Error, Result};

/// Per-gate multiplicative noise bounds, `|eps_i| <= eps_bar`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseModel {
    pub eps_bar: f64,
    /// Optional override per gate index (index into the circuit gate list).
    pub per_gate: BTreeMap<usize, f64>,
}

impl NoiseModel {
    pub fn uniform(eps_bar: f64) -> Self {
        Self {
            eps_bar,
            per_gate: BTreeMap::new(),
        }
    }

    pub fn bound_for(&self, gate_index: usize) -> f64 {
        *self.per_gate.get(&gate_index).unwrap_or(&self.eps_bar)
    }
}

/// One gate placement: a resolved gate, its support and a noise flag.
#[derive(Debug, Clone)]
pub struct GateInstance {
    pub name: String,
    pub params: Vec<f64>,
    pub support: Vec<usize>,
    pub noisy: bool,
    pub custom_generator: Option<CMatrix>,
    gate: ResolvedGate,
}

impl GateInstance {
    pub fn gate(&self) -> &ResolvedGate {
        &self.gate
    }
}

/// An `n`-qubit circuit with attached noise model.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<GateInstance>,
    pub noise: NoiseModel,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooLarge {
                n_qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            noise: NoiseModel::default(),
        })
    }

    pub fn with_noise(mut self, eps_bar: f64) -> Self {
        self.noise.eps_bar = eps_bar;
        self
    }

    /// Append a built-in gate. The appended gate acts BEFORE all gates
    /// already in the list (the list is the operator product `U_1...U_N`).
    pub fn push(&mut self, name: &str, params: &[f64], qubits: &[usize], noisy: bool) -> Result<()> {
        let gate = builtin_gate(name, params)?;
        self.push_instance(GateInstance {
            name: name.to_string(),
            params: params.to_vec(),
            support: qubits.to_vec(),
            noisy,
            custom_generator: None,
            gate,
        })
    }

    /// Prepend a built-in gate: the new gate acts AFTER everything already
    /// in the circuit. Convenient when authoring in application order.
    pub fn apply(&mut self, name: &str, params: &[f64], qubits: &[usize], noisy: bool) -> Result<()> {
        self.push(name, params, qubits, noisy)?;
        let g = self.gates.pop().expect("just pushed");
        self.gates.insert(0, g);
        Ok(())
    }

    /// Append a gate defined by an explicit Hermitian generator.
    pub fn push_custom(
        &mut self,
        name: &str,
        generator: CMatrix,
        qubits: &[usize],
        noisy: bool,
    ) -> Result<()> {
        let gate = ResolvedGate::from_generator(name, generator.clone())?;
        self.push_instance(GateInstance {
            name: name.to_string(),
            params: Vec::new(),
            support: qubits.to_vec(),
            noisy,
            custom_generator: Some(generator),
            gate,
        })
    }

    fn push_instance(&mut self, inst: GateInstance) -> Result<()> {
        if inst.gate.arity != inst.support.len() {
            return Err(Error::DimensionMismatch(format!(
                "gate `{}` acts on {} qubit(s), given {}",
                inst.name,
                inst.gate.arity,
                inst.support.len()
            )));
        }
        for (i, &q) in inst.support.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    name: inst.name.clone(),
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
            if inst.support[..i].contains(&q) {
                return Err(Error::DimensionMismatch(format!(
                    "gate `{}` has duplicate support qubit {q}",
                    inst.name
                )));
            }
        }
        if inst.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gate `{}` has non-finite parameter",
                inst.name
            )));
        }
        self.gates.push(inst);
        Ok(())
    }

    /// Indices of noisy gates, in gate-list order.
    pub fn noisy_indices(&self) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.noisy)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn noisy_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.noisy).count()
    }

    /// Full product `U_1 ... U_N` of embedded gate unitaries.
    pub fn ideal_unitary(&self) -> Result<CMatrix> {
        let dim = 1usize << self.n_qubits;
        let mut acc = CMatrix::identity(dim, dim);
        for g in &self.gates {
            let full = numerics::embed(&g.gate.unitary, &g.support, self.n_qubits)?;
            acc *= full;
        }
        Ok(acc)
    }
}

/// `true` iff `|tr(U^dagger V)|/d >= 1 - 1e-8`; also returns the deviation.
pub fn equivalent_up_to_phase(u: &CMatrix, v: &CMatrix) -> Result<(bool, f64)> {
    let dev = numerics::phase_distance(u, v)?;
    Ok((dev <= 1e-8, dev))
}

// --- JSON schema ---------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    qubits: usize,
    gates: Vec<GateDoc>,
    #[serde(default)]
    noise: NoiseDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    name: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<ParamDoc>,
    #[serde(default = "default_true")]
    noisy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NoiseDoc {
    #[serde(default)]
    eps_bar: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    per_gate: BTreeMap<usize, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ParamDoc {
    Number(f64),
    PiExpr(String),
}

fn default_true() -> bool {
    true
}

/// Evaluate literals like `"pi"`, `"-pi/2"`, `"3*pi/4"`, `"3pi/8"` or
/// `"0.25"` exactly in terms of `std::f64::consts::PI`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = |msg: &str| Error::SchemaError {
        path: "params".into(),
        message: format!("bad angle literal `{text}`: {msg}"),
    };
    let s = text.trim().replace(' ', "");
    let (sign, s) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.to_string()),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s).to_string()),
    };
    let (num_part, den): (String, f64) = match s.split_once('/') {
        Some((n, d)) => {
            let den: f64 = d.parse().map_err(|_| bad("invalid denominator"))?;
            if den == 0.0 {
                return Err(bad("division by zero"));
            }
            (n.to_string(), den)
        }
        None => (s, 1.0),
    };
    let value = if let Some(coef) = num_part.strip_suffix("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let coef: f64 = if coef.is_empty() {
            1.0
        } else {
            coef.parse().map_err(|_| bad("invalid coefficient"))?
        };
        coef * std::f64::consts::PI
    } else {
        num_part.parse().map_err(|_| bad("not a number"))?
    };
    Ok(sign * value / den)
}

/// Parse and validate a circuit JSON document.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: CircuitDoc = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        Error::SchemaError {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        }
    })?;
    circuit_from_doc(doc)
}

fn circuit_from_doc(doc: CircuitDoc) -> Result<Circuit> {
    let mut circuit = Circuit::new(doc.qubits)?;
    circuit.noise = NoiseModel {
        eps_bar: doc.noise.eps_bar,
        per_gate: doc.noise.per_gate,
    };
    if circuit.noise.eps_bar < 0.0 || circuit.noise.per_gate.values().any(|&b| b < 0.0) {
        return Err(Error::SchemaError {
            path: "noise".into(),
            message: "noise bounds must be nonnegative".into(),
        });
    }
    for (i, g) in doc.gates.into_iter().enumerate() {
        let params: Vec<f64> = g
            .params
            .iter()
            .map(|p| match p {
                ParamDoc::Number(x) => Ok(*x),
                ParamDoc::PiExpr(s) => parse_angle(s),
            })
            .collect::<Result<_>>()
            .map_err(|e| prefix_path(e, &format!("gates[{i}]")))?;
        let result = match &g.generator {
            Some(rows) => {
                let gen = matrix_from_rows(rows).map_err(|e| prefix_path(e, &format!("gates[{i}].generator")))?;
                circuit.push_custom(&g.name, gen, &g.qubits, g.noisy)
            }
            None => circuit.push(&g.name, &params, &g.qubits, g.noisy),
        };
        result.map_err(|e| match e {
            Error::SchemaError { path, message } => Error::SchemaError {
                path: format!("gates[{i}].{path}"),
                message,
            },
            other => other,
        })?;
    }
    for &idx in circuit.noise.per_gate.keys() {
        if idx >= circuit.gates.len() {
            return Err(Error::SchemaError {
                path: format!("noise.per_gate.{idx}"),
                message: format!("gate index out of range (circuit has {})", circuit.gates.len()),
            });
        }
    }
    Ok(circuit)
}

fn prefix_path(e: Error, prefix: &str) -> Error {
    match e {
        Error::SchemaError { path, message } => Error::SchemaError {
            path: format!("{prefix}.{path}"),
            message,
        },
        other => other,
    }
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::SchemaError {
            path: String::new(),
            message: "generator must be a square matrix of [re, im] pairs".into(),
        });
    }
    Ok(CMatrix::from_fn(d, d, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Serialize a circuit back to its JSON document form.
pub fn serialize_circuit(circuit: &Circuit) -> String {
    let doc = CircuitDoc {
        qubits: circuit.n_qubits,
        gates: circuit
            .gates
            .iter()
            .map(|g| GateDoc {
                name: g.name.clone(),
                qubits: g.support.clone(),
                params: g.params.iter().map(|&p| ParamDoc::Number(p)).collect(),
                noisy: g.noisy,
                generator: g.custom_generator.as_ref().map(|m| {
                    (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                        .collect()
                }),
            })
            .collect(),
        noise: NoiseDoc {
            eps_bar: circuit.noise.eps_bar,
            per_gate: circuit.noise.per_gate.clone(),
        },
    };
    serde_json::to_string_pretty(&doc).expect("circuit serialization")
}

/// Draw a random small circuit for property tests and bound/simulator
/// cross-checks.
pub fn random_circuit(rng: &mut impl rand::Rng, max_qubits: usize, max_gates: usize) -> Circuit {
    use std::f64::consts::PI;
    let single: &[&str] = &["x", "y", "z", "h", "s", "t", "sx", "rx", "ry", "rz", "u1"];
    let double: &[&str] = &["cx", "cz", "cp", "swap", "rzz"];
    let n = rng.gen_range(1..=max_qubits);
    let count = rng.gen_range(1..=max_gates);
    let mut circuit = Circuit::new(n).expect("within cap");
    for _ in 0..count {
        let two_qubit = n > 1 && rng.gen_bool(0.35);
        let name = if two_qubit {
            double[rng.gen_range(0..double.len())]
        } else {
            single[rng.gen_range(0..single.len())]
        };
        let kind = crate::gates::GateKind::from_name(name).expect("pool name");
        let params: Vec<f64> = (0..kind.param_count())
            .map(|_| rng.gen_range(-PI..PI))
            .collect();
        let qubits: Vec<usize> = if two_qubit {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            vec![a, b]
        } else {
            vec![rng.gen_range(0..n)]
        };
        circuit.push(name, &params, &qubits, true).expect("valid gate");
    }
    circuit
}
