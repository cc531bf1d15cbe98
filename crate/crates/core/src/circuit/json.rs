use serde::{Deserialize, Serialize};

use super::{Circuit, Condition, Gate, GateKind};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    name: String,
    n_qubits: usize,
    n_clbits: usize,
    gates: Vec<GateDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clbit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    condition: Option<Condition>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    epr_link: bool,
}

pub fn to_json(circuit: &Circuit) -> String {
    let doc = CircuitDoc {
        name: circuit.name.clone(),
        n_qubits: circuit.n_qubits,
        n_clbits: circuit.n_clbits,
        gates: circuit
            .gates
            .iter()
            .map(|g| GateDoc {
                kind: g.kind.name().to_string(),
                qubits: g.qubits.clone(),
                params: g.params.clone(),
                clbit: g.clbit,
                condition: g.condition,
                epr_link: g.epr_link,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("circuit documents always serialize")
}

pub fn from_json(text: &str) -> Result<Circuit> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: CircuitDoc = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let mut gates = Vec::with_capacity(doc.gates.len());
    for (i, g) in doc.gates.into_iter().enumerate() {
        let kind = GateKind::from_name(&g.kind).ok_or_else(|| Error::Schema {
            path: format!("gates[{i}].kind"),
            message: format!("unknown gate kind `{}`", g.kind),
        })?;
        gates.push(Gate {
            kind,
            qubits: g.qubits,
            params: g.params,
            clbit: g.clbit,
            condition: g.condition,
            epr_link: g.epr_link,
        });
    }
    let circuit = Circuit {
        name: doc.name,
        n_qubits: doc.n_qubits,
        n_clbits: doc.n_clbits,
        gates,
    };
    circuit.validate().map_err(|e| Error::Schema {
        path: "gates".into(),
        message: e.to_string(),
    })?;
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_round_trip() {
        let mut c = Circuit::new("bell", 2, 0);
        c.h(0).cx(0, 1);
        assert_eq!(from_json(&to_json(&c)).unwrap(), c);
    }

    #[test]
    fn conditioned_gate_round_trip() {
        let mut c = Circuit::new("cond", 2, 1);
        c.h(0).measure(0, 0);
        c.push(Gate::new(GateKind::X, &[1]).conditioned(0, 1));
        let text = to_json(&c);
        assert!(text.contains("\"condition\""));
        assert_eq!(from_json(&text).unwrap(), c);
    }

    #[test]
    fn missing_field_reports_path() {
        let err = from_json(r#"{"name":"x","n_clbits":0,"gates":[]}"#).unwrap_err();
        match err {
            Error::Schema { message, .. } => assert!(message.contains("n_qubits")),
            other => panic!("unexpected {other:?}"),
        }
        let err = from_json(r#"{"name":"x","n_qubits":1,"n_clbits":0,"gates":[{"kind":"H","qubits":"a"}]}"#)
            .unwrap_err();
        match err {
            Error::Schema { path, .. } => assert_eq!(path, "gates[0].qubits"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        let err = from_json(r#"{"name":"x","n_qubits":1,"n_clbits":0,"gates":[{"kind":"CCX","qubits":[0]}]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "gates[0].kind"));
    }
}
