//! Machine-readable twin of the textual netlist format.
//!
//! Schema: `{ "inputs":[...], "outputs":[...], "nodes":[{"id":..,"kind":..,
//! "ops":[..]}], "fsm": {...} }`. Nets are referenced by name, `nodes`
//! carries every non-input node, and `fsm` mirrors the textual block.

use std::collections::BTreeMap;

use maskverif_core::circuit::{
    Circuit, CircuitBuilder, FsmSchedule, FsmState, GateKind, NetId,
};
use serde::{Deserialize, Serialize};

use crate::text::ParseError;

#[derive(Serialize, Deserialize)]
struct NetlistDoc {
    inputs: Vec<String>,
    outputs: Vec<String>,
    nodes: Vec<NodeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fsm: Option<FsmDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: String,
    kind: String,
    ops: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FsmDoc {
    states: Vec<StateDoc>,
}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    name: String,
    #[serde(default)]
    active: Vec<String>,
    #[serde(default)]
    regwrite: Vec<String>,
    #[serde(default)]
    mux: BTreeMap<String, u8>,
}

fn doc_err(msg: impl Into<String>) -> ParseError {
    ParseError { line: 1, col: 1, msg: msg.into() }
}

/// Build a circuit from a structural JSON document. Schema violations
/// (unknown kinds, wrong arity, unknown nets, cycles) are reported as
/// parse errors.
pub fn import_structural_json(text: &str) -> Result<Circuit, ParseError> {
    let doc: NetlistDoc =
        serde_json::from_str(text).map_err(|e| doc_err(format!("invalid JSON: {e}")))?;
    let mut b = CircuitBuilder::new();
    for name in &doc.inputs {
        b.add(name, GateKind::Input).map_err(|e| doc_err(e.to_string()))?;
    }
    for node in &doc.nodes {
        let kind = GateKind::from_name(&node.kind)
            .ok_or_else(|| doc_err(format!("node `{}`: unknown gate kind `{}`", node.id, node.kind)))?;
        if kind == GateKind::Input {
            return Err(doc_err(format!("node `{}`: inputs belong in the inputs array", node.id)));
        }
        b.add(&node.id, kind).map_err(|e| doc_err(e.to_string()))?;
    }
    let resolve = |b: &CircuitBuilder, name: &str, ctx: &str| {
        b.net(name)
            .ok_or_else(|| doc_err(format!("{ctx}: undeclared net `{name}`")))
    };
    for node in &doc.nodes {
        let id = b.net(&node.id).unwrap();
        let ops = node
            .ops
            .iter()
            .map(|n| resolve(&b, n, &format!("node `{}`", node.id)))
            .collect::<Result<Vec<NetId>, _>>()?;
        b.set_ops(id, ops).map_err(|e| doc_err(format!("node `{}`: {e}", node.id)))?;
    }
    for name in &doc.outputs {
        let id = resolve(&b, name, "outputs")?;
        b.output(id);
    }
    if let Some(fsm) = &doc.fsm {
        let mut sched = FsmSchedule { states: Vec::new() };
        for st in &fsm.states {
            let ctx = format!("state `{}`", st.name);
            let mut state = FsmState {
                name: st.name.clone(),
                active: Vec::new(),
                reg_writes: Vec::new(),
                mux_bindings: BTreeMap::new(),
            };
            for n in &st.active {
                state.active.push(resolve(&b, n, &ctx)?);
            }
            for n in &st.regwrite {
                state.reg_writes.push(resolve(&b, n, &ctx)?);
            }
            for (n, v) in &st.mux {
                let val = match v {
                    0 => false,
                    1 => true,
                    other => return Err(doc_err(format!("{ctx}: mux binding must be 0 or 1, found {other}"))),
                };
                state.mux_bindings.insert(resolve(&b, n, &ctx)?, val);
            }
            sched.states.push(state);
        }
        b.set_fsm(sched);
    }
    b.finish().map_err(|e| doc_err(e.to_string()))
}

/// Serialize a circuit to the structural JSON document (pretty-printed,
/// deterministic field order).
pub fn export_structural_json(c: &Circuit) -> String {
    let inputs = c.inputs().iter().map(|&n| c.name(n).to_string()).collect();
    let outputs = c.outputs().iter().map(|&n| c.name(n).to_string()).collect();
    let nodes = c
        .nodes()
        .filter(|(_, node)| node.kind != GateKind::Input)
        .map(|(id, node)| NodeDoc {
            id: c.name(id).to_string(),
            kind: node.kind.name().to_string(),
            ops: node.ops.iter().map(|&o| c.name(o).to_string()).collect(),
        })
        .collect();
    let fsm = c.fsm().map(|f| FsmDoc {
        states: f
            .states
            .iter()
            .map(|st| StateDoc {
                name: st.name.clone(),
                active: st.active.iter().map(|&n| c.name(n).to_string()).collect(),
                regwrite: st.reg_writes.iter().map(|&n| c.name(n).to_string()).collect(),
                mux: st
                    .mux_bindings
                    .iter()
                    .map(|(&m, &v)| (c.name(m).to_string(), v as u8))
                    .collect(),
            })
            .collect(),
    });
    let doc = NetlistDoc { inputs, outputs, nodes, fsm };
    let mut out = serde_json::to_string_pretty(&doc).expect("document serializes");
    out.push('\n');
    out
}
