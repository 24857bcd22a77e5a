//! Verification report assembly and rendering.
//!
//! JSON schema:
//!
//! ```text
//! { "mode": "statewise"|"monolithic", "order": 1|2,
//!   "states": [ { "name": ...,
//!                 "stable":    { "secure": bool, "leaks": [...], "metrics": {...}, "time_s": ... },
//!                 "transient": { ... },
//!                 "oracle":    { "stable": bool, "transient": bool } } ],
//!   "overall": { "stable": bool, "transient": bool },
//!   "first_failure": state-name|null }
//! ```
//!
//! Model objects are omitted for models that did not run; leak entries name
//! original (parent-design) nets and render monomials as variable-name
//! arrays. `time_s` is 0.0 unless timing capture was requested, which keeps
//! repeated runs byte-identical.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub mode: String,
    pub order: u8,
    pub states: Vec<StateEntry>,
    pub overall: Overall,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Overall {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable: Option<ModelOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<ModelOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleEntry>,
}

/// Exhaustive-simulation verdicts recorded next to the checker's.
#[derive(Debug, Clone, Serialize)]
pub struct OracleEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelOutcome {
    pub secure: bool,
    pub leaks: Vec<LeakEntry>,
    pub metrics: Metrics,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakEntry {
    pub net: String,
    /// Second probe net of an order-2 pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    pub monomial: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Metrics {
    pub vars: usize,
    pub assertions: usize,
    pub loc_netlist: usize,
    pub digraph_nodes: usize,
    pub digraph_edges: usize,
}

impl Report {
    pub fn secure(&self) -> bool {
        self.overall.stable.unwrap_or(true) && self.overall.transient.unwrap_or(true)
    }
}

pub fn emit_json(r: &Report) -> String {
    let mut out = serde_json::to_string_pretty(r).expect("report serializes");
    out.push('\n');
    out
}

fn fmt_bool(v: bool) -> &'static str {
    if v {
        "True"
    } else {
        "False"
    }
}

fn model_cell(m: &Option<ModelOutcome>) -> String {
    match m {
        Some(o) => fmt_bool(o.secure).to_string(),
        None => "-".to_string(),
    }
}

fn metrics_of(e: &StateEntry) -> Option<Metrics> {
    // Transient metrics subsume stable metrics when both ran.
    e.transient.as_ref().or(e.stable.as_ref()).map(|o| o.metrics)
}

pub fn emit_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}  order: {}", r.mode, r.order);
    let _ = writeln!(
        out,
        "{:<16} {:>7} {:>10} {:>7} {:>11} {:>9} {:>13}  {}",
        "state", "stable", "transient", "vars", "assertions", "loc", "digraph(n/e)", "verdict"
    );
    for e in &r.states {
        let secure = e.stable.as_ref().map_or(true, |o| o.secure)
            && e.transient.as_ref().map_or(true, |o| o.secure);
        let m = metrics_of(e).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<16} {:>7} {:>10} {:>7} {:>11} {:>9} {:>13}  {}",
            e.name,
            model_cell(&e.stable),
            model_cell(&e.transient),
            m.vars,
            m.assertions,
            m.loc_netlist,
            format!("{}/{}", m.digraph_nodes, m.digraph_edges),
            if secure { "SECURE" } else { "INSECURE" }
        );
        if let Some(oracle) = &e.oracle {
            let mut parts = Vec::new();
            if let Some(v) = oracle.stable {
                parts.push(format!("stable={}", fmt_bool(v)));
            }
            if let Some(v) = oracle.transient {
                parts.push(format!("transient={}", fmt_bool(v)));
            }
            let _ = writeln!(out, "  oracle: {}", parts.join(" "));
        }
    }
    for e in &r.states {
        for (model, outcome) in [("stable", &e.stable), ("transient", &e.transient)] {
            let Some(o) = outcome else { continue };
            for leak in &o.leaks {
                let probe = match &leak.pair {
                    Some(p) => format!("{}, {}", leak.net, p),
                    None => leak.net.clone(),
                };
                let _ = writeln!(
                    out,
                    "leak: state {} ({model}) net {probe}: {{{}}}",
                    e.name,
                    leak.monomial.join(", ")
                );
            }
        }
    }
    let mut overall = Vec::new();
    if let Some(v) = r.overall.stable {
        overall.push(format!("stable={}", fmt_bool(v)));
    }
    if let Some(v) = r.overall.transient {
        overall.push(format!("transient={}", fmt_bool(v)));
    }
    let _ = writeln!(
        out,
        "overall: {} -> {}",
        overall.join(" "),
        if r.secure() { "SECURE" } else { "INSECURE" }
    );
    if let Some(f) = &r.first_failure {
        let _ = writeln!(out, "first failure: {f}");
    }
    out
}
