//! Verification drivers.
//!
//! `run_statewise` splits an FSM design into per-state sub-designs and
//! verifies every state under every requested model, continuing past
//! failures so the report lists all insecure states. `run_monolithic`
//! ignores the schedule: select-only inputs are relabeled public, muxes
//! are lowered to gates, and the whole netlist is verified at once.
//!
//! State by model jobs run in parallel; the report is assembled as a
//! sequential reduction ordered by state index, so output is
//! deterministic.

use std::time::Instant;

use maskverif_core::circuit::{self, Circuit, GateKind};
use maskverif_core::fsm::SubDesign;
use maskverif_core::label::{self, verify, verify_any, Labeling, Model, Role, Verdict};
use maskverif_core::oracle::{self, oracle_stable, oracle_transient};
use maskverif_core::split_all;
use rayon::prelude::*;

use crate::report::{LeakEntry, Metrics, ModelOutcome, OracleEntry, Overall, Report, StateEntry};
use crate::text::dump_netlist;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSel {
    Stable,
    Transient,
    Both,
}

impl ModelSel {
    pub fn models(self) -> &'static [Model] {
        match self {
            ModelSel::Stable => &[Model::Stable],
            ModelSel::Transient => &[Model::Transient],
            ModelSel::Both => &[Model::Stable, Model::Transient],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOpts {
    pub models: ModelSel,
    pub order: u8,
    pub cap: usize,
    /// Record wall time per verification. Off by default so repeated runs
    /// emit byte-identical reports.
    pub timings: bool,
    /// Run the exhaustive-simulation oracle next to the checker.
    pub oracle: bool,
}

impl Default for RunOpts {
    fn default() -> Self {
        RunOpts {
            models: ModelSel::Both,
            order: 1,
            cap: label::DEFAULT_SET_CAP,
            timings: false,
            oracle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("netlist has no fsm block; use --mode monolithic")]
    NoSchedule,
    #[error("{0}")]
    Circuit(circuit::Error),
    #[error("{0}")]
    Label(label::Error),
    #[error("oracle: {0}")]
    Oracle(oracle::Error),
}

impl PipelineError {
    /// 2 = usage or malformed input, 3 = resource cap exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Label(label::Error::CapExceeded { .. }) => 3,
            PipelineError::Oracle(oracle::Error::TooManyInputs { .. })
            | PipelineError::Oracle(oracle::Error::ConeTooWide { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<circuit::Error> for PipelineError {
    fn from(e: circuit::Error) -> Self {
        PipelineError::Circuit(e)
    }
}

impl From<label::Error> for PipelineError {
    fn from(e: label::Error) -> Self {
        PipelineError::Label(e)
    }
}

impl From<oracle::Error> for PipelineError {
    fn from(e: oracle::Error) -> Self {
        PipelineError::Oracle(e)
    }
}

// vars counts label slots computed for the run: transient verification
// also builds the stable sets it reads through registers.
fn metrics(v: &Verdict, model: Model, loc: usize) -> Metrics {
    let slots = match model {
        Model::Stable => v.checked_nets,
        Model::Transient => 2 * v.checked_nets,
    };
    Metrics {
        vars: slots,
        assertions: v.checked_nets + v.checked_pairs,
        loc_netlist: loc,
        digraph_nodes: v.digraph_nodes,
        digraph_edges: v.digraph_edges,
    }
}

fn leak_entries<F>(v: &Verdict, c: &Circuit, l: &Labeling, rename: F) -> Vec<LeakEntry>
where
    F: Fn(maskverif_core::NetId) -> String,
{
    v.leaks
        .iter()
        .map(|leak| LeakEntry {
            net: rename(leak.net),
            pair: leak.pair.map(&rename),
            monomial: leak.monomial.vars().map(|var| l.var_name(c, var)).collect(),
        })
        .collect()
}

struct Job {
    state: usize,
    model: Model,
    outcome: ModelOutcome,
    oracle: Option<bool>,
}

fn verify_sub(sub: &SubDesign, model: Model, opts: &RunOpts) -> Result<Job, PipelineError> {
    let start = Instant::now();
    let v = verify(&sub.circuit, &sub.labeling, model, opts.order, opts.cap)?;
    let time_s = if opts.timings { start.elapsed().as_secs_f64() } else { 0.0 };
    let loc = dump_netlist(&sub.circuit).lines().count();
    let outcome = ModelOutcome {
        secure: v.secure(),
        leaks: leak_entries(&v, &sub.circuit, &sub.labeling, |n| {
            sub.circuit.name(n).to_string()
        }),
        metrics: metrics(&v, model, loc),
        time_s,
    };
    let oracle = if opts.oracle {
        let rep = match model {
            Model::Stable => oracle_stable(&sub.circuit, &sub.labeling)?,
            Model::Transient => oracle_transient(&sub.circuit, &sub.labeling)?,
        };
        Some(rep.secure())
    } else {
        None
    };
    Ok(Job { state: sub.state_index, model, outcome, oracle })
}

fn assemble(mode: &str, order: u8, names: Vec<String>, jobs: Vec<Job>, sel: ModelSel) -> Report {
    let mut states: Vec<StateEntry> = names
        .into_iter()
        .map(|name| StateEntry { name, stable: None, transient: None, oracle: None })
        .collect();
    for job in jobs {
        let entry = &mut states[job.state];
        if let Some(secure) = job.oracle {
            let oracle = entry.oracle.get_or_insert(OracleEntry { stable: None, transient: None });
            match job.model {
                Model::Stable => oracle.stable = Some(secure),
                Model::Transient => oracle.transient = Some(secure),
            }
        }
        match job.model {
            Model::Stable => entry.stable = Some(job.outcome),
            Model::Transient => entry.transient = Some(job.outcome),
        }
    }
    let ran_stable = sel != ModelSel::Transient;
    let ran_transient = sel != ModelSel::Stable;
    let all = |pick: fn(&StateEntry) -> &Option<ModelOutcome>| {
        states.iter().all(|e| pick(e).as_ref().map_or(true, |o| o.secure))
    };
    let overall = Overall {
        stable: ran_stable.then(|| all(|e| &e.stable)),
        transient: ran_transient.then(|| all(|e| &e.transient)),
    };
    let first_failure = states
        .iter()
        .find(|e| {
            e.stable.as_ref().is_some_and(|o| !o.secure)
                || e.transient.as_ref().is_some_and(|o| !o.secure)
        })
        .map(|e| e.name.clone());
    Report {
        mode: mode.to_string(),
        order,
        states,
        overall,
        first_failure,
    }
}

/// Split an FSM design into its per-state sub-designs and verify each one
/// under every requested model. All states are verified even after a
/// failure; `first_failure` names the earliest insecure state.
pub fn run_statewise(c: &Circuit, l: &Labeling, opts: &RunOpts) -> Result<Report, PipelineError> {
    if c.fsm().is_none() {
        return Err(PipelineError::NoSchedule);
    }
    let subs = split_all(c, l)?;
    let names: Vec<String> = subs.iter().map(|s| s.state.clone()).collect();
    let pairs: Vec<(&SubDesign, Model)> = subs
        .iter()
        .flat_map(|s| opts.models.models().iter().map(move |&m| (s, m)))
        .collect();
    let mut jobs = pairs
        .par_iter()
        .map(|&(sub, model)| verify_sub(sub, model, opts))
        .collect::<Result<Vec<Job>, PipelineError>>()?;
    jobs.sort_by_key(|j| (j.state, j.model == Model::Transient));
    Ok(assemble("statewise", opts.order, names, jobs, opts.models))
}

// An input is controller routing, not data, when every use is a mux
// select operand.
fn select_only_inputs(c: &Circuit) -> Vec<maskverif_core::NetId> {
    let mut data_use = vec![false; c.len()];
    let mut select_use = vec![false; c.len()];
    for (_, node) in c.nodes() {
        for (i, &op) in node.ops.iter().enumerate() {
            if node.kind == GateKind::Mux && i == 2 {
                select_use[op.index()] = true;
            } else {
                data_use[op.index()] = true;
            }
        }
    }
    for &o in c.outputs() {
        data_use[o.index()] = true;
    }
    c.inputs()
        .iter()
        .copied()
        .filter(|n| select_use[n.index()] && !data_use[n.index()])
        .collect()
}

/// Verify the whole netlist with the schedule ignored: select-only inputs
/// become public, muxes are lowered to gates, and both datapaths of every
/// operand mux are live at once.
pub fn run_monolithic(c: &Circuit, l: &Labeling, opts: &RunOpts) -> Result<Report, PipelineError> {
    let mut labeling = l.clone();
    for net in select_only_inputs(c) {
        labeling.assign(net, Role::Public);
    }
    let lowered = c.lower_mux();
    let loc = dump_netlist(&lowered).lines().count();
    let jobs = opts
        .models
        .models()
        .par_iter()
        .map(|&model| {
            let start = Instant::now();
            let v = verify_any(&lowered, &labeling, model, opts.order, opts.cap)?;
            let time_s = if opts.timings { start.elapsed().as_secs_f64() } else { 0.0 };
            let outcome = ModelOutcome {
                secure: v.secure(),
                leaks: leak_entries(&v, &lowered, &labeling, |n| lowered.name(n).to_string()),
                metrics: metrics(&v, model, loc),
                time_s,
            };
            let oracle = if opts.oracle {
                let rep = match model {
                    Model::Stable => oracle_stable(&lowered, &labeling)?,
                    Model::Transient => oracle_transient(&lowered, &labeling)?,
                };
                Some(rep.secure())
            } else {
                None
            };
            Ok(Job { state: 0, model, outcome, oracle })
        })
        .collect::<Result<Vec<Job>, PipelineError>>()?;
    Ok(assemble(
        "monolithic",
        opts.order,
        vec!["monolithic".to_string()],
        jobs,
        opts.models,
    ))
}
