//! Verification core for first-order power side-channel security of masked
//! gate-level netlists.
//!
//! The toolkit decides, per net, whether any probed value can statistically
//! depend on a secret. Two leakage models are supported: stable (settled
//! values only) and transient (glitch-extended: a probe sees the whole
//! combinational fan-in back to the last register stage). The main analysis
//! propagates correlation-set labels through the netlist; an exhaustive
//! oracle provides exact ground truth on small circuits; the FSM splitter
//! extracts per-state sub-designs so resource-shared datapaths are judged
//! only on the routings each control state can actually produce.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bench;
pub mod circuit;
pub mod fsm;
pub mod label;
pub mod oracle;

pub use bench::{generate, inject_reassociation, list, BenchSpec, GenError, Scheme, Topology};
pub use circuit::{Circuit, CircuitBuilder, GateKind, NetId, Node};
pub use fsm::{split_all, SubDesign};
pub use label::{
    propagate, verify, verify_any, BaseVar, CorrelationSet, Labeling, Leak, Model, Monomial,
    Role, Verdict, DEFAULT_SET_CAP,
};
pub use oracle::{oracle_stable, oracle_transient, OracleReport};
