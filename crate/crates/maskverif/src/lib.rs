//! IO, report, and pipeline layer over the verification core: textual and
//! JSON netlist formats, label files, the state-wise and monolithic
//! drivers, and deterministic report emission.

pub mod json;
pub mod pipeline;
pub mod report;
pub mod text;

pub use json::{export_structural_json, import_structural_json};
pub use pipeline::{run_monolithic, run_statewise, ModelSel, PipelineError, RunOpts};
pub use report::{emit_json, emit_text, Report};
pub use text::{dump_labels, dump_netlist, parse_labels, parse_netlist, ParseError};
