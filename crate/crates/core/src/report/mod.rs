//! Input documents, canonical certificate output, and the command layer
//! behind the `qadv` binary.

pub mod certificate;
pub mod commands;
pub mod json;
pub mod spec;

pub use commands::{
    cmd_demo, cmd_robustness, cmd_simulate, cmd_synthesize, cmd_witness, exit_code_for, simulate_rounds, CommandOutput, RunConfig,
};
pub use json::{strip_timestamp, to_canonical_string, SCHEMA_VERSION};
pub use spec::{load_free_set, load_state, FreeSetDescriptor, FreeSetKindName, StateSpec};
