//! Scenario files, CSV output and the experiment drivers behind the
//! `sampleprivacy` binary.

pub mod commands;
pub mod scenario_file;
pub mod table;
