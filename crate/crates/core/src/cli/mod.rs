//! Pipeline orchestration behind the `laufer` binary: potential documents,
//! analysis reports and parameter sweeps.

pub mod input;
pub mod report;
pub mod sweep;

pub use input::{parse_points, parse_potential, AnyPotential, ParsedPotential};
pub use report::{analyze, AnalysisReport, AnalyzeOptions};
pub use sweep::{parse_range, parse_slot, sweep, SweepAxis, SweepSpec, SweepTable};
