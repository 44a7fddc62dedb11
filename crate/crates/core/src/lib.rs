//! Cycle-level profiler toolchain for a Calyx-style accelerator IL.
//!
//! The pipeline mirrors the profiling workflow end to end:
//!
//! 1. [`il`] parses and validates the intermediate language.
//! 2. [`passes`] instruments groups with timing-neutral probes, optionally
//!    promotes fixed-latency control to static schedules, and lowers control
//!    to structural FSM compilation groups, emitting a [`passes::SourceMap`].
//! 3. [`sim`] runs the lowered program cycle by cycle and writes a VCD.
//! 4. [`trace`] parses VCDs and rebuilds one call tree per cycle, then
//!    attributes cycles to user computation vs. control overhead.
//! 5. [`viz`] renders flame graphs, Perfetto timelines, and statistics.

pub mod corpus;
pub mod il;
pub mod passes;
pub mod sim;
pub mod trace;
pub mod viz;
