//! Complexity accounting: multiplication counters, closed-form counts and the
//! `(K, M)` sweep.

mod counter;
pub mod formulas;
pub mod sweep;

pub use counter::{OpCounter, Stage};
pub use formulas::{c_direct, c_sparse, c_sparse_collected, c_sparse_exact};
pub use sweep::{emit_csv, parse_grid, run_sweep, SweepConfig, SweepRecord};
