//! LMMSE receivers: the dense reference and the structured fast path.

pub mod direct;
pub mod fast;

pub use direct::{equalize_direct, lmmse_direct, LmmseFilter, Provenance};
pub use fast::{
    compute_fast_filter, equalize_zak, export_filter, filter_to_frequency_domain, precompute_freq_as, FastFilter,
    FreqGs,
};
