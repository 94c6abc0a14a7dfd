//! Low-complexity LMMSE receive filters for GFDM over block-fading multipath
//! channels.
//!
//! The modulation matrix `A`, the circulant channel `H`, their product and the
//! LMMSE filter `W = G·(Gᴴ·G + σ²·I)⁻¹` (with `G = H·A`) are all block
//! circulant. [`equalizer::fast`] exploits that: it block-diagonalizes with the
//! ZAK transform, forms the per-block Gram matrices in the frequency domain
//! where they are cyclic tridiagonal, and solves them with a Thomas sweep.
//! [`equalizer::direct`] is the dense Cholesky reference.
//!
//! Modules:
//! - [`linalg`]: dense matrices, unitary DFT / ZAK transform, block-circulant
//!   algebra, cyclic tridiagonal solver, text matrix format.
//! - [`gfdm`]: prototype filter, modulation matrix, channel and sources.
//! - [`equalizer`]: direct and fast LMMSE receivers.
//! - [`complexity`]: operation counters, closed-form counts and sweeps.
//! - [`harness`]: verification, benchmark and simulation drivers.

pub mod complexity;
pub mod equalizer;
pub mod error;
pub mod gfdm;
pub mod harness;
pub mod linalg;
pub mod oracle;

pub use num_complex::Complex64 as C64;

pub use complexity::{OpCounter, Stage};
pub use equalizer::{FastFilter, LmmseFilter};
pub use error::{Error, Result};
pub use gfdm::{Channel, GfdmParams, PrototypeFilter};
pub use linalg::{BlockCirculant, BlockDiagonal, CMat, CyclicTridiagonal};
