//! Dense and structured complex linear algebra.

pub mod block_circulant;
pub mod dense;
pub mod fourier;
pub mod text;
pub mod tridiag;

pub use block_circulant::{BlockCirculant, BlockDiagonal};
pub use dense::{CMat, Lu};
pub use fourier::{dft, zak_forward, zak_inverse, DftPlan, Direction, ZakPlan};
pub use tridiag::{CyclicSolution, CyclicTridiagonal};
