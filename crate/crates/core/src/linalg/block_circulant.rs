//! Block-circulant matrices and their block diagonalization.
//!
//! An `N × N` block-circulant matrix with `M` blocks of size `K × K` is stored
//! as its first block column `X_s = [X_0; X_1; …; X_{M−1}]`. Block `(i, j)` of
//! the dense matrix is `X_{(i−j) mod M}`.
//!
//! With the unitary ZAK transform `Z = F_M ⊗ I_K`, `Z·X·Zᴴ` is block diagonal
//! with eigen-blocks
//!
//! ```text
//! D_u = Σ_m ω^{u·m} X_m,     ω = exp(−j2π/M),
//! ```
//!
//! i.e. `√M` times the unitary ZAK transform of `X_s`. The inverse map is
//! `X_m = (1/M) Σ_u ω^{−u·m} D_u`.

use crate::error::{Error, Result};
use crate::linalg::dense::CMat;
use crate::linalg::fourier::{Direction, ZakPlan};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockCirculant {
    k: usize,
    m: usize,
    blocks: Vec<CMat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagonal {
    k: usize,
    m: usize,
    blocks: Vec<CMat>,
}

fn check_blocks(blocks: &[CMat]) -> Result<usize> {
    let first = blocks.first().ok_or(Error::EmptyInput)?;
    let k = first.rows();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    for b in blocks {
        if b.shape() != (k, k) {
            return Err(Error::dims(format!("{k}x{k} block"), format!("{:?}", b.shape())));
        }
    }
    Ok(k)
}

/// Applies the ZAK transform to every column of an `N × K` stack, scaling the
/// result by `scale`.
pub(crate) fn zak_columns(stack: &CMat, plan: &ZakPlan, dir: Direction, scale: f64) -> Result<CMat> {
    let mut out = CMat::zeros(stack.rows(), stack.cols());
    for c in 0..stack.cols() {
        let mut col = plan.apply(&stack.column(c), dir)?;
        for v in col.iter_mut() {
            *v *= scale;
        }
        out.set_column(c, &col);
    }
    Ok(out)
}

fn split_stack(stack: &CMat, k: usize, m: usize) -> Vec<CMat> {
    (0..m).map(|i| stack.submatrix(i * k, 0, k, k)).collect()
}

fn join_stack(blocks: &[CMat], k: usize) -> CMat {
    let mut stack = CMat::zeros(blocks.len() * k, k);
    for (i, b) in blocks.iter().enumerate() {
        stack.set_submatrix(i * k, 0, b);
    }
    stack
}

impl BlockCirculant {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        let k = check_blocks(&blocks)?;
        Ok(Self {
            k,
            m: blocks.len(),
            blocks,
        })
    }

    /// From the first `K` columns of the dense matrix (an `N × K` stack).
    pub fn from_first_columns(xs: &CMat, k: usize) -> Result<Self> {
        if k == 0 || xs.cols() != k || !xs.rows().is_multiple_of(k) || xs.rows() == 0 {
            return Err(Error::dims(format!("(M*{k}) x {k}"), format!("{:?}", xs.shape())));
        }
        let m = xs.rows() / k;
        Ok(Self {
            k,
            m,
            blocks: split_stack(xs, k, m),
        })
    }

    /// Reads the first block column of a dense matrix. No circularity check.
    pub fn from_dense(x: &CMat, k: usize) -> Result<Self> {
        if !x.is_square() || k == 0 || !x.rows().is_multiple_of(k) {
            return Err(Error::dims(
                format!("square, multiple of {k}"),
                format!("{:?}", x.shape()),
            ));
        }
        Self::from_first_columns(&x.submatrix(0, 0, x.rows(), k), k)
    }

    pub fn identity(k: usize, m: usize) -> Self {
        let mut blocks = vec![CMat::zeros(k, k); m];
        blocks[0] = CMat::identity(k);
        Self { k, m, blocks }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.k * self.m
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, m: usize) -> &CMat {
        &self.blocks[m]
    }

    pub fn first_columns(&self) -> CMat {
        join_stack(&self.blocks, self.k)
    }

    /// Number of stored complex coefficients (`M·K²`).
    pub fn coefficient_count(&self) -> usize {
        self.blocks.iter().map(|b| b.rows() * b.cols()).sum()
    }

    pub fn to_dense(&self) -> CMat {
        let (k, m) = (self.k, self.m);
        CMat::from_fn(self.n(), self.n(), |r, c| {
            let blk = (r / k + m - c / k) % m;
            self.blocks[blk][(r % k, c % k)]
        })
    }

    pub fn diagonalize(&self) -> BlockDiagonal {
        let plan = ZakPlan::new(self.k, self.m).expect("non-empty dimensions");
        self.diagonalize_with(&plan)
    }

    pub(crate) fn diagonalize_with(&self, plan: &ZakPlan) -> BlockDiagonal {
        let scale = (self.m as f64).sqrt();
        let z = zak_columns(&self.first_columns(), plan, Direction::Forward, scale).expect("plan matches dimensions");
        BlockDiagonal {
            k: self.k,
            m: self.m,
            blocks: split_stack(&z, self.k, self.m),
        }
    }

    fn check_same_shape(&self, other: &BlockCirculant) -> Result<()> {
        if (self.k, self.m) != (other.k, other.m) {
            return Err(Error::dims(
                format!("K={}, M={}", self.k, self.m),
                format!("K={}, M={}", other.k, other.m),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &BlockCirculant) -> Result<BlockCirculant> {
        self.check_same_shape(other)?;
        Ok(Self {
            k: self.k,
            m: self.m,
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect(),
        })
    }

    /// `self · other`, computed block-wise in the diagonalized domain.
    pub fn multiply(&self, other: &BlockCirculant) -> Result<BlockCirculant> {
        self.check_same_shape(other)?;
        let dx = self.diagonalize();
        let dy = other.diagonalize();
        let blocks = dx.blocks.iter().zip(&dy.blocks).map(|(a, b)| a.matmul(b)).collect();
        Ok(BlockDiagonal {
            k: self.k,
            m: self.m,
            blocks,
        }
        .reconstruct())
    }

    pub fn inverse(&self) -> Result<BlockCirculant> {
        let d = self.diagonalize();
        let blocks = d
            .blocks
            .iter()
            .enumerate()
            .map(|(u, b)| b.inverse().map_err(|_| Error::SingularBlock { block: u }))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockDiagonal {
            k: self.k,
            m: self.m,
            blocks,
        }
        .reconstruct())
    }

    /// Matrix-vector product `X·x` via `Zᴴ · blockdiag(D_u) · Z`.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n() {
            return Err(Error::dims(
                format!("length {}", self.n()),
                format!("length {}", x.len()),
            ));
        }
        let plan = ZakPlan::new(self.k, self.m)?;
        self.diagonalize_with(&plan).apply_conjugated(&plan, x, false)
    }
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        let k = check_blocks(&blocks)?;
        Ok(Self {
            k,
            m: blocks.len(),
            blocks,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.k * self.m
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, u: usize) -> &CMat {
        &self.blocks[u]
    }

    pub fn coefficient_count(&self) -> usize {
        self.blocks.iter().map(|b| b.rows() * b.cols()).sum()
    }

    /// The dense `N × N` matrix `blockdiag(D_0, …, D_{M−1})`.
    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.n(), self.n());
        for (u, b) in self.blocks.iter().enumerate() {
            out.set_submatrix(u * self.k, u * self.k, b);
        }
        out
    }

    pub fn reconstruct(&self) -> BlockCirculant {
        let plan = ZakPlan::new(self.k, self.m).expect("non-empty dimensions");
        self.reconstruct_with(&plan)
    }

    pub(crate) fn reconstruct_with(&self, plan: &ZakPlan) -> BlockCirculant {
        let scale = 1.0 / (self.m as f64).sqrt();
        let stack = zak_columns(&join_stack(&self.blocks, self.k), plan, Direction::Inverse, scale)
            .expect("plan matches dimensions");
        BlockCirculant {
            k: self.k,
            m: self.m,
            blocks: split_stack(&stack, self.k, self.m),
        }
    }

    /// `Zᴴ · blockdiag(B_u) · Z · x` where `B_u = D_u`, or `D_uᴴ` when
    /// `adjoint` is set.
    pub(crate) fn apply_conjugated(&self, plan: &ZakPlan, x: &[C64], adjoint: bool) -> Result<Vec<C64>> {
        let zx = plan.forward(x)?;
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        let k = self.k;
        for (u, b) in self.blocks.iter().enumerate() {
            let seg = &zx[u * k..(u + 1) * k];
            for r in 0..k {
                out[u * k + r] = if adjoint {
                    (0..k).map(|c| b[(c, r)].conj() * seg[c]).sum()
                } else {
                    (0..k).map(|c| b[(r, c)] * seg[c]).sum()
                };
            }
        }
        plan.inverse(&out)
    }
}
