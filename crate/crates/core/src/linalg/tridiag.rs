//! Cyclic (periodic) tridiagonal systems.
//!
//! The solver runs the Thomas algorithm on a modified tridiagonal matrix and
//! restores the two corner entries with a Sherman–Morrison rank-one update:
//!
//! ```text
//! A = T' + u·vᵀ,  u = (γ, 0, …, 0, β)ᵀ,  v = (1, 0, …, 0, α/γ)ᵀ
//! ```
//!
//! with `α = A[0, K−1]`, `β = A[K−1, 0]` and `γ = −A[0, 0]`. Each right-hand
//! side then costs one tridiagonal solve plus an `O(K)` correction.

use crate::error::{Error, Result};
use crate::linalg::dense::CMat;
use crate::C64;

const PIVOT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct CyclicTridiagonal {
    diag: Vec<C64>,
    /// `lower[i] = A[i+1, i]`
    lower: Vec<C64>,
    /// `upper[i] = A[i, i+1]`
    upper: Vec<C64>,
    top_right: C64,
    bottom_left: C64,
}

/// Solution of a cyclic tridiagonal system.
#[derive(Clone, Debug)]
pub struct CyclicSolution {
    pub x: CMat,
    /// Set when the structured elimination hit a vanishing pivot and the
    /// system was solved densely instead.
    pub dense_fallback: bool,
    /// Complex multiplications and divisions actually executed.
    pub executed_mults: u64,
}

impl CyclicTridiagonal {
    pub fn new(diag: Vec<C64>, lower: Vec<C64>, upper: Vec<C64>, top_right: C64, bottom_left: C64) -> Result<Self> {
        let k = diag.len();
        if k < 3 {
            return Err(Error::InvalidParameter(format!(
                "cyclic tridiagonal systems need K >= 3, got {k}"
            )));
        }
        if lower.len() != k - 1 || upper.len() != k - 1 {
            return Err(Error::dims(
                format!("{} off-diagonal entries", k - 1),
                format!("lower {}, upper {}", lower.len(), upper.len()),
            ));
        }
        Ok(Self {
            diag,
            lower,
            upper,
            top_right,
            bottom_left,
        })
    }

    /// Reads the cyclic tridiagonal part of a dense matrix; all other entries
    /// are ignored.
    pub fn from_dense(a: &CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("square matrix", format!("{:?}", a.shape())));
        }
        let k = a.rows();
        if k < 3 {
            return Self::new(
                vec![C64::new(0.0, 0.0); k],
                vec![],
                vec![],
                C64::default(),
                C64::default(),
            );
        }
        Self::new(
            (0..k).map(|i| a[(i, i)]).collect(),
            (0..k - 1).map(|i| a[(i + 1, i)]).collect(),
            (0..k - 1).map(|i| a[(i, i + 1)]).collect(),
            a[(0, k - 1)],
            a[(k - 1, 0)],
        )
    }

    pub fn k(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[C64] {
        &self.diag
    }

    pub fn lower(&self) -> &[C64] {
        &self.lower
    }

    pub fn upper(&self) -> &[C64] {
        &self.upper
    }

    pub fn top_right(&self) -> C64 {
        self.top_right
    }

    pub fn bottom_left(&self) -> C64 {
        self.bottom_left
    }

    pub fn to_dense(&self) -> CMat {
        let k = self.k();
        let mut a = CMat::zeros(k, k);
        for i in 0..k {
            a[(i, i)] = self.diag[i];
        }
        for i in 0..k - 1 {
            a[(i + 1, i)] = self.lower[i];
            a[(i, i + 1)] = self.upper[i];
        }
        a[(0, k - 1)] += self.top_right;
        a[(k - 1, 0)] += self.bottom_left;
        a
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.diag.iter().map(|d| d.norm()).fold(1.0, f64::max);
        let tol = tol * scale;
        self.diag.iter().all(|d| d.im.abs() <= tol)
            && self
                .lower
                .iter()
                .zip(&self.upper)
                .all(|(l, u)| (u - l.conj()).norm() <= tol)
            && (self.top_right - self.bottom_left.conj()).norm() <= tol
    }

    /// Multiplications charged by the cost model: `2K` for the factorization
    /// and `5K` per right-hand side.
    pub fn charged_mults(k: usize, rhs: usize) -> u64 {
        (2 * k + 5 * k * rhs) as u64
    }

    /// Solves `A·X = B` for every column of `B`.
    pub fn solve(&self, b: &CMat) -> Result<CyclicSolution> {
        let k = self.k();
        if b.rows() != k {
            return Err(Error::dims(format!("{k} rows"), format!("{} rows", b.rows())));
        }
        match self.solve_structured(b) {
            Some((x, executed_mults)) => Ok(CyclicSolution {
                x,
                dense_fallback: false,
                executed_mults,
            }),
            None => {
                log::warn!("cyclic tridiagonal elimination hit a vanishing pivot; solving densely");
                let x = self.to_dense().solve(b)?;
                Ok(CyclicSolution {
                    x,
                    dense_fallback: true,
                    executed_mults: 0,
                })
            }
        }
    }

    fn solve_structured(&self, b: &CMat) -> Option<(CMat, u64)> {
        let k = self.k();
        let scale = self.diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let tiny = |z: C64| z.norm() <= PIVOT_TOL * scale;
        let mut mults = 0u64;

        let gamma = -self.diag[0];
        if tiny(gamma) {
            return None;
        }
        let mut dmod = self.diag.clone();
        dmod[0] -= gamma;
        dmod[k - 1] -= self.top_right * self.bottom_left / gamma;
        mults += 2;

        // LU of the modified tridiagonal matrix: l[i] multiplies row i−1,
        // piv[i] is the i-th pivot.
        let mut l = vec![C64::default(); k];
        let mut piv = vec![C64::default(); k];
        piv[0] = dmod[0];
        for i in 1..k {
            if tiny(piv[i - 1]) {
                return None;
            }
            l[i] = self.lower[i - 1] / piv[i - 1];
            piv[i] = dmod[i] - l[i] * self.upper[i - 1];
            mults += 2;
        }
        if tiny(piv[k - 1]) {
            return None;
        }

        let thomas = |rhs: &mut [C64], mults: &mut u64| {
            for i in 1..k {
                let prev = rhs[i - 1];
                rhs[i] -= l[i] * prev;
            }
            rhs[k - 1] /= piv[k - 1];
            for i in (0..k - 1).rev() {
                let next = rhs[i + 1];
                rhs[i] = (rhs[i] - self.upper[i] * next) / piv[i];
            }
            *mults += (3 * k - 2) as u64;
        };

        let mut z = vec![C64::default(); k];
        z[0] = gamma;
        z[k - 1] = self.bottom_left;
        thomas(&mut z, &mut mults);
        let v_last = self.top_right / gamma;
        let denom = C64::new(1.0, 0.0) + z[0] + v_last * z[k - 1];
        mults += 2;
        if denom.norm() <= PIVOT_TOL {
            return None;
        }

        let mut x = CMat::zeros(k, b.cols());
        let mut col = vec![C64::default(); k];
        for c in 0..b.cols() {
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = b[(i, c)];
            }
            thomas(&mut col, &mut mults);
            let f = (col[0] + v_last * col[k - 1]) / denom;
            for (i, &zi) in z.iter().enumerate() {
                x[(i, c)] = col[i] - f * zi;
            }
            mults += 2 + k as u64;
        }
        if !x.is_finite() {
            return None;
        }
        Some((x, mults))
    }
}
