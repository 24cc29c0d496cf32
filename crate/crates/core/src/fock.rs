//! Truncated matrix representation of the harmonic-oscillator algebra on
//! `n - 1` real variables.
//!
//! States are the orthonormal Hermite functions labelled by occupation
//! multi-indices `k` with `|k| <= cutoff`. With this normalization
//! `C_j = w_j - d/dw_j` raises level `j` with coefficient `sqrt(2 (m_j + 1))`
//! and `C_j^* = w_j + d/dw_j` lowers it with coefficient `sqrt(2 m_j)`, so that
//! `[C_j, C_k^*] = -2 delta_jk` holds exactly away from the top shell.
//!
//! Matrix entries that would leave the truncation are dropped. Identities are
//! therefore only exact on states of degree `<= cutoff - guard`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::C64;

/// Default tolerance for identity assertions on the guard block.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("variable index {index} out of range 1..={num_vars}")]
    InvalidVariable { index: usize, num_vars: usize },
    #[error("invalid Fock configuration: {0}")]
    InvalidConfig(String),
    #[error("operators act on different truncated spaces")]
    LayoutMismatch,
}

/// Occupation numbers of the `n - 1` oscillators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OscillatorMultiIndex(pub Vec<u32>);

impl OscillatorMultiIndex {
    pub fn vacuum(num_vars: usize) -> Self {
        Self(vec![0; num_vars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpaceConfig {
    /// `n - 1`
    pub num_vars: usize,
    /// Maximum total oscillator degree kept.
    pub cutoff: u32,
    /// Margin below the cutoff; identities are asserted on degrees `<= cutoff - guard`.
    pub guard: u32,
}

impl FockSpaceConfig {
    pub fn new(num_vars: usize, cutoff: u32, guard: u32) -> Result<Self, FockError> {
        if num_vars == 0 {
            return Err(FockError::InvalidConfig("num_vars must be at least 1".into()));
        }
        if cutoff < guard + 2 {
            return Err(FockError::InvalidConfig(format!(
                "cutoff {cutoff} must be at least guard + 2 = {}",
                guard + 2
            )));
        }
        Ok(Self { num_vars, cutoff, guard })
    }

    /// Highest oscillator degree of the guard subspace.
    pub fn guard_degree(&self) -> u32 {
        self.cutoff - self.guard
    }
}

/// Enumerates all multi-indices of total degree `<= cutoff` in graded
/// lexicographic order: by degree, then lexicographically descending so that
/// `(1,0,..)` precedes `(0,1,..)`.
pub fn graded_lex_basis(num_vars: usize, cutoff: u32) -> Vec<OscillatorMultiIndex> {
    fn fill(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<OscillatorMultiIndex>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(OscillatorMultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            fill(prefix, remaining - first, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=cutoff {
        fill(&mut Vec::with_capacity(num_vars), d, num_vars, &mut out);
    }
    out
}

/// Which truncated space a [`TruncatedOperator`] acts on.
///
/// `forms = true` means the tensor product with the exterior algebra on
/// `num_vars` antiholomorphic directions (oscillator-major, form-minor).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub fock: FockSpaceConfig,
    pub forms: bool,
}

impl Layout {
    pub fn form_dim(&self) -> usize {
        if self.forms {
            1 << self.fock.num_vars
        } else {
            1
        }
    }
}

/// The enumerated truncated Fock basis.
#[derive(Clone, Debug)]
pub struct FockSpace {
    config: FockSpaceConfig,
    basis: Vec<OscillatorMultiIndex>,
    index: HashMap<OscillatorMultiIndex, usize>,
}

impl FockSpace {
    pub fn new(config: FockSpaceConfig) -> Self {
        let basis = graded_lex_basis(config.num_vars, config.cutoff);
        let index = basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Self { config, basis, index }
    }

    pub fn config(&self) -> FockSpaceConfig {
        self.config
    }

    pub fn layout(&self) -> Layout {
        Layout { fock: self.config, forms: false }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[OscillatorMultiIndex] {
        &self.basis
    }

    pub fn index_of(&self, k: &OscillatorMultiIndex) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Mask of basis states with degree `<= guard_degree`.
    pub fn guard_mask(&self) -> Vec<bool> {
        let g = self.config.guard_degree();
        self.basis.iter().map(|k| k.degree() <= g).collect()
    }

    fn check_var(&self, j: usize) -> Result<usize, FockError> {
        if j == 0 || j > self.config.num_vars {
            return Err(FockError::InvalidVariable { index: j, num_vars: self.config.num_vars });
        }
        Ok(j - 1)
    }

    /// `C_j = w_j - d/dw_j`.
    pub fn creation(&self, j: usize) -> Result<TruncatedOperator, FockError> {
        let v = self.check_var(j)?;
        let mut coo = CooMatrix::new(self.dim(), self.dim());
        for (col, k) in self.basis.iter().enumerate() {
            let mut up = k.clone();
            up.0[v] += 1;
            if let Some(row) = self.index_of(&up) {
                let m = k.0[v] as f64;
                coo.push(row, col, C64::new((2.0 * (m + 1.0)).sqrt(), 0.0));
            }
        }
        Ok(TruncatedOperator::from_coo(&coo, Some(1), self.layout()))
    }

    /// `C_j^* = w_j + d/dw_j`; the conjugate transpose of [`Self::creation`].
    pub fn annihilation(&self, j: usize) -> Result<TruncatedOperator, FockError> {
        Ok(self.creation(j)?.adjoint())
    }

    /// `H_0 = sum_j w_j^2 - d^2/dw_j^2`, diagonal with entries `2|k| + (n - 1)`.
    pub fn harmonic_oscillator(&self) -> TruncatedOperator {
        let nv = self.config.num_vars as f64;
        let mut coo = CooMatrix::new(self.dim(), self.dim());
        for (i, k) in self.basis.iter().enumerate() {
            coo.push(i, i, C64::new(2.0 * k.degree() as f64 + nv, 0.0));
        }
        TruncatedOperator::from_coo(&coo, Some(0), self.layout())
    }

    pub fn identity(&self) -> TruncatedOperator {
        TruncatedOperator::identity(self.layout(), self.dim())
    }
}

/// A complex matrix on a truncated basis together with the change in total
/// (oscillator + form) degree it effects. `degree_shift = None` marks an
/// inhomogeneous operator.
///
/// Storage is compressed sparse row; all operators built here are very sparse
/// and the tensor-product spaces get large quickly.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    matrix: CsrMatrix<C64>,
    degree_shift: Option<i32>,
    layout: Layout,
}

impl TruncatedOperator {
    pub fn from_coo(coo: &CooMatrix<C64>, degree_shift: Option<i32>, layout: Layout) -> Self {
        Self { matrix: CsrMatrix::from(coo), degree_shift, layout }
    }

    pub fn from_csr(matrix: CsrMatrix<C64>, degree_shift: Option<i32>, layout: Layout) -> Self {
        Self { matrix, degree_shift, layout }
    }

    pub fn from_dense(m: &DMatrix<C64>, degree_shift: Option<i32>, layout: Layout) -> Self {
        let mut coo = CooMatrix::new(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    coo.push(i, j, z);
                }
            }
        }
        Self::from_coo(&coo, degree_shift, layout)
    }

    pub fn identity(layout: Layout, dim: usize) -> Self {
        Self { matrix: CsrMatrix::identity(dim), degree_shift: Some(0), layout }
    }

    pub fn zero(layout: Layout, dim: usize) -> Self {
        Self { matrix: CsrMatrix::zeros(dim, dim), degree_shift: Some(0), layout }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn degree_shift(&self) -> Option<i32> {
        self.degree_shift
    }

    pub fn csr(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from(&self.matrix)
    }

    fn check(&self, other: &Self) -> Result<(), FockError> {
        if self.layout != other.layout || self.dim() != other.dim() {
            return Err(FockError::LayoutMismatch);
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self, FockError> {
        self.check(other)?;
        let shift = match (self.degree_shift, other.degree_shift) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(Self { matrix: &self.matrix * &other.matrix, degree_shift: shift, layout: self.layout })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = self.matrix.transpose();
        for v in t.values_mut() {
            *v = v.conj();
        }
        Self { matrix: t, degree_shift: self.degree_shift.map(|s| -s), layout: self.layout }
    }

    /// `ab - ba`.
    pub fn commutator(&self, other: &Self) -> Result<Self, FockError> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.sub(&ba)
    }

    /// `ab + ba`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self, FockError> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.add(&ba)
    }

    fn combined_shift(&self, other: &Self) -> Option<i32> {
        if self.matrix.nnz() == 0 {
            return other.degree_shift;
        }
        if other.matrix.nnz() == 0 {
            return self.degree_shift;
        }
        match (self.degree_shift, other.degree_shift) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        self.check(other)?;
        let shift = self.combined_shift(other);
        Ok(Self { matrix: &self.matrix + &other.matrix, degree_shift: shift, layout: self.layout })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FockError> {
        self.check(other)?;
        let shift = self.combined_shift(other);
        Ok(Self { matrix: &self.matrix - &other.matrix, degree_shift: shift, layout: self.layout })
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.matrix.clone();
        for v in m.values_mut() {
            *v *= s;
        }
        Self { matrix: m, degree_shift: self.degree_shift, layout: self.layout }
    }

    pub fn apply(&self, x: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        let mut y = nalgebra::DVector::zeros(self.dim());
        for (i, j, v) in self.matrix.triplet_iter() {
            y[i] += v * x[j];
        }
        y
    }

    /// Dense submatrix with the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<C64> {
        let mut pos = vec![usize::MAX; self.matrix.ncols()];
        for (k, &c) in cols.iter().enumerate() {
            pos[c] = k;
        }
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            let row = self.matrix.row(r);
            for (&c, v) in row.col_indices().iter().zip(row.values()) {
                if pos[c] != usize::MAX {
                    out[(i, pos[c])] = *v;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.values().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude over columns selected by `cols` (all rows).
    pub fn max_abs_on_columns(&self, cols: &[bool]) -> f64 {
        self.matrix
            .triplet_iter()
            .filter(|(_, j, _)| cols[*j])
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `self - other` on the selected columns.
    pub fn max_diff_on_columns(&self, other: &Self, cols: &[bool]) -> Result<f64, FockError> {
        Ok(self.sub(other)?.max_abs_on_columns(cols))
    }

    /// Bitwise equality of the stored matrices (same sparsity and values).
    pub fn bit_equal(&self, other: &Self) -> bool {
        self.layout == other.layout && self.to_dense() == other.to_dense()
    }

    /// Kronecker product `self ⊗ other` written into `layout`.
    pub fn kron(&self, other: &Self, layout: Layout) -> Self {
        kron_csr(&self.matrix, &other.matrix, self.degree_shift.zip(other.degree_shift).map(|(a, b)| a + b), layout)
    }
}

pub(crate) fn kron_csr(a: &CsrMatrix<C64>, b: &CsrMatrix<C64>, shift: Option<i32>, layout: Layout) -> TruncatedOperator {
    let (br, bc) = (b.nrows(), b.ncols());
    let mut coo = CooMatrix::new(a.nrows() * br, a.ncols() * bc);
    for (i1, j1, v1) in a.triplet_iter() {
        for (i2, j2, v2) in b.triplet_iter() {
            coo.push(i1 * br + i2, j1 * bc + j2, v1 * v2);
        }
    }
    TruncatedOperator::from_coo(&coo, shift, layout)
}
