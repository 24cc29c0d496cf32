//! Antiholomorphic forms on the tangential variables, the Clifford operators
//! `e_j`/`ε_j`, the model Dirac operator `D₊` and the vacuum Szegő projector.
//!
//! The model space is the truncated Fock space tensored with the exterior
//! algebra on `m = n - 1` generators, enumerated oscillator-major.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{kron_csr, FockError, FockSpace, FockSpaceConfig, Layout, OscillatorMultiIndex, TruncatedOperator};
use crate::linalg::{singular_values, RANK_RTOL};
use crate::C64;

/// Minimum admissible `|<z₀', z₀>| = |cos θ|` for a deformed Szegő projector.
pub const PAIRING_FLOOR: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinorError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("form index {index} out of range 1..={num_vars}")]
    InvalidIndex { index: usize, num_vars: usize },
    #[error("form degree {degree} out of range 0..={num_vars}")]
    InvalidDegree { degree: usize, num_vars: usize },
    #[error("vacuum pairing |cos θ| = {pairing:.3e} is below the floor {floor:.0e}")]
    PairingFloor { pairing: f64, floor: f64 },
    #[error("invalid deformation target: {0}")]
    InvalidTarget(String),
}

/// Strictly increasing subset of `{1, ..., m}` labelling `ω̄^I`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormMultiIndex(pub Vec<usize>);

impl FormMultiIndex {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn parity(&self) -> Parity {
        Parity::of_degree(self.degree())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(d: usize) -> Self {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedBasisIndex {
    pub osc: OscillatorMultiIndex,
    pub form: FormMultiIndex,
}

impl GradedBasisIndex {
    pub fn new(osc: Vec<u32>, form: Vec<usize>) -> Self {
        Self { osc: OscillatorMultiIndex(osc), form: FormMultiIndex(form) }
    }

    pub fn total_degree(&self) -> usize {
        self.osc.degree() as usize + self.form.degree()
    }
}

/// All subsets of `{1..m}` in lexicographic order of their increasing
/// sequences: `∅, {1}, {1,2}, ..., {2}, ...`.
pub fn form_basis(m: usize) -> Vec<FormMultiIndex> {
    fn rec(prefix: &mut Vec<usize>, start: usize, m: usize, out: &mut Vec<FormMultiIndex>) {
        out.push(FormMultiIndex(prefix.clone()));
        for j in start..=m {
            prefix.push(j);
            rec(prefix, j + 1, m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(1 << m);
    rec(&mut Vec::new(), 1, m, &mut out);
    out
}

/// Nonzero entries `(row, col, sign)` of `ε_j` on the form basis.
fn wedge_entries(forms: &[FormMultiIndex], j: usize) -> Vec<(usize, usize, f64)> {
    let index: HashMap<&FormMultiIndex, usize> = forms.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut out = Vec::new();
    for (col, f) in forms.iter().enumerate() {
        if f.0.contains(&j) {
            continue;
        }
        let below = f.0.iter().filter(|&&k| k < j).count();
        let mut g = f.0.clone();
        g.insert(below, j);
        let row = index[&FormMultiIndex(g)];
        out.push((row, col, if below % 2 == 0 { 1.0 } else { -1.0 }));
    }
    out
}

/// Dense `ε_j` on the `2^m` form basis.
pub fn form_wedge_matrix(m: usize, j: usize) -> DMatrix<C64> {
    let forms = form_basis(m);
    let mut out = DMatrix::zeros(forms.len(), forms.len());
    for (r, c, s) in wedge_entries(&forms, j) {
        out[(r, c)] = C64::new(s, 0.0);
    }
    out
}

/// Dense `e_j`, the adjoint of [`form_wedge_matrix`].
pub fn form_contract_matrix(m: usize, j: usize) -> DMatrix<C64> {
    form_wedge_matrix(m, j).adjoint()
}

/// Kernel and range facts for the chiral Dirac operators on the guard block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub even_kernel_dim: usize,
    /// `Σ |<z₀, v>|²` over an orthonormal basis of the even kernel.
    pub even_kernel_vacuum_weight: f64,
    pub odd_kernel_dim: usize,
    /// Largest `|<z₀, D^odd e_k>|` over guard basis vectors `e_k`.
    pub odd_range_vacuum_overlap: f64,
}

/// Truncated Fock space tensored with antiholomorphic forms.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    fock: FockSpace,
    forms: Vec<FormMultiIndex>,
    form_index: HashMap<FormMultiIndex, usize>,
}

impl ModelSpace {
    pub fn new(config: FockSpaceConfig) -> Self {
        let forms = form_basis(config.num_vars);
        let form_index = forms.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        Self { fock: FockSpace::new(config), forms, form_index }
    }

    pub fn fock(&self) -> &FockSpace {
        &self.fock
    }

    pub fn config(&self) -> FockSpaceConfig {
        self.fock.config()
    }

    pub fn num_vars(&self) -> usize {
        self.config().num_vars
    }

    pub fn layout(&self) -> Layout {
        Layout { fock: self.config(), forms: true }
    }

    pub fn form_dim(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[FormMultiIndex] {
        &self.forms
    }

    pub fn dim(&self) -> usize {
        self.fock.dim() * self.form_dim()
    }

    pub fn basis_label(&self, i: usize) -> GradedBasisIndex {
        let fd = self.form_dim();
        GradedBasisIndex { osc: self.fock.basis()[i / fd].clone(), form: self.forms[i % fd].clone() }
    }

    pub fn index_of(&self, label: &GradedBasisIndex) -> Option<usize> {
        let o = self.fock.index_of(&label.osc)?;
        let f = self.form_index.get(&label.form)?;
        Some(o * self.form_dim() + f)
    }

    pub fn osc_degree(&self, i: usize) -> usize {
        self.fock.basis()[i / self.form_dim()].degree() as usize
    }

    pub fn form_degree(&self, i: usize) -> usize {
        self.forms[i % self.form_dim()].degree()
    }

    pub fn total_degree(&self, i: usize) -> usize {
        self.osc_degree(i) + self.form_degree(i)
    }

    pub fn parity(&self, i: usize) -> Parity {
        Parity::of_degree(self.form_degree(i))
    }

    /// Basis indices with the given form-degree parity, in basis order.
    pub fn sector_indices(&self, parity: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parity(i) == parity).collect()
    }

    /// Mask of states with oscillator degree `<= max_osc`.
    pub fn osc_degree_mask(&self, max_osc: usize) -> Vec<bool> {
        (0..self.dim()).map(|i| self.osc_degree(i) <= max_osc).collect()
    }

    /// Mask of states with oscillator degree `<= cutoff - guard`.
    pub fn guard_mask(&self) -> Vec<bool> {
        self.osc_degree_mask(self.config().guard_degree() as usize)
    }

    fn check_var(&self, j: usize) -> Result<(), SpinorError> {
        if j == 0 || j > self.num_vars() {
            return Err(SpinorError::InvalidIndex { index: j, num_vars: self.num_vars() });
        }
        Ok(())
    }

    fn lift_osc(&self, op: &TruncatedOperator) -> TruncatedOperator {
        let id: CsrMatrix<C64> = CsrMatrix::identity(self.form_dim());
        kron_csr(op.csr(), &id, op.degree_shift(), self.layout())
    }

    fn lift_form(&self, form: &CsrMatrix<C64>, shift: i32) -> TruncatedOperator {
        let id: CsrMatrix<C64> = CsrMatrix::identity(self.fock.dim());
        kron_csr(&id, form, Some(shift), self.layout())
    }

    fn diagonal(&self, f: impl Fn(usize) -> f64, shift: Option<i32>) -> TruncatedOperator {
        let mut coo = CooMatrix::new(self.dim(), self.dim());
        for i in 0..self.dim() {
            let v = f(i);
            if v != 0.0 {
                coo.push(i, i, C64::new(v, 0.0));
            }
        }
        TruncatedOperator::from_coo(&coo, shift, self.layout())
    }

    fn form_wedge_csr(&self, j: usize) -> CsrMatrix<C64> {
        let fd = self.form_dim();
        let mut coo = CooMatrix::new(fd, fd);
        for (r, c, s) in wedge_entries(&self.forms, j) {
            coo.push(r, c, C64::new(s, 0.0));
        }
        CsrMatrix::from(&coo)
    }

    /// `ε_j`, acting on the form factor.
    pub fn wedge(&self, j: usize) -> Result<TruncatedOperator, SpinorError> {
        self.check_var(j)?;
        Ok(self.lift_form(&self.form_wedge_csr(j), 1))
    }

    /// `e_j = ε_j^*`.
    pub fn contract(&self, j: usize) -> Result<TruncatedOperator, SpinorError> {
        Ok(self.wedge(j)?.adjoint())
    }

    pub fn creation(&self, j: usize) -> Result<TruncatedOperator, SpinorError> {
        Ok(self.lift_osc(&self.fock.creation(j)?))
    }

    pub fn annihilation(&self, j: usize) -> Result<TruncatedOperator, SpinorError> {
        Ok(self.lift_osc(&self.fock.annihilation(j)?))
    }

    pub fn harmonic_oscillator(&self) -> TruncatedOperator {
        self.lift_osc(&self.fock.harmonic_oscillator())
    }

    pub fn identity(&self) -> TruncatedOperator {
        TruncatedOperator::identity(self.layout(), self.dim())
    }

    pub fn zero(&self) -> TruncatedOperator {
        TruncatedOperator::zero(self.layout(), self.dim())
    }

    /// `D₊ = i Σ_j (C_j e_j - C_j^* ε_j)`.
    pub fn dirac_plus(&self) -> TruncatedOperator {
        let mut acc = self.zero();
        for j in 1..=self.num_vars() {
            let c = self.fock.creation(j).expect("valid index");
            let eps = self.form_wedge_csr(j);
            let e = eps.transpose();
            let ce = kron_csr(c.csr(), &e, Some(0), self.layout());
            let cs_eps = kron_csr(c.adjoint().csr(), &eps, Some(0), self.layout());
            acc = acc.add(&ce.sub(&cs_eps).expect("same layout")).expect("same layout");
        }
        acc.scale(C64::new(0.0, 1.0))
    }

    /// `D₊` restricted to the even form sector, `D₊ ∘ Π_even`; maps even to odd.
    pub fn dirac_plus_even(&self) -> TruncatedOperator {
        self.dirac_plus().compose(&self.sector_projection(Parity::Even)).expect("same layout")
    }

    /// `D₊ ∘ Π_odd`; maps odd to even.
    pub fn dirac_plus_odd(&self) -> TruncatedOperator {
        self.dirac_plus().compose(&self.sector_projection(Parity::Odd)).expect("same layout")
    }

    /// `Π_q`, projection onto form degree `q`.
    pub fn degree_projection(&self, q: usize) -> Result<TruncatedOperator, SpinorError> {
        if q > self.num_vars() {
            return Err(SpinorError::InvalidDegree { degree: q, num_vars: self.num_vars() });
        }
        Ok(self.diagonal(|i| if self.form_degree(i) == q { 1.0 } else { 0.0 }, Some(0)))
    }

    pub fn sector_projection(&self, parity: Parity) -> TruncatedOperator {
        self.diagonal(|i| if self.parity(i) == parity { 1.0 } else { 0.0 }, Some(0))
    }

    /// `Σ_q q Π_q`.
    pub fn form_number(&self) -> TruncatedOperator {
        self.diagonal(|i| self.form_degree(i) as f64, Some(0))
    }

    pub fn basis_vector(&self, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = C64::new(1.0, 0.0);
        v
    }

    /// `z₀ = vacuum ⊗ ω̄^∅`, always basis index 0.
    pub fn vacuum(&self) -> DVector<C64> {
        self.basis_vector(0)
    }

    pub fn vacuum_szego(&self) -> TruncatedOperator {
        self.diagonal(|i| if i == 0 { 1.0 } else { 0.0 }, Some(0))
    }

    /// `z₀' = cos θ z₀ + sin θ t` for a basis target `t`.
    pub fn deformed_vacuum(&self, theta: f64, target: &GradedBasisIndex) -> Result<DVector<C64>, SpinorError> {
        let t = self
            .index_of(target)
            .ok_or_else(|| SpinorError::InvalidTarget(format!("{target:?} is not in the truncated basis")))?;
        if t == 0 {
            return Err(SpinorError::InvalidTarget("target must be orthogonal to the vacuum".into()));
        }
        if target.form.parity() != Parity::Even {
            return Err(SpinorError::InvalidTarget("target must have even form degree".into()));
        }
        let pairing = theta.cos().abs();
        if pairing < PAIRING_FLOOR {
            return Err(SpinorError::PairingFloor { pairing, floor: PAIRING_FLOOR });
        }
        let mut z = self.vacuum() * C64::new(theta.cos(), 0.0);
        z[t] += C64::new(theta.sin(), 0.0);
        Ok(z)
    }

    /// Rank-one orthogonal projector onto [`Self::deformed_vacuum`].
    pub fn deformed_szego(&self, theta: f64, target: &GradedBasisIndex) -> Result<TruncatedOperator, SpinorError> {
        let z = self.deformed_vacuum(theta, target)?;
        Ok(self.rank_one(&z, &z))
    }

    /// `x y^*` as a sparse operator.
    pub fn rank_one(&self, x: &DVector<C64>, y: &DVector<C64>) -> TruncatedOperator {
        let mut coo = CooMatrix::new(self.dim(), self.dim());
        let zero = C64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| **v != zero) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| **v != zero) {
                coo.push(i, j, xi * yj.conj());
            }
        }
        TruncatedOperator::from_coo(&coo, None, self.layout())
    }

    /// Kernel of `D₊^even` and injectivity of `D₊^odd` on the guard block.
    ///
    /// `D₊` preserves total (oscillator + form) degree, so the singular value
    /// decomposition is taken one total-degree block at a time.
    pub fn dirac_kernel_report(&self) -> KernelReport {
        let d = self.dirac_plus();
        let g = self.config().guard_degree() as usize;
        let max_total = g + self.num_vars();
        let mut rep = KernelReport {
            even_kernel_dim: 0,
            even_kernel_vacuum_weight: 0.0,
            odd_kernel_dim: 0,
            odd_range_vacuum_overlap: 0.0,
        };
        for t in 0..=max_total {
            for parity in [Parity::Even, Parity::Odd] {
                let cols: Vec<usize> = (0..self.dim())
                    .filter(|&i| self.total_degree(i) == t && self.osc_degree(i) <= g && self.parity(i) == parity)
                    .collect();
                if cols.is_empty() {
                    continue;
                }
                let rows: Vec<usize> =
                    (0..self.dim()).filter(|&i| self.total_degree(i) == t && self.parity(i) == parity.flip()).collect();
                let block = d.submatrix(&rows, &cols);
                let (kdim, weight) = null_space_with_vacuum_weight(&block, &cols);
                match parity {
                    Parity::Even => {
                        rep.even_kernel_dim += kdim;
                        rep.even_kernel_vacuum_weight += weight;
                    }
                    Parity::Odd => {
                        rep.odd_kernel_dim += kdim;
                        if let Some(p) = rows.iter().position(|&r| r == 0) {
                            let overlap = block.row(p).iter().map(|z| z.norm()).fold(0.0, f64::max);
                            rep.odd_range_vacuum_overlap = rep.odd_range_vacuum_overlap.max(overlap);
                        }
                    }
                }
            }
        }
        rep
    }
}

/// Nullity of `block` and the squared weight of the basis vector with global
/// index 0 in its null space.
fn null_space_with_vacuum_weight(block: &DMatrix<C64>, cols: &[usize]) -> (usize, f64) {
    let ncols = block.ncols();
    if block.nrows() == 0 {
        let w = if cols.contains(&0) { 1.0 } else { 0.0 };
        return (ncols, w);
    }
    let s = singular_values(block);
    let top = s.first().copied().unwrap_or(0.0).max(1.0);
    let rank = s.iter().filter(|&&v| v > RANK_RTOL * top).count();
    let nullity = ncols - rank;
    if nullity == 0 {
        return (0, 0.0);
    }
    let Some(p) = cols.iter().position(|&c| c == 0) else {
        return (nullity, 0.0);
    };
    // Weight of e_p in ker B equals 1 - |row p of pinv(B) B|.
    let pinv = crate::linalg::pinv(block, RANK_RTOL, 0.0);
    let proj_range = &pinv * block;
    let mut e = DVector::zeros(ncols);
    e[p] = C64::new(1.0, 0.0);
    let in_coimage = (&proj_range * &e).norm_squared();
    (nullity, 1.0 - in_coimage)
}
