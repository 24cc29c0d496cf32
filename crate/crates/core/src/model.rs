//! Block model operators at a positive contact direction: the Calderon,
//! boundary-condition and comparison models on the truncated Fock ⊗ forms
//! space, together with the explicit solution formulas for the comparison
//! model and a certification report.
//!
//! Blocks map `(u, v)` to `(a, b)` where `u, a` live in the even form sector
//! and `v, b` in the odd form sector, for both chiralities. The Heisenberg
//! homogeneity variable is evaluated at `η₀ = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockSpaceConfig, TruncatedOperator};
use crate::linalg::{max_abs, pinv, singular_values, RANK_RTOL};
use crate::spinor::{GradedBasisIndex, ModelSpace, Parity, SpinorError};
use crate::symbol::Chirality;
use crate::C64;

/// Singular values below this fraction of the largest count as zero in
/// finite-rank certificates.
pub const FINITE_RANK_RTOL: f64 = 1e-8;
/// Rank bound for deformed-minus-undeformed inverse blocks.
pub const FINITE_RANK_BOUND: usize = 4;
/// Guard margin below the cutoff for right-hand sides.
pub const RHS_GUARD: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Spinor(#[from] SpinorError),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("right-hand side has weight {weight:.3e} outside the guard subspace (basis index {index})")]
    RhsOutsideGuard { index: usize, weight: f64 },
    #[error("right-hand side has length ({a}, {b}), expected ({ea}, {eb})")]
    RhsShape { a: usize, b: usize, ea: usize, eb: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Complex dimension of the domain.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub cutoff: u32,
    /// Szegő deformation angle.
    pub theta: f64,
    /// Deformation direction; must have form degree 0.
    pub target: GradedBasisIndex,
    pub tol: f64,
}

impl ModelConfig {
    /// `α = 1`, `β = n - 1`, undeformed, target `|2,0,..⟩ ⊗ ω̄^∅`.
    pub fn kahler(n: usize, cutoff: u32) -> Self {
        let mut osc = vec![0; n.saturating_sub(1).max(1)];
        osc[0] = 2;
        Self {
            n,
            alpha: 1.0,
            beta: n as f64 - 1.0,
            cutoff,
            theta: 0.0,
            target: GradedBasisIndex::new(osc, vec![]),
            tol: 1e-9,
        }
    }

    pub fn with_hessian(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn fock_config(&self) -> Result<FockSpaceConfig, ModelError> {
        FockSpaceConfig::new(self.n - 1, self.cutoff, RHS_GUARD)
            .map_err(|e| ModelError::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 2 {
            return Err(ModelError::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(ModelError::InvalidConfig("alpha must be positive".into()));
        }
        if !self.beta.is_finite() || !self.theta.is_finite() {
            return Err(ModelError::InvalidConfig("beta and theta must be finite".into()));
        }
        if !(self.tol > 0.0) {
            return Err(ModelError::InvalidConfig("tol must be positive".into()));
        }
        if self.target.osc.levels().len() != self.n - 1 {
            return Err(ModelError::InvalidConfig(format!("target must have {} oscillator levels", self.n - 1)));
        }
        if self.target.form.degree() != 0 {
            return Err(ModelError::InvalidConfig("deformation target must have form degree 0".into()));
        }
        if self.target.osc.degree() + RHS_GUARD > self.cutoff {
            return Err(ModelError::InvalidConfig("deformation target lies outside the guard subspace".into()));
        }
        self.fock_config()?;
        Ok(())
    }
}

pub type HeisenbergOrders = [[Option<i32>; 2]; 2];

/// Declared Heisenberg orders of the comparison model blocks.
pub const COMPARISON_ORDERS: HeisenbergOrders = [[Some(0), Some(-1)], [Some(-1), Some(-2)]];
/// Declared Heisenberg orders of the parametrix blocks.
pub const PARAMETRIX_ORDERS: HeisenbergOrders = [[Some(0), Some(1)], [Some(1), Some(1)]];

/// `2×2` block operator with a Heisenberg order per block; `None` marks a
/// zero block. Blocks are full-space operators whose column sector is even
/// for block column 0 and odd for block column 1, and likewise for rows.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub blocks: [[TruncatedOperator; 2]; 2],
    pub orders: HeisenbergOrders,
}

fn principal_sum(x: (&TruncatedOperator, Option<i32>), y: (&TruncatedOperator, Option<i32>)) -> (TruncatedOperator, Option<i32>) {
    match (x.1, y.1) {
        (None, _) => (y.0.clone(), y.1),
        (_, None) => (x.0.clone(), x.1),
        (Some(p), Some(q)) if p > q => (x.0.clone(), x.1),
        (Some(p), Some(q)) if p < q => (y.0.clone(), y.1),
        _ => {
            let s = x.0.add(y.0).expect("blocks share a layout");
            if s.max_abs() == 0.0 {
                (s, None)
            } else {
                (s, x.1)
            }
        }
    }
}

impl BlockOperator {
    fn new(space: &ModelSpace, entries: [[(Option<TruncatedOperator>, Option<i32>); 2]; 2]) -> Self {
        let orders = entries_orders(&entries);
        let blocks = entries.map(|row| row.map(|(op, _)| op.unwrap_or_else(|| space.zero())));
        Self { blocks, orders }
    }

    pub fn identity(space: &ModelSpace) -> Self {
        Self::new(
            space,
            [
                [(Some(space.sector_projection(Parity::Even)), Some(0)), (None, None)],
                [(None, None), (Some(space.sector_projection(Parity::Odd)), Some(0))],
            ],
        )
    }

    /// Sum keeping only the leading Heisenberg order in each block.
    pub fn principal_add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                let (b, o) = principal_sum((&self.blocks[i][j], self.orders[i][j]), (&other.blocks[i][j], other.orders[i][j]));
                out.blocks[i][j] = b;
                out.orders[i][j] = o;
            }
        }
        out
    }

    /// Composition keeping only the leading Heisenberg order in each block.
    pub fn principal_compose(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..2 {
            for k in 0..2 {
                let mut acc: (TruncatedOperator, Option<i32>) = (self.blocks[i][k].scale(C64::new(0.0, 0.0)), None);
                for j in 0..2 {
                    let order = match (self.orders[i][j], other.orders[j][k]) {
                        (Some(p), Some(q)) => Some(p + q),
                        _ => None,
                    };
                    if order.is_none() {
                        continue;
                    }
                    let mut prod = self.blocks[i][j].compose(&other.blocks[j][k]).expect("blocks share a layout");
                    let order = if prod.max_abs() == 0.0 { None } else { order };
                    if order.is_none() {
                        prod = prod.scale(C64::new(0.0, 0.0));
                    }
                    acc = principal_sum((&acc.0, acc.1), (&prod, order));
                }
                out.blocks[i][k] = acc.0;
                out.orders[i][k] = acc.1;
            }
        }
        out
    }

    /// `Id - self` in the principal-symbol sense; lower-order terms of blocks
    /// where `self` has order 0 are lost.
    pub fn complement(&self, space: &ModelSpace) -> Self {
        let mut neg = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                neg.blocks[i][j] = self.blocks[i][j].scale(C64::new(-1.0, 0.0));
            }
        }
        BlockOperator::identity(space).principal_add(&neg)
    }

    /// Dense matrix with rows `(a ∈ E, b ∈ O)` and columns `(u ∈ E, v ∈ O)`.
    pub fn to_dense(&self, space: &ModelSpace) -> DMatrix<C64> {
        let e = space.sector_indices(Parity::Even);
        let o = space.sector_indices(Parity::Odd);
        let sectors = [&e, &o];
        let (de, d_o) = (e.len(), o.len());
        let mut out = DMatrix::zeros(de + d_o, de + d_o);
        for i in 0..2 {
            for j in 0..2 {
                let sub = self.blocks[i][j].submatrix(sectors[i], sectors[j]);
                out.view_mut((i * de, j * de), (sub.nrows(), sub.ncols())).copy_from(&sub);
            }
        }
        out
    }

    /// Largest entry difference between corresponding blocks, restricted to
    /// the sector rows/columns they act on.
    pub fn max_block_diff(&self, other: &Self, space: &ModelSpace) -> f64 {
        max_abs(&(self.to_dense(space) - other.to_dense(space)))
    }
}

fn entries_orders(entries: &[[(Option<TruncatedOperator>, Option<i32>); 2]; 2]) -> [[Option<i32>; 2]; 2] {
    let mut o = [[None; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = if entries[i][j].0.is_some() { entries[i][j].1 } else { None };
        }
    }
    o
}

/// Operators shared by all model builders for one configuration.
struct Ingredients {
    pi_prime: TruncatedOperator,
    pi_e: TruncatedOperator,
    pi_o: TruncatedOperator,
    ad_e: TruncatedOperator,
    ad_o: TruncatedOperator,
    h: TruncatedOperator,
    alpha2_beta: TruncatedOperator,
}

fn ingredients(space: &ModelSpace, cfg: &ModelConfig) -> Result<Ingredients, ModelError> {
    let alpha = C64::new(cfg.alpha, 0.0);
    let pi_o = space.sector_projection(Parity::Odd);
    Ok(Ingredients {
        pi_prime: space.deformed_szego(cfg.theta, &cfg.target)?,
        pi_e: space.sector_projection(Parity::Even),
        ad_e: space.dirac_plus_even().scale(alpha),
        ad_o: space.dirac_plus_odd().scale(alpha),
        h: space.harmonic_oscillator().compose(&pi_o).expect("same layout").scale(alpha * alpha),
        alpha2_beta: pi_o.scale(C64::new(cfg.alpha * cfg.alpha * cfg.beta, 0.0)),
        pi_o,
    })
}

fn checked_space(cfg: &ModelConfig) -> Result<ModelSpace, ModelError> {
    cfg.validate()?;
    Ok(ModelSpace::new(cfg.fock_config()?))
}

/// Model of the Calderon projector `P₊` (or `Id - P₊` when `complement`).
pub fn build_calderon_model(chirality: Chirality, complement: bool, cfg: &ModelConfig) -> Result<BlockOperator, ModelError> {
    let space = checked_space(cfg)?;
    calderon_model_on(&space, chirality, complement, cfg)
}

fn calderon_model_on(space: &ModelSpace, chirality: Chirality, complement: bool, cfg: &ModelConfig) -> Result<BlockOperator, ModelError> {
    let g = ingredients(space, cfg)?;
    let minus = |t: &TruncatedOperator| t.scale(C64::new(-1.0, 0.0));
    let h_minus = g.h.sub(&g.alpha2_beta).expect("same layout");
    let h_plus = g.h.add(&g.alpha2_beta).expect("same layout");
    let entries = match (chirality, complement) {
        (Chirality::Even, false) => [
            [(Some(g.pi_e), Some(0)), (Some(g.ad_o), Some(-1))],
            [(Some(g.ad_e), Some(-1)), (Some(h_minus), Some(-2))],
        ],
        (Chirality::Even, true) => [
            [(Some(h_on_even(space, cfg, 1.0)), Some(-2)), (Some(minus(&g.ad_o)), Some(-1))],
            [(Some(minus(&g.ad_e)), Some(-1)), (Some(g.pi_o), Some(0))],
        ],
        (Chirality::Odd, false) => [
            [(Some(h_on_even(space, cfg, -1.0)), Some(-2)), (Some(g.ad_o), Some(-1))],
            [(Some(g.ad_e), Some(-1)), (Some(g.pi_o), Some(0))],
        ],
        (Chirality::Odd, true) => [
            [(Some(g.pi_e), Some(0)), (Some(minus(&g.ad_o)), Some(-1))],
            [(Some(minus(&g.ad_e)), Some(-1)), (Some(h_plus), Some(-2))],
        ],
    };
    Ok(BlockOperator::new(space, entries))
}

/// `α²H₀ + sign·α²β` on the even sector.
fn h_on_even(space: &ModelSpace, cfg: &ModelConfig, sign: f64) -> TruncatedOperator {
    let a2 = cfg.alpha * cfg.alpha;
    let pi_e = space.sector_projection(Parity::Even);
    let h = space.harmonic_oscillator().compose(&pi_e).expect("same layout").scale(C64::new(a2, 0.0));
    h.add(&pi_e.scale(C64::new(sign * a2 * cfg.beta, 0.0))).expect("same layout")
}

/// Model of the boundary condition projector: `diag(π₀', Id)` for even,
/// `diag(Id - π₀', 0)` for odd chirality.
pub fn build_boundary_model(chirality: Chirality, cfg: &ModelConfig) -> Result<BlockOperator, ModelError> {
    let space = checked_space(cfg)?;
    boundary_model_on(&space, chirality, cfg)
}

fn boundary_model_on(space: &ModelSpace, chirality: Chirality, cfg: &ModelConfig) -> Result<BlockOperator, ModelError> {
    let g = ingredients(space, cfg)?;
    let entries = match chirality {
        Chirality::Even => [[(Some(g.pi_prime), Some(0)), (None, None)], [(None, None), (Some(g.pi_o), Some(0))]],
        Chirality::Odd => [
            [(Some(g.pi_e.sub(&g.pi_prime).expect("same layout")), Some(0)), (None, None)],
            [(None, None), (None, None)],
        ],
    };
    Ok(BlockOperator::new(space, entries))
}

/// The comparison model `R P + (Id - R)(Id - P)` in closed form.
pub fn build_comparison_model(chirality: Chirality, cfg: &ModelConfig) -> Result<BlockOperator, ModelError> {
    let space = checked_space(cfg)?;
    comparison_model_on(&space, chirality, cfg)
}

fn comparison_model_on(space: &ModelSpace, chirality: Chirality, cfg: &ModelConfig) -> Result<BlockOperator, ModelError> {
    let g = ingredients(space, cfg)?;
    let two = C64::new(2.0, 0.0);
    let twist = g.pi_e.sub(&g.pi_prime.scale(two)).expect("same layout");
    let twisted = twist.compose(&g.ad_o).expect("same layout");
    let sign = match chirality {
        Chirality::Even => -1.0,
        Chirality::Odd => 1.0,
    };
    let s = C64::new(sign, 0.0);
    let corner = g.h.add(&g.alpha2_beta.scale(s)).expect("same layout");
    let entries = [
        [(Some(g.pi_prime), Some(0)), (Some(twisted.scale(s)), Some(-1))],
        [(Some(g.ad_e.scale(-s)), Some(-1)), (Some(corner), Some(-2))],
    ];
    Ok(BlockOperator::new(space, entries))
}

/// Pair `(u, v)` or `(a, b)` of sector vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorPair {
    pub even: DVector<C64>,
    pub odd: DVector<C64>,
}

impl SectorPair {
    pub fn norm(&self) -> f64 {
        (self.even.norm_squared() + self.odd.norm_squared()).sqrt()
    }
}

/// A prepared comparison model: dense sector blocks and the partial inverses
/// used by the solution formulas.
pub struct ModelProblem {
    chirality: Chirality,
    cfg: ModelConfig,
    space: ModelSpace,
    even_idx: Vec<usize>,
    odd_idx: Vec<usize>,
    /// `αD₊^odd` as an `E × O` matrix.
    ad_odd: DMatrix<C64>,
    /// `α²H₀` on the odd sector (diagonal).
    h_odd: DVector<C64>,
    pinv_ad_odd: DMatrix<C64>,
    pinv_ad_even: DMatrix<C64>,
    /// `z₀'` in even-sector coordinates.
    z_prime: DVector<C64>,
    pairing: f64,
    dense: DMatrix<C64>,
}

impl ModelProblem {
    pub fn new(chirality: Chirality, cfg: &ModelConfig) -> Result<Self, ModelError> {
        let space = checked_space(cfg)?;
        let even_idx = space.sector_indices(Parity::Even);
        let odd_idx = space.sector_indices(Parity::Odd);
        let alpha = C64::new(cfg.alpha, 0.0);
        let ad_odd = space.dirac_plus_odd().submatrix(&even_idx, &odd_idx) * alpha;
        let ad_even = space.dirac_plus_even().submatrix(&odd_idx, &even_idx) * alpha;
        let h = space.harmonic_oscillator();
        let h_odd = DVector::from_iterator(
            odd_idx.len(),
            odd_idx.iter().map(|&i| h.csr().get_entry(i, i).map(|e| e.into_value()).unwrap_or_default() * alpha * alpha),
        );
        let z_full = space.deformed_vacuum(cfg.theta, &cfg.target)?;
        let z_prime = DVector::from_iterator(even_idx.len(), even_idx.iter().map(|&i| z_full[i]));
        let dense = comparison_model_on(&space, chirality, cfg)?.to_dense(&space);
        Ok(Self {
            chirality,
            cfg: cfg.clone(),
            pinv_ad_odd: pinv(&ad_odd, RANK_RTOL, 0.0),
            pinv_ad_even: pinv(&ad_even, RANK_RTOL, 0.0),
            ad_odd,
            h_odd,
            z_prime,
            pairing: cfg.theta.cos(),
            dense,
            space,
            even_idx,
            odd_idx,
        })
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn sector_dims(&self) -> (usize, usize) {
        (self.even_idx.len(), self.odd_idx.len())
    }

    /// Dense comparison model, rows `(a, b)`, columns `(u, v)`.
    pub fn dense(&self) -> &DMatrix<C64> {
        &self.dense
    }

    /// Whether the stacked basis position (even sector first) lies in the
    /// subspace where right-hand sides are accepted: oscillator degree at most
    /// `cutoff - 2` and total degree at most `cutoff`.
    pub fn in_rhs_guard(&self, pos: usize) -> bool {
        self.in_guard(pos, RHS_GUARD)
    }

    /// Domain positions whose image under the model stays in the rhs guard.
    pub fn in_domain_guard(&self, pos: usize) -> bool {
        self.in_guard(pos, RHS_GUARD + 1)
    }

    fn in_guard(&self, pos: usize, margin: u32) -> bool {
        let global = self.global(pos);
        let cutoff = self.cfg.cutoff as usize;
        self.space.osc_degree(global) + margin as usize <= cutoff && self.space.total_degree(global) <= cutoff
    }

    fn global(&self, pos: usize) -> usize {
        let de = self.even_idx.len();
        if pos < de {
            self.even_idx[pos]
        } else {
            self.odd_idx[pos - de]
        }
    }

    pub fn rhs_guard_positions(&self) -> Vec<usize> {
        (0..self.dense.nrows()).filter(|&p| self.in_rhs_guard(p)).collect()
    }

    pub fn domain_guard_positions(&self) -> Vec<usize> {
        (0..self.dense.ncols()).filter(|&p| self.in_domain_guard(p)).collect()
    }

    pub fn apply(&self, x: &SectorPair) -> SectorPair {
        let stacked = stack(&x.even, &x.odd);
        let y = &self.dense * stacked;
        let de = self.even_idx.len();
        SectorPair { even: y.rows(0, de).into_owned(), odd: y.rows(de, y.len() - de).into_owned() }
    }

    /// Solution formulas applied column-wise to `(A, B)`.
    pub fn invert_columns(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
        let one = C64::new(1.0, 0.0);
        let c = C64::new(self.pairing, 0.0);
        let a2b = C64::new(self.cfg.alpha * self.cfg.alpha * self.cfg.beta, 0.0);
        // ǎ = a - π₀ a
        let mut a_check = a.clone();
        a_check.row_mut(0).fill(C64::new(0.0, 0.0));
        // A₁ = (z₀' z₀^*/<z₀', z₀> - π₀) Π₀ a
        let mut shift = &self.z_prime / c;
        shift[0] -= one;
        let a1 = &shift * a.rows(0, 1);
        let x = &self.pinv_ad_odd * (a_check - a1);
        let h_times = |m: &DMatrix<C64>, s: f64| {
            let mut out = m.clone();
            for (i, mut row) in out.row_iter_mut().enumerate() {
                row *= self.h_odd[i] + a2b * s;
            }
            out
        };
        let (v, u_check, w) = match self.chirality {
            Chirality::Even => {
                let v = -&x;
                let u_check = &self.pinv_ad_even * (b + h_times(&x, -1.0));
                let w = a - &self.ad_odd * &v - &u_check;
                (v, u_check, w)
            }
            Chirality::Odd => {
                let v = x;
                let u_check = &self.pinv_ad_even * (h_times(&v, 1.0) - b);
                let w = a + &self.ad_odd * &v - &u_check;
                (v, u_check, w)
            }
        };
        // u₀ = z₀ z₀'^* Π₀ w / <z₀, z₀'>; z₀' already lies in form degree 0.
        let coeff = self.z_prime.adjoint() * w / c;
        let mut u = u_check;
        let mut row0 = u.row_mut(0);
        row0 += coeff;
        (u, v)
    }

    /// Formula-based inverse of the comparison model on a guarded rhs.
    pub fn invert(&self, rhs: &SectorPair) -> Result<SectorPair, ModelError> {
        let (de, d_o) = self.sector_dims();
        if rhs.even.len() != de || rhs.odd.len() != d_o {
            return Err(ModelError::RhsShape { a: rhs.even.len(), b: rhs.odd.len(), ea: de, eb: d_o });
        }
        let stacked = stack(&rhs.even, &rhs.odd);
        let scale = stacked.norm().max(f64::MIN_POSITIVE);
        for (p, z) in stacked.iter().enumerate() {
            if z.norm() > 1e-14 * scale && !self.in_rhs_guard(p) {
                return Err(ModelError::RhsOutsideGuard { index: self.global(p), weight: z.norm() });
            }
        }
        let a = DMatrix::from_column_slice(de, 1, rhs.even.as_slice());
        let b = DMatrix::from_column_slice(d_o, 1, rhs.odd.as_slice());
        let (u, v) = self.invert_columns(&a, &b);
        Ok(SectorPair { even: u.column(0).into_owned(), odd: v.column(0).into_owned() })
    }

    /// Formula inverse applied to every guarded rhs basis vector, as a matrix
    /// with rows `(u, v)` and one column per guard position.
    pub fn inverse_on_guard(&self) -> DMatrix<C64> {
        let (de, d_o) = self.sector_dims();
        let cols = self.rhs_guard_positions();
        let mut a = DMatrix::zeros(de, cols.len());
        let mut b = DMatrix::zeros(d_o, cols.len());
        for (k, &p) in cols.iter().enumerate() {
            if p < de {
                a[(p, k)] = C64::new(1.0, 0.0);
            } else {
                b[(p - de, k)] = C64::new(1.0, 0.0);
            }
        }
        let (u, v) = self.invert_columns(&a, &b);
        let mut out = DMatrix::zeros(de + d_o, cols.len());
        out.rows_mut(0, de).copy_from(&u);
        out.rows_mut(de, d_o).copy_from(&v);
        out
    }

    /// `max |T G - I|` over guard columns, with `G` the formula inverse.
    pub fn right_inverse_error(&self) -> f64 {
        let g = self.inverse_on_guard();
        let tg = &self.dense * g;
        let cols = self.rhs_guard_positions();
        let mut id = DMatrix::zeros(tg.nrows(), cols.len());
        for (k, &p) in cols.iter().enumerate() {
            id[(p, k)] = C64::new(1.0, 0.0);
        }
        max_abs(&(tg - id))
    }

    /// `max |G T x - x|` over domain-guard basis vectors `x`.
    pub fn left_inverse_error(&self) -> f64 {
        let (de, d_o) = self.sector_dims();
        let cols = self.domain_guard_positions();
        let mut x = DMatrix::zeros(de + d_o, cols.len());
        for (k, &p) in cols.iter().enumerate() {
            x[(p, k)] = C64::new(1.0, 0.0);
        }
        let tx = &self.dense * &x;
        let (u, v) = self.invert_columns(&tx.rows(0, de).into_owned(), &tx.rows(de, d_o).into_owned());
        let mut gtx = DMatrix::zeros(de + d_o, cols.len());
        gtx.rows_mut(0, de).copy_from(&u);
        gtx.rows_mut(de, d_o).copy_from(&v);
        max_abs(&(gtx - x))
    }

    /// Singular values of the model restricted to the rhs guard columns.
    pub fn guard_singular_values(&self) -> Vec<f64> {
        let cols = self.rhs_guard_positions();
        let rows: Vec<usize> = (0..self.dense.nrows()).collect();
        let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, k| self.dense[(i, cols[k])]);
        singular_values(&sub)
    }
}

fn stack(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

/// Solve `T(u, v) = (a, b)` with the explicit formulas.
pub fn invert_comparison_model(chirality: Chirality, cfg: &ModelConfig, rhs: &SectorPair) -> Result<SectorPair, ModelError> {
    ModelProblem::new(chirality, cfg)?.invert(rhs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRanks {
    pub uu: usize,
    pub ub: usize,
    pub vu: usize,
    /// Largest entry of the `(2,2)` block difference.
    pub vb_max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationReport {
    pub chirality: Chirality,
    pub smallest_singular_value: f64,
    pub singular_value_floor: f64,
    pub right_inverse_error: f64,
    pub left_inverse_error: f64,
    pub deformation_ranks: BlockRanks,
    pub declared_orders: HeisenbergOrders,
    pub parametrix_orders: HeisenbergOrders,
    /// Index of the square guarded model matrix.
    pub index: i64,
    pub pass: bool,
}

/// Rank certificates for `G_θ - G_0` split into blocks.
pub fn deformation_ranks(deformed: &ModelProblem, undeformed: &ModelProblem) -> BlockRanks {
    let (de, d_o) = deformed.sector_dims();
    let diff = deformed.inverse_on_guard() - undeformed.inverse_on_guard();
    let cols = deformed.rhs_guard_positions();
    let a_cols: Vec<usize> = (0..cols.len()).filter(|&k| cols[k] < de).collect();
    let b_cols: Vec<usize> = (0..cols.len()).filter(|&k| cols[k] >= de).collect();
    let block = |r0: usize, nr: usize, ks: &[usize]| DMatrix::from_fn(nr, ks.len(), |i, k| diff[(r0 + i, ks[k])]);
    let rank = |m: &DMatrix<C64>| {
        let s = singular_values(m);
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            0
        } else {
            s.iter().filter(|&&v| v > FINITE_RANK_RTOL * top.max(1.0)).count()
        }
    };
    BlockRanks {
        uu: rank(&block(0, de, &a_cols)),
        ub: rank(&block(0, de, &b_cols)),
        vu: rank(&block(de, d_o, &a_cols)),
        vb_max_abs: max_abs(&block(de, d_o, &b_cols)),
    }
}

/// Numerical certificate that the comparison model is invertible on the
/// guard subspace and that the explicit inverse formulas are correct.
pub fn certify_invertibility(chirality: Chirality, cfg: &ModelConfig) -> Result<CertificationReport, ModelError> {
    let problem = ModelProblem::new(chirality, cfg)?;
    let undeformed = ModelProblem::new(chirality, &cfg.clone().with_theta(0.0))?;
    let s = problem.guard_singular_values();
    let smallest = s.last().copied().unwrap_or(0.0);
    let floor = FINITE_RANK_RTOL * s.first().copied().unwrap_or(0.0);
    let right = problem.right_inverse_error();
    let left = problem.left_inverse_error();
    let ranks = deformation_ranks(&problem, &undeformed);
    let pass = smallest > floor
        && right <= cfg.tol
        && left <= cfg.tol
        && ranks.uu <= FINITE_RANK_BOUND
        && ranks.ub <= FINITE_RANK_BOUND
        && ranks.vu <= FINITE_RANK_BOUND
        && ranks.vb_max_abs == 0.0;
    let index = problem.dense().nrows() as i64 - problem.dense().ncols() as i64;
    Ok(CertificationReport {
        chirality,
        smallest_singular_value: smallest,
        singular_value_floor: floor,
        right_inverse_error: right,
        left_inverse_error: left,
        deformation_ranks: ranks,
        declared_orders: COMPARISON_ORDERS,
        parametrix_orders: PARAMETRIX_ORDERS,
        index,
        pass,
    })
}

/// `max |[T^even]^* - T^odd|` over the guard block. Vanishes exactly when
/// `β = 0`; otherwise the odd-odd corners differ by `2α²β`.
pub fn adjoint_defect(cfg: &ModelConfig) -> Result<f64, ModelError> {
    let even = ModelProblem::new(Chirality::Even, cfg)?;
    let odd = ModelProblem::new(Chirality::Odd, cfg)?;
    let cols = even.rhs_guard_positions();
    let lhs = even.dense().adjoint();
    let diff = DMatrix::from_fn(cols.len(), cols.len(), |i, j| lhs[(cols[i], cols[j])] - odd.dense()[(cols[i], cols[j])]);
    Ok(max_abs(&diff))
}

/// The three model families for one chirality, sharing one model space.
pub fn model_family(chirality: Chirality, cfg: &ModelConfig) -> Result<(ModelSpace, BlockOperator, BlockOperator, BlockOperator), ModelError> {
    let space = checked_space(cfg)?;
    let p = calderon_model_on(&space, chirality, false, cfg)?;
    let r = boundary_model_on(&space, chirality, cfg)?;
    let t = comparison_model_on(&space, chirality, cfg)?;
    Ok((space, p, r, t))
}
