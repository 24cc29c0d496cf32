//! Relative index of projector pairs at finite dimension.
//!
//! For projections `P`, `R` the comparison operator is
//! `T = RP + (I - R)(I - P)`, and the relative index `Rind(P, R)` is the
//! index of `RP : range P → range R`. In finite dimension every matrix is
//! smoothing, so what survives are the index identities themselves: the
//! kernel formula, the trace formula for an arbitrary parametrix, antisymmetry,
//! the logarithmic law, Neumann continuation of inverses, the Toeplitz
//! reduction and the Agranovich–Dynin difference formula.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{identity, max_abs, op_norm, pinv, range_basis, singular_values, trace, RANK_RTOL};
use crate::C64;

/// Idempotency tolerance, relative to `max(1, max|P|)²`.
pub const IDEMPOTENT_TOL: f64 = 1e-12;
/// Singular values in `[GAP_LOW, GAP_HIGH]·max(1, σ_max)` make a rank ambiguous.
pub const GAP_LOW: f64 = 1e-12;
pub const GAP_HIGH: f64 = 1e-8;
/// Maximum distance of a trace from an integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Neumann continuation requires `‖A₀⁻¹(A₀ - A_τ)‖` below this.
pub const NEUMANN_RADIUS: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FredholmError {
    #[error("matrix is not idempotent: max |P² - P| = {0:.3e}")]
    NotIdempotent(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("ill-conditioned kernel: singular value {sigma:.3e} lies in the ambiguity gap")]
    IllConditioned { sigma: f64 },
    #[error("trace difference {value} is not within {tol:.0e} of an integer")]
    NonInteger { value: f64, tol: f64 },
    #[error("Neumann smallness violated: ‖E‖ = {norm:.4} >= {radius}; retry with step at most {suggested_step:.4e}")]
    Smallness { norm: f64, radius: f64, suggested_step: f64 },
    #[error("base operator A(τ₀) is singular")]
    Singular,
    #[error("winding {k} too large for window {window} (need |k| <= window/2)")]
    WindowTooSmall { window: usize, k: i64 },
}

/// An idempotent square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: DMatrix<C64>,
    self_adjoint: bool,
}

impl Projector {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self, FredholmError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FredholmError::DimensionMismatch("projector must be square".into()));
        }
        let scale = max_abs(&matrix).max(1.0);
        let defect = max_abs(&(&matrix * &matrix - &matrix));
        if defect > IDEMPOTENT_TOL * scale * scale {
            return Err(FredholmError::NotIdempotent(defect));
        }
        let self_adjoint = max_abs(&(matrix.adjoint() - &matrix)) <= IDEMPOTENT_TOL * scale;
        Ok(Self { matrix, self_adjoint })
    }

    /// Diagonal projector with the given 0/1 pattern.
    pub fn diagonal(mask: &[bool]) -> Self {
        let n = mask.len();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j && mask[i] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        Self { matrix: m, self_adjoint: true }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// `rank P = Tr P` for an idempotent, rounded.
    pub fn rank(&self) -> usize {
        trace(&self.matrix).re.round().max(0.0) as usize
    }

    pub fn complement(&self) -> Self {
        Self { matrix: identity(self.dim()) - &self.matrix, self_adjoint: self.self_adjoint }
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), self_adjoint: self.self_adjoint }
    }
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Orthogonal projector onto a random `rank`-dimensional subspace.
pub fn random_orthogonal_projector<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Projector {
    if rank == 0 {
        return Projector::diagonal(&vec![false; dim]);
    }
    let q = random_matrix(rng, dim, rank).qr().q();
    let m = &q * q.adjoint();
    Projector { matrix: m, self_adjoint: true }
}

/// Oblique projector `X (Y^* X)⁻¹ Y^*` with `Y` a moderate perturbation of `X`.
pub fn random_oblique_projector<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Projector {
    if rank == 0 {
        return Projector::diagonal(&vec![false; dim]);
    }
    let x = random_matrix(rng, dim, rank).qr().q();
    let y = &x + random_matrix(rng, dim, rank) * C64::new(0.3 / (dim as f64).sqrt(), 0.0);
    let yx = y.adjoint() * &x;
    let inv = yx.try_inverse().expect("perturbation keeps Y^*X invertible");
    let m = &x * inv * y.adjoint();
    Projector { matrix: m, self_adjoint: false }
}

/// Random finite-rank perturbation `a b^*` with `rank` terms.
pub fn random_finite_rank<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> DMatrix<C64> {
    random_matrix(rng, dim, rank) * random_matrix(rng, dim, rank).adjoint()
}

/// Numerical rank with the ambiguity gap enforced.
fn gated_rank(m: &DMatrix<C64>) -> Result<usize, FredholmError> {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0).max(1.0);
    if let Some(&sigma) = s.iter().find(|&&v| v >= GAP_LOW * top && v <= GAP_HIGH * top) {
        return Err(FredholmError::IllConditioned { sigma });
    }
    Ok(s.iter().filter(|&&v| v > RANK_RTOL * top).count())
}

fn check_same_dim(a: &Projector, b: &Projector) -> Result<(), FredholmError> {
    if a.dim() != b.dim() {
        return Err(FredholmError::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Kernel data of `RP : range P → range R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelIndex {
    pub index: i64,
    /// `dim ker(RP|range P)`
    pub kernel: usize,
    /// `dim ker(P^*R^*|range R^*)`
    pub cokernel: usize,
    pub rank_p: usize,
    pub rank_r: usize,
    /// Both kernel and cokernel are nontrivial.
    pub degenerate: bool,
}

/// Index of `B A` restricted to `range A`, cokernel via the adjoint on `range B^*`.
fn restricted_index(a: &Projector, b: &Projector, middle: Option<&Projector>) -> Result<KernelIndex, FredholmError> {
    let qa = range_basis(a.matrix(), RANK_RTOL, 1.0);
    let qb = range_basis(&b.matrix().adjoint(), RANK_RTOL, 1.0);
    let mid = |x: &DMatrix<C64>| match middle {
        Some(q) => q.matrix() * x,
        None => x.clone(),
    };
    let forward = b.matrix() * mid(a.matrix()) * &qa;
    let back_mid = |x: &DMatrix<C64>| match middle {
        Some(q) => q.matrix().adjoint() * x,
        None => x.clone(),
    };
    let backward = a.matrix().adjoint() * back_mid(&(b.matrix().adjoint() * &qb));
    let kernel = qa.ncols() - gated_rank(&forward)?;
    let cokernel = qb.ncols() - gated_rank(&backward)?;
    Ok(KernelIndex {
        index: kernel as i64 - cokernel as i64,
        kernel,
        cokernel,
        rank_p: qa.ncols(),
        rank_r: qb.ncols(),
        degenerate: kernel > 0 && cokernel > 0,
    })
}

/// `Rind(P, R) = dim ker(RP|range P) - dim ker(P^*R^*|range R^*)`.
pub fn relative_index_kernel(p: &Projector, r: &Projector) -> Result<KernelIndex, FredholmError> {
    check_same_dim(p, r)?;
    restricted_index(p, r, None)
}

/// `T`, a parametrix `U` and the remainders `K₁ = I - TU`, `K₂ = I - UT`.
#[derive(Clone, Debug)]
pub struct ComparisonData {
    pub t: DMatrix<C64>,
    pub u: DMatrix<C64>,
    pub k1: DMatrix<C64>,
    pub k2: DMatrix<C64>,
    /// `Tr K₂ - Tr K₁`, rounded; the index of `T`.
    pub index: i64,
    pub raw_index: f64,
}

/// Builds `T = RP + (I - R)(I - P)` with parametrix `pinv(T) + perturbation`.
pub fn comparison_operator(p: &Projector, r: &Projector, perturbation: Option<&DMatrix<C64>>) -> Result<ComparisonData, FredholmError> {
    check_same_dim(p, r)?;
    let n = p.dim();
    let id = identity(n);
    let t = r.matrix() * p.matrix() + (&id - r.matrix()) * (&id - p.matrix());
    let mut u = pinv(&t, RANK_RTOL, 1.0);
    if let Some(extra) = perturbation {
        if extra.shape() != (n, n) {
            return Err(FredholmError::DimensionMismatch("perturbation shape".into()));
        }
        u += extra;
    }
    let k1 = &id - &t * &u;
    let k2 = &id - &u * &t;
    let raw = (trace(&k2) - trace(&k1)).re;
    let index = round_integral(raw)?;
    Ok(ComparisonData { t, u, k1, k2, index, raw_index: raw })
}

fn round_integral(x: f64) -> Result<i64, FredholmError> {
    let r = x.round();
    if (x - r).abs() > INTEGRALITY_TOL {
        return Err(FredholmError::NonInteger { value: x, tol: INTEGRALITY_TOL });
    }
    Ok(r as i64)
}

/// A pair of projectors with parametrix data for `T`.
#[derive(Clone, Debug)]
pub struct ProjectorPair {
    pub p: Projector,
    pub r: Projector,
    pub comparison: ComparisonData,
}

impl ProjectorPair {
    pub fn new(p: Projector, r: Projector, perturbation: Option<&DMatrix<C64>>) -> Result<Self, FredholmError> {
        let comparison = comparison_operator(&p, &r, perturbation)?;
        Ok(Self { p, r, comparison })
    }

    /// Largest entry of `TU + K₁ - I` and `UT + K₂ - I`.
    pub fn remainder_defect(&self) -> f64 {
        let c = &self.comparison;
        let id = identity(self.p.dim());
        max_abs(&(&c.t * &c.u + &c.k1 - &id)).max(max_abs(&(&c.u * &c.t + &c.k2 - &id)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceIndex {
    pub index: i64,
    /// `Tr(P K₂ P) - Tr(R K₁ R)` before rounding.
    pub raw: f64,
}

/// `Rind(P, R) = Tr(P K₂ P) - Tr(R K₁ R)`.
pub fn relative_index_trace(pair: &ProjectorPair) -> Result<TraceIndex, FredholmError> {
    let (p, r) = (pair.p.matrix(), pair.r.matrix());
    let c = &pair.comparison;
    let raw = (trace(&(p * &c.k2 * p)) - trace(&(r * &c.k1 * r))).re;
    Ok(TraceIndex { index: round_integral(raw)?, raw })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogarithmicReport {
    /// Index of `RQP : range P → range R`.
    pub composite_index: i64,
    pub rind_pq: i64,
    pub rind_qr: i64,
    pub holds: bool,
}

/// Checks `Ind(RQP) = Rind(P, Q) + Rind(Q, R)`.
pub fn logarithmic_property(p: &Projector, q: &Projector, r: &Projector) -> Result<LogarithmicReport, FredholmError> {
    check_same_dim(p, q)?;
    check_same_dim(q, r)?;
    let composite = restricted_index(p, r, Some(q))?.index;
    let rind_pq = relative_index_kernel(p, q)?.index;
    let rind_qr = relative_index_kernel(q, r)?.index;
    Ok(LogarithmicReport { composite_index: composite, rind_pq, rind_qr, holds: composite == rind_pq + rind_qr })
}

/// Diagonal weights `≥ 1` standing in for a scale of nested norms.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedScale {
    weights: Vec<f64>,
}

impl WeightedScale {
    pub fn new(weights: Vec<f64>) -> Result<Self, FredholmError> {
        if weights.iter().any(|&w| !(w >= 1.0) || !w.is_finite()) {
            return Err(FredholmError::DimensionMismatch("weights must be finite and at least 1".into()));
        }
        Ok(Self { weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weighted norm `‖W x‖`.
    pub fn norm(&self, x: &nalgebra::DVector<C64>) -> f64 {
        x.iter().zip(&self.weights).map(|(z, w)| (z * w).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix of `a` in the orthonormal basis of the weighted inner product, `W a W⁻¹`.
    pub fn conjugate(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (self.weights[i] / self.weights[j]))
    }

    pub fn trace(&self, a: &DMatrix<C64>) -> C64 {
        trace(&self.conjugate(a))
    }
}

#[derive(Clone, Debug)]
pub struct NeumannResult {
    pub inverse: DMatrix<C64>,
    /// Highest power of `E` included.
    pub terms: usize,
    pub smallness: f64,
    pub tail_bound: f64,
}

/// Inverse of `A(τ)` from `A(τ₀)⁻¹` by the series `Σ_k E^k A(τ₀)⁻¹`,
/// `E = A(τ₀)⁻¹(A(τ₀) - A(τ))`, truncated once the geometric tail bound
/// drops below `tol`.
pub fn neumann_continuation<F>(family: F, tau0: f64, tau: f64, tol: f64) -> Result<NeumannResult, FredholmError>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    let a0 = family(tau0);
    let at = family(tau);
    if a0.shape() != at.shape() || a0.nrows() != a0.ncols() {
        return Err(FredholmError::DimensionMismatch("family must be square and of fixed size".into()));
    }
    let a0_inv = a0.clone().try_inverse().ok_or(FredholmError::Singular)?;
    let e = &a0_inv * (&a0 - &at);
    let q = op_norm(&e);
    if q >= NEUMANN_RADIUS {
        let suggested_step = (tau - tau0).abs() * NEUMANN_RADIUS / q / 2.0;
        return Err(FredholmError::Smallness { norm: q, radius: NEUMANN_RADIUS, suggested_step });
    }
    let base = op_norm(&a0_inv);
    let mut term = a0_inv.clone();
    let mut sum = a0_inv;
    let mut k = 0;
    let mut tail = q * base / (1.0 - q);
    while tail >= tol {
        term = &e * term;
        sum += &term;
        k += 1;
        tail = q.powi(k as i32 + 1) * base / (1.0 - q);
    }
    Ok(NeumannResult { inverse: sum, terms: k, smallness: q, tail_bound: tail })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToeplitzReport {
    pub window: usize,
    pub winding: i64,
    pub rank_s: usize,
    pub rank_r: usize,
    pub index: i64,
}

/// Relative index of the Hardy projection `S` (frequencies `0..N`) and its
/// conjugate by `e^{ikθ}` (frequencies `k..N`) on the window `-N..N`.
///
/// Conjugation shifts the half-line to `k..∞`; the window keeps the upper
/// end at `N` as for a half-infinite Hardy space, so the answer is `k`.
pub fn toeplitz_winding(window: usize, k: i64) -> Result<ToeplitzReport, FredholmError> {
    if 2 * k.unsigned_abs() as usize > window {
        return Err(FredholmError::WindowTooSmall { window, k });
    }
    let n = window as i64;
    let freqs: Vec<i64> = (-n..=n).collect();
    let s = Projector::diagonal(&freqs.iter().map(|&f| f >= 0).collect::<Vec<_>>());
    let lo = k.max(-n);
    let r = Projector::diagonal(&freqs.iter().map(|&f| f >= lo).collect::<Vec<_>>());
    let ki = relative_index_kernel(&s, &r)?;
    Ok(ToeplitzReport { window, winding: k, rank_s: s.rank(), rank_r: r.rank(), index: ki.index })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowReport {
    /// `Rind(P, R₂) - Rind(P, R₁)`
    pub difference: i64,
    /// `Rind(s₁, s₂)` on the boundary block.
    pub boundary_rind: i64,
    pub rank_s1: usize,
    pub rank_s2: usize,
    pub holds: bool,
}

/// Sizes of the fixed blocks around the scalar boundary block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShadowFrame {
    /// Higher even-degree block, where the boundary condition is `0`.
    pub zero_block: usize,
    /// Odd block, where the boundary condition is `Id`.
    pub identity_block: usize,
}

impl Default for ShadowFrame {
    fn default() -> Self {
        Self { zero_block: 4, identity_block: 6 }
    }
}

/// Embeds `s_i` as `R_i = diag(s_i, 0, Id)` and compares relative indices
/// against a fixed reference projector `P` built from `seed`.
pub fn agranovich_dynin_shadow(s1: &Projector, s2: &Projector, frame: ShadowFrame, seed: u64) -> Result<ShadowReport, FredholmError> {
    use rand::SeedableRng;
    check_same_dim(s1, s2)?;
    let h = s1.dim();
    let total = h + frame.zero_block + frame.identity_block;
    let embed = |s: &Projector| {
        let mut m = DMatrix::zeros(total, total);
        m.view_mut((0, 0), (h, h)).copy_from(s.matrix());
        for i in h + frame.zero_block..total {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Projector::new(m)
    };
    let r1 = embed(s1)?;
    let r2 = embed(s2)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p = random_orthogonal_projector(&mut rng, total, total / 2);
    let difference = relative_index_kernel(&p, &r2)?.index - relative_index_kernel(&p, &r1)?.index;
    let boundary_rind = relative_index_kernel(s1, s2)?.index;
    let (rank_s1, rank_s2) = (s1.rank(), s2.rank());
    let holds = difference == boundary_rind && boundary_rind == rank_s1 as i64 - rank_s2 as i64;
    Ok(ShadowReport { difference, boundary_rind, rank_s1, rank_s2, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn generators_produce_projectors_of_requested_rank() {
        let mut g = rng(1);
        let p = random_orthogonal_projector(&mut g, 12, 5);
        assert!(p.is_self_adjoint());
        assert_eq!(p.rank(), 5);
        let q = random_oblique_projector(&mut g, 12, 4);
        assert!(Projector::new(q.matrix().clone()).is_ok());
        assert!(!q.is_self_adjoint());
        assert_eq!(q.rank(), 4);
    }

    #[test]
    fn non_idempotent_is_rejected() {
        let m = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(Projector::new(m), Err(FredholmError::NotIdempotent(_))));
    }

    #[test]
    fn equal_projectors_have_index_zero() {
        let p = random_orthogonal_projector(&mut rng(2), 10, 3);
        assert_eq!(relative_index_kernel(&p, &p).unwrap().index, 0);
        let c = comparison_operator(&p, &p, None).unwrap();
        assert!(max_abs(&(c.t - identity(10))) < 1e-14);
        assert!(max_abs(&c.k1) < 1e-12 && max_abs(&c.k2) < 1e-12);
    }

    #[test]
    fn orthogonal_rank_one_pair_is_degenerate() {
        let p = Projector::diagonal(&[true, false, false]);
        let r = Projector::diagonal(&[false, true, false]);
        let k = relative_index_kernel(&p, &r).unwrap();
        assert_eq!((k.index, k.kernel, k.cokernel, k.degenerate), (0, 1, 1, true));
    }

    #[test]
    fn ill_conditioned_kernel_is_diagnosed() {
        let eps = 1e-10;
        let v = nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(eps, 0.0)]);
        let v = &v / C64::new(v.norm(), 0.0);
        let p = Projector::diagonal(&[false, false, true]);
        let r = Projector::new(&v * v.adjoint()).unwrap();
        assert!(matches!(relative_index_kernel(&p, &r), Err(FredholmError::IllConditioned { .. })));
    }

    #[test]
    fn trace_formula_with_perturbed_parametrix() {
        let mut g = rng(3);
        let p = random_orthogonal_projector(&mut g, 20, 7);
        let r = random_oblique_projector(&mut g, 20, 4);
        let pert = random_finite_rank(&mut g, 20, 1) * C64::new(0.1, 0.0);
        let pair = ProjectorPair::new(p.clone(), r.clone(), Some(&pert)).unwrap();
        assert!(pair.remainder_defect() < 1e-12);
        assert_eq!(pair.comparison.index, 0);
        assert_eq!(relative_index_trace(&pair).unwrap().index, 3);
        assert_eq!(relative_index_kernel(&p, &r).unwrap().index, 3);
        let anti = relative_index_kernel(&p.complement(), &r.complement()).unwrap().index;
        assert_eq!(anti, -3);
    }

    #[test]
    fn logarithmic_law() {
        let mut g = rng(4);
        let p = random_orthogonal_projector(&mut g, 24, 9);
        let q = random_orthogonal_projector(&mut g, 24, 6);
        let r = random_orthogonal_projector(&mut g, 24, 2);
        let rep = logarithmic_property(&p, &q, &r).unwrap();
        assert_eq!((rep.composite_index, rep.rind_pq, rep.rind_qr), (7, 3, 4));
        assert!(rep.holds);
        let back = logarithmic_property(&p, &q, &p).unwrap();
        assert_eq!(back.composite_index, 0);
    }

    #[test]
    fn neumann_series() {
        let a = DMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let res = neumann_continuation(|_| a.clone(), 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(res.terms, 0);
        assert!(max_abs(&(res.inverse - a.clone().try_inverse().unwrap())) < 1e-15);

        let nil = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.4, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let fam = |t: f64| identity(2) + &nil * C64::new(t, 0.0);
        let res = neumann_continuation(fam, 0.0, 1.0, 1e-12).unwrap();
        assert!((res.smallness - 0.4).abs() < 1e-14);
        assert!(max_abs(&(res.inverse - fam(1.0).try_inverse().unwrap())) < 1e-10);

        let big = |t: f64| identity(2) + &nil * C64::new(1.5 * t, 0.0);
        assert!(matches!(neumann_continuation(big, 0.0, 1.0, 1e-12), Err(FredholmError::Smallness { .. })));
    }

    #[test]
    fn toeplitz_index_is_winding() {
        assert_eq!(toeplitz_winding(64, 0).unwrap().index, 0);
        assert_eq!(toeplitz_winding(64, 3).unwrap().index, 3);
        assert_eq!(toeplitz_winding(64, -2).unwrap().index, -2);
        assert!(toeplitz_winding(8, 5).is_err());
    }

    #[test]
    fn shadow_difference() {
        let mut g = rng(5);
        let s1 = random_orthogonal_projector(&mut g, 8, 5);
        let s2 = random_orthogonal_projector(&mut g, 8, 2);
        let rep = agranovich_dynin_shadow(&s1, &s2, ShadowFrame::default(), 9).unwrap();
        assert_eq!((rep.difference, rep.boundary_rind), (3, 3));
        let swapped = agranovich_dynin_shadow(&s2, &s1, ShadowFrame::default(), 9).unwrap();
        assert_eq!(swapped.difference, -3);
        assert_eq!(agranovich_dynin_shadow(&s1, &s1, ShadowFrame::default(), 9).unwrap().difference, 0);
    }

    #[test]
    fn weighted_trace_is_similarity_invariant() {
        let mut g = rng(6);
        let p = random_orthogonal_projector(&mut g, 6, 2);
        let r = random_orthogonal_projector(&mut g, 6, 3);
        let pair = ProjectorPair::new(p.clone(), r, None).unwrap();
        let pk2p = p.matrix() * &pair.comparison.k2 * p.matrix();
        let w = WeightedScale::new(vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]).unwrap();
        assert!((w.trace(&pk2p) - trace(&pk2p)).norm() < 1e-10);
        assert!(WeightedScale::new(vec![0.5]).is_err());
    }
}
