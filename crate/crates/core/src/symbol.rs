//! Principal symbols of the spin-c Dirac operator near a strictly pseudoconvex
//! boundary point, the Calderon symbols they induce, and contour quadrature
//! for the residue computations.
//!
//! Symbol matrices act on the `2^{n-1}` tangential forms laid out as
//! `F_even ⊕ F_odd`. For the even chirality `F_even` carries the tangential
//! part of a spinor and `F_odd` the normal part; for the odd chirality the
//! roles are swapped.
//!
//! Covector coordinates are `ξ₁` (conormal), `ξ₂..ξ_n`, `ξ_{n+1}` (contact)
//! and `ξ_{n+2}..ξ_{2n}`. The natural ordering used by [`SymbolAlgebra::d1_at`]
//! stores `ξ_{k+1}` at index `k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spinor::{form_basis, form_contract_matrix, form_wedge_matrix};
use crate::C64;

/// Relative distance from a pole to the contour below which quadrature is refused.
pub const POLE_CLEARANCE: f64 = 1e-6;
/// Largest number of trapezoid nodes used on a circle.
pub const MAX_QUADRATURE_POINTS: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("symbol matrices need n >= 2, got n = {0}")]
    DimensionTooSmall(usize),
    #[error("covector has {got} tangential components, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("symbol of negative order evaluated at the zero covector")]
    ZeroCovector,
    #[error("pole at distance {distance:.3e} from the contour (relative)")]
    PoleOnContour { distance: f64 },
    #[error("evaluation requires the contact line (ξ'' = 0); |ξ''| = {0:.3e}")]
    OffContactLine(f64),
    #[error("invalid Hessian data: {0}")]
    InvalidHessian(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    Even,
    Odd,
}

impl Chirality {
    pub fn opposite(self) -> Self {
        match self {
            Chirality::Even => Chirality::Odd,
            Chirality::Odd => Chirality::Even,
        }
    }
}

/// Which side of the boundary, equivalently which half-plane pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub xi1: f64,
    /// `ξ_{n+1}`
    pub xi_contact: f64,
    /// `(ξ₂..ξ_n, ξ_{n+2}..ξ_{2n})`
    pub xi_perp: Vec<f64>,
}

impl Covector {
    pub fn new(xi1: f64, xi_contact: f64, xi_perp: Vec<f64>) -> Self {
        Self { xi1, xi_contact, xi_perp }
    }

    /// Boundary covector `ξ'` with `ξ₁ = 0`.
    pub fn boundary(xi_contact: f64, xi_perp: Vec<f64>) -> Self {
        Self::new(0.0, xi_contact, xi_perp)
    }

    pub fn n(&self) -> usize {
        self.xi_perp.len() / 2 + 1
    }

    pub fn natural(&self) -> Vec<f64> {
        let m = self.xi_perp.len() / 2;
        let mut v = Vec::with_capacity(2 * m + 2);
        v.push(self.xi1);
        v.extend_from_slice(&self.xi_perp[..m]);
        v.push(self.xi_contact);
        v.extend_from_slice(&self.xi_perp[m..]);
        v
    }

    pub fn perp_norm_sq(&self) -> f64 {
        self.xi_perp.iter().map(|x| x * x).sum()
    }

    /// `|ξ'|`
    pub fn prime_norm(&self) -> f64 {
        (self.xi_contact * self.xi_contact + self.perp_norm_sq()).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.xi1 * self.xi1 + self.xi_contact * self.xi_contact + self.perp_norm_sq()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(s * self.xi1, s * self.xi_contact, self.xi_perp.iter().map(|x| s * x).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMatrix {
    pub matrix: DMatrix<C64>,
    pub chirality: Chirality,
}

/// Second-order data of the defining function at the boundary point.
///
/// `a = a⁰ + i a¹` is Hermitian (`a⁰` symmetric, `a¹` antisymmetric) and
/// `b = b⁰ + i b¹` is complex symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianData {
    pub alpha: f64,
    pub a0: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub b0: DMatrix<f64>,
    pub b1: DMatrix<f64>,
}

impl HessianData {
    pub fn new(alpha: f64, a0: DMatrix<f64>, a1: DMatrix<f64>, b0: DMatrix<f64>, b1: DMatrix<f64>) -> Result<Self, SymbolError> {
        let n = a0.nrows();
        if alpha <= 0.0 {
            return Err(SymbolError::InvalidHessian("alpha must be positive".into()));
        }
        for (name, m) in [("a0", &a0), ("a1", &a1), ("b0", &b0), ("b1", &b1)] {
            if m.shape() != (n, n) {
                return Err(SymbolError::InvalidHessian(format!("{name} must be {n}x{n}")));
            }
        }
        let sym = |m: &DMatrix<f64>, s: f64| (m - m.transpose() * s).abs().max() <= 1e-12 * (1.0 + m.abs().max());
        if !sym(&a0, 1.0) || !sym(&b0, 1.0) || !sym(&b1, 1.0) {
            return Err(SymbolError::InvalidHessian("a0, b0, b1 must be symmetric".into()));
        }
        if !sym(&a1, -1.0) {
            return Err(SymbolError::InvalidHessian("a1 must be antisymmetric".into()));
        }
        Ok(Self { alpha, a0, a1, b0, b1 })
    }

    /// `α = 1`, `a = Id`, `b = 0`.
    pub fn kahler(n: usize) -> Self {
        let z = DMatrix::zeros(n, n);
        Self { alpha: 1.0, a0: DMatrix::identity(n, n), a1: z.clone(), b0: z.clone(), b1: z }
    }

    pub fn n(&self) -> usize {
        self.a0.nrows()
    }

    /// `A = ((a⁰, -a¹), (a¹, a⁰))`.
    pub fn matrix_a(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a0);
        m.view_mut((0, n), (n, n)).copy_from(&(-&self.a1));
        m.view_mut((n, 0), (n, n)).copy_from(&self.a1);
        m.view_mut((n, n), (n, n)).copy_from(&self.a0);
        m
    }

    /// `B = ((b⁰, -b¹), (-b¹, -b⁰))`.
    pub fn matrix_b(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.b0);
        m.view_mut((0, n), (n, n)).copy_from(&(-&self.b1));
        m.view_mut((n, 0), (n, n)).copy_from(&(-&self.b1));
        m.view_mut((n, n), (n, n)).copy_from(&(-&self.b0));
        m
    }

    /// `β = ½ Tr A - a⁰₁₁`.
    pub fn beta(&self) -> f64 {
        self.a0.trace() - self.a0[(0, 0)]
    }

    /// Whether the first column of `a` is a multiple of `e₁`, which makes the
    /// conormal and contact directions eigen-directions of `A`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (1..self.n()).all(|k| self.a0[(k, 0)].abs() <= tol && self.a1[(k, 0)].abs() <= tol)
    }
}

/// Cached form-sector algebra for a fixed `n`.
#[derive(Clone, Debug)]
pub struct SymbolAlgebra {
    n: usize,
    pi_e: DMatrix<C64>,
    pi_o: DMatrix<C64>,
    contract: Vec<DMatrix<C64>>,
    wedge: Vec<DMatrix<C64>>,
}

fn i_unit() -> C64 {
    C64::new(0.0, 1.0)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl SymbolAlgebra {
    pub fn new(n: usize) -> Result<Self, SymbolError> {
        if n < 2 {
            return Err(SymbolError::DimensionTooSmall(n));
        }
        let m = n - 1;
        let forms = form_basis(m);
        // Reorder the form basis so that even degrees come first.
        let perm: Vec<usize> = (0..forms.len())
            .filter(|&i| forms[i].degree() % 2 == 0)
            .chain((0..forms.len()).filter(|&i| forms[i].degree() % 2 == 1))
            .collect();
        let d = perm.len();
        let half = d / 2;
        let reorder = |x: &DMatrix<C64>| DMatrix::from_fn(d, d, |r, c| x[(perm[r], perm[c])]);
        let pi_e = DMatrix::from_fn(d, d, |r, c| if r == c && r < half { re(1.0) } else { re(0.0) });
        let pi_o = DMatrix::from_fn(d, d, |r, c| if r == c && r >= half { re(1.0) } else { re(0.0) });
        let contract = (1..=m).map(|j| reorder(&form_contract_matrix(m, j))).collect();
        let wedge = (1..=m).map(|j| reorder(&form_wedge_matrix(m, j))).collect();
        Ok(Self { n, pi_e, pi_o, contract, wedge })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `2^{n-1}`
    pub fn dim(&self) -> usize {
        self.pi_e.nrows()
    }

    pub fn identity(&self) -> DMatrix<C64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    pub fn pi_even(&self) -> &DMatrix<C64> {
        &self.pi_e
    }

    pub fn pi_odd(&self) -> &DMatrix<C64> {
        &self.pi_o
    }

    fn check(&self, xi: &Covector) -> Result<(), SymbolError> {
        let expected = 2 * (self.n - 1);
        if xi.xi_perp.len() != expected {
            return Err(SymbolError::DimensionMismatch { got: xi.xi_perp.len(), expected });
        }
        Ok(())
    }

    /// `sd(ξ'') = Σ_j (iξ_{j+1} + ξ_{n+j+1}) e_j - (iξ_{j+1} - ξ_{n+j+1}) ε_j`.
    pub fn sd(&self, xi_perp: &[f64]) -> Result<DMatrix<C64>, SymbolError> {
        let m = self.n - 1;
        if xi_perp.len() != 2 * m {
            return Err(SymbolError::DimensionMismatch { got: xi_perp.len(), expected: 2 * m });
        }
        let mut s = DMatrix::zeros(self.dim(), self.dim());
        for j in 0..m {
            let c = C64::new(xi_perp[m + j], xi_perp[j]);
            s += &self.contract[j] * c + &self.wedge[j] * c.conj();
        }
        Ok(s)
    }

    /// `∂d₁/∂ξ_{k+1}` for `k = 0..2n`; `d₁` is linear so these determine it.
    pub fn d1_coefficients(&self, chirality: Chirality) -> Vec<DMatrix<C64>> {
        let n = self.n;
        let m = n - 1;
        let h = re(std::f64::consts::FRAC_1_SQRT_2);
        let sgn = match chirality {
            Chirality::Even => 1.0,
            Chirality::Odd => -1.0,
        };
        let mut out = vec![DMatrix::zeros(self.dim(), self.dim()); 2 * n];
        out[0] = (&self.pi_e - &self.pi_o) * (i_unit() * h * re(sgn));
        out[n] = -self.identity() * h;
        let cross = |k: &DMatrix<C64>| (&self.pi_e * k * &self.pi_o - &self.pi_o * k * &self.pi_e) * (h * re(sgn));
        for j in 0..m {
            let k_im = (&self.contract[j] - &self.wedge[j]) * i_unit();
            let k_re = &self.contract[j] + &self.wedge[j];
            out[1 + j] = cross(&k_im);
            out[n + 1 + j] = cross(&k_re);
        }
        out
    }

    /// `d₁(ξ)` at a possibly complex covector in natural ordering.
    pub fn d1_at(&self, chirality: Chirality, xi: &[C64]) -> DMatrix<C64> {
        let coeffs = self.d1_coefficients(chirality);
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (c, x) in coeffs.iter().zip(xi) {
            out += c * *x;
        }
        out
    }

    /// Principal symbol of the chiral Dirac operator.
    pub fn d1(&self, chirality: Chirality, xi: &Covector) -> Result<SymbolMatrix, SymbolError> {
        self.check(xi)?;
        let v: Vec<C64> = xi.natural().into_iter().map(re).collect();
        Ok(SymbolMatrix { matrix: self.d1_at(chirality, &v), chirality })
    }

    /// `σ₁(ð, ∓i dt)` at the boundary: `±1/√2` on tangential, `∓1/√2` on normal parts.
    pub fn boundary_isomorphism(&self, chirality: Chirality, side: Side) -> SymbolMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2 * side.sign();
        let base = match chirality {
            Chirality::Even => &self.pi_e - &self.pi_o,
            Chirality::Odd => &self.pi_o - &self.pi_e,
        };
        SymbolMatrix { matrix: base * re(h), chirality }
    }

    fn with_xi1(&self, xi_prime: &Covector, xi1: C64) -> Vec<C64> {
        let mut v: Vec<C64> = xi_prime.natural().into_iter().map(re).collect();
        v[0] = xi1;
        v
    }

    /// Order-zero Calderon symbol, `d₁^{opp}(±i|ξ'|, ξ')/|ξ'| ∘ σ₁(ð, ∓i dt)`.
    pub fn calderon_symbol0(&self, chirality: Chirality, side: Side, xi_prime: &Covector) -> Result<SymbolMatrix, SymbolError> {
        self.check(xi_prime)?;
        let r = xi_prime.prime_norm();
        if r == 0.0 {
            return Err(SymbolError::ZeroCovector);
        }
        let xi = self.with_xi1(xi_prime, C64::new(0.0, side.sign() * r));
        let d = self.d1_at(chirality.opposite(), &xi) / re(r);
        let sigma = self.boundary_isomorphism(chirality, side).matrix;
        Ok(SymbolMatrix { matrix: d * sigma, chirality })
    }

    /// Explicit `2×2` block form of the order-zero Calderon symbol.
    pub fn calderon_block_form(&self, chirality: Chirality, side: Side, xi_prime: &Covector) -> Result<SymbolMatrix, SymbolError> {
        self.check(xi_prime)?;
        let r = xi_prime.prime_norm();
        if r == 0.0 {
            return Err(SymbolError::ZeroCovector);
        }
        let c = xi_prime.xi_contact;
        let s = self.sd(&xi_prime.xi_perp)?;
        let (top, bottom) = match chirality {
            Chirality::Even => (r - c, r + c),
            Chirality::Odd => (r + c, r - c),
        };
        let (top, bottom, s_sign) = match side {
            Side::Plus => (top, bottom, 1.0),
            Side::Minus => (bottom, top, -1.0),
        };
        let m = &self.pi_e * re(top) + &self.pi_o * re(bottom) + s * re(s_sign);
        Ok(SymbolMatrix { matrix: m / re(2.0 * r), chirality })
    }

    /// Classical symbol of the comparison operator at the boundary,
    /// `(|ξ'| + ξ_{n+1} ∓ Π_e sd Π_o ± Π_o sd Π_e)/(2|ξ'|)`.
    pub fn comparison_symbol0(&self, chirality: Chirality, xi_prime: &Covector) -> Result<SymbolMatrix, SymbolError> {
        self.check(xi_prime)?;
        let r = xi_prime.prime_norm();
        if r == 0.0 {
            return Err(SymbolError::ZeroCovector);
        }
        let s = self.sd(&xi_prime.xi_perp)?;
        let sgn = match chirality {
            Chirality::Even => 1.0,
            Chirality::Odd => -1.0,
        };
        let cross = (&self.pi_o * &s * &self.pi_e - &self.pi_e * &s * &self.pi_o) * re(sgn);
        let m = self.identity() * re(r + xi_prime.xi_contact) + cross;
        Ok(SymbolMatrix { matrix: m / re(2.0 * r), chirality })
    }

    /// `q_{-1} = 2 d₁^{opp}/|ξ|²`, the leading parametrix symbol for the
    /// given chirality, at complex `ξ₁`.
    pub fn q_minus1_at(&self, chirality: Chirality, xi: &[C64]) -> DMatrix<C64> {
        let norm_sq: C64 = xi.iter().map(|x| x * x).sum();
        self.d1_at(chirality.opposite(), xi) * (re(2.0) / norm_sq)
    }

    /// Contact part of the order `-2` parametrix symbol carried by `A`:
    /// `2iξ₁α[-Tr A d₁/|ξ|⁴ + 4 d₁ <Aξ,ξ>/|ξ|⁶ - 2 <Aξ,∂d₁>/|ξ|⁴]`,
    /// with `d₁` of the opposite chirality and bilinear pairings so that
    /// `ξ₁` may be complex.
    pub fn q_minus2_contact_at(&self, chirality: Chirality, xi: &[C64], hess: &HessianData) -> DMatrix<C64> {
        let a = hess.matrix_a();
        let dim = xi.len();
        let coeffs = self.d1_coefficients(chirality.opposite());
        let norm_sq: C64 = xi.iter().map(|x| x * x).sum();
        let a_xi: Vec<C64> = (0..dim).map(|k| (0..dim).map(|l| re(a[(k, l)]) * xi[l]).sum()).collect();
        let quad: C64 = a_xi.iter().zip(xi).map(|(p, q)| p * q).sum();
        let mut d1 = DMatrix::zeros(self.dim(), self.dim());
        let mut a_dd = DMatrix::zeros(self.dim(), self.dim());
        for k in 0..dim {
            d1 += &coeffs[k] * xi[k];
            a_dd += &coeffs[k] * a_xi[k];
        }
        let n4 = norm_sq * norm_sq;
        let n6 = n4 * norm_sq;
        let inner = &d1 * (re(-a.trace()) / n4) + &d1 * (re(4.0) * quad / n6) - a_dd * (re(2.0) / n4);
        inner * (re(2.0 * hess.alpha) * i_unit() * xi[0])
    }

    /// Real-covector evaluation of `q_{-1}` or the contact part of `q_{-2}`.
    pub fn q_symbol(&self, order: QOrder, chirality: Chirality, xi: &Covector, hess: &HessianData) -> Result<SymbolMatrix, SymbolError> {
        self.check(xi)?;
        if xi.norm_sq() == 0.0 {
            return Err(SymbolError::ZeroCovector);
        }
        let v: Vec<C64> = xi.natural().into_iter().map(re).collect();
        let matrix = match order {
            QOrder::Minus1 => self.q_minus1_at(chirality, &v),
            QOrder::Minus2Contact => self.q_minus2_contact_at(chirality, &v, hess),
        };
        Ok(SymbolMatrix { matrix, chirality })
    }

    /// Order `-1` Calderon symbol along the contact line:
    /// `-iαβ ∂_{ξ₁}d₁^{opp}/|ξ'|` composed with the boundary isomorphism.
    pub fn calderon_symbol_minus1(&self, chirality: Chirality, side: Side, xi_prime: &Covector, hess: &HessianData) -> Result<SymbolMatrix, SymbolError> {
        self.check(xi_prime)?;
        let perp = xi_prime.perp_norm_sq().sqrt();
        if perp > 0.0 {
            return Err(SymbolError::OffContactLine(perp));
        }
        let r = xi_prime.prime_norm();
        if r == 0.0 {
            return Err(SymbolError::ZeroCovector);
        }
        let m1 = &self.d1_coefficients(chirality.opposite())[0];
        let base = m1 * (-i_unit() * re(hess.alpha * hess.beta() / r));
        let sigma = self.boundary_isomorphism(chirality, side).matrix;
        Ok(SymbolMatrix { matrix: base * sigma, chirality })
    }

    /// Closed form of `(1/2π)∮ 2iξ₁ α Tr A d₁^{opp}/|ξ|⁴ dξ₁` over either contour:
    /// `iα Tr A ∂_{ξ₁}d₁^{opp}/(2|ξ'|)`.
    pub fn trace_term_closed_form(&self, chirality: Chirality, xi_prime: &Covector, hess: &HessianData) -> DMatrix<C64> {
        let r = xi_prime.prime_norm();
        let m1 = &self.d1_coefficients(chirality.opposite())[0];
        m1 * (i_unit() * re(hess.alpha * hess.matrix_a().trace() / (2.0 * r)))
    }

    /// Closed form of `(1/2π)∮ q_{-2}^{cA} dξ₁` on the contact line:
    /// `-iαβ ∂_{ξ₁}d₁/|ξ'| - iα Σ_{k≠1,n+1} A_{k1} ∂_{ξ_k}d₁/|ξ'|`.
    /// The second sum vanishes when `hess` is normalized.
    pub fn contact_line_closed_form(&self, chirality: Chirality, xi_contact: f64, hess: &HessianData) -> DMatrix<C64> {
        let r = xi_contact.abs();
        let n = self.n;
        let coeffs = self.d1_coefficients(chirality.opposite());
        let a = hess.matrix_a();
        let mut out = &coeffs[0] * (-i_unit() * re(hess.alpha * hess.beta() / r));
        for (k, c) in coeffs.iter().enumerate() {
            if k != 0 && k != n {
                out += c * (-i_unit() * re(hess.alpha * a[(k, 0)] / r));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QOrder {
    Minus1,
    Minus2Contact,
}

/// Result of a contour quadrature.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub value: DMatrix<C64>,
    pub points: usize,
    /// Max-entry change between the last two refinements.
    pub error_estimate: f64,
}

/// A circle `center + radius·e^{iφ}` in the `ξ₁` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    /// Circle of radius `|ξ'|/2` around the pole `±i|ξ'|`.
    pub fn around_pole(side: Side, r: f64) -> Self {
        Self { center: C64::new(0.0, side.sign() * r), radius: r / 2.0 }
    }
}

/// `(1/2π)∮ f(ξ₁) dξ₁` over `Γ₊` (positively oriented around `+i|ξ'|`) or
/// `Γ₋` (negatively oriented around `-i|ξ'|`). The integrand is assumed to
/// have its poles at `±i|ξ'|` only.
pub fn contour_integral<F>(integrand: F, side: Side, xi_prime_norm: f64) -> Result<Quadrature, SymbolError>
where
    F: Fn(C64) -> DMatrix<C64>,
{
    if xi_prime_norm <= 0.0 {
        return Err(SymbolError::ZeroCovector);
    }
    let r = xi_prime_norm;
    let poles = [C64::new(0.0, r), C64::new(0.0, -r)];
    contour_integral_on(integrand, Circle::around_pole(side, r), &poles, side)
}

/// Trapezoid rule on `circle` with doubling refinement up to
/// [`MAX_QUADRATURE_POINTS`] nodes.
pub fn contour_integral_on<F>(integrand: F, circle: Circle, poles: &[C64], side: Side) -> Result<Quadrature, SymbolError>
where
    F: Fn(C64) -> DMatrix<C64>,
{
    for p in poles {
        let distance = ((p - circle.center).norm() - circle.radius).abs() / circle.radius;
        if distance < POLE_CLEARANCE {
            return Err(SymbolError::PoleOnContour { distance });
        }
    }
    let rule = |k: usize| -> DMatrix<C64> {
        let mut acc: Option<DMatrix<C64>> = None;
        for q in 0..k {
            let phi = 2.0 * std::f64::consts::PI * q as f64 / k as f64;
            let e = C64::from_polar(1.0, phi);
            let z = circle.center + e * circle.radius;
            let term = integrand(z) * (i_unit() * e * circle.radius);
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        acc.expect("at least one node") / re(k as f64) * re(side.sign())
    };
    let mut points = 32;
    let mut prev = rule(points);
    loop {
        let next_points = points * 2;
        let next = rule(next_points);
        let diff = (&next - &prev).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = next.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if diff <= 1e-15 * scale || next_points >= MAX_QUADRATURE_POINTS {
            return Ok(Quadrature { value: next, points: next_points, error_estimate: diff });
        }
        points = next_points;
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, singular_values};

    fn alg(n: usize) -> SymbolAlgebra {
        SymbolAlgebra::new(n).unwrap()
    }

    fn xi3() -> Covector {
        Covector::new(0.4, -0.7, vec![0.3, -1.1, 0.5, 0.2])
    }

    #[test]
    fn rejects_small_n_and_bad_lengths() {
        assert_eq!(SymbolAlgebra::new(1).unwrap_err(), SymbolError::DimensionTooSmall(1));
        assert!(alg(3).d1(Chirality::Even, &Covector::new(1.0, 0.0, vec![1.0])).is_err());
    }

    #[test]
    fn d1_factorizes_the_laplacian() {
        let a = alg(3);
        let xi = xi3();
        let e = a.d1(Chirality::Even, &xi).unwrap().matrix;
        let o = a.d1(Chirality::Odd, &xi).unwrap().matrix;
        let target = a.identity() * re(xi.norm_sq() / 2.0);
        assert!(max_abs(&(&o * &e - &target)) < 1e-14);
        assert!(max_abs(&(&e * &o - &target)) < 1e-14);
        assert!(max_abs(&(e.adjoint() - o)) < 1e-15);
    }

    #[test]
    fn sd_is_self_adjoint_and_squares_to_norm() {
        let a = alg(3);
        let xi = xi3();
        let s = a.sd(&xi.xi_perp).unwrap();
        assert!(max_abs(&(s.adjoint() - &s)) < 1e-15);
        assert!(max_abs(&(&s * &s - a.identity() * re(xi.perp_norm_sq()))) < 1e-14);
    }

    #[test]
    fn boundary_isomorphism_scalars() {
        let a = alg(2);
        let plus = a.boundary_isomorphism(Chirality::Even, Side::Plus).matrix;
        let minus = a.boundary_isomorphism(Chirality::Even, Side::Minus).matrix;
        assert!((plus[(0, 0)] - re(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-16);
        assert!((plus[(1, 1)] + re(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-16);
        let prod = &plus * &minus;
        assert!((prod[(0, 0)] + re(0.5)).norm() < 1e-15);
    }

    #[test]
    fn calderon_residue_matches_block_form() {
        for n in [2, 3] {
            let a = alg(n);
            let xi = Covector::boundary(0.35, (0..2 * (n - 1)).map(|k| 0.2 * k as f64 - 0.3).collect());
            for ch in [Chirality::Even, Chirality::Odd] {
                for side in [Side::Plus, Side::Minus] {
                    let p = a.calderon_symbol0(ch, side, &xi).unwrap().matrix;
                    let b = a.calderon_block_form(ch, side, &xi).unwrap().matrix;
                    assert!(max_abs(&(&p - &b)) < 1e-14, "{ch:?} {side:?}");
                    assert!(max_abs(&(&p * &p - &p)) < 1e-14);
                }
                let sum = a.calderon_symbol0(ch, Side::Plus, &xi).unwrap().matrix
                    + a.calderon_symbol0(ch, Side::Minus, &xi).unwrap().matrix;
                assert!(max_abs(&(sum - a.identity())) < 1e-14);
            }
        }
    }

    #[test]
    fn calderon_on_positive_contact_direction() {
        let a = alg(3);
        let xi = Covector::boundary(-2.0, vec![0.0; 4]);
        let p = a.calderon_symbol0(Chirality::Even, Side::Plus, &xi).unwrap().matrix;
        assert!(max_abs(&(p - a.pi_even())) < 1e-15);
        assert_eq!(a.calderon_symbol0(Chirality::Even, Side::Plus, &Covector::boundary(0.0, vec![0.0; 4])).unwrap_err(), SymbolError::ZeroCovector);
    }

    #[test]
    fn comparison_symbol_singular_values() {
        let a = alg(3);
        let xi = Covector::boundary(-0.4, vec![0.1, 0.2, -0.3, 0.05]);
        let r = xi.prime_norm();
        let expect = ((r + xi.xi_contact).powi(2) + xi.perp_norm_sq()).sqrt() / (2.0 * r);
        for ch in [Chirality::Even, Chirality::Odd] {
            let s = singular_values(&a.comparison_symbol0(ch, &xi).unwrap().matrix);
            assert!(s.iter().all(|v| (v - expect).abs() < 1e-14));
        }
        let on_ray = a.comparison_symbol0(Chirality::Even, &Covector::boundary(-1.0, vec![0.0; 4])).unwrap();
        assert_eq!(max_abs(&on_ray.matrix), 0.0);
        let opposite = a.comparison_symbol0(Chirality::Odd, &Covector::boundary(1.0, vec![0.0; 4])).unwrap();
        assert!(max_abs(&(opposite.matrix - a.identity())) < 1e-16);
    }

    #[test]
    fn q_minus1_inverts_d1() {
        let a = alg(3);
        let xi = xi3();
        let h = HessianData::kahler(3);
        for ch in [Chirality::Even, Chirality::Odd] {
            let q = a.q_symbol(QOrder::Minus1, ch, &xi, &h).unwrap().matrix;
            let d = a.d1(ch, &xi).unwrap().matrix;
            assert!(max_abs(&(d * q - a.identity())) < 1e-14);
        }
    }

    #[test]
    fn q_minus2_is_linear_in_a_and_homogeneous() {
        let a = alg(2);
        let xi = Covector::new(0.3, 0.8, vec![-0.4, 0.6]);
        let mut zero = HessianData::kahler(2);
        zero.a0 = DMatrix::zeros(2, 2);
        let q0 = a.q_symbol(QOrder::Minus2Contact, Chirality::Even, &xi, &zero).unwrap().matrix;
        assert_eq!(max_abs(&q0), 0.0);
        let h = HessianData::kahler(2);
        let q1 = a.q_symbol(QOrder::Minus2Contact, Chirality::Even, &xi, &h).unwrap().matrix;
        let q2 = a.q_symbol(QOrder::Minus2Contact, Chirality::Even, &xi.scaled(3.0), &h).unwrap().matrix;
        assert!(max_abs(&(q2 * re(9.0) - q1)) < 1e-14);
    }

    #[test]
    fn kahler_beta() {
        assert_eq!(HessianData::kahler(3).beta(), 2.0);
        assert_eq!(HessianData::kahler(2).matrix_a(), DMatrix::identity(4, 4));
    }

    #[test]
    fn hessian_validation() {
        let id = DMatrix::<f64>::identity(2, 2);
        let z = DMatrix::<f64>::zeros(2, 2);
        let skew = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(HessianData::new(1.0, id.clone(), skew, z.clone(), z.clone()).is_err());
        assert!(HessianData::new(-1.0, id.clone(), z.clone(), z.clone(), z.clone()).is_err());
        assert!(HessianData::new(1.0, id, z.clone(), z.clone(), z).is_ok());
    }

    #[test]
    fn contour_recovers_calderon_symbol() {
        let a = alg(3);
        let xi = Covector::boundary(0.6, vec![0.2, -0.1, 0.4, 0.3]);
        let r = xi.prime_norm();
        for ch in [Chirality::Even, Chirality::Odd] {
            for side in [Side::Plus, Side::Minus] {
                let quad = contour_integral(
                    |z| {
                        let mut v: Vec<C64> = xi.natural().into_iter().map(re).collect();
                        v[0] = z;
                        a.q_minus1_at(ch, &v)
                    },
                    side,
                    r,
                )
                .unwrap();
                let p = quad.value * a.boundary_isomorphism(ch, side).matrix;
                let expect = a.calderon_symbol0(ch, side, &xi).unwrap().matrix;
                assert!(max_abs(&(p - expect)) < 1e-13);
            }
        }
    }

    #[test]
    fn pole_on_contour_is_reported() {
        let circle = Circle { center: C64::new(0.0, 1.0), radius: 1.0 };
        let res = contour_integral_on(|_| DMatrix::zeros(1, 1), circle, &[C64::new(0.0, 0.0)], Side::Plus);
        assert!(matches!(res, Err(SymbolError::PoleOnContour { .. })));
    }

    #[test]
    fn minus1_calderon_on_contact_line_is_scalar() {
        let a = alg(3);
        let h = HessianData::kahler(3);
        let xi = Covector::boundary(-1.5, vec![0.0; 4]);
        let p = a.calderon_symbol_minus1(Chirality::Even, Side::Plus, &xi, &h).unwrap().matrix;
        let expect = a.identity() * re(-h.alpha * h.beta() / (2.0 * 1.5));
        assert!(max_abs(&(p - expect)) < 1e-15);
        let off = Covector::boundary(-1.5, vec![0.1, 0.0, 0.0, 0.0]);
        assert!(matches!(a.calderon_symbol_minus1(Chirality::Even, Side::Plus, &off, &h), Err(SymbolError::OffContactLine(_))));
    }
}
