//! Exact integer arithmetic for the gluing and characteristic-number index
//! formulas: relative indices of Szegő projectors from filling data, the
//! index of the extended double, Seiberg–Witten dimensions and the co-ball
//! bundle special case.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopoError {
    #[error("integrality violation: {numerator} is {residue} mod {denominator}")]
    IntegralityViolation { numerator: i64, denominator: i64, residue: i64 },
    #[error("invalid filling descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("characteristic numbers violate 4·c2 = c1² - 3·sign - 2·χ (lhs {lhs}, rhs {rhs})")]
    InconsistentNumbers { lhs: i64, rhs: i64 },
    #[error("missing characteristic number: {0}")]
    Missing(&'static str),
    #[error("index from c1 ({c1}) disagrees with index from c2 ({c2})")]
    IndexMismatch { c1: i64, c2: i64 },
    #[error("surface Euler characteristic {0} must be even and at most 2")]
    InvalidSurface(i64),
    #[error("co-sphere bundles over surfaces with χ = {0} and χ = {1} are not contactomorphic")]
    InadmissibleDiffeomorphism(i64, i64),
}

/// Exact quotient, or the offending residue.
fn exact_div(numerator: i64, denominator: i64) -> Result<i64, TopoError> {
    let residue = numerator.rem_euclid(denominator);
    if residue != 0 {
        return Err(TopoError::IntegralityViolation { numerator, denominator, residue });
    }
    Ok(numerator.div_euclid(denominator))
}

/// Topological and holomorphic data of a strictly pseudoconvex filling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingDescriptor {
    pub signature: i64,
    pub euler: i64,
    #[serde(default)]
    pub h01: u64,
    /// `dim H^{0,2}`; only used when `chi_prime` is not given.
    #[serde(default)]
    pub h02: u64,
    #[serde(default)]
    pub stein: bool,
    /// `χ′_O = Σ_{q≥1} (-1)^q dim H^{0,q}`. Defaults to `h02 - h01`.
    #[serde(default)]
    pub chi_prime: Option<i64>,
}

impl FillingDescriptor {
    pub fn new(signature: i64, euler: i64, h01: u64) -> Self {
        Self { signature, euler, h01, h02: 0, stein: false, chi_prime: None }
    }

    pub fn stein(signature: i64, euler: i64) -> Self {
        Self { stein: true, ..Self::new(signature, euler, 0) }
    }

    pub fn with_chi_prime(mut self, chi_prime: i64) -> Self {
        self.chi_prime = Some(chi_prime);
        self
    }

    pub fn chi_prime(&self) -> i64 {
        self.chi_prime.unwrap_or(self.h02 as i64 - self.h01 as i64)
    }

    pub fn validate(&self) -> Result<(), TopoError> {
        if self.stein && (self.h01 != 0 || self.h02 != 0 || self.chi_prime() != 0) {
            return Err(TopoError::InvalidDescriptor("a Stein filling has h01 = h02 = 0 and chi_prime = 0".into()));
        }
        Ok(())
    }
}

/// Characteristic numbers of a spin-c 4-manifold. Any of them may be absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinCNumbers {
    #[serde(default)]
    pub c1_squared: Option<i64>,
    #[serde(default)]
    pub c2: Option<i64>,
    #[serde(default)]
    pub signature: Option<i64>,
    #[serde(default)]
    pub euler: Option<i64>,
}

impl SpinCNumbers {
    pub fn new(c1_squared: i64, c2: i64, signature: i64, euler: i64) -> Self {
        Self { c1_squared: Some(c1_squared), c2: Some(c2), signature: Some(signature), euler: Some(euler) }
    }

    /// Checks `4·c2 = c1² - 3·sign - 2·χ` when all four numbers are present.
    pub fn validate(&self) -> Result<(), TopoError> {
        if let (Some(c1), Some(c2), Some(s), Some(e)) = (self.c1_squared, self.c2, self.signature, self.euler) {
            let (lhs, rhs) = (4 * c2, c1 - 3 * s - 2 * e);
            if lhs != rhs {
                return Err(TopoError::InconsistentNumbers { lhs, rhs });
            }
        }
        Ok(())
    }
}

/// `Rind(S₀, S₁′) = Ind(ð_glued) - χ′_O(X₀) + χ′_O(X₁)`.
pub fn rind_weinstein(ind_glued: i64, x0: &FillingDescriptor, x1: &FillingDescriptor) -> Result<i64, TopoError> {
    x0.validate()?;
    x1.validate()?;
    Ok(ind_glued - x0.chi_prime() + x1.chi_prime())
}

/// Index of the even Dirac operator on the extended double of two fillings of
/// a contact 3-manifold: `(sign₀ - sign₁ + χ₀ - χ₁)/4`.
pub fn glued_double_index(x0: &FillingDescriptor, x1: &FillingDescriptor) -> Result<i64, TopoError> {
    exact_div(x0.signature - x1.signature + x0.euler - x1.euler, 4)
}

/// Relative index of the classical Szegő projectors of two complex fillings
/// of a contact 3-manifold.
pub fn rind_3d(x0: &FillingDescriptor, x1: &FillingDescriptor) -> Result<i64, TopoError> {
    x0.validate()?;
    x1.validate()?;
    Ok(x0.h01 as i64 - x1.h01 as i64 + glued_double_index(x0, x1)?)
}

/// `Ind = (c1² - sign)/8`.
pub fn ind_from_c1(nums: &SpinCNumbers) -> Result<i64, TopoError> {
    nums.validate()?;
    let c1 = nums.c1_squared.ok_or(TopoError::Missing("c1_squared"))?;
    let s = nums.signature.ok_or(TopoError::Missing("signature"))?;
    exact_div(c1 - s, 8)
}

/// `Ind = (2·c2 + sign + χ)/4`, cross-checked against `ind_from_c1` when
/// `c1²` is also given.
pub fn ind_from_c2(nums: &SpinCNumbers) -> Result<i64, TopoError> {
    nums.validate()?;
    let c2 = nums.c2.ok_or(TopoError::Missing("c2"))?;
    let s = nums.signature.ok_or(TopoError::Missing("signature"))?;
    let e = nums.euler.ok_or(TopoError::Missing("euler"))?;
    let ind = exact_div(2 * c2 + s + e, 4)?;
    if nums.c1_squared.is_some() {
        let c1 = ind_from_c1(nums)?;
        if c1 != ind {
            return Err(TopoError::IndexMismatch { c1, c2: ind });
        }
    }
    Ok(ind)
}

/// Seiberg–Witten formal dimension `(c1² - 3·sign - 2·χ)/4`.
pub fn seiberg_witten_dim_from_numbers(nums: &SpinCNumbers) -> Result<i64, TopoError> {
    nums.validate()?;
    let c1 = nums.c1_squared.ok_or(TopoError::Missing("c1_squared"))?;
    let s = nums.signature.ok_or(TopoError::Missing("signature"))?;
    let e = nums.euler.ok_or(TopoError::Missing("euler"))?;
    exact_div(c1 - 3 * s - 2 * e, 4)
}

/// `d_SW` of the extended double `X₀ ⊔ X̄₁`: `-χ[X₁]`.
pub fn seiberg_witten_dim(x1_euler: i64) -> i64 {
    -x1_euler
}

/// `d_SW` of the orientation-reversed double `X₁ ⊔ X̄₀`: `-χ[X₀]`.
pub fn seiberg_witten_dim_reversed(x0_euler: i64) -> i64 {
    -x0_euler
}

/// Co-ball bundle of a compact oriented surface with Euler characteristic
/// `χ[M]`: `χ[X] = χ[M]`, `sign[X] = sgn χ[M]`, Stein.
pub fn coball_descriptor(euler_of_base: i64) -> Result<FillingDescriptor, TopoError> {
    if euler_of_base % 2 != 0 || euler_of_base > 2 {
        return Err(TopoError::InvalidSurface(euler_of_base));
    }
    Ok(FillingDescriptor::stein(euler_of_base.signum(), euler_of_base))
}

/// Index of the Fourier integral operator quantizing a contact
/// diffeomorphism of co-sphere bundles of surfaces.
pub fn fio_index_surfaces(base0_euler: i64, base1_euler: i64) -> Result<i64, TopoError> {
    let x0 = coball_descriptor(base0_euler)?;
    let x1 = coball_descriptor(base1_euler)?;
    if base0_euler != base1_euler {
        return Err(TopoError::InadmissibleDiffeomorphism(base0_euler, base1_euler));
    }
    rind_3d(&x0, &x1)
}

/// Vector-bundle form `Ind(glued) - b₀ + b₁`.
pub fn rind_bundle_coefficients(ind_glued: i64, bterm0: i64, bterm1: i64) -> i64 {
    ind_glued - bterm0 + bterm1
}

/// Contact degree assumed when the boundary has dimension 3.
pub const CDEG_DIM3: i64 = 0;

/// Relative index after changing the contact diffeomorphism by `ψ`:
/// `Rind(S₀, S₁″) = Rind(S₀, S₁′) + cdeg(ψ)`.
pub fn change_of_diffeomorphism(rind: i64, cdeg: i64) -> i64 {
    rind + cdeg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weinstein_formula() {
        let s = FillingDescriptor::stein(1, 2);
        assert_eq!(rind_weinstein(5, &s, &s), Ok(5));
        let x0 = FillingDescriptor::new(0, 3, 2);
        let x1 = FillingDescriptor::new(0, 3, 1).with_chi_prime(4);
        assert_eq!(rind_weinstein(0, &x0, &x0), Ok(0));
        assert_eq!(rind_weinstein(0, &x0, &x1), Ok(x1.chi_prime() - x0.chi_prime()));
        assert_eq!(x0.chi_prime(), -2);
    }

    #[test]
    fn stein_descriptor_must_be_holomorphically_trivial() {
        let mut bad = FillingDescriptor::stein(1, 2);
        bad.h01 = 1;
        assert!(bad.validate().is_err());
        let bad = FillingDescriptor::stein(1, 2).with_chi_prime(1);
        assert!(rind_weinstein(0, &bad, &bad).is_err());
    }

    #[test]
    fn three_dimensional_formula() {
        let a = FillingDescriptor::stein(1, 2);
        assert_eq!(rind_3d(&a, &a), Ok(0));
        let x0 = FillingDescriptor::stein(1, 4);
        let x1 = FillingDescriptor::stein(-1, 2);
        assert_eq!(rind_3d(&x0, &x1), Ok(1));
        assert_eq!(rind_3d(&x1, &x0), Ok(-1));
        let y0 = FillingDescriptor::new(1, 2, 0);
        let y1 = FillingDescriptor::new(0, 0, 0);
        assert_eq!(
            rind_3d(&y0, &y1),
            Err(TopoError::IntegralityViolation { numerator: 3, denominator: 4, residue: 3 })
        );
        let h = FillingDescriptor::new(1, 4, 3);
        assert_eq!(rind_3d(&h, &x1), Ok(4));
    }

    #[test]
    fn characteristic_number_formulas() {
        assert_eq!(ind_from_c1(&SpinCNumbers { c1_squared: Some(9), signature: Some(1), ..Default::default() }), Ok(1));
        assert_eq!(ind_from_c1(&SpinCNumbers { c1_squared: Some(-4), signature: Some(-4), ..Default::default() }), Ok(0));
        assert!(matches!(
            ind_from_c1(&SpinCNumbers { c1_squared: Some(10), signature: Some(1), ..Default::default() }),
            Err(TopoError::IntegralityViolation { residue: 1, .. })
        ));
        let c2 = |c2, s, e| SpinCNumbers { c2: Some(c2), signature: Some(s), euler: Some(e), ..Default::default() };
        assert_eq!(ind_from_c2(&c2(0, 1, 3)), Ok(1));
        assert!(matches!(ind_from_c2(&c2(1, 0, 1)), Err(TopoError::IntegralityViolation { residue: 3, .. })));
        // CP²: c1² = 9, sign = 1, χ = 3, c2 = 0.
        let cp2 = SpinCNumbers::new(9, 0, 1, 3);
        assert_eq!(ind_from_c1(&cp2), ind_from_c2(&cp2));
        assert_eq!(seiberg_witten_dim_from_numbers(&cp2), Ok(0));
        assert!(matches!(SpinCNumbers::new(9, 1, 1, 3).validate(), Err(TopoError::InconsistentNumbers { .. })));
        assert_eq!(ind_from_c2(&SpinCNumbers { c2: Some(0), ..Default::default() }), Err(TopoError::Missing("signature")));
    }

    #[test]
    fn seiberg_witten_and_coball() {
        assert_eq!(seiberg_witten_dim(2), -2);
        assert_eq!(seiberg_witten_dim(0), 0);
        assert_eq!(seiberg_witten_dim_reversed(4), -4);
        for (chi, sign) in [(2, 1), (0, 0), (-2, -1)] {
            let d = coball_descriptor(chi).unwrap();
            assert_eq!((d.signature, d.euler, d.h01, d.chi_prime(), d.stein), (sign, chi, 0, 0, true));
        }
        assert_eq!(coball_descriptor(3), Err(TopoError::InvalidSurface(3)));
        assert_eq!(coball_descriptor(4), Err(TopoError::InvalidSurface(4)));
    }

    #[test]
    fn surfaces_and_bundles() {
        assert_eq!(fio_index_surfaces(2, 2), Ok(0));
        assert_eq!(fio_index_surfaces(0, 0), Ok(0));
        assert_eq!(fio_index_surfaces(2, 0), Err(TopoError::InadmissibleDiffeomorphism(2, 0)));
        assert_eq!(rind_bundle_coefficients(5, 2, 1), 4);
        assert_eq!(rind_bundle_coefficients(7, 3, 3), 7);
        assert_eq!(change_of_diffeomorphism(3, CDEG_DIM3), 3);
    }

    #[test]
    fn descriptor_json_defaults() {
        let d: FillingDescriptor = serde_json::from_str(r#"{"signature": 1, "euler": 2, "stein": true}"#).unwrap();
        assert_eq!(d, FillingDescriptor::stein(1, 2));
        let d: FillingDescriptor = serde_json::from_str(r#"{"signature": 0, "euler": 1, "h01": 1, "chi_prime": 3}"#).unwrap();
        assert_eq!(d.chi_prime(), 3);
    }
}
