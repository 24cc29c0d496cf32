//! Dense linear-algebra helpers shared by the model, symbol and index modules.
//!
//! All numerical-rank decisions go through [`singular_values`] with a threshold
//! taken relative to the largest singular value.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Relative SVD threshold used for kernels, ranks and pseudo-inverses.
pub const RANK_RTOL: f64 = 1e-10;

/// Thin singular value decomposition `m = U diag(s) V^*`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<C64>,
    pub s: Vec<f64>,
    pub v_t: DMatrix<C64>,
}

impl Svd {
    fn recompose(&self) -> DMatrix<C64> {
        let mut us = self.u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= C64::new(self.s[j], 0.0);
        }
        us * &self.v_t
    }
}

fn raw_svd(m: &DMatrix<C64>) -> Svd {
    let svd = m.clone().svd(true, true);
    Svd {
        u: svd.u.expect("svd computed with u"),
        s: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("svd computed with v_t"),
    }
}

/// Singular value decomposition with a reconstruction check.
///
/// The bidiagonal QR iteration in nalgebra occasionally returns inaccurate
/// factors for structured matrices with zero rows; the decomposition of the
/// adjoint is then used instead, whichever reconstructs `m` better.
pub fn svd(m: &DMatrix<C64>) -> Svd {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let tol = 1e-13 * scale * (m.nrows().max(m.ncols()) as f64).sqrt();
    let direct = raw_svd(m);
    let err_direct = max_abs(&(direct.recompose() - m));
    if err_direct <= tol {
        return direct;
    }
    let t = raw_svd(&m.adjoint());
    let flipped = Svd { u: t.v_t.adjoint(), s: t.s, v_t: t.u.adjoint() };
    let err_flipped = max_abs(&(flipped.recompose() - m));
    if err_flipped < err_direct {
        flipped
    } else {
        direct
    }
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = svd(m).s;
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Number of singular values above `rtol * max(sigma_max, floor)`.
///
/// The `floor` keeps an all-zero matrix at rank zero instead of letting the
/// relative threshold collapse to zero.
pub fn numerical_rank(m: &DMatrix<C64>, rtol: f64, floor: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0).max(floor);
    s.iter().filter(|&&v| v > rtol * top).count()
}

/// Moore-Penrose pseudo-inverse, dropping singular values at or below
/// `rtol * max(sigma_max, floor)`.
pub fn pinv(m: &DMatrix<C64>, rtol: f64, floor: f64) -> DMatrix<C64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let Svd { u, s, v_t } = svd(m);
    let top = s.iter().cloned().fold(0.0_f64, f64::max).max(floor);
    let cut = rtol * top;
    let k = s.len();
    let mut out = DMatrix::<C64>::zeros(c, r);
    for i in 0..k {
        if s[i] > cut && s[i] > 0.0 {
            let inv = 1.0 / s[i];
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui) * C64::new(inv, 0.0);
        }
    }
    out
}

/// Orthonormal basis (as columns) for the numerical column space of `m`,
/// with the same cutoff as [`pinv`].
pub fn range_basis(m: &DMatrix<C64>, rtol: f64, floor: f64) -> DMatrix<C64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(r, 0);
    }
    let Svd { u, s, .. } = svd(m);
    let top = s.iter().cloned().fold(0.0_f64, f64::max).max(floor);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| top > 0.0 && s[i] > rtol * top).collect();
    let mut out = DMatrix::<C64>::zeros(r, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// Spectral norm.
pub fn op_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_rank_deficient_matrix_satisfies_penrose_identities() {
        let m = DMatrix::from_row_slice(
            3,
            2,
            &[real(1.0), real(0.0), real(0.0), real(1.0), real(0.0), real(1.0)],
        );
        let p = pinv(&m, RANK_RTOL, 0.0);
        assert!(max_abs(&(&m * &p * &m - &m)) < 1e-14);
        assert!(max_abs(&(&p * &m * &p - &p)) < 1e-14);
        assert!((p[(1, 1)] - real(0.5)).norm() < 1e-14);
    }

    #[test]
    fn rank_of_zero_matrix_is_zero() {
        let z = DMatrix::<C64>::zeros(4, 4);
        assert_eq!(numerical_rank(&z, RANK_RTOL, 1.0), 0);
        assert_eq!(range_basis(&z, RANK_RTOL, 0.0).ncols(), 0);
    }

    #[test]
    fn svd_reconstructs_matrix_with_zero_rows() {
        // Shift pattern with repeated singular values and zero rows.
        let n = 40;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i % 3 != 0 && j + 1 == i {
                C64::new(0.0, ((i + j) as f64).sqrt())
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let d = svd(&m);
        assert!(max_abs(&(d.recompose() - &m)) < 1e-12);
        let p = pinv(&m, RANK_RTOL, 0.0);
        assert!(max_abs(&(&m * &p * &m - &m)) < 1e-12);
    }
}
