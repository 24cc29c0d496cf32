//! Truncated model operators, symbol calculus and relative-index
//! computations for subelliptic boundary problems of the spin-c Dirac
//! operator on strictly pseudoconvex domains.
//!
//! * [`fock`]: creation/annihilation algebra on a truncated Hermite basis.
//! * [`spinor`]: antiholomorphic forms, the model Dirac operator and Szegő projectors.
//! * [`symbol`]: principal symbols, Calderon symbols and residue quadrature.
//! * [`model`]: block model comparison operators and their explicit inverses.
//! * [`fredholm`]: relative index of projector pairs at finite dimension.
//! * [`topo`]: integer index formulas for fillings of contact 3-manifolds.

pub mod fock;
pub mod fredholm;
pub mod linalg;
pub mod matrix_json;
pub mod model;
pub mod spinor;
pub mod symbol;
pub mod topo;

pub type C64 = num_complex::Complex<f64>;

pub use fock::{FockError, FockSpace, FockSpaceConfig, Layout, OscillatorMultiIndex, TruncatedOperator};
pub use spinor::{FormMultiIndex, GradedBasisIndex, ModelSpace, Parity, SpinorError};
