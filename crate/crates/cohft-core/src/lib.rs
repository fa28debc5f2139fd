//! Exact verification engine for cohomological gauge field theories.
//!
//! The crate builds scalar supersymmetries and action functionals for
//! Donaldson–Witten, Seiberg–Witten, Kapustin–Witten, and generalized
//! Seiberg–Witten theories, and checks their algebraic identities by
//! randomized exact evaluation over Gaussian rationals with Grassmann
//! coefficients. A floating-point toy model realizes the Euler-form /
//! Poincaré–Hopf interpolation on the two-sphere.

pub mod checks;
pub mod equivariant;
pub mod field_calculus;
pub mod gca;
pub mod grassmann;
pub mod matrix;
pub mod rep;
pub mod scalar;
pub mod serialize;
pub mod torus;
pub mod toy_model;
pub mod verifier;

pub use grassmann::{Grassmann, GrassmannError};
pub use matrix::{AntisymMatrix, MatrixError};
pub use scalar::ExactScalar;
