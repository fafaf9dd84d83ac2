//! Numerical building blocks: special functions, root finding, dense and
//! Hermitian linear algebra, and a small semidefinite-program solver.

pub mod compensated;
pub mod dense;
pub mod hermitian;
pub mod roots;
pub mod sdp;
pub mod special;

pub use compensated::{cdot, cdot_pairs};
pub use hermitian::{hermitian_from_embedding, hermitian_real_embedding, max_eigpair, EigenPair, HermitianMatrix};
pub use roots::{bisect_root, RootBracket};
pub use special::{exp_integral_e1, expected_kl_kernel, scaled_e1};
