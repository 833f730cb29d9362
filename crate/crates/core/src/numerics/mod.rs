//! Dense complex linear algebra and the special functions used by the
//! polynomial constructions.

mod linalg;
mod special;

pub use linalg::{
    eig_hermitian, eig_unitary, embed, partial_trace, random_unitary, spectral_norm, svd,
    trace_norm_hermitian, CMatrix, CVector, C64,
};
pub use special::{
    bessel_i, bessel_i_scaled, bessel_i_scaled_all, bessel_j, bessel_j_all, chebyshev_t, erfc,
};
