//! Orlicz functions `M_ℓ`, Luxemburg norms, inverses and Legendre conjugates.
//!
//! For a random variable `X`, `M_ℓ(s) = E[(s|X| − 1/ℓ)_+]`; the expected sum
//! of the `ℓ` largest of `N` copies of `|X|` is comparable to `‖(1,…,1)‖_{M_ℓ}`.

mod distribution;
mod function;
pub mod quad;

pub use distribution::{m_ell_from_distribution, quantile_function, EmpiricalDistribution};
pub use function::{
    gaussian_breakpoint, gaussian_q_orlicz, legendre_conjugate, luxemburg_norm, orlicz_inverse, verify_mstar_identity,
    Certificate, MstarReport, MstarResidual, OrliczFunction, MAX_BETA,
};
