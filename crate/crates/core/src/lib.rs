//! Moment matrices of compactly supported weights and distributions.
//!
//! * [`weights`]: atomic measures, point distributions, densities and
//!   radial Fourier series, with pairing against polynomials.
//! * [`moments`]: analytic and harmonic moment matrices, twists and
//!   coordinate submatrices.
//! * [`recovery`]: numerical rank, support and operator recovery, and the
//!   Cauchy transform.
//! * [`wiener`]: Fourier transforms, projections and the Gaussian atom-mass
//!   functional.
//! * [`vandermonde`]: the symmetric-polynomial annihilation check.
//! * [`cli`]: the JSON experiment runner behind the `finrank` binary.

pub mod error;
pub mod linalg;
pub mod polyalg;
pub mod quadrature;
pub mod weights;
pub mod moments;
pub mod recovery;
pub mod wiener;
pub mod vandermonde;
pub mod ensembles;
pub mod cli;
