//! Brute-force references for cross-checking the production kernels.
//!
//! Nothing here calls into the propagator, the `φ`-function machinery, the
//! quadrature module, the FFT, or the pseudo-spectral nonlinearity: the
//! exponentials, integrators and products are all re-derived independently.
//! Only the data containers and the pressure law are shared. Intended for
//! tiny grids and one-dimensional integrals.

pub mod convolution;
pub mod expm;
pub mod radial;
pub mod rk4;

pub use convolution::direct_nonlinearity;
pub use expm::{dense_propagator, expm, generator};
pub use radial::{radial_linear_norm, RadialProfile};
pub use rk4::rk4_mode;
