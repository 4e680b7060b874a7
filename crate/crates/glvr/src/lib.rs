//! Volume rendering with Gauss-Laguerre color sampling.
//!
//! The volume rendering integral C(r) = ∫ T(t) σ(r(t)) c(r(t), d) dt becomes
//! ∫₀^∞ e^{-x} c(x) dx under the optical-depth substitution x(t) = ∫ σ, which
//! is exactly the form a Gauss-Laguerre rule integrates. A ray march over the
//! cheap density field locates the positions where the accumulated depth
//! crosses each rule node; the expensive color field is evaluated only there
//! (n points, typically 8) instead of at every march step. The crate provides
//! both that estimator and the classic dense Riemann-sum renderer, three field
//! backends (analytic primitives, voxel grids, voxel density + small color
//! network), image quality metrics, and polynomial-approximation diagnostics
//! for the color-along-a-ray profile that motivates the quadrature approach.

pub mod cli;
pub mod field;
pub mod image_buffer;
pub mod math;
pub mod metrics;
pub mod quadrature;
pub mod render;
pub mod scene;
pub mod verify;
