//! Teleportation of a single mode through two-mode continuous-variable
//! cluster states under a finite-width ("insufficiently selective")
//! projective momentum measurement.
//!
//! Shot-noise units, ħ = 2. The crate provides:
//!
//! * [`gaussian`] — Gaussian function algebra: squeezed-vacuum
//!   wavefunctions, the heat kernel, and the product-of-Gaussians recursion;
//! * [`states`] — the squeezed-vacuum ancilla and squeezed-coherent payload;
//! * [`gates`] — quadrature maps and grid actions of X, Z, F and C_Z;
//! * [`measurement`] — outcome distribution `P(p₁)`, windowed teleportation
//!   probability, window placement, and the grid projector;
//! * [`teleport`] — post-measurement states and single-shot / averaged
//!   fidelities, closed form and quadrature;
//! * [`chain`] — sequential clusters with intermediate corrections and the
//!   composite-envelope reduction;
//! * [`grid`] / [`oracle`] — discretized wavefunctions and the independent
//!   brute-force pipeline used to verify every closed form.

pub mod chain;
pub mod error;
pub mod gates;
pub mod gaussian;
pub mod grid;
pub mod measurement;
pub mod optim;
pub mod oracle;
pub mod quad;
pub mod states;
pub mod teleport;

pub use error::{Error, Result};
pub use gaussian::{Gaussian1D, GaussianProductResult};
pub use grid::{Basis, GridWavefunction, GridWavefunction2D};
pub use measurement::SelectivityWindow;
pub use states::{
    EffectiveDisplacement, PositionDensity, SqueezedCoherent, SqueezedVacuum,
};
pub use teleport::TeleportResult;
