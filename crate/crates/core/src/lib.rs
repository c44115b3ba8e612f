//! Numerical machinery for spins of centrally symmetric convex bodies in R³.
//!
//! The crate is organised bottom-up:
//!
//! * [`spheregrid`]: Gauss–Legendre rules, product grids on S², orbit-circle rules
//!   and Fibonacci direction sets.
//! * [`harmonics`]: real spherical harmonics orthonormal with respect to the
//!   normalized surface measure, analysis/synthesis and the cosine-transform
//!   multipliers.
//! * [`bodies`]: support-function models with kink metadata.
//! * [`transforms`]: the cosine transform, its inverse, the spin operator and
//!   Poisson smoothing.
//! * [`zonoid`]: positivity certificates, the NNLS zonotope-fit oracle and the
//!   direction scan.
//!
//! All normalizations use the rotation-invariant probability measure σ on S².

pub mod bodies;
pub mod error;
pub mod harmonics;
pub mod numeric;
pub mod spheregrid;
pub mod transforms;
pub mod vec3;
pub mod zonoid;

pub use bodies::{Body, BodyModel, KinkSet};
pub use error::{Result, SpinError};
pub use harmonics::{HarmonicCoeffs, MultiplierTable};
pub use spheregrid::{CircleRule, GaussRule, SphereGrid};
pub use transforms::{GeneratingCoeffs, ProfileKind, ZonalProfile};
pub use vec3::Vec3;
pub use zonoid::{Certificate, CertifyParams, ScanReport, Verdict};

/// Relative tolerance below which odd-degree content is treated as quadrature noise.
pub const PARITY_TOL: f64 = 1e-9;

/// Hard cap on the band limit.
pub const MAX_DEGREE: usize = 256;
