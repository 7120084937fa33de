//! Electromagnetic wave scattering by small perfectly conducting bodies.
//!
//! The one-body solver discretizes the surface integral equation for the
//! tangential current J on a collocation mesh and compares the resulting
//! dipole moment and scattered field with the small-body asymptotics
//! Q = −|D|τ∇×E₀. The many-body solver couples M small bodies through
//! their effective fields.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod many_body;
pub mod one_body;
pub mod vector;
pub mod wave;

pub use error::{Error, Result};
pub use geometry::{CollocationMesh, ShapeSpec, WeightRule};
pub use vector::{CMat3, CVec3, Vec3, C64};
pub use wave::IncidentWave;
