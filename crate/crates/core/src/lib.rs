//! Particle dynamics on the unit torus with orientation-dependent pair forces.
//!
//! Particles interact through a force that splits into a component along a
//! local fibre direction `s` and one across it along `l`. With a homogeneous
//! direction field the particles settle into parallel lines; with singular
//! fields they trace loops, whorls and deltas reminiscent of fingerprints.

pub mod analysis;
pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiment;
pub mod field;
pub mod force;
pub mod output;
pub mod sim;
pub mod torus;

pub use error::{Error, Result};
pub use field::{DirectionField, Frame, Singularity, SingularityKind};
pub use force::{ForceLaw, ForceModel};
pub use sim::{run, ParticleState, RunReport, SimConfig, Simulation};
pub use torus::{TorusPoint, TorusVector};
