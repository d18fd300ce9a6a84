//! Classical dynamics of a diamagnetic nanoparticle falling past current-carrying
//! wires: field models, adaptive trajectory integration, closed-form estimates,
//! the two-stage split-and-recombine protocol and current-noise sensitivity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod protocol;
pub mod roots;
pub mod sensitivity;
pub mod types;

pub use config::RunConfig;
pub use dynamics::{
    closest_approach, integrate, EventKind, IntegratorOptions, Trajectory, Watcher,
};
pub use error::{Error, Result};
pub use fields::{FieldEnvironment, FieldModel};
pub use protocol::{run_protocol, ScenarioConfig, ScenarioReport};
pub use types::{ParticleSpec, PhysicalConstants, TrajectoryState, Vec2, Wire};
