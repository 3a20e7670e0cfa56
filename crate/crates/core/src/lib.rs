//! Identity-based agent model: agents whose sense of self spans abstract
//! values choose between bus and taxi through value-over-observable schemas,
//! adapt their identification with each value over epochs, and conform to
//! their social neighbourhood.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod identity;
pub mod network;
pub mod transit;

pub use engine::{run_simulation, Simulation, SimulationConfig, SimulationOutput};
pub use error::{Error, Result};
pub use experiment::{parse_config, run_experiment, ExperimentKind, ExperimentSpec};
pub use identity::{AdaptationParams, EpochLedger, IdentityProfile, Schema};
pub use transit::{TransitMode, Value};
