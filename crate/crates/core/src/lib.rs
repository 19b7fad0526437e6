//! Geometry-driven beam steering for binary-phase reconfigurable intelligent
//! surfaces.
//!
//! The crate models a transmitter illuminating a planar surface of
//! 1-bit switchable unit cells, configures the surface in closed form for a
//! target point, and maps the received power over a measurement grid.
//!
//! ```
//! use ris_steer::{fieldmap, io, metrics, presets, Scene};
//!
//! let mut scenario = io::parse_scenario(presets::preset("area1_near").unwrap()).unwrap();
//! scenario.grid.count_u = 3;
//! scenario.grid.count_v = 3;
//! let scene = Scene::new(scenario).unwrap();
//! let map = fieldmap::sweep_targets(&scene, 1).unwrap();
//! let report = metrics::analyze(&map, scene.scenario.rx).unwrap();
//! assert!(report.peak_value_dbm.is_finite());
//! ```

pub mod channel;
pub mod fieldmap;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod optimizer;
pub mod presets;
pub mod scenario;

pub use channel::{AmplitudeModel, ComplexCoeff, PhaseState, RfParams, RisConfig};
pub use fieldmap::{PowerMap, SweepMode};
pub use geometry::{GridSpec, Pose, RisLayout, Vec3};
pub use metrics::SelectivityReport;
pub use optimizer::HypothesisSet;
pub use scenario::{Scenario, Scene};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario: {0}")]
    Scenario(#[from] io::ScenarioError),
    #[error("geometry: {0}")]
    Geometry(#[from] geometry::GeometryError),
    #[error("channel: {0}")]
    Channel(#[from] channel::ChannelError),
    #[error("optimizer: {0}")]
    Optimizer(#[from] optimizer::OptimizerError),
    #[error("sweep: {0}")]
    Sweep(#[from] fieldmap::SweepError),
    #[error("metrics: {0}")]
    Metrics(#[from] metrics::MetricsError),
    #[error("io: {0}")]
    Io(#[from] io::IoError),
}
