//! Scenario parameters, channel generation and the per-user metrics of a
//! beamforming design.

mod channel;
mod ehcurve;
mod metrics;
mod scenario;
pub mod units;

pub use channel::{generate_channels, ChannelSet};
pub use ehcurve::{harvested_power, EhCurve, EhKind, DEMO_CURVE};
pub use metrics::{received_rf_power, sinr, Design, DesignSolution, SolutionSummary};
pub use scenario::{Placement, Scenario};
