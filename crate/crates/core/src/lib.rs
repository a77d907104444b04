//! Online grouping, scheduling and power allocation for uplink NOMA IoT networks.
//!
//! The crate is organized around the single-frame grouping problem and the
//! multi-frame power allocation built on top of it:
//!
//! - [`model`]: SINR and rate computation, group feasibility, schedule
//!   validation and LP export.
//! - [`scenario`]: random instances and the instance file format.
//! - [`online`]: the per-slot greedy grouper, the 2-competitive slot scheduler,
//!   ranking for `M = 1` and the selfish baseline.
//! - [`baselines`]: cluster-based and independent-set benchmark groupers.
//! - [`exact`]: offline optima used as ground truth.
//! - [`learning`]: per-device transition graphs and the path, Q-table and
//!   random power allocators.
//! - [`harness`]: experiment sweeps, CSV and SVG reports.

pub mod baselines;
pub mod error;
pub mod exact;
pub mod harness;
pub mod learning;
pub mod model;
pub mod online;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use model::{
    compute_rate, count_served, export_ilp, group_feasible, validate_schedule, ChannelTensor,
    DeviceProfile, FrameAssignment, FrameDemand, Instance, NomaGroup, PowerMode, Schedule,
};
pub use scenario::{generate_instance, load_instance, save_instance, ScenarioParams};
