//! Offline optima used as ground truth: maximum matching for single-device
//! RBs, branch-and-bound for one frame and a lattice dynamic program over the
//! horizon.

mod flow;
mod frame;
mod horizon;
mod matching;

pub use frame::{opt_bruteforce_frame, FrameOptimum};
pub use horizon::{opt_bruteforce_horizon, HorizonOptimum};
pub use matching::{opt_matching_m1, BipartiteInstance};

pub(crate) use flow::FlowNetwork;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;

/// Hard ceiling of the frame search, set by its bitset state.
pub const MAX_ORACLE_DEVICES: usize = 128;

/// Size limits for the exhaustive oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleGuard {
    /// Largest `m` accepted by the single-frame search.
    pub max_devices: usize,
    /// Largest `n` accepted by the single-frame search.
    pub max_slots: usize,
    /// Largest `m` accepted by the horizon search.
    pub horizon_devices: usize,
    /// Largest `k` accepted by the horizon search.
    pub horizon_frames: usize,
    /// Largest power level count accepted by the horizon search.
    pub horizon_levels: u32,
}

impl Default for OracleGuard {
    fn default() -> Self {
        Self {
            max_devices: 10,
            max_slots: 5,
            horizon_devices: 4,
            horizon_frames: 3,
            horizon_levels: 3,
        }
    }
}

impl OracleGuard {
    /// Guard that only enforces the structural ceiling of the search.
    pub fn unbounded() -> Self {
        Self {
            max_devices: MAX_ORACLE_DEVICES,
            max_slots: usize::MAX,
            horizon_devices: 8,
            horizon_frames: usize::MAX,
            horizon_levels: u32::MAX,
        }
    }

    pub(crate) fn check_frame(&self, instance: &Instance) -> Result<()> {
        let (m, n) = (instance.num_devices(), instance.num_slots());
        let max_devices = self.max_devices.min(MAX_ORACLE_DEVICES);
        if m > max_devices || n > self.max_slots {
            return Err(Error::GuardExceeded(format!(
                "frame oracle limited to m <= {max_devices}, n <= {} (got m = {m}, n = {n})",
                self.max_slots
            )));
        }
        Ok(())
    }

    pub(crate) fn check_horizon(&self, instance: &Instance) -> Result<()> {
        self.check_frame(instance)?;
        let (m, k) = (instance.num_devices(), instance.num_frames());
        let levels = instance
            .devices()
            .iter()
            .map(|d| d.power_level)
            .max()
            .unwrap_or(0);
        if m > self.horizon_devices || k > self.horizon_frames || levels > self.horizon_levels {
            return Err(Error::GuardExceeded(format!(
                "horizon oracle limited to m <= {}, k <= {}, levels <= {} (got {m}, {k}, {levels})",
                self.horizon_devices, self.horizon_frames, self.horizon_levels
            )));
        }
        Ok(())
    }
}
