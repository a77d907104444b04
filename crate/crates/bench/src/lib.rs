//! Instances shared by the benchmarks.

use noma_core::{generate_instance, Instance, ScenarioParams};

/// Single-frame instance with the default scenario parameters.
pub fn instance(devices: usize, slots: usize, group_cap: usize, seed: u64) -> Instance {
    let params = ScenarioParams::new(devices, slots, 1, group_cap).with_seed(seed);
    generate_instance(&params).expect("default scenario parameters are valid")
}

/// Multi-frame instance for the learners.
pub fn horizon_instance(
    devices: usize,
    slots: usize,
    frames: usize,
    levels: u32,
    seed: u64,
) -> Instance {
    let mut params = ScenarioParams::new(devices, slots, frames, 2).with_seed(seed);
    params.power_level = levels;
    generate_instance(&params).expect("default scenario parameters are valid")
}
