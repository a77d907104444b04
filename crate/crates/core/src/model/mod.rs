//! Physical and optimization model of the uplink NOMA system.
//!
//! An [`Instance`] holds `m` devices observed over `k` frames of `n` unit-length
//! slots. Every slot of every frame is one resource block (RB) of bandwidth `W`.
//! Channel gains are noise-normalized, so `power * gain` is directly an SNR.
//!
//! Slot and frame indices are 0-based throughout the crate. The only exception is
//! [`FrameDemand`], which keeps the 1-based `arrival_slot`/`deadline_slot` of the
//! instance file format; use [`FrameDemand::covers`] to test a 0-based slot.

mod lp;
mod rate;
mod schedule;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lp::{export_ilp, PowerMode};
pub use rate::{approx_ge, compute_rate, group_feasible, rate_threshold, FEASIBILITY_RTOL};
pub use schedule::{count_served, FrameAssignment, NomaGroup, Schedule};
pub use validate::{validate_schedule, Constraint, Violation};

/// Static description of one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub id: usize,
    /// Maximum energy (transmit power budget) over the whole horizon, in watts.
    pub max_energy: f64,
    /// Number of power steps: admissible powers are multiples of `max_energy / power_level`.
    pub power_level: u32,
    /// Position in meters inside the deployment square.
    pub position: (f64, f64),
}

impl DeviceProfile {
    /// Watts carried by one lattice step.
    pub fn power_step(&self) -> f64 {
        self.max_energy / f64::from(self.power_level)
    }

    /// Watts of `levels` lattice steps. The top level is exactly `max_energy`.
    pub fn level_power(&self, levels: u32) -> f64 {
        if levels >= self.power_level {
            self.max_energy
        } else {
            self.max_energy * f64::from(levels) / f64::from(self.power_level)
        }
    }
}

/// Packet of one device in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDemand {
    /// Packet size in bits; zero means the device has nothing to send.
    pub packet_bits: f64,
    /// 1-based first slot in which the packet may be sent.
    pub arrival_slot: usize,
    /// 1-based deadline; the last usable slot is `deadline_slot - 1`.
    pub deadline_slot: usize,
}

impl FrameDemand {
    pub fn new(packet_bits: f64, arrival_slot: usize, deadline_slot: usize) -> Self {
        Self {
            packet_bits,
            arrival_slot,
            deadline_slot,
        }
    }

    /// Whether the 0-based `slot` lies in the transmission window.
    pub fn covers(&self, slot: usize) -> bool {
        let one_based = slot + 1;
        one_based >= self.arrival_slot && one_based < self.deadline_slot
    }

    pub fn has_packet(&self) -> bool {
        self.packet_bits > 0.0
    }
}

/// Noise-normalized channel power gains indexed `[device][slot][frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    devices: usize,
    slots: usize,
    frames: usize,
    gains: Vec<f64>,
}

impl ChannelTensor {
    pub fn zeros(devices: usize, slots: usize, frames: usize) -> Self {
        Self {
            devices,
            slots,
            frames,
            gains: vec![0.0; devices * slots * frames],
        }
    }

    pub fn from_nested(nested: &[Vec<Vec<f64>>]) -> Result<Self> {
        let devices = nested.len();
        let slots = nested.first().map_or(0, Vec::len);
        let frames = nested.first().and_then(|d| d.first()).map_or(0, Vec::len);
        let mut tensor = Self::zeros(devices, slots, frames);
        for (i, per_device) in nested.iter().enumerate() {
            if per_device.len() != slots {
                return Err(Error::Dimension(format!(
                    "gains[{i}] has {} slots, expected {slots}",
                    per_device.len()
                )));
            }
            for (j, per_slot) in per_device.iter().enumerate() {
                if per_slot.len() != frames {
                    return Err(Error::Dimension(format!(
                        "gains[{i}][{j}] has {} frames, expected {frames}",
                        per_slot.len()
                    )));
                }
                for (t, &g) in per_slot.iter().enumerate() {
                    tensor.set(i, j, t, g);
                }
            }
        }
        Ok(tensor)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.devices)
            .map(|i| {
                (0..self.slots)
                    .map(|j| (0..self.frames).map(|t| self.get(i, j, t)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.devices, self.slots, self.frames)
    }

    #[inline]
    fn index(&self, device: usize, slot: usize, frame: usize) -> usize {
        debug_assert!(device < self.devices && slot < self.slots && frame < self.frames);
        (device * self.slots + slot) * self.frames + frame
    }

    #[inline]
    pub fn get(&self, device: usize, slot: usize, frame: usize) -> f64 {
        self.gains[self.index(device, slot, frame)]
    }

    pub fn set(&mut self, device: usize, slot: usize, frame: usize, gain: f64) {
        let idx = self.index(device, slot, frame);
        self.gains[idx] = gain;
    }

    pub fn values(&self) -> &[f64] {
        &self.gains
    }
}

/// Scalar parameters of an instance, as stored in the `params` block of the
/// instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub num_devices: usize,
    pub num_slots: usize,
    pub num_frames: usize,
    pub group_cap: usize,
    pub rb_bandwidth_hz: f64,
    /// Seed the instance was generated from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Full problem input.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    params: InstanceParams,
    devices: Vec<DeviceProfile>,
    demands: Vec<Vec<FrameDemand>>,
    channels: ChannelTensor,
    thresholds: Vec<f64>,
}

impl Instance {
    /// Builds and validates an instance. Dimensions `m`, `n`, `k` are taken from
    /// the channel tensor and checked against the other arguments.
    pub fn new(
        group_cap: usize,
        rb_bandwidth_hz: f64,
        devices: Vec<DeviceProfile>,
        demands: Vec<Vec<FrameDemand>>,
        channels: ChannelTensor,
    ) -> Result<Self> {
        let (m, n, k) = channels.dims();
        let params = InstanceParams {
            num_devices: m,
            num_slots: n,
            num_frames: k,
            group_cap,
            rb_bandwidth_hz,
            seed: None,
        };
        Self::from_parts(params, devices, demands, channels)
    }

    pub(crate) fn from_parts(
        params: InstanceParams,
        devices: Vec<DeviceProfile>,
        demands: Vec<Vec<FrameDemand>>,
        channels: ChannelTensor,
    ) -> Result<Self> {
        let InstanceParams {
            num_devices: m,
            num_slots: n,
            num_frames: k,
            group_cap,
            rb_bandwidth_hz,
            ..
        } = params;
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::InvalidInstance(format!(
                "m, n, k must be positive (got {m}, {n}, {k})"
            )));
        }
        if channels.dims() != (m, n, k) {
            return Err(Error::Dimension(format!(
                "channel tensor is {:?}, expected ({m}, {n}, {k})",
                channels.dims()
            )));
        }
        if group_cap == 0 || group_cap > m {
            return Err(Error::InvalidInstance(format!(
                "group cap M = {group_cap} must satisfy 1 <= M <= m = {m}"
            )));
        }
        if !(rb_bandwidth_hz.is_finite() && rb_bandwidth_hz > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "rb bandwidth must be positive, got {rb_bandwidth_hz}"
            )));
        }
        if devices.len() != m {
            return Err(Error::Dimension(format!(
                "{} device profiles for m = {m}",
                devices.len()
            )));
        }
        for (i, d) in devices.iter().enumerate() {
            if d.id != i {
                return Err(Error::InvalidInstance(format!(
                    "device at position {i} has id {}",
                    d.id
                )));
            }
            if !(d.max_energy.is_finite() && d.max_energy > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "device {i}: max_energy must be positive, got {}",
                    d.max_energy
                )));
            }
            if d.power_level == 0 {
                return Err(Error::InvalidInstance(format!(
                    "device {i}: power_level must be >= 1"
                )));
            }
        }
        if demands.len() != m {
            return Err(Error::Dimension(format!(
                "demands has {} rows for m = {m}",
                demands.len()
            )));
        }
        for (i, row) in demands.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension(format!(
                    "demands[{i}] has {} frames, expected {k}",
                    row.len()
                )));
            }
            for (t, d) in row.iter().enumerate() {
                if !(d.packet_bits.is_finite() && d.packet_bits >= 0.0) {
                    return Err(Error::InvalidInstance(format!(
                        "demands[{i}][{t}]: packet_bits must be >= 0"
                    )));
                }
                if d.arrival_slot < 1 || d.arrival_slot > n {
                    return Err(Error::InvalidInstance(format!(
                        "demands[{i}][{t}]: arrival_slot {} outside 1..={n}",
                        d.arrival_slot
                    )));
                }
                if d.deadline_slot <= d.arrival_slot || d.deadline_slot > n + 1 {
                    return Err(Error::InvalidInstance(format!(
                        "demands[{i}][{t}]: deadline_slot {} outside {}..={}",
                        d.deadline_slot,
                        d.arrival_slot + 1,
                        n + 1
                    )));
                }
            }
        }
        if let Some(pos) = channels
            .values()
            .iter()
            .position(|g| !(g.is_finite() && *g >= 0.0))
        {
            let (i, rest) = (pos / (n * k), pos % (n * k));
            return Err(Error::InvalidInstance(format!(
                "gains[{i}][{}][{}] = {} is not a finite non-negative number",
                rest / k,
                rest % k,
                channels.values()[pos]
            )));
        }

        let thresholds = demands
            .iter()
            .flat_map(|row| {
                row.iter()
                    .map(|d| rate_threshold(d.packet_bits, rb_bandwidth_hz))
            })
            .collect();
        Ok(Self {
            params,
            devices,
            demands,
            channels,
            thresholds,
        })
    }

    pub fn params(&self) -> &InstanceParams {
        &self.params
    }

    pub fn num_devices(&self) -> usize {
        self.params.num_devices
    }

    pub fn num_slots(&self) -> usize {
        self.params.num_slots
    }

    pub fn num_frames(&self) -> usize {
        self.params.num_frames
    }

    pub fn group_cap(&self) -> usize {
        self.params.group_cap
    }

    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.params.rb_bandwidth_hz
    }

    pub fn seed(&self) -> Option<u64> {
        self.params.seed
    }

    pub fn devices(&self) -> &[DeviceProfile] {
        &self.devices
    }

    pub fn device(&self, i: usize) -> &DeviceProfile {
        &self.devices[i]
    }

    pub fn demands(&self) -> &[Vec<FrameDemand>] {
        &self.demands
    }

    pub fn demand(&self, device: usize, frame: usize) -> &FrameDemand {
        &self.demands[device][frame]
    }

    pub fn channels(&self) -> &ChannelTensor {
        &self.channels
    }

    #[inline]
    pub fn gain(&self, device: usize, slot: usize, frame: usize) -> f64 {
        self.channels.get(device, slot, frame)
    }

    /// SINR threshold `2^(L/W) - 1` of the device's packet in `frame`.
    #[inline]
    pub fn threshold(&self, device: usize, frame: usize) -> f64 {
        self.thresholds[device * self.params.num_frames + frame]
    }

    /// Full-energy budgets, the binary-power setting.
    pub fn full_budgets(&self) -> Vec<f64> {
        self.devices.iter().map(|d| d.max_energy).collect()
    }

    /// Whether `device` may transmit in `slot` of `frame` with `power` on its own:
    /// it has a packet, the slot is inside its window and the solo SNR clears
    /// the threshold.
    pub fn solo_feasible(&self, device: usize, slot: usize, frame: usize, power: f64) -> bool {
        let demand = self.demand(device, frame);
        demand.has_packet()
            && power > 0.0
            && demand.covers(slot)
            && approx_ge(
                power * self.gain(device, slot, frame),
                self.threshold(device, frame),
            )
    }

    /// Single-frame restriction in which the `excluded` devices have no packet.
    pub fn single_frame_excluding(&self, frame: usize, excluded: &[bool]) -> Instance {
        let mut out = self.single_frame(frame);
        for (i, row) in out.demands.iter_mut().enumerate() {
            if excluded.get(i).copied().unwrap_or(false) {
                row[0].packet_bits = 0.0;
            }
        }
        out.thresholds = out
            .demands
            .iter()
            .map(|row| rate_threshold(row[0].packet_bits, out.params.rb_bandwidth_hz))
            .collect();
        out
    }

    /// Copy of this instance restricted to a single frame.
    pub fn single_frame(&self, frame: usize) -> Instance {
        let (m, n, _) = self.channels.dims();
        let mut channels = ChannelTensor::zeros(m, n, 1);
        for i in 0..m {
            for j in 0..n {
                channels.set(i, j, 0, self.gain(i, j, frame));
            }
        }
        let demands = self.demands.iter().map(|row| vec![row[frame]]).collect();
        let params = InstanceParams {
            num_frames: 1,
            ..self.params.clone()
        };
        Instance::from_parts(params, self.devices.clone(), demands, channels)
            .expect("restriction of a valid instance is valid")
    }

    /// Copy with a different group cap.
    pub fn with_group_cap(&self, group_cap: usize) -> Result<Instance> {
        let params = InstanceParams {
            group_cap,
            ..self.params.clone()
        };
        Instance::from_parts(
            params,
            self.devices.clone(),
            self.demands.clone(),
            self.channels.clone(),
        )
    }
}

/// Sorts device ids into SIC order for one RB: ascending gain, ties by id.
pub fn sic_order(instance: &Instance, slot: usize, frame: usize, devices: &mut [usize]) {
    devices.sort_by(|&a, &b| {
        instance
            .gain(a, slot, frame)
            .total_cmp(&instance.gain(b, slot, frame))
            .then(a.cmp(&b))
    });
}
