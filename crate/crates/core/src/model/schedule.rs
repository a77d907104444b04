use serde::{Deserialize, Serialize};

use super::Instance;

/// Devices sharing one RB, listed in SIC order, with the power each transmits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomaGroup {
    pub slot: usize,
    pub frame: usize,
    pub members: Vec<usize>,
    pub budgets: Vec<f64>,
}

impl NomaGroup {
    pub fn empty(slot: usize, frame: usize) -> Self {
        Self {
            slot,
            frame,
            members: Vec::new(),
            budgets: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether the group satisfies the SINR condition of every member on
    /// `instance`. Members must already be in SIC order.
    pub fn is_feasible(&self, instance: &Instance) -> bool {
        let gains: Vec<f64> = self
            .members
            .iter()
            .map(|&i| instance.gain(i, self.slot, self.frame))
            .collect();
        let thresholds: Vec<f64> = self
            .members
            .iter()
            .map(|&i| instance.threshold(i, self.frame))
            .collect();
        super::group_feasible(&gains, &self.budgets, &thresholds)
    }
}

/// Per-slot groups chosen for one frame. `groups[j]` is the group of slot `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAssignment {
    pub frame: usize,
    pub groups: Vec<NomaGroup>,
}

impl FrameAssignment {
    pub fn empty(frame: usize, num_slots: usize) -> Self {
        Self {
            frame,
            groups: (0..num_slots).map(|j| NomaGroup::empty(j, frame)).collect(),
        }
    }

    /// Number of served devices (NSD) in the frame.
    pub fn served_count(&self) -> usize {
        self.groups.iter().map(NomaGroup::len).sum()
    }

    /// Served device ids, ascending.
    pub fn served_devices(&self) -> Vec<usize> {
        let mut served: Vec<usize> = self
            .groups
            .iter()
            .flat_map(|g| g.members.iter().copied())
            .collect();
        served.sort_unstable();
        served
    }
}

/// Decision variables `x`, `p`, `z` of the full problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    devices: usize,
    slots: usize,
    frames: usize,
    x: Vec<bool>,
    p: Vec<f64>,
    z: Vec<bool>,
}

impl Schedule {
    pub fn zeros(devices: usize, slots: usize, frames: usize) -> Self {
        let cells = devices * slots * frames;
        Self {
            devices,
            slots,
            frames,
            x: vec![false; cells],
            p: vec![0.0; cells],
            z: vec![false; devices * frames],
        }
    }

    pub fn for_instance(instance: &Instance) -> Self {
        Self::zeros(
            instance.num_devices(),
            instance.num_slots(),
            instance.num_frames(),
        )
    }

    /// Schedule realizing the given per-frame groups: every member transmits
    /// with its group budget and is marked served in that frame.
    pub fn from_assignments<'a>(
        instance: &Instance,
        assignments: impl IntoIterator<Item = &'a FrameAssignment>,
    ) -> Self {
        let mut schedule = Self::for_instance(instance);
        for assignment in assignments {
            for group in &assignment.groups {
                for (&device, &power) in group.members.iter().zip(&group.budgets) {
                    schedule.transmit(device, group.slot, assignment.frame, power);
                }
            }
        }
        schedule
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.devices, self.slots, self.frames)
    }

    #[inline]
    fn cell(&self, device: usize, slot: usize, frame: usize) -> usize {
        (device * self.slots + slot) * self.frames + frame
    }

    /// Sets `x = 1`, `p = power` on the RB and `z = 1` for the frame.
    pub fn transmit(&mut self, device: usize, slot: usize, frame: usize, power: f64) {
        let c = self.cell(device, slot, frame);
        self.x[c] = true;
        self.p[c] = power;
        self.z[device * self.frames + frame] = true;
    }

    pub fn set_x(&mut self, device: usize, slot: usize, frame: usize, value: bool) {
        let c = self.cell(device, slot, frame);
        self.x[c] = value;
    }

    pub fn set_p(&mut self, device: usize, slot: usize, frame: usize, power: f64) {
        let c = self.cell(device, slot, frame);
        self.p[c] = power;
    }

    pub fn set_z(&mut self, device: usize, frame: usize, value: bool) {
        self.z[device * self.frames + frame] = value;
    }

    #[inline]
    pub fn x(&self, device: usize, slot: usize, frame: usize) -> bool {
        self.x[self.cell(device, slot, frame)]
    }

    #[inline]
    pub fn p(&self, device: usize, slot: usize, frame: usize) -> f64 {
        self.p[self.cell(device, slot, frame)]
    }

    #[inline]
    pub fn z(&self, device: usize, frame: usize) -> bool {
        self.z[device * self.frames + frame]
    }

    pub fn served_in_frame(&self, frame: usize) -> usize {
        (0..self.devices).filter(|&i| self.z(i, frame)).count()
    }
}

/// Objective value: how many (device, frame) pairs are served.
pub fn count_served(schedule: &Schedule) -> usize {
    schedule.z.iter().filter(|&&z| z).count()
}
