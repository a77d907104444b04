use super::FlowNetwork;
use crate::error::{Error, Result};
use crate::model::{FrameAssignment, Instance, NomaGroup};

/// Slot/device compatibility graph of one frame at full power: slot `j` and
/// device `i` are adjacent when `i` can be served alone in `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteInstance {
    pub num_slots: usize,
    pub num_devices: usize,
    /// `(slot, device)` pairs, slot-major.
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteInstance {
    pub fn from_frame(instance: &Instance, frame: usize) -> Self {
        let mut edges = Vec::new();
        for j in 0..instance.num_slots() {
            for i in 0..instance.num_devices() {
                if instance.solo_feasible(i, j, frame, instance.device(i).max_energy) {
                    edges.push((j, i));
                }
            }
        }
        Self {
            num_slots: instance.num_slots(),
            num_devices: instance.num_devices(),
            edges,
        }
    }

    /// Maximum matching as `(slot, device)` pairs, sorted by slot.
    pub fn max_matching(&self) -> Vec<(usize, usize)> {
        let (n, m) = (self.num_slots, self.num_devices);
        let (s, t) = (n + m, n + m + 1);
        let mut net = FlowNetwork::new(n + m + 2);
        for j in 0..n {
            net.add_edge(s, j, 1);
        }
        for i in 0..m {
            net.add_edge(n + i, t, 1);
        }
        let arcs: Vec<usize> = self
            .edges
            .iter()
            .map(|&(j, i)| net.add_edge(j, n + i, 1))
            .collect();
        net.max_flow(s, t);
        self.edges
            .iter()
            .zip(arcs)
            .filter(|&(_, a)| net.flow(a) > 0)
            .map(|(&e, _)| e)
            .collect()
    }
}

/// Offline optimum of one frame when every RB carries a single device.
pub fn opt_matching_m1(instance: &Instance, frame: usize) -> Result<FrameAssignment> {
    if instance.group_cap() != 1 {
        return Err(Error::GroupCap {
            algorithm: "matching oracle",
            required: 1,
            actual: instance.group_cap(),
        });
    }
    let mut out = FrameAssignment::empty(frame, instance.num_slots());
    for (j, i) in BipartiteInstance::from_frame(instance, frame).max_matching() {
        out.groups[j] = NomaGroup {
            slot: j,
            frame,
            members: vec![i],
            budgets: vec![instance.device(i).max_energy],
        };
    }
    Ok(out)
}
