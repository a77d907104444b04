//! Independent-set pairing. Candidate groups (a feasible single or pair in a
//! slot) are nodes of a conflict graph `G`: two nodes conflict when they share
//! a slot or a device. In the split graph `H` every pair node becomes two
//! non-adjacent copies with the same neighbors, so an independent set counts
//! a pair twice. A minimum-degree greedy independent set of `H` gives the
//! schedule.
//!
//! Adjacency is never materialized: neighbors are enumerated from per-slot and
//! per-device node lists.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{approx_ge, sic_order, FrameAssignment, Instance, NomaGroup};

/// Candidate group `devices` in `slot`. Pair copies in `H` carry `copy` 0
/// and 1; every other node has copy 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairNode {
    pub slot: usize,
    /// Device ids in SIC order; the second entry is `None` for singles.
    pub devices: (usize, Option<usize>),
    pub copy: u8,
}

impl PairNode {
    pub fn len(&self) -> usize {
        1 + usize::from(self.devices.1.is_some())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn contains(&self, device: usize) -> bool {
        self.devices.0 == device || self.devices.1 == Some(device)
    }

    fn members(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.devices.0).chain(self.devices.1)
    }

    fn lowest_id(&self) -> usize {
        self.devices
            .1
            .map_or(self.devices.0, |d| d.min(self.devices.0))
    }
}

#[derive(Debug, Clone)]
pub struct PairGraph {
    nodes: Vec<PairNode>,
    by_slot: Vec<Vec<usize>>,
    by_device: Vec<Vec<usize>>,
    split: bool,
}

impl PairGraph {
    /// Graph `G` of one frame at full power.
    pub fn conflict_graph(instance: &Instance, frame: usize) -> Self {
        let mut nodes = Vec::new();
        let mut feasible = Vec::new();
        for j in 0..instance.num_slots() {
            feasible.clear();
            feasible.extend(
                (0..instance.num_devices()).filter(|&i| {
                    instance.solo_feasible(i, j, frame, instance.device(i).max_energy)
                }),
            );
            sic_order(instance, j, frame, &mut feasible);
            for (a, &lo) in feasible.iter().enumerate() {
                nodes.push(PairNode {
                    slot: j,
                    devices: (lo, None),
                    copy: 0,
                });
                let q_lo = instance.device(lo).max_energy * instance.gain(lo, j, frame);
                for &hi in &feasible[a + 1..] {
                    let q_hi = instance.device(hi).max_energy * instance.gain(hi, j, frame);
                    if approx_ge(q_hi, instance.threshold(hi, frame) * (1.0 + q_lo)) {
                        nodes.push(PairNode {
                            slot: j,
                            devices: (lo, Some(hi)),
                            copy: 0,
                        });
                    }
                }
            }
        }
        Self::index(instance.num_slots(), instance.num_devices(), nodes, false)
    }

    /// Graph `H`: every pair node of `G` replaced by two copies.
    pub fn split(&self) -> Self {
        let nodes = self
            .nodes
            .iter()
            .flat_map(|&v| {
                let copies = if v.len() == 2 { 2 } else { 1 };
                (0..copies).map(move |copy| PairNode { copy, ..v })
            })
            .collect();
        Self::index(self.by_slot.len(), self.by_device.len(), nodes, true)
    }

    fn index(slots: usize, devices: usize, mut nodes: Vec<PairNode>, split: bool) -> Self {
        nodes.sort_by_key(|v| (v.slot, v.lowest_id(), v.devices, v.copy));
        let mut by_slot = vec![Vec::new(); slots];
        let mut by_device = vec![Vec::new(); devices];
        for (idx, v) in nodes.iter().enumerate() {
            by_slot[v.slot].push(idx);
            for d in v.members() {
                by_device[d].push(idx);
            }
        }
        Self {
            nodes,
            by_slot,
            by_device,
            split,
        }
    }

    pub fn nodes(&self) -> &[PairNode] {
        &self.nodes
    }

    pub fn is_split(&self) -> bool {
        self.split
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        let (a, b) = (self.nodes[u], self.nodes[v]);
        a.slot == b.slot && a.devices == b.devices && a.copy != b.copy
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        if u == v || self.twins(u, v) {
            return false;
        }
        let (a, b) = (self.nodes[u], self.nodes[v]);
        a.slot == b.slot || a.members().any(|d| b.contains(d))
    }

    /// Calls `f` once for every neighbor of `u`.
    fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize)) {
        let v = self.nodes[u];
        for &w in &self.by_slot[v.slot] {
            if w != u && !self.twins(u, w) {
                f(w);
            }
        }
        for &w in &self.by_device[v.devices.0] {
            if self.nodes[w].slot != v.slot {
                f(w);
            }
        }
        if let Some(hi) = v.devices.1 {
            for &w in &self.by_device[hi] {
                let x = self.nodes[w];
                if x.slot != v.slot && !x.contains(v.devices.0) {
                    f(w);
                }
            }
        }
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_neighbor(u, |w| out.push(w));
        out.sort_unstable();
        out
    }

    pub fn degree(&self, u: usize) -> usize {
        let mut d = 0;
        self.for_each_neighbor(u, |_| d += 1);
        d
    }

    /// Minimum-degree greedy independent set: repeatedly take the live node of
    /// least current degree (ties by slot, lowest device id, devices, copy),
    /// then delete it and its neighbors. Returns node indices in pick order.
    pub fn greedy_independent_set(&self) -> Vec<usize> {
        let count = self.nodes.len();
        let mut degree: Vec<usize> = (0..count).map(|u| self.degree(u)).collect();
        let mut alive = vec![true; count];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..count).map(|u| Reverse((degree[u], u))).collect();
        let mut picked = Vec::new();
        let mut removed = Vec::new();
        while let Some(Reverse((d, u))) = heap.pop() {
            if !alive[u] || d != degree[u] {
                continue;
            }
            picked.push(u);
            alive[u] = false;
            removed.clear();
            self.for_each_neighbor(u, |w| {
                if alive[w] {
                    alive[w] = false;
                    removed.push(w);
                }
            });
            for &x in &removed {
                self.for_each_neighbor(x, |w| {
                    if alive[w] {
                        degree[w] -= 1;
                        heap.push(Reverse((degree[w], w)));
                    }
                });
            }
        }
        picked
    }
}

/// Pairing by greedy independent set on the split conflict graph. Needs the
/// whole frame in advance and `M = 2`.
pub fn zz_frame(instance: &Instance, frame: usize) -> Result<FrameAssignment> {
    if instance.group_cap() != 2 {
        return Err(Error::GroupCap {
            algorithm: "zz",
            required: 2,
            actual: instance.group_cap(),
        });
    }
    let h = PairGraph::conflict_graph(instance, frame).split();
    let mut out = FrameAssignment::empty(frame, instance.num_slots());
    for u in h.greedy_independent_set() {
        let v = h.nodes[u];
        let group = &mut out.groups[v.slot];
        if group.is_empty() {
            let members: Vec<usize> = v.members().collect();
            *group = NomaGroup {
                slot: v.slot,
                frame,
                budgets: members
                    .iter()
                    .map(|&i| instance.device(i).max_energy)
                    .collect(),
                members,
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::unit_instance;

    #[test]
    fn single_feasible_device_is_picked() {
        let inst = unit_instance(&[vec![2.0], vec![0.1]], &[1.0; 2], 2);
        assert_eq!(zz_frame(&inst, 0).unwrap().served_devices(), vec![0]);
    }

    #[test]
    fn feasible_pair_is_served_together() {
        // Slot 0 admits {0}, {1} and {0, 1}; slot 1 admits nobody.
        let inst = unit_instance(&[vec![1.0, 0.0], vec![3.0, 0.0]], &[1.0; 2], 2);
        let g = PairGraph::conflict_graph(&inst, 0);
        assert_eq!(g.nodes().len(), 3);
        let h = g.split();
        assert_eq!(h.nodes().len(), 4);
        let a = zz_frame(&inst, 0).unwrap();
        assert_eq!(a.groups[0].members, vec![0, 1]);
    }

    #[test]
    fn split_copies_share_neighbors() {
        let inst = unit_instance(
            &[vec![1.0, 1.0], vec![3.0, 3.0], vec![10.0, 0.5]],
            &[1.0; 3],
            2,
        );
        let g = PairGraph::conflict_graph(&inst, 0);
        let h = g.split();
        assert!(h.nodes().len() <= 2 * g.nodes().len());
        for u in 0..h.nodes().len() {
            for v in 0..h.nodes().len() {
                let (a, b) = (h.nodes()[u], h.nodes()[v]);
                let expect = u != v
                    && !(a.slot == b.slot && a.devices == b.devices)
                    && (a.slot == b.slot || a.members().any(|d| b.contains(d)));
                assert_eq!(h.adjacent(u, v), expect);
                assert_eq!(h.neighbors(u).contains(&v), expect, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn rejects_other_group_caps() {
        let inst = unit_instance(&[vec![2.0]], &[1.0], 1);
        assert!(zz_frame(&inst, 0).is_err());
    }
}
