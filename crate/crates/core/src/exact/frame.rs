//! Exact single-frame optimum by branch-and-bound over slots.
//!
//! Two facts keep the search small. Removing a member from a feasible group
//! keeps it feasible, so some optimum uses, in every slot, a group that no
//! waiting device can join: only such maximal groups are branched on. And a
//! max-flow between the remaining slots (capacity `min(M, candidates)`) and
//! the waiting devices bounds what the rest of the frame can still serve.

use std::collections::HashMap;

use super::{FlowNetwork, OracleGuard};
use crate::error::{Error, Result};
use crate::model::{approx_ge, sic_order, FrameAssignment, Instance, NomaGroup};
use crate::online::bms;

/// Best schedule of one frame and the number of search nodes visited.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOptimum {
    pub served: usize,
    pub assignment: FrameAssignment,
    pub nodes: u64,
}

const MEMO_LIMIT: usize = 1 << 21;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    device: usize,
    received: f64,
    threshold: f64,
}

struct Search {
    num_devices: usize,
    cap: usize,
    slots: Vec<Vec<Candidate>>,
    best: usize,
    best_groups: Vec<Vec<usize>>,
    current: Vec<Vec<usize>>,
    seen: HashMap<(usize, u128), usize>,
    nodes: u64,
}

#[inline]
fn bit(i: usize) -> u128 {
    1u128 << i
}

impl Search {
    /// Upper bound on what slots `from..` can serve among devices outside
    /// `mask`. Returns a cheap bound when that already is `<= need`.
    fn bound(&self, from: usize, mask: u128, need: usize) -> usize {
        let mut total_cap = 0;
        let mut union = 0u128;
        for slot in &self.slots[from..] {
            let mut here = 0;
            for c in slot.iter().filter(|c| mask & bit(c.device) == 0) {
                union |= bit(c.device);
                here += 1;
            }
            total_cap += here.min(self.cap);
        }
        let cheap = total_cap.min(union.count_ones() as usize);
        if cheap <= need {
            return cheap;
        }
        let rest = self.slots.len() - from;
        let (s, t) = (rest + self.num_devices, rest + self.num_devices + 1);
        let mut net = FlowNetwork::new(rest + self.num_devices + 2);
        for (r, slot) in self.slots[from..].iter().enumerate() {
            let mut here = 0;
            for c in slot.iter().filter(|c| mask & bit(c.device) == 0) {
                net.add_edge(r, rest + c.device, 1);
                here += 1;
            }
            if here > 0 {
                net.add_edge(s, r, here.min(self.cap) as u32);
            }
        }
        for i in 0..self.num_devices {
            if union & bit(i) != 0 {
                net.add_edge(rest + i, t, 1);
            }
        }
        net.max_flow(s, t) as usize
    }

    /// Feasible groups of `slot` among devices outside `mask` that no other
    /// such device can join. Each group lists candidate positions in SIC order.
    fn maximal_groups(&self, slot: usize, mask: u128) -> Vec<Vec<usize>> {
        let avail: Vec<usize> = (0..self.slots[slot].len())
            .filter(|&p| mask & bit(self.slots[slot][p].device) == 0)
            .collect();
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.cap);
        self.extend(slot, &avail, 0, 0.0, &mut chosen, &mut out);
        out
    }

    fn extend(
        &self,
        slot: usize,
        avail: &[usize],
        start: usize,
        interference: f64,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cands = &self.slots[slot];
        if chosen.len() < self.cap {
            for a in start..avail.len() {
                let c = cands[avail[a]];
                if approx_ge(c.received, c.threshold * (1.0 + interference)) {
                    chosen.push(avail[a]);
                    self.extend(slot, avail, a + 1, interference + c.received, chosen, out);
                    chosen.pop();
                }
            }
        }
        if self.is_maximal(slot, avail, chosen) {
            out.push(chosen.clone());
        }
    }

    fn is_maximal(&self, slot: usize, avail: &[usize], chosen: &[usize]) -> bool {
        if chosen.len() >= self.cap {
            return true;
        }
        let cands = &self.slots[slot];
        // Candidate positions follow SIC order, so inserting `p` puts it
        // after every chosen position below it.
        avail.iter().filter(|p| !chosen.contains(p)).all(|&p| {
            let mut interference = 0.0;
            let mut inserted = false;
            for &q in chosen.iter() {
                if !inserted && p < q {
                    let c = cands[p];
                    if !approx_ge(c.received, c.threshold * (1.0 + interference)) {
                        return true;
                    }
                    interference += c.received;
                    inserted = true;
                }
                let c = cands[q];
                if !approx_ge(c.received, c.threshold * (1.0 + interference)) {
                    return true;
                }
                interference += c.received;
            }
            if !inserted {
                let c = cands[p];
                if !approx_ge(c.received, c.threshold * (1.0 + interference)) {
                    return true;
                }
            }
            false
        })
    }

    fn run(&mut self, slot: usize, mask: u128, served: usize) {
        self.nodes += 1;
        if slot == self.slots.len() {
            if served > self.best {
                self.best = served;
                self.best_groups = self.current.clone();
            }
            return;
        }
        match self.seen.get(&(slot, mask)) {
            Some(&prev) if prev >= served => return,
            _ => {
                if self.seen.len() < MEMO_LIMIT {
                    self.seen.insert((slot, mask), served);
                }
            }
        }
        let need = self.best.saturating_sub(served);
        if self.bound(slot, mask, need) <= need && self.best >= served {
            return;
        }

        let mut children: Vec<(usize, Vec<usize>)> = self
            .maximal_groups(slot, mask)
            .into_iter()
            .map(|g| {
                let child_mask = g
                    .iter()
                    .fold(mask, |acc, &p| acc | bit(self.slots[slot][p].device));
                let need = self.best.saturating_sub(served + g.len());
                let b = g.len() + self.bound(slot + 1, child_mask, need);
                (b, g)
            })
            .collect();
        children.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.len().cmp(&a.1.len())));

        for (b, g) in children {
            if served + b <= self.best {
                break;
            }
            let devices: Vec<usize> = g.iter().map(|&p| self.slots[slot][p].device).collect();
            let child_mask = devices.iter().fold(mask, |acc, &i| acc | bit(i));
            self.current[slot] = devices;
            self.run(slot + 1, child_mask, served + g.len());
            self.current[slot].clear();
        }
    }
}

/// Exact maximum number of devices one frame can serve when device `i`
/// transmits with `budgets[i]` if grouped.
pub fn opt_bruteforce_frame(
    instance: &Instance,
    frame: usize,
    budgets: &[f64],
    guard: &OracleGuard,
) -> Result<FrameOptimum> {
    guard.check_frame(instance)?;
    let incumbent = bms(instance, frame, budgets)?;
    let (m, n) = (instance.num_devices(), instance.num_slots());
    if frame >= instance.num_frames() {
        return Err(Error::Dimension(format!("frame {frame} out of range")));
    }

    let mut slots = Vec::with_capacity(n);
    let mut order: Vec<usize> = Vec::with_capacity(m);
    for j in 0..n {
        order.clear();
        order.extend((0..m).filter(|&i| instance.solo_feasible(i, j, frame, budgets[i])));
        sic_order(instance, j, frame, &mut order);
        slots.push(
            order
                .iter()
                .map(|&i| Candidate {
                    device: i,
                    received: budgets[i] * instance.gain(i, j, frame),
                    threshold: instance.threshold(i, frame),
                })
                .collect::<Vec<_>>(),
        );
    }

    let mut search = Search {
        num_devices: m,
        cap: instance.group_cap(),
        slots,
        best: incumbent.served_count(),
        best_groups: incumbent.groups.iter().map(|g| g.members.clone()).collect(),
        current: vec![Vec::new(); n],
        seen: HashMap::new(),
        nodes: 0,
    };
    search.run(0, 0, 0);

    let mut assignment = FrameAssignment::empty(frame, n);
    for (j, members) in search.best_groups.into_iter().enumerate() {
        assignment.groups[j] = NomaGroup {
            slot: j,
            frame,
            budgets: members.iter().map(|&i| budgets[i]).collect(),
            members,
        };
    }
    Ok(FrameOptimum {
        served: search.best,
        assignment,
        nodes: search.nodes,
    })
}
