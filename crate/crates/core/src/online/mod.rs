//! Online per-frame grouping: the slot-by-slot greedy scheduler, ranking for
//! single-device RBs and the selfish baseline.

mod ranking;
mod selfish;

pub use ranking::ranking_m1;
pub use selfish::{selfish_frame, selfish_slot};

use crate::error::{Error, Result};
use crate::model::{approx_ge, FrameAssignment, Instance, NomaGroup};

/// What the base station knows when it reaches `slot`: the devices still
/// waiting for service, their gains in this slot, their power budgets for the
/// frame and their SINR thresholds.
///
/// `eligible` is kept in SIC order (ascending gain, ties by id), and the other
/// vectors are aligned with it.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotContext {
    pub slot: usize,
    pub frame: usize,
    pub eligible: Vec<usize>,
    pub gains: Vec<f64>,
    pub budgets: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl SlotContext {
    /// Builds the context from explicit per-device data. Entries are re-sorted
    /// into SIC order; devices with no budget are dropped.
    pub fn new(
        slot: usize,
        frame: usize,
        eligible: Vec<usize>,
        gains: Vec<f64>,
        budgets: Vec<f64>,
        thresholds: Vec<f64>,
    ) -> Result<Self> {
        let len = eligible.len();
        if gains.len() != len || budgets.len() != len || thresholds.len() != len {
            return Err(Error::Dimension(format!(
                "slot context with {len} devices but {} gains, {} budgets, {} thresholds",
                gains.len(),
                budgets.len(),
                thresholds.len()
            )));
        }
        let mut order: Vec<usize> = (0..len).filter(|&p| budgets[p] > 0.0).collect();
        order.sort_by(|&a, &b| {
            gains[a]
                .total_cmp(&gains[b])
                .then(eligible[a].cmp(&eligible[b]))
        });
        Ok(Self {
            slot,
            frame,
            eligible: order.iter().map(|&p| eligible[p]).collect(),
            gains: order.iter().map(|&p| gains[p]).collect(),
            budgets: order.iter().map(|&p| budgets[p]).collect(),
            thresholds: order.iter().map(|&p| thresholds[p]).collect(),
        })
    }

    /// Context of `slot` in `frame` for the devices not marked in `served`.
    pub fn from_instance(
        instance: &Instance,
        slot: usize,
        frame: usize,
        budgets: &[f64],
        served: &[bool],
    ) -> Self {
        let eligible: Vec<usize> = (0..instance.num_devices())
            .filter(|&i| {
                let d = instance.demand(i, frame);
                !served[i] && budgets[i] > 0.0 && d.has_packet() && d.covers(slot)
            })
            .collect();
        let gains = eligible
            .iter()
            .map(|&i| instance.gain(i, slot, frame))
            .collect();
        let pick = eligible.iter().map(|&i| budgets[i]).collect();
        let thresholds = eligible
            .iter()
            .map(|&i| instance.threshold(i, frame))
            .collect();
        Self::new(slot, frame, eligible, gains, pick, thresholds).expect("aligned by construction")
    }

    pub fn len(&self) -> usize {
        self.eligible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eligible.is_empty()
    }
}

/// Greedy pass over a sorted context. Returns the accepted positions and the
/// number of devices examined.
fn greedy(ctx: &SlotContext) -> (Vec<usize>, usize) {
    let mut accepted = Vec::new();
    let mut interference = 0.0;
    let mut examined = 0;
    for p in 0..ctx.len() {
        examined += 1;
        let received = ctx.budgets[p] * ctx.gains[p];
        if approx_ge(received, ctx.thresholds[p] * (1.0 + interference)) {
            accepted.push(p);
            interference += received;
        }
    }
    (accepted, examined)
}

fn to_group(ctx: &SlotContext, positions: &[usize]) -> NomaGroup {
    NomaGroup {
        slot: ctx.slot,
        frame: ctx.frame,
        members: positions.iter().map(|&p| ctx.eligible[p]).collect(),
        budgets: positions.iter().map(|&p| ctx.budgets[p]).collect(),
    }
}

/// Largest feasible group of the slot, truncated to its `group_cap`
/// lowest-gain members.
pub fn bm_j(ctx: &SlotContext, group_cap: usize) -> NomaGroup {
    bm_j_counted(ctx, group_cap).0
}

/// [`bm_j`] without the group cap: a maximum-cardinality feasible subset of
/// the eligible devices.
pub fn bm_j_uncapped(ctx: &SlotContext) -> NomaGroup {
    let (accepted, _) = greedy(ctx);
    to_group(ctx, &accepted)
}

/// [`bm_j`] plus the number of devices the greedy pass examined.
pub fn bm_j_counted(ctx: &SlotContext, group_cap: usize) -> (NomaGroup, usize) {
    let (mut accepted, examined) = greedy(ctx);
    accepted.truncate(group_cap);
    (to_group(ctx, &accepted), examined)
}

fn check_budgets(instance: &Instance, budgets: &[f64]) -> Result<()> {
    if budgets.len() != instance.num_devices() {
        return Err(Error::Dimension(format!(
            "{} budgets for {} devices",
            budgets.len(),
            instance.num_devices()
        )));
    }
    if let Some(i) = budgets.iter().position(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::param(
            "budgets",
            format!("device {i} has budget {}", budgets[i]),
        ));
    }
    Ok(())
}

/// Serves the frame slot by slot, each slot taking the [`bm_j`] group of the
/// devices not served so far. `budgets[i]` is the power device `i` transmits
/// with if grouped.
pub fn bms(instance: &Instance, frame: usize, budgets: &[f64]) -> Result<FrameAssignment> {
    check_budgets(instance, budgets)?;
    let mut served = vec![false; instance.num_devices()];
    let mut out = FrameAssignment::empty(frame, instance.num_slots());
    for j in 0..instance.num_slots() {
        let ctx = SlotContext::from_instance(instance, j, frame, budgets, &served);
        let group = bm_j(&ctx, instance.group_cap());
        for &i in &group.members {
            served[i] = true;
        }
        out.groups[j] = group;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::unit_instance;
    use crate::model::{group_feasible, validate_schedule, Schedule};
    use proptest::prelude::*;

    fn ctx(gains: &[f64], budgets: &[f64], thresholds: &[f64]) -> SlotContext {
        SlotContext::new(
            0,
            0,
            (0..gains.len()).collect(),
            gains.to_vec(),
            budgets.to_vec(),
            thresholds.to_vec(),
        )
        .unwrap()
    }

    fn brute_max(c: &SlotContext) -> usize {
        let len = c.len();
        let mut best = 0;
        for mask in 0u32..(1 << len) {
            let pick: Vec<usize> = (0..len).filter(|p| mask >> p & 1 == 1).collect();
            let g: Vec<f64> = pick.iter().map(|&p| c.gains[p]).collect();
            let b: Vec<f64> = pick.iter().map(|&p| c.budgets[p]).collect();
            let t: Vec<f64> = pick.iter().map(|&p| c.thresholds[p]).collect();
            if group_feasible(&g, &b, &t) {
                best = best.max(pick.len());
            }
        }
        best
    }

    #[test]
    fn empty_slot_gives_empty_group() {
        assert!(bm_j(&ctx(&[], &[], &[]), 2).is_empty());
    }

    #[test]
    fn accepts_three_truncates_to_two() {
        let c = ctx(&[10.0, 1.0, 3.0], &[1.0; 3], &[1.0; 3]);
        assert_eq!(bm_j_uncapped(&c).members, vec![1, 2, 0]);
        assert_eq!(bm_j(&c, 2).members, vec![1, 2]);
        assert_eq!(brute_max(&c), 3);
    }

    #[test]
    fn keeps_lower_gain_device_when_pair_fails() {
        let c = ctx(&[1.0, 1.5], &[1.0; 2], &[1.0; 2]);
        assert_eq!(bm_j(&c, 2).members, vec![0]);
        assert_eq!(brute_max(&c), 1);
    }

    #[test]
    fn mismatched_context_is_rejected() {
        assert!(SlotContext::new(0, 0, vec![0, 1], vec![1.0], vec![1.0; 2], vec![1.0; 2]).is_err());
    }

    #[test]
    fn examined_count_is_linear() {
        for len in [10usize, 100, 1000] {
            let gains: Vec<f64> = (0..len).map(|x| x as f64 + 1.0).collect();
            let c = ctx(&gains, &vec![1.0; len], &vec![1.0; len]);
            assert_eq!(bm_j_counted(&c, 2).1, len);
        }
    }

    #[test]
    fn bms_serves_each_device_once() {
        let inst = unit_instance(
            &[vec![2.0, 2.0], vec![3.0, 3.0], vec![0.5, 9.0]],
            &[1.0; 3],
            1,
        );
        let a = bms(&inst, 0, &inst.full_budgets()).unwrap();
        assert_eq!(a.served_count(), 2);
        let mut devs = a.served_devices();
        devs.sort_unstable();
        devs.dedup();
        assert_eq!(devs.len(), 2);
        let s = Schedule::from_assignments(&inst, [&a]);
        assert!(validate_schedule(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn nobody_feasible_nobody_served() {
        let inst = unit_instance(&[vec![0.1, 0.2], vec![0.3, 0.4]], &[1.0; 2], 2);
        assert_eq!(
            bms(&inst, 0, &inst.full_budgets()).unwrap().served_count(),
            0
        );
    }

    #[test]
    fn zero_budgets_serve_nobody() {
        let inst = unit_instance(&[vec![5.0], vec![6.0]], &[1.0; 2], 2);
        assert_eq!(bms(&inst, 0, &[0.0, 0.0]).unwrap().served_count(), 0);
        assert!(bms(&inst, 0, &[0.0]).is_err());
        assert!(bms(&inst, 0, &[-1.0, 0.0]).is_err());
    }

    #[test]
    fn heterogeneous_thresholds_can_beat_greedy() {
        // Ascending gain takes the first device and then blocks the other two,
        // which fit together.
        let c = ctx(
            &[13.817732432914141, 16.36901665805219, 14.5762715590147],
            &[1.5602024079491048, 1.7177116238345607, 0.8010522541113795],
            &[0.1, 1.4269376728056404, 1.7730524236173621],
        );
        assert_eq!(bm_j_uncapped(&c).len(), 1);
        assert_eq!(brute_max(&c), 2);
    }

    proptest! {
        #[test]
        fn greedy_is_maximum_for_common_threshold(
            gains in prop::collection::vec(0.01f64..20.0, 0..10),
            budget in 0.1f64..2.0,
            threshold in 0.1f64..4.0,
        ) {
            let len = gains.len();
            let c = ctx(&gains, &vec![budget; len], &vec![threshold; len]);
            prop_assert_eq!(bm_j_uncapped(&c).len(), brute_max(&c));
        }

        #[test]
        fn greedy_is_feasible_and_bounded(
            rows in prop::collection::vec((0.01f64..20.0, 0.1f64..2.0, 0.1f64..4.0), 0..10)
        ) {
            let g: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let t: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let c = ctx(&g, &b, &t);
            let group = bm_j_uncapped(&c);
            prop_assert!(group.len() <= brute_max(&c));
            let gg: Vec<f64> = group.members.iter().map(|&i| g[i]).collect();
            let tt: Vec<f64> = group.members.iter().map(|&i| t[i]).collect();
            prop_assert!(group_feasible(&gg, &group.budgets, &tt));
        }
    }
}
