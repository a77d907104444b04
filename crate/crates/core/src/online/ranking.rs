use crate::error::{Error, Result};
use crate::model::{FrameAssignment, Instance, NomaGroup};

/// Single-device RBs: each slot serves the solo-feasible waiting device with
/// the smallest rank. `rank[i]` is the position of device `i` in the
/// permutation.
pub fn ranking_m1(instance: &Instance, frame: usize, rank: &[usize]) -> Result<FrameAssignment> {
    if instance.group_cap() != 1 {
        return Err(Error::GroupCap {
            algorithm: "ranking",
            required: 1,
            actual: instance.group_cap(),
        });
    }
    let m = instance.num_devices();
    if rank.len() != m {
        return Err(Error::Dimension(format!(
            "{} ranks for {m} devices",
            rank.len()
        )));
    }
    let mut seen = vec![false; m];
    for &r in rank {
        if r >= m || std::mem::replace(&mut seen[r], true) {
            return Err(Error::param("rank", "not a permutation of the devices"));
        }
    }

    let mut served = vec![false; m];
    let mut out = FrameAssignment::empty(frame, instance.num_slots());
    for j in 0..instance.num_slots() {
        let pick = (0..m)
            .filter(|&i| {
                !served[i] && instance.solo_feasible(i, j, frame, instance.device(i).max_energy)
            })
            .min_by_key(|&i| rank[i]);
        if let Some(i) = pick {
            served[i] = true;
            out.groups[j] = NomaGroup {
                slot: j,
                frame,
                members: vec![i],
                budgets: vec![instance.device(i).max_energy],
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
    fn lowest_rank_wins() {
        let inst = unit_instance(&[vec![2.0, 0.0], vec![3.0, 0.0]], &[1.0; 2], 1);
        let a = ranking_m1(&inst, 0, &[0, 1]).unwrap();
        assert_eq!(a.groups[0].members, vec![0]);
        assert!(a.groups[1].is_empty());
        let a = ranking_m1(&inst, 0, &[1, 0]).unwrap();
        assert_eq!(a.groups[0].members, vec![1]);
    }

    #[test]
    fn nobody_feasible() {
        let inst = unit_instance(&[vec![0.1, 0.2]], &[1.0], 1);
        assert_eq!(ranking_m1(&inst, 0, &[0]).unwrap().served_count(), 0);
    }

    #[test]
    fn rejects_group_cap_and_bad_permutation() {
        let inst = unit_instance(&[vec![2.0], vec![2.0]], &[1.0; 2], 2);
        assert!(matches!(
            ranking_m1(&inst, 0, &[0, 1]),
            Err(Error::GroupCap { required: 1, .. })
        ));
        let inst = unit_instance(&[vec![2.0], vec![2.0]], &[1.0; 2], 1);
        assert!(ranking_m1(&inst, 0, &[0, 0]).is_err());
        assert!(ranking_m1(&inst, 0, &[0]).is_err());
    }
}
