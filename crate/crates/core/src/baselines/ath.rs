use crate::model::{approx_ge, sic_order, FrameAssignment, Instance, NomaGroup};

/// Clusters of `devices` for `slot`: with the devices sorted by descending
/// gain and `kappa = ceil(len / M)`, cluster `l` holds ranks `l, kappa + l,
/// 2 kappa + l, ...`.
pub fn ath_clusters(
    instance: &Instance,
    slot: usize,
    frame: usize,
    devices: &[usize],
) -> Vec<Vec<usize>> {
    let mut sorted = devices.to_vec();
    sic_order(instance, slot, frame, &mut sorted);
    sorted.reverse();
    let kappa = sorted.len().div_ceil(instance.group_cap());
    (0..kappa)
        .map(|l| sorted.iter().skip(l).step_by(kappa).copied().collect())
        .collect()
}

/// Drops members outside their window, then repeatedly the lowest-gain member
/// whose SINR condition fails. Returns the survivors in SIC order.
fn prune(instance: &Instance, slot: usize, frame: usize, cluster: &[usize]) -> Vec<usize> {
    let mut members: Vec<usize> = cluster
        .iter()
        .copied()
        .filter(|&i| {
            let d = instance.demand(i, frame);
            d.has_packet() && d.covers(slot)
        })
        .collect();
    sic_order(instance, slot, frame, &mut members);
    loop {
        let mut interference = 0.0;
        let failing = members.iter().position(|&i| {
            let received = instance.device(i).max_energy * instance.gain(i, slot, frame);
            let ok = approx_ge(
                received,
                instance.threshold(i, frame) * (1.0 + interference),
            );
            interference += received;
            !ok
        });
        match failing {
            Some(p) => {
                members.remove(p);
            }
            None => return members,
        }
    }
}

/// Per slot: cluster the waiting devices, prune every cluster to a feasible
/// group and serve the largest (first on ties).
pub fn ath_frame(instance: &Instance, frame: usize) -> FrameAssignment {
    let mut waiting: Vec<usize> = (0..instance.num_devices()).collect();
    let mut out = FrameAssignment::empty(frame, instance.num_slots());
    for j in 0..instance.num_slots() {
        let mut best: Vec<usize> = Vec::new();
        for cluster in ath_clusters(instance, j, frame, &waiting) {
            let kept = prune(instance, j, frame, &cluster);
            if kept.len() > best.len() {
                best = kept;
            }
        }
        waiting.retain(|i| !best.contains(i));
        out.groups[j] = NomaGroup {
            slot: j,
            frame,
            budgets: best
                .iter()
                .map(|&i| instance.device(i).max_energy)
                .collect(),
            members: best,
        };
    }
    out
}
