use crate::model::{approx_ge, sic_order, FrameAssignment, Instance, NomaGroup};

/// One slot of the selfish policy. Every waiting device that clears its
/// threshold alone transmits at full power; a transmitter is decoded when its
/// SINR, with every lower-gain transmitter as interference, still clears the
/// threshold. Returns `(transmitters, decoded)`, both in SIC order.
pub fn selfish_slot(
    instance: &Instance,
    slot: usize,
    frame: usize,
    waiting: &[bool],
) -> (Vec<usize>, Vec<usize>) {
    let mut transmitters: Vec<usize> = (0..instance.num_devices())
        .filter(|&i| {
            waiting[i] && instance.solo_feasible(i, slot, frame, instance.device(i).max_energy)
        })
        .collect();
    sic_order(instance, slot, frame, &mut transmitters);
    let mut decoded = Vec::new();
    let mut interference = 0.0;
    for &i in &transmitters {
        let received = instance.device(i).max_energy * instance.gain(i, slot, frame);
        if approx_ge(
            received,
            instance.threshold(i, frame) * (1.0 + interference),
        ) {
            decoded.push(i);
        }
        interference += received;
    }
    (transmitters, decoded)
}

/// Selfish baseline over one frame. At most `group_cap` decoded devices are
/// counted per slot, the lowest-gain ones; the rest keep waiting.
pub fn selfish_frame(instance: &Instance, frame: usize) -> FrameAssignment {
    let mut waiting = vec![true; instance.num_devices()];
    let mut out = FrameAssignment::empty(frame, instance.num_slots());
    for j in 0..instance.num_slots() {
        let (_, mut decoded) = selfish_slot(instance, j, frame, &waiting);
        decoded.truncate(instance.group_cap());
        for &i in &decoded {
            waiting[i] = false;
        }
        out.groups[j] = NomaGroup {
            slot: j,
            frame,
            budgets: decoded
                .iter()
                .map(|&i| instance.device(i).max_energy)
                .collect(),
            members: decoded,
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::unit_instance;
    use crate::model::{ChannelTensor, DeviceProfile, FrameDemand};
    use crate::online::{bm_j_uncapped, SlotContext};

    // Thresholds b_i = i for devices 1..=3 and gains (1, 3, 28).
    fn blocking(device_one_present: bool) -> Instance {
        let devices = (0..3)
            .map(|id| DeviceProfile {
                id,
                max_energy: 1.0,
                power_level: 1,
                position: (0.0, 0.0),
            })
            .collect();
        let first = if device_one_present { 1.0 } else { 0.0 };
        let demands = vec![
            vec![FrameDemand::new(first, 1, 2)],
            vec![FrameDemand::new(3f64.log2(), 1, 2)],
            vec![FrameDemand::new(2.0, 1, 2)],
        ];
        let channels =
            ChannelTensor::from_nested(&[vec![vec![1.0]], vec![vec![3.0]], vec![vec![28.0]]])
                .unwrap();
        Instance::new(3, 1.0, devices, demands, channels).unwrap()
    }

    #[test]
    fn single_feasible_device_is_served() {
        let inst = unit_instance(&[vec![2.0]], &[1.0], 1);
        assert_eq!(selfish_frame(&inst, 0).served_devices(), vec![0]);
    }

    #[test]
    fn device_one_blocks_device_two() {
        let inst = blocking(true);
        let (tx, decoded) = selfish_slot(&inst, 0, 0, &[true; 3]);
        assert_eq!(tx, vec![0, 1, 2]);
        assert!(!decoded.contains(&1));
        assert!(decoded.contains(&0));
        // 28 >= 3 * (1 + 1 + 3): the third device still gets through.
        assert!(decoded.contains(&2));

        let inst = blocking(false);
        let (_, decoded) = selfish_slot(&inst, 0, 0, &[true; 3]);
        assert!(decoded.contains(&1));
    }

    #[test]
    fn never_beats_greedy_per_slot() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let m = rng.random_range(1..8);
            let gains: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.random_range(0.1..20.0)]).collect();
            let bits: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..2.5)).collect();
            let inst = unit_instance(&gains, &bits, m);
            let (_, decoded) = selfish_slot(&inst, 0, 0, &vec![true; m]);
            let ctx =
                SlotContext::from_instance(&inst, 0, 0, &inst.full_budgets(), &vec![false; m]);
            assert!(decoded.len() <= bm_j_uncapped(&ctx).len());
        }
    }
}
