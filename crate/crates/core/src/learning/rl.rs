use rand::Rng;

use super::{evaluate_plan, round_record, RunRecord, STREAM_RL};
use crate::error::Result;
use crate::model::Instance;
use crate::rng::stream;

/// Random allocation: in every frame each device spends a uniform number of
/// lattice steps between 0 and what it has left. Plays `rounds` independent
/// rounds.
pub fn rl_policy(instance: &Instance, rounds: usize, seed: u64) -> Result<RunRecord> {
    let (m, k) = (instance.num_devices(), instance.num_frames());
    let mut record = RunRecord::default();
    for round in 0..rounds {
        let spend: Vec<Vec<u32>> = (0..m)
            .map(|i| {
                let mut rng = stream(&[seed, STREAM_RL, round as u64, i as u64]);
                let mut left = instance.device(i).power_level;
                (0..k)
                    .map(|_| {
                        let a = rng.random_range(0..=left);
                        left -= a;
                        a
                    })
                    .collect()
            })
            .collect();
        let nsd = evaluate_plan(instance, &spend)?
            .iter()
            .map(|a| a.served_count())
            .collect();
        record.rounds.push(round_record(instance, spend, nsd));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::tests::small;

    #[test]
    fn single_level_is_a_coin_flip() {
        let inst = small(1, 1);
        let rec = rl_policy(&inst, 4000, 1).unwrap();
        let sends = rec.rounds.iter().filter(|r| r.spend[0][0] == 1).count() as f64;
        assert!((sends / 4000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn nothing_left_means_nothing_spent() {
        let inst = small(2, 3);
        for r in rl_policy(&inst, 200, 5).unwrap().rounds {
            for row in &r.spend {
                let mut left = 2;
                for &a in row {
                    assert!(a <= left);
                    left -= a;
                }
            }
        }
    }

    #[test]
    fn spends_early() {
        let inst = small(2, 4);
        let profile = rl_policy(&inst, 2000, 3).unwrap().power_profile();
        assert!(profile[0] > profile[3]);
        // Uniform over {0, 1, 2} halves: mean 0.5 W in the first frame.
        assert!((profile[0] - 0.5).abs() < 0.03);
    }
}
