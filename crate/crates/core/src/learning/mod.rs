//! Multi-frame power allocation. Each device plans its per-frame spend as a
//! path through its own transition graph; a round commits every device's
//! plan, scores each frame with the online scheduler and feeds the frame NSD
//! back to every device.

mod pl;
mod ql;
mod rl;
mod sampler;
mod tg;

pub use pl::{pl_train, PathLearner};
pub use ql::{ql_train, QTable};
pub use rl::rl_policy;
pub use sampler::{edge_probabilities, EdgeDistribution};
pub use tg::{build_tg, covering_paths, TgEdge, TransitionGraph};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FrameAssignment, Instance, Schedule};
use crate::online::bms;

/// Hyperparameters of the learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    /// Weight of uniform exploration over the covering paths.
    pub gamma: f64,
    /// Implicit exploration bias added to every edge reward.
    pub beta: f64,
    /// Learning rate; `None` uses `gamma / (2 (k + 1) sigma_i)` per device.
    pub eta: Option<f64>,
    /// Q-learning step size.
    pub alpha: f64,
    /// Q-learning exploration probability.
    pub epsilon: f64,
    pub rounds: usize,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            beta: 0.01,
            eta: None,
            alpha: 0.5,
            epsilon: 0.1,
            rounds: 100,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param("gamma", "must lie in (0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::param("beta", "must lie in (0, 1]"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::param("eta", "must be positive"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::param("epsilon", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Learning rate of a device whose graph has `paths` s-t paths.
    pub fn eta_for(&self, frames: usize, paths: u128) -> f64 {
        self.eta
            .unwrap_or_else(|| self.gamma / (2.0 * (frames as f64 + 1.0) * paths as f64))
    }
}

/// One round of a learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Served devices per frame.
    pub nsd: Vec<usize>,
    /// Mean power over devices per frame, in watts.
    pub mean_power: Vec<f64>,
    /// `spend[i][t]`: lattice steps device `i` spent in frame `t`.
    pub spend: Vec<Vec<u32>>,
}

impl RoundRecord {
    pub fn total_nsd(&self) -> usize {
        self.nsd.iter().sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rounds: Vec<RoundRecord>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Total NSD of every round.
    pub fn totals(&self) -> Vec<usize> {
        self.rounds.iter().map(RoundRecord::total_nsd).collect()
    }

    /// Mean total NSD over the last `max(1, T / 10)` rounds; 0 when empty.
    pub fn final_score(&self) -> f64 {
        let tail = (self.rounds.len() / 10).max(1).min(self.rounds.len());
        if tail == 0 {
            return 0.0;
        }
        let from = self.rounds.len() - tail;
        self.rounds[from..]
            .iter()
            .map(|r| r.total_nsd() as f64)
            .sum::<f64>()
            / tail as f64
    }

    /// Per-frame mean power averaged over all rounds.
    pub fn power_profile(&self) -> Vec<f64> {
        let Some(first) = self.rounds.first() else {
            return Vec::new();
        };
        let mut out = vec![0.0; first.mean_power.len()];
        for r in &self.rounds {
            for (acc, p) in out.iter_mut().zip(&r.mean_power) {
                *acc += p;
            }
        }
        let n = self.rounds.len() as f64;
        out.iter_mut().for_each(|p| *p /= n);
        out
    }

    /// Writes `round,frame,nsd,mean_pc` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["round", "frame", "nsd", "mean_pc"])?;
        for (r, round) in self.rounds.iter().enumerate() {
            for (t, (nsd, pc)) in round.nsd.iter().zip(&round.mean_power).enumerate() {
                w.write_record([
                    r.to_string(),
                    t.to_string(),
                    nsd.to_string(),
                    pc.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Runs the online scheduler on `frame` with device `i` transmitting
/// `powers[i]` watts when grouped.
pub fn evaluate_power_plan(
    instance: &Instance,
    frame: usize,
    powers: &[f64],
) -> Result<FrameAssignment> {
    if powers.len() != instance.num_devices() {
        return Err(Error::Dimension(format!(
            "{} powers for {} devices",
            powers.len(),
            instance.num_devices()
        )));
    }
    for (i, (&p, d)) in powers.iter().zip(instance.devices()).enumerate() {
        if !(p >= 0.0 && p <= d.max_energy) {
            return Err(Error::PowerExceeded {
                device: i,
                power: p,
                available: d.max_energy,
            });
        }
    }
    bms(instance, frame, powers)
}

/// Checks that no device spends more than its lattice allows.
fn check_spend(instance: &Instance, spend: &[Vec<u32>]) -> Result<()> {
    if spend.len() != instance.num_devices() {
        return Err(Error::Dimension(format!(
            "{} plans for {} devices",
            spend.len(),
            instance.num_devices()
        )));
    }
    for (i, (row, d)) in spend.iter().zip(instance.devices()).enumerate() {
        if row.len() != instance.num_frames() {
            return Err(Error::Dimension(format!(
                "plan of device {i} covers {} frames, instance has {}",
                row.len(),
                instance.num_frames()
            )));
        }
        let total: u32 = row.iter().sum();
        if total > d.power_level {
            return Err(Error::PowerExceeded {
                device: i,
                power: d.power_step() * f64::from(total),
                available: d.max_energy,
            });
        }
    }
    Ok(())
}

/// Watts of every device in `frame` under a lattice plan.
pub fn frame_powers(instance: &Instance, spend: &[Vec<u32>], frame: usize) -> Vec<f64> {
    instance
        .devices()
        .iter()
        .zip(spend)
        .map(|(d, row)| d.level_power(row[frame]))
        .collect()
}

/// Evaluates every frame of a lattice plan (`spend[i][t]` steps).
pub fn evaluate_plan(instance: &Instance, spend: &[Vec<u32>]) -> Result<Vec<FrameAssignment>> {
    check_spend(instance, spend)?;
    (0..instance.num_frames())
        .map(|t| bms(instance, t, &frame_powers(instance, spend, t)))
        .collect()
}

/// NSD of one frame under a lattice plan whose later frames may be unset.
fn bms_frame_nsd(instance: &Instance, spend: &[Vec<u32>], frame: usize) -> Result<usize> {
    Ok(bms(instance, frame, &frame_powers(instance, spend, frame))?.served_count())
}

/// Schedule realized by a lattice plan.
pub fn schedule_for_plan(instance: &Instance, spend: &[Vec<u32>]) -> Result<Schedule> {
    let frames = evaluate_plan(instance, spend)?;
    Ok(Schedule::from_assignments(instance, &frames))
}

fn round_record(instance: &Instance, spend: Vec<Vec<u32>>, nsd: Vec<usize>) -> RoundRecord {
    let m = instance.num_devices() as f64;
    let mean_power = (0..instance.num_frames())
        .map(|t| frame_powers(instance, &spend, t).iter().sum::<f64>() / m)
        .collect();
    RoundRecord {
        nsd,
        mean_power,
        spend,
    }
}

pub(crate) const STREAM_PL: u64 = 0x504C;
pub(crate) const STREAM_QL: u64 = 0x514C;
pub(crate) const STREAM_RL: u64 = 0x524C;

fn graphs(instance: &Instance) -> Result<Vec<TransitionGraph>> {
    instance
        .devices()
        .iter()
        .map(|d| build_tg(d, instance.num_frames()))
        .collect()
}
