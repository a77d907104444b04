use super::{
    covering_paths, evaluate_plan, graphs, round_record, EdgeDistribution, LearnerConfig,
    RoundRecord, RunRecord, TransitionGraph, STREAM_PL,
};
use crate::error::Result;
use crate::model::Instance;
use crate::rng::stream;

/// Path learner with exponential weights over transition-graph edges.
///
/// Every round each device draws a path, all plans are scored together, and
/// every edge of every graph receives the estimate `(beta + r 1{e in path}) /
/// q(e)`, where `r` is the NSD of the edge's frame divided by `m`. Weights
/// live in the log domain and are shifted so the largest is 0.
#[derive(Debug, Clone)]
pub struct PathLearner {
    config: LearnerConfig,
    tgs: Vec<TransitionGraph>,
    covers: Vec<Vec<Vec<usize>>>,
    etas: Vec<f64>,
    log_w: Vec<Vec<f64>>,
    round: usize,
}

impl PathLearner {
    pub fn new(instance: &Instance, config: &LearnerConfig) -> Result<Self> {
        config.validate()?;
        let tgs = graphs(instance)?;
        let covers = tgs.iter().map(covering_paths).collect();
        let etas = tgs
            .iter()
            .map(|g| config.eta_for(g.frames(), g.path_count()))
            .collect();
        let log_w = tgs.iter().map(|g| vec![0.0; g.edge_count()]).collect();
        Ok(Self {
            config: config.clone(),
            tgs,
            covers,
            etas,
            log_w,
            round: 0,
        })
    }

    pub fn graph(&self, device: usize) -> &TransitionGraph {
        &self.tgs[device]
    }

    pub fn log_weights(&self, device: usize) -> &[f64] {
        &self.log_w[device]
    }

    pub fn distribution(&self, device: usize) -> Result<EdgeDistribution> {
        EdgeDistribution::from_log_weights(
            &self.tgs[device],
            &self.log_w[device],
            self.config.gamma,
            &self.covers[device],
        )
    }

    /// Plays one round and updates the weights.
    pub fn step(&mut self, instance: &Instance) -> Result<RoundRecord> {
        let (m, k) = (instance.num_devices(), instance.num_frames());
        let mut dists = Vec::with_capacity(m);
        let mut paths = Vec::with_capacity(m);
        for i in 0..m {
            let d = self.distribution(i)?;
            let mut rng = stream(&[self.config.seed, STREAM_PL, self.round as u64, i as u64]);
            paths.push(d.sample(&self.tgs[i], &mut rng));
            dists.push(d);
        }
        let spend: Vec<Vec<u32>> = self
            .tgs
            .iter()
            .zip(&paths)
            .map(|(g, p)| g.path_actions(p))
            .collect();
        let nsd: Vec<usize> = evaluate_plan(instance, &spend)?
            .iter()
            .map(|a| a.served_count())
            .collect();
        let reward: Vec<f64> = nsd.iter().map(|&s| s as f64 / m as f64).collect();

        for i in 0..m {
            let g = &self.tgs[i];
            let mut on_path = vec![false; g.edge_count()];
            for &e in &paths[i] {
                on_path[e] = true;
            }
            let log_w = &mut self.log_w[i];
            for (e, lw) in log_w.iter_mut().enumerate() {
                let pos = g.edge(e).position;
                let r = if on_path[e] && pos < k {
                    reward[pos]
                } else {
                    0.0
                };
                *lw += self.etas[i] * (self.config.beta + r) / dists[i].q[e];
            }
            let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            log_w.iter_mut().for_each(|w| *w -= top);
        }
        self.round += 1;
        Ok(round_record(instance, spend, nsd))
    }
}

/// Trains the path learner for `config.rounds` rounds.
pub fn pl_train(instance: &Instance, config: &LearnerConfig) -> Result<RunRecord> {
    let mut learner = PathLearner::new(instance, config)?;
    let mut record = RunRecord::default();
    for _ in 0..config.rounds {
        record.rounds.push(learner.step(instance)?);
    }
    Ok(record)
}
