//! Path distribution of the path learner: a `gamma` mixture of the uniform
//! distribution over a covering path set and the weight-proportional
//! distribution over all s-t paths. The weighted part is sampled edge by edge
//! with the backward sums `Z` (weight pushing), all in the log domain.

use rand::Rng;

use super::TransitionGraph;
use crate::error::{Error, Result};

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone)]
pub struct EdgeDistribution {
    gamma: f64,
    log_weights: Vec<f64>,
    log_z: Vec<f64>,
    log_f: Vec<f64>,
    /// Probability that a path drawn from the mixture traverses each edge.
    pub q: Vec<f64>,
    /// Traversal probability under the weighted part alone.
    pub traversal: Vec<f64>,
    covering: Vec<Vec<usize>>,
}

/// Distribution for positive edge `weights`.
pub fn edge_probabilities(
    tg: &TransitionGraph,
    weights: &[f64],
    gamma: f64,
    covering: &[Vec<usize>],
) -> Result<EdgeDistribution> {
    if let Some(e) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::param(
            "weights",
            format!("edge {e} has weight {}", weights[e]),
        ));
    }
    let logs: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    EdgeDistribution::from_log_weights(tg, &logs, gamma, covering)
}

impl EdgeDistribution {
    pub fn from_log_weights(
        tg: &TransitionGraph,
        log_weights: &[f64],
        gamma: f64,
        covering: &[Vec<usize>],
    ) -> Result<Self> {
        if log_weights.len() != tg.edge_count() {
            return Err(Error::Dimension(format!(
                "{} weights for {} edges",
                log_weights.len(),
                tg.edge_count()
            )));
        }
        if let Some(e) = log_weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::param(
                "weights",
                format!("edge {e} has log weight {}", log_weights[e]),
            ));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param("gamma", "must lie in [0, 1]"));
        }
        if gamma > 0.0 && covering.is_empty() {
            return Err(Error::param("covering", "empty path set"));
        }
        let nodes = tg.node_count();
        let mut log_z = vec![f64::NEG_INFINITY; nodes];
        log_z[tg.sink()] = 0.0;
        for u in (0..nodes).rev() {
            if u != tg.sink() {
                log_z[u] = log_sum_exp(
                    tg.out_edges(u)
                        .iter()
                        .map(|&e| log_weights[e] + log_z[tg.edge(e).to]),
                );
            }
        }
        let mut log_f = vec![f64::NEG_INFINITY; nodes];
        log_f[tg.source()] = 0.0;
        for v in 0..nodes {
            if v != tg.source() {
                log_f[v] = log_sum_exp(
                    tg.in_edges(v)
                        .iter()
                        .map(|&e| log_f[tg.edge(e).from] + log_weights[e]),
                );
            }
        }
        let log_total = log_z[tg.source()];
        let traversal: Vec<f64> = tg
            .edges()
            .iter()
            .zip(log_weights)
            .map(|(e, lw)| (log_f[e.from] + lw + log_z[e.to] - log_total).exp())
            .collect();
        let mut share = vec![0.0; tg.edge_count()];
        for path in covering {
            for &e in path {
                share[e] += 1.0;
            }
        }
        let q = share
            .iter()
            .zip(&traversal)
            .map(|(s, t)| {
                let uniform = if covering.is_empty() {
                    0.0
                } else {
                    s / covering.len() as f64
                };
                gamma * uniform + (1.0 - gamma) * t
            })
            .collect();
        Ok(Self {
            gamma,
            log_weights: log_weights.to_vec(),
            log_z,
            log_f,
            q,
            traversal,
            covering: covering.to_vec(),
        })
    }

    /// Probability of drawing exactly `path`.
    pub fn path_probability(&self, tg: &TransitionGraph, path: &[usize]) -> f64 {
        let weighted = (path.iter().map(|&e| self.log_weights[e]).sum::<f64>()
            - self.log_z[tg.source()])
        .exp();
        let uniform = if self.covering.is_empty() {
            0.0
        } else {
            let hits = self
                .covering
                .iter()
                .filter(|p| p.as_slice() == path)
                .count();
            hits as f64 / self.covering.len() as f64
        };
        self.gamma * uniform + (1.0 - self.gamma) * weighted
    }

    /// Forward sum of `node`: total weight of source-to-node prefixes, as a log.
    pub fn log_forward(&self, node: usize) -> f64 {
        self.log_f[node]
    }

    /// Backward sum of `node`: total weight of node-to-sink suffixes, as a log.
    pub fn log_backward(&self, node: usize) -> f64 {
        self.log_z[node]
    }

    /// Draws a path from the mixture.
    pub fn sample<R: Rng + ?Sized>(&self, tg: &TransitionGraph, rng: &mut R) -> Vec<usize> {
        if self.gamma > 0.0 && rng.random::<f64>() < self.gamma {
            return self.covering[rng.random_range(0..self.covering.len())].clone();
        }
        self.sample_weighted(tg, rng)
    }

    /// Draws a path from the weighted part only.
    pub fn sample_weighted<R: Rng + ?Sized>(
        &self,
        tg: &TransitionGraph,
        rng: &mut R,
    ) -> Vec<usize> {
        let mut path = Vec::with_capacity(tg.frames() + 1);
        let mut at = tg.source();
        while at != tg.sink() {
            let out = tg.out_edges(at);
            let mut u = rng.random::<f64>();
            let mut pick = *out.last().expect("inner nodes have out-edges");
            for &e in out {
                let p = (self.log_weights[e] + self.log_z[tg.edge(e).to] - self.log_z[at]).exp();
                if u < p {
                    pick = e;
                    break;
                }
                u -= p;
            }
            path.push(pick);
            at = tg.edge(pick).to;
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::covering_paths;
    use rand::SeedableRng;
    use std::collections::HashMap;

    fn fig_graph() -> TransitionGraph {
        TransitionGraph::new(0, 2, 3).unwrap()
    }

    #[test]
    fn pure_covering_mixture() {
        let g = fig_graph();
        let cover = covering_paths(&g);
        let d = edge_probabilities(&g, &vec![1.0; g.edge_count()], 1.0, &cover).unwrap();
        for e in 0..g.edge_count() {
            let frac = cover.iter().filter(|p| p.contains(&e)).count() as f64 / cover.len() as f64;
            assert!((d.q[e] - frac).abs() < 1e-15);
            assert!(d.q[e] > 0.0);
        }
    }

    #[test]
    fn uniform_weights_give_uniform_paths() {
        let g = fig_graph();
        let d = edge_probabilities(&g, &vec![1.0; g.edge_count()], 0.0, &[]).unwrap();
        // Out of the source: 6, 3 and 1 paths continue from levels 2, 1, 0.
        let shares: Vec<f64> = g.out_edges(g.source()).iter().map(|&e| d.q[e]).collect();
        for (s, want) in shares.iter().zip([0.6, 0.3, 0.1]) {
            assert!((s - want).abs() < 1e-12);
        }
        for layer in 0..=3 {
            let total: f64 = g
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.position == layer)
                .map(|(i, _)| d.traversal[i])
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_weights() {
        let g = fig_graph();
        let mut w = vec![1.0; g.edge_count()];
        w[3] = 0.0;
        assert!(edge_probabilities(&g, &w, 0.5, &covering_paths(&g)).is_err());
    }

    #[test]
    fn exhaustive_probabilities_sum_to_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (tau, k) in [(1u32, 1usize), (2, 3), (3, 4), (2, 5)] {
            let g = TransitionGraph::new(0, tau, k).unwrap();
            let cover = covering_paths(&g);
            let w: Vec<f64> = (0..g.edge_count())
                .map(|_| rng.random_range(0.1..5.0))
                .collect();
            let d = edge_probabilities(&g, &w, 0.3, &cover).unwrap();
            let total: f64 = g
                .enumerate_paths()
                .iter()
                .map(|p| d.path_probability(&g, p))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{total}");
        }
    }

    #[test]
    fn sampler_matches_closed_form() {
        let g = fig_graph();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let w: Vec<f64> = (0..g.edge_count())
            .map(|_| rng.random_range(0.2..3.0))
            .collect();
        let cover = covering_paths(&g);
        let d = edge_probabilities(&g, &w, 0.5, &cover).unwrap();
        let draws = 100_000;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(d.sample(&g, &mut rng)).or_default() += 1;
        }
        for p in g.enumerate_paths() {
            let prob = d.path_probability(&g, &p);
            let seen = *counts.get(&p).unwrap_or(&0) as f64;
            let sd = (draws as f64 * prob * (1.0 - prob)).sqrt();
            assert!(
                (seen - draws as f64 * prob).abs() <= 3.0 * sd + 1.0,
                "{p:?}"
            );
        }
    }
}
