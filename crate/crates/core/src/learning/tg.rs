//! Per-device transition graph. Layer `l` (1..=k) holds one node per
//! remaining energy level `0..=tau` after frame `l`. The source sits at level
//! `tau` before frame 1 and the sink after layer `k`. The edge leaving layer
//! `p` (the source is layer 0) spends the power of frame `p + 1`; edges into
//! the sink spend nothing.

use crate::error::{Error, Result};
use crate::model::DeviceProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TgEdge {
    pub from: usize,
    pub to: usize,
    /// Position on every s-t path, `0..=k`. Positions `< k` are frames.
    pub position: usize,
    /// Lattice steps spent.
    pub action: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    device: usize,
    levels: u32,
    frames: usize,
    edges: Vec<TgEdge>,
    out: Vec<Vec<usize>>,
    into: Vec<Vec<usize>>,
}

/// Graph of `device` over `frames` frames.
pub fn build_tg(device: &DeviceProfile, frames: usize) -> Result<TransitionGraph> {
    TransitionGraph::new(device.id, device.power_level, frames)
}

impl TransitionGraph {
    pub fn new(device: usize, levels: u32, frames: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::param("power_level", "must be at least 1"));
        }
        if frames == 0 {
            return Err(Error::param("num_frames", "must be at least 1"));
        }
        let mut g = Self {
            device,
            levels,
            frames,
            edges: Vec::new(),
            out: Vec::new(),
            into: Vec::new(),
        };
        let nodes = 2 + frames * (levels as usize + 1);
        g.out = vec![Vec::new(); nodes];
        g.into = vec![Vec::new(); nodes];
        for v in (0..=levels).rev() {
            g.push(g.source(), g.node(1, v), 0, levels - v);
        }
        for layer in 1..frames {
            for u in (0..=levels).rev() {
                for v in (0..=u).rev() {
                    g.push(g.node(layer, u), g.node(layer + 1, v), layer, u - v);
                }
            }
        }
        for u in (0..=levels).rev() {
            g.push(g.node(frames, u), g.sink(), frames, 0);
        }
        Ok(g)
    }

    fn push(&mut self, from: usize, to: usize, position: usize, action: u32) {
        let id = self.edges.len();
        self.edges.push(TgEdge {
            from,
            to,
            position,
            action,
        });
        self.out[from].push(id);
        self.into[to].push(id);
    }

    pub fn device(&self) -> usize {
        self.device
    }

    /// Power steps `tau`.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.out.len() - 1
    }

    /// Node of `layer` (1..=k) at remaining `level`.
    pub fn node(&self, layer: usize, level: u32) -> usize {
        debug_assert!((1..=self.frames).contains(&layer) && level <= self.levels);
        1 + (layer - 1) * (self.levels as usize + 1) + level as usize
    }

    /// `(layer, level)` of an inner node; the source is `(0, tau)`.
    pub fn node_state(&self, node: usize) -> Option<(usize, u32)> {
        if node == self.source() {
            return Some((0, self.levels));
        }
        if node == self.sink() {
            return None;
        }
        let width = self.levels as usize + 1;
        Some((1 + (node - 1) / width, ((node - 1) % width) as u32))
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[TgEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> TgEdge {
        self.edges[e]
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.into[node]
    }

    /// Number of s-t paths, counted over the DAG.
    pub fn path_count(&self) -> u128 {
        let mut ways = vec![0u128; self.node_count()];
        ways[self.sink()] = 1;
        for u in (0..self.node_count()).rev() {
            for &e in &self.out[u] {
                ways[u] += ways[self.edges[e].to];
            }
        }
        ways[self.source()]
    }

    /// Edge from `from` to `to`, if any.
    pub fn edge_between(&self, from: usize, to: usize) -> Option<usize> {
        self.out[from]
            .iter()
            .copied()
            .find(|&e| self.edges[e].to == to)
    }

    /// Path through the remaining levels `r_1, ..., r_k` (each at most the
    /// previous, starting from `tau`).
    pub fn path_from_levels(&self, remaining: &[u32]) -> Result<Vec<usize>> {
        if remaining.len() != self.frames {
            return Err(Error::Dimension(format!(
                "{} levels for {} frames",
                remaining.len(),
                self.frames
            )));
        }
        let mut path = Vec::with_capacity(self.frames + 1);
        let mut at = self.source();
        let mut prev = self.levels;
        for (p, &r) in remaining.iter().enumerate() {
            if r > prev {
                return Err(Error::param("remaining", "levels must not increase"));
            }
            let next = self.node(p + 1, r);
            path.push(self.edge_between(at, next).expect("layered edge"));
            at = next;
            prev = r;
        }
        path.push(self.edge_between(at, self.sink()).expect("sink edge"));
        Ok(path)
    }

    /// Per-frame lattice spend of a path.
    pub fn path_actions(&self, path: &[usize]) -> Vec<u32> {
        path[..self.frames]
            .iter()
            .map(|&e| self.edges[e].action)
            .collect()
    }

    /// Every s-t path. Exponential; meant for small graphs.
    pub fn enumerate_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.walk(self.source(), &mut stack, &mut out);
        out
    }

    fn walk(&self, node: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if node == self.sink() {
            out.push(stack.clone());
            return;
        }
        for &e in &self.out[node] {
            stack.push(e);
            self.walk(self.edges[e].to, stack, out);
            stack.pop();
        }
    }
}

/// Spreads `units` over `slots` as evenly as possible, larger shares first.
fn spread(units: u32, slots: usize) -> Vec<u32> {
    if slots == 0 {
        return Vec::new();
    }
    let base = units / slots as u32;
    let extra = (units % slots as u32) as usize;
    (0..slots).map(|s| base + u32::from(s < extra)).collect()
}

/// Set of s-t paths covering every edge. Each still uncovered edge, taken in
/// id order, is extended to a full path: the frames before it spend what it
/// needs as late and as evenly as possible, and the frames after it spend the
/// rest as early and as evenly as possible.
pub fn covering_paths(tg: &TransitionGraph) -> Vec<Vec<usize>> {
    let k = tg.frames();
    let tau = tg.levels();
    let mut covered = vec![false; tg.edge_count()];
    let mut paths = Vec::new();
    for e in 0..tg.edge_count() {
        if covered[e] {
            continue;
        }
        let edge = tg.edge(e);
        let (_, level_before) = tg.node_state(edge.from).expect("edges leave inner nodes");
        let p = edge.position;

        let mut spend = vec![0u32; k];
        let mut prefix = spread(tau - level_before, p);
        prefix.reverse();
        spend[..p].copy_from_slice(&prefix);
        if p < k {
            spend[p] = edge.action;
            let left = level_before - edge.action;
            let after = k - p - 1;
            if after > 0 {
                spend[p + 1..].copy_from_slice(&spread(left, after));
            }
        }

        let mut remaining = Vec::with_capacity(k);
        let mut level = tau;
        for s in spend {
            level -= s;
            remaining.push(level);
        }
        let path = tg
            .path_from_levels(&remaining)
            .expect("spend stays within tau");
        debug_assert!(path.contains(&e));
        for &x in &path {
            covered[x] = true;
        }
        paths.push(path);
    }
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: u64, r: u64) -> u128 {
        (0..r).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
    }

    #[test]
    fn three_levels_three_frames() {
        let g = TransitionGraph::new(0, 2, 3).unwrap();
        assert_eq!(
            (g.node_count(), g.edge_count(), g.path_count()),
            (11, 18, 10)
        );
        assert_eq!(g.enumerate_paths().len(), 10);
    }

    #[test]
    fn two_levels_one_frame() {
        let g = TransitionGraph::new(0, 1, 1).unwrap();
        assert_eq!((g.node_count(), g.edge_count(), g.path_count()), (4, 4, 2));
        let cover = covering_paths(&g);
        assert_eq!(cover.len(), 2);
        let mut spends: Vec<Vec<u32>> = cover.iter().map(|p| g.path_actions(p)).collect();
        spends.sort();
        assert_eq!(spends, vec![vec![0], vec![1]]);
    }

    #[test]
    fn counts_match_closed_forms() {
        for tau in 1..=6u32 {
            for k in 1..=10usize {
                let g = TransitionGraph::new(0, tau, k).unwrap();
                let mi = tau as usize + 1;
                assert_eq!(g.node_count(), 2 + k * mi);
                assert_eq!(g.edge_count(), mi * (mi * (k - 1) + k + 3) / 2);
                assert_eq!(g.path_count(), binom((k + mi - 1) as u64, k as u64));
            }
        }
    }

    #[test]
    fn actions_are_lattice_steps_within_remaining() {
        let g = TransitionGraph::new(0, 3, 4).unwrap();
        for e in g.edges() {
            let (_, before) = g.node_state(e.from).unwrap();
            assert!(e.action <= before);
            if let Some((_, after)) = g.node_state(e.to) {
                assert_eq!(before - e.action, after);
            } else {
                assert_eq!(e.action, 0);
            }
        }
        let at = g.node(2, 1);
        let actions: Vec<u32> = g.out_edges(at).iter().map(|&e| g.edge(e).action).collect();
        assert_eq!(actions, vec![0, 1]);
    }

    #[test]
    fn rejects_degenerate_graphs() {
        assert!(TransitionGraph::new(0, 0, 3).is_err());
        assert!(TransitionGraph::new(0, 2, 0).is_err());
    }

    #[test]
    fn spread_is_balanced() {
        assert_eq!(spread(5, 3), vec![2, 2, 1]);
        assert_eq!(spread(1, 4), vec![1, 0, 0, 0]);
        assert!(spread(3, 0).is_empty());
    }

    proptest! {
        #[test]
        fn covering_touches_every_edge(tau in 1u32..=5, k in 1usize..=8) {
            let g = TransitionGraph::new(0, tau, k).unwrap();
            let cover = covering_paths(&g);
            prop_assert!(cover.len() <= g.edge_count());
            let mut hit = vec![false; g.edge_count()];
            for p in &cover {
                prop_assert_eq!(p.len(), k + 1);
                prop_assert_eq!(g.edge(p[0]).from, g.source());
                prop_assert_eq!(g.edge(p[k]).to, g.sink());
                for w in p.windows(2) {
                    prop_assert_eq!(g.edge(w[0]).to, g.edge(w[1]).from);
                }
                for &e in p {
                    hit[e] = true;
                }
            }
            prop_assert!(hit.iter().all(|&h| h));
            prop_assert_eq!(cover, covering_paths(&g));
        }
    }
}
