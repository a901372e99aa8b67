//! Dinic's maximum flow on real capacities.

use std::collections::VecDeque;

/// Residual capacities at or below this count as saturated.
pub(crate) const RESIDUAL_EPS: f64 = 1e-14;

struct Arc {
    to: usize,
    cap: f64,
}

pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0.0 });
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adj[v] {
                let arc = &self.arcs[a];
                if arc.cap > RESIDUAL_EPS && level[arc.to] == usize::MAX {
                    level[arc.to] = level[v] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level
    }

    fn augment(&mut self, v: usize, t: usize, pushed: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if v == t {
            return pushed;
        }
        while next[v] < self.adj[v].len() {
            let a = self.adj[v][next[v]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > RESIDUAL_EPS && level[to] == level[v] + 1 {
                let got = self.augment(to, t, pushed.min(cap), level, next);
                if got > 0.0 {
                    self.arcs[a].cap -= got;
                    self.arcs[a ^ 1].cap += got;
                    return got;
                }
            }
            next[v] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return flow;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let got = self.augment(s, t, f64::INFINITY, &level, &mut next);
                if got <= 0.0 {
                    break;
                }
                flow += got;
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph.
    pub(crate) fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != usize::MAX).collect()
    }
}
