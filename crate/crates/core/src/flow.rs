//! Dinic's maximum flow on a fixed arc set.
//!
//! The network keeps each arc's base capacity so the same graph can be
//! re-solved after changing a few capacities, which is how the orientation
//! sweep reuses one hypercube network for all `2^n` orientations.

use std::collections::VecDeque;

pub type Cap = u64;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    nodes: usize,
    // arc k and k^1 are a forward/reverse pair
    head: Vec<u32>,
    base: Vec<Cap>,
    residual: Vec<Cap>,
    first: Vec<u32>,
    adj: Vec<u32>,
    pending: Vec<(u32, u32)>,
    level: Vec<u32>,
    cursor: Vec<u32>,
}

const UNSEEN: u32 = u32::MAX;

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            head: Vec::new(),
            base: Vec::new(),
            residual: Vec::new(),
            first: Vec::new(),
            adj: Vec::new(),
            pending: Vec::new(),
            level: vec![UNSEEN; nodes],
            cursor: vec![0; nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Adds arc `from -> to`; returns its id for later capacity updates.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: Cap) -> usize {
        assert!(from < self.nodes && to < self.nodes, "arc endpoint out of range");
        let id = self.head.len();
        self.head.push(to as u32);
        self.base.push(cap);
        self.head.push(from as u32);
        self.base.push(0);
        self.pending.push((from as u32, id as u32));
        self.pending.push((to as u32, id as u32 + 1));
        self.first.clear();
        id
    }

    pub fn set_capacity(&mut self, arc: usize, cap: Cap) {
        self.base[arc] = cap;
    }

    fn build_adjacency(&mut self) {
        if self.first.len() == self.nodes + 1 {
            return;
        }
        let mut count = vec![0u32; self.nodes + 1];
        for &(u, _) in &self.pending {
            count[u as usize + 1] += 1;
        }
        for i in 0..self.nodes {
            count[i + 1] += count[i];
        }
        self.first = count.clone();
        self.adj = vec![0; self.pending.len()];
        for &(u, e) in &self.pending {
            let slot = &mut count[u as usize];
            self.adj[*slot as usize] = e;
            *slot += 1;
        }
    }

    /// Maximum `s`-`t` flow value from the base capacities.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Cap {
        assert!(s != t);
        self.build_adjacency();
        self.residual.clone_from(&self.base);
        let mut total: Cap = 0;
        while self.bfs(s, t) {
            for u in 0..self.nodes {
                self.cursor[u] = self.first[u];
            }
            loop {
                let pushed = self.dfs(s, t, Cap::MAX);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(UNSEEN);
        self.level[s] = 0;
        let mut queue = VecDeque::with_capacity(self.nodes);
        queue.push_back(s as u32);
        while let Some(u) = queue.pop_front() {
            let u = u as usize;
            for k in self.first[u]..self.first[u + 1] {
                let e = self.adj[k as usize] as usize;
                let v = self.head[e] as usize;
                if self.residual[e] > 0 && self.level[v] == UNSEEN {
                    self.level[v] = self.level[u] + 1;
                    if v == t {
                        return true;
                    }
                    queue.push_back(v as u32);
                }
            }
        }
        false
    }

    fn dfs(&mut self, u: usize, t: usize, limit: Cap) -> Cap {
        if u == t {
            return limit;
        }
        while self.cursor[u] < self.first[u + 1] {
            let e = self.adj[self.cursor[u] as usize] as usize;
            let v = self.head[e] as usize;
            if self.residual[e] > 0 && self.level[v] == self.level[u] + 1 {
                let pushed = self.dfs(v, t, limit.min(self.residual[e]));
                if pushed > 0 {
                    self.residual[e] -= pushed;
                    self.residual[e ^ 1] += pushed;
                    return pushed;
                }
            }
            self.cursor[u] += 1;
        }
        // dead end: keep later searches out of this node
        self.level[u] = UNSEEN;
        0
    }

    /// Nodes reachable from `s` in the residual graph of the last
    /// [`max_flow`](Self::max_flow) call: the source side of a minimum cut.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for k in self.first[u]..self.first[u + 1] {
                let e = self.adj[k as usize] as usize;
                let v = self.head[e] as usize;
                if self.residual[e] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}
