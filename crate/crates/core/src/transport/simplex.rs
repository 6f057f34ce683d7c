//! Primal network simplex for the transportation problem on an implicit
//! complete bipartite graph.
//!
//! Spanning-tree bookkeeping (thread order, successor counts, strongly
//! feasible leaving-arc rule, block-search pricing) follows the classic
//! LEMON layout. Arc costs are recomputed on demand, so memory is linear in
//! the number of nodes apart from one state byte per arc.

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

pub(crate) struct Solution {
    /// `(source, sink, mass)` for every arc carrying positive flow.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// `-sum_u supply_u * pi_u` at the final potentials.
    pub dual: f64,
    /// Most negative reduced cost over all arcs at the final potentials.
    pub min_reduced_cost: f64,
    pub pivots: usize,
}

struct Simplex<'a, C: Fn(usize, usize) -> f64> {
    n1: usize,
    n2: usize,
    cost_fn: &'a C,
    art_cost: f64,
    arc_num: usize,
    root: usize,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    /// flow on `pred[u]`
    flow: Vec<f64>,
    pi: Vec<f64>,
    state: Vec<i8>,
    dirty_revs: Vec<usize>,
    next_arc: usize,
    block_size: usize,
    eps: f64,
    // pivot scratch
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

const NONE: usize = usize::MAX;

impl<'a, C: Fn(usize, usize) -> f64> Simplex<'a, C> {
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.n2
        } else {
            let u = e - self.arc_num;
            if self.pred_dir_art(u) == DIR_UP { u } else { self.root }
        }
    }

    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.n1 + e % self.n2
        } else {
            let u = e - self.arc_num;
            if self.pred_dir_art(u) == DIR_UP { self.root } else { u }
        }
    }

    /// Artificial arc orientation is fixed at initialization: sources point
    /// to the root, sinks are fed from it.
    fn pred_dir_art(&self, u: usize) -> i8 {
        if u < self.n1 { DIR_UP } else { DIR_DOWN }
    }

    fn cost(&self, e: usize) -> f64 {
        if e < self.arc_num {
            (self.cost_fn)(e / self.n2, e % self.n2)
        } else if e - self.arc_num < self.n1 {
            0.0
        } else {
            self.art_cost
        }
    }

    fn new(supply: &[f64], n1: usize, n2: usize, cost_fn: &'a C, max_cost: f64) -> Self {
        let node_num = n1 + n2;
        let arc_num = n1 * n2;
        let root = node_num;
        let art_cost = (max_cost + 1.0) * node_num as f64;
        let mut s = Simplex {
            n1,
            n2,
            cost_fn,
            art_cost,
            arc_num,
            root,
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            flow: vec![0.0; node_num + 1],
            pi: vec![0.0; node_num + 1],
            state: vec![STATE_LOWER; arc_num + node_num],
            dirty_revs: Vec::new(),
            next_arc: 0,
            block_size: ((arc_num as f64).sqrt() as usize).max(10),
            eps: 1e-12 * (1.0 + max_cost),
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            if u < n1 {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = 0.0;
                s.flow[u] = supply[u];
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost;
                s.flow[u] = -supply[u];
            }
        }
        s
    }

    fn reduced_cost(&self, e: usize) -> f64 {
        self.cost(e) + self.pi[self.source(e)] - self.pi[self.target(e)]
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.eps;
        let mut cnt = self.block_size;
        let mut found = false;
        let search = |s: &mut Self, range: std::ops::Range<usize>, min: &mut f64, cnt: &mut usize, found: &mut bool| {
            for e in range {
                if s.state[e] == STATE_LOWER {
                    let i = e / s.n2;
                    let j = e % s.n2;
                    let c = (s.cost_fn)(i, j) + s.pi[i] - s.pi[s.n1 + j];
                    if c < *min {
                        *min = c;
                        s.in_arc = e;
                        *found = true;
                    }
                }
                *cnt -= 1;
                if *cnt == 0 {
                    if *found {
                        s.next_arc = e + 1;
                        return true;
                    }
                    *cnt = s.block_size;
                }
            }
            false
        };
        let start = self.next_arc;
        if search(self, start..self.arc_num, &mut min, &mut cnt, &mut found) {
            return true;
        }
        if search(self, 0..start, &mut min, &mut cnt, &mut found) {
            return true;
        }
        if found {
            self.next_arc = start;
        }
        found
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) {
        // entering arcs are always at their lower bound
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        let mut delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == DIR_UP && self.flow[u] < delta {
                delta = self.flow[u];
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DIR_DOWN && self.flow[u] <= delta {
                delta = self.flow[u];
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        debug_assert!(result != 0, "uncapacitated cycle");
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        self.delta = delta.max(0.0);
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0.0 {
            let mut u = self.source(self.in_arc);
            while u != self.join {
                self.flow[u] -= self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
            let mut u = self.target(self.in_arc);
            while u != self.join {
                self.flow[u] += self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;
        let in_flow = self.delta;
        let in_dir = if u_in == self.source(in_arc) { DIR_UP } else { DIR_DOWN };

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.flow[u_in] = in_flow;
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue =
                if old_rev_thread == v_in { self.thread[old_last_succ] } else { self.thread[v_in] };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                self.flow[u] = self.flow[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = in_dir;
            self.flow[u_in] = in_flow;
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma =
            self.pi[self.v_in] - self.pi[self.u_in] - self.pred_dir[self.u_in] as f64 * self.cost(self.in_arc);
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Recomputes all potentials from the tree, removing accumulated drift.
    fn recompute_potentials(&mut self) {
        self.pi[self.root] = 0.0;
        let mut u = self.thread[self.root];
        while u != self.root {
            let p = self.parent[u];
            let c = self.cost(self.pred[u]);
            self.pi[u] = self.pi[p] - self.pred_dir[u] as f64 * c;
            u = self.thread[u];
        }
    }
}

/// Solves `min sum c(i,j) f_ij` subject to row sums `a` and column sums `b`
/// (`sum a = sum b`).
pub(crate) fn solve<C: Fn(usize, usize) -> f64>(a: &[f64], b: &[f64], cost_fn: &C) -> Solution {
    let (n1, n2) = (a.len(), b.len());
    let mut max_cost = 0.0f64;
    for i in 0..n1 {
        for j in 0..n2 {
            max_cost = max_cost.max(cost_fn(i, j));
        }
    }
    let mut supply: Vec<f64> = a.to_vec();
    supply.extend(b.iter().map(|v| -v));
    let mut s = Simplex::new(&supply, n1, n2, cost_fn, max_cost);
    let mut pivots = 0;
    loop {
        while s.find_entering_arc() {
            s.find_join_node();
            s.find_leaving_arc();
            s.change_flow();
            s.update_tree_structure();
            s.update_potential();
            pivots += 1;
            if pivots % 4096 == 0 {
                s.recompute_potentials();
            }
        }
        // confirm optimality against drift-free potentials
        s.recompute_potentials();
        if !s.find_entering_arc() {
            break;
        }
        s.find_join_node();
        s.find_leaving_arc();
        s.change_flow();
        s.update_tree_structure();
        s.update_potential();
        pivots += 1;
    }

    let mut flows = Vec::new();
    let mut cost = 0.0;
    for u in 0..n1 + n2 {
        let e = s.pred[u];
        if e < s.arc_num && s.flow[u] > 0.0 {
            let (i, j) = (e / n2, e % n2);
            flows.push((i, j, s.flow[u]));
            cost += s.flow[u] * cost_fn(i, j);
        }
    }
    flows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let dual = -supply.iter().zip(&s.pi).map(|(b, p)| b * p).sum::<f64>();
    let mut min_rc = 0.0f64;
    for e in 0..s.arc_num {
        min_rc = min_rc.min(s.reduced_cost(e));
    }
    Solution { flows, cost, dual, min_reduced_cost: min_rc, pivots }
}
