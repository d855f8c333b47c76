//! Integer plaquette windings cancelling a prescribed edge flux.
//!
//! Variables are net windings `n_p` on an ordered list of positive plaquettes.
//! The constraint at each edge `e` is `sum_p c(p, e) n_p = t_e`. Assignments
//! proceed in variable order; once the last variable touching an edge is
//! reached its value is forced by that edge.

use smallvec::SmallVec;

use crate::lattice::Lattice;

pub(crate) struct FluxSystem {
    var_edges: Vec<SmallVec<[(u32, i64); 4]>>,
    closing: Vec<SmallVec<[(u32, i64); 4]>>,
    target: Vec<i64>,
    feasible: bool,
}

impl FluxSystem {
    /// `flux` is indexed by positive edge; the system asks the windings to cancel it.
    pub fn new(lat: &Lattice, vars: &[u32], flux: &[i64]) -> Self {
        let mut local = vec![u32::MAX; lat.n_edges()];
        let mut n_local = 0u32;
        let mut var_edges = Vec::with_capacity(vars.len());
        for &p in vars {
            let mut es = SmallVec::new();
            for e in lat.plaquette_edges(p) {
                let gi = e.index() as usize;
                if local[gi] == u32::MAX {
                    local[gi] = n_local;
                    n_local += 1;
                }
                es.push((local[gi], if e.is_positive() { 1 } else { -1 }));
            }
            var_edges.push(es);
        }
        let mut target = vec![0i64; n_local as usize];
        let mut feasible = true;
        for (gi, &f) in flux.iter().enumerate() {
            if f != 0 {
                if local[gi] == u32::MAX {
                    feasible = false;
                } else {
                    target[local[gi] as usize] = -f;
                }
            }
        }
        let mut last = vec![usize::MAX; n_local as usize];
        for (i, es) in var_edges.iter().enumerate() {
            for &(le, _) in es {
                last[le as usize] = i;
            }
        }
        let closing = var_edges
            .iter()
            .enumerate()
            .map(|(i, es)| es.iter().copied().filter(|&(le, _)| last[le as usize] == i).collect())
            .collect();
        FluxSystem { var_edges, closing, target, feasible }
    }

    pub fn n_vars(&self) -> usize {
        self.var_edges.len()
    }

    /// Value forced on variable `i` by its closing edges, `Err` if they disagree.
    #[inline]
    fn forced(&self, i: usize, resid: &[i64]) -> Result<Option<i64>, ()> {
        let mut val = None;
        for &(le, c) in &self.closing[i] {
            let v = resid[le as usize] * c;
            match val {
                None => val = Some(v),
                Some(w) if w != v => return Err(()),
                _ => {}
            }
        }
        Ok(val)
    }

    #[inline]
    fn apply(&self, i: usize, n: i64, resid: &mut [i64]) {
        for &(le, c) in &self.var_edges[i] {
            resid[le as usize] -= c * n;
        }
    }

    /// Upper bound on the leaves visited by `weighted_sum`.
    pub fn leaf_bound(&self, bound: &[i64]) -> f64 {
        self.closing
            .iter()
            .zip(bound)
            .filter(|(c, _)| c.is_empty())
            .map(|(_, &b)| (2 * b + 1) as f64)
            .product()
    }

    /// Sum over all solutions with `|n_i| <= bound[i]` of `prod_i weight[i][n_i + bound[i]]`.
    pub fn weighted_sum(&self, bound: &[i64], weight: &[Vec<f64>]) -> f64 {
        if !self.feasible {
            return 0.0;
        }
        let mut resid = self.target.clone();
        let mut acc = 0.0;
        self.sum_rec(0, 1.0, bound, weight, &mut resid, &mut acc);
        acc
    }

    fn sum_rec(&self, i: usize, w: f64, bound: &[i64], weight: &[Vec<f64>], resid: &mut [i64], acc: &mut f64) {
        if i == self.n_vars() {
            *acc += w;
            return;
        }
        let b = bound[i];
        let mut visit = |n: i64, resid: &mut [i64]| {
            let wi = weight[i][(n + b) as usize];
            if wi == 0.0 {
                return;
            }
            self.apply(i, n, resid);
            self.sum_rec(i + 1, w * wi, bound, weight, resid, acc);
            self.apply(i, -n, resid);
        };
        match self.forced(i, resid) {
            Err(()) => {}
            Ok(Some(n)) => {
                if n.abs() <= b {
                    visit(n, resid);
                }
            }
            Ok(None) => {
                for n in -b..=b {
                    visit(n, resid);
                }
            }
        }
    }

    /// Minimises `sum |n_i|` (`support == false`) or `#{n_i != 0}` (`support == true`)
    /// among solutions of cost at most `cap`, with `|n_i| <= vmax` in support mode.
    /// The search stops as soon as it reaches the known lower bound `floor`.
    pub fn minimize(&self, cap: u64, support: bool, vmax: i64, floor: u64) -> Option<(u64, Vec<i64>)> {
        if !self.feasible {
            return None;
        }
        let mut resid = self.target.clone();
        let abs: i64 = resid.iter().map(|x| x.abs()).sum();
        let nnz = resid.iter().filter(|&&x| x != 0).count() as i64;
        let mut st = MinState {
            best: cap as i64 + 1,
            best_sol: None,
            cur: vec![0; self.n_vars()],
            support,
            vmax,
            floor: floor as i64,
        };
        self.min_rec(0, 0, abs, nnz, &mut resid, &mut st);
        st.best_sol.map(|s| (st.best as u64, s))
    }

    fn min_rec(&self, i: usize, cost: i64, abs: i64, nnz: i64, resid: &mut [i64], st: &mut MinState) {
        let lb = if st.support { (nnz + 3) / 4 } else { (abs + 3) / 4 };
        if cost + lb >= st.best || st.best <= st.floor {
            return;
        }
        if i == self.n_vars() {
            if abs == 0 {
                st.best = cost;
                st.best_sol = Some(st.cur.clone());
            }
            return;
        }
        let try_value = |n: i64, resid: &mut [i64], st: &mut MinState| {
            let mut a = abs;
            let mut z = nnz;
            for &(le, c) in &self.var_edges[i] {
                let r = &mut resid[le as usize];
                a -= r.abs();
                z -= i64::from(*r != 0);
                *r -= c * n;
                a += r.abs();
                z += i64::from(*r != 0);
            }
            let step = if st.support { i64::from(n != 0) } else { n.abs() };
            st.cur[i] = n;
            self.min_rec(i + 1, cost + step, a, z, resid, st);
            st.cur[i] = 0;
            self.apply(i, -n, resid);
        };
        match self.forced(i, resid) {
            Err(()) => {}
            Ok(Some(n)) => {
                if !st.support || n.abs() <= st.vmax {
                    try_value(n, resid, st);
                }
            }
            Ok(None) => {
                try_value(0, resid, st);
                let mut k = 1;
                loop {
                    let limit = if st.support { st.vmax } else { st.best - 1 - cost };
                    if k > limit {
                        break;
                    }
                    try_value(k, resid, st);
                    try_value(-k, resid, st);
                    k += 1;
                }
            }
        }
    }
}

struct MinState {
    best: i64,
    best_sol: Option<Vec<i64>>,
    cur: Vec<i64>,
    support: bool,
    vmax: i64,
    floor: i64,
}
