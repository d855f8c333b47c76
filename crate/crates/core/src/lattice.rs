//! The finite cubical lattice `[-L, L]^d` with its oriented cells and
//! incidence tables, plus enumeration of plaquette clusters.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Lattice site as a coordinate tuple.
pub type Site = SmallVec<[i32; 4]>;

/// Set of positively oriented plaquettes, keyed by plaquette index.
pub type PlaquetteSet = BTreeSet<u32>;

const NONE: u32 = u32::MAX;

/// An oriented edge, packed as `2 * index + (1 if reversed)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(pub u32);

impl Edge {
    #[inline]
    pub fn new(index: u32, positive: bool) -> Self {
        Edge(2 * index + u32::from(!positive))
    }
    /// Index of the underlying positively oriented edge.
    #[inline]
    pub fn index(self) -> u32 {
        self.0 >> 1
    }
    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }
    #[inline]
    pub fn inv(self) -> Self {
        Edge(self.0 ^ 1)
    }
    /// The positively oriented edge with the same support.
    #[inline]
    pub fn positive(self) -> Self {
        Edge(self.0 & !1)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.is_positive() { "+" } else { "-" };
        write!(f, "{}e{}", s, self.index())
    }
}

/// An oriented plaquette, packed like [`Edge`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plaq(pub u32);

impl Plaq {
    #[inline]
    pub fn new(index: u32, positive: bool) -> Self {
        Plaq(2 * index + u32::from(!positive))
    }
    #[inline]
    pub fn index(self) -> u32 {
        self.0 >> 1
    }
    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }
    #[inline]
    pub fn inv(self) -> Self {
        Plaq(self.0 ^ 1)
    }
}

impl fmt::Debug for Plaq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.is_positive() { "+" } else { "-" };
        write!(f, "{}p{}", s, self.index())
    }
}

/// Decoded form of an oriented edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub tail: Vec<i32>,
    pub direction: usize,
    pub sign: i8,
}

/// Decoded form of an oriented plaquette.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedPlaquette {
    pub corner: Vec<i32>,
    pub axes: (usize, usize),
    pub sign: i8,
}

/// A plaquette touching a given edge, together with whether its positive
/// boundary traverses the edge forwards.
#[derive(Clone, Copy, Debug)]
pub struct Incidence {
    pub plaquette: u32,
    pub forward: bool,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    l: i32,
    d: usize,
    side: usize,
    strides: Vec<usize>,
    n_sites: usize,
    edge_at: Vec<u32>,
    edges: Vec<(u32, u8)>,
    plaqs: Vec<(u32, u8, u8)>,
    boundary: Vec<[Edge; 4]>,
    incidence: Vec<SmallVec<[Incidence; 6]>>,
    adjacency: Vec<Vec<u32>>,
}

impl Lattice {
    /// Builds `[-L, L]^d`. Requires `d >= 2` and `L >= 1`.
    pub fn new(l: i32, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("dimension must be at least 2, got {d}")));
        }
        if l < 1 {
            return Err(Error::InvalidInput(format!("half-side must be at least 1, got {l}")));
        }
        if d > 8 {
            return Err(Error::InvalidInput(format!("dimension {d} is above the supported maximum 8")));
        }
        let side = (2 * l + 1) as usize;
        let n_sites = side
            .checked_pow(d as u32)
            .filter(|&n| n < u32::MAX as usize / (2 * d))
            .ok_or_else(|| Error::InvalidInput("lattice too large".into()))?;
        let mut strides = vec![1usize; d];
        for a in (0..d - 1).rev() {
            strides[a] = strides[a + 1] * side;
        }
        let mut lat = Lattice {
            l,
            d,
            side,
            strides,
            n_sites,
            edge_at: vec![NONE; n_sites * d],
            edges: Vec::new(),
            plaqs: Vec::new(),
            boundary: Vec::new(),
            incidence: Vec::new(),
            adjacency: Vec::new(),
        };
        for s in 0..n_sites {
            for a in 0..d {
                if lat.offset_coord(s, a) + 1 < side {
                    lat.edge_at[s * d + a] = lat.edges.len() as u32;
                    lat.edges.push((s as u32, a as u8));
                }
            }
        }
        lat.incidence = vec![SmallVec::new(); lat.edges.len()];
        for s in 0..n_sites {
            for mu in 0..d {
                for nu in mu + 1..d {
                    if lat.offset_coord(s, mu) + 1 < side && lat.offset_coord(s, nu) + 1 < side {
                        let id = lat.plaqs.len() as u32;
                        let smu = s + lat.strides[mu];
                        let snu = s + lat.strides[nu];
                        let b = [
                            Edge::new(lat.edge_at[s * d + mu], true),
                            Edge::new(lat.edge_at[smu * d + nu], true),
                            Edge::new(lat.edge_at[snu * d + mu], false),
                            Edge::new(lat.edge_at[s * d + nu], false),
                        ];
                        for e in b {
                            lat.incidence[e.index() as usize]
                                .push(Incidence { plaquette: id, forward: e.is_positive() });
                        }
                        lat.plaqs.push((s as u32, mu as u8, nu as u8));
                        lat.boundary.push(b);
                    }
                }
            }
        }
        let mut adjacency = vec![Vec::new(); lat.plaqs.len()];
        for inc in &lat.incidence {
            for x in inc {
                for y in inc {
                    if x.plaquette != y.plaquette {
                        adjacency[x.plaquette as usize].push(y.plaquette);
                    }
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        lat.adjacency = adjacency;
        Ok(lat)
    }

    pub fn half_side(&self) -> i32 {
        self.l
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_plaquettes(&self) -> usize {
        self.plaqs.len()
    }

    #[inline]
    fn offset_coord(&self, site: usize, axis: usize) -> usize {
        (site / self.strides[axis]) % self.side
    }

    /// Coordinate of a site index along one axis.
    #[inline]
    pub fn coord(&self, site: u32, axis: usize) -> i32 {
        self.offset_coord(site as usize, axis) as i32 - self.l
    }

    pub fn site_coords(&self, site: u32) -> Site {
        (0..self.d).map(|a| self.coord(site, a)).collect()
    }

    pub fn site_index(&self, x: &[i32]) -> Result<u32> {
        if x.len() != self.d {
            return Err(Error::InvalidInput(format!("site {x:?} has wrong dimension")));
        }
        let mut s = 0usize;
        for (a, &c) in x.iter().enumerate() {
            if c < -self.l || c > self.l {
                return Err(Error::OutOfLattice(format!("site {x:?}")));
            }
            s += (c + self.l) as usize * self.strides[a];
        }
        Ok(s as u32)
    }

    #[inline]
    pub fn tail(&self, e: Edge) -> u32 {
        let (s, a) = self.edges[e.index() as usize];
        if e.is_positive() {
            s
        } else {
            s + self.strides[a as usize] as u32
        }
    }

    #[inline]
    pub fn head(&self, e: Edge) -> u32 {
        self.tail(e.inv())
    }

    #[inline]
    pub fn edge_axis(&self, e: Edge) -> usize {
        self.edges[e.index() as usize].1 as usize
    }

    /// The edge leaving `site` along `axis` in direction `sign`, if inside the lattice.
    pub fn step(&self, site: u32, axis: usize, positive: bool) -> Option<Edge> {
        let c = self.offset_coord(site as usize, axis);
        if positive {
            let idx = self.edge_at[site as usize * self.d + axis];
            (idx != NONE).then(|| Edge::new(idx, true))
        } else if c == 0 {
            None
        } else {
            let from = site as usize - self.strides[axis];
            Some(Edge::new(self.edge_at[from * self.d + axis], false))
        }
    }

    pub fn edge_from(&self, oe: &OrientedEdge) -> Result<Edge> {
        if oe.direction >= self.d || (oe.sign != 1 && oe.sign != -1) {
            return Err(Error::InvalidInput(format!("bad edge {oe:?}")));
        }
        let s = self.site_index(&oe.tail)?;
        self.step(s, oe.direction, oe.sign == 1)
            .ok_or_else(|| Error::OutOfLattice(format!("edge {oe:?}")))
    }

    pub fn edge_info(&self, e: Edge) -> OrientedEdge {
        OrientedEdge {
            tail: self.site_coords(self.tail(e)).to_vec(),
            direction: self.edge_axis(e),
            sign: if e.is_positive() { 1 } else { -1 },
        }
    }

    pub fn plaquette_from(&self, op: &OrientedPlaquette) -> Result<Plaq> {
        let (mu, nu) = op.axes;
        if mu >= nu || nu >= self.d || (op.sign != 1 && op.sign != -1) {
            return Err(Error::InvalidInput(format!("bad plaquette {op:?}")));
        }
        let s = self.site_index(&op.corner)? as usize;
        if self.offset_coord(s, mu) + 1 >= self.side || self.offset_coord(s, nu) + 1 >= self.side {
            return Err(Error::OutOfLattice(format!("plaquette {op:?}")));
        }
        let e = Edge::new(self.edge_at[s * self.d + mu], true);
        let idx = self.incidence[e.index() as usize]
            .iter()
            .map(|i| i.plaquette)
            .find(|&p| {
                let (ps, pm, pn) = self.plaqs[p as usize];
                ps as usize == s && pm as usize == mu && pn as usize == nu
            })
            .expect("plaquette table is consistent");
        Ok(Plaq::new(idx, op.sign == 1))
    }

    pub fn plaquette_info(&self, p: Plaq) -> OrientedPlaquette {
        let (s, mu, nu) = self.plaqs[p.index() as usize];
        OrientedPlaquette {
            corner: self.site_coords(s).to_vec(),
            axes: (mu as usize, nu as usize),
            sign: if p.is_positive() { 1 } else { -1 },
        }
    }

    /// Boundary loop of an oriented plaquette, starting at its corner.
    pub fn plaquette_boundary(&self, p: Plaq) -> [Edge; 4] {
        let b = self.boundary[p.index() as usize];
        if p.is_positive() {
            b
        } else {
            [b[3].inv(), b[2].inv(), b[1].inv(), b[0].inv()]
        }
    }

    /// Corner site and spanning axes of a positive plaquette index.
    #[inline]
    pub fn plaquette_axes(&self, p: u32) -> (u32, usize, usize) {
        let (s, mu, nu) = self.plaqs[p as usize];
        (s, mu as usize, nu as usize)
    }

    /// Positive boundary edges of a positive plaquette index.
    #[inline]
    pub fn plaquette_edges(&self, p: u32) -> &[Edge; 4] {
        &self.boundary[p as usize]
    }

    /// Positive plaquettes containing the unoriented edge `e`.
    #[inline]
    pub fn incidence(&self, e: Edge) -> &[Incidence] {
        &self.incidence[e.index() as usize]
    }

    /// Signed incidence of oriented edge `e` in the positive boundary of plaquette `p`.
    pub fn incidence_sign(&self, p: u32, e: Edge) -> i32 {
        self.boundary[p as usize]
            .iter()
            .map(|&b| {
                if b == e {
                    1
                } else if b == e.inv() {
                    -1
                } else {
                    0
                }
            })
            .sum()
    }

    /// All oriented plaquettes whose boundary traverses `e` in the given orientation.
    pub fn plaquettes_containing(&self, e: Edge) -> Vec<Plaq> {
        self.incidence(e)
            .iter()
            .map(|i| Plaq::new(i.plaquette, i.forward == e.is_positive()))
            .collect()
    }

    /// Plaquettes sharing an edge with `p`.
    #[inline]
    pub fn neighbors(&self, p: u32) -> &[u32] {
        &self.adjacency[p as usize]
    }

    /// Whether a positive plaquette contains the unoriented edge.
    pub fn plaquette_contains(&self, p: u32, e: Edge) -> bool {
        self.boundary[p as usize].iter().any(|b| b.index() == e.index())
    }

    pub fn is_closed(&self, edges: &[Edge]) -> bool {
        if edges.is_empty() {
            return true;
        }
        edges.windows(2).all(|w| self.head(w[0]) == self.tail(w[1]))
            && self.head(edges[edges.len() - 1]) == self.tail(edges[0])
    }

    /// Good plaquettes sharing an edge with a member of `q`; requires `q ⊆ p`.
    pub fn boundary_of_set(&self, q: &PlaquetteSet, p: &PlaquetteSet) -> Result<PlaquetteSet> {
        if !q.is_subset(p) {
            return Err(Error::InvalidInput("Q must be a subset of P".into()));
        }
        Ok(q.iter()
            .flat_map(|&x| self.neighbors(x).iter().copied())
            .filter(|x| !p.contains(x))
            .collect())
    }

    /// Boundary loop of the `r x s` rectangle at `corner` spanned by axes `(mu, nu)`.
    pub fn rectangular_loop(
        &self,
        corner: &[i32],
        axes: (usize, usize),
        r: u32,
        s: u32,
    ) -> Result<crate::string::Loop> {
        let (mu, nu) = axes;
        if mu == nu || mu >= self.d || nu >= self.d || r == 0 || s == 0 {
            return Err(Error::InvalidInput(format!("bad rectangle axes {axes:?} size {r}x{s}")));
        }
        let mut site = self.site_index(corner)?;
        let mut edges = Vec::with_capacity(2 * (r + s) as usize);
        let legs = [(mu, true, r), (nu, true, s), (mu, false, r), (nu, false, s)];
        for (axis, pos, n) in legs {
            for _ in 0..n {
                let e = self
                    .step(site, axis, pos)
                    .ok_or_else(|| Error::OutOfLattice(format!("rectangle at {corner:?}")))?;
                site = self.head(e);
                edges.push(e);
            }
        }
        Ok(crate::string::Loop::from_edges(edges))
    }

    /// Every `C` with `|C| <= m` such that each component of `C` contains an edge of `lp`.
    ///
    /// Enumerates connected subgraphs of the plaquette adjacency graph extended by
    /// a root vertex standing for the loop. Fails once more than `cap` sets appear.
    pub fn enumerate_clusters(&self, lp: &[Edge], m: usize, cap: usize) -> Result<Vec<Vec<u32>>> {
        let mut touching: Vec<u32> = lp
            .iter()
            .flat_map(|&e| self.incidence(e).iter().map(|i| i.plaquette))
            .collect();
        touching.sort_unstable();
        touching.dedup();
        let mut seen = vec![false; self.n_plaquettes()];
        for &p in &touching {
            seen[p as usize] = true;
        }
        let mut out = Vec::new();
        let mut current = Vec::new();
        touching.reverse();
        self.extend_cluster(&mut current, touching, &mut seen, m, cap, &mut out)?;
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        Ok(out)
    }

    fn extend_cluster(
        &self,
        current: &mut Vec<u32>,
        mut untried: Vec<u32>,
        seen: &mut [bool],
        m: usize,
        cap: usize,
        out: &mut Vec<Vec<u32>>,
    ) -> Result<()> {
        if out.len() >= cap {
            return Err(Error::Capacity(format!("cluster enumeration exceeded {cap} sets")));
        }
        out.push(current.clone());
        if current.len() == m {
            return Ok(());
        }
        while let Some(v) = untried.pop() {
            let fresh: Vec<u32> =
                self.neighbors(v).iter().copied().filter(|&u| !seen[u as usize]).collect();
            for &u in &fresh {
                seen[u as usize] = true;
            }
            current.push(v);
            let mut next = untried.clone();
            next.extend(fresh.iter().rev());
            let r = self.extend_cluster(current, next, seen, m, cap, out);
            current.pop();
            for &u in &fresh {
                seen[u as usize] = false;
            }
            r?;
        }
        Ok(())
    }

    /// Connected components (under edge adjacency) of a plaquette set.
    pub fn components(&self, set: &PlaquetteSet) -> Vec<PlaquetteSet> {
        let mut done = PlaquetteSet::new();
        let mut comps = Vec::new();
        for &start in set {
            if done.contains(&start) {
                continue;
            }
            let mut comp = PlaquetteSet::new();
            let mut stack = vec![start];
            done.insert(start);
            while let Some(x) = stack.pop() {
                comp.insert(x);
                for &y in self.neighbors(x) {
                    if set.contains(&y) && done.insert(y) {
                        stack.push(y);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }
}

/// `e^{2d|l|} 50^{dM}`, the closed-form bound on the number of clusters.
pub fn cluster_count_bound(d: usize, loop_len: usize, m: usize) -> f64 {
    (2.0 * d as f64 * loop_len as f64 + (d * m) as f64 * 50f64.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom2(d: usize) -> usize {
        d * (d - 1) / 2
    }

    #[test]
    fn cell_counts_match_closed_forms() {
        for d in 2..=4 {
            for l in 1..=3 {
                let lat = Lattice::new(l, d).unwrap();
                let side = (2 * l + 1) as usize;
                let w = 2 * l as usize;
                assert_eq!(lat.n_edges(), d * side.pow(d as u32 - 1) * w);
                assert_eq!(lat.n_plaquettes(), binom2(d) * w * w * side.pow(d as u32 - 2));
            }
        }
        assert_eq!(Lattice::new(1, 2).unwrap().n_edges(), 12);
        assert_eq!(Lattice::new(1, 2).unwrap().n_plaquettes(), 4);
        assert_eq!(Lattice::new(1, 3).unwrap().n_plaquettes(), 36);
        assert!(Lattice::new(1, 1).is_err());
        assert!(Lattice::new(0, 2).is_err());
    }

    #[test]
    fn plaquette_boundaries_are_closed() {
        let lat = Lattice::new(2, 3).unwrap();
        for p in 0..lat.n_plaquettes() as u32 {
            for sign in [true, false] {
                let b = lat.plaquette_boundary(Plaq::new(p, sign));
                assert!(lat.is_closed(&b));
                for i in 0..4 {
                    assert_ne!(b[i], b[(i + 1) % 4].inv());
                }
            }
            let fwd = lat.plaquette_boundary(Plaq::new(p, true));
            let bwd = lat.plaquette_boundary(Plaq::new(p, false));
            let rev: Vec<Edge> = fwd.iter().rev().map(|e| e.inv()).collect();
            assert_eq!(rev, bwd.to_vec());
        }
    }

    #[test]
    fn bulk_and_boundary_incidence() {
        let lat = Lattice::new(2, 2).unwrap();
        let e = lat.edge_from(&OrientedEdge { tail: vec![0, 0], direction: 0, sign: 1 }).unwrap();
        assert_eq!(lat.plaquettes_containing(e).len(), 2);
        let lat3 = Lattice::new(2, 3).unwrap();
        let e3 = lat3
            .edge_from(&OrientedEdge { tail: vec![0, 0, 0], direction: 1, sign: -1 })
            .unwrap();
        assert_eq!(lat3.plaquettes_containing(e3).len(), 4);
        let small = Lattice::new(1, 2).unwrap();
        let eb = small.edge_from(&OrientedEdge { tail: vec![-1, -1], direction: 0, sign: 1 }).unwrap();
        assert_eq!(small.plaquettes_containing(eb).len(), 1);
        for p in small.plaquettes_containing(eb) {
            assert!(small.plaquette_boundary(p).contains(&eb));
        }
    }

    #[test]
    fn site_and_cell_roundtrip() {
        let lat = Lattice::new(2, 3).unwrap();
        for e in 0..lat.n_edges() as u32 {
            for pos in [true, false] {
                let edge = Edge::new(e, pos);
                assert_eq!(lat.edge_from(&lat.edge_info(edge)).unwrap(), edge);
                assert_eq!(edge.inv().inv(), edge);
            }
        }
        for p in 0..lat.n_plaquettes() as u32 {
            let pl = Plaq::new(p, false);
            assert_eq!(lat.plaquette_from(&lat.plaquette_info(pl)).unwrap(), pl);
        }
    }

    #[test]
    fn plaquette_set_boundary() {
        let lat = Lattice::new(3, 2).unwrap();
        let p = lat
            .plaquette_from(&OrientedPlaquette { corner: vec![0, 0], axes: (0, 1), sign: 1 })
            .unwrap()
            .index();
        let q: PlaquetteSet = [p].into();
        assert_eq!(lat.boundary_of_set(&q, &q).unwrap().len(), 4);
        assert!(lat.boundary_of_set(&PlaquetteSet::new(), &q).unwrap().is_empty());
        assert!(lat.boundary_of_set(&q, &PlaquetteSet::new()).is_err());
    }

    #[test]
    fn clusters_around_a_plaquette() {
        let lat = Lattice::new(3, 2).unwrap();
        let lp = lat.rectangular_loop(&[0, 0], (0, 1), 1, 1).unwrap();
        let c0 = lat.enumerate_clusters(lp.edges(), 0, 1000).unwrap();
        assert_eq!(c0, vec![Vec::<u32>::new()]);
        let c1 = lat.enumerate_clusters(lp.edges(), 1, 1000).unwrap();
        assert_eq!(c1.len(), 6);
        assert!(lat.enumerate_clusters(lp.edges(), 3, 10).is_err());
    }

    #[test]
    fn rectangles() {
        let lat = Lattice::new(3, 2).unwrap();
        let r = lat.rectangular_loop(&[-1, -1], (0, 1), 2, 3).unwrap();
        assert_eq!(r.len(), 10);
        assert!(lat.is_closed(r.edges()));
        let unit = lat.rectangular_loop(&[0, 0], (0, 1), 1, 1).unwrap();
        let p = lat.plaquette_from(&OrientedPlaquette { corner: vec![0, 0], axes: (0, 1), sign: 1 }).unwrap();
        assert_eq!(unit.edges(), &lat.plaquette_boundary(p)[..]);
        assert!(lat.rectangular_loop(&[2, 2], (0, 1), 2, 1).is_err());
    }
}
