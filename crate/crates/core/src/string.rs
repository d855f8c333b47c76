//! Loops and strings of loops, with their reductions and canonical forms.

use std::fmt;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Edge, Lattice, Plaq};

/// A closed edge sequence. Loops stored inside a [`LatticeString`] are
/// nonempty and cyclically reduced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Loop {
    edges: Vec<Edge>,
}

impl Loop {
    pub fn from_edges(edges: Vec<Edge>) -> Self {
        Loop { edges }
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }
    pub fn len(&self) -> usize {
        self.edges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Loop {
        Loop { edges: self.edges.iter().rev().map(|e| e.inv()).collect() }
    }
    /// Cyclic rotation starting at position `k`.
    pub fn rotated(&self, k: usize) -> Vec<Edge> {
        let mut v = Vec::with_capacity(self.edges.len());
        v.extend_from_slice(&self.edges[k..]);
        v.extend_from_slice(&self.edges[..k]);
        v
    }
}

impl fmt::Debug for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.edges.iter()).finish()
    }
}

/// Erases backtracks `a e e^{-1} b -> a b`, including those that wrap around
/// the end of the sequence. The result is unique up to cyclic rotation.
pub fn reduce_cyclic(edges: &[Edge]) -> Vec<Edge> {
    let mut w: Vec<Edge> = Vec::with_capacity(edges.len());
    for &e in edges {
        if w.last() == Some(&e.inv()) {
            w.pop();
        } else {
            w.push(e);
        }
    }
    let mut lo = 0;
    let mut hi = w.len();
    while hi - lo >= 2 && w[lo] == w[hi - 1].inv() {
        lo += 1;
        hi -= 1;
    }
    w.truncate(hi);
    w.drain(..lo);
    w
}

/// Backtrack erasure for a closed loop; fails on a non-closed sequence.
pub fn erase_backtracks(lat: &Lattice, edges: &[Edge]) -> Result<Vec<Edge>> {
    if !lat.is_closed(edges) {
        return Err(Error::InvalidInput("edge sequence is not closed".into()));
    }
    Ok(reduce_cyclic(edges))
}

/// Index of the lexicographically least rotation (Booth's algorithm).
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let at = |i: isize| &s[i as usize % n];
    let mut f = vec![-1isize; 2 * n];
    let mut k: isize = 0;
    for j in 1..2 * n as isize {
        let sj = at(j);
        let mut i = f[(j - k - 1) as usize];
        while i != -1 && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j - i - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j;
            }
            f[(j - k) as usize] = -1;
        } else {
            f[(j - k) as usize] = i + 1;
        }
    }
    k as usize
}

/// Splitting complexity measured in quarters: `4 * iota = |s| - 4n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Quarters(pub i64);

impl Quarters {
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 4.0
    }
}

impl fmt::Display for Quarters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.rem_euclid(4) {
            0 => write!(f, "{}", self.0 / 4),
            2 => write!(f, "{}/2", self.0 / 2),
            _ => write!(f, "{}/4", self.0),
        }
    }
}

/// Either the null string at a basepoint or a sequence of reduced loops.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeString {
    loops: Vec<Loop>,
    base: u32,
}

impl fmt::Debug for LatticeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.loops.is_empty() {
            write!(f, "null@{}", self.base)
        } else {
            f.debug_list().entries(self.loops.iter()).finish()
        }
    }
}

impl LatticeString {
    pub fn null(base: u32) -> Self {
        LatticeString { loops: Vec::new(), base }
    }

    pub fn single(l: Loop) -> Self {
        LatticeString { loops: vec![l], base: 0 }
    }

    /// Builds a string from raw loops, reducing each and dropping null ones.
    pub fn from_raw(loops: Vec<Vec<Edge>>, base: u32) -> Self {
        let loops: Vec<Loop> = loops
            .into_iter()
            .map(|l| reduce_cyclic(&l))
            .filter(|l| !l.is_empty())
            .map(Loop::from_edges)
            .collect();
        LatticeString { loops, base }
    }

    /// Builds a string from loops already known to be reduced.
    pub fn from_loops(loops: Vec<Loop>) -> Self {
        LatticeString { loops, base: 0 }
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }
    pub fn is_null(&self) -> bool {
        self.loops.is_empty()
    }
    pub fn base(&self) -> u32 {
        self.base
    }
    pub fn n_loops(&self) -> usize {
        self.loops.len()
    }
    pub fn perimeter(&self) -> usize {
        self.loops.iter().map(Loop::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.loops.iter().flat_map(|l| l.edges.iter().copied())
    }

    /// `|s|/4 - n`, zero on null strings.
    pub fn iota(&self) -> Quarters {
        if self.is_null() {
            Quarters(0)
        } else {
            Quarters(self.perimeter() as i64 - 4 * self.n_loops() as i64)
        }
    }

    /// Checks membership in the space of admissible strings.
    pub fn validate(&self, lat: &Lattice) -> Result<()> {
        for l in &self.loops {
            if l.is_empty() {
                return Err(Error::InvalidInput("empty loop inside a non-null string".into()));
            }
            if l.edges.iter().any(|e| e.index() as usize >= lat.n_edges()) {
                return Err(Error::OutOfLattice("edge index".into()));
            }
            if !lat.is_closed(&l.edges) {
                return Err(Error::InvalidInput("loop is not closed".into()));
            }
            if reduce_cyclic(&l.edges).len() != l.len() {
                return Err(Error::InvalidInput("loop has a backtrack".into()));
            }
        }
        Ok(())
    }

    /// Representative invariant under rotation of each loop and reordering of loops.
    pub fn canonical(&self) -> LatticeString {
        let mut loops: Vec<Loop> = self
            .loops
            .iter()
            .map(|l| Loop::from_edges(l.rotated(least_rotation(&l.edges))))
            .collect();
        loops.sort();
        LatticeString { loops, base: 0 }
    }

    /// Opaque byte key of the canonical form.
    pub fn key(&self) -> Vec<u8> {
        let c = self.canonical();
        let mut out = Vec::with_capacity(4 * (c.perimeter() + c.n_loops()));
        for l in &c.loops {
            out.extend_from_slice(&(l.len() as u32).to_be_bytes());
            for e in &l.edges {
                out.extend_from_slice(&e.0.to_be_bytes());
            }
        }
        out
    }

    /// Net signed traversal count of every positive edge.
    pub fn flux(&self, n_edges: usize) -> Vec<i32> {
        let mut f = vec![0i32; n_edges];
        for e in self.edges() {
            f[e.index() as usize] += if e.is_positive() { 1 } else { -1 };
        }
        f
    }
}

/// Plaquette count on positively oriented plaquettes (dense).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PosCount(pub Vec<u32>);

impl PosCount {
    pub fn zeros(n: usize) -> Self {
        PosCount(vec![0; n])
    }
    pub fn constant(n: usize, v: u32) -> Self {
        PosCount(vec![v; n])
    }
    pub fn get(&self, p: u32) -> u32 {
        self.0[p as usize]
    }
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, _)| i as u32)
    }
}

/// Plaquette count on oriented plaquettes, indexed by [`Plaq`] code (dense).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OriCount(pub Vec<u32>);

impl OriCount {
    pub fn zeros(n_plaquettes: usize) -> Self {
        OriCount(vec![0; 2 * n_plaquettes])
    }
    pub fn get(&self, p: Plaq) -> u32 {
        self.0[p.0 as usize]
    }
    pub fn set(&mut self, p: Plaq, v: u32) {
        self.0[p.0 as usize] = v;
    }
    pub fn add(&mut self, p: Plaq, v: u32) {
        self.0[p.0 as usize] += v;
    }
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&x| x != 0).count()
    }
    /// Net winding `J(p) - J(p^{-1})` of every positive plaquette.
    pub fn net(&self) -> Vec<i64> {
        self.0.chunks(2).map(|c| c[0] as i64 - c[1] as i64).collect()
    }
}

/// Occurrences of oriented edge `e` in the loops of `s` and in `J` copies of plaquette boundaries.
pub fn occurrence_count(lat: &Lattice, s: &LatticeString, j: &OriCount, e: Edge) -> u64 {
    let in_s = s.edges().filter(|&x| x == e).count() as u64;
    let in_j: u64 = lat.plaquettes_containing(e).iter().map(|&p| j.get(p) as u64).sum();
    in_s + in_j
}

/// Occurrences of `e` or `e^{-1}` in `s` plus `K(p)` for every plaquette containing `e`.
pub fn unoriented_occurrence_count(lat: &Lattice, s: &LatticeString, k: &PosCount, e: Edge) -> u64 {
    let in_s = s.edges().filter(|x| x.index() == e.index()).count() as u64;
    let in_k: u64 = lat.incidence(e).iter().map(|i| k.get(i.plaquette) as u64).sum();
    in_s + in_k
}

/// `max_e n_e(s, K)` over all edges.
pub fn max_occurrence(lat: &Lattice, s: &LatticeString, k: &PosCount) -> u64 {
    let mut counts = vec![0u64; lat.n_edges()];
    for e in s.edges() {
        counts[e.index() as usize] += 1;
    }
    for p in k.support() {
        for e in lat.plaquette_edges(p) {
            counts[e.index() as usize] += k.get(p) as u64;
        }
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Edge flux of `s` plus the flux of `J` copies of plaquette boundaries.
pub fn total_flux(lat: &Lattice, s: &LatticeString, j: &OriCount) -> Vec<i64> {
    let mut f: Vec<i64> = s.flux(lat.n_edges()).into_iter().map(i64::from).collect();
    for (p, w) in j.net().into_iter().enumerate() {
        if w != 0 {
            for e in lat.plaquette_edges(p as u32) {
                f[e.index() as usize] += if e.is_positive() { w } else { -w };
            }
        }
    }
    f
}

/// Whether every edge is traversed equally often in both directions by `(s, J)`.
pub fn is_balanced(lat: &Lattice, s: &LatticeString, j: &OriCount) -> bool {
    total_flux(lat, s, j).iter().all(|&x| x == 0)
}

pub(crate) fn random_plaquette_at<R: Rng + ?Sized>(lat: &Lattice, rng: &mut R, site: u32) -> Option<Vec<Edge>> {
    let d = lat.dim();
    for _ in 0..16 {
        let mu = rng.random_range(0..d);
        let mut nu = rng.random_range(0..d - 1);
        if nu >= mu {
            nu += 1;
        }
        let (a, b) = if mu < nu { (mu, nu) } else { (nu, mu) };
        let mut corner = lat.site_coords(site);
        if rng.random_bool(0.5) {
            corner[a] -= 1;
        }
        if rng.random_bool(0.5) {
            corner[b] -= 1;
        }
        let op = crate::lattice::OrientedPlaquette {
            corner: corner.to_vec(),
            axes: (a, b),
            sign: if rng.random_bool(0.5) { 1 } else { -1 },
        };
        if let Ok(p) = lat.plaquette_from(&op) {
            let bd = lat.plaquette_boundary(p);
            let k = bd.iter().position(|&e| lat.tail(e) == site)?;
            let mut v = bd[k..].to_vec();
            v.extend_from_slice(&bd[..k]);
            return Some(v);
        }
    }
    None
}

pub(crate) fn random_walk<R: Rng + ?Sized>(lat: &Lattice, rng: &mut R, start: u32, steps: usize) -> Vec<Edge> {
    let mut site = start;
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps {
        let axis = rng.random_range(0..lat.dim());
        if let Some(e) = lat.step(site, axis, rng.random_bool(0.5)) {
            if out.last() == Some(&e.inv()) {
                continue;
            }
            site = lat.head(e);
            out.push(e);
        }
    }
    out
}

pub(crate) fn path_between<R: Rng + ?Sized>(lat: &Lattice, rng: &mut R, from: u32, to: u32) -> Vec<Edge> {
    let mut axes: Vec<usize> = (0..lat.dim()).collect();
    for i in (1..axes.len()).rev() {
        axes.swap(i, rng.random_range(0..=i));
    }
    let mut site = from;
    let mut out = Vec::new();
    for a in axes {
        while lat.coord(site, a) != lat.coord(to, a) {
            let up = lat.coord(site, a) < lat.coord(to, a);
            let e = lat.step(site, a, up).expect("path stays inside the box");
            site = lat.head(e);
            out.push(e);
        }
    }
    out
}

/// One random closed loop: a product of lassos or an out-and-back walk.
pub fn random_loop<R: Rng + ?Sized>(lat: &Lattice, rng: &mut R, max_len: usize) -> Option<Loop> {
    let base = rng.random_range(0..lat.n_sites() as u32);
    let mut word = Vec::new();
    if rng.random_bool(0.6) {
        let k = rng.random_range(1..=3);
        for _ in 0..k {
            let steps = rng.random_range(0..=2);
            let g = random_walk(lat, rng, base, steps);
            let end = g.last().map_or(base, |&e| lat.head(e));
            let p = random_plaquette_at(lat, rng, end)?;
            let reps = if rng.random_bool(0.15) { 2 } else { 1 };
            word.extend_from_slice(&g);
            for _ in 0..reps {
                word.extend_from_slice(&p);
            }
            word.extend(g.iter().rev().map(|e| e.inv()));
        }
    } else {
        let steps = rng.random_range(2..=max_len.max(2));
        let g = random_walk(lat, rng, base, steps);
        let end = g.last().map_or(base, |&e| lat.head(e));
        word.extend_from_slice(&g);
        word.extend(path_between(lat, rng, end, base));
    }
    let r = reduce_cyclic(&word);
    (!r.is_empty() && r.len() <= max_len).then(|| Loop::from_edges(r))
}

/// A random admissible string with at most `max_loops` loops of length at most `max_len`.
pub fn random_string<R: Rng + ?Sized>(
    lat: &Lattice,
    rng: &mut R,
    max_len: usize,
    max_loops: usize,
) -> LatticeString {
    let n = rng.random_range(1..=max_loops.max(1));
    let mut loops = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..64 {
            if let Some(l) = random_loop(lat, rng, max_len) {
                loops.push(l);
                break;
            }
        }
    }
    if loops.is_empty() {
        LatticeString::null(rng.random_range(0..lat.n_sites() as u32))
    } else {
        LatticeString::from_loops(loops)
    }
}
