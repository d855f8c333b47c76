//! The one-step operations on lattice strings.

use serde::{Deserialize, Serialize};

use crate::area::{underbar_area, AreaCache};
use crate::error::{Error, Result};
use crate::lattice::{Edge, Lattice, Plaq, PlaquetteSet};
use crate::string::{reduce_cyclic, LatticeString, PosCount};

/// An occurrence of an edge inside a string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgePos {
    pub loop_idx: usize,
    pub offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    SplitPos,
    SplitNeg,
    MergePos,
    MergeNeg,
    DeformPos,
    DeformNeg,
    Revive,
}

impl OpKind {
    pub fn label(self) -> &'static str {
        match self {
            OpKind::SplitPos => "split+",
            OpKind::SplitNeg => "split-",
            OpKind::MergePos => "merge+",
            OpKind::MergeNeg => "merge-",
            OpKind::DeformPos => "deform+",
            OpKind::DeformNeg => "deform-",
            OpKind::Revive => "revive",
        }
    }
}

/// `sign * N^n_pow * beta^beta_pow * inv_factorial`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub sign: i8,
    pub n_pow: i32,
    pub beta_pow: u32,
    pub inv_factorial: f64,
}

impl Coefficient {
    pub const fn new(sign: i8, n_pow: i32, beta_pow: u32) -> Self {
        Coefficient { sign, n_pow, beta_pow, inv_factorial: 1.0 }
    }

    pub fn for_kind(kind: OpKind) -> Self {
        match kind {
            OpKind::SplitPos => Self::new(-1, 0, 0),
            OpKind::SplitNeg => Self::new(1, 0, 0),
            OpKind::MergePos => Self::new(-1, -2, 0),
            OpKind::MergeNeg => Self::new(1, -2, 0),
            OpKind::DeformPos => Self::new(-1, -1, 1),
            OpKind::DeformNeg => Self::new(1, -1, 1),
            OpKind::Revive => Self::new(1, 0, 0),
        }
    }

    pub fn eval(&self, n: f64, beta: f64) -> f64 {
        f64::from(self.sign) * n.powi(self.n_pow) * beta.powi(self.beta_pow as i32) * self.inv_factorial
    }
}

/// A string together with its remaining plaquette budget `K` and the absorbed bad set `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub s: LatticeString,
    pub k: PosCount,
    pub q: PlaquetteSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperationResult {
    pub kind: OpKind,
    pub string: LatticeString,
    pub count: PosCount,
    pub q: PlaquetteSet,
    pub coefficient: Coefficient,
}

fn loop_at(s: &LatticeString, pos: EdgePos) -> Result<Vec<Edge>> {
    let l = s
        .loops()
        .get(pos.loop_idx)
        .ok_or_else(|| Error::InvalidInput(format!("no loop {}", pos.loop_idx)))?;
    if pos.offset >= l.len() {
        return Err(Error::InvalidInput(format!("offset {} beyond loop length", pos.offset)));
    }
    Ok(l.rotated(pos.offset))
}

/// Loops of `s` with loop `i` replaced by `new` and loop `drop` removed.
fn replace(s: &LatticeString, i: usize, new: Vec<Vec<Edge>>, drop: Option<usize>) -> Vec<Vec<Edge>> {
    let mut out = Vec::with_capacity(s.n_loops() + new.len());
    let mut new = Some(new);
    for (j, l) in s.loops().iter().enumerate() {
        if j == i {
            out.extend(new.take().unwrap_or_default());
        } else if Some(j) != drop {
            out.push(l.edges().to_vec());
        }
    }
    out
}

fn result(kind: OpKind, t: &Triple, loops: Vec<Vec<Edge>>, base: u32, count: PosCount) -> OperationResult {
    OperationResult {
        kind,
        string: LatticeString::from_raw(loops, base),
        count,
        q: t.q.clone(),
        coefficient: Coefficient::for_kind(kind),
    }
}

/// Splittings of the loop at `pos` against every other occurrence of its edge in that loop.
pub fn splittings(lat: &Lattice, t: &Triple, pos: EdgePos) -> Result<Vec<OperationResult>> {
    let r = loop_at(&t.s, pos)?;
    let e = r[0];
    let base = lat.tail(e);
    let mut out = Vec::new();
    for j in 1..r.len() {
        if r[j] == e {
            let loops = replace(&t.s, pos.loop_idx, vec![r[..j].to_vec(), r[j..].to_vec()], None);
            out.push(result(OpKind::SplitPos, t, loops, base, t.k.clone()));
        } else if r[j] == e.inv() {
            let loops = replace(&t.s, pos.loop_idx, vec![r[1..j].to_vec(), r[j + 1..].to_vec()], None);
            out.push(result(OpKind::SplitNeg, t, loops, base, t.k.clone()));
        }
    }
    Ok(out)
}

/// Mergers of the loop at `pos` with occurrences of its edge in the other loops.
pub fn mergers(lat: &Lattice, t: &Triple, pos: EdgePos) -> Result<Vec<OperationResult>> {
    let r = loop_at(&t.s, pos)?;
    let e = r[0];
    let base = lat.tail(e);
    let mut out = Vec::new();
    for (j, other) in t.s.loops().iter().enumerate() {
        if j == pos.loop_idx {
            continue;
        }
        for (k, &f) in other.edges().iter().enumerate() {
            if f == e {
                let mut m = other.rotated(k);
                m.extend_from_slice(&r);
                let loops = replace(&t.s, pos.loop_idx, vec![m], Some(j));
                out.push(result(OpKind::MergePos, t, loops, base, t.k.clone()));
            } else if f == e.inv() {
                let q = other.rotated(k);
                let mut m = q[1..].to_vec();
                m.extend_from_slice(&r[1..]);
                let loops = replace(&t.s, pos.loop_idx, vec![m], Some(j));
                out.push(result(OpKind::MergeNeg, t, loops, base, t.k.clone()));
            }
        }
    }
    Ok(out)
}

fn rotate_to(b: [Edge; 4], e: Edge) -> Vec<Edge> {
    let k = b.iter().position(|&x| x == e).expect("plaquette contains the edge");
    let mut v = b[k..].to_vec();
    v.extend_from_slice(&b[..k]);
    v
}

/// Deformations at `pos` by plaquettes through its edge with positive budget.
pub fn deformations(lat: &Lattice, t: &Triple, pos: EdgePos) -> Result<Vec<OperationResult>> {
    let r = loop_at(&t.s, pos)?;
    let e = r[0];
    let base = lat.tail(e);
    let mut out = Vec::new();
    for inc in lat.incidence(e) {
        let p0 = inc.plaquette;
        if t.k.get(p0) == 0 {
            continue;
        }
        let mut k = t.k.clone();
        k.0[p0 as usize] -= 1;
        let with_e = Plaq::new(p0, inc.forward == e.is_positive());

        let mut m = rotate_to(lat.plaquette_boundary(with_e), e);
        m.extend_from_slice(&r);
        let loops = replace(&t.s, pos.loop_idx, vec![m], None);
        out.push(result(OpKind::DeformPos, t, loops, base, k.clone()));

        let c = rotate_to(lat.plaquette_boundary(with_e.inv()), e.inv());
        let mut m = c[1..].to_vec();
        m.extend_from_slice(&r[1..]);
        let loops = replace(&t.s, pos.loop_idx, vec![m], None);
        out.push(result(OpKind::DeformNeg, t, loops, base, k));
    }
    Ok(out)
}

/// Splittings, mergers and deformations at `pos`, in that order.
pub fn loop_operations(lat: &Lattice, t: &Triple, pos: EdgePos) -> Result<Vec<OperationResult>> {
    let mut v = splittings(lat, t, pos)?;
    v.extend(mergers(lat, t, pos)?);
    v.extend(deformations(lat, t, pos)?);
    Ok(v)
}

/// Marks edges lying in some plaquette of `p`.
pub fn bad_edge_mask(lat: &Lattice, p: &PlaquetteSet) -> Vec<bool> {
    let mut m = vec![false; lat.n_edges()];
    for &x in p {
        for e in lat.plaquette_edges(x) {
            m[e.index() as usize] = true;
        }
    }
    m
}

/// First occurrence (loop order, then offset) of an edge in no bad plaquette.
pub fn good_edge(lat: &Lattice, s: &LatticeString, p: &PlaquetteSet) -> Option<EdgePos> {
    let mask = bad_edge_mask(lat, p);
    good_edge_masked(s, &mask)
}

pub fn good_edge_masked(s: &LatticeString, bad: &[bool]) -> Option<EdgePos> {
    for (i, l) in s.loops().iter().enumerate() {
        for (k, e) in l.edges().iter().enumerate() {
            if !bad[e.index() as usize] {
                return Some(EdgePos { loop_idx: i, offset: k });
            }
        }
    }
    None
}

/// Union of components of `p` touching `s`, when those cover every edge of `s`.
pub fn stuck_component(lat: &Lattice, s: &LatticeString, p: &PlaquetteSet) -> Option<PlaquetteSet> {
    if s.is_null() || p.is_empty() {
        return None;
    }
    let mut touched = vec![false; lat.n_edges()];
    for e in s.edges() {
        touched[e.index() as usize] = true;
    }
    let mut q = PlaquetteSet::new();
    for c in lat.components(p) {
        if c.iter().any(|&x| lat.plaquette_edges(x).iter().any(|e| touched[e.index() as usize])) {
            q.extend(c);
        }
    }
    let covered = bad_edge_mask(lat, &q);
    if s.edges().all(|e| covered[e.index() as usize]) {
        Some(q)
    } else {
        None
    }
}

/// Revivals of a stuck triple: every nonzero `J` on the oriented boundary of its bad component.
///
/// Fails unless `t.s` is stuck with `|Q~| < underbar_area(t.s)`, or when more than `cap`
/// results would be produced.
pub fn revivals(
    lat: &Lattice,
    t: &Triple,
    p: &PlaquetteSet,
    cache: Option<&AreaCache>,
    cap: usize,
) -> Result<Vec<OperationResult>> {
    let qt = stuck_component(lat, &t.s, p).ok_or_else(|| Error::Precondition("string is not stuck".into()))?;
    let n = qt.len() as u64;
    let ua = match cache {
        Some(c) => c.underbar_area(lat, &t.s, n),
        None => underbar_area(lat, &t.s, n),
    };
    if !ua.exceeds(n) {
        return Err(Error::Precondition("stuck component is not smaller than the modified area".into()));
    }
    revivals_unchecked(lat, t, &qt, p, cap)
}

/// Revivals around a given stuck component, without the area precondition.
pub fn revivals_unchecked(
    lat: &Lattice,
    t: &Triple,
    qt: &PlaquetteSet,
    p: &PlaquetteSet,
    cap: usize,
) -> Result<Vec<OperationResult>> {
    let r: Vec<u32> = lat.boundary_of_set(qt, p)?.into_iter().collect();
    let budget: Vec<u32> = r.iter().map(|&x| t.k.get(x)).collect();
    let mut count = t.k.clone();
    for &x in &r {
        count.0[x as usize] = 0;
    }
    let mut q = t.q.clone();
    q.extend(qt.iter().copied());
    let base = t.s.base();

    let mut out = Vec::new();
    let mut j = vec![(0u32, 0u32); r.len()];
    loop {
        // odometer over pairs (J(p), J(p^{-1})) with J(p) + J(p^{-1}) <= K(p)
        let mut i = 0;
        loop {
            if i == r.len() {
                return Ok(out);
            }
            let (a, b) = j[i];
            if a + b < budget[i] {
                j[i] = (a + 1, b);
                break;
            } else if b < budget[i] {
                j[i] = (0, b + 1);
                break;
            }
            j[i] = (0, 0);
            i += 1;
        }
        if out.len() >= cap {
            return Err(Error::Capacity(format!("more than {cap} revivals")));
        }
        let mut loops = Vec::new();
        let mut total = 0u32;
        let mut inv_fact = 1.0;
        for (idx, &(a, b)) in j.iter().enumerate() {
            for (plaq, c) in [(Plaq::new(r[idx], true), a), (Plaq::new(r[idx], false), b)] {
                for m in 1..=c {
                    loops.push(lat.plaquette_boundary(plaq).to_vec());
                    inv_fact /= f64::from(m);
                }
                total += c;
            }
        }
        loops.extend(t.s.loops().iter().map(|l| l.edges().to_vec()));
        out.push(OperationResult {
            kind: OpKind::Revive,
            string: LatticeString::from_raw(loops, base),
            count: count.clone(),
            q: q.clone(),
            coefficient: Coefficient { sign: 1, n_pow: total as i32, beta_pow: total, inv_factorial: inv_fact },
        });
    }
}

/// Reduced concatenation, exposed for tests of the merge identities.
pub fn concat_reduced(a: &[Edge], b: &[Edge]) -> Vec<Edge> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    reduce_cyclic(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::OrientedPlaquette;
    use crate::string::Loop;

    fn plaq(lat: &Lattice, c: &[i32], sign: i8) -> Plaq {
        lat.plaquette_from(&OrientedPlaquette { corner: c.to_vec(), axes: (0, 1), sign }).unwrap()
    }

    fn triple(lat: &Lattice, s: LatticeString, k: u32) -> Triple {
        Triple { s, k: PosCount::constant(lat.n_plaquettes(), k), q: PlaquetteSet::new() }
    }

    #[test]
    fn rectangle_has_no_splittings() {
        let lat = Lattice::new(2, 2).unwrap();
        let s = LatticeString::single(lat.rectangular_loop(&[-1, -1], (0, 1), 2, 1).unwrap());
        let t = triple(&lat, s, 0);
        for k in 0..6 {
            assert!(splittings(&lat, &t, EdgePos { loop_idx: 0, offset: k }).unwrap().is_empty());
        }
    }

    fn starting_at(lat: &Lattice, b: [Edge; 4], site: u32) -> Vec<Edge> {
        let k = b.iter().position(|&x| lat.tail(x) == site).unwrap();
        let mut v = b[k..].to_vec();
        v.extend_from_slice(&b[..k]);
        v
    }

    #[test]
    fn figure_eight_negative_splitting() {
        let lat = Lattice::new(2, 2).unwrap();
        let e = lat.step(lat.site_index(&[0, 0]).unwrap(), 0, true).unwrap();
        let x = starting_at(&lat, lat.plaquette_boundary(plaq(&lat, &[1, 0], 1)), lat.head(e));
        let y = starting_at(&lat, lat.plaquette_boundary(plaq(&lat, &[-1, 0], 1)), lat.tail(e));
        let mut w = vec![e];
        w.extend(&x);
        w.push(e.inv());
        w.extend(&y);
        let s = LatticeString::single(Loop::from_edges(w));
        s.validate(&lat).unwrap();
        let t = triple(&lat, s.clone(), 0);
        let res = splittings(&lat, &t, EdgePos { loop_idx: 0, offset: 0 }).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].kind, OpKind::SplitNeg);
        assert_eq!(res[0].coefficient.eval(3.0, 0.1), 1.0);
        assert_eq!(res[0].string.loops(), &[Loop::from_edges(x), Loop::from_edges(y)]);
        assert!(res[0].string.iota().0 <= s.iota().0 - 6);
    }

    #[test]
    fn full_cancellation_merger() {
        let lat = Lattice::new(2, 2).unwrap();
        let p = plaq(&lat, &[0, 0], 1);
        let s = LatticeString::from_loops(vec![
            Loop::from_edges(lat.plaquette_boundary(p).to_vec()),
            Loop::from_edges(lat.plaquette_boundary(p.inv()).to_vec()),
        ]);
        let t = triple(&lat, s, 0);
        let res = mergers(&lat, &t, EdgePos { loop_idx: 0, offset: 0 }).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].kind, OpKind::MergeNeg);
        assert!(res[0].string.is_null());
        assert_eq!(res[0].string.base(), lat.tail(lat.plaquette_boundary(p)[0]));
        assert!((res[0].coefficient.eval(2.0, 0.1) - 0.25).abs() < 1e-15);
        let single = triple(&lat, LatticeString::single(Loop::from_edges(lat.plaquette_boundary(p).to_vec())), 0);
        assert!(mergers(&lat, &single, EdgePos { loop_idx: 0, offset: 0 }).unwrap().is_empty());
    }

    #[test]
    fn deformation_counts() {
        let lat = Lattice::new(2, 2).unwrap();
        let s = LatticeString::single(Loop::from_edges(lat.plaquette_boundary(plaq(&lat, &[0, 0], 1)).to_vec()));
        let t = triple(&lat, s.clone(), 1);
        let res = deformations(&lat, &t, EdgePos { loop_idx: 0, offset: 0 }).unwrap();
        assert_eq!(res.iter().filter(|r| r.kind == OpKind::DeformPos).count(), 2);
        assert_eq!(res.iter().filter(|r| r.kind == OpKind::DeformNeg).count(), 2);
        for r in &res {
            assert_eq!(r.count.total(), t.k.total() - 1);
            r.string.validate(&lat).unwrap();
        }
        // the negative deformation by the loop's own plaquette cancels it
        assert!(res.iter().any(|r| r.kind == OpKind::DeformNeg && r.string.is_null()));
        let t0 = triple(&lat, s, 0);
        assert!(deformations(&lat, &t0, EdgePos { loop_idx: 0, offset: 0 }).unwrap().is_empty());
    }

    #[test]
    fn stuck_examples() {
        let lat = Lattice::new(2, 2).unwrap();
        let p = plaq(&lat, &[0, 0], 1);
        let s = LatticeString::single(Loop::from_edges(lat.plaquette_boundary(p).to_vec()));
        assert_eq!(stuck_component(&lat, &s, &PlaquetteSet::new()), None);
        let bad: PlaquetteSet = [p.index()].into_iter().collect();
        assert_eq!(stuck_component(&lat, &s, &bad), Some(bad.clone()));
        assert_eq!(good_edge(&lat, &s, &bad), None);
        assert_eq!(good_edge(&lat, &s, &PlaquetteSet::new()), Some(EdgePos { loop_idx: 0, offset: 0 }));
        let domino = LatticeString::single(lat.rectangular_loop(&[0, 0], (0, 1), 2, 1).unwrap());
        assert_eq!(stuck_component(&lat, &domino, &bad), None);
        assert!(good_edge(&lat, &domino, &bad).is_some());
    }

    #[test]
    fn revival_enumeration() {
        let lat = Lattice::new(2, 2).unwrap();
        // a 2x1 bad domino whose boundary in a 2x1 window has a single good plaquette
        let bad: PlaquetteSet = [plaq(&lat, &[-2, -2], 1).index()].into_iter().collect();
        let s = LatticeString::single(Loop::from_edges(lat.plaquette_boundary(plaq(&lat, &[-2, -2], 1)).to_vec()));
        let mut k = PosCount::zeros(lat.n_plaquettes());
        let r: Vec<u32> = lat.boundary_of_set(&bad, &bad).unwrap().into_iter().collect();
        assert_eq!(r.len(), 2);
        k.0[r[0] as usize] = 1;
        let t = Triple { s: s.clone(), k, q: PlaquetteSet::new() };
        let res = revivals_unchecked(&lat, &t, &bad, &bad, 100).unwrap();
        assert_eq!(res.len(), 2);
        for x in &res {
            assert_eq!(x.string.n_loops(), 2);
            assert_eq!(x.string.iota(), s.iota());
            assert_eq!(x.count.total(), 0);
            assert_eq!(x.q, bad);
            assert!((x.coefficient.eval(3.0, 0.5) - 1.5).abs() < 1e-15);
        }
        let t0 = Triple { s, k: PosCount::zeros(lat.n_plaquettes()), q: PlaquetteSet::new() };
        assert!(revivals_unchecked(&lat, &t0, &bad, &bad, 100).unwrap().is_empty());
        // a plaquette loop has modified area 1, so its single-plaquette stuck component is too large
        assert!(matches!(revivals(&lat, &t0, &bad, None, 100), Err(Error::Precondition(_))));
    }
}
