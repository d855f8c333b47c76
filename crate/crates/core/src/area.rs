//! Minimal area and minimal support of balancing plaquette counts.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flux::FluxSystem;
use crate::lattice::{Lattice, PlaquetteSet};
use crate::string::{LatticeString, Loop};

/// Result of a capped minimisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AreaValue {
    Finite(u64),
    /// No balancing count within the cap.
    Unbounded(u64),
}

impl AreaValue {
    pub fn finite(self) -> Option<u64> {
        match self {
            AreaValue::Finite(a) => Some(a),
            AreaValue::Unbounded(_) => None,
        }
    }

    /// Whether the value is known to exceed `x`.
    pub fn exceeds(self, x: u64) -> bool {
        match self {
            AreaValue::Finite(a) => a > x,
            AreaValue::Unbounded(c) => c >= x,
        }
    }
}

/// Positive plaquettes whose four corners lie in the bounding box of the string.
///
/// Projecting any balancing count onto the box coordinatewise keeps it balancing
/// and never increases either objective, so minimisers can be sought inside it.
fn box_plaquettes(lat: &Lattice, s: &LatticeString) -> Vec<u32> {
    let d = lat.dim();
    let mut lo = vec![i32::MAX; d];
    let mut hi = vec![i32::MIN; d];
    for e in s.edges() {
        let t = lat.tail(e);
        for a in 0..d {
            let c = lat.coord(t, a);
            lo[a] = lo[a].min(c);
            hi[a] = hi[a].max(c);
        }
    }
    (0..lat.n_plaquettes() as u32)
        .filter(|&p| {
            let (site, mu, nu) = lat.plaquette_axes(p);
            (0..d).all(|a| {
                let c = lat.coord(site, a);
                let top = if a == mu || a == nu { c + 1 } else { c };
                c >= lo[a] && top <= hi[a]
            })
        })
        .collect()
}

fn system(lat: &Lattice, s: &LatticeString) -> (Vec<u32>, FluxSystem, Vec<i64>) {
    let vars = box_plaquettes(lat, s);
    let flux: Vec<i64> = s.flux(lat.n_edges()).into_iter().map(i64::from).collect();
    let sys = FluxSystem::new(lat, &vars, &flux);
    (vars, sys, flux)
}

/// Lower bounds `(area, support)` from projecting onto every coordinate plane.
///
/// Summing out the other coordinates maps plaquettes of the plane to a planar
/// count whose boundary is the projected flux; that planar count is unique, and
/// every nonzero entry needs a distinct plaquette of the fibre above it.
fn projection_bounds(lat: &Lattice, flux: &[i64]) -> (u64, u64) {
    let d = lat.dim();
    let (mut area_lb, mut supp_lb) = (0u64, 0u64);
    for mu in 0..d {
        for nu in mu + 1..d {
            let mut f: BTreeMap<(i32, i32), i64> = BTreeMap::new();
            for (i, &x) in flux.iter().enumerate() {
                let e = crate::lattice::Edge::new(i as u32, true);
                if x != 0 && lat.edge_axis(e) == mu {
                    let t = lat.tail(e);
                    *f.entry((lat.coord(t, mu), lat.coord(t, nu))).or_default() += x;
                }
            }
            let mut it = f.into_iter().filter(|(_, v)| *v != 0).peekable();
            let mut c = 0i64;
            while let Some(((a, j), v)) = it.next() {
                c -= v;
                let next = match it.peek() {
                    Some(&((a2, j2), _)) if a2 == a => j2,
                    _ => {
                        c = 0;
                        continue;
                    }
                };
                let len = (next - j) as u64;
                area_lb += len * c.unsigned_abs();
                supp_lb += if c != 0 { len } else { 0 };
            }
        }
    }
    (area_lb, supp_lb)
}

/// Net windings of a minimal-area balancing count, as `(plaquette, n)` pairs.
pub fn min_area_solution(lat: &Lattice, s: &LatticeString, cap: u64) -> Option<(u64, Vec<(u32, i64)>)> {
    if s.is_null() {
        return Some((0, Vec::new()));
    }
    let (vars, sys, flux) = system(lat, s);
    let (alb, _) = projection_bounds(lat, &flux);
    sys.minimize(cap, false, 0, alb).map(|(a, sol)| (a, nonzero(&vars, &sol)))
}

/// Net windings of a minimal-support balancing count.
pub fn min_support_solution(lat: &Lattice, s: &LatticeString, cap: u64) -> Option<(u64, Vec<(u32, i64)>)> {
    if s.is_null() {
        return Some((0, Vec::new()));
    }
    let (vars, sys, flux) = system(lat, s);
    let abs: i64 = flux.iter().map(|x| x.abs()).sum();
    let (alb, slb) = projection_bounds(lat, &flux);
    if slb > cap {
        return None;
    }
    // the support of a minimal-area count is a feasible starting bound
    let (start, vmax) = match sys.minimize(u64::MAX / 4, false, 0, alb) {
        Some((_, sol)) => {
            let nnz = sol.iter().filter(|&&n| n != 0).count() as u64;
            if nnz <= cap && nnz <= slb {
                return Some((nnz, nonzero(&vars, &sol)));
            }
            let big = sol.iter().map(|n| n.abs()).max().unwrap_or(0);
            (cap.min(nnz), abs.max(big).max(1))
        }
        None => return None,
    };
    sys.minimize(start, true, vmax, slb).map(|(a, sol)| (a, nonzero(&vars, &sol)))
}

fn nonzero(vars: &[u32], sol: &[i64]) -> Vec<(u32, i64)> {
    vars.iter().zip(sol).filter(|(_, &n)| n != 0).map(|(&p, &n)| (p, n)).collect()
}

/// Least total plaquette count balancing `s`, if at most `cap`.
pub fn area(lat: &Lattice, s: &LatticeString, cap: u64) -> AreaValue {
    match min_area_solution(lat, s, cap) {
        Some((a, _)) => AreaValue::Finite(a),
        None => AreaValue::Unbounded(cap),
    }
}

/// Least support size of a count balancing `s`, if at most `cap`.
pub fn underbar_area(lat: &Lattice, s: &LatticeString, cap: u64) -> AreaValue {
    match min_support_solution(lat, s, cap) {
        Some((a, _)) => AreaValue::Finite(a),
        None => AreaValue::Unbounded(cap),
    }
}

/// `max |P ∩ C|` over clusters `C` of `l` with `|C| <= area(l)`.
pub fn m_of_p(lat: &Lattice, l: &Loop, p: &PlaquetteSet, cluster_cap: usize) -> Result<u64> {
    if p.is_empty() {
        return Ok(0);
    }
    let s = LatticeString::single(l.clone());
    let a = area(lat, &s, 4 * l.len() as u64 * l.len() as u64)
        .finite()
        .ok_or_else(|| crate::Error::Precondition("loop bounds no surface in the lattice".into()))?;
    let clusters = lat.enumerate_clusters(l.edges(), a as usize, cluster_cap)?;
    Ok(clusters
        .iter()
        .map(|c| c.iter().filter(|x| p.contains(x)).count() as u64)
        .max()
        .unwrap_or(0))
}

#[derive(Clone, Copy)]
enum Known {
    Exact(u64),
    Above(u64),
}

/// Memo of area queries keyed on canonical string keys.
#[derive(Default)]
pub struct AreaCache {
    area: RwLock<HashMap<Vec<u8>, Known>>,
    under: RwLock<HashMap<Vec<u8>, Known>>,
}

impl AreaCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn area(&self, lat: &Lattice, s: &LatticeString, cap: u64) -> AreaValue {
        Self::query(&self.area, lat, s, cap, area)
    }

    pub fn underbar_area(&self, lat: &Lattice, s: &LatticeString, cap: u64) -> AreaValue {
        Self::query(&self.under, lat, s, cap, underbar_area)
    }

    fn query(
        map: &RwLock<HashMap<Vec<u8>, Known>>,
        lat: &Lattice,
        s: &LatticeString,
        cap: u64,
        f: fn(&Lattice, &LatticeString, u64) -> AreaValue,
    ) -> AreaValue {
        let key = s.key();
        if let Some(k) = map.read().expect("area cache poisoned").get(&key).copied() {
            match k {
                Known::Exact(a) if a <= cap => return AreaValue::Finite(a),
                Known::Exact(_) => return AreaValue::Unbounded(cap),
                Known::Above(c) if c >= cap => return AreaValue::Unbounded(cap),
                Known::Above(_) => {}
            }
        }
        let v = f(lat, s, cap);
        let k = match v {
            AreaValue::Finite(a) => Known::Exact(a),
            AreaValue::Unbounded(c) => Known::Above(c),
        };
        map.write().expect("area cache poisoned").insert(key, k);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Plaq;

    fn rect(lat: &Lattice, corner: &[i32], axes: (usize, usize), r: u32, s: u32) -> LatticeString {
        LatticeString::single(lat.rectangular_loop(corner, axes, r, s).unwrap())
    }

    #[test]
    fn null_and_plaquette() {
        let lat = Lattice::new(2, 2).unwrap();
        assert_eq!(area(&lat, &LatticeString::null(0), 5), AreaValue::Finite(0));
        assert_eq!(underbar_area(&lat, &LatticeString::null(0), 5), AreaValue::Finite(0));
        let p = LatticeString::single(Loop::from_edges(lat.plaquette_boundary(Plaq::new(3, true)).to_vec()));
        assert_eq!(area(&lat, &p, 5), AreaValue::Finite(1));
        assert_eq!(underbar_area(&lat, &p, 5), AreaValue::Finite(1));
        assert_eq!(area(&lat, &p, 0), AreaValue::Unbounded(0));
    }

    #[test]
    fn rectangles() {
        let lat = Lattice::new(2, 3).unwrap();
        for (r, s) in [(1, 1), (2, 1), (2, 2), (3, 2), (4, 1)] {
            let l = rect(&lat, &[-2, -1, 0], (0, 1), r, s);
            assert_eq!(area(&lat, &l, 20), AreaValue::Finite((r * s) as u64));
            assert_eq!(underbar_area(&lat, &l, 20), AreaValue::Finite((r * s) as u64));
        }
        let l = rect(&lat, &[-1, 0, -1], (0, 2), 2, 2);
        assert_eq!(area(&lat, &l, 3), AreaValue::Unbounded(3));
    }

    #[test]
    fn doubled_loop() {
        let lat = Lattice::new(1, 2).unwrap();
        let l = lat.rectangular_loop(&[-1, -1], (0, 1), 1, 1).unwrap();
        let mut e = l.edges().to_vec();
        e.extend_from_slice(l.edges());
        let s = LatticeString::single(Loop::from_edges(e));
        assert_eq!(area(&lat, &s, 10), AreaValue::Finite(2));
        assert_eq!(underbar_area(&lat, &s, 10), AreaValue::Finite(1));
    }

    #[test]
    fn m_of_p_examples() {
        let lat = Lattice::new(2, 2).unwrap();
        let l = lat.rectangular_loop(&[0, 0], (0, 1), 1, 1).unwrap();
        assert_eq!(m_of_p(&lat, &l, &PlaquetteSet::new(), 1000).unwrap(), 0);
        let inside = lat.plaquette_from(&crate::lattice::OrientedPlaquette {
            corner: vec![0, 0],
            axes: (0, 1),
            sign: 1,
        });
        let p0 = inside.unwrap().index();
        let near = lat.neighbors(p0)[0];
        assert_eq!(m_of_p(&lat, &l, &[near].into_iter().collect(), 1000).unwrap(), 1);
        let far = lat
            .plaquette_from(&crate::lattice::OrientedPlaquette { corner: vec![-2, -2], axes: (0, 1), sign: 1 })
            .unwrap()
            .index();
        assert_eq!(m_of_p(&lat, &l, &[far].into_iter().collect(), 1000).unwrap(), 0);
    }

    #[test]
    fn cache_agrees() {
        let lat = Lattice::new(2, 2).unwrap();
        let c = AreaCache::new();
        let l = rect(&lat, &[-1, -1], (0, 1), 2, 1);
        assert_eq!(c.area(&lat, &l, 1), AreaValue::Unbounded(1));
        assert_eq!(c.area(&lat, &l, 5), AreaValue::Finite(2));
        assert_eq!(c.area(&lat, &l, 5), AreaValue::Finite(2));
        assert_eq!(c.area(&lat, &l, 1), AreaValue::Unbounded(1));
    }
}
