//! Randomised invariant suite for the string operations.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::area::{area, underbar_area, AreaValue};
use crate::error::{Error, Result};
use crate::lattice::{Edge, Lattice, OrientedPlaquette, PlaquetteSet};
use crate::ops::{deformations, mergers, revivals, splittings, EdgePos, OpKind, OperationResult, Triple};
use crate::string::{
    max_occurrence, path_between, random_plaquette_at, random_string, random_walk, reduce_cyclic,
    unoriented_occurrence_count, LatticeString, PosCount,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpClass {
    Split,
    Merge,
    Deform,
    Revive,
    Counts,
}

impl OpClass {
    pub const ALL: [OpClass; 5] = [OpClass::Split, OpClass::Merge, OpClass::Deform, OpClass::Revive, OpClass::Counts];

    pub fn label(self) -> &'static str {
        match self {
            OpClass::Split => "split",
            OpClass::Merge => "merge",
            OpClass::Deform => "deform",
            OpClass::Revive => "revive",
            OpClass::Counts => "counts",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random strings per operation class.
    pub cases: usize,
    /// Replace `iota = |s|/4 - n` by `|s|/4 - 2n` to exercise the harness.
    pub mutant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaResult {
    pub lemma: &'static str,
    pub class: OpClass,
    pub cases: u64,
    pub checks: u64,
    pub violations: u64,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub mutant: bool,
    pub results: Vec<LemmaResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.violations == 0)
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.results.iter().filter(|r| r.violations > 0).map(|r| r.lemma).collect()
    }
}

/// Lemma names with the class of strings that exercises them.
const LEMMAS: [(&str, OpClass); 11] = [
    ("split_iota", OpClass::Split),
    ("split_area", OpClass::Split),
    ("merge_iota", OpClass::Merge),
    ("merge_area", OpClass::Merge),
    ("deform_iota", OpClass::Deform),
    ("deform_area", OpClass::Deform),
    ("deform_count", OpClass::Deform),
    ("revive_iota", OpClass::Revive),
    ("revive_area", OpClass::Revive),
    ("operation_counts", OpClass::Counts),
    ("occurrence_monotone", OpClass::Counts),
];

struct Outcome {
    lemma: &'static str,
    ok: bool,
    witness: String,
}

fn quarters(s: &LatticeString, mutant: bool) -> i64 {
    if s.is_null() {
        0
    } else {
        let per_loop = if mutant { 8 } else { 4 };
        s.perimeter() as i64 - per_loop * s.n_loops() as i64
    }
}

fn area_cap(s: &LatticeString) -> u64 {
    let n = s.perimeter() as u64;
    n * n / 4 + 4
}

fn exact(v: AreaValue) -> Result<u64> {
    v.finite().ok_or_else(|| Error::Capacity("area beyond the a priori cap".into()))
}

/// Whether `underbar_area(s) + slack >= target`, decided by a capped search.
fn at_least(lat: &Lattice, s: &LatticeString, target: u64, slack: u64) -> bool {
    match target.checked_sub(slack + 1) {
        None => true,
        Some(cap) => underbar_area(lat, s, cap).finite().is_none(),
    }
}

/// Runs every lemma on `cases` generated instances per operation class.
pub fn verify_lemmas(opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.cases == 0 {
        return Err(Error::InvalidInput("cases must be positive".into()));
    }
    let lattices: Vec<Lattice> =
        [(2, 2), (3, 2), (2, 3), (3, 3)].iter().map(|&(l, d)| Lattice::new(l, d)).collect::<Result<_>>()?;
    let mut results = Vec::new();
    for (ci, class) in OpClass::ALL.into_iter().enumerate() {
        let outcomes: Vec<Vec<Outcome>> = (0..opts.cases)
            .into_par_iter()
            .map(|case| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(((ci as u64) << 32) | case as u64);
                let lat = &lattices[rng.random_range(0..lattices.len())];
                run_case(lat, class, &mut rng, opts.mutant)
            })
            .collect::<Result<_>>()?;
        for (name, c) in LEMMAS.iter().filter(|(_, c)| *c == class) {
            let mut r = LemmaResult {
                lemma: name,
                class: *c,
                cases: opts.cases as u64,
                checks: 0,
                violations: 0,
                witness: None,
            };
            for o in outcomes.iter().flatten().filter(|o| o.lemma == *name) {
                r.checks += 1;
                if !o.ok {
                    r.violations += 1;
                    r.witness.get_or_insert_with(|| o.witness.clone());
                }
            }
            results.push(r);
        }
    }
    Ok(SuiteReport { seed: opts.seed, mutant: opts.mutant, results })
}

fn run_case<R: Rng>(lat: &Lattice, class: OpClass, rng: &mut R, mutant: bool) -> Result<Vec<Outcome>> {
    match class {
        OpClass::Split => split_case(lat, rng, mutant),
        OpClass::Merge => merge_case(lat, rng, mutant),
        OpClass::Deform => deform_case(lat, rng, mutant),
        OpClass::Revive => revive_case(lat, rng, mutant),
        OpClass::Counts => count_case(lat, rng),
    }
}

fn witness(t: &Triple, pos: Option<EdgePos>, op: Option<&OperationResult>) -> String {
    let mut w = format!("s={:?} K={:?} Q={:?}", t.s, t.k.0, t.q);
    if let Some(p) = pos {
        w += &format!(" pos={p:?}");
    }
    if let Some(op) = op {
        w += &format!(" -> {} {:?}", op.kind.label(), op.string);
    }
    w
}

/// `g p g^{-1}` for a random short walk `g` from `base` and a random plaquette `p` at its end.
fn lasso<R: Rng>(lat: &Lattice, rng: &mut R, base: u32) -> Option<Vec<Edge>> {
    let steps = rng.random_range(0..=2);
    let g = random_walk(lat, rng, base, steps);
    let end = g.last().map_or(base, |&e| lat.head(e));
    let p = random_plaquette_at(lat, rng, end)?;
    let mut w = g.clone();
    w.extend(p);
    w.extend(g.iter().rev().map(|e| e.inv()));
    Some(w)
}

/// A word through one plaquette twice (in either orientation), conjugated by random paths.
fn doubled_word<R: Rng>(lat: &Lattice, rng: &mut R) -> Option<Vec<Edge>> {
    let x = rng.random_range(0..lat.n_sites() as u32);
    let p = random_plaquette_at(lat, rng, x)?;
    let q: Vec<Edge> = if rng.random_bool(0.5) { p.clone() } else { p.iter().rev().map(|e| e.inv()).collect() };
    let mut word = Vec::new();
    for piece in [p, q] {
        let y = rng.random_range(0..lat.n_sites() as u32);
        let there = path_between(lat, rng, y, x);
        word.extend_from_slice(&there);
        word.extend(piece);
        word.extend(there.iter().rev().map(|e| e.inv()));
    }
    Some(reduce_cyclic(&word))
}

fn positions(s: &LatticeString, pred: impl Fn(usize, Edge) -> bool) -> Vec<EdgePos> {
    let mut out = Vec::new();
    for (i, l) in s.loops().iter().enumerate() {
        for (k, &e) in l.edges().iter().enumerate() {
            if pred(i, e) {
                out.push(EdgePos { loop_idx: i, offset: k });
            }
        }
    }
    out
}

fn pick<R: Rng, T: Copy>(rng: &mut R, v: &[T]) -> T {
    v[rng.random_range(0..v.len())]
}

fn random_k<R: Rng>(lat: &Lattice, rng: &mut R, b: u32) -> PosCount {
    PosCount((0..lat.n_plaquettes()).map(|_| rng.random_range(0..=b)).collect())
}

fn split_case<R: Rng>(lat: &Lattice, rng: &mut R, mutant: bool) -> Result<Vec<Outcome>> {
    loop {
        let Some(word) = doubled_word(lat, rng) else { continue };
        if word.len() > 24 || word.is_empty() {
            continue;
        }
        let s = LatticeString::from_raw(vec![word], 0);
        let l = &s.loops()[0];
        let pos = positions(&s, |_, e| l.edges().iter().filter(|x| x.index() == e.index()).count() > 1);
        if pos.is_empty() {
            continue;
        }
        let pos = pick(rng, &pos);
        let t = Triple { s: s.clone(), k: PosCount::zeros(lat.n_plaquettes()), q: PlaquetteSet::new() };
        let ops = splittings(lat, &t, pos)?;
        if ops.is_empty() {
            continue;
        }
        let (a, ua) = (exact(area(lat, &s, area_cap(&s)))?, exact(underbar_area(lat, &s, area_cap(&s)))?);
        let i0 = quarters(&s, mutant);
        let mut out = Vec::new();
        for op in &ops {
            let drop = if op.kind == OpKind::SplitNeg { 6 } else { 4 };
            out.push(Outcome {
                lemma: "split_iota",
                ok: quarters(&op.string, mutant) <= i0 - drop,
                witness: witness(&t, Some(pos), Some(op)),
            });
            let same = exact(area(lat, &op.string, area_cap(&s)))? == a
                && exact(underbar_area(lat, &op.string, area_cap(&s)))? == ua;
            out.push(Outcome { lemma: "split_area", ok: same, witness: witness(&t, Some(pos), Some(op)) });
        }
        return Ok(out);
    }
}

fn merge_case<R: Rng>(lat: &Lattice, rng: &mut R, mutant: bool) -> Result<Vec<Outcome>> {
    loop {
        let x = rng.random_range(0..lat.n_sites() as u32);
        let Some(p) = random_plaquette_at(lat, rng, x) else { continue };
        let mut loops = Vec::new();
        for k in 0..2 {
            let y = rng.random_range(0..lat.n_sites() as u32);
            let there = path_between(lat, rng, y, x);
            let mut w = there.clone();
            if k == 1 && rng.random_bool(0.5) {
                w.extend(p.iter().rev().map(|e| e.inv()));
            } else {
                w.extend_from_slice(&p);
            }
            w.extend(there.iter().rev().map(|e| e.inv()));
            loops.push(w);
        }
        if rng.random_bool(0.3) {
            let z = rng.random_range(0..lat.n_sites() as u32);
            if let Some(w) = lasso(lat, rng, z) {
                loops.push(w);
            }
        }
        let s = LatticeString::from_raw(loops, 0);
        if s.n_loops() < 2 || s.perimeter() > 36 {
            continue;
        }
        let pos = positions(&s, |i, e| {
            s.loops().iter().enumerate().any(|(j, l)| j != i && l.edges().iter().any(|x| x.index() == e.index()))
        });
        if pos.is_empty() {
            continue;
        }
        let pos = pick(rng, &pos);
        let t = Triple { s: s.clone(), k: PosCount::zeros(lat.n_plaquettes()), q: PlaquetteSet::new() };
        let ops = mergers(lat, &t, pos)?;
        if ops.is_empty() {
            continue;
        }
        let (a, ua) = (exact(area(lat, &s, area_cap(&s)))?, exact(underbar_area(lat, &s, area_cap(&s)))?);
        let i0 = quarters(&s, mutant);
        let mut out = Vec::new();
        for op in &ops {
            out.push(Outcome {
                lemma: "merge_iota",
                ok: quarters(&op.string, mutant) <= i0 + 4,
                witness: witness(&t, Some(pos), Some(op)),
            });
            let same = exact(area(lat, &op.string, area_cap(&s)))? == a
                && exact(underbar_area(lat, &op.string, area_cap(&s)))? == ua;
            out.push(Outcome { lemma: "merge_area", ok: same, witness: witness(&t, Some(pos), Some(op)) });
        }
        return Ok(out);
    }
}

fn deform_case<R: Rng>(lat: &Lattice, rng: &mut R, mutant: bool) -> Result<Vec<Outcome>> {
    loop {
        let s = random_string(lat, rng, 12, 3);
        if s.is_null() {
            continue;
        }
        let kb = rng.random_range(1..=3);
        let k = random_k(lat, rng, kb);
        let pos = pick(rng, &positions(&s, |_, _| true));
        let t = Triple { s: s.clone(), k, q: PlaquetteSet::new() };
        let ops = deformations(lat, &t, pos)?;
        if ops.is_empty() {
            continue;
        }
        let cap = area_cap(&s) + 4;
        let (a, ua) = (exact(area(lat, &s, cap))?, exact(underbar_area(lat, &s, cap))?);
        let i0 = quarters(&s, mutant);
        let mut out = Vec::new();
        for op in &ops {
            let w = witness(&t, Some(pos), Some(op));
            out.push(Outcome { lemma: "deform_iota", ok: quarters(&op.string, mutant) <= i0 + 4, witness: w.clone() });
            let a2 = exact(area(lat, &op.string, cap + 8))?;
            out.push(Outcome { lemma: "deform_area", ok: a <= a2 + 1 && at_least(lat, &op.string, ua, 1), witness: w.clone() });
            out.push(Outcome { lemma: "deform_count", ok: op.count.total() + 1 == t.k.total(), witness: w });
        }
        return Ok(out);
    }
}

fn count_case<R: Rng>(lat: &Lattice, rng: &mut R) -> Result<Vec<Outcome>> {
    let s = loop {
        let s = random_string(lat, rng, 16, 3);
        if !s.is_null() {
            break s;
        }
    };
    let kb = rng.random_range(0..=2);
    let k = random_k(lat, rng, kb);
    let two_d = 2 * lat.dim() as u64;
    let b = u64::from(kb).max(max_occurrence(lat, &s, &k).div_ceil(two_d)).max(1);
    let pos = pick(rng, &positions(&s, |_, _| true));
    let t = Triple { s, k, q: PlaquetteSet::new() };
    let w = witness(&t, Some(pos), None);
    let nsplit = splittings(lat, &t, pos)?.len() as u64;
    let merges = mergers(lat, &t, pos)?;
    let deforms = deformations(lat, &t, pos)?;
    let ok = nsplit <= two_d * b && merges.len() as u64 <= two_d * b && deforms.len() as u64 <= 2 * two_d;
    let mut out = vec![Outcome { lemma: "operation_counts", ok, witness: w }];
    for op in splittings(lat, &t, pos)?.iter().chain(&merges).chain(&deforms) {
        let mono = t
            .s
            .edges()
            .chain(op.string.edges())
            .all(|e| unoriented_occurrence_count(lat, &op.string, &op.count, e) <= unoriented_occurrence_count(lat, &t.s, &t.k, e));
        out.push(Outcome { lemma: "occurrence_monotone", ok: mono, witness: witness(&t, Some(pos), Some(op)) });
    }
    Ok(out)
}

/// Rectangle loop with the bad set containing its inner ring of cells.
fn stuck_instance<R: Rng>(lat: &Lattice, rng: &mut R) -> Option<(LatticeString, PlaquetteSet, PosCount, PlaquetteSet)> {
    let d = lat.dim();
    let side = 2 * lat.half_side() as u64;
    let r = rng.random_range(3..=side.min(5)) as i32;
    let sd = rng.random_range(3..=side.min(5)) as i32;
    let mu = rng.random_range(0..d);
    let mut nu = rng.random_range(0..d - 1);
    if nu >= mu {
        nu += 1;
    }
    let (mu, nu) = (mu.min(nu), mu.max(nu));
    let l = lat.half_side();
    let mut corner = vec![0i32; d];
    for (a, c) in corner.iter_mut().enumerate() {
        let len = if a == mu { r } else if a == nu { sd } else { 0 };
        *c = rng.random_range(-l..=l - len);
    }
    let lp = lat.rectangular_loop(&corner, (mu, nu), r as u32, sd as u32).ok()?;
    let mut bad = PlaquetteSet::new();
    for i in 0..r {
        for j in 0..sd {
            if i == 0 || j == 0 || i == r - 1 || j == sd - 1 {
                let mut c = corner.clone();
                c[mu] += i;
                c[nu] += j;
                let p = lat.plaquette_from(&OrientedPlaquette { corner: c, axes: (mu, nu), sign: 1 }).ok()?;
                bad.insert(p.index());
            }
        }
    }
    let mut loops = vec![lp.edges().to_vec()];
    if rng.random_bool(0.3) {
        let p = pick(rng, &bad.iter().copied().collect::<Vec<_>>());
        let positive = rng.random_bool(0.5);
        loops.push(lat.plaquette_boundary(crate::lattice::Plaq::new(p, positive)).to_vec());
    }
    let n_extra = rng.random_range(0..=3);
    let extra: Vec<u32> = (0..n_extra).map(|_| rng.random_range(0..lat.n_plaquettes() as u32)).collect();
    bad.extend(extra);
    let b = rng.random_range(1..=2u32);
    let k = PosCount(
        (0..lat.n_plaquettes() as u32)
            .map(|p| if bad.contains(&p) || !rng.random_bool(0.12) { 0 } else { rng.random_range(1..=b) })
            .collect(),
    );
    let q: PlaquetteSet = bad.iter().copied().filter(|_| rng.random_bool(0.2)).collect();
    Some((LatticeString::from_raw(loops, 0), bad, k, q))
}

fn revive_case<R: Rng>(lat: &Lattice, rng: &mut R, mutant: bool) -> Result<Vec<Outcome>> {
    let d = lat.dim() as u64;
    loop {
        let Some((s, bad, k, q)) = stuck_instance(lat, rng) else { continue };
        let t = Triple { s: s.clone(), k, q };
        let ops = match revivals(lat, &t, &bad, None, 20_000) {
            Ok(ops) if !ops.is_empty() => ops,
            Ok(_) | Err(Error::Precondition(_)) | Err(Error::Capacity(_)) => continue,
            Err(e) => return Err(e),
        };
        let ua = exact(underbar_area(lat, &s, area_cap(&s)))?;
        let i0 = quarters(&s, mutant);
        let mut out = Vec::new();
        for op in ops.iter().take(24) {
            let w = witness(&t, None, Some(op));
            out.push(Outcome { lemma: "revive_iota", ok: quarters(&op.string, mutant) == i0, witness: w.clone() });
            let grown = (op.q.len() - t.q.len()) as u64;
            out.push(Outcome { lemma: "revive_area", ok: at_least(lat, &op.string, ua, 8 * (d - 1) * grown), witness: w });
        }
        return Ok(out);
    }
}
