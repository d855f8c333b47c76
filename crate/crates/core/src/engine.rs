//! Loop-equation operators on finite configuration spaces.
//!
//! A [`StateSpace`] is the breadth-first closure of one-step string operations
//! from a root. Non-interior states, such as null strings or triples outside the
//! configuration space, carry values supplied from outside; the
//! operator `M` maps every interior state to the signed weighted sum over its
//! successors.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::{underbar_area, AreaCache, AreaValue};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, PlaquetteSet};
use crate::ops::{
    bad_edge_mask, good_edge_masked, loop_operations, revivals_unchecked, stuck_component, Coefficient, EdgePos,
    OpKind, OperationResult, Triple,
};
use crate::oracle::{mc_batches, ActionWeight, McEstimate, McRun, Observable};
use crate::string::{max_occurrence, unoriented_occurrence_count, LatticeString, Loop, PosCount, Quarters};
use crate::texp::{exp_trunc, tail, validate_parameters, ParameterSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Every plaquette truncated at degree `K(p)`; designated edge is the first edge.
    Truncated,
    /// Bad plaquettes carry `tau_B`; designated edge is the first good edge, stuck strings revive.
    Modified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    /// Exceeding a cap is an error.
    Exact,
    /// States beyond the caps become frontier states with externally supplied values.
    Bounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub max_states: usize,
    pub max_perimeter: usize,
    /// In units of a quarter.
    pub max_iota: i64,
    pub max_revivals: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_states: 200_000, max_perimeter: 64, max_iota: 64, max_revivals: 100_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateClass {
    Interior,
    /// Null string of the truncated model: `M f = f`.
    Null,
    /// Terminal with vanishing value.
    Terminal0,
    /// Terminal with a supplied value.
    Terminal1,
    /// Successor of an interior state lying outside the configuration space.
    Exterior,
    /// Unexpanded state beyond a cap (bounded mode only).
    Frontier,
}

impl StateClass {
    pub fn label(self) -> &'static str {
        match self {
            StateClass::Interior => "interior",
            StateClass::Null => "null",
            StateClass::Terminal0 => "terminal0",
            StateClass::Terminal1 => "terminal1",
            StateClass::Exterior => "exterior",
            StateClass::Frontier => "frontier",
        }
    }

    /// Whether the value of the state is an input rather than an unknown.
    pub fn is_boundary(self) -> bool {
        self != StateClass::Interior
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub target: usize,
    pub kind: OpKind,
    pub coefficient: Coefficient,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct State {
    pub triple: Triple,
    pub class: StateClass,
    pub iota: Quarters,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug)]
pub struct StateSpace {
    pub model: Model,
    pub lattice: Lattice,
    pub b: u64,
    pub bad: PlaquetteSet,
    pub root: usize,
    /// Bound on `|supp(B - K) ∪ Q|` defining the modified configuration space.
    pub omega_bound: u64,
    pub states: Vec<State>,
    index: HashMap<Vec<u8>, usize>,
}

/// Byte key of a triple whose string is already canonical.
fn triple_key(t: &Triple) -> Vec<u8> {
    let mut k = t.s.key();
    k.push(0xff);
    for &c in &t.k.0 {
        k.extend_from_slice(&c.to_le_bytes());
    }
    k.push(0xfe);
    for &q in &t.q {
        k.extend_from_slice(&q.to_le_bytes());
    }
    k
}

fn canonical_triple(s: &LatticeString, k: PosCount, q: PlaquetteSet) -> Triple {
    Triple { s: s.canonical(), k, q }
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn find(&self, t: &Triple) -> Option<usize> {
        let c = canonical_triple(&t.s, t.k.clone(), t.q.clone());
        self.index.get(&triple_key(&c)).copied()
    }

    pub fn count(&self, class: StateClass) -> usize {
        self.states.iter().filter(|s| s.class == class).count()
    }

    /// States belonging to the configuration space proper (exterior states excluded).
    pub fn in_space(&self, i: usize) -> bool {
        !matches!(self.states[i].class, StateClass::Exterior | StateClass::Frontier)
    }

    fn insert(&mut self, t: Triple, class: StateClass) -> (usize, bool) {
        let key = triple_key(&t);
        if let Some(&i) = self.index.get(&key) {
            return (i, false);
        }
        let i = self.states.len();
        let iota = t.s.iota();
        self.states.push(State { triple: t, class, iota, transitions: Vec::new() });
        self.index.insert(key, i);
        (i, true)
    }

    /// Evaluated transition weights at `(N, beta)`.
    pub fn weights(&self, n: f64, beta: f64) -> Vec<Vec<(usize, f64)>> {
        self.states
            .iter()
            .map(|s| s.transitions.iter().map(|t| (t.target, t.coefficient.eval(n, beta))).collect())
            .collect()
    }

    /// `(M f)(i)`: the successor sum on interior states, `boundary[i]` elsewhere.
    pub fn apply_m(&self, w: &[Vec<(usize, f64)>], f: &[Complex64], boundary: &[Complex64], i: usize) -> Complex64 {
        if self.states[i].class.is_boundary() {
            boundary[i]
        } else {
            w[i].iter().map(|&(t, c)| c * f[t]).sum()
        }
    }

    /// One Jacobi sweep `f -> M f` over every state.
    pub fn sweep(&self, w: &[Vec<(usize, f64)>], f: &[Complex64], boundary: &[Complex64]) -> Vec<Complex64> {
        (0..self.len()).into_par_iter().map(|i| self.apply_m(w, f, boundary, i)).collect()
    }

    /// `boundary[i]` from `value` on boundary states and zero on interior ones.
    ///
    /// Terminal states of the first kind get zero without calling `value`.
    pub fn boundary_from<F>(&self, value: F) -> Result<Vec<Complex64>>
    where
        F: Fn(&Triple) -> Result<Complex64> + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|i| match self.states[i].class {
                StateClass::Interior | StateClass::Terminal0 => Ok(Complex64::new(0.0, 0.0)),
                _ => value(&self.states[i].triple),
            })
            .collect()
    }

    /// Evaluates a state function on every state.
    pub fn tabulate<F>(&self, value: F) -> Result<Vec<Complex64>>
    where
        F: Fn(&Triple) -> Result<Complex64> + Sync,
    {
        (0..self.len()).into_par_iter().map(|i| value(&self.states[i].triple)).collect()
    }

    /// `sum_p (B - K(p))` over good plaquettes outside `skip`.
    fn deficit(&self, t: &Triple, skip: &PlaquetteSet) -> u64 {
        t.k.0
            .iter()
            .enumerate()
            .filter(|(p, _)| !self.bad.contains(&(*p as u32)) && !skip.contains(&(*p as u32)))
            .map(|(_, &k)| self.b.saturating_sub(u64::from(k)))
            .sum()
    }

    /// `|supp(B - K) ∪ Q|` with the support taken over good plaquettes.
    fn omega_size(&self, t: &Triple) -> u64 {
        let supp = t.k.0
            .iter()
            .enumerate()
            .filter(|(p, &k)| !self.bad.contains(&(*p as u32)) && u64::from(k) < self.b)
            .count();
        (supp + t.q.len()) as u64
    }
}

fn check_caps(t: &Triple, caps: &Caps) -> bool {
    t.s.perimeter() <= caps.max_perimeter && t.s.iota().0 <= caps.max_iota
}

fn cap_error(what: &str) -> Error {
    Error::Capacity(format!("state space exceeds the {what} cap"))
}

/// Breadth-first closure of the truncated model from `(l, B)`.
pub fn build_truncated(lat: &Lattice, l: &Loop, b: u64, caps: &Caps, mode: BuildMode) -> Result<StateSpace> {
    let root_s = LatticeString::single(l.clone());
    root_s.validate(lat)?;
    let kb = u32::try_from(b).map_err(|_| Error::InvalidInput("B too large for an explicit state space".into()))?;
    let mut sp = StateSpace {
        model: Model::Truncated,
        lattice: lat.clone(),
        b,
        bad: PlaquetteSet::new(),
        root: 0,
        omega_bound: u64::MAX,
        states: Vec::new(),
        index: HashMap::new(),
    };
    let root = canonical_triple(&root_s, PosCount::constant(lat.n_plaquettes(), kb), PlaquetteSet::new());
    let ne_cap = 2 * lat.dim() as u64 * b;
    if max_occurrence(lat, &root.s, &root.k) > ne_cap {
        return Err(Error::Precondition("root violates max n_e <= 2dB".into()));
    }
    sp.insert(root, StateClass::Interior);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let t = sp.states[i].triple.clone();
        if t.s.is_null() {
            sp.states[i].class = StateClass::Null;
            continue;
        }
        if !check_caps(&t, caps) {
            match mode {
                BuildMode::Exact => return Err(cap_error("perimeter/iota")),
                BuildMode::Bounded => {
                    sp.states[i].class = StateClass::Frontier;
                    continue;
                }
            }
        }
        let ops = loop_operations(lat, &t, EdgePos { loop_idx: 0, offset: 0 })?;
        let mut trans = Vec::with_capacity(ops.len());
        for op in ops {
            let nt = canonical_triple(&op.string, op.count, PlaquetteSet::new());
            if max_occurrence(lat, &nt.s, &nt.k) > ne_cap {
                return Err(Error::Precondition("successor violates max n_e <= 2dB".into()));
            }
            let full = sp.len() >= caps.max_states;
            let (j, fresh) = if full && sp.find(&nt).is_none() {
                match mode {
                    BuildMode::Exact => return Err(cap_error("state-count")),
                    BuildMode::Bounded => sp.insert(nt, StateClass::Frontier),
                }
            } else {
                sp.insert(nt, StateClass::Interior)
            };
            if fresh && sp.states[j].class == StateClass::Interior {
                queue.push_back(j);
            }
            trans.push(Transition { target: j, kind: op.kind, coefficient: op.coefficient });
        }
        sp.states[i].transitions = trans;
    }
    Ok(sp)
}

/// Breadth-first closure of the modified model from `(l, B, ∅)` with bad set `bad`.
pub fn build_modified(
    lat: &Lattice,
    l: &Loop,
    b: u64,
    bad: &PlaquetteSet,
    caps: &Caps,
    mode: BuildMode,
) -> Result<StateSpace> {
    let root_s = LatticeString::single(l.clone());
    root_s.validate(lat)?;
    let kb = u32::try_from(b).map_err(|_| Error::InvalidInput("B too large for an explicit state space".into()))?;
    if bad.iter().any(|&p| p as usize >= lat.n_plaquettes()) {
        return Err(Error::OutOfLattice("bad plaquette index".into()));
    }
    let cache = AreaCache::new();
    let len = l.len() as u64;
    let omega_bound = underbar_area(lat, &root_s, len * len)
        .finite()
        .ok_or_else(|| Error::Precondition("loop bounds no surface in the lattice".into()))?;
    let mut k0 = PosCount::constant(lat.n_plaquettes(), kb);
    for &p in bad {
        k0.0[p as usize] = 0;
    }
    let mut sp = StateSpace {
        model: Model::Modified,
        lattice: lat.clone(),
        b,
        bad: bad.clone(),
        root: 0,
        omega_bound,
        states: Vec::new(),
        index: HashMap::new(),
    };
    let mask = bad_edge_mask(lat, bad);
    sp.insert(canonical_triple(&root_s, k0, PlaquetteSet::new()), StateClass::Interior);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let t = sp.states[i].triple.clone();
        if !t.s.is_null() && !check_caps(&t, caps) {
            match mode {
                BuildMode::Exact => return Err(cap_error("perimeter/iota")),
                BuildMode::Bounded => {
                    sp.states[i].class = StateClass::Frontier;
                    continue;
                }
            }
        }
        let (ops, stuck) = successors(lat, &t, bad, &mask, &cache, caps)?;
        let inside: Vec<bool> = ops
            .iter()
            .map(|op| sp.omega_size(&Triple { s: LatticeString::null(0), k: op.count.clone(), q: op.q.clone() }) <= omega_bound)
            .collect();
        if !inside.iter().any(|&x| x) {
            sp.states[i].class = terminal_class(lat, &t, &mask, stuck.as_ref(), &ops);
            continue;
        }
        let mut trans = Vec::with_capacity(ops.len());
        for (op, ok) in ops.into_iter().zip(inside) {
            let nt = canonical_triple(&op.string, op.count, op.q);
            let class = if ok { StateClass::Interior } else { StateClass::Exterior };
            let full = sp.len() >= caps.max_states;
            let (j, fresh) = if full && sp.find(&nt).is_none() {
                match mode {
                    BuildMode::Exact => return Err(cap_error("state-count")),
                    BuildMode::Bounded => sp.insert(nt, StateClass::Frontier),
                }
            } else {
                sp.insert(nt, class)
            };
            if ok && sp.states[j].class == StateClass::Exterior {
                sp.states[j].class = StateClass::Interior;
                queue.push_back(j);
            } else if fresh && sp.states[j].class == StateClass::Interior {
                queue.push_back(j);
            }
            trans.push(Transition { target: j, kind: op.kind, coefficient: op.coefficient });
        }
        sp.states[i].transitions = trans;
    }
    Ok(sp)
}

/// Successors at the designated good edge, or revivals of a stuck string.
///
/// The second component is the stuck component when the string has no good edge.
fn successors(
    lat: &Lattice,
    t: &Triple,
    bad: &PlaquetteSet,
    mask: &[bool],
    cache: &AreaCache,
    caps: &Caps,
) -> Result<(Vec<OperationResult>, Option<(PlaquetteSet, bool)>)> {
    if t.s.is_null() {
        return Ok((Vec::new(), None));
    }
    if let Some(pos) = good_edge_masked(&t.s, mask) {
        return Ok((loop_operations(lat, t, pos)?, None));
    }
    let qt = stuck_component(lat, &t.s, bad).ok_or_else(|| Error::Precondition("no good edge but not stuck".into()))?;
    let n = qt.len() as u64;
    let small = cache.underbar_area(lat, &t.s, n).exceeds(n);
    let ops = if small { revivals_unchecked(lat, t, &qt, bad, caps.max_revivals)? } else { Vec::new() };
    Ok((ops, Some((qt, small))))
}

fn terminal_class(
    lat: &Lattice,
    t: &Triple,
    mask: &[bool],
    stuck: Option<&(PlaquetteSet, bool)>,
    ops: &[OperationResult],
) -> StateClass {
    let isolated = t
        .s
        .edges()
        .any(|e| !mask[e.index() as usize] && unoriented_occurrence_count(lat, &t.s, &t.k, e) == 1);
    let dead_revival = matches!(stuck, Some((_, true))) && ops.is_empty();
    if isolated || dead_revival {
        StateClass::Terminal0
    } else {
        StateClass::Terminal1
    }
}

/// Weights `(lambda, gamma, rho)` of the configuration-space norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub lambda: f64,
    pub gamma: f64,
    pub rho: f64,
}

impl NormParams {
    pub fn validate(&self, model: Model) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        let gamma_ok = match model {
            Model::Truncated => self.gamma >= 1.0,
            Model::Modified => self.gamma > 0.0 && self.gamma <= 1.0,
        };
        if unit(self.lambda) && unit(self.rho) && gamma_ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("norm parameters out of range for {model:?}: {self:?}")))
        }
    }

    /// The choice used by the fixed-point theorems: `lambda = 1/N`, `rho = 1/e`, `gamma = (10^3 d beta)^(-+1)`.
    pub fn theorem(p: &ParameterSet, model: Model) -> NormParams {
        let g = 1e3 * f64::from(p.d) * p.beta;
        NormParams {
            lambda: 1.0 / p.n as f64,
            gamma: if model == Model::Truncated { 1.0 / g } else { g },
            rho: (-1.0f64).exp(),
        }
    }
}

/// Closed-form bound on the norm of `M` restricted to functions vanishing on the boundary.
pub fn contraction_factor(p: &ParameterSet, np: &NormParams, model: Model) -> f64 {
    let d = f64::from(p.d);
    let b = p.b as f64;
    let n = p.n as f64;
    let NormParams { lambda, gamma, rho } = *np;
    let base = 2.0 * d * b * lambda + 2.0 * d * b / (lambda * n * n);
    match model {
        Model::Truncated => base + 4.0 * d * p.beta * gamma / (lambda * rho * n),
        Model::Modified => base + 4.0 * d * p.beta / (lambda * gamma * rho * n) + (-1e-3 * b).exp(),
    }
}

/// Natural-log norm weights of every in-space state (`None` for exterior and frontier states).
pub fn log_weights(space: &StateSpace, np: &NormParams) -> Result<Vec<Option<f64>>> {
    let lat = &space.lattice;
    let cache = AreaCache::new();
    let (ll, lg, lr) = (np.lambda.ln(), np.gamma.ln(), np.rho.ln());
    (0..space.len())
        .into_par_iter()
        .map(|i| {
            if !space.in_space(i) {
                return Ok(None);
            }
            let st = &space.states[i];
            let t = &st.triple;
            let iota = st.iota.as_f64() * ll;
            Ok(Some(match space.model {
                Model::Truncated => {
                    let def = space.deficit(t, &PlaquetteSet::new());
                    let root_area = state_area(space, &cache, space.root)?;
                    let a = cache
                        .area(lat, &t.s, root_area + def)
                        .finite()
                        .ok_or_else(|| Error::Precondition("area exceeds the a priori bound".into()))?;
                    iota + a as f64 * lg + def as f64 * lr
                }
                Model::Modified => {
                    let dq = lat.boundary_of_set(&t.q, &space.bad)?;
                    let supp = t.k.0
                        .iter()
                        .enumerate()
                        .filter(|(p, &k)| {
                            let p = *p as u32;
                            !space.bad.contains(&p) && !dq.contains(&p) && u64::from(k) < space.b
                        })
                        .count();
                    let def = space.deficit(t, &dq);
                    iota + supp as f64 * lg + def as f64 * lr + 1e-2 * space.b as f64 * t.q.len() as f64
                }
            }))
        })
        .collect()
}

fn state_area(space: &StateSpace, cache: &AreaCache, i: usize) -> Result<u64> {
    let s = &space.states[i].triple.s;
    let l = s.perimeter() as u64;
    match cache.area(&space.lattice, s, l * l) {
        AreaValue::Finite(a) => Ok(a),
        AreaValue::Unbounded(_) => Err(Error::Precondition("root bounds no surface".into())),
    }
}

/// `area(s)` of every state, bounded a priori by `area(root) + sum (B - K)`.
pub fn state_areas(space: &StateSpace) -> Result<Vec<Option<u64>>> {
    let cache = AreaCache::new();
    let root_area = state_area(space, &cache, space.root)?;
    (0..space.len())
        .into_par_iter()
        .map(|i| {
            let t = &space.states[i].triple;
            let cap = root_area + space.deficit(t, &PlaquetteSet::new()) + 4 * t.q.len() as u64;
            Ok(cache.area(&space.lattice, &t.s, cap).finite())
        })
        .collect()
}

/// `ln ||f||`, the weighted sup over in-space states; `-inf` for `f = 0`.
pub fn log_norm(f: &[Complex64], logw: &[Option<f64>]) -> f64 {
    f.iter()
        .zip(logw)
        .filter_map(|(x, w)| w.map(|w| w + x.norm().ln()))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn norm_eval(f: &[Complex64], logw: &[Option<f64>]) -> f64 {
    log_norm(f, logw).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Refuses unless the contraction factor is below one; returns a rigorous error bound.
    Certified,
    /// Any parameters; reports residuals and measured ratios.
    Empirical,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub values: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
    pub factor: f64,
    /// `factor^n / (1 - factor) * ||f_1 - f_0||`, certified mode only.
    pub error_bound: Option<f64>,
    /// `sup |f_n - M f_n|` over interior states.
    pub residual: f64,
    /// Weighted-norm ratios `||f_{k+1} - f_k|| / ||f_k - f_{k-1}||`.
    pub ratios: Vec<f64>,
}

impl SolveReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveSettings {
    pub params: ParameterSet,
    pub norm: NormParams,
    pub mode: SolveMode,
    pub tol: f64,
    pub max_iter: usize,
}

/// Iterates `f_{n+1} = M f_n` from the boundary injection.
pub fn neumann_solve(space: &StateSpace, boundary: &[Complex64], cfg: &SolveSettings) -> Result<SolveReport> {
    if boundary.len() != space.len() {
        return Err(Error::Missing("boundary data does not cover the state space".into()));
    }
    let factor = contraction_factor(&cfg.params, &cfg.norm, space.model);
    if cfg.mode == SolveMode::Certified && !(factor < 1.0) {
        return Err(Error::Precondition(format!("contraction factor {factor} is not below 1")));
    }
    let w = space.weights(cfg.params.n as f64, cfg.params.beta);
    let logw = log_weights(space, &cfg.norm)?;
    let mut f: Vec<Complex64> = boundary.to_vec();
    for (x, s) in f.iter_mut().zip(&space.states) {
        if !s.class.is_boundary() {
            *x = Complex64::new(0.0, 0.0);
        }
    }
    let mut ratios = Vec::new();
    let mut prev_step: Option<f64> = None;
    let mut first_step = None;
    let mut iterations = 0;
    let mut converged = space.count(StateClass::Interior) == 0;
    while !converged && iterations < cfg.max_iter {
        let g = space.sweep(&w, &f, boundary);
        let diff: Vec<Complex64> = g.iter().zip(&f).map(|(a, b)| a - b).collect();
        let step = log_norm(&diff, &logw);
        let sup = diff.iter().map(|x| x.norm()).fold(0.0, f64::max);
        iterations += 1;
        first_step.get_or_insert(step);
        if let Some(p) = prev_step {
            if p.is_finite() {
                ratios.push((step - p).exp());
            }
        }
        prev_step = Some(step);
        f = g;
        if sup <= cfg.tol {
            converged = true;
        } else if !sup.is_finite() {
            break;
        }
    }
    let g = space.sweep(&w, &f, boundary);
    let residual = g.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let error_bound = (cfg.mode == SolveMode::Certified).then(|| {
        let s = first_step.map_or(0.0, f64::exp);
        factor.powi(iterations as i32) / (1.0 - factor) * s
    });
    Ok(SolveReport { values: f, iterations, converged, factor, error_bound, residual, ratios })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualRow {
    pub state: usize,
    pub residual: f64,
    pub standard_error: f64,
}

/// `|phi - M phi|` at every interior state, with uncorrelated error propagation.
pub fn mle_residual(space: &StateSpace, phi: &[Complex64], se: &[f64], n: f64, beta: f64) -> Result<Vec<ResidualRow>> {
    if phi.len() != space.len() || se.len() != space.len() {
        return Err(Error::Missing("estimates do not cover the state space".into()));
    }
    let w = space.weights(n, beta);
    Ok((0..space.len())
        .filter(|&i| !space.states[i].class.is_boundary())
        .map(|i| {
            let rhs: Complex64 = w[i].iter().map(|&(t, c)| c * phi[t]).sum();
            let var = se[i].powi(2) + w[i].iter().map(|&(t, c)| (c * se[t]).powi(2)).sum::<f64>();
            ResidualRow { state: i, residual: (phi[i] - rhs).norm(), standard_error: var.sqrt() }
        })
        .collect())
}

/// Monte Carlo estimate of `LHS - RHS` of the loop equation with `rho_p = exp` at `pos`.
///
/// Both sides are sampled from the same configurations so the error bar accounts for their correlation.
pub fn mc_mle_residual(
    lat: &Lattice,
    s: &LatticeString,
    pos: EdgePos,
    n: usize,
    beta: f64,
    run: McRun,
) -> Result<McEstimate> {
    let t = Triple { s: s.clone(), k: PosCount::constant(lat.n_plaquettes(), 1), q: PlaquetteSet::new() };
    let mut obs: Observable = vec![(1.0, s.clone())];
    for op in loop_operations(lat, &t, pos)? {
        obs.push((-op.coefficient.eval(n as f64, beta), op.string));
    }
    Ok(mc_batches(lat, n, beta, &ActionWeight::Full, &[obs], run)?.estimate(0))
}

/// Boundary values of the truncated model violating `e^{-(B-K)} |phi(∅, K)| <= phi(∅, B)`.
pub fn partition_bound_violations(space: &StateSpace, boundary: &[Complex64], phi_null_b: f64) -> Vec<usize> {
    (0..space.len())
        .filter(|&i| space.states[i].class == StateClass::Null)
        .filter(|&i| {
            let def = space.deficit(&space.states[i].triple, &PlaquetteSet::new()) as f64;
            (-def).exp() * boundary[i].norm() > phi_null_b * (1.0 + 1e-12)
        })
        .collect()
}

/// Terminal values violating `exp(B|Q|/100) |phi| <= exp(B|Q|/50) e^{sum_{p ∉ P ∪ ∂Q}(B-K)} Z_{Λ,P}`.
pub fn terminal_bound_violations(space: &StateSpace, values: &[Complex64], z: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, st) in space.states.iter().enumerate() {
        if st.class != StateClass::Terminal1 {
            continue;
        }
        let t = &st.triple;
        let dq = space.lattice.boundary_of_set(&t.q, &space.bad)?;
        let b = space.b as f64;
        let q = t.q.len() as f64;
        let lhs = 1e-2 * b * q + values[i].norm().ln();
        let rhs = b * q / 50.0 + space.deficit(t, &dq) as f64 + z.ln();
        if lhs > rhs + 1e-12 {
            out.push(i);
        }
    }
    Ok(out)
}

/// Side lengths of a rectangular loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub r: u64,
    pub s: u64,
}

impl Rect {
    pub fn perimeter(&self) -> u64 {
        2 * (self.r + self.s)
    }
    pub fn area(&self) -> u64 {
        self.r * self.s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub log10: f64,
    /// False when the parameters are outside the theorem's regime.
    pub rigorous: bool,
}

fn certificate(ln: f64, rigorous: bool) -> Certificate {
    Certificate { value: ln.exp(), log10: ln / std::f64::consts::LN_10, rigorous }
}

fn regime_gate(p: &ParameterSet, rect: Rect, demo: bool) -> Result<bool> {
    if rect.r == 0 || rect.s == 0 {
        return Err(Error::InvalidInput("not a rectangle".into()));
    }
    let ok = validate_parameters(p).regime;
    if !ok && !demo {
        return Err(Error::Precondition("parameters outside the regime".into()));
    }
    Ok(ok)
}

/// `2 N^{|l|/4 - 1} (10^3 d beta)^{area}`.
pub fn certify_truncated_bound(rect: Rect, p: &ParameterSet, demo: bool) -> Result<Certificate> {
    let rigorous = regime_gate(p, rect, demo)?;
    let ln = 2f64.ln()
        + (rect.perimeter() as f64 / 4.0 - 1.0) * (p.n as f64).ln()
        + rect.area() as f64 * (1e3 * f64::from(p.d) * p.beta).ln();
    Ok(certificate(ln, rigorous))
}

/// `ln alpha` with `alpha = 2 * 10^{3d} max(10^3 d beta, exp(-10^{-7} d^{-2} N))`.
pub fn ln_area_law_alpha(p: &ParameterSet) -> f64 {
    let d = f64::from(p.d);
    2f64.ln() + 3.0 * d * 10f64.ln() + (1e3 * d * p.beta).ln().max(-1e-7 * p.n as f64 / (d * d))
}

/// `2 |l| N^{|l|/4 - 1} alpha^{area}`.
pub fn certify_area_law_bound(rect: Rect, p: &ParameterSet, demo: bool) -> Result<Certificate> {
    let rigorous = regime_gate(p, rect, demo)?;
    let ln = (2.0 * rect.perimeter() as f64).ln()
        + (rect.perimeter() as f64 / 4.0 - 1.0) * (p.n as f64).ln()
        + rect.area() as f64 * ln_area_law_alpha(p);
    Ok(certificate(ln, rigorous))
}

/// `C1 e^{2d|l|} 50^{d area} 2^{area} max(e^{-C2}, e^{-B/(1000 d)})^{area}`, as `(value, log10)`.
pub fn reduction_rhs(c1: f64, c2: f64, perimeter: u64, area: u64, p: &ParameterSet) -> (f64, f64) {
    let d = f64::from(p.d);
    let a = area as f64;
    let ln = c1.ln()
        + 2.0 * d * perimeter as f64
        + d * a * 50f64.ln()
        + a * 2f64.ln()
        + a * (-c2).max(-(p.b as f64) / (1e3 * d));
    (ln.exp(), ln / std::f64::consts::LN_10)
}

/// Largest relative gap of `prod exp(x_p) = sum_P prod_{p∉P} exp_B(x_p) prod_{p∈P} tau_B(x_p)`
/// over `samples` random draws of `x_p ∈ [-2N beta, 2N beta]`.
pub fn binomial_split_gap(n_plaquettes: usize, p: &ParameterSet, samples: usize, seed: u64) -> Result<f64> {
    if n_plaquettes > 12 {
        return Err(Error::InvalidInput("at most 12 plaquettes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = 2.0 * p.n as f64 * p.beta;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = (0..n_plaquettes).map(|_| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 }).collect();
        let lhs: f64 = x.iter().map(|v| v.exp()).product();
        let rhs: f64 = (0u32..1 << n_plaquettes)
            .map(|m| {
                x.iter()
                    .enumerate()
                    .map(|(i, &v)| if m >> i & 1 == 1 { tail(p.b, v) } else { exp_trunc(p.b, v) })
                    .product::<f64>()
            })
            .sum();
        worst = worst.max((lhs - rhs).abs() / lhs.abs());
    }
    Ok(worst)
}

/// States whose split, merge or deformation counts exceed `2dB`, `2dB` or `4d` respectively.
pub fn operation_count_violations(space: &StateSpace) -> Vec<usize> {
    let d = space.lattice.dim() as u64;
    let b = space.b;
    (0..space.len())
        .filter(|&i| {
            let tr = &space.states[i].transitions;
            let c = |f: fn(OpKind) -> bool| tr.iter().filter(|t| f(t.kind)).count() as u64;
            let split = c(|k| matches!(k, OpKind::SplitPos | OpKind::SplitNeg));
            let merge = c(|k| matches!(k, OpKind::MergePos | OpKind::MergeNeg));
            let deform = c(|k| matches!(k, OpKind::DeformPos | OpKind::DeformNeg));
            split > 2 * d * b || merge > 2 * d * b || deform > 4 * d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_u1_phi, exact_u1_phi_modified};

    fn plaquette(lat: &Lattice) -> Loop {
        lat.rectangular_loop(&[0, 0], (0, 1), 1, 1).unwrap()
    }

    fn exact_boundary(space: &StateSpace, beta: f64) -> Vec<Complex64> {
        let lat = &space.lattice;
        space
            .boundary_from(|t| Ok(Complex64::new(exact_u1_phi(lat, &t.s, &t.k, beta)?, 0.0)))
            .unwrap()
    }

    #[test]
    fn truncated_space_small() {
        let lat = Lattice::new(1, 2).unwrap();
        let sp = build_truncated(&lat, &plaquette(&lat), 1, &Caps::default(), BuildMode::Exact).unwrap();
        assert!(sp.len() > 1);
        assert!(operation_count_violations(&sp).is_empty());
        for st in &sp.states {
            assert!(max_occurrence(&lat, &st.triple.s, &st.triple.k) <= 4);
        }
        assert!(sp.count(StateClass::Null) > 0);
    }

    #[test]
    fn exact_phi_is_fixed_point() {
        let lat = Lattice::new(1, 2).unwrap();
        let beta = 0.1;
        let sp = build_truncated(&lat, &plaquette(&lat), 1, &Caps::default(), BuildMode::Exact).unwrap();
        let phi = sp.tabulate(|t| Ok(Complex64::new(exact_u1_phi(&lat, &t.s, &t.k, beta)?, 0.0))).unwrap();
        let rows = mle_residual(&sp, &phi, &vec![0.0; sp.len()], 1.0, beta).unwrap();
        let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        assert!(worst < 1e-12, "worst residual {worst}");
    }

    #[test]
    fn one_step_expansion() {
        let lat = Lattice::new(1, 2).unwrap();
        let beta = 0.1;
        let sp = build_truncated(&lat, &plaquette(&lat), 1, &Caps::default(), BuildMode::Exact).unwrap();
        let g = exact_boundary(&sp, beta);
        let w = sp.weights(1.0, beta);
        let zero = vec![Complex64::new(0.0, 0.0); sp.len()];
        let f: Vec<Complex64> = (0..sp.len()).map(|i| if sp.states[i].class.is_boundary() { g[i] } else { zero[i] }).collect();
        let v = sp.apply_m(&w, &f, &g, sp.root);
        let expect: Complex64 = sp.states[sp.root]
            .transitions
            .iter()
            .filter(|t| t.kind == OpKind::DeformNeg && sp.states[t.target].class == StateClass::Null)
            .map(|t| beta * g[t.target])
            .sum();
        assert!((v - expect).norm() < 1e-15 && expect.norm() > 0.0);
    }

    #[test]
    fn norm_of_root_indicator() {
        let lat = Lattice::new(1, 2).unwrap();
        let sp = build_truncated(&lat, &plaquette(&lat), 1, &Caps::default(), BuildMode::Exact).unwrap();
        let np = NormParams { lambda: 0.5, gamma: 3.0, rho: 0.4 };
        let lw = log_weights(&sp, &np).unwrap();
        let mut f = vec![Complex64::new(0.0, 0.0); sp.len()];
        assert_eq!(norm_eval(&f, &lw), 0.0);
        f[sp.root] = Complex64::new(1.0, 0.0);
        assert!((norm_eval(&f, &lw) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn contraction_factor_examples() {
        let p = ParameterSet { d: 2, n: 100_000_000_000_000, beta: 1e-21, b: 25_000_000_001 };
        let f3 = contraction_factor(&p, &NormParams::theorem(&p, Model::Truncated), Model::Truncated);
        assert!((f3 - (2e-3 + 4.0 * std::f64::consts::E / 1e3)).abs() < 1e-6, "{f3}");
        let f4 = contraction_factor(&p, &NormParams::theorem(&p, Model::Modified), Model::Modified);
        assert!(f4 <= 0.5, "{f4}");
        let p0 = ParameterSet { beta: 0.0, ..p };
        let np = NormParams { lambda: 0.3, gamma: 2.0, rho: 0.5 };
        let expect = 4.0 * p.b as f64 * 0.3 + 4.0 * p.b as f64 / (0.3 * 1e28);
        assert!((contraction_factor(&p0, &np, Model::Truncated) - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn certifier_values() {
        let p = ParameterSet { d: 2, n: 100_000_000_000_000, beta: 1e-21, b: 25_000_000_001 };
        let rect = Rect { r: 2, s: 2 };
        let t = certify_truncated_bound(rect, &p, false).unwrap();
        assert!(t.rigorous && (t.value / 3.2e-57 - 1.0).abs() < 1e-9);
        let a = certify_area_law_bound(rect, &p, false).unwrap();
        assert!((a.value / 4.096e-31 - 1.0).abs() < 1e-9);
        let wide = certify_truncated_bound(Rect { r: 2, s: 4 }, &p, false).unwrap();
        let n_factor = p.n as f64;
        assert!((wide.value / (t.value * n_factor * 2e-18f64.powi(4)) - 1.0).abs() < 1e-9);
        let off = ParameterSet { n: 10, ..p };
        assert!(certify_truncated_bound(rect, &off, false).is_err());
        assert!(!certify_truncated_bound(rect, &off, true).unwrap().rigorous);
    }

    #[test]
    fn reduction_rhs_limits() {
        let p = ParameterSet { d: 2, n: 1000, beta: 0.1, b: 100_000 };
        let (_, l) = reduction_rhs(1.0, 20.0, 8, 4, &p);
        let expect = (32.0 + 8.0 * 50f64.ln() + 4.0 * 2f64.ln() - 80.0) / std::f64::consts::LN_10;
        assert!((l - expect).abs() < 1e-12);
        let (v0, _) = reduction_rhs(2.0, 20.0, 4, 0, &p);
        assert!((v0 / (2.0 * 16f64.exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_split_identity() {
        let p = ParameterSet { d: 2, n: 2, beta: 0.3, b: 3 };
        assert!(binomial_split_gap(1, &p, 50, 1).unwrap() < 1e-12);
        assert!(binomial_split_gap(8, &p, 20, 2).unwrap() < 1e-10);
        let z = ParameterSet { beta: 0.0, ..p };
        assert!(binomial_split_gap(4, &z, 3, 3).unwrap() < 1e-15);
    }

    #[test]
    fn modified_without_bad_set_matches_truncated() {
        let lat = Lattice::new(1, 2).unwrap();
        let l = plaquette(&lat);
        let tr = build_truncated(&lat, &l, 1, &Caps::default(), BuildMode::Exact).unwrap();
        let md = build_modified(&lat, &l, 1, &PlaquetteSet::new(), &Caps::default(), BuildMode::Exact).unwrap();
        for (i, st) in md.states.iter().enumerate() {
            if st.class != StateClass::Interior {
                continue;
            }
            let j = tr.find(&st.triple).expect("interior state present in truncated space");
            let a: Vec<_> = md.states[i].transitions.iter().map(|t| (&md.states[t.target].triple, t.kind)).collect();
            let b: Vec<_> = tr.states[j].transitions.iter().map(|t| (&tr.states[t.target].triple, t.kind)).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn modified_model_equation_at_n1() {
        let lat = Lattice::new(1, 2).unwrap();
        let l = lat.rectangular_loop(&[-1, 0], (0, 1), 2, 1).unwrap();
        let bad: PlaquetteSet = [lat.plaquette_from(&crate::lattice::OrientedPlaquette {
            corner: vec![0, -1],
            axes: (0, 1),
            sign: 1,
        })
        .unwrap()
        .index()]
        .into_iter()
        .collect();
        let (b, beta) = (1, 0.4);
        let sp = build_modified(&lat, &l, b, &bad, &Caps::default(), BuildMode::Exact).unwrap();
        let phi = sp
            .tabulate(|t| Ok(Complex64::new(exact_u1_phi_modified(&lat, &t.s, &t.k, &bad, b, beta)?, 0.0)))
            .unwrap();
        for (i, st) in sp.states.iter().enumerate() {
            if st.class == StateClass::Terminal0 {
                assert!(phi[i].norm() < 1e-15, "terminal0 state {i} has value {}", phi[i]);
            }
        }
        let rows = mle_residual(&sp, &phi, &vec![0.0; sp.len()], 1.0, beta).unwrap();
        let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        assert!(worst < 1e-12, "worst {worst}");
        assert!(sp.count(StateClass::Interior) > 0);
    }

    #[test]
    fn neumann_converges_at_large_n() {
        let lat = Lattice::new(1, 2).unwrap();
        let sp = build_truncated(&lat, &plaquette(&lat), 1, &Caps::default(), BuildMode::Exact).unwrap();
        let params = ParameterSet { d: 2, n: 1000, beta: 1e-4, b: 1 };
        let norm = NormParams { lambda: 0.05, gamma: 1.0, rho: 1.0 };
        let bd: Vec<Complex64> = (0..sp.len()).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.0)).collect();
        let cfg = SolveSettings { params, norm, mode: SolveMode::Certified, tol: 1e-14, max_iter: 500 };
        let rep = neumann_solve(&sp, &bd, &cfg).unwrap();
        assert!(rep.factor < 1.0 && rep.converged);
        assert!(rep.max_ratio() <= rep.factor + 1e-9, "{} > {}", rep.max_ratio(), rep.factor);
        assert!(rep.residual < 1e-13);
        assert!(rep.error_bound.unwrap() >= 0.0);
    }
}
