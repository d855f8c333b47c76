//! Independent evaluators of string integrals.
//!
//! For `N = 1` every integral reduces to a sum over net plaquette windings,
//! computed exactly. For general `N` the integrals are estimated by plain
//! product-Haar sampling, split into a fixed number of independent batches.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::flux::FluxSystem;
use crate::lattice::{Edge, Lattice, PlaquetteSet};
use crate::string::{is_balanced, LatticeString, Loop, OriCount, PosCount};
use crate::texp;

pub type Matrix = DMatrix<Complex64>;

/// Number of independent batches behind every standard error.
pub const BATCHES: usize = 100;

/// Default cap on enumeration leaves of the exact evaluator.
pub const LEAF_CAP: f64 = 1e7;

const NEGLIGIBLE: f64 = 1e-40;

/// Modified Bessel function `I_nu(x)` by its power series.
pub fn bessel_i(nu: u32, x: f64) -> f64 {
    let h = x / 2.0;
    let mut term = (0..nu).fold(1.0, |t, k| t * h / f64::from(k + 1));
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= h * h / (f64::from(k) * f64::from(k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return sum;
        }
    }
}

/// Haar integral of `W_s` against the plaquette monomials `J`, at `N = 1`.
pub fn exact_u1_monomial(lat: &Lattice, s: &LatticeString, j: &OriCount) -> u8 {
    u8::from(is_balanced(lat, s, j))
}

/// Single-plaquette weight `rho` in `rho(2 beta Re Tr U_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaquetteWeight {
    /// `exp_K`
    Truncated(u32),
    /// `tau_B`
    Tail(u64),
    /// `exp`
    Full,
}

/// Fourier coefficients `c_n` of `rho(beta (z + 1/z))`, `n = -m..=m`, as `(m, c)`.
pub fn u1_coefficients(w: PlaquetteWeight, beta: f64) -> (i64, Vec<f64>) {
    let half: Vec<f64> = match w {
        PlaquetteWeight::Truncated(k) => (0..=k)
            .map(|n| {
                // pairs (j1, j2) = (j2 + n, j2) with j1 + j2 <= k
                let mut s = 0.0;
                let mut j2 = 0;
                while 2 * j2 + n <= k {
                    s += beta.powi((2 * j2 + n) as i32) / (factorial(j2 + n) * factorial(j2));
                    j2 += 1;
                }
                s
            })
            .collect(),
        PlaquetteWeight::Full => tabulate(|n| bessel_i(n, 2.0 * beta), 0),
        PlaquetteWeight::Tail(b) => tabulate(|n| tail_coefficient(n, b, beta), b),
    };
    let m = half.len() as i64 - 1;
    let mut c: Vec<f64> = half.iter().rev().copied().collect();
    c.extend_from_slice(&half[1..]);
    (m, c)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `f(0), f(1), ...` until past `min_len` and negligible against the largest value.
fn tabulate(f: impl Fn(u32) -> f64, min_len: u64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut peak = 0.0f64;
    for n in 0u32.. {
        let v = f(n);
        peak = peak.max(v.abs());
        if u64::from(n) > min_len && v.abs() <= NEGLIGIBLE * peak {
            break;
        }
        out.push(v);
    }
    out
}

/// `sum_{j1 - j2 = n, j1 + j2 > b} beta^(j1+j2) / (j1! j2!)`.
fn tail_coefficient(n: u32, b: u64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let mut m = u64::from(n);
    if m <= b {
        m = b + 1 + ((b + 1 + u64::from(n)) % 2);
    }
    let lb = beta.ln();
    let mut sum = 0.0;
    loop {
        let j2 = (m - u64::from(n)) / 2;
        let j1 = j2 + u64::from(n);
        let t = (m as f64 * lb - ln_gamma(j1 as f64 + 1.0) - ln_gamma(j2 as f64 + 1.0)).exp();
        sum += t;
        if t <= 1e-18 * sum && m as f64 > 2.0 * beta {
            return sum;
        }
        m += 2;
    }
}

/// `int dU W_s(U) prod_p rho_p(2 beta Re U_p)` at `N = 1`, over every plaquette of the lattice.
pub fn exact_u1_integral(
    lat: &Lattice,
    s: &LatticeString,
    beta: f64,
    weight: impl Fn(u32) -> PlaquetteWeight,
    leaf_cap: f64,
) -> Result<f64> {
    let vars: Vec<u32> = (0..lat.n_plaquettes() as u32).collect();
    let mut bound = Vec::with_capacity(vars.len());
    let mut coeff = Vec::with_capacity(vars.len());
    for &p in &vars {
        let (m, c) = u1_coefficients(weight(p), beta);
        bound.push(m);
        coeff.push(c);
    }
    let flux: Vec<i64> = s.flux(lat.n_edges()).into_iter().map(i64::from).collect();
    let sys = FluxSystem::new(lat, &vars, &flux);
    let leaves = sys.leaf_bound(&bound);
    if leaves > leaf_cap {
        return Err(Error::Capacity(format!("{leaves:.3e} enumeration leaves exceed {leaf_cap:.3e}")));
    }
    Ok(sys.weighted_sum(&bound, &coeff))
}

/// `phi(s, K) = int W_s prod_p exp_{K(p)}(2 beta Re Tr U_p)` at `N = 1`.
pub fn exact_u1_phi(lat: &Lattice, s: &LatticeString, k: &PosCount, beta: f64) -> Result<f64> {
    exact_u1_integral(lat, s, beta, |p| PlaquetteWeight::Truncated(k.get(p)), LEAF_CAP)
}

/// `phi(s, K)` with `tau_B` on the bad plaquettes, at `N = 1`.
pub fn exact_u1_phi_modified(
    lat: &Lattice,
    s: &LatticeString,
    k: &PosCount,
    bad: &PlaquetteSet,
    b: u64,
    beta: f64,
) -> Result<f64> {
    exact_u1_integral(
        lat,
        s,
        beta,
        |p| if bad.contains(&p) { PlaquetteWeight::Tail(b) } else { PlaquetteWeight::Truncated(k.get(p)) },
        LEAF_CAP,
    )
}

/// `Z_{Lambda,P}`: `exp_B` off the bad set and `tau_B` on it, at `N = 1`.
pub fn exact_u1_partition(lat: &Lattice, bad: &PlaquetteSet, b: u64, beta: f64) -> Result<f64> {
    let k = PosCount::constant(lat.n_plaquettes(), b.min(u64::from(u32::MAX)) as u32);
    exact_u1_phi_modified(lat, &LatticeString::null(0), &k, bad, b, beta)
}

/// `<W_s>` under the full Wilson action at `N = 1`.
pub fn exact_u1_wilson(lat: &Lattice, s: &LatticeString, beta: f64) -> Result<f64> {
    let num = exact_u1_integral(lat, s, beta, |_| PlaquetteWeight::Full, LEAF_CAP)?;
    let den = exact_u1_integral(lat, &LatticeString::null(0), beta, |_| PlaquetteWeight::Full, LEAF_CAP)?;
    Ok(num / den)
}

/// Haar-distributed `U(N)` matrix: QR of a complex Ginibre matrix with the phases of `diag R` removed.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let z = Matrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let (mut q, r) = z.qr().unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// `max |(U^dagger U - I)_{ij}|`.
pub fn unitarity_defect(u: &Matrix) -> f64 {
    let p = u.adjoint() * u;
    let n = u.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let t = if i == j { p[(i, j)] - 1.0 } else { p[(i, j)] };
            m = m.max(t.norm());
        }
    }
    m
}

/// A `U(N)` matrix on every positive edge.
#[derive(Clone, Debug)]
pub struct GaugeConfig {
    n: usize,
    links: Vec<Matrix>,
    inverse: Vec<Matrix>,
}

impl GaugeConfig {
    pub fn random<R: Rng + ?Sized>(lat: &Lattice, n: usize, rng: &mut R) -> Self {
        let links: Vec<Matrix> = (0..lat.n_edges()).map(|_| sample_haar_unitary(n, rng)).collect();
        Self::from_links(n, links)
    }

    pub fn from_links(n: usize, links: Vec<Matrix>) -> Self {
        let inverse = links.iter().map(Matrix::adjoint).collect();
        GaugeConfig { n, links, inverse }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn links(&self) -> &[Matrix] {
        &self.links
    }

    /// `U_e`, with `U_{e^{-1}} = U_e^{-1}`.
    pub fn link(&self, e: Edge) -> &Matrix {
        let i = e.index() as usize;
        if e.is_positive() {
            &self.links[i]
        } else {
            &self.inverse[i]
        }
    }

    /// Ordered product of the link matrices along a path.
    pub fn holonomy(&self, edges: &[Edge]) -> Matrix {
        let mut it = edges.iter();
        let Some(&first) = it.next() else {
            return Matrix::identity(self.n, self.n);
        };
        let mut m = self.link(first).clone();
        for &e in it {
            m = &m * self.link(e);
        }
        m
    }

    /// `U_e -> g_{tail} U_e g_{head}^{-1}` with `g` the identity off `site`.
    pub fn gauge_transform(&self, lat: &Lattice, site: u32, g: &Matrix) -> GaugeConfig {
        let links = self
            .links
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let e = Edge::new(i as u32, true);
                let mut v = u.clone();
                if lat.tail(e) == site {
                    v = g * v;
                }
                if lat.head(e) == site {
                    v *= g.adjoint();
                }
                v
            })
            .collect();
        GaugeConfig::from_links(self.n, links)
    }
}

/// Normalised trace `tr U = Tr U / N`.
fn tr(m: &Matrix) -> Complex64 {
    m.trace() / m.nrows() as f64
}

pub fn wilson_loop_value(cfg: &GaugeConfig, l: &Loop) -> Complex64 {
    tr(&cfg.holonomy(l.edges()))
}

/// `prod_i tr(U_{l_i})`, and 1 on null strings.
pub fn wilson_string_value(cfg: &GaugeConfig, s: &LatticeString) -> Complex64 {
    s.loops().iter().map(|l| wilson_loop_value(cfg, l)).product()
}

/// `Re Tr U_p` for a positive plaquette.
pub fn plaquette_re_trace(lat: &Lattice, cfg: &GaugeConfig, p: u32) -> f64 {
    cfg.holonomy(lat.plaquette_edges(p)).trace().re
}

/// The plaquette factors multiplying `W_s` inside the integral.
#[derive(Clone, Debug)]
pub enum ActionWeight {
    /// `exp` on every plaquette.
    Full,
    /// `exp_{K(p)}` on every plaquette.
    Truncated(PosCount),
    /// `exp_{K(p)}` off the bad set, `tau_B` on it.
    Modified { k: PosCount, bad: PlaquetteSet, b: u64 },
}

impl ActionWeight {
    fn factor(&self, p: u32, x: f64) -> f64 {
        match self {
            ActionWeight::Full => x.exp(),
            ActionWeight::Truncated(k) => texp::exp_trunc(u64::from(k.get(p)), x),
            ActionWeight::Modified { k, bad, b } => {
                if bad.contains(&p) {
                    texp::tail(*b, x)
                } else {
                    texp::exp_trunc(u64::from(k.get(p)), x)
                }
            }
        }
    }

    pub fn evaluate(&self, lat: &Lattice, cfg: &GaugeConfig, beta: f64) -> f64 {
        (0..lat.n_plaquettes() as u32)
            .map(|p| self.factor(p, 2.0 * beta * plaquette_re_trace(lat, cfg, p)))
            .product()
    }
}

/// A real linear combination of strings.
pub type Observable = Vec<(f64, LatticeString)>;

/// Sampling schedule: total samples (rounded down to a multiple of the batch count) and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McRun {
    pub samples: u64,
    pub seed: u64,
}

impl McRun {
    pub fn per_batch(&self) -> Result<u64> {
        let b = self.samples / BATCHES as u64;
        if b == 0 {
            return Err(Error::InvalidInput(format!("need at least {BATCHES} samples")));
        }
        Ok(b)
    }

    /// Generator for batch `i`: the seeded ChaCha8 stream number `i`.
    pub fn rng(&self, batch: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(batch as u64);
        r
    }
}

/// Per-batch means of several observables, in batch order.
#[derive(Clone, Debug)]
pub struct BatchMeans {
    pub samples: u64,
    pub batches: Vec<Vec<Complex64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    pub standard_error: f64,
    pub samples: u64,
}

impl McEstimate {
    /// `|mean - x| <= k * SE`.
    pub fn consistent_with(&self, x: Complex64, k: f64) -> bool {
        (self.mean - x).norm() <= k * self.standard_error
    }
}

impl BatchMeans {
    /// Plain mean and standard error of observable `i`.
    pub fn estimate(&self, i: usize) -> McEstimate {
        let xs: Vec<Complex64> = self.batches.iter().map(|b| b[i]).collect();
        let m = xs.len() as f64;
        let mean = xs.iter().sum::<Complex64>() / m;
        let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (m - 1.0);
        McEstimate { mean, standard_error: (var / m).sqrt(), samples: self.samples }
    }

    /// Jackknife estimate of a smooth function of the observable means.
    pub fn jackknife(&self, f: impl Fn(&[Complex64]) -> Complex64) -> McEstimate {
        let m = self.batches.len();
        let k = self.batches[0].len();
        let mut total = vec![Complex64::new(0.0, 0.0); k];
        for b in &self.batches {
            for (t, x) in total.iter_mut().zip(b) {
                *t += x;
            }
        }
        let full: Vec<Complex64> = total.iter().map(|t| t / m as f64).collect();
        let leave: Vec<Complex64> = self
            .batches
            .iter()
            .map(|b| {
                let v: Vec<Complex64> = total.iter().zip(b).map(|(t, x)| (t - x) / (m - 1) as f64).collect();
                f(&v)
            })
            .collect();
        let bar = leave.iter().sum::<Complex64>() / m as f64;
        let var = leave.iter().map(|x| (x - bar).norm_sqr()).sum::<f64>() * (m - 1) as f64 / m as f64;
        McEstimate { mean: f(&full), standard_error: var.sqrt(), samples: self.samples }
    }
}

/// Batch means of `sum_c c W_s(U) * weight(U)` for each observable, under product Haar measure.
pub fn mc_batches(
    lat: &Lattice,
    n: usize,
    beta: f64,
    weight: &ActionWeight,
    observables: &[Observable],
    run: McRun,
) -> Result<BatchMeans> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let per = run.per_batch()?;
    let batches = (0..BATCHES)
        .into_par_iter()
        .map(|bi| {
            let mut rng = run.rng(bi);
            let mut acc = vec![Complex64::new(0.0, 0.0); observables.len()];
            for _ in 0..per {
                let cfg = GaugeConfig::random(lat, n, &mut rng);
                let w = weight.evaluate(lat, &cfg, beta);
                for (a, obs) in acc.iter_mut().zip(observables) {
                    let v: Complex64 = obs.iter().map(|(c, s)| *c * wilson_string_value(&cfg, s)).sum();
                    *a += v * w;
                }
            }
            acc.into_iter().map(|a| a / per as f64).collect()
        })
        .collect();
    Ok(BatchMeans { samples: per * BATCHES as u64, batches })
}

/// Estimate of `int W_s prod_p rho_p(2 beta Re Tr U_p)`.
pub fn mc_phi(
    lat: &Lattice,
    s: &LatticeString,
    weight: &ActionWeight,
    n: usize,
    beta: f64,
    run: McRun,
) -> Result<McEstimate> {
    Ok(mc_batches(lat, n, beta, weight, &[vec![(1.0, s.clone())]], run)?.estimate(0))
}

/// Ratio estimate of `<W_l>` under the full Wilson action.
pub fn mc_wilson_expectation(lat: &Lattice, s: &LatticeString, n: usize, beta: f64, run: McRun) -> Result<McEstimate> {
    let obs = [vec![(1.0, s.clone())], vec![(1.0, LatticeString::null(0))]];
    Ok(mc_batches(lat, n, beta, &ActionWeight::Full, &obs, run)?.jackknife(|m| m[0] / m[1]))
}

/// Estimate of `int W_s prod_p U_p^{J(p)}` (normalised traces), whose exact value vanishes off balance.
pub fn mc_monomial(lat: &Lattice, s: &LatticeString, j: &OriCount, n: usize, run: McRun) -> Result<McEstimate> {
    let mut loops: Vec<Vec<Edge>> = s.loops().iter().map(|l| l.edges().to_vec()).collect();
    for p in 0..lat.n_plaquettes() as u32 {
        for pos in [true, false] {
            let pl = crate::lattice::Plaq::new(p, pos);
            for _ in 0..j.get(pl) {
                loops.push(lat.plaquette_boundary(pl).to_vec());
            }
        }
    }
    let t = LatticeString::from_raw(loops, s.base());
    mc_phi(lat, &t, &ActionWeight::Full, n, 0.0, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Plaq;

    fn plaquette_string(lat: &Lattice, p: Plaq) -> LatticeString {
        LatticeString::single(Loop::from_edges(lat.plaquette_boundary(p).to_vec()))
    }

    #[test]
    fn bessel_values() {
        assert!((bessel_i(0, 0.2) - 1.010_025_027_795_145_8).abs() < 1e-15);
        assert!((bessel_i(1, 0.2) - 0.100_500_834_028_125_12).abs() < 1e-15);
        assert!((bessel_i(1, 0.2) / bessel_i(0, 0.2) - 0.099_503_310_573_912_6).abs() < 1e-15);
    }

    #[test]
    fn coefficient_tables() {
        let (m, c) = u1_coefficients(PlaquetteWeight::Truncated(1), 0.1);
        assert_eq!(m, 1);
        assert_eq!(c, vec![0.1, 1.0, 0.1]);
        let (_, full) = u1_coefficients(PlaquetteWeight::Full, 0.3);
        let (mb, tr) = u1_coefficients(PlaquetteWeight::Truncated(4), 0.3);
        let (mt, tl) = u1_coefficients(PlaquetteWeight::Tail(4), 0.3);
        for n in -3i64..=3 {
            let f = full[(n + (full.len() as i64 - 1) / 2) as usize];
            let a = tr[(n + mb) as usize] + tl[(n + mt) as usize];
            assert!((f - a).abs() < 1e-15 * f, "n={n}");
        }
    }

    #[test]
    fn exact_phi_examples() {
        let lat = Lattice::new(1, 2).unwrap();
        let np = lat.n_plaquettes();
        let null = LatticeString::null(0);
        assert_eq!(exact_u1_phi(&lat, &null, &PosCount::zeros(np), 0.1).unwrap(), 1.0);
        let p = Plaq::new(2, true);
        let mut k = PosCount::zeros(np);
        k.0[2] = 1;
        let v = exact_u1_phi(&lat, &plaquette_string(&lat, p), &k, 0.1).unwrap();
        assert!((v - 0.1).abs() < 1e-16);
        assert_eq!(exact_u1_phi(&lat, &plaquette_string(&lat, p), &PosCount::zeros(np), 0.1).unwrap(), 0.0);
    }

    #[test]
    fn exact_wilson_area_law() {
        let lat = Lattice::new(1, 2).unwrap();
        let r = bessel_i(1, 0.2) / bessel_i(0, 0.2);
        let l1 = LatticeString::single(lat.rectangular_loop(&[-1, -1], (0, 1), 1, 1).unwrap());
        let l2 = LatticeString::single(lat.rectangular_loop(&[-1, -1], (0, 1), 2, 1).unwrap());
        assert!((exact_u1_wilson(&lat, &l1, 0.1).unwrap() - r).abs() < 1e-14);
        assert!((exact_u1_wilson(&lat, &l2, 0.1).unwrap() - r * r).abs() < 1e-14);
    }

    #[test]
    fn exact_three_dimensional_sum() {
        let lat = Lattice::new(1, 3).unwrap();
        let k = PosCount::constant(lat.n_plaquettes(), 1);
        let z = exact_u1_phi(&lat, &LatticeString::null(0), &k, 0.1).unwrap();
        assert!(z > 1.0);
        let p = plaquette_string(&lat, Plaq::new(0, true));
        let v = exact_u1_phi(&lat, &p, &k, 0.1).unwrap();
        assert!(v > 0.1 && v < 0.1 * z * 1.001);
    }

    #[test]
    fn haar_unitary_and_gauge_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for _ in 0..50 {
                assert!(unitarity_defect(&sample_haar_unitary(n, &mut rng)) < 1e-12);
            }
        }
        let lat = Lattice::new(1, 2).unwrap();
        let cfg = GaugeConfig::random(&lat, 3, &mut rng);
        let g = sample_haar_unitary(3, &mut rng);
        let site = lat.site_index(&[0, 0]).unwrap();
        let cfg2 = cfg.gauge_transform(&lat, site, &g);
        let s = plaquette_string(&lat, Plaq::new(1, true));
        assert!((wilson_string_value(&cfg, &s) - wilson_string_value(&cfg2, &s)).norm() < 1e-12);
        for p in 0..lat.n_plaquettes() as u32 {
            assert!((plaquette_re_trace(&lat, &cfg, p) - plaquette_re_trace(&lat, &cfg2, p)).abs() < 1e-12);
        }
        assert_eq!(wilson_string_value(&cfg, &LatticeString::null(0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn haar_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3] {
            let m = 20_000;
            let xs: Vec<f64> = (0..m).map(|_| sample_haar_unitary(n, &mut rng).trace().norm_sqr()).collect();
            let mean = xs.iter().sum::<f64>() / m as f64;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
            assert!((mean - 1.0).abs() < 4.0 * sd / (m as f64).sqrt(), "N={n} mean={mean}");
        }
    }

    #[test]
    fn mc_matches_exact_at_n1() {
        let lat = Lattice::new(1, 2).unwrap();
        let k = PosCount::constant(lat.n_plaquettes(), 2);
        let s = plaquette_string(&lat, Plaq::new(0, false));
        let exact = exact_u1_phi(&lat, &s, &k, 0.3).unwrap();
        let run = McRun { samples: 20_000, seed: 5 };
        let est = mc_phi(&lat, &s, &ActionWeight::Truncated(k), 1, 0.3, run).unwrap();
        assert!(est.consistent_with(Complex64::new(exact, 0.0), 3.0), "{est:?} vs {exact}");
        let z = mc_phi(&lat, &LatticeString::null(0), &ActionWeight::Full, 2, 0.0, run).unwrap();
        assert_eq!(z.mean, Complex64::new(1.0, 0.0));
        assert_eq!(z.standard_error, 0.0);
    }
}
