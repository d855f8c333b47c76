//! Truncated exponentials and their tails, with checks of the inequalities
//! they satisfy inside the parameter regime.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use twofloat::TwoFloat;

/// Degree-`k` Taylor partial sum of `exp` at `x`, accumulated in double-double.
pub fn exp_trunc(k: u64, x: f64) -> f64 {
    exp_trunc_dd(k, x).hi()
}

pub fn exp_trunc_dd(k: u64, x: f64) -> TwoFloat {
    let mut sum = TwoFloat::from(1.0);
    let mut term = TwoFloat::from(1.0);
    for j in 1..=k {
        term = term * x / (j as f64);
        if term.hi() == 0.0 {
            break;
        }
        sum += term;
    }
    sum
}

/// `sum_{j > k} x^j / j!`, summed term by term.
pub fn tail(k: u64, x: f64) -> f64 {
    tail_dd(k, x).hi()
}

pub fn tail_dd(k: u64, x: f64) -> TwoFloat {
    let zero = TwoFloat::from(0.0);
    if x == 0.0 {
        return zero;
    }
    let mut j = k + 1;
    let mut term = if k <= 100_000 {
        let mut t = TwoFloat::from(1.0);
        for i in 1..=j {
            t = t * x / (i as f64);
            if t.hi() == 0.0 {
                return zero;
            }
        }
        t
    } else {
        let m = ((j as f64) * x.abs().ln() - ln_gamma(j as f64 + 1.0)).exp();
        TwoFloat::from(if x < 0.0 && j % 2 == 1 { -m } else { m })
    };
    let mut sum = TwoFloat::from(0.0);
    loop {
        sum += term;
        let t = term.hi().abs();
        if (j as f64) > x.abs() && (t == 0.0 || t <= 1e-33 * sum.hi().abs()) {
            break;
        }
        j += 1;
        term = term * x / (j as f64);
    }
    sum
}

/// `exp_K(x + y)` against `sum_{j1 + j2 <= K} x^j1 y^j2 / (j1! j2!)`; returns the absolute gap.
pub fn binomial_split_gap(k: u64, x: f64, y: f64) -> f64 {
    let lhs = exp_trunc(k, x + y);
    let mut rhs = TwoFloat::from(0.0);
    let mut tx = TwoFloat::from(1.0);
    for j1 in 0..=k {
        if j1 > 0 {
            tx = tx * x / (j1 as f64);
        }
        rhs += tx * exp_trunc(k - j1, y);
    }
    (lhs - rhs.hi()).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub d: u32,
    pub n: u64,
    pub beta: f64,
    pub b: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n_large: bool,
    pub beta_small: bool,
    pub b_in_range: bool,
    pub b_odd: bool,
    pub regime: bool,
    /// `d N beta / B`, small in-regime.
    pub dn_beta_over_b: f64,
    /// `d B / N`, small in-regime.
    pub db_over_n: f64,
    /// `d^5 / B`, small in-regime.
    pub d5_over_b: f64,
}

pub fn validate_parameters(p: &ParameterSet) -> RegimeReport {
    let d = u128::from(p.d);
    let n = u128::from(p.n);
    let b = u128::from(p.b);
    let n_large = p.d >= 2 && n >= 10_000_000_000u128 * d.pow(10);
    let beta_small = p.beta >= 0.0 && p.beta <= 10f64.powi(-10 * p.d as i32) / f64::from(p.d);
    let b_in_range = 2000 * d * b >= n && 1000 * d * b <= n;
    let b_odd = p.b % 2 == 1;
    let df = f64::from(p.d);
    RegimeReport {
        n_large,
        beta_small,
        b_in_range,
        b_odd,
        regime: n_large && beta_small && b_in_range && b_odd,
        dn_beta_over_b: df * p.n as f64 * p.beta / p.b as f64,
        db_over_n: df * p.b as f64 / p.n as f64,
        d5_over_b: df.powi(5) / p.b as f64,
    }
}

/// Smallest odd `B` in the admissible range for `(d, N)`, if any.
pub fn smallest_admissible_b(d: u32, n: u64) -> Option<u64> {
    let d = u64::from(d);
    let lo = n.div_ceil(2000 * d);
    let hi = n / (1000 * d);
    let b = if lo % 2 == 1 { lo } else { lo + 1 };
    (b <= hi).then_some(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    /// Huge `B`; everything evaluated through certified log-domain bounds.
    Regime,
    /// Small `B`; direct double-double evaluation with the regime check waived.
    Demo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: u8,
    pub x: f64,
    pub k: u64,
    pub lhs_log: f64,
    pub rhs_log: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub mode: CheckMode,
    pub params: ParameterSet,
    pub regime: bool,
    pub hypotheses_hold: bool,
    pub checks: [u64; 3],
    pub violations: Vec<Violation>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.checks.iter().all(|&c| c > 0)
    }
}

/// Natural-log bounds `[lo, hi]` on `|tau_k(x)|`, valid when `|x| < (k + 2) / 2`.
fn ln_tail_bounds(k: u64, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let kf = k as f64;
    let ln_t1 = (kf + 1.0) * x.abs().ln() - ln_gamma(kf + 2.0);
    let r = x.abs() / (kf + 2.0);
    (ln_t1 + (-r / (1.0 - r)).ln_1p(), ln_t1 - (-r).ln_1p())
}

/// Bounds on `ln exp_k(x)` as `exp(x) -/+ |tau_k(x)|`.
fn ln_exp_trunc_bounds(k: u64, x: f64) -> (f64, f64) {
    let (_, hi) = ln_tail_bounds(k, x);
    let rel = (hi - x).exp();
    (x + (-rel).ln_1p(), x + rel.ln_1p())
}

const SLACK: f64 = 1e-10;

/// Checks the three truncated-exponential inequalities on a grid of `|x| <= 2 N beta`.
pub fn check_lemma_bounds(p: &ParameterSet, grid: usize, mode: CheckMode, seed: u64) -> LemmaReport {
    let regime = validate_parameters(p).regime;
    let xmax = 2.0 * p.n as f64 * p.beta;
    let b = p.b;
    let hypotheses_hold = b % 2 == 1 && (b as f64) >= 8.0 * xmax + 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ks: Vec<u64> = vec![0, 1, 2, b / 10, b / 2, b.saturating_sub(2), b.saturating_sub(1), b];
    for _ in 0..8 {
        ks.push(rng.random_range(0..=b));
    }
    ks.sort_unstable();
    ks.dedup();

    let mut report = LemmaReport {
        mode,
        params: *p,
        regime,
        hypotheses_hold,
        checks: [0; 3],
        violations: Vec::new(),
    };
    if mode == CheckMode::Regime && !regime {
        return report;
    }
    if mode == CheckMode::Demo && !hypotheses_hold {
        return report;
    }
    let bf = b as f64;
    for i in 0..grid {
        let x = if grid == 1 { 0.0 } else { -xmax + 2.0 * xmax * i as f64 / (grid - 1) as f64 };
        let record = |report: &mut LemmaReport, which: u8, k: u64, lhs: f64, rhs: f64| {
            report.checks[which as usize - 1] += 1;
            if !(lhs <= rhs + SLACK) {
                report.violations.push(Violation { inequality: which, x, k, lhs_log: lhs, rhs_log: rhs });
            }
        };
        match mode {
            CheckMode::Regime => {
                let (eb_lo, _) = ln_exp_trunc_bounds(b, x);
                let (_, tau_hi) = ln_tail_bounds(b, x);
                // tau_B(x) is led by the even power x^{B+1}, which dominates the rest when r < 1/2
                let tau_nonneg = x == 0.0 || (b % 2 == 1 && x.abs() < (bf + 2.0) / 2.0);
                let positive = eb_lo.is_finite();
                record(&mut report, 1, b, if positive && tau_nonneg { 0.0 } else { 1.0 }, 0.0);
                record(&mut report, 2, b, tau_hi, -bf / 10.0 + eb_lo);
                for &k in &ks {
                    let lhs = if k <= 64 {
                        exp_trunc(k, x).abs().ln()
                    } else {
                        ln_exp_trunc_bounds(k, x).1
                    };
                    record(&mut report, 3, k, lhs, (b - k) as f64 + eb_lo);
                }
            }
            CheckMode::Demo => {
                let eb = exp_trunc(b, x);
                let ok1 = eb > 0.0 && eb <= x.exp() * (1.0 + 1e-15);
                record(&mut report, 1, b, if ok1 { 0.0 } else { 1.0 }, 0.0);
                record(&mut report, 2, b, tail(b, x).abs().ln(), -bf / 10.0 + eb.ln());
                for &k in &ks {
                    record(&mut report, 3, k, exp_trunc(k, x).abs().ln(), (b - k) as f64 + eb.ln());
                }
            }
        }
    }
    report
}

/// The three in-regime parameter tuples used for reproducible checks.
pub fn regime_tuples() -> Vec<ParameterSet> {
    vec![
        ParameterSet { d: 2, n: 100_000_000_000_000, beta: 1e-21, b: 25_000_000_001 },
        ParameterSet { d: 3, n: 1_000_000_000_000_000, beta: 1e-31, b: 200_000_000_001 },
        ParameterSet { d: 4, n: 11_000_000_000_000_000, beta: 2e-41, b: 2_000_000_000_001 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(exp_trunc(0, 3.7), 1.0);
        assert_eq!(exp_trunc(1, 0.5), 1.5);
        assert_eq!(exp_trunc(17, 0.0), 1.0);
        assert_eq!(tail(5, 0.0), 0.0);
        for x in [-2.0, -0.3, 0.1, 1.0, 4.0] {
            let want = f64::exp_m1(x);
            assert!(((tail(0, x) - want) / want).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn tail_plus_partial_sum() {
        for k in [0u64, 1, 3, 10, 30, 100] {
            for x in [-10.0, -3.5, -0.2, 0.7, 2.0, 9.9] {
                let s = (tail_dd(k, x) + exp_trunc_dd(k, x)).hi();
                assert!(((s - x.exp()) / x.exp()).abs() < 1e-10, "k={k} x={x}");
                let t = tail(k, x);
                let diff = (TwoFloat::from(x.exp()) - exp_trunc_dd(k, x)).hi();
                assert!((t - diff).abs() <= 1e-10 * t.abs() + 1e-15 * x.exp(), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn monotone_in_degree() {
        let mut prev = 0.0;
        for k in 0..40 {
            let v = exp_trunc(k, 1.3);
            assert!(v >= prev);
            prev = v;
        }
        assert!((prev - 1.3f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn binomial_split() {
        for k in 0..8 {
            assert!(binomial_split_gap(k, 0.3, -0.7) < 1e-14);
        }
    }

    #[test]
    fn regime_examples() {
        let p = ParameterSet { d: 2, n: 100_000_000_000_000, beta: 1e-21, b: 25_000_000_001 };
        assert!(validate_parameters(&p).regime);
        assert_eq!(smallest_admissible_b(2, p.n), Some(p.b));
        assert!(!validate_parameters(&ParameterSet { n: 1_000_000_000, ..p }).regime);
        assert!(!validate_parameters(&ParameterSet { b: p.b + 1, ..p }).regime);
        for t in regime_tuples() {
            assert!(validate_parameters(&t).regime, "{t:?}");
        }
    }

    #[test]
    fn regime_grid_has_no_violations() {
        for t in regime_tuples() {
            let r = check_lemma_bounds(&t, 101, CheckMode::Regime, 1);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn demo_grid_has_no_violations() {
        let p = ParameterSet { d: 2, n: 10, beta: 0.05, b: 21 };
        let r = check_lemma_bounds(&p, 201, CheckMode::Demo, 3);
        assert!(r.hypotheses_hold);
        assert!(r.passed(), "{r:?}");
    }
}
