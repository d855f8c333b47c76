use std::path::PathBuf;

use loopeq::engine::{BuildMode, Caps, Model, NormParams, SolveMode};
use loopeq::lattice::OrientedPlaquette;
use loopeq::texp::ParameterSet;
use loopeq::{Lattice, Loop, PlaquetteSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Half side: sites have coordinates in `[-l, l]`.
    pub l: i32,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub corner: Vec<i32>,
    pub axes: [usize; 2],
    pub r: u32,
    pub s: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n: u64,
    pub beta: f64,
    pub b: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BadPlaquette {
    pub corner: Vec<i32>,
    pub axes: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSpec {
    pub mode: SolveMode,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest admissible deviation from the exact values at `N = 1`.
    pub oracle_tol: f64,
}

impl Default for SolveSpec {
    fn default() -> Self {
        SolveSpec { mode: SolveMode::Empirical, tol: 1e-13, max_iter: 1000, oracle_tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualSpec {
    pub estimator: Estimator,
    pub tol: f64,
    /// Allowed number of standard errors for Monte Carlo residuals.
    pub sigmas: f64,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        ResidualSpec { estimator: Estimator::Exact, tol: 1e-9, sigmas: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { samples: 100_000, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaSpec {
    pub cases: usize,
    pub mutant: bool,
}

impl Default for LemmaSpec {
    fn default() -> Self {
        LemmaSpec { cases: 1000, mutant: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonomialSpec {
    /// Random unbalanced pairs checked by the exact evaluator.
    pub exact_cases: usize,
    /// Random unbalanced pairs estimated by Monte Carlo.
    pub mc_cases: usize,
}

impl Default for MonomialSpec {
    fn default() -> Self {
        MonomialSpec { exact_cases: 10_000, mc_cases: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterSpec {
    pub max_size: usize,
    pub cap: usize,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec { max_size: 2, cap: 10_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TexpSpec {
    pub grid: usize,
    /// Also check the built-in in-regime parameter tuples.
    pub reference_tuples: bool,
}

impl Default for TexpSpec {
    fn default() -> Self {
        TexpSpec { grid: 1000, reference_tuples: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out") }
    }
}

/// Everything a run needs. Unknown keys are rejected at parse time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    pub params: Params,
    /// Norm weights; the theorem's choice when absent.
    pub norm: Option<NormParams>,
    pub model: Model,
    pub build: BuildMode,
    pub bad: Vec<BadPlaquette>,
    pub caps: Caps,
    pub solve: SolveSpec,
    pub residual: ResidualSpec,
    pub sampling: Sampling,
    pub lemmas: LemmaSpec,
    pub monomials: MonomialSpec,
    pub clusters: ClusterSpec,
    pub texp: TexpSpec,
    /// Allow certificates outside the regime, flagged as non-rigorous.
    pub demo: bool,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lattice: LatticeSpec { l: 2, d: 2 },
            loop_spec: LoopSpec { corner: vec![0, 0], axes: [0, 1], r: 1, s: 1 },
            params: Params { n: 1, beta: 0.1, b: 1 },
            norm: None,
            model: Model::Truncated,
            build: BuildMode::Exact,
            bad: Vec::new(),
            caps: Caps::default(),
            solve: SolveSpec::default(),
            residual: ResidualSpec::default(),
            sampling: Sampling::default(),
            lemmas: LemmaSpec::default(),
            monomials: MonomialSpec::default(),
            clusters: ClusterSpec::default(),
            texp: TexpSpec::default(),
            demo: false,
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a JSON document, applying `key.path=value` overrides first.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let user: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if !user.is_object() {
            return Err(CliError::Config("config must be a JSON object".into()));
        }
        let mut v = serde_json::to_value(ExperimentConfig::default()).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut v, user);
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        let cfg: ExperimentConfig =
            serde_json::from_value(v).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that must pass before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let LatticeSpec { l, d } = self.lattice;
        if l < 1 || !(2..=6).contains(&d) {
            return bad(format!("lattice needs l >= 1 and 2 <= d <= 6, got l={l} d={d}"));
        }
        let lp = &self.loop_spec;
        if lp.corner.len() != d {
            return bad(format!("loop corner has {} coordinates, lattice has d={d}", lp.corner.len()));
        }
        if lp.axes[0] == lp.axes[1] || lp.axes.iter().any(|&a| a >= d) {
            return bad(format!("loop axes {:?} invalid for d={d}", lp.axes));
        }
        if lp.r == 0 || lp.s == 0 {
            return bad("loop sides must be positive".into());
        }
        let p = &self.params;
        if p.n == 0 || !p.beta.is_finite() || p.beta < 0.0 {
            return bad(format!("need N >= 1 and finite beta >= 0, got N={} beta={}", p.n, p.beta));
        }
        if let Some(np) = &self.norm {
            np.validate(self.model).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for x in &self.bad {
            if x.corner.len() != d || x.axes[0] == x.axes[1] || x.axes.iter().any(|&a| a >= d) {
                return bad(format!("bad plaquette {x:?} invalid for d={d}"));
            }
        }
        if !(self.solve.tol > 0.0) || self.solve.max_iter == 0 {
            return bad("solve needs tol > 0 and max_iter >= 1".into());
        }
        if self.sampling.samples < loopeq::oracle::BATCHES as u64 {
            return bad(format!("at least {} samples are required", loopeq::oracle::BATCHES));
        }
        if self.lemmas.cases == 0 {
            return bad("lemma cases must be positive".into());
        }
        if self.texp.grid == 0 {
            return bad("texp grid must be positive".into());
        }
        // geometry that only the lattice can judge
        let lat = self.lattice()?;
        self.root_loop(&lat)?;
        self.bad_set(&lat)?;
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice, CliError> {
        Lattice::new(self.lattice.l, self.lattice.d).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn root_loop(&self, lat: &Lattice) -> Result<Loop, CliError> {
        let lp = &self.loop_spec;
        lat.rectangular_loop(&lp.corner, (lp.axes[0], lp.axes[1]), lp.r, lp.s)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn bad_set(&self, lat: &Lattice) -> Result<PlaquetteSet, CliError> {
        self.bad
            .iter()
            .map(|x| {
                let (mu, nu) = (x.axes[0].min(x.axes[1]), x.axes[0].max(x.axes[1]));
                lat.plaquette_from(&OrientedPlaquette { corner: x.corner.clone(), axes: (mu, nu), sign: 1 })
                    .map(|p| p.index())
                    .map_err(|e| CliError::Config(e.to_string()))
            })
            .collect()
    }

    pub fn parameter_set(&self) -> ParameterSet {
        ParameterSet { d: self.lattice.d as u32, n: self.params.n, beta: self.params.beta, b: self.params.b }
    }

    pub fn norm_params(&self) -> NormParams {
        self.norm.unwrap_or_else(|| NormParams::theorem(&self.parameter_set(), self.model))
    }
}

/// Recursively overlays `top` onto `base`; non-object values replace.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Sets `a.b.c=value`, reading `value` as JSON when it parses and as a string otherwise.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override key `{path}` is malformed")));
    }
    let mut cur = root;
    for k in &keys[..keys.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override `{path}` descends into a non-object")))?;
        cur = obj.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    cur.as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override `{path}` descends into a non-object")))?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}
