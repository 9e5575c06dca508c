//! Experiment configuration: a flat `key = value` text format with
//! `[section]` headers, parsed strictly. Unknown sections or keys are
//! errors, as are keys that do not apply to the selected problem or
//! schedule. Every accepted config resolves to exactly one experiment,
//! and its canonical form is hashed so outputs are traceable to inputs.
//!
//! Sections and keys:
//!
//! ```text
//! [problem]
//! name = quadratic | rastrigin-smooth | rosenbrock | logistic
//! d = <dim>
//! eig_min, eig_max = <f64>          quadratic only (default 1, 1)
//! a = <f64>                         rastrigin-smooth only (default 1)
//! domain_radius = <f64>             rosenbrock only (default 2)
//! reg, n_samples, data_seed         logistic only (default 0.1, 200, 0)
//!
//! [run]
//! mode = constrained | unconstrained
//! lambda = auto | <f64>             auto only with unconstrained + theory
//! k = <steps>
//! sigma = <f64>
//! noise = gaussian | uniform        default gaussian
//! seeds = <count>                   default 20, numbered from base_seed
//! base_seed = <u64>                 default 1
//! seed_list = <s1,s2,...>           overrides seeds/base_seed
//! log_every = <u64>                 default 1; thins per-step CSV only
//! out_dir = <path>                  default out
//! m0 = first-sample | zero          default first-sample
//! sgd_eta = <f64>                   baseline step size, default eta*sqrt(d)
//!
//! [init]
//! kind = zeros | constant | uniform default constant
//! value = <f64>                     constant only, default 0.5
//! scale = <f64>                     uniform only, default 0.5
//! seed = <u64>                      uniform only, default 0
//!
//! [schedule]
//! mode = theory | manual
//! c1, c2, c3 = <f64>                theory only; default balanced
//! beta1, beta2, eta = <f64>         manual only, all required
//!
//! [sweep]
//! axis = k | d
//! values = <v1,v2,...>
//! ```

use crate::error::{LionError, Result};
use crate::problems::{NoiseKind, Problem};
use crate::ratefit::SweepAxis;
use crate::vector::ParamVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Constrained,
    Unconstrained,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Constrained => "constrained",
            Mode::Unconstrained => "unconstrained",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumInit {
    FirstSample,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Zeros,
    Constant { value: f64 },
    Uniform { scale: f64, seed: u64 },
}

impl InitSpec {
    /// The starting iterate in dimension `d`. Deterministic.
    pub fn materialize(&self, d: usize) -> Result<ParamVector> {
        match self {
            InitSpec::Zeros => Ok(ParamVector::zeros(d)),
            InitSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(LionError::Config("init value must be finite".into()));
                }
                Ok(ParamVector::constant(d, *value))
            }
            InitSpec::Uniform { scale, seed } => {
                if !(scale > &0.0) || !scale.is_finite() {
                    return Err(LionError::Config(
                        "init scale must be finite and > 0".into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(ParamVector::new(
                    (0..d).map(|_| rng.random_range(-scale..*scale)).collect(),
                )?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Theory {
        c1: Option<f64>,
        c2: Option<f64>,
        c3: Option<f64>,
    },
    Manual {
        beta1: f64,
        beta2: f64,
        eta: f64,
    },
}

impl ScheduleSpec {
    pub fn is_theory(&self) -> bool {
        matches!(self, ScheduleSpec::Theory { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub d: usize,
    pub eig_min: f64,
    pub eig_max: f64,
    pub a: f64,
    pub domain_radius: f64,
    pub reg: f64,
    pub n_samples: usize,
    pub data_seed: u64,
}

impl ProblemSpec {
    /// Builds the problem, optionally at a different dimension (sweeps).
    pub fn build(&self, d_override: Option<usize>) -> Result<Problem> {
        let d = d_override.unwrap_or(self.d);
        match self.name.as_str() {
            "quadratic" => Problem::quadratic(d, self.eig_min, self.eig_max),
            "rastrigin-smooth" => Problem::rastrigin_smooth(d, self.a),
            "rosenbrock" => Problem::rosenbrock(d, self.domain_radius),
            "logistic" => Problem::logistic(d, self.n_samples, self.reg, self.data_seed),
            other => Err(LionError::Config(format!("unknown problem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub mode: Mode,
    pub lambda: LambdaSpec,
    pub k: u64,
    pub sigma: f64,
    pub noise: NoiseKind,
    pub seeds: Vec<u64>,
    pub log_every: u64,
    pub out_dir: PathBuf,
    pub momentum_init: MomentumInit,
    pub init: InitSpec,
    pub schedule: ScheduleSpec,
    pub sgd_eta: Option<f64>,
    pub sweep: Option<SweepSpec>,
}

/// One section's remaining raw keys.
struct SectionMap {
    name: &'static str,
    entries: BTreeMap<String, String>,
}

impl SectionMap {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                LionError::Config(format!(
                    "[{}] {key} = {raw}: cannot parse value",
                    self.name
                ))
            }),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.entries.keys().next() {
            return Err(LionError::Config(format!(
                "[{}] unknown or inapplicable key '{key}'",
                self.name
            )));
        }
        Ok(())
    }
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| {
                LionError::Config(format!("line {}: malformed section header", lineno + 1))
            })?;
            let name = name.trim().to_string();
            if !matches!(
                name.as_str(),
                "problem" | "run" | "init" | "schedule" | "sweep"
            ) {
                return Err(LionError::Config(format!(
                    "line {}: unknown section [{name}]",
                    lineno + 1
                )));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            LionError::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = current.as_ref().ok_or_else(|| {
            LionError::Config(format!(
                "line {}: key '{key}' appears before any [section]",
                lineno + 1
            ))
        })?;
        let map = sections.get_mut(section).expect("section registered");
        if map.insert(key.clone(), value).is_some() {
            return Err(LionError::Config(format!(
                "line {}: duplicate key '{key}' in [{section}]",
                lineno + 1
            )));
        }
    }
    Ok(sections)
}

fn parse_u64_list(name: &str, raw: &str) -> Result<Vec<u64>> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| LionError::Config(format!("{name}: cannot parse '{part}'")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = parse_sections(text)?;
        let mut section = |name: &'static str| SectionMap {
            name,
            entries: raw.remove(name).unwrap_or_default(),
        };

        let mut problem = section("problem");
        let name: String = problem
            .take("name")
            .ok_or_else(|| LionError::Config("[problem] name is required".into()))?;
        let d: usize = problem
            .take_parsed("d")?
            .ok_or_else(|| LionError::Config("[problem] d is required".into()))?;
        let mut spec = ProblemSpec {
            name: name.clone(),
            d,
            eig_min: 1.0,
            eig_max: 1.0,
            a: 1.0,
            domain_radius: 2.0,
            reg: 0.1,
            n_samples: 200,
            data_seed: 0,
        };
        match name.as_str() {
            "quadratic" => {
                if let Some(v) = problem.take_parsed("eig_min")? {
                    spec.eig_min = v;
                }
                if let Some(v) = problem.take_parsed("eig_max")? {
                    spec.eig_max = v;
                }
            }
            "rastrigin-smooth" => {
                if let Some(v) = problem.take_parsed("a")? {
                    spec.a = v;
                }
            }
            "rosenbrock" => {
                if let Some(v) = problem.take_parsed("domain_radius")? {
                    spec.domain_radius = v;
                }
            }
            "logistic" => {
                if let Some(v) = problem.take_parsed("reg")? {
                    spec.reg = v;
                }
                if let Some(v) = problem.take_parsed("n_samples")? {
                    spec.n_samples = v;
                }
                if let Some(v) = problem.take_parsed("data_seed")? {
                    spec.data_seed = v;
                }
            }
            other => {
                return Err(LionError::Config(format!(
                    "[problem] unknown problem '{other}'"
                )))
            }
        }
        problem.finish()?;

        let mut run = section("run");
        let mode = match run
            .take("mode")
            .ok_or_else(|| LionError::Config("[run] mode is required".into()))?
            .as_str()
        {
            "constrained" => Mode::Constrained,
            "unconstrained" => Mode::Unconstrained,
            other => {
                return Err(LionError::Config(format!(
                    "[run] mode = {other}: expected constrained or unconstrained"
                )))
            }
        };
        let lambda_raw = run
            .take("lambda")
            .ok_or_else(|| LionError::Config("[run] lambda is required".into()))?;
        let lambda = if lambda_raw == "auto" {
            LambdaSpec::Auto
        } else {
            LambdaSpec::Fixed(lambda_raw.parse::<f64>().map_err(|_| {
                LionError::Config(format!("[run] lambda = {lambda_raw}: expected a number or auto"))
            })?)
        };
        let k: u64 = run
            .take_parsed("k")?
            .ok_or_else(|| LionError::Config("[run] k is required".into()))?;
        let sigma: f64 = run
            .take_parsed("sigma")?
            .ok_or_else(|| LionError::Config("[run] sigma is required".into()))?;
        let noise = match run.take("noise").as_deref() {
            None | Some("gaussian") => NoiseKind::GaussianIsotropic,
            Some("uniform") => NoiseKind::BoundedUniform,
            Some(other) => {
                return Err(LionError::Config(format!(
                    "[run] noise = {other}: expected gaussian or uniform"
                )))
            }
        };
        let seed_list = run.take("seed_list");
        let seed_count: Option<u64> = run.take_parsed("seeds")?;
        let base_seed: Option<u64> = run.take_parsed("base_seed")?;
        let seeds = match seed_list {
            Some(raw) => {
                if seed_count.is_some() || base_seed.is_some() {
                    return Err(LionError::Config(
                        "[run] seed_list conflicts with seeds/base_seed".into(),
                    ));
                }
                parse_u64_list("[run] seed_list", &raw)?
            }
            None => {
                let count = seed_count.unwrap_or(20);
                let base = base_seed.unwrap_or(1);
                (0..count).map(|i| base + i).collect()
            }
        };
        let log_every: u64 = run.take_parsed("log_every")?.unwrap_or(1);
        let out_dir = PathBuf::from(run.take("out_dir").unwrap_or_else(|| "out".into()));
        let momentum_init = match run.take("m0").as_deref() {
            None | Some("first-sample") => MomentumInit::FirstSample,
            Some("zero") => MomentumInit::Zero,
            Some(other) => {
                return Err(LionError::Config(format!(
                    "[run] m0 = {other}: expected first-sample or zero"
                )))
            }
        };
        let sgd_eta: Option<f64> = run.take_parsed("sgd_eta")?;
        run.finish()?;

        let mut init_sec = section("init");
        let init = match init_sec.take("kind").as_deref() {
            None | Some("constant") => InitSpec::Constant {
                value: init_sec.take_parsed("value")?.unwrap_or(0.5),
            },
            Some("zeros") => InitSpec::Zeros,
            Some("uniform") => InitSpec::Uniform {
                scale: init_sec.take_parsed("scale")?.unwrap_or(0.5),
                seed: init_sec.take_parsed("seed")?.unwrap_or(0),
            },
            Some(other) => {
                return Err(LionError::Config(format!(
                    "[init] kind = {other}: expected zeros, constant, or uniform"
                )))
            }
        };
        init_sec.finish()?;

        let mut sched = section("schedule");
        let schedule = match sched
            .take("mode")
            .ok_or_else(|| LionError::Config("[schedule] mode is required".into()))?
            .as_str()
        {
            "theory" => ScheduleSpec::Theory {
                c1: sched.take_parsed("c1")?,
                c2: sched.take_parsed("c2")?,
                c3: sched.take_parsed("c3")?,
            },
            "manual" => {
                let need = |sec: &mut SectionMap, key: &str| -> Result<f64> {
                    sec.take_parsed(key)?.ok_or_else(|| {
                        LionError::Config(format!("[schedule] manual mode requires {key}"))
                    })
                };
                ScheduleSpec::Manual {
                    beta1: need(&mut sched, "beta1")?,
                    beta2: need(&mut sched, "beta2")?,
                    eta: need(&mut sched, "eta")?,
                }
            }
            other => {
                return Err(LionError::Config(format!(
                    "[schedule] mode = {other}: expected theory or manual"
                )))
            }
        };
        sched.finish()?;

        let mut sweep_sec = section("sweep");
        let sweep = match (sweep_sec.take("axis"), sweep_sec.take("values")) {
            (None, None) => None,
            (Some(axis_raw), Some(values_raw)) => {
                let axis = match axis_raw.to_ascii_lowercase().as_str() {
                    "k" => SweepAxis::K,
                    "d" => SweepAxis::D,
                    other => {
                        return Err(LionError::Config(format!(
                            "[sweep] axis = {other}: expected k or d"
                        )))
                    }
                };
                Some(SweepSpec {
                    axis,
                    values: parse_u64_list("[sweep] values", &values_raw)?,
                })
            }
            _ => {
                return Err(LionError::Config(
                    "[sweep] needs both axis and values".into(),
                ))
            }
        };
        sweep_sec.finish()?;

        if let Some(leftover) = raw.keys().next() {
            return Err(LionError::Config(format!("unknown section [{leftover}]")));
        }

        let cfg = Self {
            problem: spec,
            mode,
            lambda,
            k,
            sigma,
            noise,
            seeds,
            log_every,
            out_dir,
            momentum_init,
            init,
            schedule,
            sgd_eta,
            sweep,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            LionError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Structural checks that need no problem instance. Mode and schedule
    /// interplay (feasible start, step-size caps) is checked at resolve
    /// time when the problem and schedule are concrete.
    pub fn validate(&self) -> Result<()> {
        if self.problem.d == 0 {
            return Err(LionError::Config("[problem] d must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(LionError::Config("[run] k must be >= 1".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(LionError::Config(
                "[run] sigma must be finite and >= 0".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(LionError::Config("[run] needs at least one seed".into()));
        }
        {
            let mut sorted = self.seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.seeds.len() {
                return Err(LionError::Config("[run] duplicate seeds".into()));
            }
        }
        if self.log_every == 0 {
            return Err(LionError::Config("[run] log_every must be >= 1".into()));
        }
        match (self.mode, self.lambda) {
            (Mode::Constrained, LambdaSpec::Auto) => {
                return Err(LionError::Config(
                    "lambda = auto is only for unconstrained mode".into(),
                ));
            }
            (Mode::Constrained, LambdaSpec::Fixed(v)) if !(v > 0.0) || !v.is_finite() => {
                return Err(LionError::Config(
                    "constrained mode needs finite lambda > 0".into(),
                ));
            }
            (Mode::Unconstrained, LambdaSpec::Fixed(v)) if !(v >= 0.0) || !v.is_finite() => {
                return Err(LionError::Config(
                    "unconstrained mode needs finite lambda >= 0".into(),
                ));
            }
            (Mode::Unconstrained, LambdaSpec::Auto) if !self.schedule.is_theory() => {
                return Err(LionError::Config(
                    "lambda = auto requires the theory schedule".into(),
                ));
            }
            _ => {}
        }
        if let Some(eta) = self.sgd_eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(LionError::Config(
                    "[run] sgd_eta must be finite and > 0".into(),
                ));
            }
        }
        if let ScheduleSpec::Theory { c1, c2, c3 } = &self.schedule {
            for (name, c) in [("c1", c1), ("c2", c2), ("c3", c3)] {
                if let Some(v) = c {
                    if !(v > &0.0) || !v.is_finite() {
                        return Err(LionError::Config(format!(
                            "[schedule] {name} must be finite and > 0"
                        )));
                    }
                }
            }
        }
        if let ScheduleSpec::Manual { beta1, beta2, eta } = self.schedule {
            for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
                if !(0.0..1.0).contains(&b) {
                    return Err(LionError::Config(format!(
                        "[schedule] {name} must lie in [0, 1)"
                    )));
                }
            }
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(LionError::Config(
                    "[schedule] eta must be finite and > 0".into(),
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.len() < 2 {
                return Err(LionError::Config(
                    "[sweep] needs at least two values".into(),
                ));
            }
            let mut sorted = sweep.values.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != sweep.values.len() {
                return Err(LionError::Config("[sweep] duplicate values".into()));
            }
            if sweep.values.contains(&0) {
                return Err(LionError::Config("[sweep] values must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Canonical one-line-per-field rendering; the basis of the config
    /// hash. Excludes out_dir (where results land does not change what
    /// the experiment is).
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let p = &self.problem;
        let _ = writeln!(s, "problem.name={}", p.name);
        let _ = writeln!(s, "problem.d={}", p.d);
        match p.name.as_str() {
            "quadratic" => {
                let _ = writeln!(s, "problem.eig_min={:?}", p.eig_min);
                let _ = writeln!(s, "problem.eig_max={:?}", p.eig_max);
            }
            "rastrigin-smooth" => {
                let _ = writeln!(s, "problem.a={:?}", p.a);
            }
            "rosenbrock" => {
                let _ = writeln!(s, "problem.domain_radius={:?}", p.domain_radius);
            }
            "logistic" => {
                let _ = writeln!(s, "problem.reg={:?}", p.reg);
                let _ = writeln!(s, "problem.n_samples={}", p.n_samples);
                let _ = writeln!(s, "problem.data_seed={}", p.data_seed);
            }
            _ => {}
        }
        let _ = writeln!(s, "run.mode={}", self.mode.as_str());
        match self.lambda {
            LambdaSpec::Auto => {
                let _ = writeln!(s, "run.lambda=auto");
            }
            LambdaSpec::Fixed(v) => {
                let _ = writeln!(s, "run.lambda={v:?}");
            }
        }
        let _ = writeln!(s, "run.k={}", self.k);
        let _ = writeln!(s, "run.sigma={:?}", self.sigma);
        let _ = writeln!(
            s,
            "run.noise={}",
            match self.noise {
                NoiseKind::GaussianIsotropic => "gaussian",
                NoiseKind::BoundedUniform => "uniform",
            }
        );
        let seeds: Vec<String> = self.seeds.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "run.seeds={}", seeds.join(","));
        let _ = writeln!(s, "run.log_every={}", self.log_every);
        let _ = writeln!(
            s,
            "run.m0={}",
            match self.momentum_init {
                MomentumInit::FirstSample => "first-sample",
                MomentumInit::Zero => "zero",
            }
        );
        match self.sgd_eta {
            Some(v) => {
                let _ = writeln!(s, "run.sgd_eta={v:?}");
            }
            None => {
                let _ = writeln!(s, "run.sgd_eta=default");
            }
        }
        match &self.init {
            InitSpec::Zeros => {
                let _ = writeln!(s, "init=zeros");
            }
            InitSpec::Constant { value } => {
                let _ = writeln!(s, "init=constant:{value:?}");
            }
            InitSpec::Uniform { scale, seed } => {
                let _ = writeln!(s, "init=uniform:{scale:?}:{seed}");
            }
        }
        match &self.schedule {
            ScheduleSpec::Theory { c1, c2, c3 } => {
                let show = |c: &Option<f64>| match c {
                    Some(v) => format!("{v:?}"),
                    None => "balanced".into(),
                };
                let _ = writeln!(
                    s,
                    "schedule=theory:{}:{}:{}",
                    show(c1),
                    show(c2),
                    show(c3)
                );
            }
            ScheduleSpec::Manual { beta1, beta2, eta } => {
                let _ = writeln!(s, "schedule=manual:{beta1:?}:{beta2:?}:{eta:?}");
            }
        }
        match &self.sweep {
            None => {
                let _ = writeln!(s, "sweep=none");
            }
            Some(sw) => {
                let vals: Vec<String> = sw.values.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "sweep={}:{}", sw.axis.label(), vals.join(","));
            }
        }
        s
    }

    /// First 16 hex chars of the canonical form's SHA-256.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}
