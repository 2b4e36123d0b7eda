//! Line-based run configuration.
//!
//! ```text
//! [grid]
//! d = 2
//! n = 128, 128
//! L = 8, 8
//! [phys]
//! omega = 1, 1
//! Omega = 0.5
//! g = 10
//! sigma = 1
//! gamma = 1
//! mass = 1
//! [evolve]
//! dt = 1e-3
//! T = 1
//! scheme = projection
//! record_every = 10
//! snapshot_every = 0
//! [init]
//! kind = mix 1 0 0.8, 3 0 0.6
//! seed = 7
//! [output]
//! dir = out
//! ```
//!
//! `#` starts a comment. List values take commas or blanks, brackets are
//! optional and a single value is repeated on every axis. Missing keys keep
//! their defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolution::{EvolveConfig, Scheme};
use crate::grid::{ComplexField, Grid};
use crate::params::PhysParams;
use crate::spectral_basis::{eigenfunction, EigenIndex};

/// `(section, key, default)` for every accepted key.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("grid", "d", "2"),
    ("grid", "n", "128"),
    ("grid", "L", "8"),
    ("phys", "omega", "1"),
    ("phys", "Omega", "0"),
    ("phys", "g", "0"),
    ("phys", "sigma", "1"),
    ("phys", "gamma", "1"),
    ("phys", "mass", "1"),
    ("evolve", "dt", "1e-3"),
    ("evolve", "T", "1"),
    ("evolve", "scheme", "projection"),
    ("evolve", "record_every", "10"),
    ("evolve", "snapshot_every", "0"),
    ("init", "kind", "gaussian"),
    ("init", "seed", "0"),
    ("output", "dir", "out"),
];

/// Default phase-noise amplitude of `vortex_seed`, in radians.
pub const DEFAULT_VORTEX_NOISE: f64 = 0.1;

/// Initial datum, before rescaling to the target mass.
#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    /// `exp(-sum omega_j (x_j - c_j)^2 / 2)`.
    Gaussian { center: Vec<f64> },
    Eigenmode(EigenIndex),
    Mix(Vec<(EigenIndex, Complex64)>),
    /// Centered Gaussian times `exp(i noise u(x))`, `u` uniform in `[-pi, pi]`.
    VortexSeed { noise: f64 },
    File(PathBuf),
}

impl std::fmt::Display for InitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let idx = |i: &EigenIndex| {
            if i.nz == 0 {
                format!("{} {}", i.k, i.m)
            } else {
                format!("{} {} {}", i.k, i.m, i.nz)
            }
        };
        match self {
            InitSpec::Gaussian { center } => {
                f.write_str("gaussian")?;
                for c in center {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
            InitSpec::Eigenmode(i) => write!(f, "eigenmode {}", idx(i)),
            InitSpec::Mix(terms) => {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|(i, c)| format!("{} {} {}", idx(i), c.re, c.im))
                    .collect();
                write!(f, "mix {}", parts.join(", "))
            }
            InitSpec::VortexSeed { noise } => write!(f, "vortex_seed {noise}"),
            InitSpec::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

/// Everything one CLI invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub n: Vec<usize>,
    pub half_lengths: Vec<f64>,
    pub omega: Vec<f64>,
    pub rotation: f64,
    pub g: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub mass: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub snapshot_every: usize,
    pub init: InitSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Origin {
    Default,
    Line(usize),
    Flag,
}

struct Raw {
    values: BTreeMap<&'static str, (String, Origin)>,
}

impl Raw {
    fn get(&self, key: &str) -> (&str, Origin) {
        let (v, o) = &self.values[key];
        (v.as_str(), *o)
    }

    /// Error attributed to the most recently set of `keys`.
    fn blame(&self, keys: &[&str], msg: impl Into<String>) -> Error {
        let (key, origin) = keys
            .iter()
            .map(|k| (*k, self.values[k].1))
            .max_by_key(|(_, o)| *o)
            .expect("at least one key");
        located(key, origin, msg.into())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, o) = self.get(key);
        v.parse::<T>()
            .map_err(|e| located(key, o, format!("`{key}`: cannot parse {v:?}: {e}")))
    }

    fn list<T: std::str::FromStr + Clone>(&self, key: &str, d: usize) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let (v, o) = self.get(key);
        let items = split_list(v)
            .map(|s| s.parse::<T>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| located(key, o, format!("`{key}`: cannot parse {v:?}: {e}")))?;
        match items.len() {
            1 => Ok(vec![items[0].clone(); d]),
            l if l == d => Ok(items),
            l => Err(located(key, o, format!("`{key}` needs 1 or {d} values, got {l}"))),
        }
    }
}

fn located(key: &str, origin: Origin, msg: String) -> Error {
    match origin {
        Origin::Line(line) => Error::Parse { line, msg },
        Origin::Flag => Error::InvalidConfig(format!("--{key}: {msg}")),
        Origin::Default => Error::InvalidConfig(msg),
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

fn lookup(section: Option<&str>, key: &str) -> Option<&'static str> {
    CONFIG_KEYS
        .iter()
        .find(|(s, k, _)| *k == key && section.is_none_or(|sec| sec == *s))
        .map(|(_, k, _)| *k)
}

/// Parses a config file with the defaults filling missing keys.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}

/// [`parse_config`], then `overrides` as `(key, value)` pairs that beat the
/// file. A key may be bare (`gamma`) or qualified (`phys.gamma`).
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut values: BTreeMap<&'static str, (String, Origin)> = CONFIG_KEYS
        .iter()
        .map(|(_, k, v)| (*k, (v.to_string(), Origin::Default)))
        .collect();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(format!("malformed section header {line:?}")))?
                .trim();
            if !CONFIG_KEYS.iter().any(|(s, _, _)| *s == name) {
                return Err(err(format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section
            .as_deref()
            .ok_or_else(|| err(format!("key `{key}` before any [section]")))?;
        let k = lookup(Some(sec), key).ok_or_else(|| err(format!("unknown key `{key}` in [{sec}]")))?;
        if let (_, Origin::Line(prev)) = values[k] {
            return Err(err(format!("duplicate key `{key}`, first set on line {prev}")));
        }
        values.insert(k, (value.to_string(), Origin::Line(line_no)));
    }
    for (key, value) in overrides {
        let (sec, bare) = match key.split_once('.') {
            Some((s, k)) => (Some(s), k),
            None => (None, key.as_str()),
        };
        let k = lookup(sec, bare).ok_or_else(|| Error::InvalidConfig(format!("unknown option --{key}")))?;
        values.insert(k, (value.clone(), Origin::Flag));
    }
    build(&Raw { values })
}

fn build(raw: &Raw) -> Result<RunConfig> {
    let d: usize = raw.parse("d")?;
    if d != 2 && d != 3 {
        return Err(raw.blame(&["d"], format!("d must be 2 or 3, got {d}")));
    }
    let n: Vec<usize> = raw.list("n", d)?;
    let half_lengths: Vec<f64> = raw.list("L", d)?;
    if let Some(&bad) = n.iter().find(|&&v| v < 8 || !v.is_power_of_two()) {
        return Err(raw.blame(&["n"], format!("n must be a power of two >= 8, got {bad}")));
    }
    if let Some(&bad) = half_lengths.iter().find(|&&v| !(v.is_finite() && v > 0.0)) {
        return Err(raw.blame(&["L"], format!("L must be positive, got {bad}")));
    }

    let omega: Vec<f64> = raw.list("omega", d)?;
    let rotation: f64 = raw.parse("Omega")?;
    let g: f64 = raw.parse("g")?;
    let sigma: f64 = raw.parse("sigma")?;
    let gamma: f64 = raw.parse("gamma")?;
    let mass: f64 = raw.parse("mass")?;
    let positive = |key: &str, v: f64| -> Result<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(raw.blame(&[key], format!("`{key}` must be > 0, got {v}")))
        }
    };
    for &w in &omega {
        positive("omega", w)?;
    }
    positive("gamma", gamma)?;
    positive("mass", mass)?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(raw.blame(&["sigma"], format!("`sigma` must be >= 0, got {sigma}")));
    }
    PhysParams::new(omega.clone(), rotation, g, sigma, gamma, mass)
        .map_err(|e| {
            let key = if d == 3 && sigma >= 2.0 {
                "sigma"
            } else if g < 0.0 {
                "g"
            } else {
                "omega"
            };
            raw.blame(&[key], e.to_string())
        })?;

    let dt: f64 = raw.parse("dt")?;
    let t_final: f64 = raw.parse("T")?;
    let scheme: Scheme = {
        let (v, o) = raw.get("scheme");
        v.parse().map_err(|e: Error| located("scheme", o, e.to_string()))?
    };
    let record_every: usize = raw.parse("record_every")?;
    let snapshot_every: usize = raw.parse("snapshot_every")?;
    positive("dt", dt)?;
    positive("T", t_final)?;
    EvolveConfig::new(dt, t_final, scheme)
        .with_record_every(record_every)
        .steps()
        .map_err(|e| raw.blame(&["dt", "T", "record_every"], e.to_string()))?;

    let init = {
        let (v, o) = raw.get("kind");
        parse_init(v, d).map_err(|msg| located("kind", o, msg))?
    };
    let seed: u64 = raw.parse("seed")?;
    let output_dir = PathBuf::from(raw.get("dir").0);

    Ok(RunConfig {
        d,
        n,
        half_lengths,
        omega,
        rotation,
        g,
        sigma,
        gamma,
        mass,
        dt,
        t_final,
        scheme,
        record_every,
        snapshot_every,
        init,
        seed,
        output_dir,
    })
}

fn parse_init(v: &str, d: usize) -> std::result::Result<InitSpec, String> {
    let v = v.trim();
    let (kind, rest) = v.split_once(char::is_whitespace).unwrap_or((v, ""));
    let rest = rest.trim();
    let nums = |s: &str| -> std::result::Result<Vec<f64>, String> {
        split_list(s)
            .map(|t| t.parse::<f64>().map_err(|e| format!("init `{v}`: {t:?}: {e}")))
            .collect()
    };
    let index = |vals: &[f64]| -> std::result::Result<EigenIndex, String> {
        let whole = |x: f64| x.fract() == 0.0 && x.is_finite();
        if !vals.iter().all(|&x| whole(x)) || vals[0] < 1.0 || (vals.len() == 3 && vals[2] < 0.0) {
            return Err(format!("init `{v}`: mode indices must be integers with k >= 1"));
        }
        let idx = EigenIndex {
            k: vals[0] as usize,
            m: vals[1] as i64,
            nz: vals.get(2).map_or(0, |&x| x as usize),
        };
        idx.validate(d).map_err(|e| format!("init `{v}`: {e}"))?;
        Ok(idx)
    };
    let idx_len = if d == 3 { 3 } else { 2 };
    match kind {
        "gaussian" => {
            let center = nums(rest)?;
            if !center.is_empty() && center.len() != d {
                return Err(format!("gaussian center needs {d} coordinates, got {}", center.len()));
            }
            Ok(InitSpec::Gaussian { center })
        }
        "eigenmode" => {
            let vals = nums(rest)?;
            if vals.len() != idx_len {
                return Err(format!("eigenmode needs {idx_len} integers in {d}D, got `{rest}`"));
            }
            Ok(InitSpec::Eigenmode(index(&vals)?))
        }
        "mix" => {
            let mut terms = Vec::new();
            for term in rest.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
                let vals = nums(term)?;
                let coef = match vals.len() - vals.len().min(idx_len) {
                    1 => Complex64::new(vals[idx_len], 0.0),
                    2 => Complex64::new(vals[idx_len], vals[idx_len + 1]),
                    _ => return Err(format!("mix term `{term}` is not `index.. re [im]`")),
                };
                terms.push((index(&vals[..idx_len])?, coef));
            }
            if terms.is_empty() {
                return Err("mix needs at least one term".into());
            }
            Ok(InitSpec::Mix(terms))
        }
        "vortex_seed" => {
            let noise = match nums(rest)?.as_slice() {
                [] => DEFAULT_VORTEX_NOISE,
                [x] if x.is_finite() && *x >= 0.0 => *x,
                _ => return Err(format!("vortex_seed takes one amplitude >= 0, got `{rest}`")),
            };
            Ok(InitSpec::VortexSeed { noise })
        }
        "file" if !rest.is_empty() => Ok(InitSpec::File(PathBuf::from(rest))),
        "file" => Err("file needs a path".into()),
        other => Err(format!(
            "unknown init kind `{other}` (gaussian, eigenmode, mix, vortex_seed, file)"
        )),
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(&self.n, &self.half_lengths)?))
    }

    pub fn params(&self) -> Result<PhysParams> {
        PhysParams::new(self.omega.clone(), self.rotation, self.g, self.sigma, self.gamma, self.mass)
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig::new(self.dt, self.t_final, self.scheme)
            .with_record_every(self.record_every)
            .with_snapshot_every(self.snapshot_every)
    }

    /// The initial datum on `grid`, rescaled to mass `self.mass`.
    pub fn initial_state(&self, grid: &Arc<Grid>) -> Result<ComplexField> {
        let p = self.params()?;
        let w = self.omega.clone();
        let gaussian = |center: Vec<f64>| {
            ComplexField::from_fn(grid, move |x| {
                let e: f64 = (0..w.len()).map(|j| w[j] * (x[j] - center[j]).powi(2)).sum();
                Complex64::new((-0.5 * e).exp(), 0.0)
            })
        };
        let mut f = match &self.init {
            InitSpec::Gaussian { center } if center.is_empty() => gaussian(vec![0.0; self.d]),
            InitSpec::Gaussian { center } => gaussian(center.clone()),
            InitSpec::Eigenmode(i) => eigenfunction(*i, grid, &p)?,
            InitSpec::Mix(terms) => {
                let mut acc = ComplexField::zeros(grid);
                for (i, c) in terms {
                    acc = acc.axpy(*c, &eigenfunction(*i, grid, &p)?)?;
                }
                acc
            }
            InitSpec::VortexSeed { noise } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut f = gaussian(vec![0.0; self.d]);
                for z in f.data_mut() {
                    let u: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                    *z *= Complex64::from_polar(1.0, noise * u);
                }
                f
            }
            InitSpec::File(path) => {
                let (_, f) = super::read_snapshot_file(path)?;
                if f.grid().shape() != grid.shape() || f.grid().half_lengths() != grid.half_lengths() {
                    return Err(Error::GridMismatch);
                }
                ComplexField::from_vec(grid, f.into_data(), crate::grid::Space::Physical)?
            }
        };
        let m = f.norm_sqr();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::ZeroMass);
        }
        f.scale(Complex64::new((self.mass / m).sqrt(), 0.0));
        Ok(f)
    }

    /// Config text that parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let list = |v: &[String]| v.join(", ");
        let fl = |v: &[f64]| list(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        format!(
            "[grid]\nd = {}\nn = {}\nL = {}\n\n[phys]\nomega = {}\nOmega = {}\ng = {}\nsigma = {}\ngamma = {}\nmass = {}\n\n\
             [evolve]\ndt = {}\nT = {}\nscheme = {}\nrecord_every = {}\nsnapshot_every = {}\n\n\
             [init]\nkind = {}\nseed = {}\n\n[output]\ndir = {}\n",
            self.d,
            list(&self.n.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
            fl(&self.half_lengths),
            fl(&self.omega),
            self.rotation,
            self.g,
            self.sigma,
            self.gamma,
            self.mass,
            self.dt,
            self.t_final,
            self.scheme,
            self.record_every,
            self.snapshot_every,
            self.init,
            self.seed,
            self.output_dir.display(),
        )
    }
}
