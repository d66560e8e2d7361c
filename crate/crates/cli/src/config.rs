//! Run configuration: command-line flags over a flat `key = value` file over
//! built-in defaults.

use clap::{Args, ValueEnum};
use nilreturn::GridKind;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Invalid user input. Reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Uniform,
    Chebyshev,
}

impl From<Kind> for GridKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Uniform => GridKind::Uniform,
            Kind::Chebyshev => GridKind::ChebyshevLobatto,
        }
    }
}

/// Flags shared by every command. Lists are comma separated.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Number of series terms N
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Quadrature intervals M
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub grid_kind: Option<Kind>,
    /// Starting amplitudes for `verify`
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        conflicts_with = "epsilon_range"
    )]
    pub epsilon: Option<Vec<f64>>,
    /// `start:stop:count`, inclusive
    #[arg(long, global = true)]
    pub epsilon_range: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// Energy levels for `melnikov`
    #[arg(long = "T", global = true, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Start on the positive x-axis for `trace`
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// ODE tolerance, or the fixed-point step tolerance for `fixedpoint`
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Trajectory or solution samples to emit
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub order: usize,
    pub grid: usize,
    pub grid_kind: Kind,
    pub epsilon: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub t: Vec<f64>,
    pub eta: f64,
    pub tol: f64,
    pub samples: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            order: nilreturn::vseries::DEFAULT_ORDER,
            grid: nilreturn::grid::DEFAULT_INTERVALS,
            grid_kind: Kind::Uniform,
            epsilon: vec![0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45],
            alpha: vec![0.05],
            delta: vec![0.1],
            t: vec![0.25, 1.0, 2.0],
            eta: 1.0,
            tol: 1e-12,
            samples: 200,
            format: Format::Json,
            out: None,
        }
    }
}

pub const MAX_ORDER: usize = 24;

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| bad(format!("{key}: cannot parse '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|s| parse_num(key, s)).collect()
}

pub fn parse_range(v: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad(format!(
            "epsilon_range: expected start:stop:count, got '{v}'"
        )));
    };
    let (a, b): (f64, f64) = (
        parse_num("epsilon_range", a)?,
        parse_num("epsilon_range", b)?,
    );
    let n: usize = parse_num("epsilon_range", n)?;
    match n {
        0 => Err(bad("epsilon_range: count must be positive")),
        1 => Ok(vec![a]),
        _ => Ok((0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T, ConfigError> {
    T::from_str(v.trim(), true).map_err(|_| bad(format!("{key}: unknown value '{v}'")))
}

/// Reads `key = value` lines; `#` starts a comment. Keys use underscores or
/// dashes interchangeably.
pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("config {}: {e}", path.display())))?;
    parse_file(&text)
}

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(bad(format!("config line {}: expected key = value", i + 1)));
        };
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    fn apply_file(&mut self, file: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (k, v) in file {
            match k.as_str() {
                "order" => self.order = parse_num(k, v)?,
                "grid" => self.grid = parse_num(k, v)?,
                "grid_kind" => self.grid_kind = parse_enum(k, v)?,
                "epsilon" => self.epsilon = parse_list(k, v)?,
                "alpha" => self.alpha = parse_list(k, v)?,
                "delta" => self.delta = parse_list(k, v)?,
                "t" => self.t = parse_list(k, v)?,
                "eta" => self.eta = parse_num(k, v)?,
                "tol" => self.tol = parse_num(k, v)?,
                "samples" => self.samples = parse_num(k, v)?,
                "format" => self.format = parse_enum(k, v)?,
                "out" => self.out = Some(PathBuf::from(v)),
                "epsilon_range" => {}
                _ => return Err(bad(format!("config: unknown key '{k}'"))),
            }
        }
        // a range in the file wins over a list in the same file
        if let Some(r) = file.get("epsilon_range") {
            self.epsilon = parse_range(r)?;
        }
        Ok(())
    }

    fn apply_flags(&mut self, o: &Opts) -> Result<(), ConfigError> {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &o.$f { self.$f = v.clone(); } )* };
        }
        take!(order, grid, grid_kind, epsilon, alpha, delta, t, eta, tol, samples, format);
        if let Some(r) = &o.epsilon_range {
            self.epsilon = parse_range(r)?;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        Ok(())
    }

    pub fn resolve(opts: &Opts) -> Result<Self, ConfigError> {
        let mut s = Self::default();
        if let Some(path) = &opts.config {
            s.apply_file(&read_file(path)?)?;
        }
        s.apply_flags(opts)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(bad(format!(
                "order must be in 1..={MAX_ORDER}, got {}",
                self.order
            )));
        }
        if self.grid < 64 {
            return Err(bad(format!("grid must be at least 64, got {}", self.grid)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(bad(format!("tol must be positive, got {}", self.tol)));
        }
        for (name, list) in [
            ("epsilon", &self.epsilon),
            ("alpha", &self.alpha),
            ("delta", &self.delta),
            ("T", &self.t),
        ] {
            if list.is_empty() {
                return Err(bad(format!("{name}: empty list")));
            }
            if let Some(v) = list.iter().find(|v| !v.is_finite()) {
                return Err(bad(format!("{name}: non-finite value {v}")));
            }
        }
        if self.samples < 2 {
            return Err(bad("samples must be at least 2"));
        }
        Ok(())
    }

    /// Checks for the commands that integrate the ODE.
    pub fn require_ode_tol(&self) -> Result<(), ConfigError> {
        let (lo, hi) = nilreturn::ode::TOL_RANGE;
        if !(lo..=hi).contains(&self.tol) {
            return Err(bad(format!(
                "tol must be in [{lo:e}, {hi:e}] for ODE runs, got {:e}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn require_in(
        name: &str,
        values: &[f64],
        ok: impl Fn(f64) -> bool,
        domain: &str,
    ) -> Result<(), ConfigError> {
        match values.iter().find(|&&v| !ok(v)) {
            Some(v) => Err(bad(format!("{name} = {v} outside {domain}"))),
            None => Ok(()),
        }
    }
}
