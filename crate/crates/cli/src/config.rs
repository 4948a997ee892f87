//! Experiment files: `key = value` lines, `#` comments, `[section]` headers
//! that prefix the keys below them (`[bounds]` then `c = 0.1` is `bounds.c`).
//! Command-line `--set key=value` pairs override file keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use gtp_core::reality::{DegenerateRule, PayoffScheme};
use gtp_core::{GameVariant, QuadratureSpec};

use crate::specs::{parse_b, parse_prior, parse_reality, parse_skeptic, PriorSpec, RealitySpec, SkepticSpec};

pub const OUTPUT_DIR_ENV: &str = "GTP_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// Raw keys as read, with line numbers for messages.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub values: BTreeMap<String, String>,
    pub base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, base_dir: &Path) -> ConfigResult<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("line {}", i + 1);
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::new(&at, "unterminated section header"))?.trim();
                section = if name.is_empty() { String::new() } else { format!("{name}.") };
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::new(&at, format!("expected `key = value`, got `{line}`")))?;
            let key = format!("{section}{}", k.trim());
            if k.trim().is_empty() {
                return Err(ConfigError::new(&at, "empty key"));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::new(key, format!("duplicate key ({at})")));
            }
        }
        Ok(RawConfig { values, base_dir: base_dir.to_path_buf() })
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Applies `key=value` overrides.
    pub fn set_all(&mut self, overrides: &[String]) -> ConfigResult<()> {
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::new(o.as_str(), "override must be key=value"))?;
            self.values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> ConfigResult<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_num(key, v),
        }
    }
}

pub fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> ConfigResult<T> {
    // integers may be written as 1e5
    if let Ok(x) = v.parse::<T>() {
        return Ok(x);
    }
    if let Ok(f) = v.parse::<f64>() {
        if f.fract() == 0.0 && f.abs() < 9.0e15 {
            if let Ok(x) = format!("{}", f as i64).parse::<T>() {
                return Ok(x);
            }
        }
    }
    Err(ConfigError::new(key, format!("cannot parse `{v}` as a number")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> ConfigResult<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

/// `1,2,3` or `a..b` (half-open).
pub fn parse_seeds(key: &str, v: &str) -> ConfigResult<Vec<u64>> {
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = parse_num(key, a.trim())?;
        let b: u64 = parse_num(key, b.trim())?;
        if b <= a {
            return Err(ConfigError::new(key, "empty seed range"));
        }
        return Ok((a..b).collect());
    }
    parse_list(key, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theorem {
    Thm41,
    Thm43,
    Remark41,
    Prop31,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Thm41 => "thm41",
            Theorem::Thm43 => "thm43",
            Theorem::Remark41 => "remark41",
            Theorem::Prop31 => "prop31",
        }
    }

    pub fn parse_set(key: &str, v: &str) -> ConfigResult<Vec<Theorem>> {
        let mut out = Vec::new();
        for s in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let t = match s {
                "thm41" => Theorem::Thm41,
                "thm43" => Theorem::Thm43,
                "remark41" => Theorem::Remark41,
                "prop31" => Theorem::Prop31,
                "none" => continue,
                other => return Err(ConfigError::new(key, format!("unknown theorem `{other}` (thm41, thm43, remark41, prop31)"))),
            };
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Leading constant of thm41 as configured; a number replaces `1/6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantChoice {
    Printed,
    Sharp,
    Override(f64),
}

#[derive(Debug, Clone)]
pub struct BoundsConfig {
    pub theorems: Vec<Theorem>,
    pub c_grid: Vec<f64>,
    pub deltas: Vec<f64>,
    pub priors: Vec<PriorSpec>,
    pub min_applicable: u64,
    pub slack: f64,
    pub constant: ConstantChoice,
    pub staircase_levels: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub variant: GameVariant,
    pub horizon: u64,
    pub initial_capital: f64,
    pub seeds: Vec<u64>,
    pub checkpoints: Vec<u64>,
    pub skeptic: SkepticSpec,
    pub reality: RealitySpec,
    pub quadrature: QuadratureSpec,
    pub bounds: BoundsConfig,
    pub output_dir: PathBuf,
    pub write_trace: bool,
    pub rates_a: f64,
    pub rates_b: usize,
    pub rates_gamma: f64,
    pub adversary_scheme: PayoffScheme,
    pub degenerate: DegenerateRule,
    pub adversary_tolerance: f64,
}

const KNOWN: &[&str] = &[
    "variant",
    "horizon",
    "initial_capital",
    "seeds",
    "checkpoints",
    "skeptic",
    "reality",
    "quadrature.t_max",
    "quadrature.panels",
    "quadrature.order",
    "quadrature.ratio",
    "bounds",
    "bounds.theorems",
    "bounds.c",
    "bounds.delta",
    "bounds.priors",
    "bounds.min_applicable",
    "bounds.slack",
    "bounds.constant",
    "bounds.staircase_levels",
    "output.dir",
    "output.trace",
    "rates.a",
    "rates.b",
    "rates.gamma",
    "adversary.scheme",
    "adversary.window",
    "adversary.threshold",
    "adversary.tolerance",
];

/// Powers of ten up to the horizon, plus the horizon itself.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 10u64;
    while c < horizon {
        out.push(c);
        c = c.saturating_mul(10);
    }
    out.push(horizon);
    out
}

fn parse_checkpoints(key: &str, v: &str, horizon: u64) -> ConfigResult<Vec<u64>> {
    let v = v.trim();
    let mut out: Vec<u64> = if let Some(k) = v.strip_prefix("every:") {
        let k: u64 = parse_num(key, k)?;
        if k == 0 {
            return Err(ConfigError::new(key, "checkpoint step must be positive"));
        }
        (1..=horizon / k).map(|i| i * k).collect()
    } else if v == "decades" {
        default_checkpoints(horizon)
    } else {
        parse_list(key, v)?
    };
    out.retain(|&c| c >= 1 && c <= horizon);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> ConfigResult<Self> {
        for k in raw.values.keys() {
            if !KNOWN.contains(&k.as_str()) {
                return Err(ConfigError::new(k.as_str(), "unknown key"));
            }
        }
        let variant = match raw.get("variant").unwrap_or("oufg").to_ascii_lowercase().as_str() {
            "oufg" => GameVariant::Oufg,
            "bfg" => GameVariant::Bfg,
            other => return Err(ConfigError::new("variant", format!("unknown game `{other}` (oufg, bfg)"))),
        };
        let horizon: u64 = raw.num("horizon", 1000)?;
        if horizon == 0 {
            return Err(ConfigError::new("horizon", "must be at least 1"));
        }
        let initial_capital: f64 = raw.num("initial_capital", 1.0)?;
        if !(initial_capital > 0.0 && initial_capital.is_finite()) {
            return Err(ConfigError::new("initial_capital", "must be positive"));
        }
        let seeds = match raw.get("seeds") {
            Some(v) => parse_seeds("seeds", v)?,
            None => vec![0],
        };
        if seeds.is_empty() {
            return Err(ConfigError::new("seeds", "no seeds given"));
        }
        let checkpoints = match raw.get("checkpoints") {
            Some(v) => parse_checkpoints("checkpoints", v, horizon)?,
            None => default_checkpoints(horizon),
        };
        let skeptic = parse_skeptic("skeptic", raw.get("skeptic").unwrap_or("bayes:uniform"))?;
        let reality = parse_reality("reality", raw.get("reality").unwrap_or("iid:rademacher"), &raw.base_dir, variant)?;
        let d = QuadratureSpec::default();
        let quadrature = QuadratureSpec {
            t_max: raw.num("quadrature.t_max", d.t_max)?,
            panels: raw.num("quadrature.panels", d.panels)?,
            order: raw.num("quadrature.order", d.order)?,
            ratio: raw.num("quadrature.ratio", d.ratio)?,
        };
        quadrature.validate().map_err(|e| ConfigError::new("quadrature", e.to_string()))?;

        let theorems = match raw.get("bounds.theorems").or_else(|| raw.get("bounds")) {
            Some(v) => Theorem::parse_set("bounds.theorems", v)?,
            None => Vec::new(),
        };
        let c_grid = match raw.get("bounds.c") {
            Some(v) => parse_list("bounds.c", v)?,
            None => vec![0.1, 0.2, 0.4],
        };
        let deltas = match raw.get("bounds.delta") {
            Some(v) => parse_list("bounds.delta", v)?,
            None => vec![0.01, 0.02, 0.04],
        };
        let priors = match raw.get("bounds.priors") {
            Some(v) => v.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_prior("bounds.priors", s)).collect::<ConfigResult<Vec<_>>>()?,
            None => vec![PriorSpec::Uniform, PriorSpec::Power(0.5)],
        };
        let constant = match raw.get("bounds.constant").unwrap_or("printed") {
            "printed" => ConstantChoice::Printed,
            "sharp" => ConstantChoice::Sharp,
            v => ConstantChoice::Override(parse_num("bounds.constant", v)?),
        };
        let bounds = BoundsConfig {
            theorems,
            c_grid,
            deltas,
            priors,
            min_applicable: raw.num("bounds.min_applicable", 100)?,
            slack: raw.num("bounds.slack", 1e-6)?,
            constant,
            staircase_levels: raw.num("bounds.staircase_levels", 60)?,
        };
        let output_dir = match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) => PathBuf::from(d),
            None => PathBuf::from(raw.get("output.dir").unwrap_or("out")),
        };
        let write_trace = match raw.get("output.trace").unwrap_or("true") {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            other => return Err(ConfigError::new("output.trace", format!("expected true/false, got `{other}`"))),
        };
        let adversary_scheme = match raw.get("adversary.scheme").unwrap_or("hedged") {
            "hedged" => PayoffScheme::HedgedBet,
            "split" => PayoffScheme::SplitBet,
            other => return Err(ConfigError::new("adversary.scheme", format!("unknown scheme `{other}` (hedged, split)"))),
        };
        let dr = DegenerateRule::default();
        let degenerate = DegenerateRule { window: raw.num("adversary.window", dr.window)?, threshold: raw.num("adversary.threshold", dr.threshold)? };
        let rates_b: usize = raw.num("rates.b", 4)?;
        let rates_a: f64 = raw.num("rates.a", 0.5)?;
        if !(0.0..1.0).contains(&rates_a) {
            return Err(ConfigError::new("rates.a", "power exponent must lie in [0, 1)"));
        }
        // reject an unusable b sequence early
        if let RealitySpec::Adversary { b } = &reality {
            parse_b("reality.b", b)?;
        }
        Ok(ExperimentConfig {
            variant,
            horizon,
            initial_capital,
            seeds,
            checkpoints,
            skeptic,
            reality,
            quadrature,
            bounds,
            output_dir,
            write_trace,
            rates_a,
            rates_b,
            rates_gamma: raw.num("rates.gamma", 0.5)?,
            adversary_scheme,
            degenerate,
            adversary_tolerance: raw.num("adversary.tolerance", 1e-9)?,
        })
    }

    pub fn load(path: &Path, overrides: &[String]) -> ConfigResult<Self> {
        let mut raw = RawConfig::load(path)?;
        raw.set_all(overrides)?;
        Self::from_raw(&raw)
    }

    pub fn parse_str(text: &str, overrides: &[String]) -> ConfigResult<Self> {
        let mut raw = RawConfig::parse(text, Path::new("."))?;
        raw.set_all(overrides)?;
        Self::from_raw(&raw)
    }
}
