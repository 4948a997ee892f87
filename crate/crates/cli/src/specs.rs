//! Parsers for the short strategy, prior and function specs used in config
//! files and on the command line.

use std::path::Path;

use gtp_core::reality::{DriftTracking, IidDist, SqrtLogTracking};
use gtp_core::skeptic::MixtureStrategy;
use gtp_core::upper_class::{apply_g, corollary_psi};
use gtp_core::{
    BSequence, ConstantProportion, DiscreteMixture, GameState, GameVariant, Kronecker, Prior, QuadratureSpec, RealityStrategy, Strategy, UpperClassFunction,
};

use crate::config::{parse_num, ConfigError, ConfigResult};

#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Uniform,
    Power(f64),
    Lil(Option<f64>),
    Efkp { b: usize, gamma: f64, eps0: Option<f64> },
}

impl PriorSpec {
    pub fn build(&self) -> gtp_core::Result<Prior<f64>> {
        match *self {
            PriorSpec::Uniform => Ok(Prior::uniform()),
            PriorSpec::Power(a) => Prior::power(a),
            PriorSpec::Lil(None) => Ok(Prior::lil_default()),
            PriorSpec::Lil(Some(e)) => Prior::lil(e),
            PriorSpec::Efkp { b, gamma, eps0: None } => Prior::efkp_default(b, gamma),
            PriorSpec::Efkp { b, gamma, eps0: Some(e) } => Prior::efkp(b, gamma, e),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PriorSpec::Uniform => "uniform".into(),
            PriorSpec::Power(a) => format!("power:{a}"),
            PriorSpec::Lil(None) => "lil".into(),
            PriorSpec::Lil(Some(e)) => format!("lil:{e}"),
            PriorSpec::Efkp { b, gamma, eps0: None } => format!("efkp:{b},{gamma}"),
            PriorSpec::Efkp { b, gamma, eps0: Some(e) } => format!("efkp:{b},{gamma},{e}"),
        }
    }

    /// Power exponent, `0` for the uniform prior; `None` otherwise.
    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            PriorSpec::Uniform => Some(0.0),
            PriorSpec::Power(a) => Some(*a),
            _ => None,
        }
    }
}

/// `uniform`, `power:A`, `lil[:EPS0]`, `efkp:B,GAMMA[,EPS0]`.
pub fn parse_prior(key: &str, s: &str) -> ConfigResult<PriorSpec> {
    let (head, arg) = split_head(s);
    let spec = match head {
        "uniform" => PriorSpec::Uniform,
        "power" => PriorSpec::Power(parse_num(key, arg.ok_or_else(|| ConfigError::new(key, "power needs an exponent, e.g. power:0.5"))?)?),
        "lil" => PriorSpec::Lil(arg.map(|a| parse_num(key, a)).transpose()?),
        "efkp" => {
            let a = arg.ok_or_else(|| ConfigError::new(key, "efkp needs b and gamma, e.g. efkp:4,0.5"))?;
            let parts: Vec<&str> = a.split(',').map(str::trim).collect();
            if parts.len() < 2 || parts.len() > 3 {
                return Err(ConfigError::new(key, "efkp takes b,gamma[,eps0]"));
            }
            PriorSpec::Efkp { b: parse_num(key, parts[0])?, gamma: parse_num(key, parts[1])?, eps0: parts.get(2).map(|e| parse_num(key, e)).transpose()? }
        }
        other => return Err(ConfigError::new(key, format!("unknown prior `{other}` (uniform, power:a, lil, efkp:b,gamma)"))),
    };
    spec.build().map_err(|e| ConfigError::new(key, e.to_string()))?;
    Ok(spec)
}

fn split_head(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (s.trim(), None),
    }
}

/// Splits `head,k=v,k=v`.
fn split_opts<'a>(key: &str, s: &'a str) -> ConfigResult<(&'a str, Vec<(&'a str, &'a str)>)> {
    let mut parts = s.split(',');
    let head = parts.next().unwrap_or("").trim();
    let mut opts = Vec::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| ConfigError::new(key, format!("option `{p}` must be k=v")))?;
        opts.push((k.trim(), v.trim()));
    }
    Ok((head, opts))
}

/// `n`, `n^P`, `nlog2`, or `table:B1 B2 ...`.
pub fn parse_b(key: &str, s: &str) -> ConfigResult<BSequence<f64>> {
    let s = s.trim();
    let b = if s == "n" {
        BSequence::Power(1.0)
    } else if let Some(p) = s.strip_prefix("n^") {
        BSequence::Power(parse_num(key, p)?)
    } else if s == "nlog2" {
        BSequence::NLogSquared
    } else if let Some(t) = s.strip_prefix("table:") {
        BSequence::Table(t.split_whitespace().map(|v| parse_num(key, v)).collect::<ConfigResult<Vec<f64>>>()?)
    } else {
        return Err(ConfigError::new(key, format!("unknown b sequence `{s}` (n, n^p, nlog2, table:...)")));
    };
    b.validate().map_err(|e| ConfigError::new(key, e.to_string()))?;
    Ok(b)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiscreteSpec {
    Canonical,
    TwoSided,
    Atoms(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkepticSpec {
    Bayes(PriorSpec),
    Constant(f64),
    Discrete(DiscreteSpec),
    Kronecker {
        b: String,
        z: Option<f64>,
    },
    /// A fixed stake `M` every round, whatever the capital.
    FixedStake(f64),
}

/// `bayes:PRIOR`, `constant:EPS`, `discrete:canonical|two-sided|E@W/E@W...`,
/// `kronecker,b=SEQ[,z=Z]`, `stake:M`.
pub fn parse_skeptic(key: &str, s: &str) -> ConfigResult<SkepticSpec> {
    let (head, opts) = split_opts(key, s)?;
    let (kind, arg) = split_head(head);
    let spec = match kind {
        "bayes" => SkepticSpec::Bayes(parse_prior(key, arg.unwrap_or("uniform"))?),
        "constant" => SkepticSpec::Constant(parse_num(key, arg.ok_or_else(|| ConfigError::new(key, "constant needs a proportion"))?)?),
        "discrete" => SkepticSpec::Discrete(match arg.unwrap_or("canonical") {
            "canonical" => DiscreteSpec::Canonical,
            "two-sided" => DiscreteSpec::TwoSided,
            atoms => DiscreteSpec::Atoms(
                atoms
                    .split('/')
                    .map(|a| {
                        let (e, w) = a.split_once('@').ok_or_else(|| ConfigError::new(key, format!("atom `{a}` must be eps@weight")))?;
                        Ok((parse_num(key, e.trim())?, parse_num(key, w.trim())?))
                    })
                    .collect::<ConfigResult<Vec<_>>>()?,
            ),
        }),
        "kronecker" => {
            let b = opts.iter().find(|o| o.0 == "b").map(|o| o.1.to_string()).unwrap_or_else(|| "n^2".into());
            parse_b(key, &b)?;
            let z = opts.iter().find(|o| o.0 == "z").map(|o| parse_num(key, o.1)).transpose()?;
            SkepticSpec::Kronecker { b, z }
        }
        "stake" => SkepticSpec::FixedStake(parse_num(key, arg.ok_or_else(|| ConfigError::new(key, "stake needs a value"))?)?),
        other => return Err(ConfigError::new(key, format!("unknown skeptic `{other}` (bayes, constant, discrete, kronecker, stake)"))),
    };
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RealitySpec {
    Script(Vec<f64>),
    Iid { dist: IidDist, seed: Option<u64> },
    Adversary { b: String },
    Drift(f64),
    SqrtLog { c: f64, large_moves: bool },
}

impl RealitySpec {
    pub fn is_random(&self) -> bool {
        matches!(self, RealitySpec::Iid { .. })
    }
}

fn read_script(key: &str, path: &Path) -> ConfigResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(key, format!("cannot read script {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, tok) in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).enumerate() {
        match tok.parse::<f64>() {
            Ok(x) => out.push(x),
            // a header first
            Err(_) if i == 0 => {}
            Err(_) => return Err(ConfigError::new(key, format!("script entry `{tok}` is not a number"))),
        }
    }
    Ok(out)
}

/// `script:PATH`, `moves:X X ...`, `iid:rademacher|shifted:D|uniform:U[,seed=S]`,
/// `adversary[,b=SEQ]`, `drift:D`, `sqrtlog:C[,large]`.
pub fn parse_reality(key: &str, s: &str, base: &Path, variant: GameVariant) -> ConfigResult<RealitySpec> {
    let mut parts = s.split(',');
    let head = parts.next().unwrap_or("").trim();
    let rest: Vec<&str> = parts.map(str::trim).collect();
    let opt = |name: &str| rest.iter().find_map(|p| p.split_once('=').filter(|(k, _)| k.trim() == name).map(|(_, v)| v.trim()));
    let flag = |name: &str| rest.contains(&name);
    let (kind, arg) = split_head(head);
    let spec = match kind {
        "script" => {
            let p = arg.ok_or_else(|| ConfigError::new(key, "script needs a CSV path"))?;
            let path = base.join(p);
            RealitySpec::Script(read_script(key, &path)?)
        }
        "moves" => RealitySpec::Script(arg.unwrap_or("").split_whitespace().map(|v| parse_num(key, v)).collect::<ConfigResult<Vec<f64>>>()?),
        "iid" => {
            let a = arg.ok_or_else(|| ConfigError::new(key, "iid needs a distribution"))?;
            let (d, p) = split_head(a);
            let dist = match d {
                "rademacher" => IidDist::Rademacher,
                "shifted" => IidDist::ShiftedRademacher(parse_num(key, p.ok_or_else(|| ConfigError::new(key, "shifted needs a mean, e.g. shifted:0.05"))?)?),
                "uniform" => IidDist::UniformOn(parse_num(key, p.unwrap_or("1"))?),
                other => return Err(ConfigError::new(key, format!("unknown distribution `{other}` (rademacher, shifted:d, uniform:u)"))),
            };
            let seed = opt("seed").map(|v| parse_num(key, v)).transpose()?;
            RealitySpec::Iid { dist, seed }
        }
        "adversary" => RealitySpec::Adversary { b: opt("b").unwrap_or("n").to_string() },
        "drift" => RealitySpec::Drift(parse_num(key, arg.ok_or_else(|| ConfigError::new(key, "drift needs delta"))?)?),
        "sqrtlog" => RealitySpec::SqrtLog { c: parse_num(key, arg.unwrap_or("1.2"))?, large_moves: flag("large") },
        other => return Err(ConfigError::new(key, format!("unknown reality `{other}` (script, moves, iid, adversary, drift, sqrtlog)"))),
    };
    match &spec {
        RealitySpec::Script(xs) => {
            for (i, &x) in xs.iter().enumerate() {
                variant.check_move(x).map_err(|e| ConfigError::new(key, format!("script entry {}: {e}", i + 1)))?;
            }
        }
        RealitySpec::Iid { dist, .. } => dist.validate(variant).map_err(|e| ConfigError::new(key, e.to_string()))?,
        RealitySpec::Adversary { b } => {
            if variant != GameVariant::Oufg {
                return Err(ConfigError::new(key, "the adversary plays the one-sided game"));
            }
            parse_b(key, b)?;
        }
        RealitySpec::SqrtLog { large_moves: true, .. } if variant != GameVariant::Oufg => {
            return Err(ConfigError::new(key, "large tracking moves need the one-sided game"));
        }
        _ => {}
    }
    Ok(spec)
}

/// Constant stake, possibly negative; used to exercise the collateral rule.
#[derive(Debug, Clone, Copy)]
pub struct FixedStake(pub f64);

impl Strategy<f64> for FixedStake {
    fn stake(&mut self, _state: &GameState<f64>) -> f64 {
        self.0
    }

    fn observe(&mut self, _x: f64) {}
}

#[allow(clippy::large_enum_variant)]
pub enum SkepticImpl {
    Mixture(MixtureStrategy<f64>),
    Constant(ConstantProportion<f64>),
    Kronecker(Kronecker<f64>),
    Fixed(FixedStake),
}

impl SkepticImpl {
    pub fn build(spec: &SkepticSpec, variant: GameVariant, horizon: u64, quad: &QuadratureSpec) -> gtp_core::Result<Self> {
        Ok(match spec {
            SkepticSpec::Bayes(p) => SkepticImpl::Mixture(MixtureStrategy::bayes(&p.build()?, quad)?),
            SkepticSpec::Constant(e) => SkepticImpl::Constant(ConstantProportion::new(*e, variant)?),
            SkepticSpec::Discrete(d) => {
                let mix = match d {
                    DiscreteSpec::Canonical => DiscreteMixture::canonical_one_sided(),
                    DiscreteSpec::TwoSided => DiscreteMixture::new(DiscreteMixture::canonical_two_sided().atoms, variant)?,
                    DiscreteSpec::Atoms(a) => DiscreteMixture::new(a.clone(), variant)?,
                };
                SkepticImpl::Mixture(MixtureStrategy::discrete(&mix))
            }
            SkepticSpec::Kronecker { b, z } => {
                let b = parse_b("skeptic", b).map_err(|e| gtp_core::Error::InvalidParameter(e.to_string()))?;
                SkepticImpl::Kronecker(Kronecker::new(b, horizon, *z)?)
            }
            SkepticSpec::FixedStake(m) => SkepticImpl::Fixed(FixedStake(*m)),
        })
    }

    pub fn mixture(&self) -> Option<&MixtureStrategy<f64>> {
        match self {
            SkepticImpl::Mixture(m) => Some(m),
            _ => None,
        }
    }

    pub fn kronecker(&self) -> Option<&Kronecker<f64>> {
        match self {
            SkepticImpl::Kronecker(k) => Some(k),
            _ => None,
        }
    }

    /// Initial capital this strategy is defined for, if it fixes one.
    pub fn natural_initial_capital(&self) -> Option<f64> {
        match self {
            SkepticImpl::Mixture(m) => Some(m.ln_initial().exp()),
            SkepticImpl::Kronecker(k) => Some(k.z()),
            _ => None,
        }
    }
}

impl Strategy<f64> for SkepticImpl {
    fn stake(&mut self, st: &GameState<f64>) -> f64 {
        match self {
            SkepticImpl::Mixture(m) => m.stake(st),
            SkepticImpl::Constant(c) => c.stake(st),
            SkepticImpl::Kronecker(k) => k.stake(st),
            SkepticImpl::Fixed(f) => f.stake(st),
        }
    }

    fn observe(&mut self, x: f64) {
        match self {
            SkepticImpl::Mixture(m) => m.observe(x),
            SkepticImpl::Constant(c) => c.observe(x),
            SkepticImpl::Kronecker(k) => k.observe(x),
            SkepticImpl::Fixed(f) => f.observe(x),
        }
    }
}

/// Reality for a seed; the adversary is built by the adversary command.
pub fn build_reality(spec: &RealitySpec, seed: u64, variant: GameVariant) -> gtp_core::Result<Box<dyn RealityStrategy<f64>>> {
    Ok(match spec {
        RealitySpec::Script(xs) => Box::new(gtp_core::ScriptedPath::new(xs.clone(), variant)?),
        RealitySpec::Iid { dist, seed: fixed } => Box::new(gtp_core::IidSampler::new(*dist, fixed.unwrap_or(seed), variant)?),
        RealitySpec::Drift(d) => Box::new(DriftTracking { delta: *d }),
        RealitySpec::SqrtLog { c, large_moves } => Box::new(SqrtLogTracking { c: *c, large_moves: *large_moves }),
        RealitySpec::Adversary { .. } => return Err(gtp_core::Error::InvalidParameter("the adversary is only available through the adversary command".into())),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    Corollary,
    /// `sum:K*C+K*C`: `psi^2 = sum C ln_K lambda`.
    Sum(Vec<(usize, f64)>),
    SqrtLogLog(f64),
    Constant(f64),
    Efkp(usize, f64),
    OfPrior(PriorSpec),
}

/// `corollary`, `sum:2*2+3*4`, `loglog:C`, `const:C`, `efkp:B,GAMMA`, `g:PRIOR`.
pub fn parse_psi(key: &str, s: &str) -> ConfigResult<PsiSpec> {
    let (head, arg) = split_head(s);
    let need = |what: &str| arg.ok_or_else(|| ConfigError::new(key, format!("{head} needs {what}")));
    let spec = match head {
        "corollary" => PsiSpec::Corollary,
        "sum" => PsiSpec::Sum(
            need("terms like 2*2+3*4")?
                .split('+')
                .map(|t| {
                    let (k, c) = t.split_once('*').ok_or_else(|| ConfigError::new(key, format!("term `{t}` must be level*coefficient")))?;
                    Ok((parse_num(key, k.trim())?, parse_num(key, c.trim())?))
                })
                .collect::<ConfigResult<Vec<_>>>()?,
        ),
        "loglog" => PsiSpec::SqrtLogLog(parse_num(key, need("a coefficient")?)?),
        "const" => PsiSpec::Constant(parse_num(key, need("a value")?)?),
        "efkp" => {
            let a = need("b,gamma")?;
            let (b, g) = a.split_once(',').ok_or_else(|| ConfigError::new(key, "efkp takes b,gamma"))?;
            PsiSpec::Efkp(parse_num(key, b.trim())?, parse_num(key, g.trim())?)
        }
        "g" => PsiSpec::OfPrior(parse_prior(key, need("a prior")?)?),
        other => return Err(ConfigError::new(key, format!("unknown function `{other}` (corollary, sum, loglog, const, efkp, g)"))),
    };
    spec.build().map_err(|e| ConfigError::new(key, e.to_string()))?;
    Ok(spec)
}

impl PsiSpec {
    pub fn build(&self) -> gtp_core::Result<UpperClassFunction<f64>> {
        match self {
            PsiSpec::Corollary => Ok(corollary_psi()),
            PsiSpec::Sum(t) => UpperClassFunction::iterated_log_sum(t.clone()),
            PsiSpec::SqrtLogLog(c) => UpperClassFunction::sqrt_log_log(*c),
            PsiSpec::Constant(c) => UpperClassFunction::constant(*c),
            PsiSpec::Efkp(b, g) => UpperClassFunction::efkp(*b, *g),
            PsiSpec::OfPrior(p) => Ok(apply_g(&p.build()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(parse_prior("k", "power:0.5").unwrap(), PriorSpec::Power(0.5));
        assert!(parse_prior("k", "power:1.5").is_err());
        assert_eq!(parse_skeptic("k", "kronecker,b=n^2").unwrap(), SkepticSpec::Kronecker { b: "n^2".into(), z: None });
        assert_eq!(parse_skeptic("k", "discrete:0.5@0.5/0.25@0.5").unwrap(), SkepticSpec::Discrete(DiscreteSpec::Atoms(vec![(0.5, 0.5), (0.25, 0.5)])));
        let r = parse_reality("k", "iid:shifted:0.05,seed=3", Path::new("."), GameVariant::Oufg).unwrap();
        assert_eq!(r, RealitySpec::Iid { dist: IidDist::ShiftedRademacher(0.05), seed: Some(3) });
        assert!(parse_reality("k", "moves:1 -2", Path::new("."), GameVariant::Oufg).is_err());
        assert_eq!(parse_reality("k", "sqrtlog:1.2,large", Path::new("."), GameVariant::Oufg).unwrap(), RealitySpec::SqrtLog { c: 1.2, large_moves: true });
        assert_eq!(parse_psi("k", "sum:2*2+3*4").unwrap(), PsiSpec::Sum(vec![(2, 2.0), (3, 4.0)]));
        assert!(parse_b("k", "table:1 0.5").is_err());
    }
}
