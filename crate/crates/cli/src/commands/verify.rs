//! Bound-verification campaigns: every enabled bound is checked against the
//! mixture capital at every round of every seed.

use rayon::prelude::*;
use serde::Serialize;

use gtp_core::bounds::{prop31_bound, remark41_bound, thm41_bound, thm43_bound};
use gtp_core::{build_staircase_tilt, BoundOutcome, BoundQuery, GameState, LeadingConstant, MixtureBank, Prior, StaircaseTilt};

use super::{write_json, CmdError, CmdResult, Experiment, Outcome, SCHEMA_VERSION};
use crate::config::{BoundsConfig, ConstantChoice, Theorem};
use crate::specs::{build_reality, RealitySpec};

pub fn leading_constant(c: ConstantChoice) -> LeadingConstant {
    match c {
        ConstantChoice::Printed => LeadingConstant::Printed,
        ConstantChoice::Sharp => LeadingConstant::Sharp,
        ConstantChoice::Override(k) => LeadingConstant::Override(k),
    }
}

/// One bound evaluation. `tilted` means it bounds the tilted prior's capital.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub theorem: Theorem,
    pub param: Option<f64>,
    pub tilted: bool,
    pub outcome: BoundOutcome<f64>,
}

/// All enabled bounds for one prior at `(S, A)`.
pub fn evaluate(theorems: &[Theorem], base: &Prior<f64>, tilt: Option<&StaircaseTilt<f64>>, q: BoundQuery<f64>, b: &BoundsConfig) -> Vec<BoundCheck> {
    let mut out = Vec::new();
    let k = leading_constant(b.constant);
    for &th in theorems {
        match th {
            Theorem::Thm41 => {
                for &c in &b.c_grid {
                    out.push(BoundCheck { theorem: th, param: Some(c), tilted: false, outcome: thm41_bound(base, q, c, k) });
                }
            }
            Theorem::Thm43 => out.push(BoundCheck { theorem: th, param: None, tilted: false, outcome: thm43_bound(base, q) }),
            Theorem::Remark41 => {
                if let Some(t) = tilt {
                    out.push(BoundCheck { theorem: th, param: None, tilted: true, outcome: remark41_bound(base, t, q) });
                }
            }
            Theorem::Prop31 => {
                for &d in &b.deltas {
                    out.push(BoundCheck { theorem: th, param: Some(d), tilted: false, outcome: prop31_bound(base, q, d) });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub seed: u64,
    pub round: u64,
    pub prior: String,
    pub param: Option<f64>,
    pub s: f64,
    pub a: f64,
    pub ln_capital: f64,
    pub ln_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremStats {
    pub theorem: &'static str,
    /// `(seed, round)` pairs where at least one parametrization applied.
    pub applicable_rounds: u64,
    pub checks: u64,
    pub violations: u64,
    /// `ln K - ln bound` over applicable checks.
    pub min_slack: Option<f64>,
    pub max_slack: Option<f64>,
    pub first_violation: Option<Violation>,
    pub verdict: &'static str,
}

impl TheoremStats {
    fn new(th: Theorem) -> Self {
        TheoremStats {
            theorem: th.name(),
            applicable_rounds: 0,
            checks: 0,
            violations: 0,
            min_slack: None,
            max_slack: None,
            first_violation: None,
            verdict: "",
        }
    }

    fn merge(&mut self, o: &TheoremStats) {
        self.applicable_rounds += o.applicable_rounds;
        self.checks += o.checks;
        self.violations += o.violations;
        self.min_slack = min_opt(self.min_slack, o.min_slack);
        self.max_slack = max_opt(self.max_slack, o.max_slack);
        if self.first_violation.is_none() {
            self.first_violation = o.first_violation.clone();
        }
    }

    fn note(&mut self, slack: f64) {
        self.checks += 1;
        self.min_slack = min_opt(self.min_slack, Some(slack));
        self.max_slack = max_opt(self.max_slack, Some(slack));
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub experiment: String,
    pub horizon: u64,
    pub seeds: usize,
    pub priors: Vec<String>,
    pub leading_constant: String,
    pub slack: f64,
    pub min_applicable: u64,
    pub theorems: Vec<TheoremStats>,
    pub verdict: &'static str,
    pub warnings: Vec<String>,
}

struct Setup {
    theorems: Vec<Theorem>,
    bases: Vec<Prior<f64>>,
    tilts: Vec<Option<StaircaseTilt<f64>>>,
    tilted: Vec<Prior<f64>>,
}

fn setup(exp: &Experiment, theorems: &[Theorem]) -> CmdResult<Setup> {
    let cfg = &exp.config;
    let bases = cfg.bounds.priors.iter().map(|p| p.build()).collect::<gtp_core::Result<Vec<_>>>()?;
    let mut tilts = Vec::new();
    let mut tilted = Vec::new();
    for b in &bases {
        if theorems.contains(&Theorem::Remark41) {
            let t = build_staircase_tilt(b, cfg.bounds.staircase_levels)?;
            tilted.push(Prior::tilted(b.clone(), t.clone()));
            tilts.push(Some(t));
        } else {
            tilts.push(None);
        }
    }
    Ok(Setup { theorems: theorems.to_vec(), bases, tilts, tilted })
}

fn run_seed(exp: &Experiment, su: &Setup, seed: u64) -> CmdResult<Vec<TheoremStats>> {
    let cfg = &exp.config;
    let mut all: Vec<&Prior<f64>> = su.bases.iter().collect();
    all.extend(su.tilted.iter());
    let mut bank = MixtureBank::new(&all, &cfg.quadrature)?;
    let mut reality = build_reality(&cfg.reality, seed, cfg.variant)?;
    // paths here do not react to the stake, so the state only tracks S and A
    let mut st = GameState::new(cfg.variant, 1.0)?;
    let mut stats: Vec<TheoremStats> = su.theorems.iter().map(|&t| TheoremStats::new(t)).collect();
    let ln_slack = (-cfg.bounds.slack).ln_1p();
    let nb = su.bases.len();
    for _ in 0..cfg.horizon {
        let Some(x) = reality.next_move(&st, 0.0)? else { break };
        st = st.play_round(0.0, x)?.0;
        bank.update(x);
        let q = BoundQuery { s: st.s, a: st.a };
        let mut applied = vec![false; stats.len()];
        for (i, base) in su.bases.iter().enumerate() {
            let ln_k = bank.log_capital_integral(i);
            let ln_kt = if su.tilts[i].is_some() { Some(bank.log_capital_integral(nb + i)) } else { None };
            for chk in evaluate(&su.theorems, base, su.tilts[i].as_ref(), q, &cfg.bounds) {
                let BoundOutcome::Value(v) = chk.outcome else { continue };
                let j = su.theorems.iter().position(|&t| t == chk.theorem).expect("enabled theorem");
                let cap = if chk.tilted { ln_kt.expect("tilt built") } else { ln_k };
                applied[j] = true;
                let s = &mut stats[j];
                s.note(v.slack(cap));
                if !(cap >= v.ln_rel + ln_slack) {
                    s.violations += 1;
                    if s.first_violation.is_none() {
                        s.first_violation = Some(Violation {
                            seed,
                            round: st.n,
                            prior: if chk.tilted { su.tilted[i].name() } else { base.name() },
                            param: chk.param,
                            s: st.s,
                            a: st.a,
                            ln_capital: cap,
                            ln_bound: v.ln_rel,
                        });
                    }
                }
            }
        }
        for (s, a) in stats.iter_mut().zip(applied) {
            s.applicable_rounds += u64::from(a);
        }
    }
    Ok(stats)
}

pub fn run_verify(exp: &Experiment, theorems: Option<&[Theorem]>) -> CmdResult<(VerifyReport, Outcome)> {
    let cfg = &exp.config;
    let theorems: Vec<Theorem> = match theorems {
        Some(t) => t.to_vec(),
        None if cfg.bounds.theorems.is_empty() => vec![Theorem::Thm41, Theorem::Thm43, Theorem::Remark41, Theorem::Prop31],
        None => cfg.bounds.theorems.clone(),
    };
    if matches!(cfg.reality, RealitySpec::Adversary { .. }) {
        return Err(CmdError::Config(crate::config::ConfigError::new("reality", "bound campaigns need a path that ignores the stake")));
    }
    let su = setup(exp, &theorems)?;
    let seeds = exp.seeds();
    let per_seed: Vec<CmdResult<Vec<TheoremStats>>> = seeds.par_iter().map(|&s| run_seed(exp, &su, s)).collect();
    let mut total: Vec<TheoremStats> = theorems.iter().map(|&t| TheoremStats::new(t)).collect();
    for r in per_seed {
        for (t, s) in total.iter_mut().zip(r?) {
            t.merge(&s);
        }
    }
    let mut warnings = Vec::new();
    let mut violated = false;
    let mut inconclusive = false;
    for t in &mut total {
        t.verdict = if t.violations > 0 {
            violated = true;
            "violated"
        } else if t.applicable_rounds < cfg.bounds.min_applicable {
            inconclusive = true;
            warnings.push(format!("{}: only {} applicable rounds (need {})", t.theorem, t.applicable_rounds, cfg.bounds.min_applicable));
            "inconclusive"
        } else {
            "pass"
        };
    }
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify-bounds",
        experiment: exp.name.clone(),
        horizon: cfg.horizon,
        seeds: seeds.len(),
        priors: su.bases.iter().map(|p| p.name()).collect(),
        leading_constant: format!("{:?}", cfg.bounds.constant),
        slack: cfg.bounds.slack,
        min_applicable: cfg.bounds.min_applicable,
        theorems: total,
        verdict: if violated {
            "violated"
        } else if inconclusive {
            "inconclusive"
        } else {
            "pass"
        },
        warnings: warnings.clone(),
    };
    let path = exp.path("verify.json")?;
    write_json(&path, &report)?;
    let mut out = Outcome::new(violated);
    for t in &report.theorems {
        let mut line = format!("{}: {} ({} applicable rounds, {} violations)", t.theorem, t.verdict, t.applicable_rounds, t.violations);
        if let Some(v) = &t.first_violation {
            line.push_str(&format!("; first at seed {} round {} ({})", v.seed, v.round, v.prior));
        }
        out.messages.push(line);
    }
    out.messages.extend(warnings.into_iter().map(|w| format!("warning: {w}")));
    out.files.push(path);
    Ok((report, out))
}
