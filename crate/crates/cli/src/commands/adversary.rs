//! The complying adversary against a configured skeptic.

use serde::Serialize;

use gtp_core::game::write_trace_csv;
use gtp_core::reality::Witness;
use gtp_core::{run_game, BSequence, ComplyingAdversary, GameState, RunOptions, Verdict};

use super::{create, write_json, CmdError, CmdResult, Experiment, Outcome, SCHEMA_VERSION};
use crate::config::ConfigError;
use crate::specs::{parse_b, RealitySpec, SkepticImpl};

/// Whether `sum 1/b_n` diverges; `None` for tables.
pub fn reciprocal_sum_diverges(b: &BSequence<f64>) -> Option<bool> {
    match b {
        BSequence::Power(p) => Some(*p <= 1.0),
        BSequence::NLogSquared => Some(false),
        BSequence::Table(_) => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessOut {
    pub n: u64,
    #[serde(rename = "S")]
    pub s: f64,
    pub b: f64,
}

impl From<Witness<f64>> for WitnessOut {
    fn from(w: Witness<f64>) -> Self {
        WitnessOut { n: w.n, s: w.s, b: w.b }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KroneckerOut {
    pub z: f64,
    pub min_y: f64,
    pub final_y: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub experiment: String,
    pub b: String,
    pub scheme: String,
    pub horizon: u64,
    pub rounds: u64,
    pub verdict: String,
    pub reciprocal_sum_diverges: Option<bool>,
    /// What the run can claim about `S_n / b_n`.
    pub claim: &'static str,
    pub witness: Option<WitnessOut>,
    pub sup_capital: f64,
    pub sup_cprod: f64,
    pub final_cprod: f64,
    pub l0: Option<f64>,
    /// `max (L_n - L_{n-1}) / L_{n-1}`.
    pub max_relative_l_increase: f64,
    pub l_monotone: bool,
    pub tolerance: f64,
    pub big_moves: u64,
    pub degenerate_since: Option<u64>,
    pub kronecker: Option<KroneckerOut>,
}

pub fn run_adversary(exp: &Experiment) -> CmdResult<(AdversaryReport, Outcome)> {
    let cfg = &exp.config;
    let RealitySpec::Adversary { b: b_spec } = &cfg.reality else {
        return Err(ConfigError::new("reality", "the adversary command needs reality = adversary,b=...").into());
    };
    let b = parse_b("reality", b_spec)?;
    let diverges = reciprocal_sum_diverges(&b);
    let mut adv = ComplyingAdversary::new(b.clone(), cfg.adversary_scheme)?.with_rule(cfg.degenerate).with_tolerance(cfg.adversary_tolerance);
    let mut skeptic = SkepticImpl::build(&cfg.skeptic, cfg.variant, cfg.horizon, &cfg.quadrature)?;
    let k0 = match &skeptic {
        SkepticImpl::Kronecker(k) => k.z(),
        _ => cfg.initial_capital,
    };
    let mut opts = RunOptions::new(cfg.horizon);
    opts.record_trace = cfg.write_trace;
    let run = match run_game(GameState::new(cfg.variant, k0)?, &mut skeptic, &mut adv, &opts, |_, _| {}) {
        Ok(r) => r,
        Err(e @ gtp_core::Error::AdversaryFault(_)) => return Err(CmdError::Core(e)),
        Err(e) => return Err(e.into()),
    };
    let verdict = match &run.verdict {
        Verdict::Completed => "completed".to_string(),
        Verdict::Exhausted => "exhausted".to_string(),
        Verdict::CollateralViolation { round, stake, x, .. } => format!("collateral violation in round {round} (stake {stake}, move {x})"),
    };
    let collateral = matches!(run.verdict, Verdict::CollateralViolation { .. });
    let l_monotone = adv.max_relative_increase() <= cfg.adversary_tolerance;
    let witness = adv.witness().map(WitnessOut::from);
    let claim = match (diverges, collateral) {
        (_, true) => "skeptic broke the collateral duty; no claim",
        (Some(true), _) => "sum 1/b_n diverges: a round with S_n >= b_n is guaranteed",
        _ => "sum 1/b_n converges or is unknown: no claim about S_n / b_n",
    };
    let report = AdversaryReport {
        schema_version: SCHEMA_VERSION,
        command: "adversary",
        experiment: exp.name.clone(),
        b: b.describe(),
        scheme: format!("{:?}", cfg.adversary_scheme),
        horizon: cfg.horizon,
        rounds: run.final_state.n,
        verdict,
        reciprocal_sum_diverges: diverges,
        claim,
        witness,
        sup_capital: adv.sup_capital().max(run.peak_capital),
        sup_cprod: adv.sup_cprod(),
        final_cprod: adv.cprod(),
        l0: adv.l0(),
        max_relative_l_increase: adv.max_relative_increase(),
        l_monotone,
        tolerance: cfg.adversary_tolerance,
        big_moves: adv.big_moves(),
        degenerate_since: adv.degenerate_since(),
        kronecker: skeptic.kronecker().map(|k| KroneckerOut { z: k.z(), min_y: k.min_y(), final_y: k.y() }),
    };
    let mut out = Outcome::new(!l_monotone);
    if cfg.write_trace {
        let path = exp.path("adversary.trace.csv")?;
        let mut w = create(&path)?;
        write_trace_csv(&mut w, &run.trace)?;
        std::io::Write::flush(&mut w)?;
        out.files.push(path);
    }
    let path = exp.path("adversary.json")?;
    write_json(&path, &report)?;
    out.files.push(path);
    out.messages.push(format!("{}: {} rounds, {}", report.b, report.rounds, report.verdict));
    match &report.witness {
        Some(w) => out.messages.push(format!("witness: S_{} = {} >= b = {}", w.n, w.s, w.b)),
        None => out.messages.push("no round with S_n >= b_n".into()),
    }
    out.messages.push(format!("sup K = {}, sup prod c = {}, L monotone: {}", report.sup_capital, report.sup_cprod, report.l_monotone));
    out.messages.push(report.claim.to_string());
    if diverges == Some(true) && !collateral && report.witness.is_none() {
        out.messages.push("warning: no witness within the horizon".into());
    }
    Ok((report, out))
}
