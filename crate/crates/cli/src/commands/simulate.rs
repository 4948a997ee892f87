//! One game per seed: full trace to CSV, checkpoints and summary to JSON.

use serde::Serialize;

use gtp_core::game::{write_trace_csv, SelfNormalized};
use gtp_core::{build_staircase_tilt, BSequence, BoundQuery, GameState, MixtureStrategy, Prior, RoundRecord, StaircaseTilt, Strategy};

use super::verify::evaluate;
use super::{create, write_json, CmdResult, Experiment, Outcome, SCHEMA_VERSION};
use crate::config::Theorem;
use crate::specs::{build_reality, SkepticImpl, SkepticSpec};

/// Largest tolerated `|ln K(recursive) - ln K(integral)|`.
pub const IDENTITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BoundEntry {
    pub theorem: &'static str,
    pub param: Option<f64>,
    pub applicable: bool,
    pub reason: Option<String>,
    pub ln_bound: Option<f64>,
    pub ln_capital: Option<f64>,
    pub slack: Option<f64>,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint {
    pub n: u64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// Proportion used in round `n`.
    pub eps: Option<f64>,
    /// `ln K^pi_n` of the mixture, without the prior's scale constant.
    pub ln_mixture_capital: Option<f64>,
    pub ratios: SelfNormalized<f64>,
    pub bounds: Vec<BoundEntry>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct MaxRatios {
    pub slln: Option<f64>,
    pub sqrtlog: Option<f64>,
    pub lil: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KroneckerSummary {
    pub z: f64,
    pub min_y: f64,
    pub final_y: f64,
    /// `max |S_n| / b_n` over the last tenth of the rounds.
    pub max_abs_s_over_b_last_decade: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub rounds: u64,
    pub verdict: String,
    pub ruin_round: Option<u64>,
    pub capital_max: f64,
    pub capital_min: f64,
    pub max_ratios: MaxRatios,
    pub bound_violations: u64,
    /// Largest `|ln K(recursive) - ln K(integral)|` seen at checkpoints.
    pub identity_max_gap: Option<f64>,
    pub kronecker: Option<KroneckerSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedReport {
    pub seed: Option<u64>,
    pub trace: Option<String>,
    pub checkpoints: Vec<Checkpoint>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub experiment: String,
    pub variant: &'static str,
    pub horizon: u64,
    pub initial_capital: f64,
    pub runs: Vec<SeedReport>,
}

fn upd(m: &mut Option<f64>, v: Option<f64>) {
    if let Some(v) = v {
        *m = Some(m.map_or(v, |c| c.max(v)));
    }
}

/// Prior and tilt for the bound columns, when the skeptic is Bayesian.
struct BoundSide {
    prior: Prior<f64>,
    tilt: Option<StaircaseTilt<f64>>,
    shadow: Option<MixtureStrategy<f64>>,
}

pub struct SeedRun {
    pub report: SeedReport,
    pub trace: Vec<RoundRecord<f64>>,
}

pub fn simulate_seed(exp: &Experiment, seed: u64) -> CmdResult<SeedRun> {
    let cfg = &exp.config;
    let mut skeptic = SkepticImpl::build(&cfg.skeptic, cfg.variant, cfg.horizon, &cfg.quadrature)?;
    let mut reality = build_reality(&cfg.reality, seed, cfg.variant)?;
    let k0 = match &skeptic {
        SkepticImpl::Kronecker(k) => k.z(),
        _ => cfg.initial_capital,
    };
    let kron_b: Option<BSequence<f64>> = skeptic.kronecker().map(|k| k.b().clone());
    let mut side = match &cfg.skeptic {
        SkepticSpec::Bayes(p) if !cfg.bounds.theorems.is_empty() => {
            let prior = p.build()?;
            let (tilt, shadow) = if cfg.bounds.theorems.contains(&Theorem::Remark41) {
                let t = build_staircase_tilt(&prior, cfg.bounds.staircase_levels)?;
                let s = MixtureStrategy::bayes(&Prior::tilted(prior.clone(), t.clone()), &cfg.quadrature)?;
                (Some(t), Some(s))
            } else {
                (None, None)
            };
            Some(BoundSide { prior, tilt, shadow })
        }
        _ => None,
    };

    let mut st = GameState::new(cfg.variant, k0)?;
    let mut trace = Vec::new();
    let mut checkpoints = Vec::new();
    let mut next_cp = cfg.checkpoints.iter().peekable();
    let mut maxr = MaxRatios::default();
    let (mut kmax, mut kmin) = (k0, k0);
    let mut ruin = None;
    let mut violations = 0u64;
    let mut identity_gap: Option<f64> = None;
    let mut verdict = "completed".to_string();
    let decade_start = cfg.horizon - cfg.horizon / 10;
    let mut kron_tail = 0.0f64;

    for _ in 0..cfg.horizon {
        let m = skeptic.stake(&st);
        let Some(x) = reality.next_move(&st, m)? else {
            verdict = "exhausted".into();
            break;
        };
        let (next, rec) = match st.play_round(m, x) {
            Ok(r) => r,
            Err(gtp_core::Error::CollateralViolation { round, .. }) => {
                verdict = format!("collateral violation in round {round}");
                break;
            }
            Err(e) => return Err(e.into()),
        };
        skeptic.observe(x);
        if let Some(sh) = side.as_mut().and_then(|s| s.shadow.as_mut()) {
            sh.observe(x);
        }
        st = next;
        let last_eps = rec.eps;
        kmax = kmax.max(st.k);
        kmin = kmin.min(st.k);
        if ruin.is_none() && st.k <= 0.0 {
            ruin = Some(st.n);
        }
        let r = st.self_normalized();
        upd(&mut maxr.slln, r.slln);
        upd(&mut maxr.sqrtlog, r.sqrtlog);
        upd(&mut maxr.lil, r.lil);
        if let Some(b) = &kron_b {
            if st.n > decade_start {
                if let Some(bn) = b.get(st.n) {
                    kron_tail = kron_tail.max(st.s.abs() / bn);
                }
            }
        }
        if cfg.write_trace {
            trace.push(rec);
        }
        if next_cp.peek().is_some_and(|&&c| c == st.n) {
            next_cp.next();
            let mix = skeptic.mixture();
            let ln_mix = mix.map(|m| m.log_capital_integral());
            if let Some(m) = mix {
                if !m.is_ruined() {
                    let g = (m.log_capital_recursive() - m.log_capital_integral()).abs();
                    identity_gap = Some(identity_gap.map_or(g, |c: f64| c.max(g)));
                }
            }
            let mut bounds = Vec::new();
            if let (Some(bs), Some(ln_k)) = (side.as_ref(), ln_mix) {
                let q = BoundQuery { s: st.s, a: st.a };
                let ln_slack = (-cfg.bounds.slack).ln_1p();
                for chk in evaluate(&cfg.bounds.theorems, &bs.prior, bs.tilt.as_ref(), q, &cfg.bounds) {
                    let cap = if chk.tilted { bs.shadow.as_ref().map(|s| s.log_capital_integral()).unwrap_or(ln_k) } else { ln_k };
                    let e = match chk.outcome {
                        gtp_core::BoundOutcome::Value(v) => {
                            let bad = !(cap >= v.ln_rel + ln_slack);
                            violations += u64::from(bad);
                            BoundEntry {
                                theorem: chk.theorem.name(),
                                param: chk.param,
                                applicable: true,
                                reason: None,
                                ln_bound: Some(v.ln_rel),
                                ln_capital: Some(cap),
                                slack: Some(v.slack(cap)),
                                violated: bad,
                            }
                        }
                        gtp_core::BoundOutcome::NotApplicable(why) => BoundEntry {
                            theorem: chk.theorem.name(),
                            param: chk.param,
                            applicable: false,
                            reason: Some(why),
                            ln_bound: None,
                            ln_capital: None,
                            slack: None,
                            violated: false,
                        },
                    };
                    bounds.push(e);
                }
            }
            checkpoints.push(Checkpoint { n: st.n, s: st.s, a: st.a, k: st.k, eps: last_eps, ln_mixture_capital: ln_mix, ratios: r, bounds });
        }
    }
    let kronecker = skeptic.kronecker().map(|k| KroneckerSummary { z: k.z(), min_y: k.min_y(), final_y: k.y(), max_abs_s_over_b_last_decade: kron_tail });
    let summary = Summary {
        rounds: st.n,
        verdict,
        ruin_round: ruin,
        capital_max: kmax,
        capital_min: kmin,
        max_ratios: maxr,
        bound_violations: violations,
        identity_max_gap: identity_gap,
        kronecker,
    };
    let seed = cfg.reality.is_random().then_some(seed);
    Ok(SeedRun { report: SeedReport { seed, trace: None, checkpoints, summary }, trace })
}

fn violated(s: &Summary) -> bool {
    s.bound_violations > 0 || s.identity_max_gap.is_some_and(|g| !(g <= IDENTITY_TOL)) || s.kronecker.as_ref().is_some_and(|k| k.min_y < 0.0)
}

pub fn run_simulate(exp: &Experiment) -> CmdResult<(SimulationReport, Outcome)> {
    let cfg = &exp.config;
    let mut runs = Vec::new();
    let mut out = Outcome::new(false);
    for seed in exp.seeds() {
        let SeedRun { mut report, trace } = simulate_seed(exp, seed)?;
        if cfg.write_trace {
            let suffix = match report.seed {
                Some(s) => format!("seed{s}.trace.csv"),
                None => "trace.csv".into(),
            };
            let path = exp.path(&suffix)?;
            let mut w = create(&path)?;
            write_trace_csv(&mut w, &trace)?;
            std::io::Write::flush(&mut w)?;
            report.trace = Some(path.file_name().unwrap_or_default().to_string_lossy().into_owned());
            out.files.push(path);
        }
        let s = &report.summary;
        let tag = report.seed.map(|s| format!("seed {s}")).unwrap_or_else(|| "path".into());
        out.messages.push(format!(
            "{tag}: {} rounds, {}, K_max = {}, K_min = {}, bound violations = {}",
            s.rounds, s.verdict, s.capital_max, s.capital_min, s.bound_violations
        ));
        if violated(s) {
            out.exit_code = 1;
        }
        runs.push(report);
    }
    let report = SimulationReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        experiment: exp.name.clone(),
        variant: cfg.variant.name(),
        horizon: cfg.horizon,
        initial_capital: cfg.initial_capital,
        runs,
    };
    let path = exp.path("simulate.json")?;
    write_json(&path, &report)?;
    out.files.push(path);
    Ok((report, out))
}
