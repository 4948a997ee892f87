//! Rate curves: the normalized sums the lower bounds predict, per checkpoint.

use serde::Serialize;

use gtp_core::bounds::efkp_psi;
use gtp_core::{GameState, Strategy};

use super::{cell, create, write_json, CmdResult, Experiment, Outcome, SCHEMA_VERSION};
use crate::config::ConfigError;
use crate::specs::{build_reality, RealitySpec, SkepticImpl};

pub const RATES_HEADER: &str = "n,S,A,sqrtlog,power,lil,efkp";

pub const MIN_HORIZON: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub n: u64,
    pub s: f64,
    pub a: f64,
    /// `S / sqrt(A ln A)`.
    pub sqrtlog: Option<f64>,
    /// `S / sqrt((1 - a) A ln A)`.
    pub power: Option<f64>,
    /// `S / sqrt(2 A ln ln A)`.
    pub lil: Option<f64>,
    /// `S - sqrt(A) psi(A)` with the EFKP normalizer.
    pub efkp: Option<f64>,
}

pub fn rate_row(n: u64, s: f64, a: f64, power_a: f64, b: usize, gamma: f64) -> RateRow {
    let la = if a > 0.0 { a.ln() } else { f64::NAN };
    let sqrtlog = (la > 0.0).then(|| s / (a * la).sqrt());
    let power = (la > 0.0).then(|| s / ((1.0 - power_a) * a * la).sqrt());
    let lil = (la > 1.0).then(|| s / (2.0 * a * la.ln()).sqrt());
    let efkp = if la > 0.0 { efkp_psi(la, b, gamma).ok().filter(|p| p.is_finite()).map(|p| s - a.sqrt() * p) } else { None };
    RateRow { n, s, a, sqrtlog, power, lil, efkp }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesSummary {
    pub seed: Option<u64>,
    pub csv: String,
    pub rows: usize,
    pub max_sqrtlog: Option<f64>,
    pub max_power: Option<f64>,
    pub max_lil: Option<f64>,
    pub max_efkp: Option<f64>,
    /// Rows with an EFKP cell.
    pub efkp_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub experiment: String,
    pub power_a: f64,
    pub efkp_b: usize,
    pub efkp_gamma: f64,
    pub runs: Vec<RatesSummary>,
}

fn fold_max(rows: &[RateRow], f: impl Fn(&RateRow) -> Option<f64>) -> Option<f64> {
    rows.iter().filter_map(f).fold(None, |m, v| Some(m.map_or(v, |c: f64| c.max(v))))
}

/// Rows at the configured checkpoints for one seed.
pub fn rate_rows(exp: &Experiment, seed: u64) -> CmdResult<Vec<RateRow>> {
    let cfg = &exp.config;
    let mut skeptic = SkepticImpl::build(&cfg.skeptic, cfg.variant, cfg.horizon, &cfg.quadrature)?;
    let mut reality = build_reality(&cfg.reality, seed, cfg.variant)?;
    let k0 = skeptic.kronecker().map(|k| k.z()).unwrap_or(cfg.initial_capital);
    let mut st = GameState::new(cfg.variant, k0)?;
    let mut rows = Vec::with_capacity(cfg.checkpoints.len());
    let mut cps = cfg.checkpoints.iter().peekable();
    for _ in 0..cfg.horizon {
        let m = skeptic.stake(&st);
        let Some(x) = reality.next_move(&st, m)? else { break };
        st = match st.play_round(m, x) {
            Ok((next, _)) => next,
            Err(gtp_core::Error::CollateralViolation { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        skeptic.observe(x);
        if cps.peek().is_some_and(|&&c| c == st.n) {
            cps.next();
            rows.push(rate_row(st.n, st.s, st.a, cfg.rates_a, cfg.rates_b, cfg.rates_gamma));
        }
    }
    Ok(rows)
}

pub fn run_rates(exp: &Experiment) -> CmdResult<(RatesReport, Outcome)> {
    let cfg = &exp.config;
    if cfg.horizon < MIN_HORIZON {
        return Err(ConfigError::new("horizon", format!("rate curves need at least {MIN_HORIZON} rounds")).into());
    }
    if matches!(cfg.reality, RealitySpec::Adversary { .. }) {
        return Err(ConfigError::new("reality", "use the adversary command for the adversary").into());
    }
    let mut out = Outcome::new(false);
    let mut runs = Vec::new();
    for seed in exp.seeds() {
        let rows = rate_rows(exp, seed)?;
        let seed = cfg.reality.is_random().then_some(seed);
        let suffix = seed.map(|s| format!("seed{s}.rates.csv")).unwrap_or_else(|| "rates.csv".into());
        let path = exp.path(&suffix)?;
        let mut w = create(&path)?;
        use std::io::Write;
        writeln!(w, "{RATES_HEADER}")?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{},{},{}", r.n, r.s, r.a, cell(r.sqrtlog), cell(r.power), cell(r.lil), cell(r.efkp))?;
        }
        w.flush()?;
        let s = RatesSummary {
            seed,
            csv: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            rows: rows.len(),
            max_sqrtlog: fold_max(&rows, |r| r.sqrtlog),
            max_power: fold_max(&rows, |r| r.power),
            max_lil: fold_max(&rows, |r| r.lil),
            max_efkp: fold_max(&rows, |r| r.efkp),
            efkp_cells: rows.iter().filter(|r| r.efkp.is_some()).count(),
        };
        if s.efkp_cells == 0 {
            out.messages.push(format!("{}: the EFKP column is empty (psi is undefined for these A)", s.csv));
        }
        out.messages.push(format!("{}: {} rows, max S/sqrt(A ln A) = {}", s.csv, s.rows, cell(s.max_sqrtlog)));
        out.files.push(path);
        runs.push(s);
    }
    let report = RatesReport {
        schema_version: SCHEMA_VERSION,
        command: "rates",
        experiment: exp.name.clone(),
        power_a: cfg.rates_a,
        efkp_b: cfg.rates_b,
        efkp_gamma: cfg.rates_gamma,
        runs,
    };
    let path = exp.path("rates.json")?;
    write_json(&path, &report)?;
    out.files.push(path);
    Ok((report, out))
}
