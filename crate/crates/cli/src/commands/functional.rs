//! Prior / upper-class function calculus from the command line.

use std::path::PathBuf;

use serde::Serialize;

use gtp_core::priors::ValidationReport;
use gtp_core::upper_class::{
    apply_f, apply_g, compose_gf, equivalent_priors, equivalent_psis, integral_test_default, preserve_equivalence_check, EquivalenceOptions, EquivalenceReport,
    EquivalentPair, FgComposer, IntegralTestOutcome, LogGrid, PreservationReport,
};
use gtp_core::validate_assumption1;

use super::{cell, create, CmdError, CmdResult, Outcome, SCHEMA_VERSION};
use crate::config::ConfigError;
use crate::specs::{parse_prior, parse_psi};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    F,
    G,
    Fg,
    Gf,
    Equiv,
    IntegralTest,
}

impl Op {
    pub fn parse(s: &str) -> Option<Op> {
        Some(match s {
            "F" | "f" => Op::F,
            "G" | "g" => Op::G,
            "FG" | "fg" => Op::Fg,
            "GF" | "gf" => Op::Gf,
            "equiv" => Op::Equiv,
            "integral-test" => Op::IntegralTest,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FunctionalArgs {
    pub op: Op,
    pub prior: Option<String>,
    pub psi: Option<String>,
    /// Second prior or function for `equiv`.
    pub other: Option<String>,
    pub points: usize,
    /// Grid range in `ln(1/eps)` or `ln lambda`.
    pub from: Option<f64>,
    pub to: Option<f64>,
    /// Writes the grid values here as CSV.
    pub csv: Option<PathBuf>,
}

impl FunctionalArgs {
    pub fn new(op: Op) -> Self {
        FunctionalArgs { op, prior: None, psi: None, other: None, points: 200, from: None, to: None, csv: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub x: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub op: String,
    pub input: String,
    pub output: Option<String>,
    pub columns: Vec<&'static str>,
    pub grid: Vec<GridPoint>,
    /// Points where the asymptotic formula is outside its range.
    pub out_of_range: usize,
    pub max_rel_diff: Option<f64>,
    pub validation: Option<ValidationReport>,
    pub integral_test: Option<IntegralTestOutcome>,
    pub equivalence: Option<EquivalenceReport>,
    pub preservation: Option<PreservationReport>,
    pub passed: bool,
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> CmdResult<&'a str> {
    v.as_deref().ok_or_else(|| CmdError::Config(ConfigError::new(flag, "required for this operation")))
}

fn grid(args: &FunctionalArgs, lo: f64, hi: f64) -> LogGrid<f64> {
    LogGrid::uniform_t(args.from.unwrap_or(lo), args.to.unwrap_or(hi), args.points)
}

fn report(op: Op, input: String, columns: Vec<&'static str>) -> FunctionalReport {
    FunctionalReport {
        schema_version: SCHEMA_VERSION,
        command: "functional",
        op: format!("{op:?}"),
        input,
        output: None,
        columns,
        grid: Vec::new(),
        out_of_range: 0,
        max_rel_diff: None,
        validation: None,
        integral_test: None,
        equivalence: None,
        preservation: None,
        passed: true,
    }
}

pub fn run_functional(args: &FunctionalArgs) -> CmdResult<(FunctionalReport, Outcome)> {
    let rep = match args.op {
        Op::F => {
            let spec = parse_psi("--psi", need(&args.psi, "--psi")?)?;
            let psi = spec.build()?;
            let prior = apply_f(&psi)?;
            let mut r = report(args.op, psi.name(), vec!["t", "ln_eps_density"]);
            let lo = psi.ln_m().max(1.0);
            for &t in &grid(args, lo, lo + 1000.0).points {
                r.grid.push(GridPoint { x: t, values: vec![Some(prior.ln_eps_density(t))] });
            }
            let v = validate_assumption1(&prior, 2000)?;
            r.passed = v.passed();
            r.validation = Some(v);
            r.output = Some(prior.name());
            r
        }
        Op::G => {
            let spec = parse_prior("--prior", need(&args.prior, "--prior")?)?;
            let prior = spec.build()?;
            let psi = apply_g(&prior);
            let mut r = report(args.op, prior.name(), vec!["u", "psi"]);
            let lo = psi.ln_m().max(1.0);
            for &u in &grid(args, lo, lo + 1000.0).points {
                r.grid.push(GridPoint { x: u, values: vec![Some(psi.psi(u))] });
            }
            r.output = Some(psi.name());
            r
        }
        Op::Fg => {
            let spec = parse_prior("--prior", need(&args.prior, "--prior")?)?;
            let prior = spec.build()?;
            let comp = FgComposer::new(&prior);
            let mut r = report(args.op, prior.name(), vec!["t", "beta", "ln_eps_closed", "ln_eps_direct", "ratio"]);
            let mut worst: f64 = 0.0;
            let lo = prior.onset_t().max(-(1e-2f64).ln());
            for &t in &grid(args, lo, lo + 64.5).points {
                match comp.at(t) {
                    Ok(v) => {
                        worst = worst.max((v.ln_eps_closed - v.ln_eps_direct).abs());
                        r.grid.push(GridPoint { x: t, values: vec![Some(v.beta), Some(v.ln_eps_closed), Some(v.ln_eps_direct), Some(v.ratio)] });
                    }
                    Err(gtp_core::Error::OutOfAsymptoticRange(_)) => {
                        r.out_of_range += 1;
                        r.grid.push(GridPoint { x: t, values: vec![None; 4] });
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            r.max_rel_diff = Some(worst);
            r
        }
        Op::Gf => {
            let spec = parse_psi("--psi", need(&args.psi, "--psi")?)?;
            let psi = spec.build()?;
            let mut r = report(args.op, psi.name(), vec!["u", "psi", "closed", "direct", "diff"]);
            let mut worst: f64 = 0.0;
            let lo = psi.ln_m() + 1.0;
            for &u in &grid(args, lo, lo + 1000.0).points {
                match compose_gf(&psi, u) {
                    Ok(v) => {
                        worst = worst.max(((v.closed - v.direct) / v.closed).abs());
                        r.grid.push(GridPoint { x: u, values: vec![Some(v.psi), Some(v.closed), Some(v.direct), Some(v.diff)] });
                    }
                    Err(gtp_core::Error::OutOfAsymptoticRange(_)) => {
                        r.out_of_range += 1;
                        r.grid.push(GridPoint { x: u, values: vec![None; 4] });
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            r.max_rel_diff = Some(worst);
            r
        }
        Op::Equiv => {
            let opts = EquivalenceOptions::default();
            let g = LogGrid::standard();
            match (&args.prior, &args.psi) {
                (Some(p), None) => {
                    let a = parse_prior("--prior", p)?.build()?;
                    let b = parse_prior("--other", need(&args.other, "--other")?)?.build()?;
                    let mut r = report(args.op, format!("{} ~ {}", a.name(), b.name()), vec![]);
                    r.equivalence = Some(equivalent_priors(&a, &b, &g, &opts));
                    let pr = preserve_equivalence_check(&EquivalentPair::Priors(a, b), &g, &opts)?;
                    r.passed = pr.passed;
                    r.preservation = Some(pr);
                    r
                }
                (None, Some(p)) => {
                    let a = parse_psi("--psi", p)?.build()?;
                    let b = parse_psi("--other", need(&args.other, "--other")?)?.build()?;
                    let mut r = report(args.op, format!("{} ~ {}", a.name(), b.name()), vec![]);
                    r.equivalence = Some(equivalent_psis(&a, &b, &g, &opts));
                    let pr = preserve_equivalence_check(&EquivalentPair::Psis(a, b), &g, &opts)?;
                    r.passed = pr.passed;
                    r.preservation = Some(pr);
                    r
                }
                _ => return Err(ConfigError::new("--prior/--psi", "give exactly one of --prior or --psi, plus --other").into()),
            }
        }
        Op::IntegralTest => {
            let spec = match (&args.psi, &args.prior) {
                (Some(p), _) => parse_psi("--psi", p)?,
                (None, Some(p)) => crate::specs::PsiSpec::OfPrior(parse_prior("--prior", p)?),
                _ => return Err(ConfigError::new("--psi", "required for this operation").into()),
            };
            let psi = spec.build()?;
            let mut r = report(args.op, psi.name(), vec![]);
            r.integral_test = Some(integral_test_default(&psi)?);
            r
        }
    };
    let mut out = Outcome::new(!rep.passed);
    if let Some(path) = &args.csv {
        use std::io::Write;
        let mut w = create(path)?;
        writeln!(w, "{}", rep.columns.join(","))?;
        for p in &rep.grid {
            let cells: Vec<String> = std::iter::once(format!("{}", p.x)).chain(p.values.iter().map(|v| cell(*v))).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        out.files.push(path.clone());
    }
    if let Some(t) = &rep.integral_test {
        out.messages.push(format!("{}: {:?} (ln I = {}, relative increment {})", t.psi, t.verdict, t.ln_value, t.rel_err));
    }
    if rep.out_of_range > 0 {
        out.messages.push(format!("{} grid points outside the asymptotic range", rep.out_of_range));
    }
    if !rep.passed {
        out.messages.push("check failed".into());
    }
    Ok((rep, out))
}
