//! End-to-end runs of the `gtp` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gtp-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn gtp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtp")).args(args).env("GTP_OUTPUT_DIR", dir.join("out")).output().unwrap()
}

fn write_conf(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(format!("{name}.conf"));
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(dir: &Path, file: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(file)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let d = scratch("cfgerr");
    let c = write_conf(&d, "bad", "horizon = 100\n[bounds]\nc = 0.1, x\n");
    let o = gtp(&d, &["simulate", &c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bounds.c"), "{}", stderr(&o));

    let c = write_conf(&d, "bad2", "reality = iid:shifted:0.2\nvariant = bfg\n");
    let o = gtp(&d, &["simulate", &c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`reality`"));

    let o = gtp(&d, &["simulate", &c, "--set", "colour=blue"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn ruin_is_reported_with_zero_capital() {
    let d = scratch("ruin");
    let c = write_conf(&d, "ruin", "horizon = 5\nskeptic = constant:1\nreality = moves:-1\n");
    let o = gtp(&d, &["simulate", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&d, "ruin.simulate.json");
    assert_eq!(r["schema_version"], 1);
    let s = &r["runs"][0]["summary"];
    assert_eq!(s["ruin_round"], 1);
    assert_eq!(s["capital_min"], 0.0);
    let csv = fs::read_to_string(d.join("out/ruin.trace.csv")).unwrap();
    assert_eq!(csv, "n,M,eps,x,S,A,K\n1,1,1,-1,-1,1,0\n");
}

#[test]
fn bayes_report_carries_bounds_and_ratios() {
    let d = scratch("bayes");
    let c = write_conf(&d, "b", "horizon = 2000\nseeds = 3\nreality = iid:shifted:0.1\n[bounds]\ntheorems = thm41, thm43, remark41, prop31\n");
    let o = gtp(&d, &["simulate", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&d, "b.simulate.json");
    let run = &r["runs"][0];
    assert_eq!(run["seed"], 3);
    let cps = run["checkpoints"].as_array().unwrap();
    assert_eq!(cps.iter().map(|c| c["n"].as_u64().unwrap()).collect::<Vec<_>>(), vec![10, 100, 1000, 2000]);
    let last = cps.last().unwrap();
    let bounds = last["bounds"].as_array().unwrap();
    assert_eq!(bounds.len(), 3 + 1 + 1 + 3);
    for b in bounds {
        if b["applicable"].as_bool().unwrap() {
            assert!(b["slack"].as_f64().unwrap() >= 0.0);
            assert_eq!(b["violated"], false);
        } else {
            assert!(b["reason"].is_string());
        }
    }
    assert!(run["summary"]["identity_max_gap"].as_f64().unwrap() < 1e-9);
    assert!(last["ratios"]["sqrtlog"].is_number());
}

#[test]
fn kronecker_keeps_y_nonnegative() {
    let d = scratch("kron");
    let c = write_conf(&d, "k", "horizon = 3000\nseeds = 0..5\nskeptic = kronecker,b=n^2\nreality = iid:uniform:2\n[output]\ntrace = false\n");
    let o = gtp(&d, &["simulate", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for run in json(&d, "k.simulate.json")["runs"].as_array().unwrap() {
        let k = &run["summary"]["kronecker"];
        assert!(k["min_y"].as_f64().unwrap() >= 0.0);
        for cp in run["checkpoints"].as_array().unwrap() {
            assert!(cp["K"].as_f64().unwrap() >= 0.0);
        }
    }
}

#[test]
fn verify_reports_inconclusive_without_applicable_rounds() {
    let d = scratch("inconc");
    let c = write_conf(&d, "v", "horizon = 400\nreality = moves:1 -1 1 -1 1 -1 1 -1\n[bounds]\npriors = uniform\n");
    let o = gtp(&d, &["verify-bounds", &c, "--theorems", "thm43"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    let r = json(&d, "v.verify.json");
    assert_eq!(r["verdict"], "inconclusive");
    assert_eq!(r["theorems"][0]["applicable_rounds"], 0);
}

#[test]
fn verify_catches_a_corrupted_constant() {
    let d = scratch("mutate");
    let body = "horizon = 2000\nseeds = 0..4\nreality = iid:shifted:0.05\n[bounds]\npriors = uniform\n";
    let c = write_conf(&d, "v", body);
    let o = gtp(&d, &["verify-bounds", &c, "--theorems", "thm41,thm43"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&d, "v.verify.json");
    assert_eq!(r["verdict"], "pass");
    let slack = r["theorems"][0]["min_slack"].as_f64().unwrap();

    let o = gtp(&d, &["verify-bounds", &c, "--theorems", "thm41", "--mutate-constant", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&d, "v.verify.json");
    let t = &r["theorems"][0];
    assert!(t["violations"].as_u64().unwrap() > 0);
    let v = &t["first_violation"];
    assert!(v["seed"].is_u64() && v["round"].is_u64());
    assert!(v["ln_capital"].as_f64().unwrap() < v["ln_bound"].as_f64().unwrap());

    // a factor the observed slack absorbs goes unnoticed
    let k = (slack.exp() * 0.9 / 6.0).to_string();
    let o = gtp(&d, &["verify-bounds", &c, "--theorems", "thm41", "--mutate-constant", &k]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_rejects_the_adversary_path() {
    let d = scratch("vadv");
    let c = write_conf(&d, "v", "reality = adversary,b=n\n");
    assert_eq!(gtp(&d, &["verify-bounds", &c]).status.code(), Some(2));
}

#[test]
fn adversary_finds_a_witness_for_b_equal_n() {
    let d = scratch("adv");
    let c = write_conf(&d, "a", "horizon = 2000\nreality = adversary,b=n\n");
    let o = gtp(&d, &["adversary", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&d, "a.adversary.json");
    assert_eq!(r["l_monotone"], true);
    assert!(r["sup_capital"].as_f64().unwrap() <= 2.0 + 1e-9);
    let w = &r["witness"];
    assert!(w["S"].as_f64().unwrap() >= w["b"].as_f64().unwrap());
    assert_eq!(r["reciprocal_sum_diverges"], true);
}

#[test]
fn adversary_makes_no_claim_for_summable_b() {
    let d = scratch("adv2");
    let c = write_conf(&d, "a", "horizon = 2000\nskeptic = kronecker,b=n^2\nreality = adversary,b=n^2\n");
    let o = gtp(&d, &["adversary", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&d, "a.adversary.json");
    assert_eq!(r["l_monotone"], true);
    assert_eq!(r["reciprocal_sum_diverges"], false);
    assert!(r["claim"].as_str().unwrap().contains("no claim"));
    assert!(r["kronecker"]["min_y"].as_f64().unwrap() >= 0.0);
}

#[test]
fn negative_stake_meets_the_bankruptcy_move() {
    let d = scratch("adv3");
    let c = write_conf(&d, "a", "horizon = 10\nskeptic = stake:-0.5\nreality = adversary,b=n\n");
    let o = gtp(&d, &["adversary", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&d, "a.adversary.json");
    assert!(r["verdict"].as_str().unwrap().starts_with("collateral violation in round 1"));
    assert_eq!(r["rounds"], 0);
}

#[test]
fn rates_columns_and_domains() {
    let d = scratch("rates");
    let c = write_conf(&d, "r", "horizon = 1000\nreality = iid:shifted:0.1\nseeds = 1\ncheckpoints = 1, 2, 3, 10, 1000\n[rates]\na = 0\n");
    let o = gtp(&d, &["rates", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(d.join("out/r.seed1.rates.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,S,A,sqrtlog,power,lil,efkp"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let a: f64 = f[2].parse().unwrap();
        assert_eq!(f[3], f[4], "a = 0 makes the power column the uniform one");
        assert_eq!(f[5].is_empty(), a <= std::f64::consts::E, "{line}");
        assert!(f[6].is_empty());
    }
    let o = gtp(&d, &["rates", &c, "--set", "horizon=999"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_replays_byte_identically() {
    let d = scratch("det");
    let c = write_conf(&d, "s", "horizon = 3000\nseeds = 11\nreality = iid:uniform:2\nskeptic = bayes:power:0.5\n");
    let hash = |sub: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_gtp")).args(["simulate", &c]).env("GTP_OUTPUT_DIR", d.join(sub)).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        let csv = fs::read(d.join(sub).join("s.seed11.trace.csv")).unwrap();
        let json = fs::read(d.join(sub).join("s.simulate.json")).unwrap();
        (Sha256::digest(&csv), Sha256::digest(&json))
    };
    assert_eq!(hash("one"), hash("two"));
}

#[test]
fn functional_ops_emit_json() {
    let d = scratch("func");
    let run = |args: &[&str]| {
        let o = gtp(&d, args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    let r = run(&["functional", "--op", "integral-test", "--psi", "corollary"]);
    assert_eq!(r["integral_test"]["verdict"], "Convergent");
    let r = run(&["functional", "--op", "integral-test", "--psi", "loglog:2"]);
    assert_eq!(r["integral_test"]["verdict"], "Divergent");
    let csv = d.join("fg.csv");
    let r = run(&["functional", "--op", "FG", "--prior", "power:0.5", "--csv", csv.to_str().unwrap()]);
    assert!(r["max_rel_diff"].as_f64().unwrap() <= 1e-10);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 201);
    let r = run(&["functional", "--op", "GF", "--psi", "const:3", "--points", "5"]);
    assert_eq!(r["grid"].as_array().unwrap().len(), 5);
    let r = run(&["functional", "--op", "equiv", "--psi", "corollary", "--other", "sum:2*2+3*4+1*0"]);
    assert_eq!(r["passed"], true);
    let o = gtp(&d, &["functional", "--op", "equiv", "--prior", "uniform", "--other", "power:0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(gtp(&d, &["functional", "--op", "H"]).status.code(), Some(2));
}
