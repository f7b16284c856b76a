// Copyright 2026 The robq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const LEMMA1: &str = "N = 2\nm = 2\nf = 0,1\nbiases = constant(0.3)\nwork_model = clean\neps = 0.3\n";

fn robq(dir: &Path, workers: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robq"))
        .current_dir(dir)
        .env("ROBQ_WORKERS", workers)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> TempDir {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("base.cfg"), LEMMA1).unwrap();
    d
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).expect("column exists");
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

fn floats(path: &Path, name: &str) -> Vec<f64> {
    column(path, name).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn lemma1_rows_meet_two_thirds() {
    let d = setup();
    let out = robq(d.path(), "2", &["verify-lemma1", "--config", "base.cfg", "--out", "l1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = floats(&d.path().join("l1.csv"), "success");
    assert_eq!(p.len(), 2);
    assert!(p.iter().all(|&v| v >= 2.0 / 3.0));
    assert_eq!(floats(&d.path().join("l1.csv"), "queries_measured"), vec![256.0, 256.0]);
    let spec = std::fs::read_to_string(d.path().join("l1_oracle.cfg")).unwrap();
    assert!(spec.contains("biases = 0.3,0.3"));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let d = setup();
    let args = |out: &'static str| {
        [
            "est-eps-min", "--config", "base.cfg", "biases=uniform(0.15,0.4,5)", "ell_max=9",
            "trials=64", "seed=11", "--out", out,
        ]
    };
    assert!(robq(d.path(), "1", &args("a")).status.success());
    assert!(robq(d.path(), "4", &args("b")).status.success());
    for suffix in ["", "_summary"] {
        let a = std::fs::read(d.path().join(format!("a{suffix}.csv"))).unwrap();
        let b = std::fs::read(d.path().join(format!("b{suffix}.csv"))).unwrap();
        assert_eq!(a, b);
    }
    let trials = ["verify-lemma1", "--config", "base.cfg", "f=random(2)", "trials=3"];
    assert!(robq(d.path(), "1", &[&trials[..], &["--out", "c"]].concat()).status.success());
    assert!(robq(d.path(), "3", &[&trials[..], &["--out", "e"]].concat()).status.success());
    assert_eq!(std::fs::read(d.path().join("c.csv")).unwrap(), std::fs::read(d.path().join("e.csv")).unwrap());
    // x-major, then trial.
    assert_eq!(column(&d.path().join("c.csv"), "x"), ["0", "0", "0", "1", "1", "1"]);
    assert_eq!(column(&d.path().join("c.csv"), "trial"), ["0", "1", "2", "0", "1", "2"]);
}

#[test]
fn eps_estimation_hits_bracket() {
    let d = setup();
    let args = [
        "est-eps-min", "--config", "base.cfg", "biases=0.2,0.35", "ell_max=10", "trials=300", "seed=0",
        "--out", "ee",
    ];
    assert!(robq(d.path(), "4", &args).status.success());
    let freq = floats(&d.path().join("ee_summary.csv"), "hit_frequency")[0];
    assert!(freq >= 2.0 / 3.0, "{freq}");
}

#[test]
fn sweep_and_classical_ratios() {
    let d = setup();
    assert!(robq(d.path(), "1", &["scaling-sweep", "eps_list=0.3,0.15", "--out", "sw"]).status.success());
    let r: f64 = column(&d.path().join("sw.csv"), "ratio_to_previous")[1].parse().unwrap();
    assert!((1.8..=2.6).contains(&r), "{r}");

    let args = ["compare-classical", "eps_list=0.3", "N_list=4,16", "--out", "cc"];
    assert!(robq(d.path(), "1", &args).status.success());
    let c = floats(&d.path().join("cc.csv"), "classical_queries");
    let q = floats(&d.path().join("cc.csv"), "quantum_queries");
    assert_eq!(c[1] / c[0], 4.0);
    assert!(q[1] / q[0] > 2.0 && q[1] / q[0] < 4.0);
}

#[test]
fn invalid_configs_exit_nonzero_with_the_field() {
    let d = setup();
    let cases: &[(&[&str], &str)] = &[
        (&["verify-lemma1", "--config", "base.cfg", "eps=0.9"], "`eps`"),
        (&["verify-lemma1", "--config", "base.cfg", "f=0,1,1"], "`f`"),
        (&["zero-test", "--config", "base.cfg"], "`M`"),
        (&["robust-or", "--config", "base.cfg", "seed=1", "k=4"], "`k`"),
        (&["verify-lemma1", "--config", "missing.cfg"], "`--config`"),
        (&["verify-lemma1", "--config", "base.cfg", "colour=red"], "`colour`"),
        (&["scaling-sweep", "eps_list=0.3,nope"], "`eps_list`"),
    ];
    for (args, field) in cases {
        let out = robq(d.path(), "1", &[*args, &["--out", "bad"]].concat());
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{args:?}: {err}");
    }
    let out = robq(d.path(), "zero", &["scaling-sweep", "eps_list=0.3", "--out", "bad"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ROBQ_WORKERS"));
}
