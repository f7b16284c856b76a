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

//! Scenario runners. Each returns its tables in a fixed row order.

use std::f64::consts::PI;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robq::binomial::smallest_odd_majority_success;
use robq::epsest::{chk_amp_dn, par_est_zero, zero_test_closed_form, EpsEstimator};
use robq::oracles::{build_biased_oracle, build_signed_oracle, OracleRegisters};
use robq::qaa::{
    par_est_phase, predicted_grid_distribution, uniform_amplitudes, EstimateRegister, ParallelOracle,
    PhaseGrid,
};
use robq::qstate::Register;
use robq::robustify::{
    amplification_cap, bias_angle, estimation_modulus, queries_per_application,
    simulate_one_sixth_with, PipelineOptions,
};
use robq::search::{or_ledger, or_replication, robust_or, OrOptions};

use crate::config::{Config, ConfigError};
use crate::table::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    #[value(name = "verify-lemma1")]
    VerifyLemma1,
    #[value(name = "par-est-phase")]
    ParEstPhase,
    #[value(name = "zero-test")]
    ZeroTest,
    #[value(name = "chk-amp-dn")]
    ChkAmpDn,
    #[value(name = "est-eps-min")]
    EstEpsMin,
    #[value(name = "robust-or")]
    RobustOr,
    #[value(name = "scaling-sweep")]
    ScalingSweep,
    #[value(name = "compare-classical")]
    CompareClassical,
}

/// A named output table; the main table has an empty suffix.
pub struct Output {
    pub suffix: &'static str,
    pub table: Table,
}

fn main_table(table: Table) -> Vec<Output> {
    vec![Output { suffix: "", table }]
}

impl Scenario {
    pub fn uses_oracle(self) -> bool {
        !matches!(self, Scenario::ScalingSweep | Scenario::CompareClassical)
    }
}

pub fn run(scenario: Scenario, cfg: &Config) -> Result<Vec<Output>> {
    match scenario {
        Scenario::VerifyLemma1 => verify_lemma1(cfg),
        Scenario::ParEstPhase => par_est(cfg),
        Scenario::ZeroTest => zero_test(cfg),
        Scenario::ChkAmpDn => chk(cfg),
        Scenario::EstEpsMin => est_eps_min(cfg),
        Scenario::RobustOr => robust_or_trials(cfg),
        Scenario::ScalingSweep => scaling_sweep(cfg),
        Scenario::CompareClassical => compare_classical(cfg),
    }
}

fn pipeline_options(cfg: &Config) -> Result<PipelineOptions, ConfigError> {
    Ok(PipelineOptions { clamp: cfg.get_or("clamp", true)?, rotation: cfg.get_or("rotation", true)? })
}

fn modulus(cfg: &Config) -> Result<usize, ConfigError> {
    let m: usize = cfg.require("M")?;
    if m < 2 {
        return Err(ConfigError { field: "M".into(), message: "must be at least 2".into() });
    }
    Ok(m)
}

/// Runs `per_trial` for every trial in parallel and flattens the rows,
/// ordered by the leading sort key and then by trial.
fn trial_rows<F>(trials: usize, per_trial: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(u64) -> Result<Vec<(usize, Vec<Cell>)>> + Sync,
{
    let per: Vec<Vec<(usize, Vec<Cell>)>> =
        (0..trials as u64).into_par_iter().map(&per_trial).collect::<Result<_>>()?;
    let mut keyed: Vec<(usize, usize, usize, Vec<Cell>)> = per
        .into_iter()
        .enumerate()
        .flat_map(|(t, rows)| rows.into_iter().enumerate().map(move |(i, (x, r))| (x, t, i, r)))
        .collect();
    keyed.sort_by_key(|(x, t, i, _)| (*x, *t, *i));
    Ok(keyed.into_iter().map(|(.., r)| r).collect())
}

fn verify_lemma1(cfg: &Config) -> Result<Vec<Output>> {
    let recipe = cfg.recipe()?;
    let eps = cfg.eps()?;
    let options = pipeline_options(cfg)?;
    let trials = cfg.positive("trials", Some(1))?;
    let mut t = Table::new(&[
        "x", "trial", "f_x", "eps_x", "eps", "m1", "m2", "success", "predicted", "at_least_two_thirds",
        "queries_per_application", "queries_measured",
    ]);
    t.rows = trial_rows(trials, |trial| {
        let spec = recipe.build(trial)?;
        let o = build_biased_oracle(spec.clone())?;
        let sim = simulate_one_sixth_with(&o, eps, options)?;
        let ev = sim.evaluate()?;
        Ok((0..spec.n())
            .map(|x| {
                let p = ev.success[x];
                (x, vec![
                    x.into(),
                    trial.into(),
                    spec.f[x].into(),
                    spec.biases[x].into(),
                    eps.into(),
                    sim.m1().into(),
                    sim.m2().into(),
                    p.into(),
                    sim.predicted_success(x).into(),
                    (p >= 2.0 / 3.0 - 1e-9).into(),
                    sim.base_queries_per_application().into(),
                    ev.base_queries.into(),
                ])
            })
            .collect())
    })?;
    Ok(main_table(t))
}

fn par_est(cfg: &Config) -> Result<Vec<Output>> {
    let recipe = cfg.recipe()?;
    let m = modulus(cfg)?;
    let trials = cfg.positive("trials", Some(1))?;
    let grid = PhaseGrid::new(m)?;
    let mut t = Table::new(&[
        "x", "trial", "theta_x", "k", "angle", "probability", "predicted", "within_pi_over_m", "queries",
    ]);
    t.rows = trial_rows(trials, |trial| {
        let spec = recipe.build(trial)?;
        let o = build_biased_oracle(spec.clone())?;
        let s = build_signed_oracle(&o);
        let regs = OracleRegisters::default();
        let op = s.op(&regs);
        let po = ParallelOracle {
            index: Register::new(regs.index.clone(), spec.n()),
            workspace: s.workspace(&regs),
            op: &op,
            chi: s.zero_predicate(&regs),
        };
        let est = par_est_phase(&po, &uniform_amplitudes(spec.n()), m, EstimateRegister::View)?;
        let queries = o.queries();
        let mut rows = Vec::new();
        for (x, dist) in est.per_x_grid_distribution()?.into_iter().enumerate() {
            let th = spec.theta(x);
            let want = predicted_grid_distribution(th, m);
            for (k, p) in dist.into_iter().enumerate() {
                let a = grid.angle(k);
                rows.push((x, vec![
                    x.into(),
                    trial.into(),
                    th.into(),
                    k.into(),
                    a.into(),
                    p.into(),
                    want[k].into(),
                    ((th - a).abs() <= PI / m as f64 + 1e-12).into(),
                    queries.into(),
                ]));
            }
        }
        Ok(rows)
    })?;
    Ok(main_table(t))
}

fn zero_test(cfg: &Config) -> Result<Vec<Output>> {
    let recipe = cfg.recipe()?;
    let m = modulus(cfg)?;
    let trials = cfg.positive("trials", Some(1))?;
    let mut t = Table::new(&["x", "trial", "theta_x", "flag_probability", "closed_form", "queries"]);
    t.rows = trial_rows(trials, |trial| {
        let spec = recipe.build(trial)?;
        let s = build_signed_oracle(&build_biased_oracle(spec.clone())?);
        let z = par_est_zero(&s, m)?;
        Ok((0..spec.n())
            .map(|x| {
                let th = spec.theta(x);
                (x, vec![
                    x.into(),
                    trial.into(),
                    th.into(),
                    z.flag_probabilities[x].into(),
                    zero_test_closed_form(th, m).into(),
                    z.base_queries.into(),
                ])
            })
            .collect())
    })?;
    Ok(main_table(t))
}

fn chk(cfg: &Config) -> Result<Vec<Output>> {
    let recipe = cfg.recipe()?;
    let m = modulus(cfg)?;
    let trials = cfg.positive("trials", Some(1))?;
    let mut t = Table::new(&[
        "trial", "mean_boosted_flag", "replication", "m_est", "threshold", "prob_one", "flag_oracle_calls",
    ]);
    t.rows = trial_rows(trials, |trial| {
        let spec = recipe.build(trial)?;
        let s = build_signed_oracle(&build_biased_oracle(spec)?);
        let c = chk_amp_dn(&par_est_zero(&s, m)?.flag_probabilities)?;
        Ok(vec![(0, vec![
            trial.into(),
            c.p.into(),
            c.r.into(),
            c.m_est.into(),
            c.threshold.into(),
            c.prob_one.into(),
            c.flag_oracle_calls.into(),
        ])])
    })?;
    Ok(main_table(t))
}

fn est_eps_min(cfg: &Config) -> Result<Vec<Output>> {
    let spec = cfg.recipe()?.build(0)?;
    let ell_max = cfg.positive("ell_max", None)?;
    let trials = cfg.positive("trials", None)?;
    let seed: u64 = cfg.require("seed")?;
    let eps_min = spec.eps_min();
    let est = EpsEstimator::new(&build_biased_oracle(spec)?, ell_max)?;
    let mut t = Table::new(&[
        "trial", "seed", "ell", "eps_tilde", "eps_min", "in_bracket", "truncated", "total_queries",
    ]);
    t.rows = trial_rows(trials, |trial| {
        let s = seed.wrapping_add(trial);
        let r = est.run(s)?;
        Ok(vec![(0, vec![
            trial.into(),
            s.into(),
            r.ell.into(),
            r.eps_tilde.into(),
            eps_min.into(),
            r.in_bracket(eps_min).into(),
            r.truncated.into(),
            r.total_queries.into(),
        ])])
    })?;
    let hits = t.column("in_bracket").unwrap().iter().filter(|c| **c == &Cell::Bool(true)).count();
    let queries: Vec<f64> = t
        .column("total_queries")
        .unwrap()
        .iter()
        .map(|c| match c {
            Cell::Int(v) => *v as f64,
            _ => 0.0,
        })
        .collect();
    let mut s = Table::new(&["trials", "bracket_hits", "hit_frequency", "mean_queries", "eps_min"]);
    s.push(vec![
        trials.into(),
        hits.into(),
        (hits as f64 / trials as f64).into(),
        (queries.iter().sum::<f64>() / trials as f64).into(),
        eps_min.into(),
    ]);
    Ok(vec![Output { suffix: "", table: t }, Output { suffix: "summary", table: s }])
}

fn robust_or_trials(cfg: &Config) -> Result<Vec<Output>> {
    let spec = cfg.recipe()?.build(0)?;
    let eps = cfg.eps()?;
    let trials = cfg.positive("trials", Some(1))?;
    let seed: u64 = cfg.require("seed")?;
    let k: Option<usize> = cfg.get("k")?;
    if k.is_some_and(|k| k % 2 == 0) {
        return Err(ConfigError { field: "k".into(), message: "must be odd".into() }.into());
    }
    let truth = spec.f.iter().any(|&b| b);
    let r = robust_or(&build_biased_oracle(spec)?, eps, OrOptions { k, pipeline: pipeline_options(cfg)? })?;
    let mut t = Table::new(&[
        "trial", "seed", "answer", "truth", "correct", "p_one", "success_probability", "k",
        "base_queries", "expected_base_queries",
    ]);
    t.rows = trial_rows(trials, |trial| {
        let s = seed.wrapping_add(trial);
        let answer = ChaCha8Rng::seed_from_u64(s).random::<f64>() < r.p_one;
        Ok(vec![(0, vec![
            trial.into(),
            s.into(),
            answer.into(),
            truth.into(),
            (answer == truth).into(),
            r.p_one.into(),
            r.success_probability.into(),
            r.k.into(),
            r.base_queries.into(),
            r.expected_base_queries.into(),
        ])])
    })?;
    let mut stages = Table::new(&["stage", "base_queries"]);
    for st in &r.stages {
        stages.push(vec![st.stage.as_str().into(), st.base_queries.into()]);
    }
    Ok(vec![Output { suffix: "", table: t }, Output { suffix: "stages", table: stages }])
}

fn eps_list(cfg: &Config) -> Result<Vec<f64>, ConfigError> {
    let list: Vec<f64> = cfg.list("eps_list")?;
    if let Some(e) = list.iter().find(|e| !(**e > 0.0 && **e <= 0.5)) {
        return Err(ConfigError { field: "eps_list".into(), message: format!("{e} is outside (0, 1/2]") });
    }
    Ok(list)
}

fn scaling_sweep(cfg: &Config) -> Result<Vec<Output>> {
    let mut t = Table::new(&["eps", "theta", "m1", "m2", "queries_per_application", "ratio_to_previous"]);
    let mut prev: Option<u64> = None;
    for eps in eps_list(cfg)? {
        let q = queries_per_application(eps)?;
        t.push(vec![
            eps.into(),
            bias_angle(eps).into(),
            estimation_modulus(eps)?.into(),
            amplification_cap(eps)?.into(),
            q.into(),
            prev.map_or(Cell::Text(String::new()), |p| Cell::Num(q as f64 / p as f64)),
        ]);
        prev = Some(q);
    }
    Ok(main_table(t))
}

fn compare_classical(cfg: &Config) -> Result<Vec<Output>> {
    let ns: Vec<usize> = cfg.list("N_list")?;
    if ns.contains(&0) {
        return Err(ConfigError { field: "N_list".into(), message: "sizes must be positive".into() }.into());
    }
    let mut t = Table::new(&[
        "N", "eps", "classical_votes_per_index", "classical_queries", "k", "quantum_queries",
        "classical_over_quantum",
    ]);
    for &n in &ns {
        for eps in eps_list(cfg)? {
            let votes = smallest_odd_majority_success(0.5 + eps, 2.0 / 3.0);
            let classical = (n * votes) as u64;
            let k = or_replication(n);
            let quantum = or_ledger(n, k, queries_per_application(eps)?);
            t.push(vec![
                n.into(),
                eps.into(),
                votes.into(),
                classical.into(),
                k.into(),
                quantum.into(),
                (classical as f64 / quantum as f64).into(),
            ]);
        }
    }
    Ok(main_table(t))
}
