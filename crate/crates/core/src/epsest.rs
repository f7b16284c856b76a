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

//! Estimating an unknown bias: the zero test on parallel phase estimation,
//! the amplitude discriminator, and the doubling loop over M = 2^ℓ.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binomial::{majority_probability, smallest_odd_majority, smallest_odd_majority_success};
use crate::error::{invalid, Result};
use crate::linalg::unitary_with_first_column;
use crate::oracles::{build_signed_oracle, BiasedOracle, OracleRegisters, SignedOracle};
use crate::qaa::{
    est_phase, par_est_core, uniform_amplitudes, ParallelOracle, PhaseEstimate, SearchInstance,
    EST,
};
use crate::qstate::{
    BasisPredicate, BlockMatrixOp, ClassicalMap, Counted, FourierOp, MapMode, Matrix, Operator,
    Register, Sequence, StateVector, C64,
};

/// Name of the zero-test flag qubit.
pub const FLAG: &str = "flag";

/// sin²(Mθ)/(M² sin²θ).
pub fn zero_test_closed_form(theta: f64, m: usize) -> f64 {
    let mf = m as f64;
    ((mf * theta).sin() / (mf * theta.sin())).powi(2)
}

/// Final state of the zero test and its per-x flag probabilities.
#[derive(Clone, Debug)]
pub struct ZeroTestState {
    pub state: StateVector,
    pub m: usize,
    /// P(flag = 1 | x).
    pub flag_probabilities: Vec<f64>,
    pub base_queries: u64,
}

/// Parallel phase estimation of Õ with the estimate replaced by the flag
/// [j = 0].
pub fn par_est_zero(signed: &SignedOracle, m: usize) -> Result<ZeroTestState> {
    let regs = OracleRegisters::default();
    let counter = Arc::new(AtomicU64::new(0));
    let op = Counted { inner: signed.op(&regs), counter: counter.clone(), per_use: 2 };
    let po = ParallelOracle {
        index: Register::new(regs.index.clone(), signed.n()),
        workspace: signed.workspace(&regs),
        op: &op,
        chi: signed.zero_predicate(&regs),
    };
    let state = par_est_core(&po, &uniform_amplitudes(signed.n()), m)?;
    let mut state = state.append_registers(&[Register::new(FLAG, 2)])?;
    ClassicalMap::new(&[EST], FLAG, MapMode::Xor, |c| (c[0] == 0) as usize).apply(&mut state)?;
    let marg = state.measurement_distribution(&[regs.index.as_str(), FLAG])?;
    let flag_probabilities = (0..signed.n()).map(|x| marg.conditional_on_first(x)[1]).collect();
    Ok(ZeroTestState { state, m, flag_probabilities, base_queries: counter.load(Ordering::Relaxed) })
}

/// r: smallest odd count whose majority over flags of probability at most
/// 1/10 errs with probability at most 1/(16N).
pub fn replication_count(n: usize) -> usize {
    smallest_odd_majority(0.1, 1.0 / (16.0 * n as f64))
}

/// ⌈11√N⌉.
pub fn chk_modulus(n: usize) -> usize {
    (11.0 * (n as f64).sqrt()).ceil() as usize
}

/// 0.68/√N.
pub fn chk_threshold(n: usize) -> f64 {
    0.68 / (n as f64).sqrt()
}

/// Exact behavior of one run of the discriminator.
#[derive(Clone, Debug, PartialEq)]
pub struct ChkOutcome {
    pub estimate: PhaseEstimate,
    /// Success probability of A = O′(F_N ⊗ I).
    pub p: f64,
    pub r: usize,
    pub m_est: usize,
    pub threshold: f64,
    /// P(output = 1).
    pub prob_one: f64,
    /// Flag-oracle calls: A invocations × r.
    pub flag_oracle_calls: u64,
}

fn outcome(estimate: PhaseEstimate, p: f64, n: usize, r: usize) -> ChkOutcome {
    let threshold = chk_threshold(n);
    let prob_one = estimate.prob_above(threshold);
    let flag_oracle_calls = estimate.a_invocations * r as u64;
    ChkOutcome { m_est: estimate.m, estimate, p, r, threshold, prob_one, flag_oracle_calls }
}

fn ry(p: f64) -> Matrix {
    let (c, s) = ((1.0 - p).max(0.0).sqrt(), p.clamp(0.0, 1.0).sqrt());
    Matrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
}

/// Discriminator driven by per-x flag probabilities.
///
/// A = O′(F_N ⊗ I) prepares a state whose good mass is the average boosted
/// flag probability p, and amplitude estimation only sees the plane spanned
/// by the good and bad components. Its output distribution is therefore that
/// of estimation on one qubit prepared with success probability p, which is
/// what runs here.
pub fn chk_amp_dn(flags: &[f64]) -> Result<ChkOutcome> {
    let n = flags.len();
    if n < 2 {
        return invalid(format!("discriminator needs N ≥ 2, got {n}"));
    }
    let r = replication_count(n);
    let p = flags.iter().map(|&a| majority_probability(r, a)).sum::<f64>() / n as f64;
    let inst = SearchInstance::new(
        vec![Register::new("q", 2)],
        BlockMatrixOp::uniform(&["q"], ry(p)),
        BasisPredicate::new(&["q"], |c| c[0] == 1),
    )?;
    Ok(outcome(est_phase(&inst, chk_modulus(n))?, p, n, r))
}

/// A flag oracle with dialed-in flag probabilities and seeded work states.
#[derive(Clone, Debug)]
pub struct SyntheticFlagOracle {
    pub flags: Vec<f64>,
    pub work_dim: usize,
    unitaries: Vec<Matrix>,
}

impl SyntheticFlagOracle {
    pub fn new(flags: Vec<f64>, work_dim: usize, seed: u64) -> Result<Self> {
        if flags.iter().any(|a| !(0.0..=1.0).contains(a)) || work_dim == 0 {
            return invalid("flag probabilities must lie in [0, 1]");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit = |d: usize| -> Vec<C64> {
            let v: Vec<C64> = (0..d)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|c| c / nrm).collect()
        };
        let unitaries = flags
            .iter()
            .map(|&a| {
                let (u0, u1) = (unit(work_dim), unit(work_dim));
                let mut col = vec![C64::new(0.0, 0.0); 2 * work_dim];
                for i in 0..work_dim {
                    col[2 * i] = u0[i] * (1.0 - a).sqrt();
                    col[2 * i + 1] = u1[i] * a.sqrt();
                }
                unitary_with_first_column(&col)
            })
            .collect();
        Ok(SyntheticFlagOracle { flags, work_dim, unitaries })
    }

    pub fn op(&self, index: &str, work: &str, flag: &str) -> BlockMatrixOp {
        BlockMatrixOp::indexed(&[work, flag], &[index], self.unitaries.clone(), |c| Some(c[0]))
    }
}

/// Discriminator built gate by gate: r copies of the flag oracle, their
/// majority XORed into a result qubit, uniform superposition on x, then
/// amplitude estimation on the full register set.
pub fn chk_amp_dn_dense(oracle: &SyntheticFlagOracle) -> Result<ChkOutcome> {
    let n = oracle.flags.len();
    if n < 2 {
        return invalid(format!("discriminator needs N ≥ 2, got {n}"));
    }
    let r = replication_count(n);
    let mut regs = vec![Register::new("x", n)];
    let mut ops: Vec<Box<dyn Operator>> = vec![Box::new(FourierOp::new("x"))];
    let mut flags = Vec::new();
    for i in 0..r {
        let (w, f) = (format!("w{i}"), format!("f{i}"));
        regs.push(Register::new(w.clone(), oracle.work_dim));
        regs.push(Register::new(f.clone(), 2));
        ops.push(Box::new(oracle.op("x", &w, &f)));
        flags.push(f);
    }
    regs.push(Register::new("maj", 2));
    ops.push(Box::new(ClassicalMap::new(&flags, "maj", MapMode::Xor, move |c| {
        (2 * c.iter().sum::<usize>() > r) as usize
    })));
    let inst = SearchInstance::new(
        regs,
        Sequence(ops),
        BasisPredicate::new(&["maj"], |c| c[0] == 1),
    )?;
    let p = inst.success_probability()?;
    Ok(outcome(est_phase(&inst, chk_modulus(n))?, p, n, r))
}

/// Smallest odd v whose majority of trials, each right with probability
/// 8/π², is right with probability at least 1 − 1/(5ℓ²).
pub fn vote_count_at_level(ell: usize) -> usize {
    let ell = ell.max(1) as f64;
    smallest_odd_majority_success(8.0 / (PI * PI), 1.0 - 1.0 / (5.0 * ell * ell))
}

/// ε̃ = sin(1/(5·2^ℓ))/2.
pub fn eps_tilde(ell: usize) -> f64 {
    0.5 * (1.0 / (5.0 * 2f64.powi(ell as i32))).sin()
}

/// Closed-form base-query cost of level ℓ: v_ℓ votes, each one discriminator
/// run with (2⌈11√N⌉ + 1) A-invocations of r zero tests of (2·2^ℓ + 1)
/// signed calls, two base queries each.
pub fn level_ledger(n: usize, ell: usize) -> u64 {
    let v = vote_count_at_level(ell) as u64;
    let a = 2 * chk_modulus(n) as u64 + 1;
    let r = replication_count(n) as u64;
    let z = 2 * (1u64 << ell) + 1;
    v * a * r * z * 2
}

/// Everything about level ℓ that does not depend on measurement outcomes.
#[derive(Clone, Debug)]
pub struct LevelModel {
    pub ell: usize,
    pub flags: Vec<f64>,
    pub chk: ChkOutcome,
    pub votes: usize,
    /// Base queries of one discriminator run.
    pub chk_base_queries: u64,
}

/// Outcome of one level of the loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTrace {
    pub ell: usize,
    pub votes: usize,
    pub ones: usize,
    pub continued: bool,
    pub base_queries: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsEstimate {
    pub ell: usize,
    pub eps_tilde: f64,
    pub total_queries: u64,
    pub trace: Vec<LevelTrace>,
    /// The loop was still continuing at ell_max.
    pub truncated: bool,
}

impl EpsEstimate {
    /// Whether ε_min/(5π²) ≤ ε̃ ≤ ε_min.
    pub fn in_bracket(&self, eps_min: f64) -> bool {
        self.eps_tilde >= eps_min / (5.0 * PI * PI) && self.eps_tilde <= eps_min
    }
}

/// The doubling loop with per-level distributions computed once and shared
/// across seeded trials.
pub struct EpsEstimator {
    signed: SignedOracle,
    ell_max: usize,
    levels: Vec<OnceLock<LevelModel>>,
}

impl EpsEstimator {
    pub fn new(o: &BiasedOracle, ell_max: usize) -> Result<Self> {
        if ell_max == 0 || ell_max > 20 {
            return invalid(format!("ell_max = {ell_max} outside 1..=20"));
        }
        if o.n() < 2 {
            return invalid("bias estimation needs N ≥ 2");
        }
        Ok(EpsEstimator {
            signed: build_signed_oracle(o),
            ell_max,
            levels: (0..ell_max).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn ell_max(&self) -> usize {
        self.ell_max
    }

    pub fn level(&self, ell: usize) -> Result<&LevelModel> {
        if ell == 0 || ell > self.ell_max {
            return invalid(format!("level {ell} outside 1..={}", self.ell_max));
        }
        let slot = &self.levels[ell - 1];
        if let Some(l) = slot.get() {
            return Ok(l);
        }
        let zero = par_est_zero(&self.signed, 1 << ell)?;
        let chk = chk_amp_dn(&zero.flag_probabilities)?;
        let chk_base_queries = chk.flag_oracle_calls * zero.base_queries;
        let model = LevelModel {
            ell,
            flags: zero.flag_probabilities,
            chk,
            votes: vote_count_at_level(ell),
            chk_base_queries,
        };
        Ok(slot.get_or_init(|| model))
    }

    /// One sampled run of the loop.
    pub fn run(&self, seed: u64) -> Result<EpsEstimate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trace = Vec::new();
        let mut total = 0;
        for ell in 1..=self.ell_max {
            let lv = self.level(ell)?;
            let ones = (0..lv.votes)
                .filter(|_| {
                    let k = lv.chk.estimate.sample(rng.random::<f64>());
                    lv.chk.estimate.angle(k) > lv.chk.threshold
                })
                .count();
            let continued = 2 * ones > lv.votes;
            let cost = lv.votes as u64 * lv.chk_base_queries;
            total += cost;
            trace.push(LevelTrace { ell, votes: lv.votes, ones, continued, base_queries: cost });
            if !continued {
                return Ok(EpsEstimate { ell, eps_tilde: eps_tilde(ell), total_queries: total, trace, truncated: false });
            }
        }
        let ell = self.ell_max;
        Ok(EpsEstimate { ell, eps_tilde: eps_tilde(ell), total_queries: total, trace, truncated: true })
    }
}

pub fn est_eps_min(o: &BiasedOracle, ell_max: usize, seed: u64) -> Result<EpsEstimate> {
    EpsEstimator::new(o, ell_max)?.run(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{build_biased_oracle, OracleSpec, WorkModel};

    #[test]
    fn closed_form_examples() {
        assert!((zero_test_closed_form(0.7, 1) - 1.0).abs() < 1e-15);
        assert!(zero_test_closed_form(PI / 2.0, 4) < 1e-30);
        let v = zero_test_closed_form(0.3, 8);
        assert!((v - 2.4f64.sin().powi(2) / (64.0 * 0.3f64.sin().powi(2))).abs() < 1e-15);
        // sin²(2.4)/(64 sin²(0.3)) = 0.081630 (evaluated independently)
        assert!((v - 0.081630).abs() < 1e-6);
    }

    #[test]
    fn zero_test_matches_closed_form() {
        let o = build_biased_oracle(
            OracleSpec::new(vec![false, true], vec![0.15, 0.4], 2, WorkModel::Garbage { seed: 2 })
                .unwrap(),
        )
        .unwrap();
        let s = build_signed_oracle(&o);
        for m in [1, 2, 3, 8, 16] {
            let z = par_est_zero(&s, m).unwrap();
            assert_eq!(z.base_queries, 2 * (2 * m as u64 + 1));
            for x in 0..2 {
                let want = zero_test_closed_form(o.spec().theta(x), m);
                assert!((z.flag_probabilities[x] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn replication_and_votes() {
        assert_eq!(replication_count(2), 3);
        assert_eq!(replication_count(4), 5);
        assert_eq!(vote_count_at_level(1), 1);
        assert_eq!(vote_count_at_level(3), 9);
        let mut last = 0;
        for ell in 1..12 {
            let v = vote_count_at_level(ell);
            assert!(v >= last && v % 2 == 1);
            last = v;
        }
    }

    #[test]
    fn all_zero_flags_output_zero() {
        let c = chk_amp_dn(&[0.0; 4]).unwrap();
        assert_eq!(c.p, 0.0);
        assert!(c.prob_one.abs() < 1e-12);
    }

    #[test]
    fn dense_and_factorized_agree() {
        for flags in [vec![0.95, 0.0], vec![0.05, 0.1], vec![0.3, 0.7]] {
            let synth = SyntheticFlagOracle::new(flags.clone(), 2, 17).unwrap();
            let dense = chk_amp_dn_dense(&synth).unwrap();
            let fact = chk_amp_dn(&flags).unwrap();
            assert!((dense.p - fact.p).abs() < 1e-12);
            for (a, b) in dense.estimate.grid.iter().zip(&fact.estimate.grid) {
                assert!((a - b).abs() < 1e-9);
            }
            assert_eq!(dense.flag_oracle_calls, fact.flag_oracle_calls);
        }
    }

    #[test]
    fn trial_is_reproducible_and_ledger_matches() {
        let o = build_biased_oracle(
            OracleSpec::uniform(vec![false, true], 0.2, 2, WorkModel::Clean).unwrap(),
        )
        .unwrap();
        let est = EpsEstimator::new(&o, 8).unwrap();
        let a = est.run(42).unwrap();
        let b = est.run(42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), a.ell);
        let want: u64 = (1..=a.ell).map(|l| level_ledger(2, l)).sum();
        assert_eq!(a.total_queries, want);
    }
}
