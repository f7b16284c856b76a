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

//! Robust OR: the simulated constant-bias oracle, boosted by a coherent
//! majority over k copies, drives Grover search with an exponentially growing
//! iteration schedule; a final boosted evaluation checks the candidate.
//!
//! Every boosted call uses fresh ancillas, so the joint state after any
//! sequence of calls depends on the oracle only through the Gram matrix
//! G_xy = ⟨B_x 0̄|B_y 0̄⟩. The search is simulated exactly on an index
//! register plus one rank(G)-dimensional ancilla per call.

use std::sync::atomic::Ordering;

use crate::binomial::{majority_probability, smallest_odd_majority};
use crate::error::{invalid, Result};
use crate::linalg::{gram_vectors, unitary_with_first_column};
use crate::oracles::{BiasedOracle, OracleRegisters};
use crate::qaa::{indexed_input, uniform_amplitudes};
use crate::robustify::{simulate_one_sixth_with, PipelineOptions, PipelineRegisters, SimulatedOracle};
use crate::qstate::{BlockMatrixOp, Matrix, Operator, Register, RegisterLayout, StateVector, C64};

/// An oracle writing a (possibly noisy) bit of f(x) to an output qubit.
pub trait BitOracle {
    fn n(&self) -> usize;
    fn truth_table(&self) -> Vec<bool>;
    /// Registers other than the index, named with `prefix`.
    fn workspace(&self, prefix: &str) -> Vec<Register>;
    fn output_register(&self, prefix: &str) -> String;
    fn operator<'s>(&'s self, index: &str, prefix: &str) -> Box<dyn Operator + 's>;
    /// Base-oracle queries charged to one forward application.
    fn queries_used(&self) -> u64;
}

impl BitOracle for BiasedOracle {
    fn n(&self) -> usize {
        BiasedOracle::n(self)
    }

    fn truth_table(&self) -> Vec<bool> {
        self.spec().f.clone()
    }

    fn workspace(&self, prefix: &str) -> Vec<Register> {
        self.registers(&OracleRegisters::with_prefix("x", prefix))[1..].to_vec()
    }

    fn output_register(&self, prefix: &str) -> String {
        OracleRegisters::with_prefix("x", prefix).answer
    }

    fn operator<'s>(&'s self, index: &str, prefix: &str) -> Box<dyn Operator + 's> {
        Box::new(self.op(&OracleRegisters::with_prefix(index, prefix)))
    }

    fn queries_used(&self) -> u64 {
        self.queries()
    }
}

impl BitOracle for SimulatedOracle {
    fn n(&self) -> usize {
        SimulatedOracle::n(self)
    }

    fn truth_table(&self) -> Vec<bool> {
        SimulatedOracle::truth_table(self).to_vec()
    }

    fn workspace(&self, prefix: &str) -> Vec<Register> {
        SimulatedOracle::workspace(self, &PipelineRegisters::new("x", prefix))
    }

    fn output_register(&self, prefix: &str) -> String {
        PipelineRegisters::new("x", prefix).out
    }

    fn operator<'s>(&'s self, index: &str, prefix: &str) -> Box<dyn Operator + 's> {
        Box::new(self.op(&PipelineRegisters::new(index, prefix)))
    }

    fn queries_used(&self) -> u64 {
        self.counter().load(Ordering::Relaxed)
    }
}

/// Zeroes every amplitude whose `reg` coordinate differs from `value`.
fn project(state: &mut StateVector, reg: &str, value: usize) -> Result<()> {
    let pos = state.layout().index_of(reg)?;
    let stride = state.layout().stride(pos);
    let dim = state.layout().dim(pos);
    for (i, a) in state.amps_mut().iter_mut().enumerate() {
        if (i / stride) % dim != value {
            *a = C64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Branch vectors χ_x^a = U†Π_aU|0̄⟩ of one oracle call, and the single-call
/// probability of output 1.
#[derive(Clone, Debug)]
pub struct Kickback {
    pub chi: Vec<[Vec<C64>; 2]>,
    pub q: Vec<f64>,
    /// Base queries of one forward application.
    pub call_cost: u64,
}

pub fn kickback(oracle: &dyn BitOracle) -> Result<Kickback> {
    let n = oracle.n();
    let mut regs = vec![Register::new("x", n)];
    regs.extend(oracle.workspace(""));
    let out = oracle.output_register("");
    let op = oracle.operator("x", "");
    let layout = RegisterLayout::from_registers(regs)?;
    let mut s = indexed_input(layout, &uniform_amplitudes(n))?;
    let before = oracle.queries_used();
    op.apply(&mut s)?;
    let call_cost = oracle.queries_used() - before;
    let marg = s.measurement_distribution(&["x", out.as_str()])?;
    let q = (0..n).map(|x| marg.conditional_on_first(x)[1]).collect();
    let scale = (n as f64).sqrt();
    let mut branches: Vec<Vec<Vec<C64>>> = Vec::new();
    for a in 0..2 {
        let mut t = s.clone();
        project(&mut t, &out, a)?;
        op.apply_adjoint(&mut t)?;
        branches.push(
            (0..n)
                .map(|x| t.leading_block(x).iter().map(|c| c * scale).collect())
                .collect(),
        );
    }
    let chi = (0..n)
        .map(|x| [branches[0][x].clone(), branches[1][x].clone()])
        .collect();
    Ok(Kickback { chi, q, call_cost })
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

/// ⟨B_x 0̄|B_y 0̄⟩ for the k-copy majority phase oracle, from the single-copy
/// overlaps t[a][b] = ⟨χ_x^a|χ_y^b⟩.
pub fn boosted_overlap(t: &[[C64; 2]; 2], k: usize) -> C64 {
    let mut fact = vec![1.0f64; k + 1];
    for i in 1..=k {
        fact[i] = fact[i - 1] * i as f64;
    }
    let pows: Vec<Vec<Vec<C64>>> = (0..2)
        .map(|a| {
            (0..2)
                .map(|b| {
                    let mut p = vec![C64::new(1.0, 0.0); k + 1];
                    for i in 1..=k {
                        p[i] = p[i - 1] * t[a][b];
                    }
                    p
                })
                .collect()
        })
        .collect();
    let sign = |c: usize| if 2 * c > k { -1.0 } else { 1.0 };
    let mut g = C64::new(0.0, 0.0);
    for n11 in 0..=k {
        for n10 in 0..=k - n11 {
            for n01 in 0..=k - n11 - n10 {
                let n00 = k - n11 - n10 - n01;
                let coef = fact[k] / (fact[n00] * fact[n01] * fact[n10] * fact[n11]);
                let term = pows[0][0][n00] * pows[0][1][n01] * pows[1][0][n10] * pows[1][1][n11];
                g += term * (coef * sign(n10 + n11) * sign(n01 + n11));
            }
        }
    }
    g
}

/// The majority-boosted phase oracle B_x = V_x†(I − 2Π_maj)V_x with V_x = k
/// copies of the underlying call, described by its Gram matrix.
#[derive(Clone, Debug)]
pub struct BoostedOracle {
    pub k: usize,
    pub gram: Matrix,
    /// Single-copy P(output = 1 | x).
    pub q: Vec<f64>,
    /// P(majority of k outputs = 1 | x).
    pub majority_one: Vec<f64>,
    /// Base queries of one underlying application.
    pub call_cost: u64,
}

pub fn majority_boost(oracle: &dyn BitOracle, k: usize) -> Result<BoostedOracle> {
    if k % 2 == 0 {
        return invalid(format!("replication count must be odd, got {k}"));
    }
    let kb = kickback(oracle)?;
    let n = oracle.n();
    let gram = Matrix::from_fn(n, n, |x, y| {
        let t = [
            [inner(&kb.chi[x][0], &kb.chi[y][0]), inner(&kb.chi[x][0], &kb.chi[y][1])],
            [inner(&kb.chi[x][1], &kb.chi[y][0]), inner(&kb.chi[x][1], &kb.chi[y][1])],
        ];
        boosted_overlap(&t, k)
    });
    let majority_one = kb.q.iter().map(|&q| majority_probability(k, q)).collect();
    Ok(BoostedOracle { k, gram, q: kb.q, majority_one, call_cost: kb.call_cost })
}

impl BoostedOracle {
    pub fn n(&self) -> usize {
        self.gram.nrows()
    }

    /// ⟨0̄|B_x|0̄⟩ = 1 − 2·P(majority = 1 | x).
    pub fn diagonal(&self, x: usize) -> f64 {
        1.0 - 2.0 * self.majority_one[x]
    }

    /// Norm of B_x|0̄⟩ orthogonal to |0̄⟩ after uncomputation.
    pub fn residual_norm(&self, x: usize) -> f64 {
        (1.0 - self.diagonal(x).powi(2)).max(0.0).sqrt()
    }

    /// Base queries of one phase call V†(I − 2Π)V.
    pub fn phase_call_cost(&self) -> u64 {
        2 * self.k as u64 * self.call_cost
    }

    /// Base queries of one verifying evaluation V.
    pub fn verify_cost(&self) -> u64 {
        self.k as u64 * self.call_cost
    }

    /// Distribution of the measured index after `t` Grover iterations from
    /// the uniform superposition.
    pub fn grover_distribution(&self, t: usize) -> Result<Vec<f64>> {
        let n = self.n();
        let cs = gram_vectors(&self.gram);
        let r = cs[0].len();
        let calls: Vec<Matrix> = cs
            .iter()
            .map(|c| {
                let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                let c: Vec<C64> = c.iter().map(|v| v / norm).collect();
                unitary_with_first_column(&c)
            })
            .collect();
        let mut regs = vec![Register::new("x", n)];
        let names: Vec<String> = (0..t).map(|s| format!("anc{s}")).collect();
        regs.extend(names.iter().map(|nm| Register::new(nm.clone(), r)));
        let layout = RegisterLayout::from_registers(regs)?;
        let mut s = indexed_input(layout, &uniform_amplitudes(n))?;
        let u = 1.0 / n as f64;
        let diffusion = Matrix::from_fn(n, n, |i, j| {
            C64::new(2.0 * u - if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let diff = BlockMatrixOp::uniform(&["x"], diffusion);
        for nm in &names {
            BlockMatrixOp::indexed(&[nm.as_str()], &["x"], calls.clone(), |c| Some(c[0]))
                .apply(&mut s)?;
            diff.apply(&mut s)?;
        }
        Ok(s.measurement_distribution(&["x"])?.probs().to_vec())
    }
}

/// Iterations per run: 1, 2, 4, … until the total reaches ⌈(9/4)√N⌉.
pub fn grover_schedule(n: usize) -> Vec<usize> {
    let cap = (2.25 * (n as f64).sqrt()).ceil() as usize;
    let mut runs = Vec::new();
    let (mut used, mut next) = (0, 1);
    while used < cap {
        let t = next.min(cap - used);
        runs.push(t);
        used += t;
        next *= 2;
    }
    runs
}

/// Smallest odd k whose majority over outputs wrong with probability 1/3
/// errs with probability at most 1/(16N).
pub fn or_replication(n: usize) -> usize {
    smallest_odd_majority(1.0 / 3.0, 1.0 / (16.0 * n as f64))
}

/// Base queries of a full OR search over N indices when every run executes,
/// given k copies per boosted call and `call_cost` base queries per copy.
pub fn or_ledger(n: usize, k: usize, call_cost: u64) -> u64 {
    let kc = k as u64 * call_cost;
    grover_schedule(n).iter().map(|&t| t as u64 * 2 * kc + kc).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageLedger {
    pub stage: String,
    pub base_queries: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrResult {
    /// The more likely output bit.
    pub answer: bool,
    /// Exact probability that the output is 1.
    pub p_one: f64,
    /// Exact probability that the output equals OR(f).
    pub success_probability: f64,
    /// Base queries when every run executes.
    pub base_queries: u64,
    /// Base queries averaged over early stopping.
    pub expected_base_queries: f64,
    pub k: usize,
    pub runs: Vec<usize>,
    pub stages: Vec<StageLedger>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OrOptions {
    /// Replication count; defaults to [`or_replication`].
    pub k: Option<usize>,
    pub pipeline: PipelineOptions,
}

/// OR over any bit oracle with a given replication count.
pub fn search_or(oracle: &dyn BitOracle, k: usize) -> Result<OrResult> {
    let boost = majority_boost(oracle, k)?;
    let f = oracle.truth_table();
    let n = f.len();
    let runs = grover_schedule(n);
    let mut stages = Vec::new();
    let mut p_none = 1.0;
    let mut expected = 0.0;
    for (i, &t) in runs.iter().enumerate() {
        let dist = boost.grover_distribution(t)?;
        let hit: f64 = dist.iter().zip(&boost.majority_one).map(|(p, v)| p * v).sum();
        let cost = t as u64 * boost.phase_call_cost() + boost.verify_cost();
        expected += p_none * cost as f64;
        p_none *= 1.0 - hit;
        stages.push(StageLedger { stage: format!("run {} ({t} iterations)", i + 1), base_queries: cost });
    }
    let p_one = 1.0 - p_none;
    let truth = f.iter().any(|&b| b);
    Ok(OrResult {
        answer: p_one >= 0.5,
        p_one,
        success_probability: if truth { p_one } else { p_none },
        base_queries: stages.iter().map(|s| s.base_queries).sum(),
        expected_base_queries: expected,
        k,
        runs,
        stages,
    })
}

/// OR of the truth table behind an ε-biased oracle with known ε.
pub fn robust_or(o: &BiasedOracle, eps: f64, options: OrOptions) -> Result<OrResult> {
    let sim = simulate_one_sixth_with(o, eps, options.pipeline)?;
    let k = options.k.unwrap_or_else(|| or_replication(o.n()));
    search_or(&sim, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{build_biased_oracle, OracleSpec, WorkModel};

    #[test]
    fn schedule_for_four() {
        assert_eq!(grover_schedule(4), vec![1, 2, 2]);
        assert_eq!(grover_schedule(1), vec![1, 2]);
    }

    #[test]
    fn even_k_rejected() {
        let o = build_biased_oracle(
            OracleSpec::uniform(vec![false, true], 0.5, 1, WorkModel::Clean).unwrap(),
        )
        .unwrap();
        assert!(majority_boost(&o, 2).is_err());
    }

    #[test]
    fn perfect_oracle_single_iteration() {
        let o = build_biased_oracle(
            OracleSpec::uniform(vec![false, false, true, false], 0.5, 2, WorkModel::Clean)
                .unwrap(),
        )
        .unwrap();
        let b = majority_boost(&o, 1).unwrap();
        let d = b.grover_distribution(1).unwrap();
        assert!((d[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_copy_gram_is_signed_oracle_overlap() {
        let o = build_biased_oracle(
            OracleSpec::new(
                vec![true, false, true],
                vec![0.1, 0.3, 0.45],
                2,
                WorkModel::Garbage { seed: 9 },
            )
            .unwrap(),
        )
        .unwrap();
        let s = crate::oracles::build_signed_oracle(&o);
        let b = majority_boost(&o, 1).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let want: C64 = s
                    .matrix(x)
                    .column(0)
                    .iter()
                    .zip(s.matrix(y).column(0).iter())
                    .map(|(a, c)| a.conj() * c)
                    .sum();
                assert!((b.gram[(x, y)] - want).norm() < 1e-12);
            }
        }
    }
}
