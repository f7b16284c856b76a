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

use num_complex::Complex64 as C64;

use robq::binomial::{majority_probability, tail_at_least};
use robq::oracles::{build_biased_oracle, BiasedOracle, OracleSpec, WorkModel};
use robq::qstate::{
    BasisPredicate, BlockMatrixOp, FourierOp, Matrix, Operator, Register, RegisterLayout, SignFlip,
    StateVector,
};
use robq::robustify::simulate_one_sixth;
use robq::robustify::queries_per_application;
use robq::search::{
    grover_schedule, majority_boost, or_ledger, or_replication, robust_or, BitOracle, OrOptions,
};

/// Grover search with t boosted calls, each on its own k copies of the
/// oracle's registers, simulated on the full register set.
fn dense_distribution(o: &BiasedOracle, k: usize, t: usize) -> Vec<f64> {
    let n = o.n();
    let mut regs = vec![Register::new("x", n)];
    for s in 0..t {
        for c in 0..k {
            regs.extend(BitOracle::workspace(o, &format!("s{s}c{c}_")));
        }
    }
    let mut st = StateVector::zero(RegisterLayout::from_registers(regs).unwrap());
    FourierOp::new("x").apply(&mut st).unwrap();
    let u = 1.0 / n as f64;
    let diffusion = Matrix::from_fn(n, n, |i, j| C64::new(2.0 * u - if i == j { 1.0 } else { 0.0 }, 0.0));
    for s in 0..t {
        let prefixes: Vec<String> = (0..k).map(|c| format!("s{s}c{c}_")).collect();
        for p in &prefixes {
            o.operator("x", p).apply(&mut st).unwrap();
        }
        let answers: Vec<String> = prefixes.iter().map(|p| o.output_register(p)).collect();
        SignFlip(BasisPredicate::new(&answers, move |c| 2 * c.iter().sum::<usize>() > k))
            .apply(&mut st)
            .unwrap();
        for p in prefixes.iter().rev() {
            o.operator("x", p).apply_adjoint(&mut st).unwrap();
        }
        BlockMatrixOp::uniform(&["x"], diffusion.clone()).apply(&mut st).unwrap();
    }
    st.measurement_distribution(&["x"]).unwrap().probs().to_vec()
}

#[test]
fn gram_reduction_matches_dense_search() {
    let o = build_biased_oracle(
        OracleSpec::new(
            vec![false, true, false, false],
            vec![0.2, 0.35, 0.45, 0.3],
            2,
            WorkModel::Garbage { seed: 31 },
        )
        .unwrap(),
    )
    .unwrap();
    let b = majority_boost(&o, 3).unwrap();
    for t in 1..=2 {
        let reduced = b.grover_distribution(t).unwrap();
        let dense = dense_distribution(&o, 3, t);
        for (a, d) in reduced.iter().zip(&dense) {
            assert!((a - d).abs() < 1e-10, "t = {t}: {reduced:?} vs {dense:?}");
        }
    }
}

#[test]
fn replication_counts() {
    assert_eq!(or_replication(4), 39);
    let tail = |k: usize| tail_at_least(k, k / 2 + 1, 1.0 / 3.0);
    assert!(tail(39) <= 1.0 / 64.0 && tail(37) > 1.0 / 64.0);
    assert!(tail(17) > 1.0 / 64.0);
    // Five copies at per-x success 2/3.
    assert!(majority_probability(5, 2.0 / 3.0) >= 0.7901);
}

#[test]
fn boosted_simulated_oracle_error_and_uncompute_residual() {
    let o = build_biased_oracle(
        OracleSpec::new(vec![true, false], vec![0.3, 0.4], 2, WorkModel::Garbage { seed: 4 }).unwrap(),
    )
    .unwrap();
    let sim = simulate_one_sixth(&o, 0.3).unwrap();
    let k = 5;
    let b = majority_boost(&sim, k).unwrap();
    let bound = tail_at_least(k, k / 2 + 1, 1.0 / 3.0);
    for x in 0..2 {
        let fx = sim.truth_table()[x];
        let err = if fx { 1.0 - b.majority_one[x] } else { b.majority_one[x] };
        assert!(err <= bound + 1e-12);
        // B_x|0̄⟩ = (1 − 2P[maj = 1])|0̄⟩ + residual, |residual| = 2√(e(1 − e)).
        let resid = b.residual_norm(x);
        assert!((resid - 2.0 * (err * (1.0 - err)).sqrt()).abs() < 1e-9);
        let deviation_sq = (b.diagonal(x) - if fx { -1.0 } else { 1.0 }).powi(2) + resid * resid;
        assert!(deviation_sq <= 4.0 * bound + 1e-12);
        assert!((b.gram[(x, x)].re - 1.0).abs() < 1e-9);
    }
    assert_eq!(b.call_cost, sim.base_queries_per_application());
}

#[test]
fn or_ledger_is_the_sum_of_stages() {
    let o = build_biased_oracle(
        OracleSpec::uniform(vec![false, false, true, false], 0.3, 2, WorkModel::Clean).unwrap(),
    )
    .unwrap();
    let r = robust_or(&o, 0.3, OrOptions { k: Some(5), ..Default::default() }).unwrap();
    assert_eq!(r.runs, grover_schedule(4));
    assert_eq!(r.base_queries, r.stages.iter().map(|s| s.base_queries).sum::<u64>());
    let s_cost = 4 * (61 + 2 + 1);
    assert_eq!(r.base_queries, s_cost * (2 * 5 * 5 + 5 * 3));
    assert_eq!(r.base_queries, or_ledger(4, 5, queries_per_application(0.3).unwrap()));
    assert!(r.expected_base_queries <= r.base_queries as f64);
    assert!(r.answer && r.success_probability >= 2.0 / 3.0);
}

#[test]
fn perfect_oracle_search_with_single_copy() {
    let o = build_biased_oracle(
        OracleSpec::uniform(vec![false, false, true, false], 0.5, 2, WorkModel::Garbage { seed: 2 })
            .unwrap(),
    )
    .unwrap();
    let r = robq::search::search_or(&o, 1).unwrap();
    assert!((r.success_probability - 1.0).abs() < 1e-12);
    assert_eq!(r.stages[0].base_queries, 2 + 1);
}
