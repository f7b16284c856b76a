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

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robq::qaa::{
    amplify, est_phase, grover_operator, par_est_phase, predicted_grid_distribution,
    predicted_phase_distribution, uniform_amplitudes, EstimateRegister, ParallelOracle,
    SearchInstance, EST,
};
use robq::qstate::{BasisPredicate, BlockMatrixOp, Matrix, Operator, Register};

fn ry(p: f64) -> Matrix {
    let (c, s) = ((1.0 - p).sqrt(), p.sqrt());
    Matrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
}

/// An index-controlled rotation with per-x success angle θ_x on a work
/// register of dimension 3, good state = work 1.
fn angle_oracle(thetas: &[f64]) -> BlockMatrixOp {
    let mats = thetas
        .iter()
        .map(|&t| {
            let mut m = Matrix::identity(3, 3);
            let (c, s) = (t.cos(), t.sin());
            m[(0, 0)] = C64::new(c, 0.0);
            m[(1, 0)] = C64::new(s, 0.0);
            m[(0, 1)] = C64::new(-s, 0.0);
            m[(1, 1)] = C64::new(c, 0.0);
            m
        })
        .collect();
    BlockMatrixOp::indexed(&["w"], &["x"], mats, |c| Some(c[0]))
}

#[test]
fn amplify_example_near_optimal_iteration() {
    let p: f64 = 0.1;
    let inst = SearchInstance::new(
        vec![Register::new("q", 2)],
        BlockMatrixOp::uniform(&["q"], ry(p)),
        BasisPredicate::new(&["q"], |c| c[0] == 1),
    )
    .unwrap();
    let th = inst.theta_p().unwrap();
    assert!((th - p.sqrt().asin()).abs() < 1e-12);
    let j = (PI / (4.0 * th)).floor() as usize;
    let s = amplify(&inst, j).unwrap();
    assert!(s.probability_of(inst.chi()).unwrap() >= 1.0 - p);
    // Q applied to p = 1 stays at good mass 1.
    let full = SearchInstance::new(
        vec![Register::new("q", 2)],
        BlockMatrixOp::uniform(&["q"], ry(1.0)),
        BasisPredicate::new(&["q"], |c| c[0] == 1),
    )
    .unwrap();
    let mut s = full.prepared().unwrap();
    grover_operator(&full).apply(&mut s).unwrap();
    assert!((s.probability_of(full.chi()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn parallel_estimation_on_grid_angles_is_exact() {
    let op = angle_oracle(&[PI / 6.0, PI / 3.0]);
    let po = ParallelOracle {
        index: Register::new("x", 2),
        workspace: vec![Register::new("w", 3)],
        op: &op,
        chi: BasisPredicate::new(&["w"], |c| c[0] == 1),
    };
    let est = par_est_phase(&po, &uniform_amplitudes(2), 12, EstimateRegister::Materialized).unwrap();
    let rows = est.per_x_grid_distribution().unwrap();
    assert!((rows[0][2] - 1.0).abs() < 1e-9);
    assert!((rows[1][4] - 1.0).abs() < 1e-9);
}

#[test]
fn parallel_estimation_matches_prediction_for_pi_over_three_mod_five() {
    let op = angle_oracle(&[PI / 3.0, 0.4]);
    let po = ParallelOracle {
        index: Register::new("x", 2),
        workspace: vec![Register::new("w", 3)],
        op: &op,
        chi: BasisPredicate::new(&["w"], |c| c[0] == 1),
    };
    let est = par_est_phase(&po, &uniform_amplitudes(2), 5, EstimateRegister::View).unwrap();
    // Per-j marginal of the raw phase register.
    let marg = est.state.measurement_distribution(&["x", EST]).unwrap();
    for (x, &t) in [PI / 3.0, 0.4].iter().enumerate() {
        let want = predicted_phase_distribution(t, 5);
        for (a, b) in marg.conditional_on_first(x).iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn input_shape_mismatch_is_rejected() {
    let op = angle_oracle(&[0.3, 0.4]);
    let po = ParallelOracle {
        index: Register::new("x", 2),
        workspace: vec![Register::new("w", 3)],
        op: &op,
        chi: BasisPredicate::new(&["w"], |c| c[0] == 1),
    };
    assert!(par_est_phase(&po, &uniform_amplitudes(3), 4, EstimateRegister::View).is_err());
    assert!(par_est_phase(&po, &uniform_amplitudes(2), 1, EstimateRegister::View).is_err());
}

#[test]
fn fejer_floor_over_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let floor = 8.0 / (PI * PI);
    for _ in 0..200 {
        let theta = rng.random_range(1e-3..PI / 2.0 - 1e-3);
        let m = rng.random_range(2..200usize);
        let dist = predicted_grid_distribution(theta, m);
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let good: f64 = dist
            .iter()
            .enumerate()
            .filter(|(k, _)| (theta - PI * *k as f64 / m as f64).abs() <= PI / m as f64 + 1e-12)
            .map(|(_, p)| p)
            .sum();
        assert!(good >= floor - 1e-9, "theta = {theta}, M = {m}");
    }
}

#[test]
fn exact_grid_property_and_counts() {
    for (k, m) in [(1usize, 6usize), (2, 10), (3, 12), (1, 4)] {
        let theta = PI * k as f64 / m as f64;
        let p = theta.sin().powi(2);
        let inst = SearchInstance::new(
            vec![Register::new("q", 2)],
            BlockMatrixOp::uniform(&["q"], ry(p)),
            BasisPredicate::new(&["q"], |c| c[0] == 1),
        )
        .unwrap();
        let e = est_phase(&inst, m).unwrap();
        assert!((e.grid[k] - 1.0).abs() < 1e-9);
        assert_eq!(e.a_invocations, 2 * m as u64 + 1);
        assert_eq!(e.chi_invocations, m as u64);
    }
}
