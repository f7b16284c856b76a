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

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robq::linalg::unitarity_defect;
use robq::oracles::{
    build_biased_oracle, build_signed_oracle, OracleRegisters, OracleSpec, WorkModel,
};
use robq::qaa::GroverOp;
use robq::qstate::{apply_controlled_power, Operator, Register, RegisterLayout, SignFlip, StateVector};

fn random_spec(rng: &mut ChaCha8Rng, n: usize, m: usize, wm: WorkModel) -> OracleSpec {
    let f = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let b = (0..n).map(|_| rng.random_range(0.05..=0.5)).collect();
    OracleSpec::new(f, b, m, wm).unwrap()
}

#[test]
fn randomized_specs_are_unitary_with_exact_bias() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..24 {
        let n = [2, 4, 8][i % 3];
        let m = 2 + i % 2;
        let wm = if i % 4 < 2 { WorkModel::Clean } else { WorkModel::Garbage { seed: i as u64 } };
        let spec = random_spec(&mut rng, n, m, wm);
        let o = build_biased_oracle(spec.clone()).unwrap();
        let regs = OracleRegisters::default();
        let layout = RegisterLayout::from_registers(o.registers(&regs)).unwrap();
        for x in 0..n {
            assert!(unitarity_defect(o.unitary(x)) < 1e-10);
            let mut s = StateVector::basis_state(layout.clone(), &[x, 0, 0]).unwrap();
            o.op(&regs).apply(&mut s).unwrap();
            let p = s.measurement_distribution(&["ans"]).unwrap().probs()[spec.f[x] as usize];
            assert!((p - (0.5 + spec.biases[x])).abs() < 1e-10);
        }
        let s = build_signed_oracle(&o);
        for x in 0..n {
            assert!(unitarity_defect(s.matrix(x)) < 1e-10);
        }
    }
}

#[test]
fn perfect_clean_oracle_computes_f() {
    let f = vec![true, false, false, true, true, false, true, false];
    let o = build_biased_oracle(OracleSpec::uniform(f.clone(), 0.5, 2, WorkModel::Clean).unwrap())
        .unwrap();
    let regs = OracleRegisters::default();
    let layout = RegisterLayout::from_registers(o.registers(&regs)).unwrap();
    for (x, &fx) in f.iter().enumerate() {
        let mut s = StateVector::basis_state(layout.clone(), &[x, 0, 0]).unwrap();
        o.op(&regs).apply(&mut s).unwrap();
        assert!((s.amplitude(&[x, 0, fx as usize]).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn counter_rules() {
    let o = build_biased_oracle(
        OracleSpec::uniform(vec![false, true], 0.3, 2, WorkModel::Garbage { seed: 1 }).unwrap(),
    )
    .unwrap();
    let s = build_signed_oracle(&o);
    let regs = OracleRegisters::default();
    let mut rl = vec![Register::new("x", 2)];
    rl.extend(s.workspace(&regs));
    rl.push(Register::new("j", 5));
    let mut st = StateVector::zero(RegisterLayout::from_registers(rl).unwrap());

    let op = o.op(&regs);
    op.apply(&mut st).unwrap();
    op.apply_adjoint(&mut st).unwrap();
    assert_eq!(o.reset_and_read_queries(), 2);

    let signed = s.op(&regs);
    signed.apply(&mut st).unwrap();
    assert_eq!(o.reset_and_read_queries(), 2);

    let chi = SignFlip(s.zero_predicate(&regs));
    let q = GroverOp::new(&signed, s.zero_predicate(&regs), &chi);
    st.apply_fourier("j", 5).unwrap();
    apply_controlled_power(&mut st, "j", &q, 5).unwrap();
    assert_eq!(o.reset_and_read_queries(), 4 * 5);
    assert_eq!(o.reset_and_read_queries(), 0);
}
