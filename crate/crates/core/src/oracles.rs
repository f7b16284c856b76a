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

//! Biased oracles and the two-call signed oracle built from them.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::unitary_with_first_column;
use crate::qstate::{
    Adjoint, BasisPredicate, BlockMatrixOp, Counted, Matrix, Register, Sequence, SignFlip, C64,
    MAX_AMPLITUDES,
};

/// How the work register behaves on a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkModel {
    /// The work register is returned to all-zero on both answer branches.
    Clean,
    /// Each x leaves its own pseudo-random work states, drawn from `seed`.
    Garbage { seed: u64 },
}

/// Truth table, per-index biases, and work-register model of an oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpec {
    /// Work plus answer qubits; the work register holds m − 1 qubits.
    pub m: usize,
    pub f: Vec<bool>,
    pub biases: Vec<f64>,
    pub work_model: WorkModel,
}

impl OracleSpec {
    pub fn new(f: Vec<bool>, biases: Vec<f64>, m: usize, work_model: WorkModel) -> Result<Self> {
        let spec = OracleSpec { m, f, biases, work_model };
        spec.validate()?;
        Ok(spec)
    }

    /// Every index gets the same bias.
    pub fn uniform(f: Vec<bool>, eps: f64, m: usize, work_model: WorkModel) -> Result<Self> {
        let n = f.len();
        Self::new(f, vec![eps; n], m, work_model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f.len();
        if n == 0 {
            return invalid("oracle domain is empty");
        }
        if self.biases.len() != n {
            return invalid(format!("{} biases given for a domain of size {n}", self.biases.len()));
        }
        for (x, &e) in self.biases.iter().enumerate() {
            if !(e > 0.0 && e <= 0.5) {
                return invalid(format!("bias for x={x} is {e}, outside (0, 1/2]"));
            }
        }
        if self.m == 0 || self.m > 20 || n.saturating_mul(1 << self.m) > MAX_AMPLITUDES {
            return invalid(format!("m = {} does not fit the simulator", self.m));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn eps_min(&self) -> f64 {
        self.biases.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn work_dim(&self) -> usize {
        1 << (self.m - 1)
    }

    /// θ_x with sin θ_x = 2ε_x.
    pub fn theta(&self, x: usize) -> f64 {
        (2.0 * self.biases[x]).min(1.0).asin()
    }
}

/// Register names an oracle acts on. The pad qubit is only used by the
/// signed oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRegisters {
    pub index: String,
    pub work: String,
    pub answer: String,
    pub pad: String,
}

impl Default for OracleRegisters {
    fn default() -> Self {
        Self::with_prefix("x", "")
    }
}

impl OracleRegisters {
    pub fn with_prefix(index: &str, prefix: &str) -> Self {
        OracleRegisters {
            index: index.to_string(),
            work: format!("{prefix}work"),
            answer: format!("{prefix}ans"),
            pad: format!("{prefix}pad"),
        }
    }

    pub fn workspace_names(&self) -> [&str; 3] {
        [&self.work, &self.answer, &self.pad]
    }
}

/// An ε-biased oracle realized as one unitary per index on (work, answer).
#[derive(Debug)]
pub struct BiasedOracle {
    spec: OracleSpec,
    unitaries: Vec<Matrix>,
    counter: Arc<AtomicU64>,
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

pub fn build_biased_oracle(spec: OracleSpec) -> Result<BiasedOracle> {
    spec.validate()?;
    let w = spec.work_dim();
    let mut unitaries = Vec::with_capacity(spec.n());
    for x in 0..spec.n() {
        let (wx, wpx) = match spec.work_model {
            WorkModel::Clean => {
                let mut e0 = vec![C64::new(0.0, 0.0); w];
                e0[0] = C64::new(1.0, 0.0);
                (e0.clone(), e0)
            }
            WorkModel::Garbage { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(x as u64);
                (random_unit_vector(&mut rng, w), random_unit_vector(&mut rng, w))
            }
        };
        let alpha = (0.5 + spec.biases[x]).sqrt();
        let beta = (0.5 - spec.biases[x]).max(0.0).sqrt();
        let fx = spec.f[x] as usize;
        let mut col = vec![C64::new(0.0, 0.0); 2 * w];
        for i in 0..w {
            col[2 * i + fx] += wx[i] * alpha;
            col[2 * i + (1 - fx)] += wpx[i] * beta;
        }
        unitaries.push(unitary_with_first_column(&col));
    }
    Ok(BiasedOracle { spec, unitaries, counter: Arc::new(AtomicU64::new(0)) })
}

impl BiasedOracle {
    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// U_x on (work, answer), answer qubit least significant.
    pub fn unitary(&self, x: usize) -> &Matrix {
        &self.unitaries[x]
    }

    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    /// The registers the oracle touches, index first.
    pub fn registers(&self, regs: &OracleRegisters) -> Vec<Register> {
        vec![
            Register::new(regs.index.clone(), self.n()),
            Register::new(regs.work.clone(), self.spec.work_dim()),
            Register::new(regs.answer.clone(), 2),
        ]
    }

    /// The oracle as an operator controlled by the index register; one query
    /// per forward or inverse application.
    pub fn op(&self, regs: &OracleRegisters) -> Counted<BlockMatrixOp> {
        let inner = BlockMatrixOp::indexed(
            &[regs.work.as_str(), regs.answer.as_str()],
            &[regs.index.as_str()],
            self.unitaries.clone(),
            |c| Some(c[0]),
        );
        Counted { inner, counter: self.counter.clone(), per_use: 1 }
    }

    pub fn counter(&self) -> Arc<AtomicU64> {
        self.counter.clone()
    }

    pub fn queries(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn reset_and_read_queries(&self) -> u64 {
        self.counter.swap(0, Ordering::Relaxed)
    }
}

/// Õ = O† Z_answer O, padded with one idle qubit. Its zero-workspace
/// amplitude is (−1)^{f(x)} 2ε_x.
#[derive(Debug)]
pub struct SignedOracle {
    spec: OracleSpec,
    mats: Vec<Matrix>,
    counter: Arc<AtomicU64>,
}

pub fn build_signed_oracle(o: &BiasedOracle) -> SignedOracle {
    let dim = 2 * o.spec.work_dim();
    let z = Matrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |i, _| {
        C64::new(if i % 2 == 1 { -1.0 } else { 1.0 }, 0.0)
    }));
    let id2 = Matrix::identity(2, 2);
    let mats = o
        .unitaries
        .iter()
        .map(|u| (u.adjoint() * &z * u).kronecker(&id2))
        .collect();
    SignedOracle { spec: o.spec.clone(), mats, counter: o.counter.clone() }
}

impl SignedOracle {
    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// Dimension of the (work, answer, pad) workspace.
    pub fn workspace_dim(&self) -> usize {
        4 * self.spec.work_dim()
    }

    pub fn workspace(&self, regs: &OracleRegisters) -> Vec<Register> {
        vec![
            Register::new(regs.work.clone(), self.spec.work_dim()),
            Register::new(regs.answer.clone(), 2),
            Register::new(regs.pad.clone(), 2),
        ]
    }

    pub fn matrix(&self, x: usize) -> &Matrix {
        &self.mats[x]
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }

    /// ⟨x, 0̄|Õ|x, 0̄⟩.
    pub fn diagonal(&self, x: usize) -> C64 {
        self.mats[x][(0, 0)]
    }

    /// Norm of Õ|x, 0̄⟩ orthogonal to |x, 0̄⟩.
    pub fn residual_norm(&self, x: usize) -> f64 {
        let col = self.mats[x].column(0);
        col.iter().skip(1).map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Predicate "workspace is all zero", the good set for estimation.
    pub fn zero_predicate(&self, regs: &OracleRegisters) -> BasisPredicate {
        BasisPredicate::all_zero(&regs.workspace_names())
    }

    /// Fused operator; two base queries per application.
    pub fn op(&self, regs: &OracleRegisters) -> Counted<BlockMatrixOp> {
        let inner = BlockMatrixOp::indexed(
            &regs.workspace_names(),
            &[regs.index.as_str()],
            self.mats.clone(),
            |c| Some(c[0]),
        );
        Counted { inner, counter: self.counter.clone(), per_use: 2 }
    }

    pub fn queries(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn reset_and_read_queries(&self) -> u64 {
        self.counter.swap(0, Ordering::Relaxed)
    }
}

/// Õ written out gate by gate: O, then Z on the answer, then O†.
pub fn signed_from_calls<'a>(o: &'a BiasedOracle, regs: &OracleRegisters) -> Sequence<'a> {
    let ans = regs.answer.clone();
    Sequence(vec![
        Box::new(o.op(regs)),
        Box::new(SignFlip(BasisPredicate::new(&[ans.as_str()], |c| c[0] == 1))),
        Box::new(Adjoint(o.op(regs))),
    ])
}
