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

//! Simulating a 1/6-biased oracle from an ε-biased one with O(1/ε) queries:
//! parallel phase estimation of the signed oracle, then a per-branch
//! de-randomized amplification between two Hadamards on an output qubit.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::oracles::{build_signed_oracle, BiasedOracle, OracleRegisters};
use crate::qaa::{
    grid_index, par_est_phase, predicted_grid_distribution, uniform_amplitudes,
    EstimateRegister, ParallelOracle, PhaseGrid, EST,
};
use crate::qstate::{
    controlled_power_where, BasisPredicate, BlockMatrixOp, Cond, Counted, Matrix, Operator,
    Register, StateVector, C64,
};

/// θ with sin θ = 2ε.
pub fn bias_angle(eps: f64) -> f64 {
    (2.0 * eps).min(1.0).asin()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return invalid(format!("eps = {eps} is outside (0, 1/2]"));
    }
    Ok(())
}

/// M₁ = ⌈3π(π+1)/θ⌉.
pub fn estimation_modulus(eps: f64) -> Result<usize> {
    check_eps(eps)?;
    Ok((3.0 * PI * (PI + 1.0) / bias_angle(eps)).ceil() as usize)
}

/// M₂ = ⌈(3π(π+1)/(2(3π+2)θ) + 1)/2⌉.
pub fn amplification_cap(eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let t = bias_angle(eps);
    Ok((0.5 * (3.0 * PI * (PI + 1.0) / (2.0 * (3.0 * PI + 2.0) * t) + 1.0)).ceil() as usize)
}

/// Base queries per application of the clamped pipeline, 4(M₁ + M₂ + 1).
pub fn queries_per_application(eps: f64) -> Result<u64> {
    Ok(4 * (estimation_modulus(eps)? + amplification_cap(eps)? + 1) as u64)
}

/// Amplification parameters chosen from one estimate θ̃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifySchedule {
    pub theta_tilde: f64,
    /// ⌈(π/(2θ̃) − 1)/2⌉; `None` when θ̃ = 0.
    pub m_star: Option<usize>,
    /// π/(4m* + 2), or 0 when θ̃ = 0.
    pub theta_star: f64,
    pub p_star: f64,
    pub p_tilde: f64,
    /// Iterations actually run: min(m*, M₂), or M₂ when θ̃ = 0.
    pub m_clamped: usize,
}

impl AmplifySchedule {
    fn build(theta_tilde: f64, m_star: Option<usize>, m2: usize, clamp: bool) -> Self {
        match m_star {
            None => AmplifySchedule {
                theta_tilde,
                m_star: None,
                theta_star: 0.0,
                p_star: 0.0,
                p_tilde: 0.0,
                m_clamped: if clamp { m2 } else { 0 },
            },
            Some(ms) => {
                let theta_star = PI / (4 * ms + 2) as f64;
                AmplifySchedule {
                    theta_tilde,
                    m_star,
                    theta_star,
                    p_star: theta_star.sin().powi(2),
                    p_tilde: theta_tilde.sin().powi(2),
                    m_clamped: if clamp { ms.min(m2) } else { ms },
                }
            }
        }
    }

    /// |0⟩-amplitude of R, √(min(1, p*/p̃)); 1 when p̃ = 0.
    pub fn rotation_ratio(&self) -> f64 {
        if self.p_tilde <= 0.0 {
            1.0
        } else {
            (self.p_star / self.p_tilde).min(1.0)
        }
    }
}

pub fn schedule_from_estimate(theta_tilde: f64, m2: usize) -> AmplifySchedule {
    let m_star = if theta_tilde <= 0.0 {
        None
    } else {
        // Snap before the ceiling so grid values like π/6 give exact integers.
        let v = 0.5 * (PI / (2.0 * theta_tilde) - 1.0);
        Some((v - 1e-9).ceil().max(0.0) as usize)
    };
    AmplifySchedule::build(theta_tilde, m_star, m2, true)
}

/// Schedule for the grid estimate θ̃ = πk/M, with m* in exact integer
/// arithmetic: m* = ⌈(M − 2k)/(4k)⌉.
pub fn schedule_from_grid(k: usize, m: usize, m2: usize, clamp: bool) -> AmplifySchedule {
    let theta_tilde = PI * k as f64 / m as f64;
    let m_star = if k == 0 { None } else { Some((m - 2 * k).div_ceil(4 * k)) };
    AmplifySchedule::build(theta_tilde, m_star, m2, clamp)
}

/// R : |0⟩ ↦ √(p*/p̃)|0⟩ + √(1 − p*/p̃)|1⟩, with the ratio clamped to 1 and
/// the identity when p̃ = 0.
pub fn rotation_r(p_star: f64, p_tilde: f64) -> Matrix {
    let r = if p_tilde <= 0.0 { 1.0 } else { (p_star / p_tilde).min(1.0) };
    rotation_from_ratio(r)
}

fn rotation_from_ratio(r: f64) -> Matrix {
    let c = r.sqrt();
    let s = (1.0 - r).max(0.0).sqrt();
    Matrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    )
}

/// Switches for the negative controls; both on in the real construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Cap the amplification count at M₂.
    pub clamp: bool,
    /// Apply the rotation R (otherwise R = I).
    pub rotation: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { clamp: true, rotation: true }
    }
}

/// Register names of one pipeline instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineRegisters {
    pub index: String,
    pub est_ws: OracleRegisters,
    pub est: String,
    pub amp_ws: OracleRegisters,
    pub rot: String,
    pub out: String,
}

impl PipelineRegisters {
    pub fn new(index: &str, prefix: &str) -> Self {
        PipelineRegisters {
            index: index.to_string(),
            est_ws: OracleRegisters::with_prefix(index, &format!("{prefix}e_")),
            est: format!("{prefix}{EST}"),
            amp_ws: OracleRegisters::with_prefix(index, &format!("{prefix}a_")),
            rot: format!("{prefix}rot"),
            out: format!("{prefix}out"),
        }
    }

    fn amp_targets(&self) -> [&str; 4] {
        [&self.amp_ws.work, &self.amp_ws.answer, &self.amp_ws.pad, &self.rot]
    }
}

impl Default for PipelineRegisters {
    fn default() -> Self {
        Self::new("x", "")
    }
}

/// Reflection −V S₀ V† S_χ where S₀ and S_χ both flip the all-zero vector.
fn zero_grover(v: &Matrix) -> Matrix {
    let d = v.nrows();
    let mut s0 = Matrix::identity(d, d);
    s0[(0, 0)] = C64::new(-1.0, 0.0);
    -(v * &s0 * v.adjoint() * &s0)
}

/// The simulated oracle: a unitary on (x, estimation workspace, phase
/// register, amplification workspace, rotation qubit, output qubit).
#[derive(Debug)]
pub struct SimulatedOracle {
    eps: f64,
    m1: usize,
    m2: usize,
    options: PipelineOptions,
    f: Vec<bool>,
    thetas: Vec<f64>,
    work_dim: usize,
    signed: Vec<Matrix>,
    q_est: Vec<Matrix>,
    schedules: Vec<AmplifySchedule>,
    o_amp: Vec<Matrix>,
    q_amp: Vec<Matrix>,
    loops: usize,
    counter: Arc<AtomicU64>,
}

pub fn simulate_one_sixth(o: &BiasedOracle, eps: f64) -> Result<SimulatedOracle> {
    simulate_one_sixth_with(o, eps, PipelineOptions::default())
}

pub fn simulate_one_sixth_with(
    o: &BiasedOracle,
    eps: f64,
    options: PipelineOptions,
) -> Result<SimulatedOracle> {
    let m1 = estimation_modulus(eps)?;
    let m2 = amplification_cap(eps)?;
    let signed = build_signed_oracle(o);
    let n = o.n();
    let grid = PhaseGrid { m: m1 };
    let schedules: Vec<AmplifySchedule> =
        (0..grid.len()).map(|k| schedule_from_grid(k, m1, m2, options.clamp)).collect();
    let loops = if options.clamp {
        m2
    } else {
        schedules.iter().map(|s| s.m_clamped).max().unwrap_or(0)
    };
    let mut o_amp = Vec::with_capacity(n * grid.len());
    let mut q_amp = Vec::with_capacity(n * grid.len());
    for x in 0..n {
        for s in &schedules {
            let r = if options.rotation { s.rotation_ratio() } else { 1.0 };
            let v = signed.matrix(x).kronecker(&rotation_from_ratio(r));
            q_amp.push(zero_grover(&v));
            o_amp.push(v);
        }
    }
    Ok(SimulatedOracle {
        eps,
        m1,
        m2,
        options,
        f: o.spec().f.clone(),
        thetas: (0..n).map(|x| o.spec().theta(x)).collect(),
        work_dim: o.spec().work_dim(),
        q_est: signed.matrices().iter().map(zero_grover).collect(),
        signed: signed.matrices().to_vec(),
        schedules,
        o_amp,
        q_amp,
        loops,
        counter: o.counter(),
    })
}

/// Result of evaluating the simulated oracle once on a uniform superposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// P(output = f(x) | x) for every x.
    pub success: Vec<f64>,
    /// Base-oracle queries consumed.
    pub base_queries: u64,
}

impl SimulatedOracle {
    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn options(&self) -> PipelineOptions {
        self.options
    }

    pub fn truth_table(&self) -> &[bool] {
        &self.f
    }

    /// One schedule per grid value πk/M₁.
    pub fn schedules(&self) -> &[AmplifySchedule] {
        &self.schedules
    }

    /// Number of Q applications inside the amplification stage.
    pub fn amplification_loops(&self) -> usize {
        self.loops
    }

    /// Base queries per application (forward or inverse):
    /// 2 + 4M₁ for estimation, 2 + 4·loops for amplification.
    pub fn base_queries_per_application(&self) -> u64 {
        (4 * self.m1 + 2 + 4 * self.loops + 2) as u64
    }

    pub fn counter(&self) -> Arc<AtomicU64> {
        self.counter.clone()
    }

    /// All registers except the index, in layout order.
    pub fn workspace(&self, regs: &PipelineRegisters) -> Vec<Register> {
        let w = self.work_dim;
        vec![
            Register::new(regs.est_ws.work.clone(), w),
            Register::new(regs.est_ws.answer.clone(), 2),
            Register::new(regs.est_ws.pad.clone(), 2),
            Register::new(regs.est.clone(), self.m1),
            Register::new(regs.amp_ws.work.clone(), w),
            Register::new(regs.amp_ws.answer.clone(), 2),
            Register::new(regs.amp_ws.pad.clone(), 2),
            Register::new(regs.rot.clone(), 2),
            Register::new(regs.out.clone(), 2),
        ]
    }

    fn grid_len(&self) -> usize {
        self.m1 / 2 + 1
    }

    fn counted(&self, inner: BlockMatrixOp, per_use: u64) -> Counted<BlockMatrixOp> {
        Counted { inner, counter: self.counter.clone(), per_use }
    }

    fn signed_op(&self, regs: &PipelineRegisters) -> Counted<BlockMatrixOp> {
        let op = BlockMatrixOp::indexed(
            &regs.est_ws.workspace_names(),
            &[regs.index.as_str()],
            self.signed.clone(),
            |c| Some(c[0]),
        );
        self.counted(op, 2)
    }

    fn hadamard(regs: &PipelineRegisters) -> BlockMatrixOp {
        let h = 1.0 / 2f64.sqrt();
        let m = Matrix::from_row_slice(
            2,
            2,
            &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)],
        );
        BlockMatrixOp::uniform(&[regs.out.as_str()], m)
    }

    /// Steps after the inverse Fourier transform: H on the output qubit, the
    /// controlled O = Õ⊗R, the controlled Λ_{M₂}(Q), H again.
    fn amplification_stage(
        &self,
        state: &mut StateVector,
        regs: &PipelineRegisters,
        adjoint: bool,
        cond: Cond<'_>,
    ) -> Result<()> {
        let m1 = self.m1;
        let kn = self.grid_len();
        let h = Self::hadamard(regs);
        let ctrl = [regs.index.as_str(), regs.est.as_str(), regs.out.as_str()];
        let o_amp = self.counted(
            BlockMatrixOp::indexed(&regs.amp_targets(), &ctrl, self.o_amp.clone(), move |c| {
                (c[2] == 1).then(|| c[0] * kn + grid_index(c[1], m1))
            }),
            2,
        );
        let q_amp = self.counted(
            BlockMatrixOp::indexed(&regs.amp_targets(), &ctrl[..2], self.q_amp.clone(), move |c| {
                Some(c[0] * kn + grid_index(c[1], m1))
            }),
            4,
        );
        let layout = state.layout().clone();
        let est = layout.index_of(&regs.est)?;
        let out = layout.index_of(&regs.out)?;
        let steps: Vec<usize> = self.schedules.iter().map(|s| s.m_clamped).collect();
        let power = move |c: &[usize]| if c[out] == 1 { steps[grid_index(c[est], m1)] } else { 0 };
        if adjoint {
            h.apply_where(state, true, cond)?;
            controlled_power_where(state, &power, &q_amp, self.loops, true, cond)?;
            o_amp.apply_where(state, true, cond)?;
            h.apply_where(state, true, cond)?;
        } else {
            h.apply_where(state, false, cond)?;
            o_amp.apply_where(state, false, cond)?;
            controlled_power_where(state, &power, &q_amp, self.loops, false, cond)?;
            h.apply_where(state, false, cond)?;
        }
        Ok(())
    }

    /// The simulated oracle as a reusable operator on the registers `regs`.
    pub fn op<'s>(&'s self, regs: &PipelineRegisters) -> SimulatedOp<'s> {
        SimulatedOp { sim: self, regs: regs.clone() }
    }

    /// Staged one-shot evaluation on the uniform superposition over x. The
    /// estimation stage runs the generic parallel estimator on the signed
    /// oracle; the amplification registers are appended afterwards.
    pub fn evaluate(&self) -> Result<Evaluation> {
        let regs = PipelineRegisters::default();
        let before = self.counter.load(Ordering::Relaxed);
        let signed = self.signed_op(&regs);
        let ws = self.workspace(&regs);
        let po = ParallelOracle {
            index: Register::new(regs.index.clone(), self.n()),
            workspace: ws[..3].to_vec(),
            op: &signed,
            chi: BasisPredicate::all_zero(&regs.est_ws.workspace_names()),
        };
        let est = par_est_phase(&po, &uniform_amplitudes(self.n()), self.m1, EstimateRegister::View)?;
        let mut state = est.state.append_registers(&ws[4..])?;
        self.amplification_stage(&mut state, &regs, false, &|_| true)?;
        let base_queries = self.counter.load(Ordering::Relaxed) - before;
        Ok(Evaluation { success: self.success_from_state(&state, &regs)?, base_queries })
    }

    /// P(output = f(x) | x) read off a state produced by the pipeline.
    pub fn success_from_state(&self, state: &StateVector, regs: &PipelineRegisters) -> Result<Vec<f64>> {
        let marg = state.measurement_distribution(&[regs.index.as_str(), regs.out.as_str()])?;
        Ok((0..self.n())
            .map(|x| marg.conditional_on_first(x)[self.f[x] as usize])
            .collect())
    }

    /// Exact P(output = f(x) | x) for every x.
    pub fn success_probabilities(&self) -> Result<Vec<f64>> {
        Ok(self.evaluate()?.success)
    }

    pub fn success_probability(&self, x: usize) -> Result<f64> {
        if x >= self.n() {
            return invalid(format!("index {x} outside a domain of size {}", self.n()));
        }
        Ok(self.success_probabilities()?[x])
    }

    /// γ for index x and estimate πk/M₁: the all-zero amplitude of the
    /// amplified branch state, with the (−1)^{f(x)} sign removed.
    pub fn branch_gamma(&self, x: usize, k: usize) -> f64 {
        let i = x * self.grid_len() + k;
        let mut v = self.o_amp[i].column(0).into_owned();
        for _ in 0..self.schedules[k].m_clamped {
            v = &self.q_amp[i] * v;
        }
        let s = if self.f[x] { -1.0 } else { 1.0 };
        s * v[0].re
    }

    /// Success probability from the analytic estimate distribution and the
    /// closed form γ = sin((2m + 1)θ'), sin θ' = sin θ_x · √ratio.
    pub fn predicted_success(&self, x: usize) -> f64 {
        let theta = self.thetas[x];
        let dist = predicted_grid_distribution(theta, self.m1);
        dist.iter()
            .zip(&self.schedules)
            .map(|(p, s)| {
                let r = if self.options.rotation { s.rotation_ratio() } else { 1.0 };
                let tp = (theta.sin() * r.sqrt()).min(1.0).asin();
                let gamma = ((2 * s.m_clamped + 1) as f64 * tp).sin();
                p * (1.0 + gamma) / 2.0
            })
            .sum()
    }

    /// True when the estimate πk/M₁ is within θ_x/(3(π+1)) of θ_x.
    pub fn is_good_estimate(&self, x: usize, k: usize) -> bool {
        let theta = self.thetas[x];
        (theta - PI * k as f64 / self.m1 as f64).abs() <= theta / (3.0 * (PI + 1.0)) + 1e-12
    }

    pub fn theta(&self, x: usize) -> f64 {
        self.thetas[x]
    }
}

/// A [`SimulatedOracle`] bound to register names.
pub struct SimulatedOp<'s> {
    sim: &'s SimulatedOracle,
    regs: PipelineRegisters,
}

impl Operator for SimulatedOp<'_> {
    fn targets(&self) -> Vec<String> {
        self.sim.workspace(&self.regs).into_iter().map(|r| r.name).collect()
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        let sim = self.sim;
        let regs = &self.regs;
        let m1 = sim.m1;
        let signed = sim.signed_op(regs);
        let q_est = sim.counted(
            BlockMatrixOp::indexed(
                &regs.est_ws.workspace_names(),
                &[regs.index.as_str()],
                sim.q_est.clone(),
                |c| Some(c[0]),
            ),
            4,
        );
        let est = state.layout().index_of(&regs.est)?;
        let power = move |c: &[usize]| c[est];
        if adjoint {
            sim.amplification_stage(state, regs, true, cond)?;
            state.fourier_where(&regs.est, m1, false, cond)?;
            controlled_power_where(state, &power, &q_est, m1, true, cond)?;
            state.fourier_where(&regs.est, m1, true, cond)?;
            signed.apply_where(state, true, cond)?;
        } else {
            signed.apply_where(state, false, cond)?;
            state.fourier_where(&regs.est, m1, false, cond)?;
            controlled_power_where(state, &power, &q_est, m1, false, cond)?;
            state.fourier_where(&regs.est, m1, true, cond)?;
            sim.amplification_stage(state, regs, false, cond)?;
        }
        Ok(())
    }
}
