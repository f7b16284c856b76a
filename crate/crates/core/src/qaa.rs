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

//! Amplitude amplification and phase estimation, serial and in parallel over
//! an index register, with the analytic output distributions.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{invalid, QError, Result};
use crate::qstate::{
    apply_controlled_power, BasisPredicate, BlockMatrixOp, ClassicalMap, Cond, Counted,
    GlobalPhase, MapMode, Matrix, Operator, Register, RegisterLayout, SignFlip, StateVector, C64,
};

/// Name of the phase register used by the estimators.
pub const EST: &str = "est";
/// Name of the register holding g_M(j) when it is written out.
pub const THETA: &str = "theta";

/// Shortest arc between two points of the unit-circumference circle.
pub fn arc_distance(w0: f64, w1: f64) -> f64 {
    let d = (w1 - w0).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Index k of g_M(j) = πk/M on the folded grid, k ≤ M/2.
pub fn grid_index(j: usize, m: usize) -> usize {
    j.min(m - j)
}

/// g_M(j): πj/M up to M/2, π − πj/M beyond.
pub fn grid_angle(j: usize, m: usize) -> Result<f64> {
    if j >= m {
        return invalid(format!("grid index {j} out of range for modulus {m}"));
    }
    Ok(PI * grid_index(j, m) as f64 / m as f64)
}

/// The folded estimate grid {πk/M : 0 ≤ k ≤ M/2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseGrid {
    pub m: usize,
}

impl PhaseGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("modulus must be positive");
        }
        Ok(PhaseGrid { m })
    }

    /// Number of distinct grid values.
    pub fn len(&self) -> usize {
        self.m / 2 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, k: usize) -> f64 {
        PI * k as f64 / self.m as f64
    }

    /// g_M(j) for every j in [0, M).
    pub fn values(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.angle(grid_index(j, self.m))).collect()
    }

    /// Sums a per-j table into per-grid-value masses.
    pub fn fold(&self, per_j: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (j, p) in per_j.iter().enumerate() {
            out[grid_index(j, self.m)] += p;
        }
        out
    }
}

/// sin²(MΔπ)/(M² sin²(Δπ)), equal to 1 in the Δ = 0 limit.
pub fn fejer(delta: f64, m: usize) -> f64 {
    let s = (delta * PI).sin();
    if delta == 0.0 || s.abs() < 1e-15 {
        return 1.0;
    }
    let mf = m as f64;
    ((mf * delta * PI).sin() / (mf * s)).powi(2)
}

/// Predicted Pr[j] of the estimate register for success angle `theta`.
pub fn predicted_phase_distribution(theta: f64, m: usize) -> Vec<f64> {
    let w = theta / PI;
    (0..m)
        .map(|j| {
            let t = j as f64 / m as f64;
            let plus = fejer(arc_distance(t, w), m);
            let minus = fejer(arc_distance(t, 1.0 - w), m);
            (plus + minus) / 2.0
        })
        .collect()
}

/// Predicted distribution folded onto the grid values πk/M.
pub fn predicted_grid_distribution(theta: f64, m: usize) -> Vec<f64> {
    PhaseGrid { m }.fold(&predicted_phase_distribution(theta, m))
}

/// A state-preparation unitary together with its good-state predicate.
pub struct SearchInstance<'a> {
    registers: Vec<Register>,
    a: Box<dyn Operator + 'a>,
    chi: SignFlip,
}

impl<'a> SearchInstance<'a> {
    pub fn new(registers: Vec<Register>, a: impl Operator + 'a, chi: BasisPredicate) -> Result<Self> {
        RegisterLayout::from_registers(registers.clone())?;
        Ok(SearchInstance { registers, a: Box::new(a), chi: SignFlip(chi) })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn chi(&self) -> &BasisPredicate {
        &self.chi.0
    }

    pub fn a(&self) -> &dyn Operator {
        &*self.a
    }

    /// A|0̄⟩.
    pub fn prepared(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(RegisterLayout::from_registers(self.registers.clone())?);
        self.a.apply(&mut s)?;
        Ok(s)
    }

    /// p = mass of the good component of A|0̄⟩.
    pub fn success_probability(&self) -> Result<f64> {
        self.prepared()?.probability_of(&self.chi.0)
    }

    /// θ_p = arcsin √p.
    pub fn theta_p(&self) -> Result<f64> {
        Ok(self.success_probability()?.clamp(0.0, 1.0).sqrt().asin())
    }

    fn zero_predicate(&self) -> BasisPredicate {
        let names: Vec<&str> = self.registers.iter().map(|r| r.name.as_str()).collect();
        BasisPredicate::all_zero(&names)
    }
}

/// Q = −A S₀ A⁻¹ S_χ.
pub struct GroverOp<'a> {
    a: &'a dyn Operator,
    zero: SignFlip,
    chi: &'a dyn Operator,
}

impl<'a> GroverOp<'a> {
    /// `zero` selects the reflected start state, `chi` reflects the good set.
    pub fn new(a: &'a dyn Operator, zero: BasisPredicate, chi: &'a dyn Operator) -> Self {
        GroverOp { a, zero: SignFlip(zero), chi }
    }
}

impl Operator for GroverOp<'_> {
    fn targets(&self) -> Vec<String> {
        let mut t = self.a.targets();
        t.extend(self.zero.targets());
        t.extend(self.chi.targets());
        t.sort();
        t.dedup();
        t
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        let minus = GlobalPhase(C64::new(-1.0, 0.0));
        if adjoint {
            minus.apply_where(state, false, cond)?;
            self.a.apply_where(state, true, cond)?;
            self.zero.apply_where(state, false, cond)?;
            self.a.apply_where(state, false, cond)?;
            self.chi.apply_where(state, false, cond)?;
        } else {
            self.chi.apply_where(state, false, cond)?;
            self.a.apply_where(state, true, cond)?;
            self.zero.apply_where(state, false, cond)?;
            self.a.apply_where(state, false, cond)?;
            minus.apply_where(state, false, cond)?;
        }
        Ok(())
    }
}

pub fn grover_operator<'s>(inst: &'s SearchInstance<'_>) -> GroverOp<'s> {
    GroverOp::new(&*inst.a, inst.zero_predicate(), &inst.chi)
}

/// Q^j A|0̄⟩.
pub fn amplify(inst: &SearchInstance<'_>, j: usize) -> Result<StateVector> {
    let mut s = inst.prepared()?;
    let q = grover_operator(inst);
    for _ in 0..j {
        q.apply(&mut s)?;
    }
    Ok(s)
}

/// Name of the extra qubit used by [`amplify_exact`].
pub const EXACT_ROT: &str = "exact_rot";

/// Amplification that reaches the good set with certainty when p is known.
///
/// An extra qubit lowers the success angle to θ' = π/(4m + 2) with
/// m = ⌈π/(4θ_p) − 1/2⌉, so that m iterations land exactly on π/2. The good
/// set of the returned state is χ together with the extra qubit at |0⟩.
pub fn amplify_exact(inst: &SearchInstance<'_>, p: f64) -> Result<StateVector> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("exact amplification needs p in (0, 1], got {p}"));
    }
    let theta = p.sqrt().asin();
    let m = (PI / (4.0 * theta) - 0.5).ceil().max(0.0) as usize;
    let theta_prime = PI / (4 * m + 2) as f64;
    let c = (theta_prime.sin() / theta.sin()).min(1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    let rot = Matrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    );
    let mut regs = inst.registers.clone();
    regs.push(Register::new(EXACT_ROT, 2));
    let rot_op = BlockMatrixOp::uniform(&[EXACT_ROT], rot);
    let a = crate::qstate::Sequence(vec![Box::new(inst.a()), Box::new(rot_op)]);
    let mut scope: Vec<String> = inst.chi().scope().to_vec();
    let chi = inst.chi().clone();
    scope.push(EXACT_ROT.to_string());
    let k = scope.len() - 1;
    let good = BasisPredicate::new(&scope, move |c| c[k] == 0 && chi.eval(&c[..k]));
    let lifted = SearchInstance::new(regs, a, good)?;
    amplify(&lifted, m)
}

/// Output distribution of an estimator over the folded grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEstimate {
    pub m: usize,
    /// Mass on πk/M for k = 0..=M/2.
    pub grid: Vec<f64>,
    /// Applications of A or A⁻¹.
    pub a_invocations: u64,
    /// Applications of S_χ.
    pub chi_invocations: u64,
}

impl PhaseEstimate {
    pub fn angle(&self, k: usize) -> f64 {
        PI * k as f64 / self.m as f64
    }

    /// Pr[|θ̃ − θ| ≤ tol].
    pub fn prob_within(&self, theta: f64, tol: f64) -> f64 {
        self.grid
            .iter()
            .enumerate()
            .filter(|(k, _)| (self.angle(*k) - theta).abs() <= tol + 1e-12)
            .map(|(_, p)| p)
            .sum()
    }

    /// Pr[θ̃ > threshold].
    pub fn prob_above(&self, threshold: f64) -> f64 {
        self.grid
            .iter()
            .enumerate()
            .filter(|(k, _)| self.angle(*k) > threshold)
            .map(|(_, p)| p)
            .sum()
    }

    /// Grid index selected by inverse-CDF sampling with u ∈ [0, 1).
    pub fn sample(&self, u: f64) -> usize {
        let total: f64 = self.grid.iter().sum();
        let target = u * total;
        let mut acc = 0.0;
        for (k, p) in self.grid.iter().enumerate() {
            acc += p;
            if target < acc {
                return k;
            }
        }
        self.grid.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// Phase estimation of Q for a search instance, returning the exact output
/// distribution of θ̃ ∈ {g_M(j)}.
pub fn est_phase(inst: &SearchInstance<'_>, m: usize) -> Result<PhaseEstimate> {
    if m < 2 {
        return invalid(format!("estimation modulus must be at least 2, got {m}"));
    }
    let a_count = Arc::new(AtomicU64::new(0));
    let chi_count = Arc::new(AtomicU64::new(0));
    let a = Counted { inner: inst.a(), counter: a_count.clone(), per_use: 1 };
    let chi = Counted { inner: &inst.chi, counter: chi_count.clone(), per_use: 1 };
    let q = GroverOp::new(&a, inst.zero_predicate(), &chi);

    let mut regs = inst.registers.clone();
    regs.push(Register::new(EST, m));
    let mut s = StateVector::zero(RegisterLayout::from_registers(regs)?);
    a.apply(&mut s)?;
    s.apply_fourier(EST, m)?;
    apply_controlled_power(&mut s, EST, &q, m)?;
    s.apply_inverse_fourier(EST, m)?;
    let per_j = s.measurement_distribution(&[EST])?;
    Ok(PhaseEstimate {
        m,
        grid: PhaseGrid { m }.fold(per_j.probs()),
        a_invocations: a_count.load(Ordering::Relaxed),
        chi_invocations: chi_count.load(Ordering::Relaxed),
    })
}

/// An oracle controlled by an index register, with the good-state predicate
/// on its workspace.
pub struct ParallelOracle<'a> {
    pub index: Register,
    pub workspace: Vec<Register>,
    pub op: &'a dyn Operator,
    pub chi: BasisPredicate,
}

impl ParallelOracle<'_> {
    fn registers(&self) -> Vec<Register> {
        let mut r = vec![self.index.clone()];
        r.extend(self.workspace.iter().cloned());
        r
    }

    fn zero_predicate(&self) -> BasisPredicate {
        let names: Vec<&str> = self.workspace.iter().map(|r| r.name.as_str()).collect();
        BasisPredicate::all_zero(&names)
    }
}

/// Whether the estimate g_M(j) is written to its own register or left as a
/// function of the phase register j.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateRegister {
    Materialized,
    View,
}

/// State after parallel phase estimation.
#[derive(Clone, Debug)]
pub struct ParEstimate {
    pub state: StateVector,
    pub m: usize,
    pub index: String,
    pub mode: EstimateRegister,
}

impl ParEstimate {
    /// For each x in the input support, the conditional distribution over
    /// grid values πk/M; rows for absent x are all zero.
    pub fn per_x_grid_distribution(&self) -> Result<Vec<Vec<f64>>> {
        let grid = PhaseGrid { m: self.m };
        let reg = match self.mode {
            EstimateRegister::Materialized => THETA,
            EstimateRegister::View => EST,
        };
        let marg = self.state.measurement_distribution(&[self.index.as_str(), reg])?;
        let n = marg.registers()[0].dim;
        Ok((0..n)
            .map(|x| {
                let row = marg.conditional_on_first(x);
                match self.mode {
                    EstimateRegister::Materialized => row,
                    EstimateRegister::View => grid.fold(&row),
                }
            })
            .collect())
    }
}

/// Places `input` on the index register with every other register at zero.
pub(crate) fn indexed_input(layout: RegisterLayout, input: &[C64]) -> Result<StateVector> {
    let n = layout.dim(0);
    if input.len() != n {
        return Err(QError::DimensionMismatch {
            name: layout.registers()[0].name.clone(),
            dim: n,
            expected: input.len(),
        });
    }
    let norm: f64 = input.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return invalid(format!("input amplitudes have squared norm {norm}"));
    }
    let stride = layout.stride(0);
    let mut s = StateVector::zero(layout);
    let amps = s.amps_mut();
    amps[0] = C64::new(0.0, 0.0);
    for (x, a) in input.iter().enumerate() {
        amps[x * stride] = *a;
    }
    Ok(s)
}

pub fn uniform_amplitudes(n: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n]
}

/// Steps shared by the parallel estimators: O, F_M, Λ_M(Q), F_M⁻¹.
/// Accepts M = 1.
pub(crate) fn par_est_core(po: &ParallelOracle<'_>, input: &[C64], m: usize) -> Result<StateVector> {
    if m == 0 {
        return invalid("estimation modulus must be positive");
    }
    let mut regs = po.registers();
    regs.push(Register::new(EST, m));
    let mut s = indexed_input(RegisterLayout::from_registers(regs)?, input)?;
    let chi = SignFlip(po.chi.clone());
    let q = GroverOp::new(po.op, po.zero_predicate(), &chi);
    po.op.apply(&mut s)?;
    s.apply_fourier(EST, m)?;
    apply_controlled_power(&mut s, EST, &q, m)?;
    s.apply_inverse_fourier(EST, m)?;
    Ok(s)
}

/// Phase estimation run coherently over a superposition of indices.
pub fn par_est_phase(
    po: &ParallelOracle<'_>,
    input: &[C64],
    m: usize,
    mode: EstimateRegister,
) -> Result<ParEstimate> {
    if m < 2 {
        return invalid(format!("estimation modulus must be at least 2, got {m}"));
    }
    let mut state = par_est_core(po, input, m)?;
    if mode == EstimateRegister::Materialized {
        state = state.append_registers(&[Register::new(THETA, m / 2 + 1)])?;
        ClassicalMap::new(&[EST], THETA, MapMode::AddMod, move |c| grid_index(c[0], m))
            .apply(&mut state)?;
    }
    Ok(ParEstimate { state, m, index: po.index.name.clone(), mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::FourierOp;

    fn ry(p: f64) -> Matrix {
        let (c, s) = ((1.0 - p).sqrt(), p.sqrt());
        Matrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
        )
    }

    fn qubit_instance(p: f64) -> SearchInstance<'static> {
        SearchInstance::new(
            vec![Register::new("q", 2)],
            BlockMatrixOp::uniform(&["q"], ry(p)),
            BasisPredicate::new(&["q"], |c| c[0] == 1),
        )
        .unwrap()
    }

    #[test]
    fn arc_distance_examples() {
        assert!((arc_distance(0.9, 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(arc_distance(0.3, 0.3), 0.0);
        assert!((arc_distance(0.1, 0.6) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_angle_examples() {
        assert!((grid_angle(2, 4).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((grid_angle(6, 8).unwrap() - PI / 4.0).abs() < 1e-15);
        for m in 1..10 {
            assert_eq!(grid_angle(0, m).unwrap(), 0.0);
        }
        assert!(grid_angle(4, 4).is_err());
    }

    #[test]
    fn grover_four_items_one_marked() {
        let inst = SearchInstance::new(
            vec![Register::new("x", 4)],
            FourierOp::new("x"),
            BasisPredicate::new(&["x"], |c| c[0] == 2),
        )
        .unwrap();
        let s = amplify(&inst, 1).unwrap();
        assert!((s.probability_of(inst.chi()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplify_follows_sine_law() {
        for &p in &[0.0, 0.1, 0.37, 1.0] {
            let inst = qubit_instance(p);
            let th = p.sqrt().asin();
            for j in 0..6 {
                let s = amplify(&inst, j).unwrap();
                let want = ((2 * j + 1) as f64 * th).sin().powi(2);
                assert!((s.probability_of(inst.chi()).unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_amplification_reaches_one() {
        for &p in &[0.03, 0.1, 0.25, 0.6, 1.0] {
            let inst = qubit_instance(p);
            let s = amplify_exact(&inst, p).unwrap();
            let good = BasisPredicate::new(&["q", EXACT_ROT], |c| c[0] == 1 && c[1] == 0);
            assert!((s.probability_of(&good).unwrap() - 1.0).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn est_phase_exact_cases_and_counts() {
        let e = est_phase(&qubit_instance(0.0), 8).unwrap();
        assert!((e.grid[0] - 1.0).abs() < 1e-12);
        assert_eq!(e.a_invocations, 17);
        assert_eq!(e.chi_invocations, 8);

        let e = est_phase(&qubit_instance(1.0), 8).unwrap();
        assert!((e.grid[4] - 1.0).abs() < 1e-12);

        let e = est_phase(&qubit_instance(0.25), 12).unwrap();
        assert!((e.grid[2] - 1.0).abs() < 1e-9);

        assert!(est_phase(&qubit_instance(0.25), 1).is_err());
    }

    #[test]
    fn est_phase_matches_closed_form() {
        for &(p, m) in &[(0.2, 5), (0.75, 7), (0.05, 16), (0.5, 22)] {
            let th = f64::sqrt(p).asin();
            let e = est_phase(&qubit_instance(p), m).unwrap();
            let want = predicted_grid_distribution(th, m);
            for (a, b) in e.grid.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!(e.prob_within(th, PI / m as f64) >= 8.0 / (PI * PI) - 1e-9);
        }
    }

    #[test]
    fn predicted_quarter_turn_on_four() {
        let t = predicted_phase_distribution(PI / 4.0, 4);
        assert!((t[1] - 0.5).abs() < 1e-12);
        assert!((t[3] - 0.5).abs() < 1e-12);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_inverts_cdf() {
        let e = PhaseEstimate { m: 4, grid: vec![0.25, 0.0, 0.75], a_invocations: 0, chi_invocations: 0 };
        assert_eq!(e.sample(0.0), 0);
        assert_eq!(e.sample(0.2499), 0);
        assert_eq!(e.sample(0.25), 2);
        assert_eq!(e.sample(0.9999), 2);
    }
}
