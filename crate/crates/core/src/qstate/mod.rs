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

//! Dense state vectors over mixed-radix composite registers.
//!
//! A [`RegisterLayout`] is an ordered list of named registers of arbitrary
//! dimension. The first register is the most significant digit of the flat
//! amplitude index. Operators act on one or more *target* registers and are
//! applied fibre by fibre: for every assignment of the remaining registers the
//! amplitudes of the target sub-block are gathered, transformed and scattered
//! back. Control logic (which fibres to touch, which matrix to use) only reads
//! the coordinates of the non-target registers.

mod ops;

pub use ops::{
    apply_controlled_power, controlled_power_where, Adjoint, BlockMatrixOp, ClassicalMap, Cond,
    Counted, FourierOp, GlobalPhase, MapMode, Operator, Sequence, SignFlip,
};

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{QError, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// Upper bound on the number of amplitudes a layout may describe.
pub const MAX_AMPLITUDES: usize = 1 << 24;

/// Unitarity tolerance used by construction checks.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Register {
            name: name.into(),
            dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    strides: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    pub fn new<I, S>(regs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::from_registers(regs.into_iter().map(|(n, d)| Register::new(n, d)).collect())
    }

    pub fn from_registers(registers: Vec<Register>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut total: usize = 1;
        for r in &registers {
            if !seen.insert(r.name.clone()) {
                return Err(QError::DuplicateRegister(r.name.clone()));
            }
            // Dimension-one registers are allowed so that F_1 and Λ_1 are expressible.
            if r.dim == 0 {
                return Err(QError::DimensionMismatch {
                    name: r.name.clone(),
                    dim: 0,
                    expected: 1,
                });
            }
            total = total
                .checked_mul(r.dim)
                .filter(|&t| t <= MAX_AMPLITUDES)
                .ok_or(QError::TooLarge(total.saturating_mul(r.dim)))?;
        }
        let mut strides = vec![1; registers.len()];
        for i in (0..registers.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * registers[i + 1].dim;
        }
        Ok(RegisterLayout {
            registers,
            strides,
            total,
        })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn dim(&self, idx: usize) -> usize {
        self.registers[idx].dim
    }

    pub fn stride(&self, idx: usize) -> usize {
        self.strides[idx]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| QError::UnknownRegister(name.to_string()))
    }

    /// Resolves a list of distinct register names to positions.
    pub fn resolve(&self, names: &[impl AsRef<str>]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let i = self.index_of(n.as_ref())?;
            if out.contains(&i) {
                return Err(QError::DuplicateRegister(n.as_ref().to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.registers[self.index_of(name)?].dim)
    }

    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.registers.len() {
            return Err(QError::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.registers.len(),
                coords.len()
            )));
        }
        let mut idx = 0;
        for ((r, &c), &s) in self.registers.iter().zip(coords).zip(&self.strides) {
            if c >= r.dim {
                return Err(QError::CoordinateOutOfRange {
                    name: r.name.clone(),
                    coord: c,
                    dim: r.dim,
                });
            }
            idx += c * s;
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut coords = vec![0; self.registers.len()];
        for (c, &s) in coords.iter_mut().zip(&self.strides) {
            *c = idx / s;
            idx %= s;
        }
        coords
    }

    /// Returns a layout with `extra` appended as the least significant registers.
    pub fn extend(&self, extra: &[Register]) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend_from_slice(extra);
        Self::from_registers(regs)
    }
}

impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .registers
            .iter()
            .map(|r| format!("{}:{}", r.name, r.dim))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Steps a mixed-radix counter over the positions `regs` of `coords`.
/// Returns false after wrapping around.
pub(crate) fn odometer_step(coords: &mut [usize], regs: &[usize], layout: &RegisterLayout) -> bool {
    for &r in regs.iter().rev() {
        coords[r] += 1;
        if coords[r] < layout.dim(r) {
            return true;
        }
        coords[r] = 0;
    }
    false
}

/// A classical predicate over the coordinates of a subset of registers.
///
/// Used for the good-state test χ and for the all-zero reflection S₀.
#[derive(Clone)]
pub struct BasisPredicate {
    scope: Vec<String>,
    f: Arc<dyn Fn(&[usize]) -> bool + Send + Sync>,
}

impl BasisPredicate {
    pub fn new<F>(scope: &[impl AsRef<str>], f: F) -> Self
    where
        F: Fn(&[usize]) -> bool + Send + Sync + 'static,
    {
        BasisPredicate {
            scope: scope.iter().map(|s| s.as_ref().to_string()).collect(),
            f: Arc::new(f),
        }
    }

    /// True exactly when every register in scope reads zero.
    pub fn all_zero(scope: &[impl AsRef<str>]) -> Self {
        Self::new(scope, |c| c.iter().all(|&v| v == 0))
    }

    pub fn never() -> Self {
        Self::new(&[] as &[&str], |_| false)
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    pub fn eval(&self, scope_coords: &[usize]) -> bool {
        (self.f)(scope_coords)
    }
}

impl fmt::Debug for BasisPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisPredicate")
            .field("scope", &self.scope)
            .finish_non_exhaustive()
    }
}

/// Marginal probability table over a list of registers, in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    registers: Vec<Register>,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, coords: &[usize]) -> f64 {
        let mut idx = 0;
        for (r, &c) in self.registers.iter().zip(coords) {
            assert!(c < r.dim, "coordinate out of range");
            idx = idx * r.dim + c;
        }
        self.probs[idx]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Distribution of the trailing registers conditioned on the leading one
    /// taking value `lead`.
    pub fn conditional_on_first(&self, lead: usize) -> Vec<f64> {
        let block = self.probs.len() / self.registers[0].dim;
        let row = &self.probs[lead * block..(lead + 1) * block];
        let z: f64 = row.iter().sum();
        if z == 0.0 {
            return vec![0.0; block];
        }
        row.iter().map(|p| p / z).collect()
    }
}

/// A normalized complex amplitude vector over a [`RegisterLayout`].
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

impl StateVector {
    /// All registers in `|0⟩`.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amps[0] = C64::new(1.0, 0.0);
        StateVector { layout, amps }
    }

    pub fn basis_state(layout: RegisterLayout, coords: &[usize]) -> Result<Self> {
        let idx = layout.encode(coords)?;
        let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(StateVector { layout, amps })
    }

    /// Wraps raw amplitudes; they must already be normalized.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(QError::InvalidParameter(format!(
                "{} amplitudes for a layout of dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let s = StateVector { layout, amps };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > UNITARITY_TOL {
            return Err(QError::InvalidParameter(format!(
                "amplitudes have squared norm {n}"
            )));
        }
        Ok(s)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, coords: &[usize]) -> Result<C64> {
        Ok(self.amps[self.layout.encode(coords)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(QError::InvalidParameter("inner product across layouts".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensors fresh `|0⟩` registers onto the least significant end.
    pub fn append_registers(&self, extra: &[Register]) -> Result<StateVector> {
        let layout = self.layout.extend(extra)?;
        let block: usize = extra.iter().map(|r| r.dim).product();
        let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
        for (i, a) in self.amps.iter().enumerate() {
            amps[i * block] = *a;
        }
        Ok(StateVector { layout, amps })
    }

    /// Visits every fibre of the `targets` registers.
    ///
    /// The closure receives the full coordinate vector (target entries are 0)
    /// and the fibre amplitudes ordered lexicographically over `targets` in the
    /// given order. Targets must be distinct positions.
    pub fn for_each_fibre<F>(&mut self, targets: &[usize], mut f: F)
    where
        F: FnMut(&[usize], &mut [C64]),
    {
        let layout = &self.layout;
        let n = layout.len();
        let flen: usize = targets.iter().map(|&t| layout.dim(t)).product();
        let mut offsets = Vec::with_capacity(flen);
        let mut tc = vec![0usize; n];
        loop {
            offsets.push(targets.iter().map(|&t| tc[t] * layout.stride(t)).sum::<usize>());
            if !odometer_step(&mut tc, targets, layout) {
                break;
            }
        }
        let rest: Vec<usize> = (0..n).filter(|i| !targets.contains(i)).collect();
        let mut coords = vec![0usize; n];
        let mut buf = vec![C64::new(0.0, 0.0); flen];
        loop {
            let base: usize = rest.iter().map(|&r| coords[r] * layout.stride(r)).sum();
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base + o];
            }
            f(&coords, &mut buf);
            for (b, &o) in buf.iter().zip(&offsets) {
                self.amps[base + o] = *b;
            }
            if !odometer_step(&mut coords, &rest, layout) {
                break;
            }
        }
    }

    pub fn apply_fourier(&mut self, reg: &str, m: usize) -> Result<()> {
        self.fourier_where(reg, m, false, &|_| true)
    }

    pub fn apply_inverse_fourier(&mut self, reg: &str, m: usize) -> Result<()> {
        self.fourier_where(reg, m, true, &|_| true)
    }

    /// F_M : |x⟩ ↦ M^{-1/2} Σ_y e^{2πixy/M} |y⟩ (or its inverse) on fibres accepted by `cond`.
    pub fn fourier_where(
        &mut self,
        reg: &str,
        m: usize,
        inverse: bool,
        cond: Cond<'_>,
    ) -> Result<()> {
        let r = self.layout.index_of(reg)?;
        if self.layout.dim(r) != m {
            return Err(QError::DimensionMismatch {
                name: reg.to_string(),
                dim: self.layout.dim(r),
                expected: m,
            });
        }
        // rustfft's inverse direction carries the e^{+2πi xy/M} kernel of F_M.
        let dir = if inverse {
            FftDirection::Forward
        } else {
            FftDirection::Inverse
        };
        let fft = FftPlanner::<f64>::new().plan_fft(m, dir);
        let scale = 1.0 / (m as f64).sqrt();
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        self.for_each_fibre(&[r], |coords, fib| {
            if cond(coords) {
                fft.process_with_scratch(fib, &mut scratch);
                for a in fib.iter_mut() {
                    *a *= scale;
                }
            }
        });
        Ok(())
    }

    /// Applies a dense matrix to the joint space of `targets`.
    pub fn apply_matrix(&mut self, targets: &[&str], mat: &Matrix) -> Result<()> {
        BlockMatrixOp::uniform(targets, mat.clone()).apply(self)
    }

    /// Negates every amplitude whose scope coordinates satisfy `pred`.
    pub fn apply_sign(&mut self, pred: &BasisPredicate) -> Result<()> {
        self.sign_where(pred, &|_| true)
    }

    pub fn sign_where(&mut self, pred: &BasisPredicate, cond: Cond<'_>) -> Result<()> {
        let scope = self.layout.resolve(pred.scope())?;
        let dims: Vec<usize> = scope.iter().map(|&s| self.layout.dim(s)).collect();
        let flen: usize = dims.iter().product();
        let mut table = Vec::with_capacity(flen);
        let mut sc = vec![0usize; dims.len()];
        for _ in 0..flen {
            table.push(pred.eval(&sc));
            for k in (0..dims.len()).rev() {
                sc[k] += 1;
                if sc[k] < dims[k] {
                    break;
                }
                sc[k] = 0;
            }
        }
        if !table.iter().any(|&t| t) {
            return Ok(());
        }
        self.for_each_fibre(&scope, |coords, fib| {
            if cond(coords) {
                for (a, &t) in fib.iter_mut().zip(&table) {
                    if t {
                        *a = -*a;
                    }
                }
            }
        });
        Ok(())
    }

    /// Total probability of the basis elements satisfying `pred`.
    pub fn probability_of(&self, pred: &BasisPredicate) -> Result<f64> {
        let scope = self.layout.resolve(pred.scope())?;
        let mut coords = vec![0usize; self.layout.len()];
        let all: Vec<usize> = (0..self.layout.len()).collect();
        let mut sc = vec![0usize; scope.len()];
        let mut p = 0.0;
        for a in &self.amps {
            for (s, &r) in sc.iter_mut().zip(&scope) {
                *s = coords[r];
            }
            if pred.eval(&sc) {
                p += a.norm_sqr();
            }
            odometer_step(&mut coords, &all, &self.layout);
        }
        Ok(p)
    }

    /// Marginal distribution over `regs`, summing |amplitude|² over the rest.
    pub fn measurement_distribution(&self, regs: &[&str]) -> Result<Marginal> {
        let pos = self.layout.resolve(regs)?;
        let registers: Vec<Register> = pos
            .iter()
            .map(|&p| self.layout.registers()[p].clone())
            .collect();
        let size: usize = registers.iter().map(|r| r.dim).product();
        let mut mstride = vec![1usize; pos.len()];
        for i in (0..pos.len().saturating_sub(1)).rev() {
            mstride[i] = mstride[i + 1] * registers[i + 1].dim;
        }
        let mut probs = vec![0.0; size];
        let mut coords = vec![0usize; self.layout.len()];
        let all: Vec<usize> = (0..self.layout.len()).collect();
        for a in &self.amps {
            let key: usize = pos.iter().zip(&mstride).map(|(&p, &s)| coords[p] * s).sum();
            probs[key] += a.norm_sqr();
            odometer_step(&mut coords, &all, &self.layout);
        }
        Ok(Marginal { registers, probs })
    }

    /// U_g : |src⟩|y⟩ ↦ |src⟩|y ⊙ g(src)⟩, a basis permutation.
    pub fn apply_classical_map<G>(
        &mut self,
        g: G,
        src: &[&str],
        dst: &str,
        mode: MapMode,
    ) -> Result<()>
    where
        G: Fn(&[usize]) -> usize + Send + Sync + 'static,
    {
        ClassicalMap::new(src, dst, mode, g).apply(self)
    }

    pub(crate) fn amps_mut(&mut self) -> &mut Vec<C64> {
        &mut self.amps
    }

    /// Block of amplitudes for a fixed value of the first register.
    pub fn leading_block(&self, lead: usize) -> &[C64] {
        let s = self.layout.stride(0);
        &self.amps[lead * s..(lead + 1) * s]
    }
}
