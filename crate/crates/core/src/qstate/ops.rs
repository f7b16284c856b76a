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

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::{Matrix, StateVector, C64};
use crate::error::{QError, Result};
use crate::qstate::BasisPredicate;

/// Fibre filter: receives the full coordinate vector with target entries zeroed.
pub type Cond<'c> = &'c dyn Fn(&[usize]) -> bool;

/// A unitary acting on named target registers, optionally controlled.
///
/// Operators are layout-agnostic: register names are resolved against the
/// state they are applied to. `cond` may only read registers outside
/// [`Operator::targets`].
pub trait Operator: Send + Sync {
    fn targets(&self) -> Vec<String>;

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()>;

    fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.apply_where(state, false, &|_| true)
    }

    fn apply_adjoint(&self, state: &mut StateVector) -> Result<()> {
        self.apply_where(state, true, &|_| true)
    }
}

impl<T: Operator + ?Sized> Operator for &T {
    fn targets(&self) -> Vec<String> {
        (**self).targets()
    }
    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        (**self).apply_where(state, adjoint, cond)
    }
}

impl<T: Operator + ?Sized> Operator for Box<T> {
    fn targets(&self) -> Vec<String> {
        (**self).targets()
    }
    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        (**self).apply_where(state, adjoint, cond)
    }
}

impl<T: Operator + ?Sized> Operator for Arc<T> {
    fn targets(&self) -> Vec<String> {
        (**self).targets()
    }
    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        (**self).apply_where(state, adjoint, cond)
    }
}

type Selector = Arc<dyn Fn(&[usize]) -> Option<usize> + Send + Sync>;

/// A family of dense matrices on `targets`, chosen per fibre from the
/// coordinates of `controls`. `None` from the selector means identity.
#[derive(Clone)]
pub struct BlockMatrixOp {
    targets: Vec<String>,
    controls: Vec<String>,
    select: Selector,
    mats: Vec<Matrix>,
    adjoints: Vec<Matrix>,
}

impl BlockMatrixOp {
    pub fn uniform(targets: &[impl AsRef<str>], mat: Matrix) -> Self {
        Self::indexed(targets, &[] as &[&str], vec![mat], |_| Some(0))
    }

    pub fn indexed<F>(
        targets: &[impl AsRef<str>],
        controls: &[impl AsRef<str>],
        mats: Vec<Matrix>,
        select: F,
    ) -> Self
    where
        F: Fn(&[usize]) -> Option<usize> + Send + Sync + 'static,
    {
        let adjoints = mats.iter().map(|m| m.adjoint()).collect();
        BlockMatrixOp {
            targets: targets.iter().map(|s| s.as_ref().to_string()).collect(),
            controls: controls.iter().map(|s| s.as_ref().to_string()).collect(),
            select: Arc::new(select),
            mats,
            adjoints,
        }
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }
}

pub(crate) fn mat_vec_into(m: &Matrix, v: &[C64], out: &mut [C64]) {
    let n = v.len();
    let data = m.as_slice();
    out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
    for (c, &vc) in v.iter().enumerate() {
        if vc.re == 0.0 && vc.im == 0.0 {
            continue;
        }
        let col = &data[c * n..(c + 1) * n];
        for (o, &mrc) in out.iter_mut().zip(col) {
            *o += mrc * vc;
        }
    }
}

impl Operator for BlockMatrixOp {
    fn targets(&self) -> Vec<String> {
        self.targets.clone()
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        let tpos = state.layout().resolve(&self.targets)?;
        let cpos = state.layout().resolve(&self.controls)?;
        if let Some(c) = cpos.iter().find(|c| tpos.contains(c)) {
            return Err(QError::RegisterOverlap(
                state.layout().registers()[*c].name.clone(),
            ));
        }
        let flen: usize = tpos.iter().map(|&t| state.layout().dim(t)).product();
        for m in &self.mats {
            if m.nrows() != flen || m.ncols() != flen {
                return Err(QError::InvalidParameter(format!(
                    "matrix of size {}x{} on a target space of dimension {flen}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let mats = if adjoint { &self.adjoints } else { &self.mats };
        let mut cbuf = vec![0usize; cpos.len()];
        let mut out = vec![C64::new(0.0, 0.0); flen];
        state.for_each_fibre(&tpos, |coords, fib| {
            if !cond(coords) {
                return;
            }
            for (b, &p) in cbuf.iter_mut().zip(&cpos) {
                *b = coords[p];
            }
            if let Some(i) = (self.select)(&cbuf) {
                mat_vec_into(&mats[i], fib, &mut out);
                fib.copy_from_slice(&out);
            }
        });
        Ok(())
    }
}

/// F_M on one register; the modulus is the register's dimension.
#[derive(Clone, Debug)]
pub struct FourierOp {
    reg: String,
    inverse: bool,
}

impl FourierOp {
    pub fn new(reg: impl Into<String>) -> Self {
        FourierOp {
            reg: reg.into(),
            inverse: false,
        }
    }

    pub fn inverse(reg: impl Into<String>) -> Self {
        FourierOp {
            reg: reg.into(),
            inverse: true,
        }
    }
}

impl Operator for FourierOp {
    fn targets(&self) -> Vec<String> {
        vec![self.reg.clone()]
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        let m = state.layout().dim_of(&self.reg)?;
        state.fourier_where(&self.reg, m, self.inverse ^ adjoint, cond)
    }
}

/// Reflection negating the basis states selected by a predicate (S_χ, S₀).
#[derive(Clone, Debug)]
pub struct SignFlip(pub BasisPredicate);

impl Operator for SignFlip {
    fn targets(&self) -> Vec<String> {
        self.0.scope().to_vec()
    }

    fn apply_where(&self, state: &mut StateVector, _adjoint: bool, cond: Cond<'_>) -> Result<()> {
        state.sign_where(&self.0, cond)
    }
}

/// Multiplies every accepted amplitude by a phase.
#[derive(Clone, Copy, Debug)]
pub struct GlobalPhase(pub C64);

impl Operator for GlobalPhase {
    fn targets(&self) -> Vec<String> {
        Vec::new()
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        let ph = if adjoint { self.0.conj() } else { self.0 };
        state.for_each_fibre(&[], |coords, fib| {
            if cond(coords) {
                fib[0] *= ph;
            }
        });
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapMode {
    /// y ↦ y ⊕ g (bitwise); self-inverse.
    Xor,
    /// y ↦ (y + g) mod dim.
    AddMod,
}

/// Reversible classical map U_g writing g(src) into `dst`.
#[derive(Clone)]
pub struct ClassicalMap {
    src: Vec<String>,
    dst: String,
    mode: MapMode,
    g: Arc<dyn Fn(&[usize]) -> usize + Send + Sync>,
}

impl ClassicalMap {
    pub fn new<G>(src: &[impl AsRef<str>], dst: impl Into<String>, mode: MapMode, g: G) -> Self
    where
        G: Fn(&[usize]) -> usize + Send + Sync + 'static,
    {
        ClassicalMap {
            src: src.iter().map(|s| s.as_ref().to_string()).collect(),
            dst: dst.into(),
            mode,
            g: Arc::new(g),
        }
    }
}

impl Operator for ClassicalMap {
    fn targets(&self) -> Vec<String> {
        vec![self.dst.clone()]
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        let layout = state.layout().clone();
        let spos = layout.resolve(&self.src)?;
        let d = layout.index_of(&self.dst)?;
        if spos.contains(&d) {
            return Err(QError::RegisterOverlap(self.dst.clone()));
        }
        let dim = layout.dim(d);
        // Validate the whole range first so a failing map leaves the state untouched.
        let mut sc = vec![0usize; spos.len()];
        loop {
            let v = (self.g)(&sc);
            let fits = match self.mode {
                MapMode::AddMod => v < dim,
                MapMode::Xor => (0..dim).all(|y| (y ^ v) < dim),
            };
            if !fits {
                return Err(QError::RangeOverflow {
                    name: self.dst.clone(),
                    value: v,
                    dim,
                });
            }
            let mut k = spos.len();
            let mut more = false;
            while k > 0 {
                k -= 1;
                sc[k] += 1;
                if sc[k] < layout.dim(spos[k]) {
                    more = true;
                    break;
                }
                sc[k] = 0;
            }
            if !more {
                break;
            }
        }
        let mut tmp = vec![C64::new(0.0, 0.0); dim];
        state.for_each_fibre(&[d], |coords, fib| {
            if !cond(coords) {
                return;
            }
            for (s, &p) in sc.iter_mut().zip(&spos) {
                *s = coords[p];
            }
            let v = (self.g)(&sc);
            for (y, a) in fib.iter().enumerate() {
                let ny = match (self.mode, adjoint) {
                    (MapMode::Xor, _) => y ^ v,
                    (MapMode::AddMod, false) => (y + v) % dim,
                    (MapMode::AddMod, true) => (y + dim - v) % dim,
                };
                tmp[ny] = *a;
            }
            fib.copy_from_slice(&tmp);
        });
        Ok(())
    }
}

/// Operators applied left to right (the adjoint runs right to left).
pub struct Sequence<'a>(pub Vec<Box<dyn Operator + 'a>>);

impl Operator for Sequence<'_> {
    fn targets(&self) -> Vec<String> {
        let set: BTreeSet<String> = self.0.iter().flat_map(|o| o.targets()).collect();
        set.into_iter().collect()
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        if adjoint {
            for op in self.0.iter().rev() {
                op.apply_where(state, true, cond)?;
            }
        } else {
            for op in &self.0 {
                op.apply_where(state, false, cond)?;
            }
        }
        Ok(())
    }
}

/// The adjoint of an operator.
pub struct Adjoint<O>(pub O);

impl<O: Operator> Operator for Adjoint<O> {
    fn targets(&self) -> Vec<String> {
        self.0.targets()
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        self.0.apply_where(state, !adjoint, cond)
    }
}

/// Adds `per_use` to a shared counter on every application, forward or inverse.
pub struct Counted<O> {
    pub inner: O,
    pub counter: Arc<AtomicU64>,
    pub per_use: u64,
}

impl<O: Operator> Operator for Counted<O> {
    fn targets(&self) -> Vec<String> {
        self.inner.targets()
    }

    fn apply_where(&self, state: &mut StateVector, adjoint: bool, cond: Cond<'_>) -> Result<()> {
        self.counter.fetch_add(self.per_use, Ordering::Relaxed);
        self.inner.apply_where(state, adjoint, cond)
    }
}

/// Λ_M(U) controlled by a register: U^j on control value j < M, U^M otherwise.
///
/// U is invoked exactly M times regardless of the control state.
pub fn apply_controlled_power(
    state: &mut StateVector,
    control: &str,
    op: &dyn Operator,
    m: usize,
) -> Result<()> {
    if op.targets().iter().any(|t| t == control) {
        return Err(QError::RegisterOverlap(control.to_string()));
    }
    let c = state.layout().index_of(control)?;
    controlled_power_where(state, &|coords| coords[c], op, m, false, &|_| true)
}

/// Λ_M(U) where the exponent is any function of non-target coordinates.
pub fn controlled_power_where(
    state: &mut StateVector,
    power: &dyn Fn(&[usize]) -> usize,
    op: &dyn Operator,
    m: usize,
    adjoint: bool,
    cond: Cond<'_>,
) -> Result<()> {
    for k in 1..=m {
        op.apply_where(state, adjoint, &|coords| cond(coords) && power(coords) >= k)?;
    }
    Ok(())
}
