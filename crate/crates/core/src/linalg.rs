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

//! Small dense linear-algebra helpers.

use nalgebra::SymmetricEigen;

use crate::qstate::{Matrix, C64};

/// A unitary whose first column is the unit vector `col`.
///
/// Built from one Householder reflection: with ρ the phase of `col[0]` and
/// c' = ρ̄·col, the reflection H = I − 2vv†/(v†v), v = e₀ − c', maps e₀ to c';
/// the result is ρ·H. The construction is deterministic in `col`.
pub fn unitary_with_first_column(col: &[C64]) -> Matrix {
    let n = col.len();
    let c0 = col[0];
    let rho = if c0.norm() > 1e-300 {
        c0 / c0.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let cp: Vec<C64> = col.iter().map(|c| c * rho.conj()).collect();
    let mut v: Vec<C64> = cp.iter().map(|c| -c).collect();
    v[0] += 1.0;
    let vn: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut h = Matrix::identity(n, n);
    if vn > 1e-28 {
        for r in 0..n {
            for c in 0..n {
                h[(r, c)] -= v[r] * v[c].conj() * (2.0 / vn);
            }
        }
    }
    h * rho
}

/// Largest entry of |U†U − I|.
pub fn unitarity_defect(u: &Matrix) -> f64 {
    let n = u.ncols();
    let p = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((p[(r, c)] - want).norm());
        }
    }
    worst
}

/// Vectors c_x with ⟨c_x|c_y⟩ = G_xy for a Hermitian positive semidefinite Gram
/// matrix G. Returns one row per index, of length equal to the numerical rank.
pub fn gram_vectors(g: &Matrix) -> Vec<Vec<C64>> {
    let n = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let keep: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > 1e-13 * scale.max(1.0))
        .collect();
    (0..n)
        .map(|x| {
            let mut row: Vec<C64> = keep
                .iter()
                .map(|&k| eig.eigenvectors[(x, k)].conj() * eig.eigenvalues[k].sqrt())
                .collect();
            if row.is_empty() {
                row.push(C64::new(0.0, 0.0));
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_has_requested_column() {
        let cols: Vec<Vec<C64>> = vec![
            vec![C64::new(1.0, 0.0), 0.0.into(), 0.0.into()],
            vec![0.0.into(), C64::new(0.0, 1.0)],
            vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            vec![C64::new(0.5, 0.5), C64::new(0.5, 0.0), C64::new(0.0, -0.5)],
        ];
        for col in cols {
            let u = unitary_with_first_column(&col);
            assert!(unitarity_defect(&u) < 1e-12);
            for (r, c) in col.iter().enumerate() {
                assert!((u[(r, 0)] - c).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_vectors_reproduce_gram() {
        let vs = [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ];
        let g = Matrix::from_fn(3, 3, |i, j| {
            vs[i].iter().zip(&vs[j]).map(|(a, b)| a.conj() * b).sum::<C64>()
        });
        let cs = gram_vectors(&g);
        assert_eq!(cs[0].len(), 2);
        for i in 0..3 {
            for j in 0..3 {
                let ip: C64 = cs[i].iter().zip(&cs[j]).map(|(a, b)| a.conj() * b).sum();
                assert!((ip - g[(i, j)]).norm() < 1e-12);
            }
        }
    }
}
