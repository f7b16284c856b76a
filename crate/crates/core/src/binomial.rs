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

//! Exact binomial tails for majority-vote sizing.

/// C(n, k) as a float.
pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn pmf(n: usize, k: usize, p: f64) -> f64 {
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Pr[Bin(n, p) ≥ k].
pub fn tail_at_least(n: usize, k: usize, p: f64) -> f64 {
    (k..=n).map(|i| pmf(n, i, p)).sum()
}

/// Probability that a strict majority of `n` independent trials succeeds,
/// each with probability `p`. `n` must be odd.
pub fn majority_probability(n: usize, p: f64) -> f64 {
    debug_assert!(n % 2 == 1);
    tail_at_least(n, n / 2 + 1, p)
}

/// Smallest odd `n` whose majority over trials failing with probability
/// `p_fail` fails with probability at most `target`.
pub fn smallest_odd_majority(p_fail: f64, target: f64) -> usize {
    assert!(p_fail < 0.5, "majority voting needs p_fail < 1/2");
    let mut n = 1;
    while majority_probability(n, p_fail) > target {
        n += 2;
    }
    n
}

/// Smallest odd `n` whose majority over trials succeeding with probability
/// `p_ok` succeeds with probability at least `target`.
pub fn smallest_odd_majority_success(p_ok: f64, target: f64) -> usize {
    assert!(p_ok > 0.5, "majority voting needs p_ok > 1/2");
    let mut n = 1;
    while majority_probability(n, p_ok) < target {
        n += 2;
    }
    n
}
