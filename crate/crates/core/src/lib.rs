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

//! Exact state-vector simulation of algorithms that query ε-biased oracles:
//! simulating a constant-bias oracle, robust OR, and estimating the bias.

pub mod binomial;
pub mod epsest;
pub mod error;
pub mod linalg;
pub mod oracles;
pub mod qaa;
pub mod qstate;
pub mod robustify;
pub mod search;

pub use error::{QError, Result};
