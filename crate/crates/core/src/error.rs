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

use thiserror::Error;

/// Errors raised by the simulator and the algorithms built on top of it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` appears more than once")]
    DuplicateRegister(String),
    #[error("register `{name}` has dimension {dim}, expected {expected}")]
    DimensionMismatch {
        name: String,
        dim: usize,
        expected: usize,
    },
    #[error("coordinate {coord} is out of range for register `{name}` of dimension {dim}")]
    CoordinateOutOfRange {
        name: String,
        coord: usize,
        dim: usize,
    },
    #[error("layout with {0} amplitudes exceeds the simulation cap")]
    TooLarge(usize),
    #[error("register `{0}` is used both as control and as target")]
    RegisterOverlap(String),
    #[error("classical map value {value} does not fit register `{name}` of dimension {dim}")]
    RangeOverflow {
        name: String,
        value: usize,
        dim: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, QError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(QError::InvalidParameter(msg.into()))
}
