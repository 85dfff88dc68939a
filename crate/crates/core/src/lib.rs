// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

pub mod bench;
pub mod error;
pub mod evolution;
pub mod gates;
pub mod golden;
pub mod isa;
pub mod linalg;
pub mod optimizer;
pub mod par;
pub mod schedule;
pub mod spin;

pub use error::{Error, Result};
