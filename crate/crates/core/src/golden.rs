// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reference pulse tables for the nine elementary gates `U_0 … U_8`, plus the
//! published time costs they are compared against.

use crate::error::{Error, Result};
use crate::schedule::PulseSchedule;

const TABLES: [&str; 9] = [
    include_str!("../data/golden/u0.csv"),
    include_str!("../data/golden/u1.csv"),
    include_str!("../data/golden/u2.csv"),
    include_str!("../data/golden/u3.csv"),
    include_str!("../data/golden/u4.csv"),
    include_str!("../data/golden/u5.csv"),
    include_str!("../data/golden/u6.csv"),
    include_str!("../data/golden/u7.csv"),
    include_str!("../data/golden/u8.csv"),
];

/// Direct-control time of each `U_m`.
pub const QUVIS_TIME: [f64; 9] = [0.3, 2.1, 2.1, 1.4, 2.4, 1.5, 2.4, 1.5, 2.4];

/// Published rotation/CNOT time of each `U_m`.
pub const QUMIS_TIME: [f64; 9] = [2.3, 8.4, 6.0, 2.6, 5.1, 2.5, 5.0, 2.5, 5.0];

pub const N_GOLDEN: usize = TABLES.len();

/// Raw table text for `U_m`.
pub fn table_text(m: usize) -> Result<&'static str> {
    TABLES.get(m).copied().ok_or_else(|| Error::OutOfRange {
        what: "golden gate index",
        value: m.to_string(),
    })
}

pub fn schedule(m: usize) -> Result<PulseSchedule> {
    PulseSchedule::read_pulse_table(table_text(m)?)
}
