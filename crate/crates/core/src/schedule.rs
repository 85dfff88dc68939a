// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant pulse schedules and their text table format.
//!
//! A table is a metadata line `T=<time>,K=<slices>,N=<qubits>`, a header
//! `x1,…,xN,y1,…,yN`, and one comma-separated row of field amplitudes per
//! slice. Values are written with the shortest representation that parses
//! back to the same `f64`, so a write/read round trip is bit-exact.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{Axis, FieldSnapshot};

/// Axes carried by a schedule, in storage order.
pub const SCHEDULE_AXES: [Axis; 2] = [Axis::X, Axis::Y];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    n_qubits: usize,
    total_time: f64,
    n_slices: usize,
    /// `[axis][qubit][slice]`, flattened.
    values: Vec<f64>,
}

fn axis_slot(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => panic!("schedules carry x and y fields only"),
    }
}

impl PulseSchedule {
    pub fn zeros(n_qubits: usize, total_time: f64, n_slices: usize) -> Self {
        assert!(n_qubits >= 1 && n_slices >= 1, "schedule needs qubits and slices");
        assert!(
            total_time > 0.0 && total_time.is_finite(),
            "total time must be positive"
        );
        Self {
            n_qubits,
            total_time,
            n_slices,
            values: vec![0.0; 2 * n_qubits * n_slices],
        }
    }

    /// Entries i.i.d. uniform on `[−amplitude, amplitude]`.
    pub fn random_init(n_qubits: usize, total_time: f64, n_slices: usize, amplitude: f64, seed: u64) -> Self {
        assert!(amplitude >= 0.0, "amplitude must be nonnegative");
        let mut s = Self::zeros(n_qubits, total_time, n_slices);
        if amplitude > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in &mut s.values {
                *v = rng.random_range(-amplitude..=amplitude);
            }
        }
        s
    }

    /// Builds a schedule from `[axis][qubit][slice]` values.
    pub fn from_values(n_qubits: usize, total_time: f64, n_slices: usize, values: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 || n_slices == 0 {
            return Err(Error::Shape("schedule needs at least one qubit and one slice".into()));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::OutOfRange {
                what: "total time",
                value: total_time.to_string(),
            });
        }
        if values.len() != 2 * n_qubits * n_slices {
            return Err(Error::dims(2 * n_qubits * n_slices, values.len()));
        }
        Ok(Self {
            n_qubits,
            total_time,
            n_slices,
            values,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn tau(&self) -> f64 {
        self.total_time / self.n_slices as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn index(&self, axis: Axis, qubit: usize, slice: usize) -> usize {
        debug_assert!(qubit < self.n_qubits && slice < self.n_slices);
        (axis_slot(axis) * self.n_qubits + qubit) * self.n_slices + slice
    }

    pub fn get(&self, axis: Axis, qubit: usize, slice: usize) -> f64 {
        self.values[self.index(axis, qubit, slice)]
    }

    pub fn set(&mut self, axis: Axis, qubit: usize, slice: usize, v: f64) {
        let i = self.index(axis, qubit, slice);
        self.values[i] = v;
    }

    pub fn snapshot(&self, slice: usize) -> FieldSnapshot {
        let mut f = FieldSnapshot::zeros(self.n_qubits);
        for axis in SCHEDULE_AXES {
            for q in 0..self.n_qubits {
                f.axis_mut(axis)[q] = self.get(axis, q, slice);
            }
        }
        f
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Clips every amplitude into `[−h_max, h_max]`.
    pub fn clamp(&mut self, h_max: f64) {
        for v in &mut self.values {
            *v = v.clamp(-h_max, h_max);
        }
    }

    /// Splits every slice into two equal halves carrying the same value.
    pub fn refine_double(&self) -> Self {
        let k = self.n_slices;
        let mut values = Vec::with_capacity(self.values.len() * 2);
        for row in self.values.chunks(k) {
            for &v in row {
                values.push(v);
                values.push(v);
            }
        }
        Self {
            n_qubits: self.n_qubits,
            total_time: self.total_time,
            n_slices: 2 * k,
            values,
        }
    }

    /// `self` followed in time by `later`; both must share τ.
    pub fn concat(&self, later: &Self) -> Result<Self> {
        if self.n_qubits != later.n_qubits {
            return Err(Error::dims(
                format!("{} qubits", self.n_qubits),
                format!("{} qubits", later.n_qubits),
            ));
        }
        if (self.tau() - later.tau()).abs() > 1e-12 * self.tau().max(later.tau()) {
            return Err(Error::Shape(format!(
                "slice widths differ ({} vs {})",
                self.tau(),
                later.tau()
            )));
        }
        let k = self.n_slices + later.n_slices;
        let mut values = Vec::with_capacity(2 * self.n_qubits * k);
        for (a, b) in self
            .values
            .chunks(self.n_slices)
            .zip(later.values.chunks(later.n_slices))
        {
            values.extend_from_slice(a);
            values.extend_from_slice(b);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            total_time: self.total_time + later.total_time,
            n_slices: k,
            values,
        })
    }

    pub fn column_names(n_qubits: usize) -> Vec<String> {
        SCHEDULE_AXES
            .iter()
            .flat_map(|a| (1..=n_qubits).map(move |q| format!("{a}{q}")))
            .collect()
    }

    pub fn write_pulse_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "T={},K={},N={}", self.total_time, self.n_slices, self.n_qubits);
        out.push_str(&Self::column_names(self.n_qubits).join(","));
        out.push('\n');
        for k in 0..self.n_slices {
            let row: Vec<String> = SCHEDULE_AXES
                .iter()
                .flat_map(|&a| (0..self.n_qubits).map(move |q| (a, q)))
                .map(|(a, q)| format!("{}", self.get(a, q, k)))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn read_pulse_table(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (meta_line, meta) = lines.next().ok_or_else(|| Error::Shape("empty pulse table".into()))?;
        let (total_time, n_slices, n_qubits) = parse_metadata(meta_line, meta)?;

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| Error::Shape("pulse table has no header".into()))?;
        let width = header.split(',').count();
        if width != 2 * n_qubits {
            return Err(Error::Shape(format!(
                "header on line {header_line} has {width} columns, expected {}",
                2 * n_qubits
            )));
        }
        // Labels are informational; columns are taken positionally.

        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_slices);
        for (line_no, line) in lines {
            let mut row = Vec::with_capacity(width);
            let mut column = 1;
            for field in line.split(',') {
                let trimmed = field.trim();
                let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    column,
                    message: format!("not a number: {trimmed:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        column,
                        message: "non-finite value".into(),
                    });
                }
                row.push(v);
                column += field.len() + 1;
            }
            if row.len() != width {
                return Err(Error::Shape(format!(
                    "row on line {line_no} has {} values, expected {width}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Shape("pulse table has no rows".into()));
        }
        if rows.len() != n_slices {
            return Err(Error::Shape(format!(
                "metadata declares K={n_slices} but the table has {} rows",
                rows.len()
            )));
        }
        let mut s = Self::zeros(n_qubits, total_time, n_slices);
        for (k, row) in rows.iter().enumerate() {
            for (a_i, &axis) in SCHEDULE_AXES.iter().enumerate() {
                for q in 0..n_qubits {
                    s.set(axis, q, k, row[a_i * n_qubits + q]);
                }
            }
        }
        Ok(s)
    }
}

fn parse_metadata(line_no: usize, meta: &str) -> Result<(f64, usize, usize)> {
    let mut t = None;
    let mut k = None;
    let mut n = None;
    let mut column = 1;
    for part in meta.split(',') {
        let bad = |msg: String| Error::Parse {
            line: line_no,
            column,
            message: msg,
        };
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, found {part:?}")))?;
        let value = value.trim();
        match key.trim() {
            "T" => {
                let v: f64 = value.parse().map_err(|_| bad(format!("bad total time {value:?}")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad(format!("total time must be positive, found {value}")));
                }
                t = Some(v);
            }
            "K" | "N" => {
                let v: usize = value.parse().map_err(|_| bad(format!("bad count {value:?}")))?;
                if v == 0 {
                    return Err(bad(format!("{} must be positive", key.trim())));
                }
                if key.trim() == "K" {
                    k = Some(v);
                } else {
                    n = Some(v);
                }
            }
            other => return Err(bad(format!("unknown metadata key {other:?}"))),
        }
        column += part.len() + 1;
    }
    match (t, k, n) {
        (Some(t), Some(k), Some(n)) => Ok((t, k, n)),
        _ => Err(Error::Parse {
            line: line_no,
            column: 1,
            message: "metadata must define T, K and N".into(),
        }),
    }
}
