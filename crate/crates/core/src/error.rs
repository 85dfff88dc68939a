// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::optimizer::OptimizationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("field on axis {axis} of qubit {qubit} is nonzero but the axis is not controllable")]
    AxisViolation { axis: char, qubit: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("target is not unitary (|U^dag U - I|_F = {deviation:.3e})")]
    NonUnitaryTarget { deviation: f64 },

    #[error("no grid point reached error budget {budget:.3e} (best {best_error:.3e})")]
    BudgetUnreachable { budget: f64, best_error: f64 },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: String },

    #[error("bad placement: {0}")]
    BadPlacement(String),

    #[error("unknown gate: {0}")]
    UnknownGate(String),

    #[error("synthesis of {label} failed: error {:.3e} above budget {budget:.3e}", report.final_error)]
    SynthesisFailed {
        label: String,
        budget: f64,
        report: Box<OptimizationReport>,
    },

    #[error("gate {0} has no realized schedule")]
    MissingRealization(usize),

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not_hermitian",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::AxisViolation { .. } => "axis_violation",
            Error::Parse { .. } => "parse",
            Error::Shape(_) => "shape",
            Error::NonUnitaryTarget { .. } => "non_unitary_target",
            Error::BudgetUnreachable { .. } => "budget_unreachable",
            Error::OutOfRange { .. } => "out_of_range",
            Error::BadPlacement(_) => "bad_placement",
            Error::UnknownGate(_) => "unknown_gate",
            Error::SynthesisFailed { .. } => "synthesis_failed",
            Error::MissingRealization(_) => "missing_realization",
            Error::Degenerate(_) => "degenerate",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
