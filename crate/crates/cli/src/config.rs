// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration, read from a TOML file.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use quvis::bench::{PhaseTraceConfig, QftBenchConfig, SwapBenchConfig};
use quvis::gates::{self, Gate};
use quvis::isa::{quvis_gate, InstructionSet};
use quvis::optimizer::OptimizerConfig;
use quvis::spin::{Axis, AxisSet, BasisConvention, FieldSign, Interaction, SpinChainModel};
use serde::{Deserialize, Serialize};

/// A configuration file that failed to parse, with its location.
#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, ":{l}:{c}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub interaction: Interaction,
    pub field_sign: FieldSign,
    pub basis: BasisConvention,
    pub control_axes: Vec<Axis>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            interaction: Interaction::IsingZz,
            field_sign: FieldSign::Supplement,
            basis: BasisConvention::SpinDownIsZero,
            control_axes: vec![Axis::X, Axis::Y],
        }
    }
}

impl ModelConfig {
    pub fn chain(&self, n: usize) -> SpinChainModel {
        let mut m = SpinChainModel::chain(n);
        m.interaction = self.interaction;
        m.field_sign = self.field_sign;
        m.basis = self.basis;
        m.control_axes = AxisSet::from_axes(&self.control_axes);
        m
    }
}

/// Synthesis target and its time budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    /// `cp:<θ>`, `cnot`, `swap`, `hadamard`, `identity:<n>`, `u<m>`,
    /// `quvis2:<id>`, `qft:<n>` or `swapchain:<n>`.
    pub gate: String,
    pub total_time: f64,
    pub initial_slices: Option<usize>,
    pub error_budget: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            gate: "cp:pi/2".into(),
            total_time: 0.45,
            initial_slices: None,
            error_budget: 5e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    pub optimizer: OptimizerConfig,
    pub target: TargetConfig,
    pub qft: QftBenchConfig,
    pub phase: PhaseTraceConfig,
    pub swap: SwapBenchConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "results".into() }
    }
}

/// `(line, column)`, both one-based, of byte `offset` in `text`.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map(|s| locate(text, s.start)).unzip();
            ConfigError {
                path: path.to_path_buf(),
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(Self::parse(&text, path)?)
    }
}

/// Parses `1.2`, `pi`, `pi/4`, `3pi/8` or `-pi/2`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some("") | Some("+") => PI,
        Some("-") => -PI,
        Some(coef) => coef.trim().parse::<f64>().ok()? * PI,
        None => num.parse::<f64>().ok()?,
    };
    Some(value / den)
}

/// Width and matrix of a named target.
pub fn resolve_target(spec: &str) -> anyhow::Result<Gate> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let int = |what: &str| -> anyhow::Result<usize> {
        arg.and_then(|a| a.parse().ok())
            .ok_or_else(|| anyhow::anyhow!("target {what} needs an integer argument, got {spec:?}"))
    };
    let gate = match name {
        "cp" => {
            let theta = arg
                .and_then(parse_angle)
                .ok_or_else(|| anyhow::anyhow!("target cp needs an angle, got {spec:?}"))?;
            gates::controlled_phase(theta)
        }
        "cnot" => gates::cnot(),
        "swap" => gates::swap2(),
        "hadamard" => gates::hadamard(),
        "identity" => gates::identity(int("identity")?),
        "qft" => gates::qft_matrix(int("qft")?),
        "swapchain" => {
            let n = int("swapchain")?;
            anyhow::ensure!(n >= 2, "swap chain needs at least two qubits");
            gates::swap_to_end_circuit(n)
        }
        "quvis2" => InstructionSet::quvis2().gate(int("quvis2")?)?.gate.clone(),
        u if u.starts_with('u') => {
            let m = u[1..].parse().map_err(|_| anyhow::anyhow!("unknown target {spec:?}"))?;
            quvis_gate(m)?.gate
        }
        _ => anyhow::bail!("unknown target {spec:?}"),
    };
    Ok(gate)
}
