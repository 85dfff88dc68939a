// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Desk-scale benchmark sweeps and the scaling fits applied to them.
//!
//! Every sweep returns an [`ExperimentResult`]: a columnar table ready for
//! plotting, fitted scaling laws, and per-cell failures. A cell that misses
//! its error budget is recorded with its best error and the sweep carries on.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Evaluator, EvolutionConfig};
use crate::gates::{controlled_phase, qft_matrix, swap_to_end_circuit};
use crate::golden;
use crate::isa::{
    circuit_error_estimate, compile_qft, default_plan, qumis_cost_of_quvis_gate, qumis_decompose_controlled_phase,
    realize_qumis, synthesize_gates, CompiledCircuit, InstructionSet, Op, RealizationPlan,
};
use crate::linalg::ComplexMatrix;
use crate::optimizer::{time_cost_search, OptimizerConfig};
use crate::par::ExecPolicy;
use crate::spin::{Interaction, SpinChainModel};

/// `y = γ x + β` for linear fits, `y = β e^{γ x}` for exponential ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub gamma: f64,
    pub beta: f64,
    /// RMS residual, in log space for exponential fits.
    pub residual: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn predict_linear(&self, x: f64) -> f64 {
        self.gamma * x + self.beta
    }

    pub fn predict_exponential(&self, x: f64) -> f64 {
        self.beta * (self.gamma * x).exp()
    }
}

fn usable(points: &[(f64, f64)], min_x: Option<f64>) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|&(x, y)| x.is_finite() && y.is_finite() && min_x.is_none_or(|m| x >= m))
        .collect()
}

fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!("{} usable points, need 2", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let gamma = sxy / sxx;
    let beta = my - gamma * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - gamma * p.0 - beta).powi(2)).sum();
    Ok((gamma, beta, (ss / n).sqrt()))
}

/// Least-squares line through the points with `x ≥ min_x`.
pub fn fit_linear(points: &[(f64, f64)], min_x: Option<f64>) -> Result<FitResult> {
    let pts = usable(points, min_x);
    let (gamma, beta, residual) = least_squares(&pts)?;
    Ok(FitResult {
        gamma,
        beta,
        residual,
        n_points: pts.len(),
    })
}

/// Linear least squares on `ln y`; every used value must be positive.
pub fn fit_exponential(points: &[(f64, f64)], min_x: Option<f64>) -> Result<FitResult> {
    let pts = usable(points, min_x);
    if let Some(&(x, y)) = pts.iter().find(|p| p.1 <= 0.0) {
        return Err(Error::Degenerate(format!("non-positive value {y} at {x}")));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, y.ln())).collect();
    let (gamma, log_beta, residual) = least_squares(&logs)?;
    Ok(FitResult {
        gamma,
        beta: log_beta.exp(),
        residual,
        n_points: pts.len(),
    })
}

/// Headered numeric table; `None` marks a missing cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(x, y)` pairs where both cells are present.
    pub fn pairs(&self, x: &str, y: &str) -> Vec<(f64, f64)> {
        let (Some(i), Some(j)) = (self.column(x), self.column(y)) else {
            return Vec::new();
        };
        self.rows.iter().filter_map(|r| Some((r[i]?, r[j]?))).collect()
    }

    /// Comma-separated text with a header line; floats use shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(|v| v.to_string()).unwrap_or_default())
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// A sweep cell that missed its budget or could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_error: Option<f64>,
}

impl CellFailure {
    fn from_error(cell: impl Into<String>, e: &Error) -> Self {
        let best_error = match e {
            Error::BudgetUnreachable { best_error, .. } => Some(*best_error),
            Error::SynthesisFailed { report, .. } => Some(report.final_error),
            _ => None,
        };
        Self {
            cell: cell.into(),
            message: e.to_string(),
            best_error,
        }
    }
}

/// Everything needed to rerun a sweep bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
}

impl Provenance {
    fn new<C: Serialize>(bench: &C, opt: &OptimizerConfig) -> Self {
        Self {
            config: serde_json::json!({ "bench": bench, "optimizer": opt }),
            seeds: (0..opt.restarts.max(1) as u64)
                .map(|r| opt.seed.wrapping_add(r))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub table: Table,
    /// Secondary tables, e.g. per-gate time windows of a trace.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra_tables: BTreeMap<String, Table>,
    #[serde(default)]
    pub fits: BTreeMap<String, FitResult>,
    #[serde(default)]
    pub failures: Vec<CellFailure>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    fn new(experiment: &str, table: Table, provenance: Provenance) -> Self {
        Self {
            experiment: experiment.into(),
            table,
            extra_tables: BTreeMap::new(),
            fits: BTreeMap::new(),
            failures: Vec::new(),
            provenance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    /// Fits `name` unless too few points survive; otherwise notes why.
    fn attach_fit(&mut self, name: String, fit: Result<FitResult>) {
        match fit {
            Ok(f) => {
                self.fits.insert(name, f);
            }
            Err(e) => self.failures.push(CellFailure::from_error(format!("fit {name}"), &e)),
        }
    }
}

type FitFn = fn(&[(f64, f64)], Option<f64>) -> Result<FitResult>;

/// Fits on `x ≥ min_x`, falling back to every point when fewer than two remain.
fn fit_with_fallback(fit: FitFn, points: &[(f64, f64)], min_x: Option<f64>) -> Result<FitResult> {
    fit(points, min_x).or_else(|_| fit(points, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetChoice {
    Quvis3,
    Quvis2,
    Qumis,
    Direct,
}

impl SetChoice {
    pub const ALL: [SetChoice; 4] = [
        SetChoice::Quvis3,
        SetChoice::Quvis2,
        SetChoice::Qumis,
        SetChoice::Direct,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SetChoice::Quvis3 => "quvis3",
            SetChoice::Quvis2 => "quvis2",
            SetChoice::Qumis => "qumis",
            SetChoice::Direct => "direct",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown set {s:?}")))
    }
}

/// Where the variational gates' pulses come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateSource {
    /// Reference tables where they exist, synthesis for the rest.
    #[default]
    Golden,
    /// Synthesize every gate at its listed time cost.
    Synthesize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QftBenchConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub sets: Vec<SetChoice>,
    pub gate_source: GateSource,
    /// Largest width synthesized directly as one gate.
    pub direct_max_n: usize,
    /// Direct-control time grid, as fractions of the 3-qubit-set time at that width.
    pub direct_time_fractions: Vec<f64>,
    pub error_budget: f64,
    /// Fits use widths `N ≥ fit_min_n` when at least two exist.
    pub fit_min_n: usize,
    /// Pulse duration used to realize the CNOT of the rotation/CNOT set.
    pub cnot_time: f64,
}

impl Default for QftBenchConfig {
    fn default() -> Self {
        Self {
            min_n: 3,
            max_n: 6,
            sets: SetChoice::ALL.to_vec(),
            gate_source: GateSource::Golden,
            direct_max_n: 5,
            direct_time_fractions: vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            error_budget: 5e-2,
            fit_min_n: 5,
            cnot_time: crate::isa::CNOT_TIME,
        }
    }
}

/// Realizes the gates of `set` missing a schedule, at their current time
/// cost. Gates that miss `budget` keep their best schedule and are reported.
pub fn realize_missing(
    set: &mut InstructionSet,
    model: &SpinChainModel,
    opt: &OptimizerConfig,
    budget: f64,
) -> Result<Vec<CellFailure>> {
    let missing = set.unrealized();
    let plan: Vec<RealizationPlan> = default_plan(set)
        .into_iter()
        .filter(|p| missing.contains(&p.id))
        .collect();
    let mut failures = Vec::new();
    for (p, outcome) in plan.iter().zip(synthesize_gates(set, model, opt, &plan)) {
        let label = format!("{}/{}", set.label, set.gate(p.id)?.gate.label);
        match outcome {
            Ok(report) => {
                let err = set.set_realization(p.id, report.final_schedule, model, &opt.evolution)?;
                if err > budget {
                    failures.push(CellFailure {
                        cell: label,
                        message: format!("error {err} above budget {budget} at T = {}", p.total_time),
                        best_error: Some(err),
                    });
                }
            }
            Err(e) => failures.push(CellFailure::from_error(label, &e)),
        }
    }
    Ok(failures)
}

/// Builds a realized instruction set for `choice` (not `Direct`).
pub fn prepare_set(
    choice: SetChoice,
    source: GateSource,
    model: &SpinChainModel,
    opt: &OptimizerConfig,
    budget: f64,
    cnot_time: f64,
) -> Result<(InstructionSet, Vec<CellFailure>)> {
    let mut set = match choice {
        SetChoice::Quvis3 => InstructionSet::quvis3(),
        SetChoice::Quvis2 => InstructionSet::quvis2(),
        SetChoice::Qumis => {
            let (set, report) = realize_qumis(model, opt, cnot_time)?;
            let mut failures = Vec::new();
            if report.final_error > budget {
                failures.push(CellFailure {
                    cell: "qumis/CNOT".into(),
                    message: format!("error {} above budget {budget} at T = {cnot_time}", report.final_error),
                    best_error: Some(report.final_error),
                });
            }
            return Ok((set, failures));
        }
        SetChoice::Direct => {
            return Err(Error::InvalidConfig("direct control has no instruction set".into()));
        }
    };
    if source == GateSource::Golden {
        set.load_golden(model, &opt.evolution)?;
    }
    let failures = realize_missing(&mut set, model, opt, budget)?;
    Ok((set, failures))
}

struct QftCell {
    n: usize,
    choice: SetChoice,
}

/// Time cost and composed error of the `N`-qubit QFT for each compared set.
pub fn bench_qft(cfg: &QftBenchConfig, model: &SpinChainModel, opt: &OptimizerConfig) -> Result<ExperimentResult> {
    if !(3..=9).contains(&cfg.max_n) || cfg.min_n < 3 || cfg.min_n > cfg.max_n {
        return Err(Error::OutOfRange {
            what: "QFT sweep widths",
            value: format!("{}..={}", cfg.min_n, cfg.max_n),
        });
    }
    let mut sets: Vec<SetChoice> = cfg.sets.clone();
    sets.sort();
    sets.dedup();
    if sets.is_empty() {
        return Err(Error::InvalidConfig("no sets to compare".into()));
    }
    let base = model.chain_like(3);
    let mut failures = Vec::new();
    let mut realized = BTreeMap::new();
    for &c in sets.iter().filter(|&&c| c != SetChoice::Direct) {
        let (set, f) = prepare_set(c, cfg.gate_source, &base, opt, cfg.error_budget, cfg.cnot_time)?;
        failures.extend(f);
        realized.insert(c, set);
    }

    let mut columns = vec!["n".to_string()];
    for c in &sets {
        columns.push(format!("time_{}", c.label()));
        columns.push(format!("error_{}", c.label()));
    }
    let cells: Vec<QftCell> = (cfg.min_n..=cfg.max_n)
        .flat_map(|n| sets.iter().map(move |&choice| QftCell { n, choice }))
        .filter(|c| c.choice != SetChoice::Direct || c.n <= cfg.direct_max_n)
        .collect();
    let inner = OptimizerConfig {
        policy: ExecPolicy::Sequential,
        ..opt.clone()
    };
    let outcomes = opt.policy.map(&cells, |cell| -> Result<(f64, f64)> {
        match cell.choice {
            SetChoice::Direct => {
                let nominal = compile_qft(&InstructionSet::quvis3(), cell.n)?.total_time;
                let grid: Vec<f64> = cfg.direct_time_fractions.iter().map(|f| f * nominal).collect();
                let target = qft_matrix(cell.n).matrix;
                let s = time_cost_search(&target, &model.chain_like(cell.n), &inner, cfg.error_budget, &grid)?;
                Ok((s.total_time, s.report.final_error))
            }
            c => {
                let set = &realized[&c];
                let circuit = compile_qft(set, cell.n)?;
                let err = circuit_error_estimate(&circuit, set, opt.evolution.metric)?;
                Ok((circuit.total_time, err))
            }
        }
    });

    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    let mut rows: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for (cell, outcome) in cells.iter().zip(outcomes) {
        let row = rows.entry(cell.n).or_insert_with(|| {
            let mut r = vec![None; table.columns.len()];
            r[0] = Some(cell.n as f64);
            r
        });
        let col = 1 + 2 * sets.iter().position(|&c| c == cell.choice).expect("listed set");
        match outcome {
            Ok((t, e)) => {
                row[col] = Some(t);
                row[col + 1] = Some(e);
            }
            Err(e) => failures.push(CellFailure::from_error(
                format!("N={} {}", cell.n, cell.choice.label()),
                &e,
            )),
        }
    }
    table.rows = rows.into_values().collect();

    let mut result = ExperimentResult::new("qft", table, Provenance::new(cfg, opt));
    result.failures = failures;
    let min_x = Some(cfg.fit_min_n as f64);
    for c in &sets {
        let l = c.label();
        let times = result.table.pairs("n", &format!("time_{l}"));
        let errors = result.table.pairs("n", &format!("error_{l}"));
        result.attach_fit(format!("time_{l}"), fit_with_fallback(fit_linear, &times, min_x));
        result.attach_fit(format!("error_{l}"), fit_with_fallback(fit_exponential, &errors, min_x));
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseTraceConfig {
    pub thetas: Vec<f64>,
    /// Ascending direct-control durations tried for each angle.
    pub time_grid: Vec<f64>,
    pub error_budget: f64,
    pub cnot_time: f64,
}

impl Default for PhaseTraceConfig {
    fn default() -> Self {
        Self {
            thetas: vec![0.0, PI / 8.0, PI / 4.0, PI / 2.0, PI],
            time_grid: (1..=12).map(|k| 0.05 * k as f64).collect(),
            error_budget: 5e-2,
            cnot_time: crate::isa::CNOT_TIME,
        }
    }
}

/// `ε(t)` of a controlled phase realized directly and through rotations and CNOTs.
///
/// The main table holds `(θ, series, t, ε)` with series 0 for direct control
/// and 1 for the gate sequence, sampled at gate boundaries. `summary` holds
/// per-angle totals and `windows` the time interval of every gate.
pub fn bench_phase_trace(
    cfg: &PhaseTraceConfig,
    model: &SpinChainModel,
    opt: &OptimizerConfig,
) -> Result<ExperimentResult> {
    if cfg.thetas.is_empty() {
        return Err(Error::InvalidConfig("no angles to trace".into()));
    }
    let local = model.chain_like(2);
    let (qumis, cnot_report) = realize_qumis(&local, opt, cfg.cnot_time)?;
    let inner = OptimizerConfig {
        policy: ExecPolicy::Sequential,
        ..opt.clone()
    };
    let direct = opt.policy.map(&cfg.thetas, |&theta| -> Result<(f64, Vec<(f64, f64)>)> {
        let target = controlled_phase(theta).matrix;
        if (&ComplexMatrix::identity(4) - &target).frobenius_norm() < 1e-12 {
            return Ok((0.0, vec![(0.0, 0.0)]));
        }
        let s = time_cost_search(&target, &local, &inner, cfg.error_budget, &cfg.time_grid)?;
        let tr = Evaluator::new(&target, &local, &opt.evolution)?.trace(&s.report.final_schedule)?;
        Ok((s.total_time, tr.times.into_iter().zip(tr.errors).collect()))
    });

    let mut table = Table::new(&["theta", "series", "t", "error"]);
    let mut summary = Table::new(&["theta", "direct_time", "direct_error", "qumis_time", "qumis_error"]);
    let mut windows = Table::new(&["theta", "op", "start", "end"]);
    let mut failures = Vec::new();
    if cnot_report.final_error > cfg.error_budget {
        failures.push(CellFailure {
            cell: "qumis/CNOT".into(),
            message: format!(
                "error {} above budget {} at T = {}",
                cnot_report.final_error, cfg.error_budget, cfg.cnot_time
            ),
            best_error: Some(cnot_report.final_error),
        });
    }
    for (&theta, outcome) in cfg.thetas.iter().zip(direct) {
        let (direct_time, direct_error) = match outcome {
            Ok((t, trace)) => {
                let last = trace.last().map(|p| p.1);
                for (tt, e) in trace {
                    table.push(vec![Some(theta), Some(0.0), Some(tt), Some(e)]);
                }
                (Some(t), last)
            }
            Err(e) => {
                failures.push(CellFailure::from_error(format!("direct theta={theta}"), &e));
                (None, None)
            }
        };
        let (qt, qe) = qumis_trace(theta, &qumis, opt, &mut table, &mut windows)?;
        summary.push(vec![Some(theta), direct_time, direct_error, Some(qt), Some(qe)]);
    }
    let mut result = ExperimentResult::new("phase_trace", table, Provenance::new(cfg, opt));
    result.extra_tables.insert("summary".into(), summary);
    result.extra_tables.insert("windows".into(), windows);
    result.failures = failures;
    Ok(result)
}

/// Appends the gate-boundary trace of the decomposed phase gate.
fn qumis_trace(
    theta: f64,
    set: &InstructionSet,
    opt: &OptimizerConfig,
    table: &mut Table,
    windows: &mut Table,
) -> Result<(f64, f64)> {
    let target = controlled_phase(theta).matrix;
    let metric = opt.evolution.metric;
    let ops = qumis_decompose_controlled_phase(theta).placements;
    let mut t = 0.0;
    let mut err = metric.distance(&target, &ComplexMatrix::identity(4))?;
    table.push(vec![Some(theta), Some(1.0), Some(0.0), Some(err)]);
    for (i, p) in ops.iter().enumerate() {
        let prefix = CompiledCircuit::new("prefix", 2, ops[..=i].to_vec(), set)?;
        let u = prefix.realized_unitary(set)?;
        let start = t;
        t = prefix.total_time;
        err = metric.distance(&target, &u)?;
        if t > start || matches!(p.op, Op::Cnot) {
            windows.push(vec![Some(theta), Some(i as f64), Some(start), Some(t)]);
        }
        table.push(vec![Some(theta), Some(1.0), Some(t), Some(err)]);
    }
    Ok((t, err))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwapBenchConfig {
    pub max_n: usize,
    pub interactions: Vec<Interaction>,
    pub time_grid: Vec<f64>,
    pub error_budget: f64,
}

impl Default for SwapBenchConfig {
    fn default() -> Self {
        Self {
            max_n: 4,
            interactions: vec![Interaction::IsingZz, Interaction::HeisenbergXyz],
            time_grid: (1..=40).map(|k| 0.25 * k as f64).collect(),
            error_budget: 1e-1,
        }
    }
}

fn interaction_label(i: Interaction) -> &'static str {
    match i {
        Interaction::IsingZz => "ising",
        Interaction::HeisenbergXyz => "heisenberg",
    }
}

/// Shortest direct-control time moving qubit 1 to the end of an `N`-chain.
pub fn bench_swap(cfg: &SwapBenchConfig, model: &SpinChainModel, opt: &OptimizerConfig) -> Result<ExperimentResult> {
    if cfg.max_n < 2 {
        return Err(Error::OutOfRange {
            what: "swap sweep width",
            value: cfg.max_n.to_string(),
        });
    }
    let mut kinds = cfg.interactions.clone();
    kinds.dedup();
    let cells: Vec<(usize, Interaction)> = (2..=cfg.max_n)
        .flat_map(|n| kinds.iter().map(move |&i| (n, i)))
        .collect();
    let inner = OptimizerConfig {
        policy: ExecPolicy::Sequential,
        ..opt.clone()
    };
    let outcomes = opt.policy.map(&cells, |&(n, kind)| {
        let mut chain = model.chain_like(n);
        chain.interaction = kind;
        let target = swap_to_end_circuit(n).matrix;
        time_cost_search(&target, &chain, &inner, cfg.error_budget, &cfg.time_grid)
    });

    let mut columns = vec!["n".to_string()];
    for &k in &kinds {
        columns.push(format!("time_{}", interaction_label(k)));
        columns.push(format!("error_{}", interaction_label(k)));
    }
    let mut table = Table {
        columns,
        rows: (2..=cfg.max_n)
            .map(|n| {
                let mut r = vec![None; 1 + 2 * kinds.len()];
                r[0] = Some(n as f64);
                r
            })
            .collect(),
    };
    let mut failures = Vec::new();
    for (&(n, kind), outcome) in cells.iter().zip(outcomes) {
        let col = 1 + 2 * kinds.iter().position(|&k| k == kind).expect("listed interaction");
        match outcome {
            Ok(s) => {
                table.rows[n - 2][col] = Some(s.total_time);
                table.rows[n - 2][col + 1] = Some(s.report.final_error);
            }
            Err(e) => failures.push(CellFailure::from_error(
                format!("N={n} {}", interaction_label(kind)),
                &e,
            )),
        }
    }
    let mut result = ExperimentResult::new("swap", table, Provenance::new(cfg, opt));
    result.failures = failures;
    for &k in &kinds {
        let l = interaction_label(k);
        let pts = result.table.pairs("n", &format!("time_{l}"));
        result.attach_fit(format!("time_{l}"), fit_linear(&pts, None));
    }
    Ok(result)
}

/// Replays the nine reference tables on the chain and compares with their gates.
pub fn verify_golden(model: &SpinChainModel, evo: &EvolutionConfig, budget: f64) -> Result<ExperimentResult> {
    let mut table = Table::new(&["m", "total_time", "slices", "error"]);
    let mut failures = Vec::new();
    for m in 0..golden::N_GOLDEN {
        let schedule = golden::schedule(m)?;
        let gate = crate::isa::quvis_gate(m)?;
        let local = model.chain_like(gate.width());
        let err = crate::evolution::gate_error(&gate.gate.matrix, &local, &schedule, evo)?;
        table.push(vec![
            Some(m as f64),
            Some(schedule.total_time()),
            Some(schedule.n_slices() as f64),
            Some(err),
        ]);
        if err > budget {
            failures.push(CellFailure {
                cell: format!("U{m}"),
                message: format!("replay error {err} above {budget}"),
                best_error: Some(err),
            });
        }
    }
    let mut result = ExperimentResult::new(
        "verify_golden",
        table,
        Provenance::new(&budget, &OptimizerConfig::default()),
    );
    result.provenance.seeds.clear();
    result.failures = failures;
    Ok(result)
}

/// Per-gate time costs of the 3-qubit set: direct control against the
/// rotation/CNOT lowering. With `resynthesize` the direct-control error
/// comes from fresh synthesis at the listed time instead of the reference table.
pub fn bench_gate_costs(model: &SpinChainModel, opt: &OptimizerConfig, resynthesize: bool) -> Result<ExperimentResult> {
    let base = model.chain_like(3);
    let mut set = InstructionSet::quvis3();
    let mut failures = Vec::new();
    if resynthesize {
        failures = realize_missing(&mut set, &base, opt, 5e-2)?;
    } else {
        set.load_golden(&base, &opt.evolution)?;
    }
    let mut table = Table::new(&[
        "m",
        "quvis_time",
        "quvis_error",
        "qumis_time",
        "qumis_time_published",
        "ratio",
    ]);
    for g in &set.gates {
        let qumis = qumis_cost_of_quvis_gate(g.id)?;
        table.push(vec![
            Some(g.id as f64),
            Some(g.time_cost),
            g.realized_error,
            Some(qumis),
            Some(golden::QUMIS_TIME[g.id]),
            Some(g.time_cost / qumis),
        ]);
    }
    let mut result = ExperimentResult::new("gate_costs", table, Provenance::new(&resynthesize, opt));
    result.failures = failures;
    Ok(result)
}
