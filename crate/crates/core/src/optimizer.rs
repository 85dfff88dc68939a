// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fine-grained time optimization (FGTO).
//!
//! Adam descends on the pulse amplitudes at a coarse slice width; once the
//! loss stalls the schedule is refined (every slice split in two, which
//! leaves the evolution unchanged) and descent resumes. The best schedule
//! seen at any stage is returned.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Evaluator, EvolutionConfig};
use crate::linalg::ComplexMatrix;
use crate::par::ExecPolicy;
use crate::schedule::PulseSchedule;
use crate::spin::SpinChainModel;

/// Unitarity tolerance for synthesis targets.
pub const TARGET_UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub max_iters_per_stage: usize,
    pub convergence_window: usize,
    pub convergence_rel_tol: f64,
    pub n_refinements: usize,
    pub init_amplitude: f64,
    pub seed: u64,
    pub field_clamp: Option<f64>,
    /// Stop as soon as the error drops to this value.
    pub target_error: f64,
    /// Slice width of the first stage.
    pub initial_tau: f64,
    /// Independent seeds tried per time budget by [`time_cost_search`].
    pub restarts: usize,
    /// Fan-out across independent runs.
    pub policy: ExecPolicy,
    pub evolution: EvolutionConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            max_iters_per_stage: 2000,
            convergence_window: 50,
            convergence_rel_tol: 1e-4,
            n_refinements: 3,
            init_amplitude: 3.0,
            seed: 0,
            field_clamp: None,
            target_error: 1e-8,
            initial_tau: 0.08,
            restarts: 1,
            policy: ExecPolicy::Parallel,
            evolution: EvolutionConfig::default(),
        }
    }
}

impl OptimizerConfig {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &'static str, v: f64| {
            Err(Error::OutOfRange {
                what,
                value: v.to_string(),
            })
        };
        if !(self.learning_rate > 0.0) {
            return bad("learning rate", self.learning_rate);
        }
        if !(0.0..1.0).contains(&self.adam_beta1) {
            return bad("adam beta1", self.adam_beta1);
        }
        if !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam beta2", self.adam_beta2);
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam eps", self.adam_eps);
        }
        if !(self.init_amplitude >= 0.0) {
            return bad("init amplitude", self.init_amplitude);
        }
        if !(self.initial_tau > 0.0) {
            return bad("initial tau", self.initial_tau);
        }
        if let Some(h) = self.field_clamp {
            if !(h >= 0.0) {
                return bad("field clamp", h);
            }
        }
        if self.max_iters_per_stage == 0 {
            return bad("iterations per stage", 0.0);
        }
        Ok(())
    }

    /// Slice count giving a first-stage width of at most `initial_tau`.
    pub fn initial_slices(&self, total_time: f64) -> usize {
        ((total_time / self.initial_tau) - 1e-9).ceil().max(1.0) as usize
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of every amplitude, followed by the optional clamp.
pub fn adam_step(
    schedule: &PulseSchedule,
    grad: &[f64],
    state: &AdamState,
    cfg: &OptimizerConfig,
) -> (PulseSchedule, AdamState) {
    assert_eq!(grad.len(), schedule.values().len(), "gradient shape mismatch");
    assert_eq!(state.m.len(), grad.len(), "Adam state shape mismatch");
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let t = state.t + 1;
    let bc1 = 1.0 - b1.powi(t as i32);
    let bc2 = 1.0 - b2.powi(t as i32);
    let mut next = schedule.clone();
    let mut st = AdamState {
        m: Vec::with_capacity(grad.len()),
        v: Vec::with_capacity(grad.len()),
        t,
    };
    for (i, (&g, x)) in grad.iter().zip(next.values_mut()).enumerate() {
        let m = b1 * state.m[i] + (1.0 - b1) * g;
        let v = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        *x -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        st.m.push(m);
        st.v.push(v);
    }
    if let Some(h) = cfg.field_clamp {
        next.clamp(h);
    }
    (next, st)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    /// Error at every evaluated iterate, across all stages.
    pub loss_history: Vec<f64>,
    /// Indices into `loss_history` where a refined stage begins.
    pub stage_boundaries: Vec<usize>,
    pub final_error: f64,
    pub final_schedule: PulseSchedule,
    pub seed: u64,
    /// Kept out of serialized output so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

impl OptimizationReport {
    pub fn iterations(&self) -> usize {
        self.loss_history.len()
    }
}

fn check_target(target: &ComplexMatrix) -> Result<()> {
    let deviation = target.unitarity_defect();
    if deviation > TARGET_UNITARITY_TOL {
        return Err(Error::NonUnitaryTarget { deviation });
    }
    Ok(())
}

fn stalled(stage_losses: &[f64], window: usize, rel_tol: f64) -> bool {
    if window == 0 || stage_losses.len() < 2 * window {
        return false;
    }
    let n = stage_losses.len();
    let prev: f64 = stage_losses[n - 2 * window..n - window].iter().sum::<f64>() / window as f64;
    let cur: f64 = stage_losses[n - window..].iter().sum::<f64>() / window as f64;
    prev <= 0.0 || (prev - cur) / prev < rel_tol
}

/// Synthesizes a schedule of duration `total_time` whose evolution matches `target`.
pub fn fgto_synthesize(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    total_time: f64,
    initial_slices: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizationReport> {
    cfg.validate()?;
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::OutOfRange {
            what: "total time",
            value: total_time.to_string(),
        });
    }
    if initial_slices == 0 {
        return Err(Error::OutOfRange {
            what: "initial slices",
            value: "0".into(),
        });
    }
    let eval = Evaluator::new(target, model, &cfg.evolution)?;
    check_target(target)?;
    let start = Instant::now();

    let mut schedule = PulseSchedule::random_init(
        model.n_qubits(),
        total_time,
        initial_slices,
        cfg.init_amplitude,
        cfg.seed,
    );
    if let Some(h) = cfg.field_clamp {
        schedule.clamp(h);
    }
    let mut history = Vec::new();
    let mut boundaries = Vec::new();
    let mut best: Option<(f64, PulseSchedule)> = None;

    'stages: for stage in 0..=cfg.n_refinements {
        if stage > 0 {
            boundaries.push(history.len());
            schedule = schedule.refine_double();
        }
        let stage_start = history.len();
        let mut adam = AdamState::new(schedule.values().len());
        for it in 0..cfg.max_iters_per_stage {
            let (err, grad) = eval.error_and_gradient(&schedule)?;
            history.push(err);
            if best.as_ref().is_none_or(|(b, _)| err < *b) {
                best = Some((err, schedule.clone()));
            }
            if err <= cfg.target_error {
                break 'stages;
            }
            if stalled(&history[stage_start..], cfg.convergence_window, cfg.convergence_rel_tol)
                || it + 1 == cfg.max_iters_per_stage
            {
                break;
            }
            let (next, st) = adam_step(&schedule, &grad, &adam, cfg);
            schedule = next;
            adam = st;
        }
    }

    let (_, final_schedule) = best.expect("at least one iteration runs");
    let final_error = eval.error(&final_schedule)?;
    Ok(OptimizationReport {
        loss_history: history,
        stage_boundaries: boundaries,
        final_error,
        final_schedule,
        seed: cfg.seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs one synthesis per seed (`cfg.seed + r` for `r < restarts`) under
/// `cfg.policy` and returns every report in seed order.
pub fn synthesize_restarts(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    total_time: f64,
    initial_slices: usize,
    cfg: &OptimizerConfig,
) -> Result<Vec<OptimizationReport>> {
    let restarts = cfg.restarts.max(1);
    cfg.policy
        .map_range(restarts, |r| {
            let run = OptimizerConfig {
                seed: cfg.seed.wrapping_add(r as u64),
                ..cfg.clone()
            };
            fgto_synthesize(target, model, total_time, initial_slices, &run)
        })
        .into_iter()
        .collect()
}

/// Lowest error among restarts; ties go to the earliest seed.
pub fn best_of_restarts(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    total_time: f64,
    initial_slices: usize,
    cfg: &OptimizerConfig,
) -> Result<OptimizationReport> {
    let reports = synthesize_restarts(target, model, total_time, initial_slices, cfg)?;
    Ok(reports
        .into_iter()
        .reduce(|a, b| if b.final_error < a.final_error { b } else { a })
        .expect("at least one restart"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSearch {
    pub total_time: f64,
    pub report: OptimizationReport,
    /// `(T, best error)` for every grid point tried, in order.
    pub attempts: Vec<(f64, f64)>,
}

/// Smallest grid time whose best restart reaches `error_budget`.
pub fn time_cost_search(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    cfg: &OptimizerConfig,
    error_budget: f64,
    t_grid: &[f64],
) -> Result<TimeSearch> {
    if t_grid.is_empty() {
        return Err(Error::InvalidConfig("time grid is empty".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("time grid must be strictly ascending".into()));
    }
    let mut attempts = Vec::new();
    let mut best_error = f64::INFINITY;
    for &t in t_grid {
        let report = best_of_restarts(target, model, t, cfg.initial_slices(t), cfg)?;
        attempts.push((t, report.final_error));
        best_error = best_error.min(report.final_error);
        if report.final_error <= error_budget {
            return Ok(TimeSearch {
                total_time: t,
                report,
                attempts,
            });
        }
    }
    Err(Error::BudgetUnreachable {
        budget: error_budget,
        best_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::gate_error;
    use crate::linalg::testing::random_unitary;

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            max_iters_per_stage: 60,
            n_refinements: 1,
            restarts: 1,
            policy: ExecPolicy::Sequential,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn zero_gradient_leaves_schedule() {
        let s = PulseSchedule::random_init(1, 1.0, 3, 1.0, 4);
        let mut st = AdamState::new(6);
        st.m = vec![0.5; 6];
        st.v = vec![0.25; 6];
        st.t = 3;
        // with fresh moments nothing moves
        let (still, fresh) = adam_step(&s, &[0.0; 6], &AdamState::new(6), &quick());
        assert_eq!(still, s);
        assert!(fresh.m.iter().all(|&m| m == 0.0));
        // with accumulated moments the estimates decay geometrically
        let (_, st2) = adam_step(&s, &[0.0; 6], &st, &quick());
        assert!(st2.m.iter().all(|&m| (m - 0.45).abs() < 1e-15));
        assert!(st2.v.iter().all(|&v| (v - 0.25 * 0.999).abs() < 1e-15));
    }

    #[test]
    fn first_step_hand_computed() {
        let mut s = PulseSchedule::zeros(1, 1.0, 1);
        s.set(crate::spin::Axis::X, 0, 0, 1.0);
        let g = [0.2, -3.0];
        let cfg = OptimizerConfig {
            learning_rate: 0.01,
            ..quick()
        };
        let (next, st) = adam_step(&s, &g, &AdamState::new(2), &cfg);
        // m̂ = g, v̂ = g², so the step is η·g/(|g| + ε)
        let expect0 = 1.0 - 0.01 * 0.2 / (0.2 + 1e-8);
        let expect1 = 0.0 + 0.01 * 3.0 / (3.0 + 1e-8);
        assert!((next.values()[0] - expect0).abs() < 1e-15);
        assert!((next.values()[1] - expect1).abs() < 1e-15);
        assert_eq!(st.t, 1);
        assert!((st.m[0] - 0.02).abs() < 1e-15);
        assert!((st.v[1] - 0.009).abs() < 1e-15);
    }

    #[test]
    fn zero_clamp_forces_zeros() {
        let s = PulseSchedule::random_init(2, 1.0, 4, 2.0, 1);
        let cfg = OptimizerConfig {
            field_clamp: Some(0.0),
            ..quick()
        };
        let (next, _) = adam_step(&s, &[1.0; 16], &AdamState::new(16), &cfg);
        assert!(next.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_target_stops_immediately() {
        let m = SpinChainModel::chain(1);
        let cfg = OptimizerConfig {
            init_amplitude: 0.0,
            ..quick()
        };
        let r = fgto_synthesize(&ComplexMatrix::identity(2), &m, 0.37, 3, &cfg).unwrap();
        assert_eq!(r.final_error, 0.0);
        assert_eq!(r.loss_history.len(), 1);
    }

    #[test]
    fn rejects_bad_targets() {
        let m = SpinChainModel::chain(2);
        let mut t = ComplexMatrix::identity(4);
        t[(0, 0)] = num_complex::Complex64::new(2.0, 0.0);
        assert!(matches!(
            fgto_synthesize(&t, &m, 0.3, 3, &quick()),
            Err(Error::NonUnitaryTarget { .. })
        ));
        assert!(matches!(
            fgto_synthesize(&ComplexMatrix::identity(8), &m, 0.3, 3, &quick()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn report_invariants() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 5);
        let cfg = quick();
        let r = fgto_synthesize(&target, &m, 0.5, 4, &cfg).unwrap();
        let recomputed = gate_error(&target, &m, &r.final_schedule, &cfg.evolution).unwrap();
        assert!((r.final_error - recomputed).abs() <= 1e-12);
        let min = r.loss_history.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.final_error, min);
        for &b in &r.stage_boundaries {
            assert!((r.loss_history[b] - r.loss_history[b - 1]).abs() <= 1e-10);
        }
        let again = fgto_synthesize(&target, &m, 0.5, 4, &cfg).unwrap();
        assert_eq!(again.loss_history, r.loss_history);
        assert_eq!(again.final_schedule, r.final_schedule);
    }

    #[test]
    fn clamped_runs_stay_bounded() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 6);
        let cfg = OptimizerConfig {
            field_clamp: Some(0.7),
            learning_rate: 0.2,
            ..quick()
        };
        let r = fgto_synthesize(&target, &m, 0.5, 4, &cfg).unwrap();
        assert!(r.final_schedule.max_abs() <= 0.7);
    }

    #[test]
    fn descent_reduces_error() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 7);
        let r = fgto_synthesize(&target, &m, 1.0, 8, &quick()).unwrap();
        assert!(r.final_error < r.loss_history[0]);
    }

    #[test]
    fn initial_slice_rule() {
        let cfg = OptimizerConfig::default();
        assert_eq!(cfg.initial_slices(0.24), 3);
        assert_eq!(cfg.initial_slices(0.3), 4);
        assert_eq!(cfg.initial_slices(0.01), 1);
    }

    #[test]
    fn search_examples() {
        let m = SpinChainModel::chain(1);
        let cfg = OptimizerConfig {
            init_amplitude: 0.0,
            ..quick()
        };
        let s = time_cost_search(&ComplexMatrix::identity(2), &m, &cfg, 1e-6, &[0.1, 0.2]).unwrap();
        assert_eq!(s.total_time, 0.1);

        let m2 = SpinChainModel::chain(2);
        let target = random_unitary(4, 1);
        let err = time_cost_search(&target, &m2, &quick(), 0.0, &[0.05, 0.1]).unwrap_err();
        assert!(matches!(err, Error::BudgetUnreachable { .. }));
        assert!(time_cost_search(&target, &m2, &quick(), 0.1, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn restarts_are_seeded_consecutively() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 2);
        let cfg = OptimizerConfig {
            restarts: 3,
            seed: 10,
            max_iters_per_stage: 5,
            n_refinements: 0,
            policy: ExecPolicy::Parallel,
            ..OptimizerConfig::default()
        };
        let reports = synthesize_restarts(&target, &m, 0.3, 3, &cfg).unwrap();
        let seeds: Vec<u64> = reports.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![10, 11, 12]);
        let seq = synthesize_restarts(
            &target,
            &m,
            0.3,
            3,
            &OptimizerConfig {
                policy: ExecPolicy::Sequential,
                ..cfg
            },
        )
        .unwrap();
        for (a, b) in seq.iter().zip(&reports) {
            assert_eq!(a.loss_history, b.loss_history);
            assert_eq!(a.final_schedule, b.final_schedule);
        }
    }
}
