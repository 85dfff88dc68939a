// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Schedule → unitary, gate error and its exact gradient.
//!
//! The evolution operator is `U = U_K ⋯ U_1` with `U_k = exp(−iτ H_k)`;
//! slice 1 acts first. The gradient is computed with one forward pass that
//! keeps every slice's eigendecomposition and prefix product, then one
//! reverse (adjoint) pass that contracts the Fréchet derivative of each slice
//! against its environment `M_k = P_{k−1} V† U_K ⋯ U_{k+1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, frobenius_distance, phase_aligned_distance, ComplexMatrix, HermitianEigen};
use crate::par::ExecPolicy;
use crate::schedule::{PulseSchedule, SCHEDULE_AXES};
use crate::spin::{HamiltonianTerms, SpinChainModel};

/// Below this error the gradient is defined as zero.
pub const GRADIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    #[default]
    ExactPerSlice,
    /// Each slice split into `trotter_substeps` identical factors.
    TrotterCompat,
}

/// How the distance between target and realized unitary is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// `min_φ ‖V − e^{iφ}U‖_F`. Traceless Hamiltonians only reach `SU(2^N)`,
    /// so this is the metric under which gates with `det ≠ 1` are reachable.
    #[default]
    PhaseAligned,
    /// Plain `‖V − U‖_F`.
    PhaseSensitive,
}

impl ErrorMetric {
    pub fn distance(self, target: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64> {
        match self {
            ErrorMetric::PhaseAligned => phase_aligned_distance(target, u),
            ErrorMetric::PhaseSensitive => frobenius_distance(target, u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub mode: EvolutionMode,
    pub trotter_substeps: usize,
    pub metric: ErrorMetric,
    /// Policy for per-slice work inside one evaluation.
    pub policy: ExecPolicy,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            mode: EvolutionMode::ExactPerSlice,
            trotter_substeps: 1,
            metric: ErrorMetric::PhaseAligned,
            policy: ExecPolicy::Sequential,
        }
    }
}

impl EvolutionConfig {
    pub fn with_metric(metric: ErrorMetric) -> Self {
        Self {
            metric,
            ..Self::default()
        }
    }
}

/// `ε(kτ)` for `k = 0..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
}

struct Slice {
    eig: HermitianEigen,
    unitary: ComplexMatrix,
}

/// Reusable evaluator for one `(target, model, config)` triple.
pub struct Evaluator {
    target: ComplexMatrix,
    terms: HamiltonianTerms,
    n_qubits: usize,
    model: SpinChainModel,
    cfg: EvolutionConfig,
}

impl Evaluator {
    pub fn new(target: &ComplexMatrix, model: &SpinChainModel, cfg: &EvolutionConfig) -> Result<Self> {
        let d = model.dim();
        if target.rows() != d || target.cols() != d {
            return Err(Error::dims(format!("{d}x{d} target"), target.dim_string()));
        }
        if cfg.trotter_substeps == 0 {
            return Err(Error::OutOfRange {
                what: "trotter substeps",
                value: "0".into(),
            });
        }
        Ok(Self {
            target: target.clone(),
            terms: model.terms(),
            n_qubits: model.n_qubits(),
            model: model.clone(),
            cfg: *cfg,
        })
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }

    fn check(&self, s: &PulseSchedule) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::dims(
                format!("{}-qubit schedule", self.n_qubits),
                format!("{}-qubit schedule", s.n_qubits()),
            ));
        }
        for axis in SCHEDULE_AXES {
            if self.model.control_axes.contains(axis) {
                continue;
            }
            for q in 0..s.n_qubits() {
                if (0..s.n_slices()).any(|k| s.get(axis, q, k) != 0.0) {
                    return Err(Error::AxisViolation {
                        axis: axis.as_char(),
                        qubit: q + 1,
                    });
                }
            }
        }
        Ok(())
    }

    fn slice(&self, s: &PulseSchedule, k: usize) -> Result<Slice> {
        let h = self.terms.assemble(|axis, q| s.get(axis, q, k));
        let eig = eig_hermitian(&h)?;
        let unitary = match self.cfg.mode {
            EvolutionMode::ExactPerSlice => eig.exp_i(s.tau()),
            EvolutionMode::TrotterCompat => {
                let kappa = self.cfg.trotter_substeps;
                let step = eig.exp_i(s.tau() / kappa as f64);
                let mut u = step.clone();
                for _ in 1..kappa {
                    u = step.matmul(&u);
                }
                u
            }
        };
        Ok(Slice { eig, unitary })
    }

    fn slices(&self, s: &PulseSchedule) -> Result<Vec<Slice>> {
        self.check(s)?;
        self.cfg
            .policy
            .map_range(s.n_slices(), |k| self.slice(s, k))
            .into_iter()
            .collect()
    }

    pub fn evolve(&self, s: &PulseSchedule) -> Result<ComplexMatrix> {
        let slices = self.slices(s)?;
        let mut u = ComplexMatrix::identity(self.target.rows());
        for sl in &slices {
            u = sl.unitary.matmul(&u);
        }
        Ok(u)
    }

    pub fn error(&self, s: &PulseSchedule) -> Result<f64> {
        self.cfg.metric.distance(&self.target, &self.evolve(s)?)
    }

    pub fn trace(&self, s: &PulseSchedule) -> Result<ErrorTrace> {
        let slices = self.slices(s)?;
        let mut u = ComplexMatrix::identity(self.target.rows());
        let mut times = vec![0.0];
        let mut errors = vec![self.cfg.metric.distance(&self.target, &u)?];
        for (k, sl) in slices.iter().enumerate() {
            u = sl.unitary.matmul(&u);
            times.push(s.tau() * (k + 1) as f64);
            errors.push(self.cfg.metric.distance(&self.target, &u)?);
        }
        Ok(ErrorTrace { times, errors })
    }

    /// `ε` and `∂ε/∂h` laid out like [`PulseSchedule::values`].
    pub fn error_and_gradient(&self, s: &PulseSchedule) -> Result<(f64, Vec<f64>)> {
        let slices = self.slices(s)?;
        let d = self.target.rows();
        let k_total = slices.len();

        // prefixes[k] = U_k ⋯ U_1, prefixes[0] = I
        let mut prefixes = Vec::with_capacity(k_total + 1);
        prefixes.push(ComplexMatrix::identity(d));
        for sl in &slices {
            let next = sl.unitary.matmul(prefixes.last().unwrap());
            prefixes.push(next);
        }
        let u = &prefixes[k_total];
        let err = self.cfg.metric.distance(&self.target, u)?;
        let mut grad = vec![0.0; s.values().len()];
        if err < GRADIENT_FLOOR {
            return Ok((err, grad));
        }

        let target_adj = self.target.adjoint();
        let z = target_adj.trace_of_product(u);
        // dε = −Re(c · dz) / ε
        let c = match self.cfg.metric {
            ErrorMetric::PhaseSensitive => Complex64::new(1.0, 0.0),
            ErrorMetric::PhaseAligned => {
                let norm = z.norm();
                if norm > 0.0 {
                    z.conj() / norm
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }
        };

        // environments M_k = P_{k−1} V† U_K ⋯ U_{k+1}
        let mut envs = vec![ComplexMatrix::identity(1); k_total];
        let mut q = target_adj;
        for k in (0..k_total).rev() {
            envs[k] = prefixes[k].matmul(&q);
            q = q.matmul(&slices[k].unitary);
        }
        drop(prefixes);

        let tau = s.tau();
        let per_slice: Vec<Vec<(usize, f64)>> = self.cfg.policy.map_range(k_total, |k| {
            let w = &slices[k].eig.eigenvectors;
            let w_adj = w.adjoint();
            let rotated = w_adj.matmul(&envs[k]).matmul(w);
            let y = rotated.hadamard(&slices[k].eig.loewner_kernel(tau));
            let a = w.matmul(&y).matmul(&w_adj);
            self.terms
                .generators
                .iter()
                .filter(|(axis, _, _)| SCHEDULE_AXES.contains(axis))
                .map(|(axis, n, g)| {
                    let dz = a.trace_of_product(g);
                    (s.index(*axis, *n, k), -(c * dz).re / err)
                })
                .collect()
        });
        for entries in per_slice {
            for (i, v) in entries {
                grad[i] = v;
            }
        }
        Ok((err, grad))
    }
}

pub fn evolve(model: &SpinChainModel, schedule: &PulseSchedule, cfg: &EvolutionConfig) -> Result<ComplexMatrix> {
    if schedule.n_qubits() != model.n_qubits() {
        return Err(Error::dims(
            format!("{}-qubit schedule", model.n_qubits()),
            format!("{}-qubit schedule", schedule.n_qubits()),
        ));
    }
    let identity = ComplexMatrix::identity(model.dim());
    Evaluator::new(&identity, model, cfg)?.evolve(schedule)
}

pub fn gate_error(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    schedule: &PulseSchedule,
    cfg: &EvolutionConfig,
) -> Result<f64> {
    Evaluator::new(target, model, cfg)?.error(schedule)
}

/// `ε / √(2^N)`, for comparing across widths.
pub fn normalized_gate_error(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    schedule: &PulseSchedule,
    cfg: &EvolutionConfig,
) -> Result<f64> {
    Ok(gate_error(target, model, schedule, cfg)? / (model.dim() as f64).sqrt())
}

pub fn error_trace(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    schedule: &PulseSchedule,
    cfg: &EvolutionConfig,
) -> Result<ErrorTrace> {
    Evaluator::new(target, model, cfg)?.trace(schedule)
}

pub fn error_gradient(
    target: &ComplexMatrix,
    model: &SpinChainModel,
    schedule: &PulseSchedule,
    cfg: &EvolutionConfig,
) -> Result<Vec<f64>> {
    Ok(Evaluator::new(target, model, cfg)?.error_and_gradient(schedule)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_i, testing::random_unitary};
    use crate::spin::Axis;
    use std::f64::consts::PI;

    fn cfg() -> EvolutionConfig {
        EvolutionConfig::default()
    }

    #[test]
    fn zero_schedule_single_qubit_is_identity() {
        let m = SpinChainModel::chain(1);
        let u = evolve(&m, &PulseSchedule::zeros(1, 0.7, 3), &cfg()).unwrap();
        assert!(frobenius_distance(&u, &ComplexMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn zero_field_coupling_phase() {
        let m = SpinChainModel::chain(2);
        let u = evolve(&m, &PulseSchedule::zeros(2, 1.0, 4), &cfg()).unwrap();
        let a = Complex64::from_polar(1.0, -PI / 2.0);
        let b = Complex64::from_polar(1.0, PI / 2.0);
        let expect = ComplexMatrix::from_diag(&[a, b, b, a]);
        assert!(frobenius_distance(&u, &expect).unwrap() < 1e-13);
    }

    #[test]
    fn slice_order_first_slice_acts_first() {
        let m = SpinChainModel::chain(2);
        let s = PulseSchedule::random_init(2, 0.4, 2, 1.0, 5);
        let u = evolve(&m, &s, &cfg()).unwrap();
        let h1 = m.full_hamiltonian(&s.snapshot(0)).unwrap();
        let h2 = m.full_hamiltonian(&s.snapshot(1)).unwrap();
        let oracle = expm_i(&h2, 0.2).unwrap().matmul(&expm_i(&h1, 0.2).unwrap());
        assert!(frobenius_distance(&u, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn gate_error_examples() {
        let m = SpinChainModel::chain(2);
        let s = PulseSchedule::random_init(2, 0.5, 5, 2.0, 9);
        let u = evolve(&m, &s, &cfg()).unwrap();
        assert!(gate_error(&u, &m, &s, &cfg()).unwrap() < 1e-7);
        let strict = EvolutionConfig::with_metric(ErrorMetric::PhaseSensitive);
        assert_eq!(gate_error(&u, &m, &s, &strict).unwrap(), 0.0);

        let one = SpinChainModel::chain(1);
        let x = ComplexMatrix::real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        for c in [cfg(), strict] {
            let e = gate_error(&x, &one, &PulseSchedule::zeros(1, 1.0, 1), &c).unwrap();
            assert!((e - 2.0).abs() < 1e-14);
        }

        let target = random_unitary(4, 77);
        let recomputed = frobenius_distance(&target, &u).unwrap();
        assert!((gate_error(&target, &m, &s, &strict).unwrap() - recomputed).abs() < 1e-14);
    }

    #[test]
    fn dimension_checks() {
        let m = SpinChainModel::chain(2);
        let s = PulseSchedule::zeros(3, 1.0, 1);
        assert!(matches!(evolve(&m, &s, &cfg()), Err(Error::DimensionMismatch { .. })));
        let bad_target = ComplexMatrix::identity(8);
        assert!(matches!(
            gate_error(&bad_target, &m, &PulseSchedule::zeros(2, 1.0, 1), &cfg()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn disallowed_schedule_axis_is_rejected() {
        let mut m = SpinChainModel::chain(1);
        m.control_axes = crate::spin::AxisSet::from_axes(&[Axis::X]);
        let mut s = PulseSchedule::zeros(1, 1.0, 2);
        s.set(Axis::Y, 0, 1, 0.3);
        assert!(matches!(
            evolve(&m, &s, &cfg()),
            Err(Error::AxisViolation { axis: 'y', qubit: 1 })
        ));
    }

    #[test]
    fn trace_examples() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 3);
        let s = PulseSchedule::random_init(2, 0.3, 1, 1.0, 2);
        let t = error_trace(&target, &m, &s, &cfg()).unwrap();
        assert_eq!(t.errors.len(), 2);
        assert_eq!(t.errors[1], gate_error(&target, &m, &s, &cfg()).unwrap());

        let one = SpinChainModel::chain(1);
        let t = error_trace(
            &ComplexMatrix::identity(2),
            &one,
            &PulseSchedule::zeros(1, 1.0, 6),
            &cfg(),
        )
        .unwrap();
        assert!(t.errors.iter().all(|&e| e < 1e-7));
        assert_eq!(t.times.len(), 7);
    }

    #[test]
    fn trace_matches_prefix_products() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 8);
        let s = PulseSchedule::random_init(2, 0.6, 6, 2.0, 4);
        let strict = EvolutionConfig::with_metric(ErrorMetric::PhaseSensitive);
        let t = error_trace(&target, &m, &s, &strict).unwrap();
        let mut u = ComplexMatrix::identity(4);
        assert_eq!(t.errors[0], frobenius_distance(&target, &u).unwrap());
        for k in 0..6 {
            let h = m.full_hamiltonian(&s.snapshot(k)).unwrap();
            u = expm_i(&h, s.tau()).unwrap().matmul(&u);
            let brute = frobenius_distance(&target, &u).unwrap();
            assert!((t.errors[k + 1] - brute).abs() < 1e-12);
            assert!((t.times[k + 1] - 0.1 * (k + 1) as f64).abs() < 1e-12);
        }
        assert_eq!(*t.errors.last().unwrap(), gate_error(&target, &m, &s, &strict).unwrap());
    }

    #[test]
    fn trotter_compat_agrees_with_exact() {
        let m = SpinChainModel::chain(3);
        let s = PulseSchedule::random_init(3, 0.5, 5, 3.0, 12);
        let exact = evolve(&m, &s, &cfg()).unwrap();
        for kappa in [1, 2, 7] {
            let c = EvolutionConfig {
                mode: EvolutionMode::TrotterCompat,
                trotter_substeps: kappa,
                ..cfg()
            };
            let u = evolve(&m, &s, &c).unwrap();
            assert!(frobenius_distance(&u, &exact).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn refinement_preserves_evolution() {
        let m = SpinChainModel::chain(3);
        let s = PulseSchedule::random_init(3, 0.8, 8, 4.0, 1);
        let a = evolve(&m, &s, &cfg()).unwrap();
        let b = evolve(&m, &s.refine_double(), &cfg()).unwrap();
        assert!(frobenius_distance(&a, &b).unwrap() <= 1e-12);
    }

    #[test]
    fn concatenation_composes() {
        let m = SpinChainModel::chain(2);
        let a = PulseSchedule::random_init(2, 0.3, 3, 2.0, 1);
        let b = PulseSchedule::random_init(2, 0.5, 5, 2.0, 2);
        let ab = evolve(&m, &a.concat(&b).unwrap(), &cfg()).unwrap();
        let prod = evolve(&m, &b, &cfg()).unwrap().matmul(&evolve(&m, &a, &cfg()).unwrap());
        assert!(frobenius_distance(&ab, &prod).unwrap() <= 1e-10);
    }

    #[test]
    fn parallel_slices_match_sequential() {
        let m = SpinChainModel::chain(3);
        let s = PulseSchedule::random_init(3, 1.0, 40, 3.0, 6);
        let target = random_unitary(8, 6);
        let seq = Evaluator::new(&target, &m, &cfg()).unwrap();
        let par_cfg = EvolutionConfig {
            policy: ExecPolicy::Parallel,
            ..cfg()
        };
        let par = Evaluator::new(&target, &m, &par_cfg).unwrap();
        let (e1, g1) = seq.error_and_gradient(&s).unwrap();
        let (e2, g2) = par.error_and_gradient(&s).unwrap();
        assert_eq!(e1.to_bits(), e2.to_bits());
        assert_eq!(g1, g2);
    }

    #[test]
    fn gradient_vanishes_at_exact_match() {
        let m = SpinChainModel::chain(2);
        let s = PulseSchedule::random_init(2, 0.4, 4, 1.0, 3);
        let u = evolve(&m, &s, &cfg()).unwrap();
        let strict = EvolutionConfig::with_metric(ErrorMetric::PhaseSensitive);
        let g = error_gradient(&u, &m, &s, &strict).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    fn finite_difference(eval: &Evaluator, s: &PulseSchedule, i: usize, h: f64) -> f64 {
        let mut p = s.clone();
        p.values_mut()[i] += h;
        let mut m = s.clone();
        m.values_mut()[i] -= h;
        (eval.error(&p).unwrap() - eval.error(&m).unwrap()) / (2.0 * h)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for metric in [ErrorMetric::PhaseAligned, ErrorMetric::PhaseSensitive] {
            for seed in 0..4u64 {
                let m = SpinChainModel::chain(2);
                let target = random_unitary(4, 100 + seed);
                let s = PulseSchedule::random_init(2, 0.6, 4, 2.0, seed);
                let eval = Evaluator::new(&target, &m, &EvolutionConfig::with_metric(metric)).unwrap();
                let (_, g) = eval.error_and_gradient(&s).unwrap();
                for (i, &gi) in g.iter().enumerate() {
                    let fd = finite_difference(&eval, &s, i, 1e-5);
                    let tol = 1e-6 * fd.abs().max(gi.abs()) + 1e-9;
                    assert!(
                        (fd - gi).abs() <= tol,
                        "metric {metric:?} seed {seed} entry {i}: {gi} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_respects_main_text_sign_and_heisenberg() {
        let mut m = SpinChainModel::heisenberg_chain(3);
        m.field_sign = crate::spin::FieldSign::MainText;
        let target = random_unitary(8, 4);
        let s = PulseSchedule::random_init(3, 0.5, 3, 1.0, 8);
        let eval = Evaluator::new(&target, &m, &cfg()).unwrap();
        let (_, g) = eval.error_and_gradient(&s).unwrap();
        for i in [0, 4, 9, 17] {
            let fd = finite_difference(&eval, &s, i, 1e-5);
            assert!((fd - g[i]).abs() <= 1e-6 * fd.abs().max(1e-3), "{i}: {} vs {fd}", g[i]);
        }
    }

    #[test]
    fn gradient_chain_rule_under_refinement() {
        let m = SpinChainModel::chain(2);
        let target = random_unitary(4, 55);
        let s = PulseSchedule::random_init(2, 0.5, 3, 2.0, 10);
        let r = s.refine_double();
        let eval = Evaluator::new(&target, &m, &cfg()).unwrap();
        let gp = eval.error_and_gradient(&s).unwrap().1;
        let gc = eval.error_and_gradient(&r).unwrap().1;
        for axis in SCHEDULE_AXES {
            for q in 0..2 {
                for k in 0..3 {
                    let parent = gp[s.index(axis, q, k)];
                    let kids = gc[r.index(axis, q, 2 * k)] + gc[r.index(axis, q, 2 * k + 1)];
                    assert!((parent - kids).abs() <= 1e-10 * parent.abs().max(1.0));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn evolution_is_unitary(seed in any::<u64>(), n in 1usize..4, k in 1usize..12, amp in 0.0f64..20.0) {
                let m = SpinChainModel::chain(n);
                let s = PulseSchedule::random_init(n, 1.3, k, amp, seed);
                let u = evolve(&m, &s, &cfg()).unwrap();
                prop_assert!(u.unitarity_defect() <= 1e-9);
            }
        }
    }
}
