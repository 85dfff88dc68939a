// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Controllable spin-chain Hamiltonians.
//!
//! `H = Σ_{n<n'} J_{nn'} S^z_n S^z_{n'} ± 2π Σ_n (h^x_n S^x_n + h^y_n S^y_n + h^z_n S^z_n)`
//! with spin-½ operators `S = σ/2`. Qubit indices are zero-based here and
//! qubit 0 is the most significant bit of a basis index.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    #[default]
    IsingZz,
    HeisenbergXyz,
}

/// Relative sign of the field terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSign {
    /// Field terms added to the coupling term.
    #[default]
    Supplement,
    /// Field terms subtracted from the coupling term.
    MainText,
}

impl FieldSign {
    pub fn factor(self) -> f64 {
        match self {
            FieldSign::Supplement => 1.0,
            FieldSign::MainText => -1.0,
        }
    }
}

/// Which spin state the computational basis state `|0⟩` stands for.
///
/// The stored pulse tables only reproduce their gates when `|0⟩` is the
/// spin-down state, so that is the default. In that basis `S^z = diag(−½, ½)`
/// and `S^y` changes sign relative to the Pauli form; `S^x` is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisConvention {
    #[default]
    SpinDownIsZero,
    SpinUpIsZero,
}

/// Set of axes along which fields may be applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSet {
    pub x: bool,
    pub y: bool,
    pub z: bool,
}

impl AxisSet {
    pub const XY: AxisSet = AxisSet {
        x: true,
        y: true,
        z: false,
    };

    pub fn contains(&self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn from_axes(axes: &[Axis]) -> Self {
        let mut s = AxisSet {
            x: false,
            y: false,
            z: false,
        };
        for a in axes {
            match a {
                Axis::X => s.x = true,
                Axis::Y => s.y = true,
                Axis::Z => s.z = true,
            }
        }
        s
    }
}

impl Default for AxisSet {
    fn default() -> Self {
        AxisSet::XY
    }
}

/// Single-spin operator `S^α = σ^α / 2` in the chosen basis.
pub fn spin_half(axis: Axis, basis: BasisConvention) -> ComplexMatrix {
    let h = Complex64::new(0.5, 0.0);
    let flip = basis == BasisConvention::SpinDownIsZero;
    match axis {
        Axis::X => ComplexMatrix::from_rows(&[&[ZERO, h], &[h, ZERO]]),
        Axis::Y => {
            let s = if flip { -0.5 } else { 0.5 };
            ComplexMatrix::from_rows(&[&[ZERO, -I * s], &[I * s, ZERO]])
        }
        Axis::Z => {
            let s = if flip { -0.5 } else { 0.5 };
            ComplexMatrix::from_diag(&[Complex64::new(s, 0.0), Complex64::new(-s, 0.0)])
        }
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on zero-based qubit `n` of `n_qubits`.
pub fn embed(op: &ComplexMatrix, n: usize, n_qubits: usize) -> ComplexMatrix {
    let left = 1usize << n;
    let right = 1usize << (n_qubits - n - 1);
    let mut m = op.clone();
    if left > 1 {
        m = kron(&ComplexMatrix::identity(left), &m);
    }
    if right > 1 {
        m = kron(&m, &ComplexMatrix::identity(right));
    }
    m
}

/// Field values applied during one time slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    pub hz: Vec<f64>,
}

impl FieldSnapshot {
    pub fn zeros(n: usize) -> Self {
        Self {
            hx: vec![0.0; n],
            hy: vec![0.0; n],
            hz: vec![0.0; n],
        }
    }

    pub fn axis(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.hx,
            Axis::Y => &self.hy,
            Axis::Z => &self.hz,
        }
    }

    pub fn axis_mut(&mut self, axis: Axis) -> &mut Vec<f64> {
        match axis {
            Axis::X => &mut self.hx,
            Axis::Y => &mut self.hy,
            Axis::Z => &mut self.hz,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &[f64]| v.iter().map(|x| x * s).collect();
        Self {
            hx: f(&self.hx),
            hy: f(&self.hy),
            hz: f(&self.hz),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainModel {
    n_qubits: usize,
    /// Row-major `N × N`, symmetric with zero diagonal.
    couplings: Vec<f64>,
    pub interaction: Interaction,
    pub control_axes: AxisSet,
    pub field_sign: FieldSign,
    pub basis: BasisConvention,
}

impl SpinChainModel {
    /// Nearest-neighbour chain with `J_{n,n+1} = 2π`.
    pub fn chain(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "a chain needs at least one qubit");
        let mut couplings = vec![0.0; n_qubits * n_qubits];
        for n in 0..n_qubits.saturating_sub(1) {
            couplings[n * n_qubits + n + 1] = 2.0 * PI;
            couplings[(n + 1) * n_qubits + n] = 2.0 * PI;
        }
        Self {
            n_qubits,
            couplings,
            interaction: Interaction::IsingZz,
            control_axes: AxisSet::XY,
            field_sign: FieldSign::Supplement,
            basis: BasisConvention::SpinDownIsZero,
        }
    }

    pub fn heisenberg_chain(n_qubits: usize) -> Self {
        Self {
            interaction: Interaction::HeisenbergXyz,
            ..Self::chain(n_qubits)
        }
    }

    /// Model with an explicit coupling matrix.
    pub fn with_couplings(couplings: &[Vec<f64>], interaction: Interaction) -> Result<Self> {
        let n = couplings.len();
        if n == 0 {
            return Err(Error::InvalidConfig("coupling matrix is empty".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (r, row) in couplings.iter().enumerate() {
            if row.len() != n {
                return Err(Error::dims(format!("{n} couplings in row {}", r + 1), row.len()));
            }
            flat.extend_from_slice(row);
        }
        for r in 0..n {
            if flat[r * n + r] != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "self-coupling J[{0}][{0}] must be zero",
                    r + 1
                )));
            }
            for c in 0..r {
                if (flat[r * n + c] - flat[c * n + r]).abs() > 1e-12 {
                    return Err(Error::InvalidConfig("coupling matrix must be symmetric".into()));
                }
            }
        }
        Ok(Self {
            couplings: flat,
            interaction,
            ..Self::chain(n)
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Nearest-neighbour `2π` chain of width `n` with this model's
    /// interaction, axes, sign convention and basis.
    pub fn chain_like(&self, n: usize) -> Self {
        Self {
            interaction: self.interaction,
            control_axes: self.control_axes,
            field_sign: self.field_sign,
            basis: self.basis,
            ..Self::chain(n)
        }
    }

    /// The same model on the first `k` qubits.
    pub fn restrict(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n_qubits {
            return Err(Error::OutOfRange {
                what: "restricted width",
                value: format!("{k} of {}", self.n_qubits),
            });
        }
        let mut couplings = Vec::with_capacity(k * k);
        for r in 0..k {
            couplings.extend_from_slice(&self.couplings[r * self.n_qubits..r * self.n_qubits + k]);
        }
        Ok(Self {
            n_qubits: k,
            couplings,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.couplings[a * self.n_qubits + b]
    }

    /// Embedded spin operator `S^α_n`.
    pub fn spin_operator(&self, axis: Axis, n: usize) -> ComplexMatrix {
        embed(&spin_half(axis, self.basis), n, self.n_qubits)
    }

    /// `∂H/∂h^α_n = ±2π S^α_n`.
    pub fn field_generator(&self, axis: Axis, n: usize) -> ComplexMatrix {
        self.spin_operator(axis, n)
            .scale_real(2.0 * PI * self.field_sign.factor())
    }

    pub fn coupling_hamiltonian(&self) -> ComplexMatrix {
        let n = self.n_qubits;
        let d = self.dim();
        let mut h = ComplexMatrix::zeros(d, d);
        let axes: &[Axis] = match self.interaction {
            Interaction::IsingZz => &[Axis::Z],
            Interaction::HeisenbergXyz => &Axis::ALL,
        };
        for a in 0..n {
            for b in (a + 1)..n {
                let j = self.coupling(a, b);
                if j == 0.0 {
                    continue;
                }
                for &axis in axes {
                    let term = self.spin_operator(axis, a).matmul(&self.spin_operator(axis, b));
                    h.add_scaled(&term, Complex64::new(j, 0.0));
                }
            }
        }
        h
    }

    /// Checks a snapshot against the qubit count and the controllable axes.
    pub fn validate_fields(&self, fields: &FieldSnapshot) -> Result<()> {
        for axis in Axis::ALL {
            let v = fields.axis(axis);
            if v.len() != self.n_qubits {
                return Err(Error::dims(format!("{} {axis}-field values", self.n_qubits), v.len()));
            }
            if !self.control_axes.contains(axis) {
                if let Some(q) = v.iter().position(|&h| h != 0.0) {
                    return Err(Error::AxisViolation {
                        axis: axis.as_char(),
                        qubit: q + 1,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn full_hamiltonian(&self, fields: &FieldSnapshot) -> Result<ComplexMatrix> {
        self.validate_fields(fields)?;
        let mut h = self.coupling_hamiltonian();
        for axis in Axis::ALL {
            for (n, &v) in fields.axis(axis).iter().enumerate() {
                if v != 0.0 {
                    h.add_scaled(&self.field_generator(axis, n), Complex64::new(v, 0.0));
                }
            }
        }
        Ok(h)
    }

    /// Drift plus per-axis generators, precomputed for repeated slices.
    pub fn terms(&self) -> HamiltonianTerms {
        let mut generators = Vec::new();
        for axis in Axis::ALL {
            if self.control_axes.contains(axis) {
                for n in 0..self.n_qubits {
                    generators.push((axis, n, self.field_generator(axis, n)));
                }
            }
        }
        HamiltonianTerms {
            drift: self.coupling_hamiltonian(),
            generators,
        }
    }
}

/// `H(h) = drift + Σ h^α_n G^α_n`.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub drift: ComplexMatrix,
    pub generators: Vec<(Axis, usize, ComplexMatrix)>,
}

impl HamiltonianTerms {
    pub fn generator(&self, axis: Axis, n: usize) -> Option<&ComplexMatrix> {
        self.generators
            .iter()
            .find(|(a, q, _)| *a == axis && *q == n)
            .map(|(_, _, g)| g)
    }

    /// Hamiltonian for `field(axis, n)` values; axes without a generator are ignored.
    pub fn assemble(&self, field: impl Fn(Axis, usize) -> f64) -> ComplexMatrix {
        let mut h = self.drift.clone();
        for (axis, n, g) in &self.generators {
            let v = field(*axis, *n);
            if v != 0.0 {
                h.add_scaled(g, Complex64::new(v, 0.0));
            }
        }
        h
    }
}

/// Isotropic Heisenberg exchange on two spins, `S·S`, used by swap sanity checks.
pub fn exchange_operator(basis: BasisConvention) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    for axis in Axis::ALL {
        let s = spin_half(axis, basis);
        h.add_scaled(&kron(&s, &s), ONE);
    }
    h
}
