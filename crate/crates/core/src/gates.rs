// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact target gates and their embedding into `N`-qubit registers.
//!
//! Qubit positions are one-based and qubit 1 is the most significant bit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_i, ComplexMatrix, ONE, ZERO};
use crate::spin::{spin_half, Axis, BasisConvention};

/// Unitarity tolerance enforced by [`Gate::new`].
pub const GATE_UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub label: String,
    pub n_qubits: usize,
    pub matrix: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix, params: Vec<f64>) -> Result<Self> {
        let d = matrix.rows();
        if !matrix.is_square() || !d.is_power_of_two() || d < 2 {
            return Err(Error::dims("2^N x 2^N matrix", matrix.dim_string()));
        }
        let deviation = matrix.unitarity_defect();
        if deviation > GATE_UNITARITY_TOL {
            return Err(Error::NonUnitaryTarget { deviation });
        }
        Ok(Self {
            label: label.into(),
            n_qubits: d.trailing_zeros() as usize,
            matrix,
            params,
        })
    }

    fn exact(label: impl Into<String>, matrix: ComplexMatrix, params: Vec<f64>) -> Self {
        Self::new(label, matrix, params).expect("built-in gate is unitary")
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `self` applied first, then `later`.
    pub fn then(&self, later: &Gate, label: impl Into<String>) -> Result<Gate> {
        Gate::new(label, later.matrix.try_matmul(&self.matrix)?, Vec::new())
    }
}

/// `exp(−iθ S^α)` with `S = σ/2`.
pub fn rotation(axis: Axis, theta: f64) -> Gate {
    let s = spin_half(axis, BasisConvention::SpinUpIsZero);
    let m = expm_i(&s, theta).expect("spin operator is Hermitian");
    Gate::exact(format!("R{axis}"), m, vec![theta])
}

/// `diag(1, e^{iα})`.
pub fn phase(alpha: f64) -> Gate {
    Gate::exact(
        "P",
        ComplexMatrix::from_diag(&[ONE, Complex64::from_polar(1.0, alpha)]),
        vec![alpha],
    )
}

/// `diag(1, 1, 1, e^{iθ})`.
pub fn controlled_phase(theta: f64) -> Gate {
    let mut d = [ONE; 4];
    d[3] = Complex64::from_polar(1.0, theta);
    Gate::exact("CP", ComplexMatrix::from_diag(&d), vec![theta])
}

pub fn identity(n_qubits: usize) -> Gate {
    Gate::exact("I", ComplexMatrix::identity(1 << n_qubits), Vec::new())
}

pub fn hadamard() -> Gate {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Gate::exact("H", ComplexMatrix::real(&[&[s, s], &[s, -s]]), Vec::new())
}

pub fn pauli_x() -> Gate {
    Gate::exact("X", ComplexMatrix::real(&[&[0.0, 1.0], &[1.0, 0.0]]), Vec::new())
}

/// Control on the first (more significant) qubit.
pub fn cnot() -> Gate {
    Gate::exact(
        "CNOT",
        ComplexMatrix::real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]),
        Vec::new(),
    )
}

pub fn swap2() -> Gate {
    Gate::exact(
        "SWAP",
        ComplexMatrix::real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]),
        Vec::new(),
    )
}

/// `F_{jk} = e^{2πi jk / 2^N} / √(2^N)`.
pub fn qft_matrix(n_qubits: usize) -> Gate {
    assert!(n_qubits >= 1, "QFT needs at least one qubit");
    let d = 1usize << n_qubits;
    let norm = 1.0 / (d as f64).sqrt();
    let m = ComplexMatrix::from_fn(d, d, |j, k| {
        // reduce the exponent first so large indices keep full precision
        let e = (j * k) % d;
        Complex64::from_polar(norm, 2.0 * PI * e as f64 / d as f64)
    });
    Gate::exact(format!("QFT{n_qubits}"), m, Vec::new())
}

/// Adjacent swaps `(1,2), (2,3), …, (N−1,N)` in that order: qubit 1 ends on wire N.
pub fn swap_to_end_circuit(n_qubits: usize) -> Gate {
    assert!(n_qubits >= 2, "swap chain needs two qubits");
    let mut u = ComplexMatrix::identity(1 << n_qubits);
    for q in 1..n_qubits {
        apply_placed(&mut u, &swap2().matrix, &[q, q + 1], n_qubits).expect("valid chain placement");
    }
    Gate::exact(format!("SWAPCHAIN{n_qubits}"), u, Vec::new())
}

fn check_positions(k: usize, positions: &[usize], n_total: usize) -> Result<()> {
    if positions.len() != k {
        return Err(Error::BadPlacement(format!(
            "{k}-qubit gate given {} positions",
            positions.len()
        )));
    }
    for (i, &p) in positions.iter().enumerate() {
        if p == 0 || p > n_total {
            return Err(Error::BadPlacement(format!("position {p} outside 1..={n_total}")));
        }
        if positions[..i].contains(&p) {
            return Err(Error::BadPlacement(format!("position {p} repeated")));
        }
    }
    Ok(())
}

/// `u ← place(gate, positions) · u` without forming the embedded matrix.
pub fn apply_placed(u: &mut ComplexMatrix, gate: &ComplexMatrix, positions: &[usize], n_total: usize) -> Result<()> {
    let k = positions.len();
    if !gate.is_square() || gate.rows() != 1 << k {
        return Err(Error::BadPlacement(format!(
            "{} matrix given {k} positions",
            gate.dim_string()
        )));
    }
    check_positions(k, positions, n_total)?;
    let d = 1usize << n_total;
    if u.rows() != d {
        return Err(Error::dims(format!("{d} rows"), u.rows()));
    }
    let shifts: Vec<usize> = positions.iter().map(|&p| n_total - p).collect();
    let mask: usize = shifts.iter().map(|s| 1 << s).sum();
    let sub = 1usize << k;
    let offsets: Vec<usize> = (0..sub)
        .map(|s| {
            shifts
                .iter()
                .enumerate()
                .filter(|(i, _)| (s >> (k - 1 - i)) & 1 == 1)
                .map(|(_, sh)| 1 << sh)
                .sum()
        })
        .collect();
    let cols = u.cols();
    let g = gate.as_slice();
    let data = u.as_mut_slice();
    let mut rows = vec![0usize; sub];
    let mut buf = vec![ZERO; sub];
    for base in (0..d).filter(|i| i & mask == 0) {
        for (r, off) in rows.iter_mut().zip(&offsets) {
            *r = base | off;
        }
        for c in 0..cols {
            for (b, &r) in buf.iter_mut().zip(&rows) {
                *b = data[r * cols + c];
            }
            for (a, &r) in rows.iter().enumerate() {
                let grow = &g[a * sub..(a + 1) * sub];
                data[r * cols + c] = grow.iter().zip(&buf).map(|(x, y)| x * y).sum();
            }
        }
    }
    Ok(())
}

/// Embeds `gate` on `positions` of an `n_total`-qubit register.
pub fn place(gate: &Gate, positions: &[usize], n_total: usize) -> Result<ComplexMatrix> {
    check_positions(gate.n_qubits, positions, n_total)?;
    let mut u = ComplexMatrix::identity(1 << n_total);
    apply_placed(&mut u, &gate.matrix, positions, n_total)?;
    Ok(u)
}

/// Ordered product of placed gates; the first entry acts first.
pub fn compose(ops: &[(&ComplexMatrix, &[usize])], n_total: usize) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(1 << n_total);
    for (g, pos) in ops {
        apply_placed(&mut u, g, pos, n_total)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::random_unitary;
    use crate::linalg::{frobenius_distance, kron, I};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        frobenius_distance(a, b).unwrap() <= tol
    }

    fn basis_index(bits: &[usize]) -> usize {
        bits.iter().fold(0, |acc, b| (acc << 1) | b)
    }

    #[test]
    fn rotation_examples() {
        assert!(close(
            &rotation(Axis::Z, 0.0).matrix,
            &ComplexMatrix::identity(2),
            1e-15
        ));
        let t = 0.83;
        let expect = ComplexMatrix::from_diag(&[
            Complex64::from_polar(1.0, -t / 2.0),
            Complex64::from_polar(1.0, t / 2.0),
        ]);
        assert!(close(&rotation(Axis::Z, t).matrix, &expect, 1e-14));
        let minus_i_x = pauli_x().matrix.scale(-I);
        assert!(close(&rotation(Axis::X, PI).matrix, &minus_i_x, 1e-14));
    }

    #[test]
    fn controlled_phase_examples() {
        assert!(close(&controlled_phase(0.0).matrix, &ComplexMatrix::identity(4), 0.0));
        let expect = ComplexMatrix::from_diag(&[ONE, ONE, ONE, I]);
        assert!(close(&controlled_phase(PI / 2.0).matrix, &expect, 1e-15));
        for p in 1..=8 {
            let g = controlled_phase(PI / f64::from(1u32 << p));
            assert!((g.matrix[(3, 3)].arg() - PI / f64::from(1u32 << p)).abs() < 1e-15);
        }
        let a = controlled_phase(0.4).matrix.matmul(&controlled_phase(1.1).matrix);
        assert!(close(&a, &controlled_phase(1.5).matrix, 1e-12));
    }

    #[test]
    fn standard_gates_square_to_identity() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = ComplexMatrix::identity(4);
        assert!(close(&hadamard().matrix.matmul(&hadamard().matrix), &i2, 1e-15));
        assert!(close(&cnot().matrix.matmul(&cnot().matrix), &i4, 0.0));
        assert!(close(&swap2().matrix.matmul(&swap2().matrix), &i4, 0.0));
    }

    #[test]
    fn swap_exchanges_tensor_factors() {
        let a = random_unitary(2, 1);
        let b = random_unitary(2, 2);
        let s = swap2().matrix;
        let lhs = s.matmul(&kron(&a, &b)).matmul(&s);
        assert!(close(&lhs, &kron(&b, &a), 1e-14));
    }

    #[test]
    fn place_examples() {
        let id = identity(1);
        for k in 1..=3 {
            assert!(close(&place(&id, &[k], 3).unwrap(), &ComplexMatrix::identity(8), 0.0));
        }
        assert!(close(&place(&swap2(), &[1, 2], 2).unwrap(), &swap2().matrix, 0.0));
        assert!(close(&place(&cnot(), &[1, 2], 2).unwrap(), &cnot().matrix, 0.0));
    }

    #[test]
    fn placed_cnot_on_basis_states() {
        let m = place(&cnot(), &[2, 3], 3).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let col = basis_index(&[a, b, c]);
                    let row = basis_index(&[a, b, c ^ b]);
                    for r in 0..8 {
                        let expect = if r == row { ONE } else { ZERO };
                        assert_eq!(m[(r, col)], expect);
                    }
                }
            }
        }
        // reversed positions put the control on qubit 3
        let m = place(&cnot(), &[3, 1], 3).unwrap();
        for col in 0..8 {
            let bits = [(col >> 2) & 1, (col >> 1) & 1, col & 1];
            let row = basis_index(&[bits[0] ^ bits[2], bits[1], bits[2]]);
            assert_eq!(m[(row, col)], ONE);
        }
    }

    #[test]
    fn placement_errors() {
        assert!(matches!(place(&cnot(), &[1, 1], 3), Err(Error::BadPlacement(_))));
        assert!(matches!(place(&cnot(), &[0, 1], 3), Err(Error::BadPlacement(_))));
        assert!(matches!(place(&cnot(), &[2, 4], 3), Err(Error::BadPlacement(_))));
        assert!(matches!(place(&cnot(), &[2], 3), Err(Error::BadPlacement(_))));
    }

    #[test]
    fn placement_respects_composition() {
        let g1 = Gate::new("A", random_unitary(4, 3), vec![]).unwrap();
        let g2 = Gate::new("B", random_unitary(4, 4), vec![]).unwrap();
        let g12 = Gate::new("AB", g1.matrix.matmul(&g2.matrix), vec![]).unwrap();
        let pos = [3, 1];
        let lhs = place(&g12, &pos, 4).unwrap();
        let rhs = place(&g1, &pos, 4).unwrap().matmul(&place(&g2, &pos, 4).unwrap());
        assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn placement_matches_kron_oracle() {
        let g = random_unitary(2, 9);
        let gate = Gate::new("G", g.clone(), vec![]).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let oracle = kron(&kron(&i2, &g), &i2);
        assert!(close(&place(&gate, &[2], 3).unwrap(), &oracle, 1e-15));
    }

    #[test]
    fn qft_examples() {
        assert!(close(&qft_matrix(1).matrix, &hadamard().matrix, 1e-15));
        let q2 = qft_matrix(2).matrix;
        let w = [ONE, I, -ONE, -I];
        for j in 0..4 {
            for k in 0..4 {
                assert!((q2[(j, k)] - w[(j * k) % 4] * 0.5).norm() < 1e-15);
            }
        }
        for n in 1..=9 {
            assert!(qft_matrix(n).matrix.unitarity_defect() <= 1e-12);
        }
    }

    #[test]
    fn swap_chain_examples() {
        assert!(close(&swap_to_end_circuit(2).matrix, &swap2().matrix, 0.0));
        let s2 = &swap_to_end_circuit(2).matrix;
        assert!(close(&s2.matmul(s2), &ComplexMatrix::identity(4), 0.0));
        let m = swap_to_end_circuit(3).matrix;
        for col in 0..8 {
            let (a, b, c) = ((col >> 2) & 1, (col >> 1) & 1, col & 1);
            assert_eq!(m[(basis_index(&[b, c, a]), col)], ONE);
        }
    }

    #[test]
    fn gate_new_validates() {
        assert!(matches!(
            Gate::new("bad", ComplexMatrix::zeros(2, 2), vec![]),
            Err(Error::NonUnitaryTarget { .. })
        ));
        assert!(Gate::new("bad", ComplexMatrix::identity(3), vec![]).is_err());
        assert_eq!(Gate::new("ok", ComplexMatrix::identity(8), vec![]).unwrap().n_qubits, 3);
    }

    #[test]
    fn every_constructor_is_unitary() {
        let gates = [
            rotation(Axis::X, 0.3),
            rotation(Axis::Y, -2.0),
            phase(1.2),
            controlled_phase(0.7),
            hadamard(),
            pauli_x(),
            cnot(),
            swap2(),
            swap_to_end_circuit(4),
        ];
        for g in gates {
            assert!(g.matrix.unitarity_defect() <= 1e-12, "{}", g.label);
        }
    }
}
