//! Heisenberg-picture quadrature maps of the X, Z, Fourier and C_Z gates,
//! plus the grid-level C_Z action. Single-mode grid actions (`x_gate`,
//! `z_gate`, `fourier_gate`) live on [`GridWavefunction`].
//!
//! Quadrature maps carry no global phase; only the grid representation does.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridWavefunction2D;

/// Affine symplectic map on quadrature vectors ordered `(q₁, p₁, q₂, p₂, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMap {
    modes: usize,
    /// row-major (2m)×(2m)
    matrix: Vec<f64>,
    shift: Vec<f64>,
}

impl QuadratureMap {
    pub fn identity(modes: usize) -> Self {
        let d = 2 * modes;
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            matrix[i * d + i] = 1.0;
        }
        Self {
            modes,
            matrix,
            shift: vec![0.0; d],
        }
    }

    fn from_parts(modes: usize, matrix: Vec<f64>, shift: Vec<f64>) -> Self {
        Self {
            modes,
            matrix,
            shift,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn apply(&self, point: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if point.len() != d {
            return Err(Error::Usage(format!(
                "quadrature point has dimension {}, map expects {d}",
                point.len()
            )));
        }
        let mut out = self.shift.clone();
        for i in 0..d {
            for (j, x) in point.iter().enumerate() {
                out[i] += self.matrix[i * d + j] * x;
            }
        }
        Ok(out)
    }

    /// Composition `next ∘ self` (apply `self` first).
    pub fn then(&self, next: &QuadratureMap) -> Result<QuadratureMap> {
        if self.modes != next.modes {
            return Err(Error::Usage("cannot compose maps on different mode counts".into()));
        }
        let d = self.dim();
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += next.matrix[i * d + k] * self.matrix[k * d + j];
                }
                matrix[i * d + j] = acc;
            }
        }
        let mut shift = next.shift.clone();
        for i in 0..d {
            for k in 0..d {
                shift[i] += next.matrix[i * d + k] * self.shift[k];
            }
        }
        Ok(QuadratureMap::from_parts(self.modes, matrix, shift))
    }

    pub fn inverse(&self) -> QuadratureMap {
        let d = self.dim();
        // Gauss-Jordan on the (small) symplectic matrix
        let mut a = self.matrix.clone();
        let mut inv = QuadratureMap::identity(self.modes).matrix;
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
                .expect("non-empty column");
            if pivot != col {
                for j in 0..d {
                    a.swap(col * d + j, pivot * d + j);
                    inv.swap(col * d + j, pivot * d + j);
                }
            }
            let diag = a[col * d + col];
            for j in 0..d {
                a[col * d + j] /= diag;
                inv[col * d + j] /= diag;
            }
            for i in 0..d {
                if i != col {
                    let factor = a[i * d + col];
                    for j in 0..d {
                        a[i * d + j] -= factor * a[col * d + j];
                        inv[i * d + j] -= factor * inv[col * d + j];
                    }
                }
            }
        }
        let mut shift = vec![0.0; d];
        for i in 0..d {
            for k in 0..d {
                shift[i] -= inv[i * d + k] * self.shift[k];
            }
        }
        QuadratureMap::from_parts(self.modes, inv, shift)
    }

    /// Checks `Mᵀ J M = J` with the per-mode symplectic form.
    pub fn is_symplectic(&self, tol: f64) -> bool {
        let d = self.dim();
        let j_form = |i: usize, j: usize| -> f64 {
            if i / 2 == j / 2 {
                if i % 2 == 0 && j % 2 == 1 {
                    1.0
                } else if i % 2 == 1 && j % 2 == 0 {
                    -1.0
                } else {
                    0.0
                }
            } else {
                0.0
            }
        };
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    for l in 0..d {
                        acc += self.matrix[k * d + i] * j_form(k, l) * self.matrix[l * d + j];
                    }
                }
                if (acc - j_form(i, j)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// `X(r)`: `q ↦ q + r`, `p ↦ p`.
pub fn x_gate_map(r: f64) -> QuadratureMap {
    let mut m = QuadratureMap::identity(1);
    m.shift[0] = r;
    m
}

/// `Z(s)`: `p ↦ p + s`, `q ↦ q`.
pub fn z_gate_map(s: f64) -> QuadratureMap {
    let mut m = QuadratureMap::identity(1);
    m.shift[1] = s;
    m
}

/// Fourier gate: `q ↦ −p`, `p ↦ q`.
pub fn fourier_map() -> QuadratureMap {
    QuadratureMap::from_parts(1, vec![0.0, -1.0, 1.0, 0.0], vec![0.0, 0.0])
}

/// `C_Z`: leaves positions alone, `p_c ↦ p_c + q_t`, `p_t ↦ p_t + q_c`.
pub fn cz_map() -> QuadratureMap {
    #[rustfmt::skip]
    let matrix = vec![
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 1.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        1.0, 0.0, 0.0, 1.0,
    ];
    QuadratureMap::from_parts(2, matrix, vec![0.0; 4])
}

/// Grid action of `C_Z = e^{i q₁ q₂ / 2}` on a two-mode position-basis state.
pub fn cz_apply(state: &GridWavefunction2D) -> Result<GridWavefunction2D> {
    let mut out = state.clone();
    let n2 = out.n2();
    let points2: Vec<f64> = (0..n2).map(|i| out.point2(i)).collect();
    let n1 = out.n1();
    let mut phases = vec![Complex64::default(); n2];
    for i1 in 0..n1 {
        let q1 = out.point1(i1);
        for (phase, q2) in phases.iter_mut().zip(&points2) {
            *phase = Complex64::from_polar(1.0, 0.5 * q1 * q2);
        }
        let row = &mut out.amps_mut()[i1 * n2..(i1 + 1) * n2];
        for (a, phase) in row.iter_mut().zip(&phases) {
            *a *= phase;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Basis, GridWavefunction};
    use crate::states::SqueezedCoherent;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn displacement_maps_compose_to_identity() {
        assert_eq!(x_gate_map(0.0), QuadratureMap::identity(1));
        assert_eq!(z_gate_map(0.0), QuadratureMap::identity(1));
        let composed = x_gate_map(2.0).then(&x_gate_map(-2.0)).unwrap();
        assert_eq!(composed, QuadratureMap::identity(1));
    }

    #[test]
    fn all_maps_are_symplectic() {
        for map in [x_gate_map(1.3), z_gate_map(-0.4), fourier_map()] {
            assert!(map.is_symplectic(1e-12));
        }
        assert!(cz_map().is_symplectic(1e-12));
    }

    #[test]
    fn map_composed_with_inverse_is_identity() {
        for map in [x_gate_map(0.7), fourier_map(), cz_map()] {
            let id = map.then(&map.inverse()).unwrap();
            let d = id.dim();
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((id.matrix()[i * d + j] - expect).abs() < 1e-12);
                }
                assert!(id.shift()[i].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_rotates_quadratures() {
        let out = fourier_map().apply(&[1.0, 2.0]).unwrap();
        assert_eq!(out, vec![-2.0, 1.0]);
    }

    #[test]
    fn conjugating_z_by_fourier_gives_x() {
        // F† Z(s) F = X(s)
        let s = 0.8;
        let conjugated = fourier_map()
            .then(&z_gate_map(s))
            .unwrap()
            .then(&fourier_map().inverse())
            .unwrap();
        let x = x_gate_map(s);
        for (a, b) in conjugated.matrix().iter().zip(x.matrix()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in conjugated.shift().iter().zip(x.shift()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cz_heisenberg_action() {
        let out = cz_map().apply(&[1.0, 0.5, -2.0, 0.25]).unwrap();
        assert_eq!(out, vec![1.0, 0.5 - 2.0, -2.0, 0.25 + 1.0]);
    }

    fn vacuum_grid(n: usize) -> GridWavefunction {
        GridWavefunction::self_dual(n, Basis::Position, |q| {
            Complex64::new((2.0 * PI).powf(-0.25) * (-q * q / 4.0).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn grid_commutation_phase_of_x_and_z() {
        // X(r) Z(s) = e^{-i r s / 2} Z(s) X(r)
        let psi = vacuum_grid(2048);
        let (r, s) = (0.9, -1.4);
        let xz = psi.z_gate(s).unwrap().x_gate(r).unwrap();
        let zx = psi.x_gate(r).unwrap().z_gate(s).unwrap();
        let phase = Complex64::from_polar(1.0, -0.5 * r * s);
        for (a, b) in xz.amps().iter().zip(zx.amps()) {
            assert!((a - phase * b).norm() < 1e-10);
        }
    }

    #[test]
    fn grid_fourier_conjugation_matches_x_gate() {
        // F† Z(s) F ψ = X(s) ψ on grid states
        let s = 1.1;
        let state = SqueezedCoherent::new(0.3, -0.2, 0.35, 1.9).unwrap();
        let psi = GridWavefunction::self_dual(4096, Basis::Position, |q| state.wavefunction(q))
            .unwrap();
        let lhs = psi
            .fourier_gate()
            .unwrap()
            .z_gate(s)
            .unwrap()
            .fourier_gate_adjoint()
            .unwrap();
        let rhs = psi.x_gate(s).unwrap();
        for (a, b) in lhs.amps().iter().zip(rhs.amps()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn fourier_gate_swaps_squeezing_on_grid() {
        let narrow = GridWavefunction::self_dual(4096, Basis::Position, |q| {
            Complex64::new((2.0 * PI * 0.25).powf(-0.25) * (-q * q / 1.0).exp(), 0.0)
        })
        .unwrap();
        let rotated = narrow.fourier_gate().unwrap();
        assert!((narrow.variance() - 0.25).abs() < 1e-9);
        assert!((rotated.variance() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn cz_preserves_position_marginals() {
        let a = vacuum_grid(256);
        let b = vacuum_grid(256);
        let two = GridWavefunction2D::from_product(&a, &b).unwrap();
        let entangled = cz_apply(&two).unwrap();
        let before = two.position_marginal_mode1();
        let after = entangled.position_marginal_mode1();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
        let before2 = two.position_marginal_mode2();
        let after2 = entangled.position_marginal_mode2();
        for (x, y) in before2.iter().zip(&after2) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cz_matches_cluster_integrand() {
        // product input |ψ⟩|0,V_s⟩ becomes ψ(q₁) f_G(q₂) e^{i q₁ q₂ / 2}
        let s = SqueezedCoherent::new(0.4, 0.6, 0.3, 0.7).unwrap();
        let vac_r2 = 0.25;
        let mode1 =
            GridWavefunction::self_dual(256, Basis::Position, |q| s.wavefunction(q)).unwrap();
        let mode2 = GridWavefunction::self_dual(256, Basis::Position, |q| {
            Complex64::new(crate::gaussian::squeezed_vacuum_wavefunction(vac_r2, q), 0.0)
        })
        .unwrap();
        let entangled = cz_apply(&GridWavefunction2D::from_product(&mode1, &mode2).unwrap()).unwrap();
        for &(i1, i2) in &[(100usize, 140usize), (128, 128), (150, 110)] {
            let q1 = entangled.point1(i1);
            let q2 = entangled.point2(i2);
            let expected = s.wavefunction(q1)
                * crate::gaussian::squeezed_vacuum_wavefunction(vac_r2, q2)
                * Complex64::from_polar(1.0, 0.5 * q1 * q2);
            assert!((entangled.amp(i1, i2) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn composed_map_predicts_grid_moments() {
        // X(1.2) then F then Z(-0.7), on the map and on the grid
        let map = x_gate_map(1.2)
            .then(&fourier_map())
            .unwrap()
            .then(&z_gate_map(-0.7))
            .unwrap();
        let predicted = map.apply(&[0.0, 0.0]).unwrap();

        let psi = vacuum_grid(4096)
            .x_gate(1.2)
            .unwrap()
            .fourier_gate()
            .unwrap()
            .z_gate(-0.7)
            .unwrap();
        let q_mean = psi.mean();
        let p_mean = psi.fourier_transform().unwrap().mean();
        assert!((q_mean - predicted[0]).abs() < 1e-8, "{q_mean} vs {}", predicted[0]);
        assert!((p_mean - predicted[1]).abs() < 1e-8, "{p_mean} vs {}", predicted[1]);
    }

    #[test]
    fn cz_shifts_target_momentum_by_control_position() {
        // mode-2 momentum mean picks up the mode-1 position mean
        let a = vacuum_grid(512).x_gate(1.5).unwrap();
        let b = vacuum_grid(512);
        let two = GridWavefunction2D::from_product(&a, &b).unwrap();
        let entangled = cz_apply(&two).unwrap();
        let before = two.momentum_mean_mode2();
        let after = entangled.momentum_mean_mode2();
        assert!(before.abs() < 1e-9);
        assert!((after - two.position_mean_mode1()).abs() < 1e-6);
        assert!((after - 1.5).abs() < 1e-6);
    }
}
