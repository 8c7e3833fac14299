//! Brute-force grid verification of the teleportation pipeline.
//!
//! The wire carrying the payload applies a Fourier gate as part of
//! teleportation, so the state placed on mode 1 is the Fourier-conjugated
//! payload `F†|ψ⟩`: with that input the measured outcome statistics and the
//! corrected output reproduce the analytic expressions written in terms of
//! the payload's *position* density. [`prepare_wire_input`] performs the
//! conjugation on the grid; everything downstream is discrete gate algebra
//! and masking, independent of every closed form it is used to check.
//!
//! Two pipelines are provided:
//! * a one-mode route (`conditional_slice` / `oracle_fidelity`) that applies
//!   `ℳ X(p₁) F` for a continuously chosen outcome `p₁`, and
//! * the literal two-mode route ([`run_single_cluster`]): build
//!   `ψ(q₁) f_G(q₂) e^{i q₁ q₂ / 2}`, transform mode 1 to the momentum
//!   basis, mask the selectivity window, read off probability and
//!   conditional states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::Gaussian1D;
use crate::grid::{centered_fft, Basis, GridWavefunction};
use crate::measurement::{self, SelectivityWindow};
use crate::quad;
use crate::states::{PositionDensity, SqueezedCoherent, SqueezedVacuum};

/// Default number of nodes for the one-mode (self-dual) pipeline.
pub const DEFAULT_PIPELINE_POINTS: usize = 8192;
/// Default nodes per axis for the two-mode pipeline.
pub const DEFAULT_AXIS_POINTS: usize = 2048;

/// Sample the payload wavefunction on a self-dual grid sized for both the
/// state and its Fourier conjugate.
pub fn payload_grid(s: &SqueezedCoherent, n: usize) -> Result<GridWavefunction> {
    let psi = GridWavefunction::self_dual(n, Basis::Position, |q| s.wavefunction(q))?;
    let narrowest = s.position_variance().min(s.momentum_variance()).sqrt();
    if psi.step() > narrowest / 8.0 {
        return Err(Error::Resolution(format!(
            "step {:.4} does not resolve the narrowest width {:.4}; increase the grid size",
            psi.step(),
            narrowest
        )));
    }
    let reach = s.q0().abs().max(s.p0().abs())
        + 14.0 * s.position_variance().max(s.momentum_variance()).sqrt();
    if psi.half_width() < reach {
        return Err(Error::Resolution(format!(
            "grid half-width {:.1} does not cover the state (needs {reach:.1})",
            psi.half_width()
        )));
    }
    Ok(psi)
}

/// Wire input `F†|ψ⟩` of the teleportation circuit, computed on the grid.
pub fn prepare_wire_input(payload: &GridWavefunction) -> Result<GridWavefunction> {
    payload.fourier_gate_adjoint()
}

/// Unnormalized conditional mode-2 state `ℳ X(p₁) F |wire⟩` for a fixed
/// momentum outcome; its squared norm is the outcome density `P(p₁)`.
pub fn conditional_slice(
    wire: &GridWavefunction,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<GridWavefunction> {
    // X(p₁) F = F Z(−p₁), so the slice needs one phase and one gate
    let mut out = wire.z_gate(-p1)?.fourier_gate()?;
    let step = out.step();
    let half = (out.n() / 2) as f64;
    for (j, a) in out.amps_mut().iter_mut().enumerate() {
        let q = (j as f64 - half) * step;
        *a *= vac.wavefunction(q);
    }
    Ok(out)
}

/// The conditional slice evaluated by the literal Fourier sum
/// `f_G(q₂)·(2√π)⁻¹ Δq₁ Σ_j w(q₁ⱼ) e^{i q₁ⱼ (q₂ − p₁)/2}` on an arbitrary
/// centered target grid. Quadratic cost; reference for the FFT-based
/// [`conditional_slice`] and for cross-grid comparisons.
pub fn conditional_slice_on_grid(
    wire: &GridWavefunction,
    vac: &SqueezedVacuum,
    p1: f64,
    target_step: f64,
    target_n: usize,
) -> Result<GridWavefunction> {
    if wire.basis() != Basis::Position {
        return Err(Error::Usage("conditional slice needs a position-basis wire".into()));
    }
    let scale = wire.step() / (2.0 * std::f64::consts::PI.sqrt());
    let points1: Vec<f64> = wire.points().collect();
    GridWavefunction::from_fn(target_step, target_n, Basis::Position, |q2| {
        let mut acc = Complex64::default();
        for (w, &q1) in wire.amps().iter().zip(&points1) {
            acc += w * Complex64::from_polar(1.0, 0.5 * q1 * (q2 - p1));
        }
        acc * scale * vac.wavefunction(q2)
    })
}

/// `P(p₁)` read off the grid pipeline.
pub fn oracle_outcome_density(
    wire: &GridWavefunction,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<f64> {
    Ok(conditional_slice(wire, vac, p1)?.norm_sq())
}

/// `𝒫_tel` over a window, by adaptive quadrature of the slice norm over the
/// continuous outcome variable.
pub fn oracle_teleport_probability(
    wire: &GridWavefunction,
    vac: &SqueezedVacuum,
    window: &SelectivityWindow,
) -> Result<f64> {
    // clip to where the outcome density has support: p₁ near the wire's
    // momentum mean, spread by ancilla and payload widths
    let tilde = wire.fourier_transform()?;
    let peak = tilde.mean();
    let spread = (vac.position_variance() + tilde.variance()).sqrt();
    let lo = window.lo().max(peak - 14.0 * spread);
    let hi = window.hi().min(peak + 14.0 * spread);
    if lo >= hi {
        return Ok(0.0);
    }
    let error = std::cell::RefCell::new(None);
    let result = quad::integrate_tol(
        |p1| match oracle_outcome_density(wire, vac, p1) {
            Ok(v) => v,
            Err(e) => {
                if error.borrow().is_none() {
                    *error.borrow_mut() = Some(e);
                }
                0.0
            }
        },
        lo,
        hi,
        1e-9,
        1e-7,
    )?;
    if let Some(e) = error.borrow_mut().take() {
        return Err(e);
    }
    Ok(result.value)
}

/// Fidelity of the corrected output against the wire input for a fixed
/// outcome: normalize the conditional slice, undo the displacement with
/// `X†(p₁)`, undo the Fourier gate with `F†`, and overlap with the input.
pub fn oracle_fidelity(
    payload: &GridWavefunction,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<f64> {
    let wire = prepare_wire_input(payload)?;
    let mut conditional = conditional_slice(&wire, vac, p1)?;
    conditional.normalize().map_err(|_| {
        Error::DegenerateOutcome(format!("outcome p1 = {p1} has vanishing probability density"))
    })?;
    let corrected = conditional.x_gate(-p1)?.fourier_gate_adjoint()?;
    Ok(wire.inner(&corrected)?.norm_sqr())
}

/// Result of the two-mode windowed run.
#[derive(Debug)]
pub struct SingleClusterRun {
    /// Probability mass surviving the masked projection.
    pub p_tel: f64,
    /// The window actually applied: edges snapped to momentum-bin boundaries.
    pub snapped_window: SelectivityWindow,
    /// `X†(p₁)`-corrected conditional mode-2 states at sampled in-window
    /// momentum bins, keyed by the outcome value.
    pub samples: Vec<(f64, GridWavefunction)>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterConfig {
    /// Mode-1 nodes of the two-mode grid.
    pub axis1_points: usize,
    /// Mode-2 nodes of the two-mode grid.
    pub axis2_points: usize,
    /// Zero-padding factor for the mode-1 transform (refines the momentum
    /// bin width).
    pub pad_factor: usize,
    /// Number of in-window conditional states to return.
    pub sample_count: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            axis1_points: DEFAULT_AXIS_POINTS,
            axis2_points: DEFAULT_AXIS_POINTS,
            pad_factor: 2,
            sample_count: 2,
        }
    }
}

/// Literal two-mode pipeline: cluster construction, mode-1 momentum
/// transform, window masking.
///
/// `wire` is the mode-1 input (use [`prepare_wire_input`] to teleport a
/// payload); the ancilla `vac` must satisfy the grid resolution bound
/// `step ≤ δ_min/8` on mode 2.
pub fn run_single_cluster(
    wire: &GridWavefunction,
    vac: &SqueezedVacuum,
    window: &SelectivityWindow,
    config: &ClusterConfig,
) -> Result<SingleClusterRun> {
    if wire.basis() != Basis::Position {
        return Err(Error::Usage("wire input must be a position-basis state".into()));
    }
    let n1 = config.axis1_points;
    let n2 = config.axis2_points;
    if !n1.is_power_of_two() || !n2.is_power_of_two() || n1 < 64 || n2 < 64 {
        return Err(Error::Usage("axis points must be powers of two >= 64".into()));
    }
    if !(1..=64).contains(&config.pad_factor) || !config.pad_factor.is_power_of_two() {
        return Err(Error::Usage("pad factor must be a power of two in 1..=64".into()));
    }

    // mode-1 grid: trim the wire to its working support if possible
    let mode1 = if wire.n() > n1 {
        wire.central_slice(n1)?
    } else {
        wire.clone()
    };

    // mode-2 grid: resolve the narrowest of ancilla and conditional widths,
    // and cover ancilla support plus the displacements of outcomes that
    // carry probability mass (the window clipped by the support of P(p₁))
    let vac_spread = vac.position_variance().sqrt();
    let tilde = wire.fourier_transform()?;
    let cond_spread = tilde.variance().sqrt();
    let outcome_peak = tilde.mean();
    let outcome_spread = (vac.position_variance() + tilde.variance()).sqrt();
    let reach_lo = window
        .lo()
        .clamp(outcome_peak - 14.0 * outcome_spread, outcome_peak + 14.0 * outcome_spread);
    let reach_hi = window
        .hi()
        .clamp(outcome_peak - 14.0 * outcome_spread, outcome_peak + 14.0 * outcome_spread);
    let step2 = (vac_spread.min(cond_spread) / 8.0).min(mode1.step());
    let needed = (14.0 * vac_spread)
        .max(reach_lo.abs().max(reach_hi.abs()) + 14.0 * cond_spread);
    let half2 = step2 * (n2 / 2) as f64;
    if half2 < needed {
        return Err(Error::Resolution(format!(
            "mode-2 half-width {half2:.1} cannot cover the run (needs {needed:.1}); \
             increase axis2_points"
        )));
    }

    // Eq. 23 integrand: ψ(q₁) f_G(q₂) e^{i q₁ q₂ / 2}
    let half1 = (n1 / 2) as f64;
    let half2n = (n2 / 2) as f64;
    let q2s: Vec<f64> = (0..n2).map(|j| (j as f64 - half2n) * step2).collect();
    let envelope: Vec<f64> = q2s.iter().map(|&q2| vac.wavefunction(q2)).collect();

    let n_pad = n1 * config.pad_factor;
    let p_step = 4.0 * std::f64::consts::PI / (n_pad as f64 * mode1.step());

    // mask the bins whose center lies in the window; the reported snapped
    // window spans those bins edge to edge (center ± Δp/2)
    let k_lo_f = (window.lo() / p_step + (n_pad / 2) as f64).ceil();
    let k_hi_f = (window.hi() / p_step + (n_pad / 2) as f64).floor();
    if k_hi_f < k_lo_f || k_hi_f < 0.0 || k_lo_f >= n_pad as f64 {
        return Err(Error::Domain(
            "selectivity window does not cover any momentum bin".into(),
        ));
    }
    let k_lo = k_lo_f.max(0.0) as usize;
    let k_hi = (k_hi_f as usize).min(n_pad - 1);
    let bin_value = |k: usize| (k as f64 - (n_pad / 2) as f64) * p_step;
    let snapped_window = SelectivityWindow::new(
        0.5 * (bin_value(k_lo) + bin_value(k_hi)),
        bin_value(k_hi) - bin_value(k_lo) + p_step,
    )?;

    let sample_count = config.sample_count.clamp(1, k_hi - k_lo + 1);
    let sample_bins: Vec<usize> = (0..sample_count)
        .map(|i| k_lo + i * (k_hi - k_lo) / sample_count.max(2).saturating_sub(1))
        .map(|k| k.min(k_hi))
        .collect();

    let mut p_tel = 0.0;
    let mut sample_columns: Vec<Vec<Complex64>> =
        vec![vec![Complex64::default(); n2]; sample_bins.len()];

    // column-by-column over q₂: pad, transform mode 1, accumulate the masked
    // probability mass and the sampled conditional rows
    let mut column = vec![Complex64::default(); n_pad];
    let offset = (n_pad - n1) / 2;
    for (i2, (&q2, &env)) in q2s.iter().zip(&envelope).enumerate() {
        for slot in column.iter_mut() {
            *slot = Complex64::default();
        }
        for i1 in 0..n1 {
            let q1 = (i1 as f64 - half1) * mode1.step();
            let phase = Complex64::from_polar(1.0, 0.5 * q1 * q2);
            column[offset + i1] = mode1.amps()[i1] * env * phase;
        }
        let (tilde, _) = centered_fft(&column, mode1.step(), false);
        for k in k_lo..=k_hi {
            p_tel += tilde[k].norm_sqr();
        }
        for (slot, &k) in sample_columns.iter_mut().zip(&sample_bins) {
            slot[i2] = tilde[k];
        }
    }
    p_tel *= p_step * step2;

    let mut samples = Vec::with_capacity(sample_bins.len());
    for (column, &k) in sample_columns.into_iter().zip(&sample_bins) {
        let p1 = bin_value(k);
        let mut state = GridWavefunction::from_amplitudes(step2, Basis::Position, column)?;
        match state.normalize() {
            // far-tail bins hold only roundoff noise; no usable state
            Ok(norm_sq) if norm_sq > 1e-30 => {
                let corrected = state.x_gate(-p1)?;
                samples.push((p1, corrected));
            }
            _ => {}
        }
    }

    Ok(SingleClusterRun {
        p_tel,
        snapped_window,
        samples,
    })
}

fn wigner_point(
    amps: &[Complex64],
    step: f64,
    envelope_variance: Option<f64>,
    q: f64,
    p: f64,
    n: usize,
) -> f64 {
    // W(q, p) = (4π)⁻¹ ∫ dv ψ(q + v/2) ψ̄(q − v/2) G(v) e^{−i p v / 2}
    // on the lattice v = 2kΔ, with G the ancilla characteristic function.
    // Terms pair conjugately for ±k, so only k ≥ 0 is summed.
    let half = (n / 2) as f64;
    let j0 = ((q / step + half).round() as isize).clamp(0, n as isize - 1) as usize;
    let k_max = j0.min(n - 1 - j0);
    let mut sum = Complex64::new(0.5 * amps[j0].norm_sqr(), 0.0);
    let mut negligible_run = 0usize;
    for k in 1..=k_max {
        let v = 2.0 * k as f64 * step;
        let g = match envelope_variance {
            Some(var) => (-var * v * v / 8.0).exp(),
            None => 1.0,
        };
        let magnitude = amps[j0 + k].norm() * amps[j0 - k].norm() * g;
        if magnitude < 1e-60 {
            negligible_run += 1;
            if negligible_run > 32 {
                break;
            }
            continue;
        }
        negligible_run = 0;
        let term =
            amps[j0 + k] * amps[j0 - k].conj() * g * Complex64::from_polar(1.0, -0.5 * p * v);
        sum += term;
    }
    (2.0 * sum.re) * 2.0 * step / (4.0 * std::f64::consts::PI)
}

/// Wigner function of a pure position-basis grid state at `(q, p)`;
/// `q` is snapped to the nearest grid node.
pub fn wigner_pure(psi: &GridWavefunction, q: f64, p: f64) -> Result<f64> {
    if psi.basis() != Basis::Position {
        return Err(Error::Usage("wigner_pure expects a position-basis state".into()));
    }
    psi_resolution_guard(psi)?;
    Ok(wigner_point(psi.amps(), psi.step(), None, q, p, psi.n()))
}

/// Wigner function of the reduced mode-1 state of the cluster
/// `C_Z (|wire⟩ ⊗ |0, V_s⟩)`: the pure-state integrand picks up the
/// ancilla's Gaussian characteristic function.
pub fn wigner_cluster_mode1(
    wire: &GridWavefunction,
    vac: &SqueezedVacuum,
    q: f64,
    p: f64,
) -> Result<f64> {
    if wire.basis() != Basis::Position {
        return Err(Error::Usage("wigner_cluster_mode1 expects a position-basis state".into()));
    }
    psi_resolution_guard(wire)?;
    Ok(wigner_point(
        wire.amps(),
        wire.step(),
        Some(vac.position_variance()),
        q,
        p,
        wire.n(),
    ))
}

fn psi_resolution_guard(psi: &GridWavefunction) -> Result<()> {
    let frac = psi.edge_fraction();
    if frac > 1e-8 {
        return Err(Error::Resolution(format!(
            "state touches the grid edge (tail fraction {frac:.3e}); the Wigner \
             integral over the chord variable would be truncated"
        )));
    }
    Ok(())
}

/// Centered finite-difference residual `|∂_t u − ∂²_{p₁} u|` of the outcome
/// distribution `u(p₁, t)` taken at ancilla position variance `δ_q² = 2t`.
/// Second-order: halving `h` shrinks the residual by ~4.
pub fn heat_residual<D: PositionDensity + ?Sized>(rho: &D, p1: f64, t: f64, h: f64) -> Result<f64> {
    if !(t.is_finite() && h.is_finite() && t > h && h > 0.0) {
        return Err(Error::Domain(format!(
            "heat residual needs t > h > 0, got t = {t}, h = {h}"
        )));
    }
    let u = |p: f64, tau: f64| -> Result<f64> {
        let vac = SqueezedVacuum::from_position_variance(2.0 * tau)?;
        measurement::outcome_distribution(rho, &vac, p)
    };
    let dt = (u(p1, t + h)? - u(p1, t - h)?) / (2.0 * h);
    let dpp = (u(p1 + h, t)? - 2.0 * u(p1, t)? + u(p1 - h, t)?) / (h * h);
    Ok((dt - dpp).abs())
}

/// Convenience: the whole analytic-vs-oracle comparison for one parameter
/// point, used by the verification suites.
#[derive(Debug, Clone, Copy)]
pub struct OracleComparison {
    pub p1: f64,
    pub oracle_fidelity: f64,
    pub closed_fidelity: f64,
    pub oracle_p_tel: f64,
    pub quadrature_p_tel: f64,
}

/// Run both pipelines for a squeezed-coherent payload at one outcome and
/// window, returning the paired oracle/analytic values.
pub fn compare_at(
    s: &SqueezedCoherent,
    vac: &SqueezedVacuum,
    p1: f64,
    window: &SelectivityWindow,
    n: usize,
) -> Result<OracleComparison> {
    let payload = payload_grid(s, n)?;
    let wire = prepare_wire_input(&payload)?;
    Ok(OracleComparison {
        p1,
        oracle_fidelity: oracle_fidelity(&payload, vac, p1)?,
        closed_fidelity: crate::teleport::fidelity_closed(s, vac, p1),
        oracle_p_tel: oracle_teleport_probability(&wire, vac, window)?,
        quadrature_p_tel: measurement::teleport_probability(s, vac, window)?,
    })
}

/// Erase all amplitude except a Gaussian payload: helper for tests that need
/// a bare normalized Gaussian state.
pub fn gaussian_payload(variance: f64, center: f64, n: usize) -> Result<GridWavefunction> {
    let g = Gaussian1D::new(-center, variance, 0.0)?;
    GridWavefunction::self_dual(n, Basis::Position, |q| Complex64::new(g.amplitude(q), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teleport;
    use rand::Rng;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    const F_COHERENT: f64 = 0.942_809_041_582_063_4;

    #[test]
    fn conditional_slice_norm_matches_closed_distribution() {
        let s = SqueezedCoherent::new(0.6, -0.4, 0.3, 1.9).unwrap();
        let vac = SqueezedVacuum::new(0.25).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();
        for p1 in [-1.2, 0.0, 0.9] {
            let grid = oracle_outcome_density(&wire, &vac, p1).unwrap();
            let closed = measurement::outcome_distribution_closed(&s, &vac, p1);
            assert!((grid - closed).abs() < 1e-6, "p1 = {p1}: {grid} vs {closed}");
        }
    }

    #[test]
    fn coherent_oracle_fidelity_constant() {
        let s = SqueezedCoherent::coherent(0.0, 0.0).unwrap();
        let vac = SqueezedVacuum::new(0.0).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let f = oracle_fidelity(&payload, &vac, 0.0).unwrap();
        assert_close(f, F_COHERENT, 1e-4);
    }

    #[test]
    fn oracle_fidelity_matches_quadrature_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let vals = |rng: &mut rand_chacha::ChaCha8Rng| rng.gen_range(-1.0..1.0);
        for _ in 0..5 {
            let r1 = vals(&mut rng);
            let r2 = vals(&mut rng);
            let theta = rng.gen_range(0.0..2.0 * PI);
            let q0 = rng.gen_range(-1.0..1.0);
            let x0 = rng.gen_range(-2.0..2.0);
            let s = SqueezedCoherent::new(q0, 0.4, r1, theta).unwrap();
            let vac = SqueezedVacuum::new(r2).unwrap();
            let p1 = x0 - q0;
            let payload = payload_grid(&s, 8192).unwrap();
            let grid = oracle_fidelity(&payload, &vac, p1).unwrap();
            let analytic = teleport::fidelity(&s, &vac, p1).unwrap();
            assert!(
                (grid - analytic).abs() < 1e-4,
                "(r1={r1:.2}, r2={r2:.2}, θ={theta:.2}, X0={x0:.2}): {grid} vs {analytic}"
            );
        }
    }

    #[test]
    fn flat_envelope_gives_near_perfect_fidelity() {
        let s = SqueezedCoherent::new(0.3, 0.2, 0.2, 1.0).unwrap();
        let vac = SqueezedVacuum::new(-5.0).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let f = oracle_fidelity(&payload, &vac, -0.3).unwrap();
        assert!(f >= 0.999, "fidelity {f}");
    }

    #[test]
    fn two_mode_probability_matches_quadrature() {
        let s = SqueezedCoherent::new(0.5, -0.2, 0.25, 0.8).unwrap();
        let vac = SqueezedVacuum::new(0.2).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();
        let window = SelectivityWindow::new(-0.5, 1.6).unwrap();
        let run = run_single_cluster(&wire, &vac, &window, &ClusterConfig::default()).unwrap();
        let analytic =
            measurement::teleport_probability(&s, &vac, &run.snapped_window).unwrap();
        assert!(
            (run.p_tel - analytic).abs() < 1e-4,
            "{} vs {analytic}",
            run.p_tel
        );
    }

    #[test]
    fn full_window_captures_all_probability() {
        let s = SqueezedCoherent::coherent(0.4, 0.3).unwrap();
        let vac = SqueezedVacuum::new(0.1).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();
        let window = SelectivityWindow::new(-0.4, 60.0).unwrap();
        let run = run_single_cluster(&wire, &vac, &window, &ClusterConfig::default()).unwrap();
        assert_close(run.p_tel, 1.0, 1e-6);
    }

    #[test]
    fn conditional_states_match_post_measurement_wavefunction() {
        let s = SqueezedCoherent::new(0.4, 0.6, 0.3, 2.2).unwrap();
        let vac = SqueezedVacuum::new(0.3).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();
        let window = SelectivityWindow::new(-0.4, 1.0).unwrap();
        let run = run_single_cluster(&wire, &vac, &window, &ClusterConfig::default()).unwrap();
        assert!(!run.samples.is_empty());
        for (p1, state) in &run.samples {
            // reference: normalized ψ(q) f_G(q + p₁) on the same grid
            let reference_raw = GridWavefunction::from_fn(
                state.step(),
                state.n(),
                Basis::Position,
                |q| s.wavefunction(q) * vac.wavefunction(q + p1),
            )
            .unwrap();
            let mut reference = reference_raw;
            reference.normalize().unwrap();
            let d = state.l2_distance_up_to_phase(&reference).unwrap();
            assert!(d < 1e-6, "p1 = {p1}: distance {d}");
        }
    }

    #[test]
    fn two_mode_slices_match_one_mode_pipeline() {
        // entanglement-window consistency: the masked two-mode state's rows
        // reproduce the directly constructed conditional slices
        let s = SqueezedCoherent::new(0.2, -0.5, -0.3, 1.1).unwrap();
        let vac = SqueezedVacuum::new(0.4).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();
        let window = SelectivityWindow::new(0.5, 1.2).unwrap();
        let run = run_single_cluster(&wire, &vac, &window, &ClusterConfig::default()).unwrap();
        for (p1, state) in run.samples.iter().take(2) {
            let mut direct =
                conditional_slice_on_grid(&wire, &vac, *p1, state.step(), state.n()).unwrap();
            direct.normalize().unwrap();
            let direct_corrected = direct.x_gate(-*p1).unwrap();
            let d = state.l2_distance_up_to_phase(&direct_corrected).unwrap();
            assert!(d < 1e-6, "p1 = {p1}: distance {d}");
        }
    }

    #[test]
    fn fft_slice_matches_direct_sum() {
        let s = SqueezedCoherent::new(0.3, 0.4, 0.2, 0.6).unwrap();
        let vac = SqueezedVacuum::new(-0.2).unwrap();
        let payload = payload_grid(&s, 2048).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();
        let fast = conditional_slice(&wire, &vac, 0.7).unwrap();
        let slow = conditional_slice_on_grid(&wire, &vac, 0.7, fast.step(), fast.n()).unwrap();
        for (a, b) in fast.amps().iter().zip(slow.amps()) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn vacuum_wigner_values() {
        let psi = gaussian_payload(1.0, 0.0, 4096).unwrap();
        for &(q, p) in &[(0.0, 0.0), (0.5, -0.3), (-1.0, 1.2)] {
            let w = wigner_pure(&psi, q, p).unwrap();
            // evaluate the closed form at the snapped q
            let qs = psi.point(psi.nearest_index(q));
            let expected = (2.0 * PI).recip() * (-(qs * qs + p * p) / 2.0).exp();
            assert_close(w, expected, 1e-9);
        }
    }

    #[test]
    fn wigner_normalizes_and_marginalizes() {
        let s = SqueezedCoherent::new(0.8, -0.6, 0.3, 2.0).unwrap();
        let vac = SqueezedVacuum::new(0.3).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        let wire = prepare_wire_input(&payload).unwrap();

        // marginal over q at fixed p equals the outcome distribution
        let q_nodes: Vec<usize> = (0..wire.n()).step_by(8).collect();
        let dq = wire.step() * 8.0;
        for p in [-1.5, 0.0, 0.8] {
            let marginal: f64 = q_nodes
                .iter()
                .map(|&j| wigner_cluster_mode1(&wire, &vac, wire.point(j), p).unwrap())
                .sum::<f64>()
                * dq;
            let expected = measurement::outcome_distribution(&s, &vac, p).unwrap();
            assert!(
                (marginal - expected).abs() < 1e-4,
                "p = {p}: {marginal} vs {expected}"
            );
        }

        // total mass: integrate over a p lattice wide enough for the spread
        let p_spread = (vac.position_variance() + s.position_variance()).sqrt();
        let p_lo = -s.q0() - 8.0 * p_spread;
        let p_hi = -s.q0() + 8.0 * p_spread;
        let n_p = 160;
        let dp = (p_hi - p_lo) / n_p as f64;
        let mut total = 0.0;
        for &j in &q_nodes {
            let q = wire.point(j);
            for i in 0..=n_p {
                let w = wigner_cluster_mode1(&wire, &vac, q, p_lo + dp * i as f64).unwrap();
                let weight = if i == 0 || i == n_p { 0.5 } else { 1.0 };
                total += w * weight;
            }
        }
        total *= dq * dp;
        assert_close(total, 1.0, 1e-6);
    }

    #[test]
    fn heat_residual_converges_second_order() {
        let gauss = Gaussian1D::new(-1.3, 0.8, 0.0).unwrap();
        let s = SqueezedCoherent::new(0.6, 0.0, 0.2, 0.7).unwrap();
        let run = |rho: &dyn PositionDensity, p1: f64| {
            let r1 = heat_residual(rho, p1, 0.45, 0.1).unwrap();
            let r2 = heat_residual(rho, p1, 0.45, 0.05).unwrap();
            r1 / r2
        };
        let ratio_gauss = run(&gauss, 1.3);
        assert!(
            (3.5..=4.5).contains(&ratio_gauss),
            "gaussian ratio {ratio_gauss}"
        );
        let ratio_sc = run(&s, -0.6);
        assert!((3.5..=4.5).contains(&ratio_sc), "squeezed ratio {ratio_sc}");
    }

    #[test]
    fn sharper_kernel_raises_the_peak() {
        let s = SqueezedCoherent::new(0.6, 0.0, 0.2, 0.7).unwrap();
        let u = |t: f64| {
            let vac = SqueezedVacuum::from_position_variance(2.0 * t).unwrap();
            measurement::outcome_distribution(&s, &vac, -0.6).unwrap()
        };
        assert!(u(0.25) > u(0.5));
    }

    #[test]
    fn degenerate_outcome_is_reported() {
        let s = SqueezedCoherent::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let vac = SqueezedVacuum::new(2.0).unwrap();
        let payload = payload_grid(&s, 8192).unwrap();
        // outcome far outside every support: conditional slice norm underflows
        let res = oracle_fidelity(&payload, &vac, 500.0);
        assert!(matches!(res, Err(Error::DegenerateOutcome(_)) | Err(Error::Resolution(_))));
    }
}
