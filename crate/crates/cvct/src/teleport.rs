//! Single-cluster teleportation outputs: the post-measurement wavefunction,
//! single-shot fidelity (quadrature and closed form) and the
//! window-averaged fidelity.
//!
//! For a fixed outcome `p₁` inside the window the quotient
//!
//! ```text
//! ℱ = P(p₁)⁻¹ [∫ f_G(q) ρ(q − p₁) dq]²
//! ```
//!
//! is evaluated with both integrals in log space, so fidelities remain
//! well-defined (and underflow cleanly to zero) for arbitrarily large
//! effective displacements.

use crate::error::{Error, Result};
use crate::gaussian::Gaussian1D;
use crate::grid::{Basis, GridWavefunction};
use crate::measurement::{self, SelectivityWindow};
use crate::quad;
use crate::states::{PositionDensity, SqueezedCoherent, SqueezedVacuum};

/// Summary of one quasi-selective teleportation at outcome `p₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleportResult {
    pub outcome: f64,
    pub fidelity: f64,
    pub probability_density: f64,
    pub effective_displacement: f64,
}

/// `X₀ = q₀ + p₁` (single cluster) or `q₀ + P₁⁽ᴺ⁾` (chain).
pub fn effective_displacement(q0: f64, outcome: f64) -> f64 {
    q0 + outcome
}

/// Post-measurement mode-2 wavefunction for outcome `p₁`: the normalized
/// `ψ(q) f_G(q + p₁)`. Returns the state and the squared normalization
/// constant, which equals `P(p₁)` on the grid.
pub fn post_measurement_wavefunction(
    psi: &GridWavefunction,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<(GridWavefunction, f64)> {
    if psi.basis() != Basis::Position {
        return Err(Error::Usage(
            "post_measurement_wavefunction expects a position-basis state".into(),
        ));
    }
    let mut out = psi.clone();
    for (j, a) in out.amps_mut().iter_mut().enumerate() {
        let q = psi.point(j);
        *a *= vac.wavefunction(q + p1);
    }
    let norm_sq = out.normalize().map_err(|_| {
        Error::DegenerateOutcome(format!(
            "outcome p1 = {p1} leaves no overlap with the distortion envelope"
        ))
    })?;
    Ok((out, norm_sq))
}

/// ħ = 2 momentum wavefunction of a (post-measurement) state; the transform
/// reports spectral leakage as a resolution error.
pub fn momentum_wavefunction(psi: &GridWavefunction) -> Result<GridWavefunction> {
    if psi.basis() != Basis::Position {
        return Err(Error::Usage("momentum_wavefunction expects a position-basis state".into()));
    }
    psi.fourier_transform()
}

/// Fidelity against a general displaced Gaussian envelope `f(q + center)` of
/// the given variance; shared by the single cluster and the collapsed chain.
pub fn fidelity_with_envelope<D: PositionDensity>(
    rho: &D,
    envelope_variance: f64,
    envelope_center: f64,
) -> Result<f64> {
    let envelope = Gaussian1D::new(envelope_center, envelope_variance, 0.0)?;
    let (c, s) = rho.support();
    let env_spread = envelope_variance.sqrt();
    let lo = (c - measurement::SUPPORT_SIGMAS * s)
        .min(-envelope_center - 2.0 * measurement::SUPPORT_SIGMAS * env_spread);
    let hi = (c + measurement::SUPPORT_SIGMAS * s)
        .max(-envelope_center + 2.0 * measurement::SUPPORT_SIGMAS * env_spread);
    // peak candidates: each factor's center and the precision-weighted
    // product (the amplitude form carries twice the variance)
    let weighted = |env_var: f64| {
        (-envelope_center / env_var + c / (s * s)) / (1.0 / env_var + 1.0 / (s * s))
    };
    let num_hints = [-envelope_center, c, weighted(2.0 * envelope_variance)];
    let den_hints = [-envelope_center, c, weighted(envelope_variance)];

    // numerator: ∫ f(q + c_env) ρ(q) dq, in logs (amplitude = half log-pdf)
    let log_num = quad::integrate_exp_log(
        |q| 0.5 * envelope.log_pdf(q) + rho.log_density(q),
        lo,
        hi,
        &num_hints,
    )?
    .log_value;
    // denominator: P = ∫ f(q + c_env)² ρ(q) dq
    let log_den =
        quad::integrate_exp_log(|q| envelope.log_pdf(q) + rho.log_density(q), lo, hi, &den_hints)?
            .log_value;
    if log_den == f64::NEG_INFINITY {
        return Err(Error::DegenerateOutcome(
            "outcome probability density vanishes; fidelity undefined".into(),
        ));
    }
    Ok((2.0 * log_num - log_den).exp())
}

/// Single-shot fidelity `ℱ = P(p₁)⁻¹ [∫ f_G(q) ρ(q − p₁) dq]²` by adaptive
/// quadrature, valid in the quasi-selective regime.
pub fn fidelity<D: PositionDensity>(rho: &D, vac: &SqueezedVacuum, p1: f64) -> Result<f64> {
    fidelity_with_envelope(rho, vac.position_variance(), p1)
}

/// Closed-form fidelity for the squeezed-coherent payload with a general
/// envelope `(variance, center)`:
/// `P⁻¹ (2/(π V²))^{1/2} δ² e^{−(δ X₀)²}`, `δ² = V²/(2 + V² δ_q²)`,
/// `V² = 1/variance`, `X₀ = q₀ + center`.
pub fn fidelity_closed_with_envelope(
    s: &SqueezedCoherent,
    envelope_variance: f64,
    envelope_center: f64,
) -> f64 {
    let vs2 = envelope_variance.recip();
    let dq2 = s.position_variance();
    let x0 = s.q0() + envelope_center;
    let sigma_sq = vs2 / (1.0 + vs2 * dq2);
    let delta_sq = vs2 / (2.0 + vs2 * dq2);
    let log_p = 0.5 * (sigma_sq / (2.0 * std::f64::consts::PI)).ln() - 0.5 * sigma_sq * x0 * x0;
    let log_f = -log_p + 0.5 * (2.0 / (std::f64::consts::PI * vs2)).ln() + delta_sq.ln()
        - delta_sq * x0 * x0;
    log_f.exp()
}

/// Closed-form single-cluster fidelity at outcome `p₁`.
pub fn fidelity_closed(s: &SqueezedCoherent, vac: &SqueezedVacuum, p1: f64) -> f64 {
    fidelity_closed_with_envelope(s, vac.position_variance(), p1)
}

/// Average fidelity over the window,
/// `ℱ^av = ∫_window [∫ f_G(q) ρ(q − p₁) dq]² dp₁`, exactly as printed (no
/// renormalization; see [`average_fidelity_normalized`] for the
/// window-normalized variant).
pub fn average_fidelity<D: PositionDensity>(
    rho: &D,
    vac: &SqueezedVacuum,
    window: &SelectivityWindow,
) -> Result<f64> {
    let env_var = vac.position_variance();
    let (c, s) = rho.support();
    let env_spread = env_var.sqrt();
    let inner_error = std::cell::RefCell::new(None);
    // the outer integrand peaks where the displaced envelope overlaps ρ
    let outer_peak = -c;
    let outer_spread = (env_var + s * s).sqrt();
    let seeds = [
        outer_peak - 12.0 * outer_spread,
        outer_peak - 8.0 * outer_spread,
        outer_peak - 4.0 * outer_spread,
        outer_peak - outer_spread,
        outer_peak,
        outer_peak + outer_spread,
        outer_peak + 4.0 * outer_spread,
        outer_peak + 8.0 * outer_spread,
        outer_peak + 12.0 * outer_spread,
    ];
    let outer = quad::integrate_seeded(
        |p1| {
            let lo = (c - measurement::SUPPORT_SIGMAS * s)
                .min(-p1 - 2.0 * measurement::SUPPORT_SIGMAS * env_spread);
            let hi = (c + measurement::SUPPORT_SIGMAS * s)
                .max(-p1 + 2.0 * measurement::SUPPORT_SIGMAS * env_spread);
            let envelope = Gaussian1D::new(p1, env_var, 0.0).expect("positive variance");
            let weighted =
                (-p1 / (2.0 * env_var) + c / (s * s)) / (0.5 / env_var + 1.0 / (s * s));
            match quad::integrate_exp_log(
                |q| 0.5 * envelope.log_pdf(q) + rho.log_density(q),
                lo,
                hi,
                &[-p1, c, weighted],
            ) {
                Ok(r) => (2.0 * r.log_value).exp(),
                Err(e) => {
                    if inner_error.borrow().is_none() {
                        *inner_error.borrow_mut() = Some(e);
                    }
                    0.0
                }
            }
        },
        window.lo(),
        window.hi(),
        &seeds,
        quad::ABS_TOL,
        quad::REL_TOL,
    )?;
    if let Some(e) = inner_error.borrow_mut().take() {
        return Err(e);
    }
    Ok(outer.value)
}

/// The window-normalized alternative reading of the average fidelity:
/// [`average_fidelity`] divided by `𝒫_tel`.
pub fn average_fidelity_normalized<D: PositionDensity>(
    rho: &D,
    vac: &SqueezedVacuum,
    window: &SelectivityWindow,
) -> Result<f64> {
    let raw = average_fidelity(rho, vac, window)?;
    let p_tel = measurement::teleport_probability(rho, vac, window)?;
    if p_tel <= 0.0 {
        return Err(Error::DegenerateOutcome(
            "teleportation probability vanishes on the window".into(),
        ));
    }
    Ok(raw / p_tel)
}

/// Closed-form bundle for one outcome of the squeezed-coherent scenario.
pub fn single_shot(
    s: &SqueezedCoherent,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<TeleportResult> {
    Ok(TeleportResult {
        outcome: p1,
        fidelity: fidelity_closed(s, vac, p1),
        probability_density: measurement::outcome_distribution_closed(s, vac, p1),
        effective_displacement: effective_displacement(s.q0(), p1),
    })
}
