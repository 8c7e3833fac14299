//! The insufficiently selective momentum measurement: outcome distribution
//! `P(p₁)`, teleportation probability over a selectivity window, window
//! placement, and the grid-level windowed projector.
//!
//! `P(p₁) = ∫ f_G(q)² ρ(q − p₁) dq` is the convolution of the ancilla's
//! position density with the (mirrored) payload density; integrating it over
//! the window gives the probability that the apparatus answers "yes".

use crate::error::{Error, Result};
use crate::grid::{Basis, GridWavefunction};
use crate::optim;
use crate::quad;
use crate::states::{PositionDensity, SqueezedCoherent, SqueezedVacuum};

/// Quadrature domains extend this many combined standard deviations past the
/// relevant centers; all integrands here are Gaussian-tailed.
pub const SUPPORT_SIGMAS: f64 = 12.0;

/// Interval of momentum outcomes the apparatus can register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectivityWindow {
    center: f64,
    width: f64,
}

impl SelectivityWindow {
    /// Width must be strictly positive: a zero-width window is a
    /// configuration mistake, not a measurement.
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width.is_finite() && width > 0.0) {
            return Err(Error::Domain(format!(
                "selectivity window needs finite center and width > 0, got ({center}, {width})"
            )));
        }
        Ok(Self { center, width })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn lo(&self) -> f64 {
        self.center - 0.5 * self.width
    }

    pub fn hi(&self) -> f64 {
        self.center + 0.5 * self.width
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.lo() && p <= self.hi()
    }
}

fn log_envelope_sq(vac: &SqueezedVacuum, q: f64) -> f64 {
    // ln f_G(q)² = ln N(q; 0, δ_q²)
    let var = vac.position_variance();
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - q * q / (2.0 * var)
}

fn distribution_bounds<D: PositionDensity + ?Sized>(rho: &D, vac: &SqueezedVacuum, p1: f64) -> (f64, f64) {
    let dv = vac.position_variance().sqrt();
    let (c, s) = rho.support();
    let lo = (-SUPPORT_SIGMAS * dv).min(c + p1 - SUPPORT_SIGMAS * s);
    let hi = (SUPPORT_SIGMAS * dv).max(c + p1 + SUPPORT_SIGMAS * s);
    (lo, hi)
}

/// Candidate peak locations of `f_G(q)² ρ(q − p₁)`: each factor's center and
/// their precision-weighted product.
fn distribution_hints<D: PositionDensity + ?Sized>(
    rho: &D,
    vac: &SqueezedVacuum,
    p1: f64,
) -> [f64; 3] {
    let (c, s) = rho.support();
    let dv2 = vac.position_variance();
    let shifted = c + p1;
    let weighted = (shifted / (s * s)) / (1.0 / dv2 + 1.0 / (s * s));
    [0.0, shifted, weighted]
}

/// ln P(p₁), the stable form used by the fidelity quotient.
pub fn log_outcome_distribution<D: PositionDensity + ?Sized>(
    rho: &D,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<f64> {
    let (lo, hi) = distribution_bounds(rho, vac, p1);
    let r = quad::integrate_exp_log(
        |q| log_envelope_sq(vac, q) + rho.log_density(q - p1),
        lo,
        hi,
        &distribution_hints(rho, vac, p1),
    )?;
    Ok(r.log_value)
}

/// Outcome distribution `P(p₁)` by adaptive quadrature.
pub fn outcome_distribution<D: PositionDensity + ?Sized>(
    rho: &D,
    vac: &SqueezedVacuum,
    p1: f64,
) -> Result<f64> {
    Ok(log_outcome_distribution(rho, vac, p1)?.exp())
}

/// Closed form of `P(p₁)` for a squeezed-coherent payload:
/// `(σ²/2π)^{1/2} e^{−σ² X₀²/2}` with
/// `σ² = V_s²/(1 + V_s² δ_q²(r₁, θ))` and `X₀ = q₀ + p₁`.
pub fn outcome_distribution_closed(
    s: &SqueezedCoherent,
    vac: &SqueezedVacuum,
    p1: f64,
) -> f64 {
    let sigma_sq = sigma_squared(s, vac);
    let x0 = s.q0() + p1;
    let log_p = 0.5 * (sigma_sq / (2.0 * std::f64::consts::PI)).ln() - 0.5 * sigma_sq * x0 * x0;
    log_p.exp()
}

/// `σ² = V_s² / (1 + V_s² δ_q²(r₁, θ))`.
pub fn sigma_squared(s: &SqueezedCoherent, vac: &SqueezedVacuum) -> f64 {
    let vs2 = vac.vs_squared();
    vs2 / (1.0 + vs2 * s.position_variance())
}

/// Statistics of `P(p₁)` used to truncate outer integrals: (peak, spread).
fn distribution_stats<D: PositionDensity>(rho: &D, vac: &SqueezedVacuum) -> (f64, f64) {
    let (c, s) = rho.support();
    (-c, (vac.position_variance() + s * s).sqrt())
}

/// `𝒫_tel = ∫_window P(p₁) dp₁` by nested adaptive quadrature.
pub fn teleport_probability<D: PositionDensity>(
    rho: &D,
    vac: &SqueezedVacuum,
    window: &SelectivityWindow,
) -> Result<f64> {
    let (peak, spread) = distribution_stats(rho, vac);
    let lo = window.lo().max(peak - (SUPPORT_SIGMAS + 2.0) * spread);
    let hi = window.hi().min(peak + (SUPPORT_SIGMAS + 2.0) * spread);
    if lo >= hi {
        // window entirely beyond representable support
        return Ok(0.0);
    }
    let inner_error = std::cell::RefCell::new(None);
    let seeds = [
        peak - 12.0 * spread,
        peak - 8.0 * spread,
        peak - 4.0 * spread,
        peak - spread,
        peak,
        peak + spread,
        peak + 4.0 * spread,
        peak + 8.0 * spread,
        peak + 12.0 * spread,
    ];
    let outer = quad::integrate_seeded(
        |p1| match log_outcome_distribution(rho, vac, p1) {
            Ok(log_p) => log_p.exp(),
            Err(e) => {
                if inner_error.borrow().is_none() {
                    *inner_error.borrow_mut() = Some(e);
                }
                0.0
            }
        },
        lo,
        hi,
        &seeds,
        quad::ABS_TOL,
        quad::REL_TOL,
    )?;
    if let Some(e) = inner_error.borrow_mut().take() {
        return Err(e);
    }
    Ok(outer.value)
}

/// Closed-form probability for a window of width `Δp₁` centered on the
/// optimal outcome `p₁ = −q₀`: `erf(Δp₁ σ / (2√2))`.
pub fn teleport_probability_closed(
    s: &SqueezedCoherent,
    vac: &SqueezedVacuum,
    width: f64,
) -> Result<f64> {
    if !(width > 0.0) {
        return Err(Error::Domain(format!("window width must be positive, got {width}")));
    }
    let sigma = sigma_squared(s, vac).sqrt();
    Ok(libm::erf(width * sigma / (2.0 * std::f64::consts::SQRT_2)))
}

/// Window center maximizing `𝒫_tel` at fixed width, found by a 101-point
/// scan across ±6 spreads of `P(p₁)` followed by golden-section refinement
/// to 1e−6 in the center.
pub fn optimize_window_center<D: PositionDensity>(
    rho: &D,
    vac: &SqueezedVacuum,
    width: f64,
) -> Result<f64> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Domain(format!("window width must be positive, got {width}")));
    }
    let (peak, spread) = distribution_stats(rho, vac);
    let radius = 6.0 * spread + 0.5 * width;
    let error = std::cell::RefCell::new(None);
    let objective = |center: f64| {
        let window = SelectivityWindow::new(center, width).expect("validated width");
        match teleport_probability(rho, vac, &window) {
            Ok(p) => p,
            Err(e) => {
                if error.borrow().is_none() {
                    *error.borrow_mut() = Some(e);
                }
                f64::NEG_INFINITY
            }
        }
    };
    let (center, _) = optim::maximize(objective, peak - radius, peak + radius, 101, 1e-6)?;
    if let Some(e) = error.borrow_mut().take() {
        return Err(e);
    }
    Ok(center)
}

/// Relative variation `(max − min)/max` of `P(p₁)` across the window; small
/// values indicate the quasi-selective approximation is justified.
pub fn quasi_selective_variation<D: PositionDensity>(
    rho: &D,
    vac: &SqueezedVacuum,
    window: &SelectivityWindow,
) -> Result<f64> {
    const SAMPLES: usize = 101;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..SAMPLES {
        let p1 = window.lo() + window.width() * i as f64 / (SAMPLES - 1) as f64;
        let v = outcome_distribution(rho, vac, p1)?;
        min = min.min(v);
        max = max.max(v);
    }
    if max <= 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / max)
}

/// Windowed projector on a momentum-basis grid state: amplitudes outside the
/// window are zeroed. The squared norm of the result is `𝒫_yes`.
pub fn window_project(
    psi: &GridWavefunction,
    window: &SelectivityWindow,
) -> Result<GridWavefunction> {
    if psi.basis() != Basis::Momentum {
        return Err(Error::Usage("window_project expects a momentum-basis state".into()));
    }
    let span = psi.half_width();
    if window.hi() < -span || window.lo() > span {
        return Err(Error::Domain(format!(
            "window [{:.3}, {:.3}] lies outside the grid domain ±{:.3}",
            window.lo(),
            window.hi(),
            span
        )));
    }
    let mut out = psi.clone();
    for (j, a) in out.amps_mut().iter_mut().enumerate() {
        let p = psi.point(j);
        if !window.contains(p) {
            *a = num_complex::Complex64::default();
        }
    }
    Ok(out)
}
