//! Input states: the squeezed-vacuum ancilla that builds the cluster and the
//! squeezed-coherent payload, together with the position-density abstraction
//! every probability and fidelity integral is written against.
//!
//! Shot-noise units (ħ = 2): the vacuum has unit quadrature variances.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{self, Gaussian1D};

/// Squeezing parameters beyond this magnitude produce Gaussians that
/// underflow double precision on practical grids.
pub const MAX_SQUEEZING: f64 = 5.0;

/// Anything with a position probability density.
///
/// `log_density` is the required form: the fidelity path composes densities
/// in log space so that large effective displacements stay representable.
pub trait PositionDensity {
    /// ln of the density at `q`; `-inf` where the density vanishes.
    fn log_density(&self, q: f64) -> f64;

    fn density(&self, q: f64) -> f64 {
        self.log_density(q).exp()
    }

    /// `(center, spread)` hint used to truncate quadrature domains.
    fn support(&self) -> (f64, f64);
}

impl<D: PositionDensity + ?Sized> PositionDensity for &D {
    fn log_density(&self, q: f64) -> f64 {
        (**self).log_density(q)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
}

impl PositionDensity for Gaussian1D {
    fn log_density(&self, q: f64) -> f64 {
        self.log_pdf(q)
    }
    fn support(&self) -> (f64, f64) {
        (self.mean(), self.variance().sqrt())
    }
}

/// A custom density given by a log-density closure plus a support hint.
pub struct DensityFn<F> {
    log_density: F,
    center: f64,
    spread: f64,
}

impl<F: Fn(f64) -> f64> DensityFn<F> {
    pub fn from_log(log_density: F, center: f64, spread: f64) -> Result<Self> {
        if !(spread.is_finite() && spread > 0.0 && center.is_finite()) {
            return Err(Error::Usage("density support hint must be finite with spread > 0".into()));
        }
        Ok(Self {
            log_density,
            center,
            spread,
        })
    }
}

impl<F: Fn(f64) -> f64> PositionDensity for DensityFn<F> {
    fn log_density(&self, q: f64) -> f64 {
        (self.log_density)(q)
    }
    fn support(&self) -> (f64, f64) {
        (self.center, self.spread)
    }
}

/// Squeezed vacuum `|0, V_s⟩` with `V_s² = e^{2 r₂}`; approximates the
/// zero-momentum eigenstate that an ideal cluster would use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedVacuum {
    r2: f64,
}

impl SqueezedVacuum {
    pub fn new(r2: f64) -> Result<Self> {
        if !r2.is_finite() || r2.abs() > MAX_SQUEEZING {
            return Err(Error::Domain(format!(
                "squeezed-vacuum parameter must satisfy |r2| <= {MAX_SQUEEZING}, got {r2}"
            )));
        }
        Ok(Self { r2 })
    }

    /// Vacuum with position variance `var` (`δ_q² = e^{-2 r₂} = var`).
    pub fn from_position_variance(var: f64) -> Result<Self> {
        if !(var.is_finite() && var > 0.0) {
            return Err(Error::Domain(format!("position variance must be positive, got {var}")));
        }
        Self::new(-0.5 * var.ln())
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// `V_s² = e^{2 r₂}`.
    pub fn vs_squared(&self) -> f64 {
        (2.0 * self.r2).exp()
    }

    /// `δ_q² = 1/V_s²`. The product with [`Self::momentum_variance`] is 1.
    pub fn position_variance(&self) -> f64 {
        (-2.0 * self.r2).exp()
    }

    /// `δ_p² = V_s²`.
    pub fn momentum_variance(&self) -> f64 {
        (2.0 * self.r2).exp()
    }

    /// `f_G(q)`, the real position wavefunction.
    pub fn wavefunction(&self, q: f64) -> f64 {
        gaussian::squeezed_vacuum_wavefunction(self.r2, q)
    }

    /// The squared, displaced envelope `f_G(q + center)²` as a normalized
    /// Gaussian PDF.
    pub fn envelope(&self, center: f64) -> Gaussian1D {
        Gaussian1D::new(center, self.position_variance(), 0.0)
            .expect("vacuum variance is validated positive")
    }
}

/// Squeezed-coherent payload `|α, ξ⟩` with `α = (q₀ + i p₀)/2` and
/// `ξ = r₁ e^{iθ}/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedCoherent {
    q0: f64,
    p0: f64,
    r1: f64,
    theta: f64,
}

impl SqueezedCoherent {
    /// `theta` is reduced into `[0, 2π)`.
    pub fn new(q0: f64, p0: f64, r1: f64, theta: f64) -> Result<Self> {
        if !(q0.is_finite() && p0.is_finite() && theta.is_finite()) {
            return Err(Error::Domain("state parameters must be finite".into()));
        }
        if !r1.is_finite() || r1.abs() > MAX_SQUEEZING {
            return Err(Error::Domain(format!(
                "squeezing must satisfy |r1| <= {MAX_SQUEEZING}, got {r1}"
            )));
        }
        Ok(Self {
            q0,
            p0,
            r1,
            theta: theta.rem_euclid(2.0 * PI),
        })
    }

    /// Coherent state centered at `(q0, p0)`.
    pub fn coherent(q0: f64, p0: f64) -> Result<Self> {
        Self::new(q0, p0, 0.0, 0.0)
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `δ_q²(r₁, θ) = cosh 2r₁ − cos θ sinh 2r₁`.
    pub fn position_variance(&self) -> f64 {
        (2.0 * self.r1).cosh() - self.theta.cos() * (2.0 * self.r1).sinh()
    }

    /// `δ_p²(r₁, θ) = cosh 2r₁ + cos θ sinh 2r₁`.
    pub fn momentum_variance(&self) -> f64 {
        (2.0 * self.r1).cosh() + self.theta.cos() * (2.0 * self.r1).sinh()
    }

    /// Complex position wavefunction, with the square-root prefactor
    /// evaluated literally on the principal branch.
    pub fn wavefunction(&self, q: f64) -> Complex64 {
        let cosh_r = self.r1.cosh();
        let sinh_r = self.r1.sinh();
        let phase = Complex64::from_polar(1.0, self.theta);
        // z = cosh r1 - e^{iθ} sinh r1 (never zero: |z|² = δ_q² > 0)
        let z = Complex64::new(cosh_r, 0.0) - phase * sinh_r;
        let z_conj = z.conj();

        let prefactor = (0.5 / PI).powf(0.25) * z_conj.sqrt() / (z.norm().sqrt() * z_conj.norm().sqrt());
        let momentum_phase = Complex64::new(0.0, 0.5 * self.p0 * (q - 0.5 * self.q0)).exp();
        let width = (Complex64::new(cosh_r, 0.0) + phase * sinh_r) / z;
        let dq = q - self.q0;
        let envelope = (-0.25 * width * dq * dq).exp();
        prefactor * momentum_phase * envelope
    }

    /// Measurement-displaced position density
    /// `[2π δ_q²]^{-1/2} exp(−(q − X₀)²/(2 δ_q²))`, `X₀ = q₀ + p₁`.
    pub fn displaced_position_density(&self, p1: f64, q: f64) -> f64 {
        let var = self.position_variance();
        let d = q - (self.q0 + p1);
        (2.0 * PI * var).sqrt().recip() * (-d * d / (2.0 * var)).exp()
    }

    /// Parameters of `F†|α, ξ⟩` (a −π/2 phase-space rotation): the state
    /// whose position wavefunction is the momentum wavefunction of `self`.
    /// Used to prepare the wire input of the grid oracle.
    pub fn fourier_conjugate(&self) -> SqueezedCoherent {
        SqueezedCoherent::new(self.p0, -self.q0, self.r1, self.theta + PI)
            .expect("rotation preserves validity")
    }
}

impl PositionDensity for SqueezedCoherent {
    fn log_density(&self, q: f64) -> f64 {
        let var = self.position_variance();
        let d = q - self.q0;
        -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
    }
    fn support(&self) -> (f64, f64) {
        (self.q0, self.position_variance().sqrt())
    }
}

/// Effective displacement `X₀ = q₀ + p₁` (single cluster) or
/// `X₀ = q₀ + P₁⁽ᴺ⁾` (chain); the shift that attenuates fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDisplacement {
    pub x0: f64,
}

impl EffectiveDisplacement {
    pub fn new(q0: f64, outcome: f64) -> Self {
        Self { x0: q0 + outcome }
    }
}
