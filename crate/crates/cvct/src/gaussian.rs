//! Gaussian function algebra: squeezed-vacuum wavefunctions, the heat
//! kernel, and the product-of-Gaussians recursion that collapses a chain of
//! cluster envelopes into a single composite envelope.
//!
//! Conventions (ħ = 2 throughout):
//! * `squeezed_vacuum_wavefunction` is `f_G(q) = (V²/2π)^{1/4} e^{-V²q²/4}`
//!   with `V² = e^{2 r₂}`; its square is the normal PDF with variance `1/V²`.
//! * A [`Gaussian1D`] stores the displacement `center` such that the carried
//!   function is `f(q + center)`, i.e. the PDF peaks at `q = -center`. This
//!   matches the displaced-envelope convention used for cluster outcomes and
//!   avoids sign flips when composing chains.
//! * Scale factors live in log space so 500-stage products stay finite.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Normalized Gaussian with an optional log-scale weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    center: f64,
    variance: f64,
    log_weight: f64,
}

impl Gaussian1D {
    /// A weighted Gaussian PDF `e^{log_weight} · N(q; -center, variance)`.
    pub fn new(center: f64, variance: f64, log_weight: f64) -> Result<Self> {
        if !center.is_finite() || !log_weight.is_finite() {
            return Err(Error::Domain("Gaussian center and weight must be finite".into()));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::Domain(format!(
                "Gaussian variance must be positive and finite, got {variance}"
            )));
        }
        Ok(Self {
            center,
            variance,
            log_weight,
        })
    }

    /// Displacement `c` in the `f(q + c)` convention.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// First moment of the PDF (the peak sits at `-center`).
    pub fn mean(&self) -> f64 {
        -self.center
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    /// PDF value `e^{log_weight} (2πσ²)^{-1/2} exp(-(q+center)²/2σ²)`.
    pub fn pdf(&self, q: f64) -> f64 {
        self.log_pdf(q).exp()
    }

    /// ln of [`Self::pdf`]; finite for all finite `q`.
    pub fn log_pdf(&self, q: f64) -> f64 {
        let d = q + self.center;
        self.log_weight - 0.5 * (2.0 * PI * self.variance).ln() - d * d / (2.0 * self.variance)
    }

    /// Square root of the PDF: the quarter-power wavefunction form
    /// `(2πσ²)^{-1/4} exp(-(q+center)²/4σ²)` times `e^{log_weight/2}`.
    pub fn amplitude(&self, q: f64) -> f64 {
        (0.5 * self.log_pdf(q)).exp()
    }
}

/// Result of multiplying squared Gaussian envelopes pointwise.
#[derive(Debug, Clone, Copy)]
pub struct GaussianProductResult {
    /// Normalized composite PDF (log_weight 0).
    pub composite: Gaussian1D,
    /// ln of the Gaussian-shaped scale factor `S_N`.
    pub scale_log: f64,
}

/// Position wavefunction of the squeezed vacuum `|0, V_s⟩`:
/// `f_G(q) = (V²/2π)^{1/4} e^{-V² q²/4}` with `V² = e^{2 r₂}`.
pub fn squeezed_vacuum_wavefunction(r2: f64, q: f64) -> f64 {
    let vs2 = (2.0 * r2).exp();
    (vs2 / (2.0 * PI)).powf(0.25) * (-vs2 * q * q / 4.0).exp()
}

/// Heat kernel `k(q, t) = (4πt)^{-1/2} e^{-q²/4t}`.
///
/// Equals `squeezed_vacuum_wavefunction(r2, q)²` when `e^{-2 r₂} = 2t`.
pub fn heat_kernel(t: f64, q: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok((4.0 * PI * t).sqrt().recip() * (-q * q / (4.0 * t)).exp())
}

/// Pointwise product of Gaussian PDFs, given as `(variance, center)` pairs in
/// the `f(q + center)` convention.
///
/// The product of the normalized PDFs equals
/// `exp(scale_log) · composite.pdf(q)` at every point, with
///
/// * composite variance: reciprocal sum of the input variances,
/// * composite center: precision-weighted combination of the input centers,
/// * `scale_log`: the Gaussian-shaped scale factor, accumulated in logs.
pub fn gaussian_product(inputs: &[(f64, f64)]) -> Result<GaussianProductResult> {
    if inputs.is_empty() {
        return Err(Error::Usage("gaussian_product needs at least one factor".into()));
    }
    let mut precision_sum = 0.0;
    let mut weighted_center = 0.0;
    let mut center_sq_sum = 0.0;
    let mut log_var_sum = 0.0;
    for &(variance, center) in inputs {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::Domain(format!(
                "gaussian_product variance must be positive, got {variance}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::Domain("gaussian_product center must be finite".into()));
        }
        precision_sum += 1.0 / variance;
        weighted_center += center / variance;
        center_sq_sum += center * center / variance;
        log_var_sum += variance.ln();
    }

    let variance = 1.0 / precision_sum;
    let center = weighted_center * variance;
    let n = inputs.len() as f64;
    let scale_log = -0.5 * (n - 1.0) * (2.0 * PI).ln() + 0.5 * (variance.ln() - log_var_sum)
        - 0.5 * (center_sq_sum - center * center / variance);

    Ok(GaussianProductResult {
        composite: Gaussian1D::new(center, variance, 0.0)?,
        scale_log,
    })
}

/// Composite `(variance, center)` for a uniform chain: `n` clusters sharing
/// squeezing `r2` and outcome `q0` collapse to `((n e^{2 r₂})⁻¹, q0)`.
pub fn uniform_chain_params(n: usize, r2: f64, q0: f64) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::Usage("uniform_chain_params needs n >= 1".into()));
    }
    Ok(((n as f64 * (2.0 * r2).exp()).recip(), q0))
}
