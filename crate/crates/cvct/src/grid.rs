//! Uniform-grid wavefunctions and the ħ = 2 Fourier transform.
//!
//! Grids are centered: node `j` sits at `(j − n/2)·step`, with `n` a power of
//! two. The transform pair is
//!
//! ```text
//! ψ̃(p) = (2√π)⁻¹ ∫ dq e^{-ipq/2} ψ(q),    ψ(q) = (2√π)⁻¹ ∫ dp e^{+ipq/2} ψ̃(p)
//! ```
//!
//! discretized so that the conjugate grid has spacing `4π/(n·step)` and the
//! round trip is the exact identity. The Fourier *gate* (`F|ψ⟩`, a state →
//! state map rather than a change of representation) additionally needs the
//! grid to be self-dual, `step² = 4π/n`, so that momentum values land back on
//! position nodes.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tail mass (outer 4 bins per side) above which a state is deemed
/// unrepresentable on its grid.
const EDGE_FRACTION_LIMIT: f64 = 1e-8;
/// Relative tail mass allowed in the output of a transform before reporting
/// spectral leakage.
const LEAKAGE_LIMIT: f64 = 1e-6;
const EDGE_BINS: usize = 4;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
}

/// Complex amplitudes on a centered uniform grid.
#[derive(Debug, Clone)]
pub struct GridWavefunction {
    step: f64,
    basis: Basis,
    amps: Vec<Complex64>,
}

fn validate_points(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Usage(format!(
            "grid size must be a power of two >= 8, got {n}"
        )));
    }
    Ok(())
}

impl GridWavefunction {
    pub fn from_fn<F: FnMut(f64) -> Complex64>(
        step: f64,
        n: usize,
        basis: Basis,
        mut f: F,
    ) -> Result<Self> {
        validate_points(n)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Usage(format!("grid step must be positive, got {step}")));
        }
        let half = (n / 2) as f64;
        let amps = (0..n)
            .map(|j| f((j as f64 - half) * step))
            .collect();
        Ok(Self { step, basis, amps })
    }

    /// Grid with `step² = 4π/n`, on which the Fourier gate is an
    /// endomorphism.
    pub fn self_dual<F: FnMut(f64) -> Complex64>(n: usize, basis: Basis, f: F) -> Result<Self> {
        validate_points(n)?;
        Self::from_fn((4.0 * PI / n as f64).sqrt(), n, basis, f)
    }

    pub fn from_amplitudes(step: f64, basis: Basis, amps: Vec<Complex64>) -> Result<Self> {
        validate_points(amps.len())?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Usage(format!("grid step must be positive, got {step}")));
        }
        Ok(Self { step, basis, amps })
    }

    pub fn n(&self) -> usize {
        self.amps.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn half_width(&self) -> f64 {
        (self.n() / 2) as f64 * self.step
    }

    pub fn is_self_dual(&self) -> bool {
        (self.step * self.step * self.n() as f64 / (4.0 * PI) - 1.0).abs() < 1e-12
    }

    pub fn point(&self, j: usize) -> f64 {
        (j as f64 - (self.n() / 2) as f64) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(|j| self.point(j))
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn nearest_index(&self, x: f64) -> usize {
        let j = (x / self.step + (self.n() / 2) as f64).round();
        j.clamp(0.0, (self.n() - 1) as f64) as usize
    }

    /// Squared norm by the trapezoid rule.
    pub fn norm_sq(&self) -> f64 {
        let n = self.n();
        let bulk: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        self.step * (bulk - 0.5 * self.amps[0].norm_sqr() - 0.5 * self.amps[n - 1].norm_sqr())
    }

    /// Trapezoid inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let n = self.n();
        let mut acc = Complex64::default();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        acc -= 0.5 * (self.amps[0].conj() * other.amps[0]
            + self.amps[n - 1].conj() * other.amps[n - 1]);
        Ok(acc * self.step)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() || (self.step - other.step).abs() > 1e-12 * self.step
            || self.basis != other.basis
        {
            return Err(Error::Usage("wavefunctions live on different grids".into()));
        }
        Ok(())
    }

    /// Normalize in place; returns the squared norm before normalization.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm_sq = self.norm_sq();
        if !(norm_sq.is_finite() && norm_sq > 1e-300) {
            return Err(Error::DegenerateOutcome(format!(
                "cannot normalize state with squared norm {norm_sq:.3e}"
            )));
        }
        let inv = norm_sq.sqrt().recip();
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(norm_sq)
    }

    /// First moment of `|ψ|²` over the grid coordinate.
    pub fn mean(&self) -> f64 {
        let mut m = 0.0;
        let mut w = 0.0;
        for (j, a) in self.amps.iter().enumerate() {
            let d = a.norm_sqr();
            m += self.point(j) * d;
            w += d;
        }
        m / w
    }

    /// Central second moment of `|ψ|²`.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let mut v = 0.0;
        let mut w = 0.0;
        for (j, a) in self.amps.iter().enumerate() {
            let d = a.norm_sqr();
            let x = self.point(j) - mean;
            v += x * x * d;
            w += d;
        }
        v / w
    }

    /// Fraction of the squared norm living in the outer bins of the grid.
    pub fn edge_fraction(&self) -> f64 {
        let n = self.n();
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let edge: f64 = self.amps[..EDGE_BINS]
            .iter()
            .chain(&self.amps[n - EDGE_BINS..])
            .map(|a| a.norm_sqr())
            .sum();
        edge / total
    }

    fn check_edges(&self, limit: f64, what: &str) -> Result<()> {
        let frac = self.edge_fraction();
        if frac > limit {
            return Err(Error::Resolution(format!(
                "{what}: relative tail mass at grid edge {frac:.3e} exceeds {limit:.0e}"
            )));
        }
        Ok(())
    }

    /// Change of representation between the position and momentum bases
    /// under the ħ = 2 kernel. Errors if the input state already touches the
    /// grid edge or the output leaks spectrally.
    pub fn fourier_transform(&self) -> Result<Self> {
        self.check_edges(EDGE_FRACTION_LIMIT, "fourier transform input")?;
        let out = self.fourier_transform_unchecked();
        out.check_edges(LEAKAGE_LIMIT, "fourier transform output")?;
        Ok(out)
    }

    pub(crate) fn fourier_transform_unchecked(&self) -> Self {
        let inverse = self.basis == Basis::Momentum;
        let (amps, step) = centered_fft(&self.amps, self.step, inverse);
        Self {
            step,
            basis: match self.basis {
                Basis::Position => Basis::Momentum,
                Basis::Momentum => Basis::Position,
            },
            amps,
        }
    }

    fn require_position(&self, what: &str) -> Result<()> {
        if self.basis != Basis::Position {
            return Err(Error::Usage(format!("{what} requires a position-basis state")));
        }
        Ok(())
    }

    fn require_self_dual(&self, what: &str) -> Result<()> {
        if !self.is_self_dual() {
            return Err(Error::Usage(format!(
                "{what} requires a self-dual grid (step² = 4π/n)"
            )));
        }
        Ok(())
    }

    /// Fourier gate `F`: maps the state with position wavefunction `ψ(q)` to
    /// the state with position wavefunction `ψ̃(−q)`.
    pub fn fourier_gate(&self) -> Result<Self> {
        self.require_position("fourier gate")?;
        self.require_self_dual("fourier gate")?;
        self.check_edges(EDGE_FRACTION_LIMIT, "fourier gate input")?;
        let (mut amps, step) = centered_fft(&self.amps, self.step, false);
        mirror_in_place(&mut amps);
        let out = Self {
            step,
            basis: Basis::Position,
            amps,
        };
        out.check_edges(LEAKAGE_LIMIT, "fourier gate output")?;
        Ok(out)
    }

    /// Adjoint Fourier gate `F†` (the inverse of [`Self::fourier_gate`]).
    pub fn fourier_gate_adjoint(&self) -> Result<Self> {
        self.require_position("adjoint fourier gate")?;
        self.require_self_dual("adjoint fourier gate")?;
        self.check_edges(EDGE_FRACTION_LIMIT, "adjoint fourier gate input")?;
        let mut mirrored = self.amps.clone();
        mirror_in_place(&mut mirrored);
        let (amps, step) = centered_fft(&mirrored, self.step, true);
        let out = Self {
            step,
            basis: Basis::Position,
            amps,
        };
        out.check_edges(LEAKAGE_LIMIT, "adjoint fourier gate output")?;
        Ok(out)
    }

    /// Heisenberg–Weyl `X(r)`: `ψ(q) ↦ ψ(q − r)`, applied as a phase in the
    /// momentum representation so `r` need not be a multiple of the step.
    pub fn x_gate(&self, r: f64) -> Result<Self> {
        self.require_position("x gate")?;
        let mut tilde = self.fourier_transform()?;
        for (k, a) in tilde.amps.iter_mut().enumerate() {
            let p = (k as f64 - (self.n() / 2) as f64) * tilde.step;
            *a *= Complex64::from_polar(1.0, -0.5 * r * p);
        }
        tilde.fourier_transform()
    }

    /// Heisenberg–Weyl `Z(s)`: multiplication by `e^{i s q / 2}`.
    pub fn z_gate(&self, s: f64) -> Result<Self> {
        self.require_position("z gate")?;
        let mut out = self.clone();
        for (j, a) in out.amps.iter_mut().enumerate() {
            let q = self.point(j);
            *a *= Complex64::from_polar(1.0, 0.5 * s * q);
        }
        Ok(out)
    }

    /// Keep the central `n_keep` nodes (same step). Errors if the discarded
    /// region carries more than `1e-10` of the squared norm.
    pub fn central_slice(&self, n_keep: usize) -> Result<Self> {
        validate_points(n_keep)?;
        if n_keep > self.n() {
            return Err(Error::Usage("central_slice cannot grow the grid".into()));
        }
        let lo = self.n() / 2 - n_keep / 2;
        let hi = lo + n_keep;
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        let kept: f64 = self.amps[lo..hi].iter().map(|a| a.norm_sqr()).sum();
        if total > 0.0 && (total - kept) / total > 1e-10 {
            return Err(Error::Resolution(format!(
                "central_slice would discard {:.3e} of the state",
                (total - kept) / total
            )));
        }
        Ok(Self {
            step: self.step,
            basis: self.basis,
            amps: self.amps[lo..hi].to_vec(),
        })
    }

    /// `L²` distance minimized over a global phase; both states are assumed
    /// normalized.
    pub fn l2_distance_up_to_phase(&self, other: &Self) -> Result<f64> {
        let overlap = self.inner(other)?.norm();
        Ok((2.0 - 2.0 * overlap).max(0.0).sqrt())
    }
}

fn mirror_in_place(amps: &mut [Complex64]) {
    let n = amps.len();
    // index j -> (n - j) mod n; bin 0 is its own image (aliased tail bin)
    for j in 1..=(n / 2 - 1) {
        amps.swap(j, n - j);
    }
}

/// Centered discrete ħ = 2 Fourier transform. Returns the transformed
/// amplitudes and the conjugate grid step `4π/(n·step)`.
pub(crate) fn centered_fft(amps: &[Complex64], step: f64, inverse: bool) -> (Vec<Complex64>, f64) {
    let n = amps.len();
    let mut buf: Vec<Complex64> = amps
        .iter()
        .enumerate()
        .map(|(j, a)| if j % 2 == 1 { -a } else { *a })
        .collect();
    PLANNER.with(|planner| {
        let fft = if inverse {
            planner.borrow_mut().plan_fft_inverse(n)
        } else {
            planner.borrow_mut().plan_fft_forward(n)
        };
        fft.process(&mut buf);
    });
    let out_step = 4.0 * PI / (n as f64 * step);
    let scale = step / (2.0 * PI.sqrt());
    for (k, a) in buf.iter_mut().enumerate() {
        if k % 2 == 1 {
            *a = -*a;
        }
        *a *= scale;
    }
    (buf, out_step)
}

/// Two-mode position-basis wavefunction on the product of two centered grids.
#[derive(Debug, Clone)]
pub struct GridWavefunction2D {
    step1: f64,
    step2: f64,
    /// amps[i1 * n2 + i2]
    amps: Vec<Complex64>,
    n1: usize,
    n2: usize,
}

impl GridWavefunction2D {
    /// Rank-1 product `ψ₁(q₁)ψ₂(q₂)` of two position-basis states.
    pub fn from_product(mode1: &GridWavefunction, mode2: &GridWavefunction) -> Result<Self> {
        if mode1.basis() != Basis::Position || mode2.basis() != Basis::Position {
            return Err(Error::Usage("two-mode product needs position-basis factors".into()));
        }
        let n1 = mode1.n();
        let n2 = mode2.n();
        let mut amps = Vec::with_capacity(n1 * n2);
        for a in mode1.amps() {
            for b in mode2.amps() {
                amps.push(a * b);
            }
        }
        Ok(Self {
            step1: mode1.step(),
            step2: mode2.step(),
            amps,
            n1,
            n2,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn step1(&self) -> f64 {
        self.step1
    }
    pub fn step2(&self) -> f64 {
        self.step2
    }

    pub fn point1(&self, i: usize) -> f64 {
        (i as f64 - (self.n1 / 2) as f64) * self.step1
    }
    pub fn point2(&self, i: usize) -> f64 {
        (i as f64 - (self.n2 / 2) as f64) * self.step2
    }

    pub fn amp(&self, i1: usize, i2: usize) -> Complex64 {
        self.amps[i1 * self.n2 + i2]
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        let cell = self.step1 * self.step2;
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * cell
    }

    /// Marginal position density of mode 1 at each grid node.
    pub fn position_marginal_mode1(&self) -> Vec<f64> {
        (0..self.n1)
            .map(|i1| {
                self.amps[i1 * self.n2..(i1 + 1) * self.n2]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum::<f64>()
                    * self.step2
            })
            .collect()
    }

    /// Marginal position density of mode 2 at each grid node.
    pub fn position_marginal_mode2(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n2];
        for i1 in 0..self.n1 {
            for (i2, o) in out.iter_mut().enumerate() {
                *o += self.amps[i1 * self.n2 + i2].norm_sqr();
            }
        }
        for o in &mut out {
            *o *= self.step1;
        }
        out
    }

    /// Momentum first moment of mode 2 (spectral, per mode-1 row).
    pub fn momentum_mean_mode2(&self) -> f64 {
        let mut weighted = 0.0;
        let mut total = 0.0;
        let half = (self.n2 / 2) as f64;
        for i1 in 0..self.n1 {
            let row = &self.amps[i1 * self.n2..(i1 + 1) * self.n2];
            let (tilde, pstep) = centered_fft(row, self.step2, false);
            for (k, a) in tilde.iter().enumerate() {
                let p = (k as f64 - half) * pstep;
                let d = a.norm_sqr();
                weighted += p * d;
                total += d;
            }
        }
        weighted / total
    }

    /// Position first moment of mode 1.
    pub fn position_mean_mode1(&self) -> f64 {
        let marg = self.position_marginal_mode1();
        let mut weighted = 0.0;
        let mut total = 0.0;
        for (i, d) in marg.iter().enumerate() {
            weighted += self.point1(i) * d;
            total += d;
        }
        weighted / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::SqueezedCoherent;

    fn gaussian_state(n: usize, var: f64) -> GridWavefunction {
        GridWavefunction::self_dual(n, Basis::Position, |q| {
            Complex64::new((2.0 * PI * var).powf(-0.25) * (-q * q / (4.0 * var)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn norm_of_sampled_gaussian_is_one() {
        let psi = gaussian_state(2048, 1.0);
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_is_self_dual_under_transform() {
        let psi = gaussian_state(2048, 1.0);
        let tilde = psi.fourier_transform().unwrap();
        assert_eq!(tilde.basis(), Basis::Momentum);
        for (a, b) in psi.amps().iter().zip(tilde.amps()) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let s = SqueezedCoherent::new(0.7, -1.2, 0.5, 1.1).unwrap();
        let psi = GridWavefunction::self_dual(2048, Basis::Position, |q| s.wavefunction(q)).unwrap();
        let back = psi.fourier_transform().unwrap().fourier_transform().unwrap();
        for (a, b) in psi.amps().iter().zip(back.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn transform_maps_variance_to_reciprocal() {
        let psi = gaussian_state(4096, 0.25);
        let tilde = psi.fourier_transform().unwrap();
        assert!((psi.variance() - 0.25).abs() < 1e-8);
        assert!((tilde.variance() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn parseval_norm_preserved() {
        let s = SqueezedCoherent::new(-0.4, 0.9, -0.6, 2.3).unwrap();
        let psi = GridWavefunction::self_dual(4096, Basis::Position, |q| s.wavefunction(q)).unwrap();
        let tilde = psi.fourier_transform().unwrap();
        assert!((psi.norm_sq() - tilde.norm_sq()).abs() < 1e-10);
    }

    #[test]
    fn aliasing_is_reported() {
        // far too narrow a grid for a unit Gaussian
        let psi = GridWavefunction::from_fn(0.25, 16, Basis::Position, |q| {
            Complex64::new((-q * q / 4.0).exp(), 0.0)
        })
        .unwrap();
        assert!(matches!(psi.fourier_transform(), Err(Error::Resolution(_))));
    }

    #[test]
    fn fourier_gate_fourth_power_is_identity() {
        let s = SqueezedCoherent::new(0.5, 0.8, 0.4, 0.9).unwrap();
        let psi = GridWavefunction::self_dual(4096, Basis::Position, |q| s.wavefunction(q)).unwrap();
        let mut out = psi.clone();
        for _ in 0..4 {
            out = out.fourier_gate().unwrap();
        }
        // the overlap metric floors at sqrt(2·machine-eps)
        let d = out.l2_distance_up_to_phase(&psi).unwrap();
        assert!(d < 1e-7, "distance {d}");
        for (a, b) in out.amps().iter().zip(psi.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_gate_inverts_gate() {
        let s = SqueezedCoherent::new(-0.3, 0.4, -0.5, 2.0).unwrap();
        let psi = GridWavefunction::self_dual(4096, Basis::Position, |q| s.wavefunction(q)).unwrap();
        let back = psi.fourier_gate().unwrap().fourier_gate_adjoint().unwrap();
        for (a, b) in psi.amps().iter().zip(back.amps()) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn x_gate_shifts_position_mean() {
        let psi = gaussian_state(4096, 0.8);
        let shifted = psi.x_gate(1.37).unwrap();
        assert!((shifted.mean() - 1.37).abs() < 1e-8);
        let back = shifted.x_gate(-1.37).unwrap();
        assert!(psi.l2_distance_up_to_phase(&back).unwrap() < 1e-10);
    }

    #[test]
    fn z_gate_shifts_momentum_mean() {
        let psi = gaussian_state(4096, 1.0);
        let kicked = psi.z_gate(2.5).unwrap();
        let tilde = kicked.fourier_transform().unwrap();
        assert!((tilde.mean() - 2.5).abs() < 1e-8);
    }

    #[test]
    fn product_state_marginals() {
        let a = gaussian_state(256, 1.0);
        let b = gaussian_state(128, 0.5);
        let two = GridWavefunction2D::from_product(&a, &b).unwrap();
        assert!((two.norm_sq() - 1.0).abs() < 1e-10);
        let m1 = two.position_marginal_mode1();
        let sum1: f64 = m1.iter().sum::<f64>() * two.step1();
        assert!((sum1 - 1.0).abs() < 1e-10);
    }
}
