//! Sequential teleportation through concatenated clusters with intermediate
//! corrections. Each completed stage multiplies the running density by a
//! displaced Gaussian envelope; the product of envelopes collapses to a
//! single composite Gaussian (times a scale factor tracked in logs), so an
//! n-stage chain is equivalent to one cluster with the composite envelope.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{self, Gaussian1D};
use crate::measurement::{self, SelectivityWindow};
use crate::optim;
use crate::quad;
use crate::states::{PositionDensity, SqueezedCoherent, SqueezedVacuum};
use crate::teleport;

/// Per-stage configuration: the ancilla plus either a fixed (quasi-selective)
/// outcome or a selectivity window still to be measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageOutcome {
    Fixed(f64),
    Window(SelectivityWindow),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub vac: SqueezedVacuum,
    pub outcome: StageOutcome,
}

impl Stage {
    pub fn fixed(vac: SqueezedVacuum, p1: f64) -> Self {
        Self {
            vac,
            outcome: StageOutcome::Fixed(p1),
        }
    }

    pub fn windowed(vac: SqueezedVacuum, window: SelectivityWindow) -> Self {
        Self {
            vac,
            outcome: StageOutcome::Window(window),
        }
    }

    fn fixed_outcome(&self) -> Result<f64> {
        match self.outcome {
            StageOutcome::Fixed(p1) => Ok(p1),
            StageOutcome::Window(_) => Err(Error::Usage(
                "stage still has an open window where a fixed outcome is required".into(),
            )),
        }
    }
}

/// A chain of clusters fed by `input`.
#[derive(Debug, Clone)]
pub struct ChainSpec<D> {
    pub input: D,
    pub stages: Vec<Stage>,
}

impl<D: PositionDensity> ChainSpec<D> {
    pub fn new(input: D, stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Usage("a chain needs at least one stage".into()));
        }
        Ok(Self { input, stages })
    }
}

/// Composite Gaussian equivalent to a product of stage envelopes.
#[derive(Debug, Clone, Copy)]
pub struct CompositeEnvelope {
    pub gaussian: Gaussian1D,
    pub net_center: f64,
    pub net_variance: f64,
    pub scale_log: f64,
}

/// Collapse the (fixed-outcome) stages into one envelope via the
/// product-of-Gaussians recursion.
pub fn composite_envelope(stages: &[Stage]) -> Result<CompositeEnvelope> {
    if stages.is_empty() {
        return Err(Error::Usage("composite_envelope needs at least one stage".into()));
    }
    let factors: Vec<(f64, f64)> = stages
        .iter()
        .map(|stage| Ok((stage.vac.position_variance(), stage.fixed_outcome()?)))
        .collect::<Result<_>>()?;
    let product = gaussian::gaussian_product(&factors)?;
    Ok(CompositeEnvelope {
        gaussian: product.composite,
        net_center: product.composite.center(),
        net_variance: product.composite.variance(),
        scale_log: product.scale_log,
    })
}

/// Position density of the state entering stage `n`, after `n − 1` completed
/// stages: `ϱ(q) = N⁻² f²_{G(n−1)}(q + P₁⁽ⁿ⁻¹⁾) ρ(q)`, normalized.
pub struct ChainDensity<'a, D> {
    base: &'a D,
    envelope: Option<Gaussian1D>,
    log_norm_sq: f64,
    support: (f64, f64),
}

impl<'a, D: PositionDensity> ChainDensity<'a, D> {
    /// ln N² of the normalization.
    pub fn log_norm_sq(&self) -> f64 {
        self.log_norm_sq
    }

    pub fn envelope(&self) -> Option<&Gaussian1D> {
        self.envelope.as_ref()
    }
}

impl<'a, D: PositionDensity> PositionDensity for ChainDensity<'a, D> {
    fn log_density(&self, q: f64) -> f64 {
        let env = match &self.envelope {
            Some(g) => g.log_pdf(q),
            None => 0.0,
        };
        env + self.base.log_density(q) - self.log_norm_sq
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }
}

fn product_support<D: PositionDensity>(base: &D, envelope: Option<&Gaussian1D>) -> (f64, f64) {
    let (c, s) = base.support();
    match envelope {
        None => (c, s),
        Some(g) => {
            // precision-weighted combination; exact for Gaussian bases and a
            // sound truncation hint otherwise
            let (ce, ve) = (g.mean(), g.variance());
            let precision = 1.0 / (s * s) + 1.0 / ve;
            let center = (c / (s * s) + ce / ve) / precision;
            (center, precision.recip().sqrt())
        }
    }
}

/// Build the chain-modified density from the completed stages (empty slice
/// means the bare input: `f_{G(0)} ≡ 1`).
pub fn chain_density<'a, D: PositionDensity>(
    input: &'a D,
    completed: &[Stage],
) -> Result<ChainDensity<'a, D>> {
    let envelope = if completed.is_empty() {
        None
    } else {
        Some(composite_envelope(completed)?.gaussian)
    };
    let support = product_support(input, envelope.as_ref());
    let log_norm_sq = match &envelope {
        None => 0.0,
        Some(g) => {
            let (c, s) = input.support();
            let spread = g.variance().sqrt();
            let lo = (c - measurement::SUPPORT_SIGMAS * s)
                .min(g.mean() - measurement::SUPPORT_SIGMAS * spread);
            let hi = (c + measurement::SUPPORT_SIGMAS * s)
                .max(g.mean() + measurement::SUPPORT_SIGMAS * spread);
            let weighted = (g.mean() / g.variance() + c / (s * s))
                / (1.0 / g.variance() + 1.0 / (s * s));
            let r = quad::integrate_exp_log(
                |q| g.log_pdf(q) + input.log_density(q),
                lo,
                hi,
                &[g.mean(), c, weighted],
            )?;
            if r.log_value == f64::NEG_INFINITY {
                return Err(Error::DegenerateOutcome(
                    "chain density has vanishing normalization".into(),
                ));
            }
            r.log_value
        }
    };
    Ok(ChainDensity {
        base: input,
        envelope,
        log_norm_sq,
        support,
    })
}

/// Probability of teleportation at the last stage of the chain: stages
/// `1..n−1` must carry fixed outcomes, stage `n` a selectivity window.
pub fn chain_probability<D: PositionDensity>(spec: &ChainSpec<D>) -> Result<f64> {
    let (last, completed) = spec
        .stages
        .split_last()
        .ok_or_else(|| Error::Usage("a chain needs at least one stage".into()))?;
    let window = match last.outcome {
        StageOutcome::Window(w) => w,
        StageOutcome::Fixed(_) => {
            return Err(Error::Usage("the final stage must carry a selectivity window".into()))
        }
    };
    let rho = chain_density(&spec.input, completed)?;
    measurement::teleport_probability(&rho, &last.vac, &window)
}

/// Fidelity after `n` quasi-selective stages (all outcomes fixed), through
/// the composite-envelope reduction. For a single stage this is exactly the
/// single-cluster fidelity path.
pub fn chain_fidelity<D: PositionDensity>(spec: &ChainSpec<D>) -> Result<f64> {
    let composite = composite_envelope(&spec.stages)?;
    teleport::fidelity_with_envelope(&spec.input, composite.net_variance, composite.net_center)
}

/// Fidelity by the raw per-stage product (no envelope reduction); the scale
/// factors cancel between numerator and denominator, so this must agree
/// with [`chain_fidelity`] to near machine precision.
pub fn chain_fidelity_raw<D: PositionDensity>(spec: &ChainSpec<D>) -> Result<f64> {
    let outcomes: Vec<(f64, f64)> = spec
        .stages
        .iter()
        .map(|st| Ok((st.vac.position_variance(), st.fixed_outcome()?)))
        .collect::<Result<_>>()?;
    let (c, s) = spec.input.support();
    let mut lo = c - measurement::SUPPORT_SIGMAS * s;
    let mut hi = c + measurement::SUPPORT_SIGMAS * s;
    for &(var, p1) in &outcomes {
        let spread = var.sqrt();
        lo = lo.min(-p1 - measurement::SUPPORT_SIGMAS * spread);
        hi = hi.max(-p1 + measurement::SUPPORT_SIGMAS * spread);
    }
    let log_amplitude_sum = |q: f64| -> f64 {
        let mut acc = 0.0;
        for &(var, p1) in &outcomes {
            let d = q + p1;
            acc += -0.25 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (4.0 * var);
        }
        acc
    };
    // precision-weighted peak candidates for the two integrands
    let weighted = |amp_scale: f64| {
        let mut num = c / (s * s);
        let mut den = 1.0 / (s * s);
        for &(var, p1) in &outcomes {
            num += -p1 / (amp_scale * var);
            den += 1.0 / (amp_scale * var);
        }
        num / den
    };
    let num_hints = [c, weighted(2.0), weighted(1.0)];
    let log_num = quad::integrate_exp_log(
        |q| log_amplitude_sum(q) + spec.input.log_density(q),
        lo,
        hi,
        &num_hints,
    )?
    .log_value;
    let log_den = quad::integrate_exp_log(
        |q| 2.0 * log_amplitude_sum(q) + spec.input.log_density(q),
        lo,
        hi,
        &num_hints,
    )?
    .log_value;
    if log_den == f64::NEG_INFINITY {
        return Err(Error::DegenerateOutcome(
            "chain normalization vanishes; fidelity undefined".into(),
        ));
    }
    Ok((2.0 * log_num - log_den).exp())
}

/// Closed-form chain fidelity for a squeezed-coherent payload: the
/// single-cluster expression with the composite envelope substituted.
pub fn chain_fidelity_closed(s: &SqueezedCoherent, stages: &[Stage]) -> Result<f64> {
    let composite = composite_envelope(stages)?;
    Ok(teleport::fidelity_closed_with_envelope(
        s,
        composite.net_variance,
        composite.net_center,
    ))
}

/// Uniform scenario: payload `(q0, 0, r, θ)`, all ancillas squeezed by `r2`,
/// the first `n − 1` outcomes fixed at `intermediate`, and the n-th stage
/// carrying `window`.
pub fn uniform_probability_scenario(
    n: usize,
    r: f64,
    q0: f64,
    window: SelectivityWindow,
) -> Result<ChainSpec<SqueezedCoherent>> {
    if n < 1 {
        return Err(Error::Usage("chain length must be at least 1".into()));
    }
    let input = SqueezedCoherent::new(q0, 0.0, r, 0.0)?;
    let vac = SqueezedVacuum::new(r)?;
    let mut stages = vec![Stage::fixed(vac, q0); n - 1];
    stages.push(Stage::windowed(vac, window));
    ChainSpec::new(input, stages)
}

/// Uniform fixed-outcome scenario used for fidelity curves: payload
/// `(q0, 0, r, θ)` and `n` stages with shared squeezing and outcome.
pub fn uniform_fidelity_scenario(
    n: usize,
    r: f64,
    theta: f64,
    q0: f64,
    outcome: f64,
) -> Result<ChainSpec<SqueezedCoherent>> {
    if n < 1 {
        return Err(Error::Usage("chain length must be at least 1".into()));
    }
    let input = SqueezedCoherent::new(q0, 0.0, r, theta)?;
    let vac = SqueezedVacuum::new(r)?;
    let stages = vec![Stage::fixed(vac, outcome); n];
    ChainSpec::new(input, stages)
}

/// Optimal center for the final-stage window of `spec` at the given width.
/// All earlier stages must carry fixed outcomes.
pub fn optimize_chain_center<D: PositionDensity>(
    spec: &ChainSpec<D>,
    width: f64,
) -> Result<f64> {
    let (last, completed) = spec
        .stages
        .split_last()
        .ok_or_else(|| Error::Usage("a chain needs at least one stage".into()))?;
    let rho = chain_density(&spec.input, completed)?;
    measurement::optimize_window_center(&rho, &last.vac, width)
}

/// Rotation angle in `[0, 2π]` maximizing the chain fidelity at zero
/// effective displacement (`q0 = 0`, all outcomes 0, `r1 = r2 = r`).
pub fn optimize_theta(n: usize, r: f64) -> Result<f64> {
    let error = std::cell::RefCell::new(None);
    let objective = |theta: f64| {
        match uniform_fidelity_scenario(n, r, theta, 0.0, 0.0).and_then(|spec| chain_fidelity(&spec))
        {
            Ok(f) => f,
            Err(e) => {
                if error.borrow().is_none() {
                    *error.borrow_mut() = Some(e);
                }
                f64::NEG_INFINITY
            }
        }
    };
    let (theta, _) = optim::maximize(objective, 0.0, 2.0 * std::f64::consts::PI, 121, 1e-6)?;
    if let Some(e) = error.borrow_mut().take() {
        return Err(e);
    }
    Ok(theta)
}

/// Monte Carlo diagnostic: walk the chain sampling each stage's outcome from
/// its in-window distribution `P(p₁)`. Acceptance runs use fixed
/// quasi-selective outcomes instead; this exists to probe outcome spread.
pub fn sample_chain_outcomes<D: PositionDensity, R: Rng>(
    input: &D,
    stages: &[Stage],
    rng: &mut R,
) -> Result<Vec<f64>> {
    const LATTICE: usize = 1024;
    let mut fixed: Vec<Stage> = Vec::with_capacity(stages.len());
    let mut outcomes = Vec::with_capacity(stages.len());
    for stage in stages {
        let window = match stage.outcome {
            StageOutcome::Window(w) => w,
            StageOutcome::Fixed(p1) => {
                fixed.push(Stage::fixed(stage.vac, p1));
                outcomes.push(p1);
                continue;
            }
        };
        let rho = chain_density(input, &fixed)?;
        let mut cdf = Vec::with_capacity(LATTICE);
        let step = window.width() / (LATTICE - 1) as f64;
        let mut acc = 0.0;
        for i in 0..LATTICE {
            let p1 = window.lo() + step * i as f64;
            acc += measurement::outcome_distribution(&rho, &stage.vac, p1)?;
            cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::DegenerateOutcome(
                "no outcome probability mass inside the stage window".into(),
            ));
        }
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c < u).min(LATTICE - 1);
        let p1 = window.lo() + step * idx as f64;
        fixed.push(Stage::fixed(stage.vac, p1));
        outcomes.push(p1);
    }
    Ok(outcomes)
}
