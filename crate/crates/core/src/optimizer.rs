//! Closed-form binary configuration of the surface for a target point.
//!
//! For a receiver phase hypothesis `t`, every element would ideally apply
//! `t - phi'_m`, where `phi'_m` is the cascaded phase through that element.
//! The ideal phases are rounded to the two available switch states, the
//! resulting link is evaluated for each hypothesis, and the strongest one
//! wins.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{self, ChannelError, ComplexCoeff, PhaseState, RisConfig};
use crate::geometry::Vec3;
use crate::scenario::{evenly_spaced, Scene};

/// Largest surface the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_ELEMENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("hypothesis set must not be empty")]
    NoHypotheses,
    #[error("hypotheses must lie in [0, 2pi) and be strictly increasing")]
    BadHypotheses,
    #[error("exhaustive search is limited to {max} elements, scene has {elements}", max = BRUTE_FORCE_MAX_ELEMENTS)]
    TooManyElements { elements: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Candidate receiver phases, strictly increasing in `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSet {
    values: Vec<f64>,
}

impl Default for HypothesisSet {
    /// `{0, pi/2, pi, 3pi/2}`.
    fn default() -> Self {
        Self {
            values: vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2],
        }
    }
}

impl HypothesisSet {
    pub fn new(values: Vec<f64>) -> Result<Self, OptimizerError> {
        let set = Self { values };
        set.validate()?;
        Ok(set)
    }

    /// `count` hypotheses evenly spaced over the circle.
    pub fn evenly_spaced(count: usize) -> Result<Self, OptimizerError> {
        Self::new(evenly_spaced(count))
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.values.is_empty() {
            return Err(OptimizerError::NoHypotheses);
        }
        let in_range = self.values.iter().all(|v| (0.0..TAU).contains(v));
        let increasing = self.values.windows(2).all(|w| w[0] < w[1]);
        if in_range && increasing {
            Ok(())
        } else {
            Err(OptimizerError::BadHypotheses)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Ideal element phase `hypothesis - cascaded_phase`, in `[0, 2pi)`.
pub fn continuous_phase(cascaded_phase: f64, hypothesis: f64) -> f64 {
    channel::wrap_phase(hypothesis - cascaded_phase)
}

/// Rounds a phase to the nearest switch state: pi on `[pi/2, 3pi/2)`, zero
/// elsewhere. The input is wrapped into `[0, 2pi)` first.
pub fn quantize(tau: f64) -> PhaseState {
    let tau = channel::wrap_phase(tau);
    if (FRAC_PI_2..3.0 * FRAC_PI_2).contains(&tau) {
        PhaseState::Pi
    } else {
        PhaseState::Zero
    }
}

/// One evaluated hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub hypothesis: f64,
    pub states: Vec<PhaseState>,
    pub h_eff: ComplexCoeff,
}

/// Cascaded phases and coefficients of every element towards `target`.
pub(crate) struct TargetChannel {
    pub phases: Vec<f64>,
    pub casc: Vec<ComplexCoeff>,
}

pub(crate) fn target_channel(scene: &Scene, target: Vec3) -> Result<TargetChannel, ChannelError> {
    let rf = scene.rf();
    let dg = scene.distances_to(target)?;
    let phases = scene
        .tx_distances
        .iter()
        .zip(&dg)
        .map(|(dh, dg)| channel::cascaded_phase(*dh, *dg, rf.wavelength))
        .collect::<Result<Vec<_>, _>>()?;
    let casc = scene
        .tx_coeffs
        .iter()
        .zip(&dg)
        .map(|(h, d)| {
            Ok(channel::cascaded_coeff(
                *h,
                channel::freespace_coeff(*d, rf)?,
            ))
        })
        .collect::<Result<Vec<_>, ChannelError>>()?;
    Ok(TargetChannel { phases, casc })
}

fn evaluate(scene: &Scene, tc: &TargetChannel, hypothesis: f64) -> Result<Candidate, ChannelError> {
    let states: Vec<PhaseState> = tc
        .phases
        .iter()
        .map(|p| quantize(continuous_phase(*p, hypothesis)))
        .collect();
    let h_eff = channel::effective_channel(&tc.casc, &states, scene.rf(), scene.amplitude())?;
    Ok(Candidate {
        hypothesis,
        states,
        h_eff,
    })
}

/// Quantized configuration for every hypothesis in the scene's set, in set
/// order.
pub fn hypothesis_candidates(
    scene: &Scene,
    target: Vec3,
) -> Result<Vec<Candidate>, OptimizerError> {
    let tc = target_channel(scene, target)?;
    scene
        .scenario
        .optimizer
        .hypotheses
        .values()
        .iter()
        .map(|t| evaluate(scene, &tc, *t).map_err(Into::into))
        .collect()
}

fn into_config(c: Candidate) -> RisConfig {
    RisConfig {
        states: c.states,
        hypothesis: Some(c.hypothesis),
        predicted_gain_db: 20.0 * c.h_eff.norm().log10(),
    }
}

/// Best quantized configuration for `target`. Ties between hypotheses go to
/// the earliest one in the set.
pub fn optimize_config(scene: &Scene, target: Vec3) -> Result<RisConfig, OptimizerError> {
    let mut best: Option<Candidate> = None;
    for c in hypothesis_candidates(scene, target)? {
        if best
            .as_ref()
            .is_none_or(|b| c.h_eff.norm() > b.h_eff.norm())
        {
            best = Some(c);
        }
    }
    Ok(into_config(best.expect("hypothesis set is never empty")))
}

/// Exhaustive search over all `2^N` switch patterns for `target`.
///
/// Bit `m` of the pattern index is element `m` (set means pi). Ties go to the
/// numerically smallest pattern.
pub fn brute_force_config(scene: &Scene, target: Vec3) -> Result<RisConfig, OptimizerError> {
    let n = scene.len();
    if n > BRUTE_FORCE_MAX_ELEMENTS {
        return Err(OptimizerError::TooManyElements { elements: n });
    }
    let casc = scene.cascade_to(target)?;
    let rf = scene.rf();
    let amplitude = scene.amplitude();

    let mut states = vec![PhaseState::Zero; n];
    let mut best_pattern = 0u32;
    let mut best = Complex64::new(0.0, 0.0);
    for pattern in 0u32..(1u32 << n) {
        for (m, s) in states.iter_mut().enumerate() {
            *s = PhaseState::from_bit(pattern >> m & 1 == 1);
        }
        let h = channel::effective_channel(&casc, &states, rf, amplitude)?;
        if pattern == 0 || h.norm() > best.norm() {
            best = h;
            best_pattern = pattern;
        }
    }
    Ok(RisConfig {
        states: (0..n)
            .map(|m| PhaseState::from_bit(best_pattern >> m & 1 == 1))
            .collect(),
        hypothesis: None,
        predicted_gain_db: 20.0 * best.norm().log10(),
    })
}
