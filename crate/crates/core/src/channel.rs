//! Free-space cascaded channel model of a Tx -> RIS -> Rx link.
//!
//! Each element `m` contributes `h_m * theta_m * g_m`, where `h_m` and `g_m`
//! are free-space coefficients `c / (4 pi f d) * exp(+j 2 pi d / lambda)` of
//! the Tx-element and element-Rx hops. There is no direct Tx-Rx term.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Reported power when the effective channel vanishes exactly.
pub const POWER_FLOOR_DBM: f64 = -200.0;

/// Reflection amplitude of an element switched to the pi state.
pub const PI_STATE_AMPLITUDE: f64 = 0.5012;

pub type ComplexCoeff = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("carrier frequency must be positive, got {0} Hz")]
    BadFrequency(f64),
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },
    #[error("{coeffs} channel coefficients but {states} element states")]
    LengthMismatch { coeffs: usize, states: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfParams {
    pub carrier_freq: f64,
    pub wavelength: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub tx_power_dbm: f64,
}

impl RfParams {
    pub fn new(
        carrier_freq: f64,
        tx_gain_db: f64,
        rx_gain_db: f64,
        tx_power_dbm: f64,
    ) -> Result<Self, ChannelError> {
        if !(carrier_freq > 0.0 && carrier_freq.is_finite()) {
            return Err(ChannelError::BadFrequency(carrier_freq));
        }
        for (what, v) in [
            ("tx_gain_db", tx_gain_db),
            ("rx_gain_db", rx_gain_db),
            ("tx_power_dbm", tx_power_dbm),
        ] {
            if !v.is_finite() {
                return Err(ChannelError::NonFinite { what });
            }
        }
        Ok(Self {
            carrier_freq,
            wavelength: SPEED_OF_LIGHT / carrier_freq,
            tx_gain_db,
            rx_gain_db,
            tx_power_dbm,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// `sqrt(G_T * G_R)` with both gains converted from dBi to linear.
    pub fn gain_factor(&self) -> f64 {
        (10f64.powf(self.tx_gain_db / 10.0) * 10f64.powf(self.rx_gain_db / 10.0)).sqrt()
    }
}

/// How the pi-state reflection loss is applied to the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeModel {
    /// Field amplitude 0.5012 in the pi state (-6 dB in power).
    #[default]
    Printed,
    /// Power ratio 0.5012 in the pi state, i.e. field amplitude sqrt(0.5012).
    PowerRatio,
}

impl AmplitudeModel {
    pub fn pi_amplitude(self) -> f64 {
        match self {
            AmplitudeModel::Printed => PI_STATE_AMPLITUDE,
            AmplitudeModel::PowerRatio => PI_STATE_AMPLITUDE.sqrt(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AmplitudeModel::Printed => "printed",
            AmplitudeModel::PowerRatio => "power-ratio",
        }
    }
}

/// Binary switch state of one unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PhaseState {
    #[default]
    Zero,
    Pi,
}

impl PhaseState {
    pub fn phase(self) -> f64 {
        match self {
            PhaseState::Zero => 0.0,
            PhaseState::Pi => PI,
        }
    }

    /// Reflection coefficient `A(state) * exp(j state)`. Both values are real,
    /// so this is returned exactly (no `cos(pi)` round-off).
    pub fn reflection(self, amplitude: AmplitudeModel) -> f64 {
        match self {
            PhaseState::Zero => 1.0,
            PhaseState::Pi => -amplitude.pi_amplitude(),
        }
    }

    pub fn bit(self) -> bool {
        self == PhaseState::Pi
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            PhaseState::Pi
        } else {
            PhaseState::Zero
        }
    }
}

/// One binary configuration of the whole surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfig {
    pub states: Vec<PhaseState>,
    /// Receiver phase hypothesis that produced the configuration, radians.
    /// `None` for configurations found by exhaustive search.
    pub hypothesis: Option<f64>,
    /// `20 log10 |h_eff|` predicted at the optimization target.
    pub predicted_gain_db: f64,
}

impl RisConfig {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Reduce an angle into `[0, 2pi)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid rounds tiny negative residues up to exactly 2pi.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Free-space coefficient over distance `d`.
pub fn freespace_coeff(d: f64, rf: &RfParams) -> Result<ComplexCoeff, ChannelError> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(ChannelError::NonPositiveDistance(d));
    }
    let magnitude = SPEED_OF_LIGHT / (4.0 * PI * rf.carrier_freq * d);
    Ok(Complex64::from_polar(magnitude, rf.wavenumber() * d))
}

pub fn cascaded_coeff(h: ComplexCoeff, g: ComplexCoeff) -> ComplexCoeff {
    h * g
}

/// Phase of the cascaded coefficient reduced into `[0, 2pi)`.
pub fn cascaded_phase(d_h: f64, d_g: f64, wavelength: f64) -> Result<f64, ChannelError> {
    for d in [d_h, d_g] {
        if !(d > 0.0 && d.is_finite()) {
            return Err(ChannelError::NonPositiveDistance(d));
        }
    }
    let k = TAU / wavelength;
    Ok(wrap_phase(k * d_h + k * d_g))
}

/// End-to-end channel `sqrt(G_T G_R) * sum_m casc_m * A(s_m) * exp(j s_m)`,
/// summed in ascending element order.
pub fn effective_channel(
    casc: &[ComplexCoeff],
    states: &[PhaseState],
    rf: &RfParams,
    amplitude: AmplitudeModel,
) -> Result<ComplexCoeff, ChannelError> {
    Ok(reflected_sum(casc, states, amplitude)? * rf.gain_factor())
}

/// The element sum without antenna gains.
pub fn reflected_sum(
    casc: &[ComplexCoeff],
    states: &[PhaseState],
    amplitude: AmplitudeModel,
) -> Result<ComplexCoeff, ChannelError> {
    if casc.len() != states.len() {
        return Err(ChannelError::LengthMismatch {
            coeffs: casc.len(),
            states: states.len(),
        });
    }
    Ok(casc
        .iter()
        .zip(states)
        .fold(Complex64::new(0.0, 0.0), |acc, (c, s)| {
            acc + c * s.reflection(amplitude)
        }))
}

/// `P_t + 20 log10 |h_eff|`, or [`POWER_FLOOR_DBM`] when the channel vanishes.
pub fn received_power_dbm(h_eff: ComplexCoeff, rf: &RfParams) -> f64 {
    let mag = h_eff.norm();
    if mag > 0.0 {
        (rf.tx_power_dbm + 20.0 * mag.log10()).max(POWER_FLOOR_DBM)
    } else {
        POWER_FLOOR_DBM
    }
}
