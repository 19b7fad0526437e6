//! Experiment description and its validated, precomputed form.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{self, AmplitudeModel, ChannelError, ComplexCoeff, RfParams};
use crate::geometry::{self, distance, GeometryError, GridSpec, Pose, RisLayout, Vec3};
use crate::optimizer::HypothesisSet;
use crate::Error;

/// Where the transmitter sits.
#[derive(Debug, Clone, PartialEq)]
pub enum TxPlacement {
    /// Four feed patches, collapsed onto their geometric center.
    Patches([Vec3; 4]),
    /// Explicit equivalent antenna position.
    Position(Vec3),
    /// On the panel normal through its center, this far in front of it.
    Boresight { distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunMode {
    TargetSweep,
    RxSweep,
    OptimizeSingle,
    CompareNearFar,
    BruteCheck,
}

impl RunMode {
    pub const ALL: [RunMode; 5] = [
        RunMode::TargetSweep,
        RunMode::RxSweep,
        RunMode::OptimizeSingle,
        RunMode::CompareNearFar,
        RunMode::BruteCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::TargetSweep => "target-sweep",
            RunMode::RxSweep => "rx-sweep",
            RunMode::OptimizeSingle => "optimize-single",
            RunMode::CompareNearFar => "compare-near-far",
            RunMode::BruteCheck => "brute-check",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    pub hypotheses: HypothesisSet,
    pub amplitude: AmplitudeModel,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            hypotheses: HypothesisSet::default(),
            amplitude: AmplitudeModel::Printed,
        }
    }
}

/// Run defaults; command-line flags take precedence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSettings {
    pub mode: Option<RunMode>,
    /// 0 selects one worker per available core.
    pub workers: usize,
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub rf: RfParams,
    pub layout: RisLayout,
    pub pose: Pose,
    pub tx: TxPlacement,
    pub rx: Vec3,
    pub grid: GridSpec,
    pub optimizer: OptimizerSettings,
    pub run: RunSettings,
}

impl Scenario {
    pub fn tx_position(&self) -> Result<Vec3, GeometryError> {
        let p = match &self.tx {
            TxPlacement::Patches(patches) => geometry::equivalent_tx_position(patches)?,
            TxPlacement::Position(p) => *p,
            TxPlacement::Boresight { distance } => {
                if !(*distance > 0.0 && distance.is_finite()) {
                    return Err(GeometryError::NonPositive {
                        field: "tx.boresight_distance_m",
                        value: *distance,
                    });
                }
                self.pose.origin + self.pose.normal * *distance
            }
        };
        if !p.is_finite() {
            return Err(GeometryError::NonFinite { field: "tx" });
        }
        Ok(p)
    }

    pub fn element_count(&self) -> usize {
        self.layout.element_count()
    }

    /// The scenario reflected across the plane through `point` with unit
    /// normal `normal`. The panel's `right` axis is negated after reflection
    /// so that the pose stays right-handed; the lattice maps onto itself.
    pub fn mirrored(&self, point: Vec3, normal: Vec3) -> Scenario {
        let r = |v: Vec3| v.reflect(point, normal);
        let rd = |v: Vec3| v.reflect_dir(normal);
        let mut out = self.clone();
        out.pose = Pose {
            origin: r(self.pose.origin),
            right: -rd(self.pose.right),
            up: rd(self.pose.up),
            normal: rd(self.pose.normal),
        };
        out.tx = match &self.tx {
            TxPlacement::Patches(p) => TxPlacement::Patches([r(p[0]), r(p[1]), r(p[2]), r(p[3])]),
            TxPlacement::Position(p) => TxPlacement::Position(r(*p)),
            TxPlacement::Boresight { distance } => TxPlacement::Boresight {
                distance: *distance,
            },
        };
        out.rx = r(self.rx);
        out.grid.origin = r(self.grid.origin);
        out.grid.axis_u = rd(self.grid.axis_u);
        out.grid.axis_v = rd(self.grid.axis_v);
        out
    }
}

/// A validated scenario with element positions and Tx-side coefficients
/// precomputed.
#[derive(Debug, Clone)]
pub struct Scene {
    pub scenario: Scenario,
    pub elements: Vec<Vec3>,
    pub tx: Vec3,
    /// Tx -> element distances.
    pub tx_distances: Vec<f64>,
    /// Tx -> element coefficients.
    pub tx_coeffs: Vec<ComplexCoeff>,
    pub digest: String,
}

impl Scene {
    pub fn new(scenario: Scenario) -> Result<Self, Error> {
        scenario.grid.validate()?;
        if !scenario.rx.is_finite() {
            return Err(GeometryError::NonFinite {
                field: "rx.position_m",
            }
            .into());
        }
        scenario.optimizer.hypotheses.validate()?;
        let elements = geometry::element_positions(&scenario.layout, &scenario.pose)?;
        let tx = scenario.tx_position()?;
        let tx_distances: Vec<f64> = elements.iter().map(|e| distance(tx, *e)).collect();
        let tx_coeffs = tx_distances
            .iter()
            .map(|d| channel::freespace_coeff(*d, &scenario.rf))
            .collect::<Result<Vec<_>, _>>()?;
        let digest = crate::io::scenario_digest(&scenario);
        Ok(Self {
            scenario,
            elements,
            tx,
            tx_distances,
            tx_coeffs,
            digest,
        })
    }

    pub fn rf(&self) -> &RfParams {
        &self.scenario.rf
    }

    pub fn amplitude(&self) -> AmplitudeModel {
        self.scenario.optimizer.amplitude
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element -> point distances.
    pub fn distances_to(&self, point: Vec3) -> Result<Vec<f64>, ChannelError> {
        self.elements
            .iter()
            .map(|e| {
                let d = distance(*e, point);
                if d > 0.0 && d.is_finite() {
                    Ok(d)
                } else {
                    Err(ChannelError::NonPositiveDistance(d))
                }
            })
            .collect()
    }

    /// Per-element cascaded coefficients `h_m g_m` towards `point`.
    pub fn cascade_to(&self, point: Vec3) -> Result<Vec<ComplexCoeff>, ChannelError> {
        let rf = self.rf();
        self.distances_to(point)?
            .into_iter()
            .zip(&self.tx_coeffs)
            .map(|(d, h)| {
                Ok(channel::cascaded_coeff(
                    *h,
                    channel::freespace_coeff(d, rf)?,
                ))
            })
            .collect()
    }
}

/// Random small scene for property checks and the exhaustive-search
/// comparison. The element count is drawn from `elements` among layouts of
/// the form `across * down * side^2`.
pub fn random_scenario<R: Rng>(rng: &mut R, elements: RangeInclusive<usize>) -> Scenario {
    let mut layouts = Vec::new();
    for side in 1..=16usize {
        for across in 1..=4usize {
            for down in 1..=4usize {
                if elements.contains(&(across * down * side * side)) {
                    layouts.push((across, down, side));
                }
            }
        }
    }
    assert!(
        !layouts.is_empty(),
        "no layout with element count in {elements:?}"
    );
    let (across, down, side) = layouts[rng.gen_range(0..layouts.len())];

    let carrier_freq = rng.gen_range(2.0e9..10.0e9);
    let rf = RfParams::new(
        carrier_freq,
        rng.gen_range(0.0..15.0),
        rng.gen_range(0.0..20.0),
        rng.gen_range(-10.0..20.0),
    )
    .expect("valid rf parameters");
    let layout = RisLayout {
        modules_across: across,
        modules_down: down,
        cells_per_module_side: side,
        module_width: rng.gen_range(0.05..0.4),
        module_height: rng.gen_range(0.05..0.4),
    };

    let pose = random_pose(rng);
    let lateral = |rng: &mut R, scale: f64| {
        pose.right * rng.gen_range(-scale..scale) + pose.up * rng.gen_range(-scale..scale)
    };
    let tx = pose.origin + pose.normal * rng.gen_range(0.3..1.0) + lateral(rng, 0.3);
    let rx = pose.origin + pose.normal * rng.gen_range(0.5..6.0) + lateral(rng, 2.0);

    Scenario {
        name: "random".into(),
        rf,
        layout,
        pose,
        tx: TxPlacement::Position(tx),
        rx,
        grid: GridSpec {
            origin: rx,
            axis_u: pose.right,
            axis_v: pose.up,
            count_u: 1,
            count_v: 1,
            spacing: 0.1,
        },
        optimizer: OptimizerSettings::default(),
        run: RunSettings::default(),
    }
}

fn random_pose<R: Rng>(rng: &mut R) -> Pose {
    // Orthonormalize two random directions; the third follows.
    let dir = |rng: &mut R| {
        Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    };
    loop {
        let a = dir(rng);
        let b = dir(rng);
        if a.norm() < 0.1 {
            continue;
        }
        let right = a * (1.0 / a.norm());
        let b = b - right * b.dot(right);
        if b.norm() < 0.1 {
            continue;
        }
        let up = b * (1.0 / b.norm());
        let normal = right.cross(up);
        let origin = Vec3::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.0..5.0),
        );
        let pose = Pose {
            origin,
            right,
            up,
            normal,
        };
        if pose.validate().is_ok() {
            return pose;
        }
    }
}

/// Evenly spaced hypotheses `2 pi k / count`.
pub(crate) fn evenly_spaced(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * TAU / count as f64).collect()
}
