//! Scenario files, power-map export and switch-state bitmaps.
//!
//! # Scenario files
//!
//! TOML with units spelled out in key names. Sections `rf`, `ris`, `tx`,
//! `rx` and `grid` are required; `optimizer` and `run` are optional. Unknown
//! keys are rejected.
//!
//! ```toml
//! name = "example"
//!
//! [rf]
//! freq_hz = 5.375e9
//! tx_gain_dbi = 0.0
//! rx_gain_dbi = 0.0
//! tx_power_dbm = 0.0
//!
//! [ris]
//! modules_across = 3
//! modules_down = 2
//! cells_per_module_side = 16
//! module_width_m = 0.36
//! module_height_m = 0.247
//! origin_m = [0.0, 0.0, 3.6]
//! right = [1.0, 0.0, 0.0]
//! up = [0.0, 0.0, 1.0]
//! normal = [0.0, -1.0, 0.0]
//!
//! [tx]                      # exactly one of the three keys
//! boresight_distance_m = 0.587
//! # position_m = [x, y, z]
//! # patches_m = [[x, y, z], [x, y, z], [x, y, z], [x, y, z]]
//!
//! [rx]
//! position_m = [0.4, -2.5, 1.1]
//!
//! [grid]
//! origin_m = [-1.1, -1.0, 1.1]
//! axis_u = [1.0, 0.0, 0.0]
//! axis_v = [0.0, -1.0, 0.0]
//! count_u = 31
//! count_v = 31
//! spacing_m = 0.1
//!
//! [optimizer]               # optional
//! hypothesis_count = 4      # or hypotheses_rad = [...]
//! amplitude = "printed"     # or "power-ratio"
//!
//! [run]                     # optional
//! mode = "target-sweep"
//! workers = 0
//! out_dir = "out"
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::{Table, Value};

use crate::channel::{AmplitudeModel, PhaseState, RfParams};
use crate::fieldmap::PowerMap;
use crate::geometry::{GeometryError, GridSpec, Pose, RisLayout, Vec3};
use crate::optimizer::HypothesisSet;
use crate::scenario::{OptimizerSettings, RunSettings, Scenario, TxPlacement};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}missing key `{key}`", line_prefix(*.line))]
    Missing { key: String, line: Option<usize> },
    #[error("{}unknown key `{key}`", line_prefix(*.line))]
    Unknown { key: String, line: Option<usize> },
    #[error("{}`{key}` must be {expected}", line_prefix(*.line))]
    Type {
        key: String,
        expected: &'static str,
        line: Option<usize>,
    },
    #[error("{}`{key}`: {message}", line_prefix(*.line))]
    Invalid {
        key: String,
        message: String,
        line: Option<usize>,
    },
}

impl ScenarioError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ScenarioError::Syntax { .. } => None,
            ScenarioError::Missing { key, .. }
            | ScenarioError::Unknown { key, .. }
            | ScenarioError::Type { key, .. }
            | ScenarioError::Invalid { key, .. } => Some(key),
        }
    }
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("pgm range must satisfy min < max, got ({min}, {max})")]
    BadRange { min: f64, max: f64 },
    #[error("malformed power-map csv: {0}")]
    Csv(String),
    #[error("bitmap for {elements} elements needs {expected} bytes, got {got}")]
    BitmapLength {
        elements: usize,
        expected: usize,
        got: usize,
    },
    #[error("bitmap padding bits must be zero")]
    BitmapPadding,
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// scenario parsing

const SECTIONS: [(&str, &[&str]); 7] = [
    (
        "rf",
        &["freq_hz", "tx_gain_dbi", "rx_gain_dbi", "tx_power_dbm"],
    ),
    (
        "ris",
        &[
            "modules_across",
            "modules_down",
            "cells_per_module_side",
            "module_width_m",
            "module_height_m",
            "origin_m",
            "right",
            "up",
            "normal",
        ],
    ),
    ("tx", &["patches_m", "position_m", "boresight_distance_m"]),
    ("rx", &["position_m"]),
    (
        "grid",
        &[
            "origin_m",
            "axis_u",
            "axis_v",
            "count_u",
            "count_v",
            "spacing_m",
        ],
    ),
    (
        "optimizer",
        &["hypothesis_count", "hypotheses_rad", "amplitude"],
    ),
    ("run", &["mode", "workers", "out_dir"]),
];

/// Line lookup for diagnostics. `toml::Table` drops spans, so keys are
/// located textually: the `[section]` header, then `key =` below it.
struct Lines<'a> {
    text: &'a str,
}

impl Lines<'_> {
    fn header(&self, section: &str) -> Option<usize> {
        let want = format!("[{section}]");
        self.text
            .lines()
            .position(|l| l.trim_start().starts_with(&want))
            .map(|i| i + 1)
    }

    fn key(&self, dotted: &str) -> Option<usize> {
        let (section, key) = match dotted.split_once('.') {
            Some((s, k)) => (Some(s), k),
            None => (None, dotted),
        };
        let start = match section {
            Some(s) => self.header(s)?,
            None => 0,
        };
        for (i, line) in self.text.lines().enumerate().skip(start) {
            let t = line.trim_start();
            if t.starts_with('[') {
                break;
            }
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
        section.and_then(|s| self.header(s))
    }
}

struct Reader<'a> {
    root: Table,
    lines: Lines<'a>,
}

impl Reader<'_> {
    fn missing(&self, key: &str) -> ScenarioError {
        let section = key.split_once('.').map(|(s, _)| s).unwrap_or(key);
        ScenarioError::Missing {
            key: key.to_string(),
            line: self.lines.header(section),
        }
    }

    fn type_err(&self, key: &str, expected: &'static str) -> ScenarioError {
        ScenarioError::Type {
            key: key.to_string(),
            expected,
            line: self.lines.key(key),
        }
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            key: key.to_string(),
            message: message.into(),
            line: self.lines.key(key),
        }
    }

    fn check_unknown(&self) -> Result<(), ScenarioError> {
        for (name, value) in &self.root {
            if name == "name" {
                continue;
            }
            let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == name) else {
                return Err(ScenarioError::Unknown {
                    key: name.clone(),
                    line: self.lines.key(name).or_else(|| self.lines.header(name)),
                });
            };
            let Some(table) = value.as_table() else {
                return Err(self.type_err(name, "a table"));
            };
            for key in table.keys() {
                if !keys.contains(&key.as_str()) {
                    let dotted = format!("{name}.{key}");
                    return Err(ScenarioError::Unknown {
                        line: self.lines.key(&dotted),
                        key: dotted,
                    });
                }
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Value> {
        match key.split_once('.') {
            Some((s, k)) => self.root.get(s)?.as_table()?.get(k),
            None => self.root.get(key),
        }
    }

    fn has_section(&self, section: &str) -> bool {
        self.root.contains_key(section)
    }

    fn require(&self, key: &str) -> Result<&Value, ScenarioError> {
        self.get(key).ok_or_else(|| self.missing(key))
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64, ScenarioError> {
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            _ => return Err(self.type_err(key, "a number")),
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.invalid(key, "must be finite"))
        }
    }

    fn f64(&self, key: &str) -> Result<f64, ScenarioError> {
        self.number(key, self.require(key)?)
    }

    fn count(&self, key: &str) -> Result<usize, ScenarioError> {
        match self.require(key)? {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            Value::Integer(_) => Err(self.invalid(key, "must not be negative")),
            _ => Err(self.type_err(key, "a non-negative integer")),
        }
    }

    fn vec3_of(&self, key: &str, v: &Value) -> Result<Vec3, ScenarioError> {
        match v.as_array().map(|a| a.as_slice()) {
            Some([x, y, z]) => Ok(Vec3::new(
                self.number(key, x)?,
                self.number(key, y)?,
                self.number(key, z)?,
            )),
            _ => Err(self.type_err(key, "an array of 3 numbers")),
        }
    }

    fn vec3(&self, key: &str) -> Result<Vec3, ScenarioError> {
        self.vec3_of(key, self.require(key)?)
    }

    fn str(&self, key: &str) -> Result<Option<&str>, ScenarioError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.type_err(key, "a string")),
        }
    }

    fn geometry(&self, err: GeometryError) -> ScenarioError {
        let key = match &err {
            GeometryError::NonPositive { field, .. }
            | GeometryError::NonFinite { field }
            | GeometryError::NotUnit { field, .. } => scenario_key(field),
            GeometryError::NotOrthogonal { a, .. } => scenario_key(a),
            GeometryError::LeftHanded { .. } => "ris.normal",
            GeometryError::PatchCount(_) => "tx.patches_m",
        };
        let what = if key.starts_with("grid.") {
            "GridSpec invariant violated"
        } else if key.starts_with("ris.") {
            "surface invariant violated"
        } else {
            "invalid geometry"
        };
        self.invalid(key, format!("{what}: {err}"))
    }
}

fn scenario_key(field: &str) -> &'static str {
    match field {
        "modules_across" => "ris.modules_across",
        "modules_down" => "ris.modules_down",
        "cells_per_module_side" => "ris.cells_per_module_side",
        "module_width" => "ris.module_width_m",
        "module_height" => "ris.module_height_m",
        "pose.origin" => "ris.origin_m",
        "pose.right" => "ris.right",
        "pose.up" => "ris.up",
        "pose.normal" => "ris.normal",
        "grid.origin" => "grid.origin_m",
        "grid.spacing" => "grid.spacing_m",
        "grid.count_u" => "grid.count_u",
        "grid.count_v" => "grid.count_v",
        "grid.axis_u" => "grid.axis_u",
        "grid.axis_v" => "grid.axis_v",
        "tx.boresight_distance_m" => "tx.boresight_distance_m",
        "tx.patches" => "tx.patches_m",
        _ => "tx",
    }
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        ScenarioError::Syntax {
            line,
            message: e.message().to_string(),
        }
    })?;
    let r = Reader {
        root,
        lines: Lines { text },
    };
    r.check_unknown()?;

    let name = r.str("name")?.unwrap_or("unnamed").to_string();

    for s in ["rf", "ris", "tx", "rx", "grid"] {
        if !r.has_section(s) {
            return Err(ScenarioError::Missing {
                key: s.to_string(),
                line: None,
            });
        }
    }

    let rf = RfParams::new(
        r.f64("rf.freq_hz")?,
        r.f64("rf.tx_gain_dbi")?,
        r.f64("rf.rx_gain_dbi")?,
        r.f64("rf.tx_power_dbm")?,
    )
    .map_err(|e| r.invalid("rf.freq_hz", e.to_string()))?;

    let layout = RisLayout {
        modules_across: r.count("ris.modules_across")?,
        modules_down: r.count("ris.modules_down")?,
        cells_per_module_side: r.count("ris.cells_per_module_side")?,
        module_width: r.f64("ris.module_width_m")?,
        module_height: r.f64("ris.module_height_m")?,
    };
    layout.validate().map_err(|e| r.geometry(e))?;
    let pose = Pose {
        origin: r.vec3("ris.origin_m")?,
        right: r.vec3("ris.right")?,
        up: r.vec3("ris.up")?,
        normal: r.vec3("ris.normal")?,
    };
    pose.validate().map_err(|e| r.geometry(e))?;

    let tx_keys: Vec<&str> = ["tx.patches_m", "tx.position_m", "tx.boresight_distance_m"]
        .into_iter()
        .filter(|k| r.get(k).is_some())
        .collect();
    let tx = match tx_keys.as_slice() {
        ["tx.patches_m"] => {
            let key = "tx.patches_m";
            let arr = r
                .require(key)?
                .as_array()
                .ok_or_else(|| r.type_err(key, "an array of 4 points"))?;
            if arr.len() != 4 {
                return Err(r.geometry(GeometryError::PatchCount(arr.len())));
            }
            let mut p = [Vec3::ZERO; 4];
            for (dst, v) in p.iter_mut().zip(arr) {
                *dst = r.vec3_of(key, v)?;
            }
            TxPlacement::Patches(p)
        }
        ["tx.position_m"] => TxPlacement::Position(r.vec3("tx.position_m")?),
        ["tx.boresight_distance_m"] => TxPlacement::Boresight {
            distance: r.f64("tx.boresight_distance_m")?,
        },
        [] => return Err(r.missing("tx.position_m")),
        _ => {
            return Err(r.invalid(
                tx_keys[1],
                "give exactly one of patches_m, position_m, boresight_distance_m",
            ))
        }
    };

    let rx = r.vec3("rx.position_m")?;

    let grid = GridSpec {
        origin: r.vec3("grid.origin_m")?,
        axis_u: r.vec3("grid.axis_u")?,
        axis_v: r.vec3("grid.axis_v")?,
        count_u: r.count("grid.count_u")?,
        count_v: r.count("grid.count_v")?,
        spacing: r.f64("grid.spacing_m")?,
    };
    grid.validate().map_err(|e| r.geometry(e))?;

    let mut optimizer = OptimizerSettings::default();
    match (
        r.get("optimizer.hypothesis_count"),
        r.get("optimizer.hypotheses_rad"),
    ) {
        (Some(_), Some(_)) => {
            return Err(r.invalid(
                "optimizer.hypotheses_rad",
                "give either hypothesis_count or hypotheses_rad",
            ))
        }
        (Some(_), None) => {
            let n = r.count("optimizer.hypothesis_count")?;
            optimizer.hypotheses = HypothesisSet::evenly_spaced(n)
                .map_err(|e| r.invalid("optimizer.hypothesis_count", e.to_string()))?;
        }
        (None, Some(v)) => {
            let key = "optimizer.hypotheses_rad";
            let arr = v
                .as_array()
                .ok_or_else(|| r.type_err(key, "an array of numbers"))?;
            let vals = arr
                .iter()
                .map(|x| r.number(key, x))
                .collect::<Result<Vec<_>, _>>()?;
            optimizer.hypotheses =
                HypothesisSet::new(vals).map_err(|e| r.invalid(key, e.to_string()))?;
        }
        (None, None) => {}
    }
    if let Some(a) = r.str("optimizer.amplitude")? {
        optimizer.amplitude = match a {
            "printed" => AmplitudeModel::Printed,
            "power-ratio" => AmplitudeModel::PowerRatio,
            _ => {
                return Err(r.invalid(
                    "optimizer.amplitude",
                    "expected \"printed\" or \"power-ratio\"",
                ))
            }
        };
    }

    let mut run = RunSettings::default();
    if let Some(m) = r.str("run.mode")? {
        run.mode = Some(m.parse().map_err(|e: String| r.invalid("run.mode", e))?);
    }
    if r.get("run.workers").is_some() {
        run.workers = r.count("run.workers")?;
    }
    run.out_dir = r.str("run.out_dir")?.map(str::to_string);

    Ok(Scenario {
        name,
        rf,
        layout,
        pose,
        tx,
        rx,
        grid,
        optimizer,
        run,
    })
}

pub fn read_scenario(path: &Path) -> Result<Scenario, crate::Error> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    Ok(parse_scenario(&text)?)
}

// ---------------------------------------------------------------------------
// scenario serialization

fn num(x: f64) -> String {
    // Debug formatting is the shortest representation that round-trips.
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn v3(v: Vec3) -> String {
    format!("[{}, {}, {}]", num(v.x), num(v.y), num(v.z))
}

fn physics_sections(s: &Scenario) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "name = {}", Value::String(s.name.clone()));
    let _ = writeln!(w, "\n[rf]");
    let _ = writeln!(w, "freq_hz = {}", num(s.rf.carrier_freq));
    let _ = writeln!(w, "tx_gain_dbi = {}", num(s.rf.tx_gain_db));
    let _ = writeln!(w, "rx_gain_dbi = {}", num(s.rf.rx_gain_db));
    let _ = writeln!(w, "tx_power_dbm = {}", num(s.rf.tx_power_dbm));
    let _ = writeln!(w, "\n[ris]");
    let _ = writeln!(w, "modules_across = {}", s.layout.modules_across);
    let _ = writeln!(w, "modules_down = {}", s.layout.modules_down);
    let _ = writeln!(
        w,
        "cells_per_module_side = {}",
        s.layout.cells_per_module_side
    );
    let _ = writeln!(w, "module_width_m = {}", num(s.layout.module_width));
    let _ = writeln!(w, "module_height_m = {}", num(s.layout.module_height));
    let _ = writeln!(w, "origin_m = {}", v3(s.pose.origin));
    let _ = writeln!(w, "right = {}", v3(s.pose.right));
    let _ = writeln!(w, "up = {}", v3(s.pose.up));
    let _ = writeln!(w, "normal = {}", v3(s.pose.normal));
    let _ = writeln!(w, "\n[tx]");
    match &s.tx {
        TxPlacement::Patches(p) => {
            let pts: Vec<String> = p.iter().map(|v| v3(*v)).collect();
            let _ = writeln!(w, "patches_m = [{}]", pts.join(", "));
        }
        TxPlacement::Position(p) => {
            let _ = writeln!(w, "position_m = {}", v3(*p));
        }
        TxPlacement::Boresight { distance } => {
            let _ = writeln!(w, "boresight_distance_m = {}", num(*distance));
        }
    }
    let _ = writeln!(w, "\n[rx]");
    let _ = writeln!(w, "position_m = {}", v3(s.rx));
    let _ = writeln!(w, "\n[grid]");
    let _ = writeln!(w, "origin_m = {}", v3(s.grid.origin));
    let _ = writeln!(w, "axis_u = {}", v3(s.grid.axis_u));
    let _ = writeln!(w, "axis_v = {}", v3(s.grid.axis_v));
    let _ = writeln!(w, "count_u = {}", s.grid.count_u);
    let _ = writeln!(w, "count_v = {}", s.grid.count_v);
    let _ = writeln!(w, "spacing_m = {}", num(s.grid.spacing));
    let _ = writeln!(w, "\n[optimizer]");
    let hyps: Vec<String> = s
        .optimizer
        .hypotheses
        .values()
        .iter()
        .map(|h| num(*h))
        .collect();
    let _ = writeln!(w, "hypotheses_rad = [{}]", hyps.join(", "));
    let _ = writeln!(w, "amplitude = \"{}\"", s.optimizer.amplitude.as_str());
    out
}

/// Canonical scenario text; [`parse_scenario`] reads it back unchanged.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = physics_sections(s);
    let _ = writeln!(out, "\n[run]");
    if let Some(m) = s.run.mode {
        let _ = writeln!(out, "mode = \"{m}\"");
    }
    let _ = writeln!(out, "workers = {}", s.run.workers);
    if let Some(d) = &s.run.out_dir {
        let _ = writeln!(out, "out_dir = {}", Value::String(d.clone()));
    }
    out
}

/// First 16 hex digits of the SHA-256 of the canonical scenario text,
/// excluding the `[run]` section so that run options do not change it.
pub fn scenario_digest(s: &Scenario) -> String {
    let hash = Sha256::digest(physics_sections(s).as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// power maps

/// Literal written for floor cells.
pub const CSV_FLOOR: &str = "floor";

/// A power map as stored on disk: values rounded to four decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct MapTable {
    pub mode: String,
    pub count_u: usize,
    pub count_v: usize,
    pub spacing: f64,
    pub digest: String,
    /// Indexed `i * count_v + j`; `None` marks floor cells.
    pub cells: Vec<Option<f64>>,
}

fn four_decimals(v: f64) -> String {
    let s = format!("{v:.4}");
    // Keep output free of negative zero.
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

impl From<&PowerMap> for MapTable {
    fn from(map: &PowerMap) -> Self {
        let cells = map
            .values
            .iter()
            .zip(&map.sentinel)
            .map(|(v, floor)| {
                if *floor {
                    None
                } else {
                    Some(four_decimals(*v).parse().expect("formatted float parses"))
                }
            })
            .collect();
        MapTable {
            mode: map.mode.to_string(),
            count_u: map.grid.count_u,
            count_v: map.grid.count_v,
            spacing: map.grid.spacing,
            digest: map.scenario_digest.clone(),
            cells,
        }
    }
}

impl MapTable {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i * self.count_v + j]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# mode={} count_u={} count_v={} spacing_m={} digest={}\n",
            self.mode,
            self.count_u,
            self.count_v,
            num(self.spacing),
            self.digest
        );
        for j in 0..self.count_v {
            let row: Vec<String> = (0..self.count_u)
                .map(|i| {
                    self.get(i, j)
                        .map(four_decimals)
                        .unwrap_or_else(|| CSV_FLOOR.into())
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, IoError> {
        let bad = |m: &str| IoError::Csv(m.to_string());
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix("# "))
            .ok_or_else(|| bad("missing header"))?;
        let field = |name: &str| -> Result<String, IoError> {
            header
                .split(' ')
                .find_map(|kv| kv.strip_prefix(name).and_then(|r| r.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| IoError::Csv(format!("header lacks {name}")))
        };
        let mode = field("mode")?;
        let count_u: usize = field("count_u")?.parse().map_err(|_| bad("bad count_u"))?;
        let count_v: usize = field("count_v")?.parse().map_err(|_| bad("bad count_v"))?;
        let spacing: f64 = field("spacing_m")?
            .parse()
            .map_err(|_| bad("bad spacing_m"))?;
        let digest = field("digest")?;

        let mut cells = vec![None; count_u * count_v];
        let mut rows = 0;
        for (j, line) in lines.enumerate() {
            if j >= count_v {
                return Err(bad("too many rows"));
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != count_u {
                return Err(IoError::Csv(format!(
                    "row {j} has {} fields, expected {count_u}",
                    fields.len()
                )));
            }
            for (i, f) in fields.into_iter().enumerate() {
                cells[i * count_v + j] = if f == CSV_FLOOR {
                    None
                } else {
                    Some(
                        f.parse()
                            .map_err(|_| IoError::Csv(format!("bad value `{f}` in row {j}")))?,
                    )
                };
            }
            rows += 1;
        }
        if rows != count_v {
            return Err(IoError::Csv(format!("{rows} rows, expected {count_v}")));
        }
        Ok(MapTable {
            mode,
            count_u,
            count_v,
            spacing,
            digest,
            cells,
        })
    }

    /// Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples). Width is
    /// `count_u`, row `j` of the image is grid row `j`. Values map linearly
    /// from `[min, max]` onto `[0, 65535]` after clamping; floor cells are 0.
    pub fn to_pgm(&self, range: (f64, f64)) -> Result<Vec<u8>, IoError> {
        let (min, max) = range;
        if min >= max || !min.is_finite() || !max.is_finite() {
            return Err(IoError::BadRange { min, max });
        }
        let mut out = format!("P5\n{} {}\n65535\n", self.count_u, self.count_v).into_bytes();
        for j in 0..self.count_v {
            for i in 0..self.count_u {
                let px = match self.get(i, j) {
                    None => 0u16,
                    Some(v) => (((v - min) / (max - min)).clamp(0.0, 1.0) * 65535.0).round() as u16,
                };
                out.extend_from_slice(&px.to_be_bytes());
            }
        }
        Ok(out)
    }
}

pub fn powermap_csv(map: &PowerMap) -> String {
    MapTable::from(map).to_csv()
}

pub fn write_powermap_csv(map: &PowerMap, path: &Path) -> Result<(), IoError> {
    fs::write(path, powermap_csv(map)).map_err(fs_err(path))
}

pub fn read_powermap_csv(path: &Path) -> Result<MapTable, IoError> {
    MapTable::from_csv(&fs::read_to_string(path).map_err(fs_err(path))?)
}

/// PGM bytes for `map`, computed from the same rounded values the CSV holds.
pub fn powermap_pgm(map: &PowerMap, range: (f64, f64)) -> Result<Vec<u8>, IoError> {
    MapTable::from(map).to_pgm(range)
}

pub fn write_powermap_pgm(map: &PowerMap, path: &Path, range: (f64, f64)) -> Result<(), IoError> {
    let bytes = powermap_pgm(map, range)?;
    fs::write(path, bytes).map_err(fs_err(path))
}

// ---------------------------------------------------------------------------
// switch-state bitmaps

/// One bit per element in element order, least significant bit first within
/// each byte, set for the pi state. The last byte is zero-padded.
pub fn pack_states(states: &[PhaseState]) -> Vec<u8> {
    let mut out = vec![0u8; states.len().div_ceil(8)];
    for (m, s) in states.iter().enumerate() {
        if s.bit() {
            out[m / 8] |= 1 << (m % 8);
        }
    }
    out
}

pub fn unpack_states(bytes: &[u8], elements: usize) -> Result<Vec<PhaseState>, IoError> {
    let expected = elements.div_ceil(8);
    if bytes.len() != expected {
        return Err(IoError::BitmapLength {
            elements,
            expected,
            got: bytes.len(),
        });
    }
    if !elements.is_multiple_of(8) && bytes[expected - 1] >> (elements % 8) != 0 {
        return Err(IoError::BitmapPadding);
    }
    Ok((0..elements)
        .map(|m| PhaseState::from_bit(bytes[m / 8] >> (m % 8) & 1 == 1))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldmap::SweepMode;
    use crate::presets;
    use crate::scenario::{random_scenario, RunMode};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn map(nu: usize, nv: usize, values: Vec<f64>) -> PowerMap {
        PowerMap {
            grid: GridSpec {
                origin: Vec3::ZERO,
                axis_u: Vec3::X,
                axis_v: Vec3::Y,
                count_u: nu,
                count_v: nv,
                spacing: 0.1,
            },
            sentinel: values.iter().map(|v| *v <= -200.0).collect(),
            values,
            mode: SweepMode::TargetSweep,
            scenario_digest: "0123456789abcdef".into(),
        }
    }

    #[test]
    fn preset_parses() {
        let s = parse_scenario(presets::preset("area1_near").unwrap()).unwrap();
        assert_eq!(s.element_count(), 1536);
        assert_eq!(s.rf.carrier_freq, 5.375e9);
    }

    #[test]
    fn missing_rx_position() {
        let text = presets::preset("area1_near")
            .unwrap()
            .replace("position_m = [0.4", "# position_m = [0.4");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key(), Some("rx.position_m"));
        assert!(err.to_string().contains("rx.position_m"), "{err}");
        assert!(matches!(err, ScenarioError::Missing { line: Some(_), .. }));
    }

    #[test]
    fn zero_spacing() {
        let text = presets::preset("area1_near")
            .unwrap()
            .replace("spacing_m = 0.1", "spacing_m = 0.0");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key(), Some("grid.spacing_m"));
        assert!(err.to_string().contains("GridSpec"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = presets::preset("area1_near")
            .unwrap()
            .replace("[rx]\n", "[rx]\nheight_m = 1.1\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key(), Some("rx.height_m"));
        let Some(line) = (match &err {
            ScenarioError::Unknown { line, .. } => *line,
            _ => None,
        }) else {
            panic!("{err}")
        };
        assert_eq!(text.lines().nth(line - 1).unwrap().trim(), "height_m = 1.1");
    }

    #[test]
    fn non_orthonormal_pose() {
        let text = presets::preset("area1_near")
            .unwrap()
            .replace("up = [0.0, 0.0, 1.0]", "up = [0.0, 0.1, 1.0]");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.key().unwrap().starts_with("ris."), "{err}");
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_scenario("name = \"x\"\n[rf\n").unwrap_err();
        assert!(
            matches!(err, ScenarioError::Syntax { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn wrong_type() {
        let text = presets::preset("area1_near")
            .unwrap()
            .replace("count_u = 31", "count_u = 31.5");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Type { .. }));
        assert_eq!(err.key(), Some("grid.count_u"));
    }

    #[test]
    fn csv_layout() {
        let m = map(1, 1, vec![-50.1234]);
        let csv = powermap_csv(&m);
        assert_eq!(csv.lines().nth(1), Some("-50.1234"));
        assert!(csv.starts_with(
            "# mode=target-sweep count_u=1 count_v=1 spacing_m=0.1 digest=0123456789abcdef\n"
        ));
        let m = map(2, 2, vec![-1.0, -2.0, -3.0, -200.0]);
        let csv = powermap_csv(&m);
        let body: Vec<&str> = csv.lines().skip(1).collect();
        // row j holds (i = 0, j), (i = 1, j)
        assert_eq!(body, vec!["-1.0000,-3.0000", "-2.0000,floor"]);
    }

    #[test]
    fn pgm_mapping() {
        let m = map(2, 1, vec![-20.0, -20.0]);
        let bytes = powermap_pgm(&m, (-30.0, -10.0)).unwrap();
        let header = b"P5\n2 1\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0x80, 0x00, 0x80, 0x00]);

        let m = map(3, 1, vec![-40.0, 0.0, -200.0]);
        let bytes = powermap_pgm(&m, (-30.0, -10.0)).unwrap();
        let px: Vec<u16> = bytes[13..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(px, vec![0, 65535, 0]);
        assert!(matches!(
            powermap_pgm(&m, (1.0, 1.0)),
            Err(IoError::BadRange { .. })
        ));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = map(
            3,
            2,
            vec![-50.123456, -61.0, -200.0, -49.99995, -70.5, -55.55555],
        );
        let csv = dir.path().join("m.csv");
        let pgm = dir.path().join("m.pgm");
        write_powermap_csv(&m, &csv).unwrap();
        write_powermap_pgm(&m, &pgm, (-80.0, -40.0)).unwrap();
        let table = read_powermap_csv(&csv).unwrap();
        assert_eq!(table, MapTable::from(&m));
        assert_eq!(
            table.to_pgm((-80.0, -40.0)).unwrap(),
            fs::read(&pgm).unwrap()
        );
        let err = write_powermap_csv(&m, &dir.path().join("nope/m.csv")).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn bitmap_layout() {
        use PhaseState::*;
        let states = [Pi, Zero, Zero, Zero, Zero, Zero, Zero, Zero, Zero, Pi];
        assert_eq!(pack_states(&states), vec![0x01, 0x02]);
        assert_eq!(unpack_states(&[0x01, 0x02], 10).unwrap(), states.to_vec());
        assert!(matches!(
            unpack_states(&[0x01], 10),
            Err(IoError::BitmapLength { .. })
        ));
        assert!(matches!(
            unpack_states(&[0x01, 0x06], 10),
            Err(IoError::BitmapPadding)
        ));
    }

    #[test]
    fn digest_ignores_run_section() {
        let mut s = parse_scenario(presets::preset("area1_near").unwrap()).unwrap();
        let d = scenario_digest(&s);
        s.run.workers = 8;
        assert_eq!(scenario_digest(&s), d);
        s.rx.x += 0.01;
        assert_ne!(scenario_digest(&s), d);
        assert_eq!(d.len(), 16);
    }

    proptest! {
        #[test]
        fn scenario_round_trips(seed in any::<u64>(), workers in 0usize..16, mode in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = random_scenario(&mut rng, 1..=256);
            s.run.workers = workers;
            s.run.mode = Some(RunMode::ALL[mode]);
            s.tx = match seed % 3 {
                0 => s.tx,
                1 => TxPlacement::Boresight { distance: 0.587 },
                _ => TxPlacement::Patches([s.rx, s.pose.origin, Vec3::new(0.1, 0.2, 0.3), Vec3::ZERO]),
            };
            let text = serialize_scenario(&s);
            prop_assert_eq!(parse_scenario(&text).unwrap(), s);
        }

        #[test]
        fn bitmap_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..100)) {
            let states: Vec<_> = bits.iter().map(|b| PhaseState::from_bit(*b)).collect();
            prop_assert_eq!(unpack_states(&pack_states(&states), states.len()).unwrap(), states);
        }
    }
}
