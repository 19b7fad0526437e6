//! Bundled scenarios: two measurement areas, each with a near and a far
//! receiver.

pub const PRESET_NAMES: [&str; 4] = ["area1_near", "area1_far", "area2_near", "area2_far"];

const AREA1_NEAR: &str = include_str!("../presets/area1_near.toml");
const AREA1_FAR: &str = include_str!("../presets/area1_far.toml");
const AREA2_NEAR: &str = include_str!("../presets/area2_near.toml");
const AREA2_FAR: &str = include_str!("../presets/area2_far.toml");

/// Scenario text of a bundled preset.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "area1_near" => Some(AREA1_NEAR),
        "area1_far" => Some(AREA1_FAR),
        "area2_near" => Some(AREA2_NEAR),
        "area2_far" => Some(AREA2_FAR),
        _ => None,
    }
}
