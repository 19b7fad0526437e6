//! Prints the statistics the acceptance suite freezes: near/far selectivity
//! of the bundled presets and the closed-form versus exhaustive-search gap.
//!
//! cargo run --release -p ris-steer --example calibrate

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_steer::metrics::{self, AnalysisOptions};
use ris_steer::{fieldmap, io, optimizer, presets, scenario, Scene};

fn main() {
    let mut reports = std::collections::BTreeMap::new();
    for name in presets::PRESET_NAMES {
        let scene =
            Scene::new(io::parse_scenario(presets::preset(name).unwrap()).unwrap()).unwrap();
        let map = fieldmap::sweep_targets(&scene, 0).unwrap();
        let rx = scene.scenario.grid.project(scene.scenario.rx);
        let opts = AnalysisOptions {
            ris_origin: Some(scene.scenario.pose.origin),
            ..Default::default()
        };
        let r = metrics::analyze_with(&map, rx, &opts).unwrap();
        let far_mean = metrics::mean_dbm_in_ring(&map, rx, 1.5, f64::INFINITY);
        let near_mean = metrics::mean_dbm_in_ring(&map, rx, 0.0, 0.2);
        println!(
            "{name}: peak {:.2} dBm at {:?} (offset {:.3} m), extents u {:.2} v {:.2}, \
             mean<0.2m {:.2?}, mean>=1.5m drop {:.2?}",
            r.peak_value_dbm,
            r.peak_cell,
            r.peak_offset_from_rx_m,
            r.halfpower_extent_u_m,
            r.halfpower_extent_v_m,
            near_mean,
            far_mean.map(|m| r.peak_value_dbm - m),
        );
        for d in &r.drop_at_radii {
            println!(
                "    r >= {:.2} m: mean drop {:.2} dB, max {:.2} dB ({} cells)",
                d.radius_m, d.mean_drop_db, d.max_drop_db, d.cells
            );
        }
        reports.insert(name, r);
    }
    for area in ["area1", "area2"] {
        let v = metrics::compare_near_far(
            &reports[&*format!("{area}_near")],
            &reports[&*format!("{area}_far")],
        );
        println!(
            "{area}: depth ratio {:.3}, lateral ratio {:.3}",
            v.depth_ratio, v.lateral_ratio
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ratios = Vec::new();
    for _ in 0..500 {
        let scene = Scene::new(scenario::random_scenario(&mut rng, 1..=12)).unwrap();
        let rx = scene.scenario.rx;
        let a = optimizer::optimize_config(&scene, rx)
            .unwrap()
            .predicted_gain_db;
        let b = optimizer::brute_force_config(&scene, rx)
            .unwrap()
            .predicted_gain_db;
        ratios.push(10f64.powf((a - b) / 20.0));
    }
    ratios.sort_by(f64::total_cmp);
    println!(
        "closed-form / exhaustive amplitude over 500 scenes: min {:.4} p5 {:.4} median {:.4}",
        ratios[0],
        ratios[ratios.len() * 5 / 100],
        ratios[ratios.len() / 2]
    );
}
