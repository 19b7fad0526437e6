use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_steer::io::{self, IoError};
use ris_steer::metrics::{self, AnalysisOptions, BroadeningVerdict, SelectivityReport};
use ris_steer::scenario::{self, RunMode};
use ris_steer::{
    channel, fieldmap, optimizer, presets, Error, PowerMap, RisConfig, Scenario, Scene,
};
use serde::Serialize;

use crate::args::Args;
use crate::error::CliError;

/// Span of the default PGM range below the peak, dB.
const PGM_SPAN_DB: f64 = 40.0;
/// Scenes drawn by a seeded brute-check.
const RANDOM_SCENES: usize = 100;
const RANDOM_MAX_ELEMENTS: usize = 12;

fn progress(msg: &str) {
    eprintln!("ris-steer: {msg}");
}

fn load(name: &str) -> Result<Scenario, CliError> {
    let path = Path::new(name);
    if path.exists() {
        return Ok(io::read_scenario(path)?);
    }
    match presets::preset(name) {
        Some(text) => Ok(io::parse_scenario(text).map_err(Error::from)?),
        None => Err(Error::from(IoError::Fs {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or preset"),
        })
        .into()),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| {
        Error::from(IoError::Fs {
            path: path.to_path_buf(),
            source,
        })
        .into()
    })
}

fn toml_text<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("reports serialize to toml")
}

struct Plan {
    mode: RunMode,
    out: PathBuf,
    workers: usize,
    scenario: Option<Scenario>,
}

fn plan(args: &Args) -> Result<Plan, CliError> {
    let scenario = args.scenario.as_deref().map(load).transpose()?;
    let run = scenario.as_ref().map(|s| s.run.clone()).unwrap_or_default();
    let mode = args.mode.or(run.mode).ok_or_else(|| {
        CliError::Usage("--mode is required when the scenario sets no run.mode".into())
    })?;
    let usage = |m: &str| Err(CliError::Usage(format!("{mode}: {m}")));
    match mode {
        RunMode::BruteCheck => match (&scenario, args.seed) {
            (Some(_), Some(_)) => return usage("--seed and --scenario are mutually exclusive"),
            (None, None) => return usage("needs --scenario or --seed"),
            _ => {}
        },
        _ if scenario.is_none() => return usage("--scenario is required"),
        RunMode::RxSweep if args.config.is_none() => return usage("--config is required"),
        RunMode::CompareNearFar if args.scenario2.is_none() => {
            return usage("--scenario2 is required")
        }
        _ => {}
    }
    if args.seed.is_some() && mode != RunMode::BruteCheck {
        return usage("--seed only applies to brute-check");
    }
    let out = args
        .out
        .clone()
        .or_else(|| run.out_dir.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Plan {
        mode,
        out,
        workers: args.workers.unwrap_or(run.workers),
        scenario,
    })
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let plan = plan(args)?;
    fs::create_dir_all(&plan.out).map_err(|source| {
        Error::from(IoError::Fs {
            path: plan.out.clone(),
            source,
        })
    })?;
    let scene = plan.scenario.clone().map(Scene::new).transpose()?;
    match plan.mode {
        RunMode::TargetSweep => target_sweep(args, &plan, scene.as_ref().unwrap()),
        RunMode::RxSweep => rx_sweep(args, &plan, scene.as_ref().unwrap()),
        RunMode::OptimizeSingle => optimize_single(&plan, scene.as_ref().unwrap()),
        RunMode::CompareNearFar => compare(args, &plan, scene.as_ref().unwrap()),
        RunMode::BruteCheck => brute_check(args, &plan, scene.as_ref()),
    }
}

fn analyze(scene: &Scene, map: &PowerMap) -> Result<SelectivityReport, CliError> {
    let grid = &scene.scenario.grid;
    let opts = AnalysisOptions {
        ris_origin: Some(scene.scenario.pose.origin),
        ..Default::default()
    };
    Ok(metrics::analyze_with(map, grid.project(scene.scenario.rx), &opts).map_err(Error::from)?)
}

#[derive(Serialize)]
struct MapReport<'a> {
    mode: &'a str,
    scenario: &'a str,
    digest: &'a str,
    elements: usize,
    rx_m: [f64; 3],
    csv: String,
    pgm: String,
    pgm_range_dbm: [f64; 2],
    selectivity: &'a SelectivityReport,
}

fn write_map(args: &Args, plan: &Plan, scene: &Scene, map: &PowerMap) -> Result<(), CliError> {
    let report = analyze(scene, map)?;
    let range = args
        .pgm_range
        .unwrap_or((report.peak_value_dbm - PGM_SPAN_DB, report.peak_value_dbm));
    let stem = map.mode.as_str().replace('-', "_");
    let (csv, pgm) = (format!("{stem}.csv"), format!("{stem}.pgm"));
    let pgm_bytes = io::powermap_pgm(map, range).map_err(Error::from)?;
    write(&plan.out.join(&csv), io::powermap_csv(map).as_bytes())?;
    write(&plan.out.join(&pgm), &pgm_bytes)?;
    let doc = MapReport {
        mode: map.mode.as_str(),
        scenario: &scene.scenario.name,
        digest: &scene.digest,
        elements: scene.len(),
        rx_m: scene.scenario.rx.to_array(),
        csv,
        pgm,
        pgm_range_dbm: [range.0, range.1],
        selectivity: &report,
    };
    write(&plan.out.join("report.toml"), toml_text(&doc).as_bytes())?;
    progress(&format!(
        "peak {:.2} dBm at cell {:?}, {:.3} m from the receiver; wrote {}",
        report.peak_value_dbm,
        report.peak_cell,
        report.peak_offset_from_rx_m,
        plan.out.display()
    ));
    Ok(())
}

fn target_sweep(args: &Args, plan: &Plan, scene: &Scene) -> Result<(), CliError> {
    progress(&format!(
        "target-sweep of `{}`: {} cells, {} elements",
        scene.scenario.name,
        scene.scenario.grid.len(),
        scene.len()
    ));
    let map = fieldmap::sweep_targets(scene, plan.workers).map_err(Error::from)?;
    write_map(args, plan, scene, &map)
}

fn rx_sweep(args: &Args, plan: &Plan, scene: &Scene) -> Result<(), CliError> {
    let path = args.config.as_ref().expect("checked in plan");
    let bytes = fs::read(path).map_err(|source| {
        Error::from(IoError::Fs {
            path: path.clone(),
            source,
        })
    })?;
    let config = RisConfig {
        states: io::unpack_states(&bytes, scene.len()).map_err(Error::from)?,
        hypothesis: None,
        predicted_gain_db: f64::NAN,
    };
    progress(&format!(
        "rx-sweep of `{}`: {} cells, {} elements",
        scene.scenario.name,
        scene.scenario.grid.len(),
        scene.len()
    ));
    let map = fieldmap::sweep_receivers(scene, &config, plan.workers).map_err(Error::from)?;
    write_map(args, plan, scene, &map)
}

#[derive(Serialize)]
struct ConfigReport<'a> {
    scenario: &'a str,
    digest: &'a str,
    elements: usize,
    pi_elements: usize,
    amplitude: &'a str,
    target_m: [f64; 3],
    hypothesis_rad: f64,
    predicted_gain_db: f64,
    predicted_power_dbm: f64,
    bitmap: &'a str,
}

fn optimize_single(plan: &Plan, scene: &Scene) -> Result<(), CliError> {
    let target = scene.scenario.rx;
    let config = optimizer::optimize_config(scene, target).map_err(Error::from)?;
    write(
        &plan.out.join("config.bin"),
        &io::pack_states(&config.states),
    )?;
    let casc = scene.cascade_to(target).map_err(Error::from)?;
    let h = channel::effective_channel(&casc, &config.states, scene.rf(), scene.amplitude())
        .map_err(Error::from)?;
    let doc = ConfigReport {
        scenario: &scene.scenario.name,
        digest: &scene.digest,
        elements: scene.len(),
        pi_elements: config.states.iter().filter(|s| s.bit()).count(),
        amplitude: scene.amplitude().as_str(),
        target_m: target.to_array(),
        hypothesis_rad: config
            .hypothesis
            .expect("closed form records its hypothesis"),
        predicted_gain_db: config.predicted_gain_db,
        predicted_power_dbm: channel::received_power_dbm(h, scene.rf()),
        bitmap: "config.bin",
    };
    write(&plan.out.join("config.toml"), toml_text(&doc).as_bytes())?;
    progress(&format!(
        "predicted gain {:.2} dB at the receiver; wrote {}",
        config.predicted_gain_db,
        plan.out.display()
    ));
    Ok(())
}

#[derive(Serialize)]
struct Side<'a> {
    scenario: &'a str,
    digest: &'a str,
    selectivity: SelectivityReport,
}

#[derive(Serialize)]
struct CompareReport<'a> {
    verdict: BroadeningVerdict,
    near: Side<'a>,
    far: Side<'a>,
}

fn compare(args: &Args, plan: &Plan, near: &Scene) -> Result<(), CliError> {
    let far = Scene::new(load(args.scenario2.as_deref().expect("checked in plan"))?)?;
    let mut sides = Vec::new();
    for (label, scene) in [("near", near), ("far", &far)] {
        progress(&format!(
            "{label}: target-sweep of `{}`",
            scene.scenario.name
        ));
        let map = fieldmap::sweep_targets(scene, plan.workers).map_err(Error::from)?;
        sides.push(Side {
            scenario: &scene.scenario.name,
            digest: &scene.digest,
            selectivity: analyze(scene, &map)?,
        });
    }
    let far_side = sides.pop().unwrap();
    let near_side = sides.pop().unwrap();
    let doc = CompareReport {
        verdict: metrics::compare_near_far(&near_side.selectivity, &far_side.selectivity),
        near: near_side,
        far: far_side,
    };
    write(&plan.out.join("compare.toml"), toml_text(&doc).as_bytes())?;
    progress(&format!(
        "depth ratio {:.3}, lateral ratio {:.3}; wrote {}",
        doc.verdict.depth_ratio,
        doc.verdict.lateral_ratio,
        plan.out.display()
    ));
    Ok(())
}

#[derive(Serialize)]
struct BruteReport {
    source: String,
    targets: usize,
    max_elements: usize,
    exhaustive_dominates: bool,
    /// Closed-form over exhaustive-search channel amplitude.
    ratio_min: f64,
    ratio_p5: f64,
    ratio_median: f64,
    ratio_max: f64,
    gap_db_mean: f64,
    gap_db_max: f64,
}

fn amplitude_ratio(scene: &Scene, target: ris_steer::Vec3) -> Result<f64, Error> {
    let casc = scene.cascade_to(target)?;
    let mag = |c: &RisConfig| -> Result<f64, Error> {
        Ok(channel::effective_channel(&casc, &c.states, scene.rf(), scene.amplitude())?.norm())
    };
    let brute = optimizer::brute_force_config(scene, target)?;
    let closed = optimizer::optimize_config(scene, target)?;
    Ok(mag(&closed)? / mag(&brute)?)
}

fn brute_check(args: &Args, plan: &Plan, scene: Option<&Scene>) -> Result<(), CliError> {
    let mut ratios = Vec::new();
    let mut max_elements = 0;
    let source = match (scene, args.seed) {
        (Some(scene), _) => {
            if scene.len() > optimizer::BRUTE_FORCE_MAX_ELEMENTS {
                return Err(Error::from(optimizer::OptimizerError::TooManyElements {
                    elements: scene.len(),
                })
                .into());
            }
            progress(&format!(
                "brute-check of `{}` at {} grid points",
                scene.scenario.name,
                scene.scenario.grid.len()
            ));
            max_elements = scene.len();
            for p in
                ris_steer::geometry::generate_grid(&scene.scenario.grid).map_err(Error::from)?
            {
                ratios.push(amplitude_ratio(scene, p)?);
            }
            format!("scenario {} ({})", scene.scenario.name, scene.digest)
        }
        (None, Some(seed)) => {
            progress(&format!(
                "brute-check of {RANDOM_SCENES} random scenes from seed {seed}"
            ));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..RANDOM_SCENES {
                let s = Scene::new(scenario::random_scenario(&mut rng, 1..=RANDOM_MAX_ELEMENTS))?;
                max_elements = max_elements.max(s.len());
                ratios.push(amplitude_ratio(&s, s.scenario.rx)?);
            }
            format!("random seed {seed}")
        }
        (None, None) => unreachable!("checked in plan"),
    };
    ratios.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = ratios.iter().map(|r| -20.0 * r.log10()).collect();
    let n = ratios.len();
    let doc = BruteReport {
        source,
        targets: n,
        max_elements,
        exhaustive_dominates: ratios.iter().all(|r| *r <= 1.0),
        ratio_min: ratios[0],
        ratio_p5: ratios[n * 5 / 100],
        ratio_median: ratios[n / 2],
        ratio_max: ratios[n - 1],
        gap_db_mean: gaps.iter().sum::<f64>() / n as f64,
        gap_db_max: gaps.iter().copied().fold(0.0, f64::max),
    };
    write(
        &plan.out.join("brute_check.toml"),
        toml_text(&doc).as_bytes(),
    )?;
    progress(&format!(
        "closed form reaches {:.4} of the exhaustive optimum at the 5th percentile; wrote {}",
        doc.ratio_p5,
        plan.out.display()
    ));
    Ok(())
}
