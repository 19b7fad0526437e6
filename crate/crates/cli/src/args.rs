use std::path::PathBuf;

use clap::Parser;
use ris_steer::scenario::RunMode;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (bad or missing flags)
  3  scenario file error (syntax, missing, unknown or invalid key)
  4  geometry error
  5  channel error
  6  optimizer error (including the exhaustive-search size limit)
  7  sweep error
  8  metrics error
  9  file or format error

Errors are reported as one line on stderr:
  error[<kind>] exit=<code>[ key=<scenario key>]: <message>";

/// Binary-phase RIS beam-steering simulator.
///
/// SCENARIO is a TOML scenario file or the name of a bundled preset
/// (area1_near, area1_far, area2_near, area2_far).
#[derive(Debug, Parser)]
#[command(name = "ris-steer", version, after_help = EXIT_CODES)]
pub struct Args {
    /// Scenario file or preset name.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<String>,

    /// target-sweep, rx-sweep, optimize-single, compare-near-far or
    /// brute-check. Defaults to `run.mode` of the scenario.
    #[arg(long, value_name = "MODE")]
    pub mode: Option<RunMode>,

    /// Output directory. Defaults to `run.out_dir` of the scenario, then `out`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps; 0 uses every core. Defaults to
    /// `run.workers` of the scenario.
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,

    /// Packed switch-state bitmap held fixed by rx-sweep.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Far scenario for compare-near-far (--scenario is the near one).
    #[arg(long, value_name = "PATH")]
    pub scenario2: Option<String>,

    /// dBm values mapped to black and white in the PGM image. Defaults to
    /// 40 dB below the peak up to the peak.
    #[arg(long, value_name = "MIN,MAX", value_parser = parse_range, allow_hyphen_values = true)]
    pub pgm_range: Option<(f64, f64)>,

    /// brute-check only: draw random small scenes from this seed instead of
    /// reading a scenario.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected MIN,MAX")?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (min, max) = (parse(a)?, parse(b)?);
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(format!("need finite MIN < MAX, got {min},{max}"));
    }
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-80,-20"), Ok((-80.0, -20.0)));
        assert_eq!(parse_range(" -1.5 , 2"), Ok((-1.5, 2.0)));
        assert!(parse_range("3,3").is_err());
        assert!(parse_range("1").is_err());
        assert!(parse_range("a,2").is_err());
    }

    #[test]
    fn negative_range_is_not_a_flag() {
        let a = Args::try_parse_from(["ris-steer", "--pgm-range", "-90,-30", "--mode", "rx-sweep"])
            .unwrap();
        assert_eq!(a.pgm_range, Some((-90.0, -30.0)));
        assert_eq!(a.mode, Some(RunMode::RxSweep));
    }

    #[test]
    fn unknown_mode_is_rejected() {
        assert!(Args::try_parse_from(["ris-steer", "--mode", "sweep"]).is_err());
    }
}
