//! Spatial selectivity of power maps.

use serde::Serialize;
use thiserror::Error;

use crate::fieldmap::PowerMap;
use crate::geometry::{distance, GridSpec, Vec3};

pub const DEFAULT_RADII_M: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const DEFAULT_THRESHOLDS_DB: [f64; 4] = [3.0, 6.0, 10.0, 20.0];
/// Level below the peak that bounds the half-power region.
pub const HALF_POWER_DB: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("power map has no non-floor cells")]
    AllSentinel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridAxis {
    U,
    V,
}

impl GridAxis {
    pub fn other(self) -> GridAxis {
        match self {
            GridAxis::U => GridAxis::V,
            GridAxis::V => GridAxis::U,
        }
    }
}

/// Drop below the peak over cells at least `radius_m` away from the peak
/// cell. All zero when no such cell exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropStat {
    pub radius_m: f64,
    pub max_drop_db: f64,
    pub mean_drop_db: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaAbove {
    pub below_peak_db: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectivityReport {
    pub peak_value_dbm: f64,
    pub peak_cell: (usize, usize),
    pub peak_offset_from_rx_m: f64,
    pub drop_at_radii: Vec<DropStat>,
    /// Width of the region within 3 dB of the peak along each axis through
    /// the peak cell. The contiguous run of cells is widened on each side to
    /// the -3 dB crossing, interpolated linearly in dB towards the next cell;
    /// at the grid edge or a floor cell the run ends half a cell out.
    pub halfpower_extent_u_m: f64,
    pub halfpower_extent_v_m: f64,
    /// Number of cells in the same contiguous runs.
    pub halfpower_cells_u: usize,
    pub halfpower_cells_v: usize,
    pub area_above: Vec<AreaAbove>,
    /// The grid axis pointing away from the surface (elevation-dominated),
    /// when the surface position is known.
    pub depth_axis: Option<GridAxis>,
}

impl SelectivityReport {
    pub fn extent(&self, axis: GridAxis) -> f64 {
        match axis {
            GridAxis::U => self.halfpower_extent_u_m,
            GridAxis::V => self.halfpower_extent_v_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub radii_m: Vec<f64>,
    pub thresholds_db: Vec<f64>,
    /// Surface center, used to label the depth axis.
    pub ris_origin: Option<Vec3>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            radii_m: DEFAULT_RADII_M.to_vec(),
            thresholds_db: DEFAULT_THRESHOLDS_DB.to_vec(),
            ris_origin: None,
        }
    }
}

/// Grid axis best aligned with the direction from the surface to the grid
/// center. Ties go to `V`.
pub fn depth_axis(grid: &GridSpec, ris_origin: Vec3) -> GridAxis {
    let center = grid.point(0, 0)
        + grid.axis_u * ((grid.count_u - 1) as f64 * grid.spacing / 2.0)
        + grid.axis_v * ((grid.count_v - 1) as f64 * grid.spacing / 2.0);
    let away = center - ris_origin;
    if away.dot(grid.axis_u).abs() > away.dot(grid.axis_v).abs() {
        GridAxis::U
    } else {
        GridAxis::V
    }
}

pub fn analyze(map: &PowerMap, rx_projection: Vec3) -> Result<SelectivityReport, MetricsError> {
    analyze_with(map, rx_projection, &AnalysisOptions::default())
}

pub fn analyze_with(
    map: &PowerMap,
    rx_projection: Vec3,
    opts: &AnalysisOptions,
) -> Result<SelectivityReport, MetricsError> {
    let (pi, pj, peak) = map.argmax().ok_or(MetricsError::AllSentinel)?;
    let grid = &map.grid;
    let peak_point = grid.point(pi, pj);

    let drop_at_radii = opts
        .radii_m
        .iter()
        .map(|&r| {
            let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
            for (i, j, v, floor) in map.cells() {
                if floor || (i, j) == (pi, pj) || distance(grid.point(i, j), peak_point) < r {
                    continue;
                }
                let drop = peak - v;
                max = max.max(drop);
                sum += drop;
                n += 1;
            }
            DropStat {
                radius_m: r,
                max_drop_db: max,
                mean_drop_db: if n > 0 { sum / n as f64 } else { 0.0 },
                cells: n,
            }
        })
        .collect();

    let level = peak - HALF_POWER_DB;
    let along_u = |i: usize| (!map.is_sentinel(i, pj)).then(|| map.get(i, pj));
    let along_v = |j: usize| (!map.is_sentinel(pi, j)).then(|| map.get(pi, j));
    let (cells_u, extent_u) = halfpower_run(pi, grid.count_u, level, along_u);
    let (cells_v, extent_v) = halfpower_run(pj, grid.count_v, level, along_v);

    let area_above = opts
        .thresholds_db
        .iter()
        .map(|&t| AreaAbove {
            below_peak_db: t,
            cells: map
                .cells()
                .filter(|&(_, _, v, floor)| !floor && v >= peak - t)
                .count(),
        })
        .collect();

    Ok(SelectivityReport {
        peak_value_dbm: peak,
        peak_cell: (pi, pj),
        peak_offset_from_rx_m: distance(peak_point, rx_projection),
        drop_at_radii,
        halfpower_extent_u_m: extent_u * grid.spacing,
        halfpower_extent_v_m: extent_v * grid.spacing,
        halfpower_cells_u: cells_u,
        halfpower_cells_v: cells_v,
        area_above,
        depth_axis: opts.ris_origin.map(|o| depth_axis(grid, o)),
    })
}

/// Cell count of the run through `center` with values at or above `level`,
/// and its interpolated width in units of the grid spacing.
fn halfpower_run(
    center: usize,
    len: usize,
    level: f64,
    at: impl Fn(usize) -> Option<f64>,
) -> (usize, f64) {
    let inside = |k: usize| at(k).is_some_and(|v| v >= level);
    let lo = center - (0..center).rev().take_while(|&k| inside(k)).count();
    let hi = center + (center + 1..len).take_while(|&k| inside(k)).count();
    let beyond = |edge: usize, next: Option<usize>| {
        let a = at(edge).unwrap_or(level);
        match next.and_then(&at) {
            Some(b) => (a - level) / (a - b),
            None => 0.5,
        }
    };
    let left = beyond(lo, lo.checked_sub(1));
    let right = beyond(hi, (hi + 1 < len).then_some(hi + 1));
    (hi - lo + 1, (hi - lo) as f64 + left + right)
}

/// Mean of the non-floor cell values whose grid point lies at a distance in
/// `[min_m, max_m)` from `center`.
pub fn mean_dbm_in_ring(map: &PowerMap, center: Vec3, min_m: f64, max_m: f64) -> Option<f64> {
    let (sum, n) = map
        .cells()
        .filter(|&(i, j, _, floor)| {
            let d = distance(map.grid.point(i, j), center);
            !floor && d >= min_m && d < max_m
        })
        .fold((0.0, 0usize), |(s, n), (_, _, v, _)| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Far-versus-near comparison of half-power extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadeningVerdict {
    pub ratio_u: f64,
    pub ratio_v: f64,
    pub broadened_u: bool,
    pub broadened_v: bool,
    pub depth_axis: GridAxis,
    pub depth_ratio: f64,
    pub lateral_ratio: f64,
    pub depth_broadened: bool,
}

/// Ratios far/near of half-power extents per axis. The depth axis comes from
/// the near report, falling back to the far one and then to `V`.
pub fn compare_near_far(near: &SelectivityReport, far: &SelectivityReport) -> BroadeningVerdict {
    let ratio_u = far.halfpower_extent_u_m / near.halfpower_extent_u_m;
    let ratio_v = far.halfpower_extent_v_m / near.halfpower_extent_v_m;
    let depth_axis = near.depth_axis.or(far.depth_axis).unwrap_or(GridAxis::V);
    let (depth_ratio, lateral_ratio) = match depth_axis {
        GridAxis::U => (ratio_u, ratio_v),
        GridAxis::V => (ratio_v, ratio_u),
    };
    BroadeningVerdict {
        ratio_u,
        ratio_v,
        broadened_u: ratio_u > 1.0,
        broadened_v: ratio_v > 1.0,
        depth_axis,
        depth_ratio,
        lateral_ratio,
        depth_broadened: depth_ratio > 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldmap::SweepMode;
    use proptest::prelude::*;

    fn grid(nu: usize, nv: usize) -> GridSpec {
        GridSpec {
            origin: Vec3::ZERO,
            axis_u: Vec3::X,
            axis_v: Vec3::Y,
            count_u: nu,
            count_v: nv,
            spacing: 0.1,
        }
    }

    fn map_from(nu: usize, nv: usize, f: impl Fn(usize, usize) -> f64) -> PowerMap {
        let g = grid(nu, nv);
        let values: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = g.cell(k);
                f(i, j)
            })
            .collect();
        PowerMap {
            grid: g,
            sentinel: vec![false; values.len()],
            values,
            mode: SweepMode::TargetSweep,
            scenario_digest: String::new(),
        }
    }

    #[test]
    fn constant_map() {
        let map = map_from(7, 5, |_, _| -42.0);
        let r = analyze(&map, Vec3::ZERO).unwrap();
        assert_eq!(r.peak_cell, (0, 0));
        assert!(r
            .drop_at_radii
            .iter()
            .all(|d| d.max_drop_db == 0.0 && d.mean_drop_db == 0.0));
        assert!((r.halfpower_extent_u_m - 0.7).abs() < 1e-12);
        assert!((r.halfpower_extent_v_m - 0.5).abs() < 1e-12);
        assert!(r.area_above.iter().all(|a| a.cells == 35));
    }

    #[test]
    fn single_spike() {
        let map = map_from(51, 51, |i, j| if (i, j) == (25, 25) { 0.0 } else { -40.0 });
        let rx = Vec3::new(2.5, 2.5, 0.0);
        let r = analyze(&map, rx).unwrap();
        assert_eq!(r.peak_cell, (25, 25));
        assert_eq!(r.peak_value_dbm, 0.0);
        assert!(r.peak_offset_from_rx_m < 1e-12);
        for d in &r.drop_at_radii {
            assert!(d.cells > 0);
            assert_eq!(d.mean_drop_db, 40.0);
            assert_eq!(d.max_drop_db, 40.0);
        }
        // Crossing 3/40 of a cell out on each side.
        assert!((r.halfpower_extent_u_m - 0.015).abs() < 1e-12);
        assert!((r.halfpower_extent_v_m - 0.015).abs() < 1e-12);
        assert_eq!((r.halfpower_cells_u, r.halfpower_cells_v), (1, 1));
        assert_eq!(r.area_above[0].cells, 1);
        assert_eq!(r.area_above[3].cells, 1);
    }

    #[test]
    fn all_sentinel_is_an_error() {
        let mut map = map_from(2, 2, |_, _| -200.0);
        map.sentinel = vec![true; 4];
        assert_eq!(analyze(&map, Vec3::ZERO), Err(MetricsError::AllSentinel));
    }

    #[test]
    fn sentinels_break_the_half_power_run() {
        let mut map = map_from(5, 1, |_, _| -10.0);
        map.sentinel[3] = true;
        map.values[3] = -200.0;
        let r = analyze(&map, Vec3::ZERO).unwrap();
        assert!((r.halfpower_extent_u_m - 0.3).abs() < 1e-12);
        assert_eq!(r.halfpower_cells_u, 3);
    }

    #[test]
    fn linear_slope_crosses_at_three_db() {
        // 1 dB per cell on each side of the peak: crossing exactly 3 cells out.
        let map = map_from(11, 1, |i, _| -((i as f64) - 5.0).abs());
        let r = analyze(&map, Vec3::ZERO).unwrap();
        assert_eq!(r.halfpower_cells_u, 7);
        assert!((r.halfpower_extent_u_m - 0.6).abs() < 1e-12);
        let map = map_from(5, 1, |i, _| -2.0 * ((i as f64) - 2.0).abs());
        let r = analyze(&map, Vec3::ZERO).unwrap();
        assert_eq!(r.halfpower_cells_u, 3);
        assert!((r.halfpower_extent_u_m - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ring_means() {
        let map = map_from(3, 1, |i, _| -(i as f64) * 10.0);
        assert_eq!(mean_dbm_in_ring(&map, Vec3::ZERO, 0.05, 1.0), Some(-15.0));
        assert_eq!(mean_dbm_in_ring(&map, Vec3::ZERO, 5.0, 6.0), None);
    }

    #[test]
    fn depth_axis_points_away_from_surface() {
        let g = grid(10, 10);
        assert_eq!(depth_axis(&g, Vec3::new(0.45, -3.0, 2.0)), GridAxis::V);
        assert_eq!(depth_axis(&g, Vec3::new(-3.0, 0.45, 2.0)), GridAxis::U);
    }

    fn report(u: f64, v: f64, depth: Option<GridAxis>) -> SelectivityReport {
        SelectivityReport {
            peak_value_dbm: -50.0,
            peak_cell: (0, 0),
            peak_offset_from_rx_m: 0.0,
            drop_at_radii: vec![],
            halfpower_extent_u_m: u,
            halfpower_extent_v_m: v,
            halfpower_cells_u: 0,
            halfpower_cells_v: 0,
            area_above: vec![],
            depth_axis: depth,
        }
    }

    #[test]
    fn identical_reports_do_not_broaden() {
        let r = report(0.3, 0.5, Some(GridAxis::V));
        let v = compare_near_far(&r, &r);
        assert_eq!((v.ratio_u, v.ratio_v), (1.0, 1.0));
        assert!(!v.broadened_u && !v.broadened_v && !v.depth_broadened);
    }

    #[test]
    fn depth_broadening() {
        let v = compare_near_far(
            &report(0.3, 0.3, Some(GridAxis::V)),
            &report(0.3, 0.9, Some(GridAxis::V)),
        );
        assert!((v.depth_ratio - 3.0).abs() < 1e-12);
        assert!(v.depth_broadened && v.broadened_v && !v.broadened_u);
        assert_eq!(v.lateral_ratio, 1.0);
        let w = compare_near_far(
            &report(0.3, 0.3, Some(GridAxis::U)),
            &report(0.6, 0.3, None),
        );
        assert_eq!(w.depth_axis, GridAxis::U);
        assert_eq!(w.depth_ratio, 2.0);
    }

    fn quarter_map() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (1usize..8, 1usize..8).prop_flat_map(|(nu, nv)| {
            (
                Just(nu),
                Just(nv),
                proptest::collection::vec((-200i32..0).prop_map(|q| q as f64 * 0.25), nu * nv),
            )
        })
    }

    proptest! {
        #[test]
        fn offset_only_moves_the_peak((nu, nv, vals) in quarter_map(), shift in -40i32..40) {
            let c = shift as f64;
            let a = map_from(nu, nv, |i, j| vals[i * nv + j]);
            let b = map_from(nu, nv, |i, j| vals[i * nv + j] + c);
            let ra = analyze(&a, Vec3::ZERO).unwrap();
            let rb = analyze(&b, Vec3::ZERO).unwrap();
            prop_assert_eq!(rb.peak_value_dbm, ra.peak_value_dbm + c);
            prop_assert_eq!(ra.peak_cell, rb.peak_cell);
            prop_assert_eq!(ra.drop_at_radii, rb.drop_at_radii);
            prop_assert_eq!(ra.halfpower_extent_u_m, rb.halfpower_extent_u_m);
            prop_assert_eq!(ra.halfpower_extent_v_m, rb.halfpower_extent_v_m);
            prop_assert_eq!(ra.area_above, rb.area_above);
        }

        #[test]
        fn transposing_swaps_extents((nu, nv, vals) in quarter_map()) {
            // Distinct values so the peak cell is unique and transposes.
            let vals: Vec<f64> = vals.iter().enumerate().map(|(k, v)| v - k as f64 * 1e-3).collect();
            let a = map_from(nu, nv, |i, j| vals[i * nv + j]);
            let t = map_from(nv, nu, |i, j| vals[j * nv + i]);
            let ra = analyze(&a, Vec3::ZERO).unwrap();
            let rt = analyze(&t, Vec3::ZERO).unwrap();
            prop_assert_eq!(ra.halfpower_extent_u_m, rt.halfpower_extent_v_m);
            prop_assert_eq!(ra.halfpower_extent_v_m, rt.halfpower_extent_u_m);
            prop_assert_eq!(ra.halfpower_cells_u, rt.halfpower_cells_v);
            prop_assert_eq!(ra.peak_cell, (rt.peak_cell.1, rt.peak_cell.0));
        }

        #[test]
        fn report_bounds((nu, nv, vals) in quarter_map()) {
            let a = map_from(nu, nv, |i, j| vals[i * nv + j]);
            let r = analyze(&a, Vec3::ZERO).unwrap();
            prop_assert!(r.drop_at_radii.iter().all(|d| d.max_drop_db >= 0.0 && d.mean_drop_db >= 0.0));
            prop_assert!(r.halfpower_extent_u_m > 0.0 && r.halfpower_extent_u_m <= nu as f64 * 0.1 + 1e-12);
            prop_assert!(r.halfpower_extent_v_m > 0.0 && r.halfpower_extent_v_m <= nv as f64 * 0.1 + 1e-12);
            prop_assert!(r.halfpower_extent_u_m < (r.halfpower_cells_u + 1) as f64 * 0.1);
            prop_assert!(r.halfpower_extent_u_m >= (r.halfpower_cells_u - 1) as f64 * 0.1 - 1e-12);
        }
    }
}
