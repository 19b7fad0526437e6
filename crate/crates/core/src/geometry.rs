//! Scene geometry: points, RIS element lattices, transmitter placement and
//! measurement grids.
//!
//! All lengths are in meters.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking unit length and orthogonality of axes.
pub const AXIS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite")]
    NonFinite { field: &'static str },
    #[error("{field} must have unit length (|v| = {norm})")]
    NotUnit { field: &'static str, norm: f64 },
    #[error("{a} and {b} are not orthogonal (dot = {dot})")]
    NotOrthogonal {
        a: &'static str,
        b: &'static str,
        dot: f64,
    },
    #[error("pose is not right-handed: right x up differs from normal by {deviation}")]
    LeftHanded { deviation: f64 },
    #[error("expected exactly 4 patch positions, got {0}")]
    PatchCount(usize),
}

/// A point or direction in 3D space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3::new(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Mirror image of the point across the plane through `point` with unit
    /// normal `normal`.
    pub fn reflect(self, point: Vec3, normal: Vec3) -> Vec3 {
        let d = (self - point).dot(normal);
        self - normal * (2.0 * d)
    }

    /// Mirror image of a direction (no translation component).
    pub fn reflect_dir(self, normal: Vec3) -> Vec3 {
        self - normal * (2.0 * self.dot(normal))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Vec3, b: Vec3) -> f64 {
    (a - b).norm()
}

fn check_finite(field: &'static str, v: Vec3) -> Result<(), GeometryError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonFinite { field })
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<(), GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::NonPositive { field, value })
    }
}

fn check_unit(field: &'static str, v: Vec3) -> Result<(), GeometryError> {
    check_finite(field, v)?;
    let norm = v.norm();
    if (norm - 1.0).abs() <= AXIS_TOLERANCE {
        Ok(())
    } else {
        Err(GeometryError::NotUnit { field, norm })
    }
}

fn check_orthogonal(
    a: &'static str,
    va: Vec3,
    b: &'static str,
    vb: Vec3,
) -> Result<(), GeometryError> {
    let dot = va.dot(vb);
    if dot.abs() <= AXIS_TOLERANCE {
        Ok(())
    } else {
        Err(GeometryError::NotOrthogonal { a, b, dot })
    }
}

/// Modular surface layout: `modules_across` x `modules_down` modules, each a
/// square lattice of `cells_per_module_side`^2 unit cells. Modules tile
/// flush, without gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisLayout {
    pub modules_across: usize,
    pub modules_down: usize,
    pub cells_per_module_side: usize,
    pub module_width: f64,
    pub module_height: f64,
}

impl RisLayout {
    /// Six 360 mm x 247 mm modules of 16 x 16 cells, three across and two down.
    pub const PROTOTYPE: RisLayout = RisLayout {
        modules_across: 3,
        modules_down: 2,
        cells_per_module_side: 16,
        module_width: 0.360,
        module_height: 0.247,
    };

    pub fn validate(&self) -> Result<(), GeometryError> {
        for (field, n) in [
            ("modules_across", self.modules_across),
            ("modules_down", self.modules_down),
            ("cells_per_module_side", self.cells_per_module_side),
        ] {
            if n == 0 {
                return Err(GeometryError::NonPositive { field, value: 0.0 });
            }
        }
        check_positive("module_width", self.module_width)?;
        check_positive("module_height", self.module_height)
    }

    pub fn element_count(&self) -> usize {
        self.modules_across
            * self.modules_down
            * self.cells_per_module_side
            * self.cells_per_module_side
    }

    /// Elements per lattice row (across all modules).
    pub fn columns(&self) -> usize {
        self.modules_across * self.cells_per_module_side
    }

    /// Elements per lattice column (down all modules).
    pub fn rows(&self) -> usize {
        self.modules_down * self.cells_per_module_side
    }

    pub fn pitch_u(&self) -> f64 {
        self.module_width / self.cells_per_module_side as f64
    }

    pub fn pitch_v(&self) -> f64 {
        self.module_height / self.cells_per_module_side as f64
    }
}

/// Position and orientation of the panel. `right` runs along module columns,
/// `up` along module rows, `normal` points into the illuminated half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub origin: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub normal: Vec3,
}

impl Pose {
    /// Panel in the xy-plane facing +z.
    pub fn identity_at(origin: Vec3) -> Self {
        Self {
            origin,
            right: Vec3::X,
            up: Vec3::Y,
            normal: Vec3::Z,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        check_finite("pose.origin", self.origin)?;
        check_unit("pose.right", self.right)?;
        check_unit("pose.up", self.up)?;
        check_unit("pose.normal", self.normal)?;
        check_orthogonal("pose.right", self.right, "pose.up", self.up)?;
        check_orthogonal("pose.right", self.right, "pose.normal", self.normal)?;
        check_orthogonal("pose.up", self.up, "pose.normal", self.normal)?;
        let deviation = (self.right.cross(self.up) - self.normal).norm();
        if deviation > AXIS_TOLERANCE {
            return Err(GeometryError::LeftHanded { deviation });
        }
        Ok(())
    }
}

/// Element centers of the panel, row-major by (module row, module column,
/// cell row, cell column). Module row 0 is the top row (largest `up`
/// coordinate); module column 0 is the leftmost (smallest `right`
/// coordinate). The centroid of the lattice is `pose.origin`.
pub fn element_positions(layout: &RisLayout, pose: &Pose) -> Result<Vec<Vec3>, GeometryError> {
    layout.validate()?;
    pose.validate()?;
    let n = layout.cells_per_module_side;
    let (cols, rows) = (layout.columns(), layout.rows());
    let (pu, pv) = (layout.pitch_u(), layout.pitch_v());
    // Offsets are half-integers times the pitch, symmetric about zero.
    let cu = (cols as f64 - 1.0) / 2.0;
    let cv = (rows as f64 - 1.0) / 2.0;

    let mut out = Vec::with_capacity(layout.element_count());
    for module_row in 0..layout.modules_down {
        for module_col in 0..layout.modules_across {
            for cell_row in 0..n {
                for cell_col in 0..n {
                    let col = module_col * n + cell_col;
                    let row = module_row * n + cell_row;
                    let u = (col as f64 - cu) * pu;
                    let v = (cv - row as f64) * pv;
                    out.push(pose.origin + pose.right * u + pose.up * v);
                }
            }
        }
    }
    Ok(out)
}

/// Single equivalent radiator standing in for a four-patch feed: the
/// arithmetic mean of the patch centers.
pub fn equivalent_tx_position(patches: &[Vec3]) -> Result<Vec3, GeometryError> {
    if patches.len() != 4 {
        return Err(GeometryError::PatchCount(patches.len()));
    }
    for p in patches {
        check_finite("tx.patches", *p)?;
    }
    let sum = patches.iter().fold(Vec3::ZERO, |acc, p| acc + *p);
    Ok(sum * 0.25)
}

/// Planar measurement grid. Point (i, j) sits at
/// `origin + i*spacing*axis_u + j*spacing*axis_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Vec3,
    pub axis_u: Vec3,
    pub axis_v: Vec3,
    pub count_u: usize,
    pub count_v: usize,
    pub spacing: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        check_finite("grid.origin", self.origin)?;
        check_positive("grid.spacing", self.spacing)?;
        if self.count_u == 0 {
            return Err(GeometryError::NonPositive {
                field: "grid.count_u",
                value: 0.0,
            });
        }
        if self.count_v == 0 {
            return Err(GeometryError::NonPositive {
                field: "grid.count_v",
                value: 0.0,
            });
        }
        check_unit("grid.axis_u", self.axis_u)?;
        check_unit("grid.axis_v", self.axis_v)?;
        check_orthogonal("grid.axis_u", self.axis_u, "grid.axis_v", self.axis_v)
    }

    pub fn len(&self) -> usize {
        self.count_u * self.count_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        let s = self.spacing;
        self.origin + self.axis_u * (i as f64 * s) + self.axis_v * (j as f64 * s)
    }

    /// Flat index of cell (i, j); matches the ordering of [`generate_grid`].
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.count_v + j
    }

    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.count_v, index % self.count_v)
    }

    /// Grid cell whose point is closest to the orthogonal projection of `p`
    /// onto the grid plane, clamped to the grid.
    pub fn nearest_cell(&self, p: Vec3) -> (usize, usize) {
        let rel = p - self.origin;
        let clamp = |t: f64, n: usize| -> usize {
            let k = (t / self.spacing).round();
            if k <= 0.0 {
                0
            } else {
                (k as usize).min(n - 1)
            }
        };
        (
            clamp(rel.dot(self.axis_u), self.count_u),
            clamp(rel.dot(self.axis_v), self.count_v),
        )
    }

    /// Orthogonal projection of `p` onto the grid plane.
    pub fn project(&self, p: Vec3) -> Vec3 {
        let rel = p - self.origin;
        self.origin + self.axis_u * rel.dot(self.axis_u) + self.axis_v * rel.dot(self.axis_v)
    }
}

/// All grid points, row-major in (i, j): `i` is the outer index.
pub fn generate_grid(grid: &GridSpec) -> Result<Vec<Vec3>, GeometryError> {
    grid.validate()?;
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.count_u {
        for j in 0..grid.count_v {
            out.push(grid.point(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        distance(a, b) <= tol
    }

    #[test]
    fn single_cell_sits_at_origin() {
        let layout = RisLayout {
            modules_across: 1,
            modules_down: 1,
            cells_per_module_side: 1,
            module_width: 0.3,
            module_height: 0.1,
        };
        let origin = Vec3::new(1.0, -2.0, 3.0);
        let pos = element_positions(&layout, &Pose::identity_at(origin)).unwrap();
        assert_eq!(pos, vec![origin]);
    }

    #[test]
    fn two_by_two_lattice() {
        let layout = RisLayout {
            modules_across: 1,
            modules_down: 1,
            cells_per_module_side: 2,
            module_width: 0.2,
            module_height: 0.2,
        };
        let pos = element_positions(&layout, &Pose::identity_at(Vec3::ZERO)).unwrap();
        let expected = [
            Vec3::new(-0.05, 0.05, 0.0),
            Vec3::new(0.05, 0.05, 0.0),
            Vec3::new(-0.05, -0.05, 0.0),
            Vec3::new(0.05, -0.05, 0.0),
        ];
        assert_eq!(pos.len(), 4);
        for (p, e) in pos.iter().zip(expected) {
            assert!(close(*p, e, 1e-15), "{p:?} vs {e:?}");
        }
    }

    #[test]
    fn prototype_lattice_extent() {
        let pos = element_positions(&RisLayout::PROTOTYPE, &Pose::identity_at(Vec3::ZERO)).unwrap();
        assert_eq!(pos.len(), 1536);
        let min_x = pos.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = pos.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        assert!((max_x - min_x - 1.0575).abs() < 1e-12);
        let min_y = pos.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = pos.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        assert!((max_y - min_y - (0.494 - 0.015_437_5)).abs() < 1e-12);
        assert!((RisLayout::PROTOTYPE.pitch_u() - 0.0225).abs() < 1e-15);
        assert!((RisLayout::PROTOTYPE.pitch_v() - 0.015_437_5).abs() < 1e-15);
    }

    #[test]
    fn module_ordering_is_module_major() {
        let layout = RisLayout {
            modules_across: 2,
            modules_down: 1,
            cells_per_module_side: 2,
            module_width: 1.0,
            module_height: 1.0,
        };
        let pos = element_positions(&layout, &Pose::identity_at(Vec3::ZERO)).unwrap();
        // First module occupies the left half.
        assert!(pos[..4].iter().all(|p| p.x < 0.0));
        assert!(pos[4..].iter().all(|p| p.x > 0.0));
    }

    #[test]
    fn rejects_zero_sized_layout() {
        let mut layout = RisLayout::PROTOTYPE;
        layout.cells_per_module_side = 0;
        assert!(element_positions(&layout, &Pose::identity_at(Vec3::ZERO)).is_err());
        let mut layout = RisLayout::PROTOTYPE;
        layout.module_width = 0.0;
        assert!(matches!(
            element_positions(&layout, &Pose::identity_at(Vec3::ZERO)),
            Err(GeometryError::NonPositive {
                field: "module_width",
                ..
            })
        ));
    }

    #[test]
    fn rejects_left_handed_pose() {
        let pose = Pose {
            origin: Vec3::ZERO,
            right: Vec3::X,
            up: Vec3::Y,
            normal: -Vec3::Z,
        };
        assert!(matches!(
            pose.validate(),
            Err(GeometryError::LeftHanded { .. })
        ));
    }

    #[test]
    fn equivalent_tx() {
        let sym = [
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(-1.0, 1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(-1.0, -1.0, 0.0),
        ];
        assert_eq!(equivalent_tx_position(&sym).unwrap(), Vec3::ZERO);
        let same = [Vec3::new(0.1, 0.2, 0.3); 4];
        assert!(close(
            equivalent_tx_position(&same).unwrap(),
            Vec3::new(0.1, 0.2, 0.3),
            1e-15
        ));
        let corners = [Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z];
        assert_eq!(
            equivalent_tx_position(&corners).unwrap(),
            Vec3::new(0.25, 0.25, 0.25)
        );
        assert_eq!(
            equivalent_tx_position(&corners[..3]),
            Err(GeometryError::PatchCount(3))
        );
    }

    fn grid(count_u: usize, count_v: usize, spacing: f64) -> GridSpec {
        GridSpec {
            origin: Vec3::new(0.0, 0.0, 1.1),
            axis_u: Vec3::X,
            axis_v: Vec3::Y,
            count_u,
            count_v,
            spacing,
        }
    }

    #[test]
    fn grid_points() {
        assert_eq!(
            generate_grid(&grid(1, 1, 0.1)).unwrap(),
            vec![Vec3::new(0.0, 0.0, 1.1)]
        );
        let pts = generate_grid(&grid(2, 2, 0.1)).unwrap();
        // i is the outer (row-major) index.
        assert_eq!(
            pts,
            vec![
                Vec3::new(0.0, 0.0, 1.1),
                Vec3::new(0.0, 0.1, 1.1),
                Vec3::new(0.1, 0.0, 1.1),
                Vec3::new(0.1, 0.1, 1.1),
            ]
        );
        let big = grid(30, 20, 0.1);
        let last = big.point(29, 19);
        assert!((last.x - 2.9).abs() < 1e-12 && (last.y - 1.9).abs() < 1e-12);
        assert_eq!(generate_grid(&big).unwrap().len(), 600);
    }

    #[test]
    fn grid_rejects_bad_axes() {
        let mut g = grid(2, 2, 0.1);
        g.axis_v = Vec3::new(0.6, 0.8, 0.0);
        assert!(matches!(
            generate_grid(&g),
            Err(GeometryError::NotOrthogonal { .. })
        ));
        let g = grid(2, 2, 0.0);
        assert!(matches!(
            generate_grid(&g),
            Err(GeometryError::NonPositive {
                field: "grid.spacing",
                ..
            })
        ));
    }

    #[test]
    fn nearest_cell_clamps() {
        let g = grid(5, 4, 0.1);
        assert_eq!(g.nearest_cell(Vec3::new(0.21, 0.09, 0.0)), (2, 1));
        assert_eq!(g.nearest_cell(Vec3::new(-3.0, 9.0, 0.0)), (0, 3));
        assert_eq!(g.cell(g.index(3, 2)), (3, 2));
    }

    #[test]
    fn distances() {
        assert_eq!(distance(Vec3::ZERO, Vec3::ZERO), 0.0);
        assert_eq!(distance(Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(
            distance(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 6.0, 3.0)),
            5.0
        );
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    /// Rotation matrix from Euler angles, applied as three column vectors.
    fn rotation(a: f64, b: f64, c: f64) -> [Vec3; 3] {
        let rz = |v: Vec3, t: f64| {
            Vec3::new(
                v.x * t.cos() - v.y * t.sin(),
                v.x * t.sin() + v.y * t.cos(),
                v.z,
            )
        };
        let rx = |v: Vec3, t: f64| {
            Vec3::new(
                v.x,
                v.y * t.cos() - v.z * t.sin(),
                v.y * t.sin() + v.z * t.cos(),
            )
        };
        let r = |v: Vec3| rz(rx(rz(v, a), b), c);
        [r(Vec3::X), r(Vec3::Y), r(Vec3::Z)]
    }

    fn apply(m: &[Vec3; 3], v: Vec3) -> Vec3 {
        m[0] * v.x + m[1] * v.y + m[2] * v.z
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in vec3(), b in vec3(), c in vec3()) {
            prop_assert_eq!(distance(a, b), distance(b, a));
            prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
            prop_assert!(distance(a, b) >= 0.0);
        }

        #[test]
        fn lattice_translates_with_origin(t in vec3(), across in 1usize..4, down in 1usize..4, n in 1usize..5) {
            let layout = RisLayout { modules_across: across, modules_down: down, cells_per_module_side: n, module_width: 0.3, module_height: 0.2 };
            let base = element_positions(&layout, &Pose::identity_at(Vec3::ZERO)).unwrap();
            let moved = element_positions(&layout, &Pose::identity_at(t)).unwrap();
            for (p, q) in base.iter().zip(&moved) {
                prop_assert!(close(*p + t, *q, 1e-12));
            }
            let centroid = moved.iter().fold(Vec3::ZERO, |a, p| a + *p) * (1.0 / moved.len() as f64);
            prop_assert!(close(centroid, t, 1e-9));
        }

        #[test]
        fn lattice_rotates_with_pose(a in 0.0..6.3f64, b in 0.0..6.3f64, c in 0.0..6.3f64, o in vec3()) {
            let layout = RisLayout { modules_across: 2, modules_down: 3, cells_per_module_side: 3, module_width: 0.36, module_height: 0.247 };
            let base = element_positions(&layout, &Pose::identity_at(o)).unwrap();
            let m = rotation(a, b, c);
            let pose = Pose { origin: o, right: m[0], up: m[1], normal: m[2] };
            let rotated = element_positions(&layout, &pose).unwrap();
            for (p, q) in base.iter().zip(&rotated) {
                prop_assert!(close(o + apply(&m, *p - o), *q, 1e-9));
            }
        }

        #[test]
        fn grid_is_deterministic(nu in 1usize..8, nv in 1usize..8, s in 0.01..1.0f64) {
            let g = grid(nu, nv, s);
            let a = generate_grid(&g).unwrap();
            prop_assert_eq!(a.len(), nu * nv);
            prop_assert_eq!(a, generate_grid(&g).unwrap());
        }
    }
}
