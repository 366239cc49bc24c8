//! Discretized convex domains: interval, axis-aligned rectangle, disk.
//!
//! A [`DomainGrid`] classifies every node as interior or boundary, carries
//! outward unit normals on the boundary, and exposes the lattice topology
//! (per-axis neighbors) that the stencil code builds on. Disks use a polar
//! lattice with a single shared node at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape and resolution of a domain, as named in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval {
        bounds: [f64; 2],
        resolution: usize,
    },
    Rectangle {
        extents: [[f64; 2]; 2],
        /// Nodes per axis (x, y).
        resolution: [usize; 2],
    },
    Disk {
        radius: f64,
        /// (radial rings, angular nodes per ring).
        resolution: [usize; 2],
    },
}

/// Minimum nodes per axis for a production run; coarser lattices cannot
/// support any second-order claim.
pub const MIN_RESOLUTION: usize = 8;

impl DomainSpec {
    /// Checks the full invariants a run configuration must satisfy,
    /// including the production resolution floor of 8 nodes per axis.
    pub fn validate(&self) -> Result<()> {
        self.check_extents()?;
        for (axis, n) in self.axis_resolutions() {
            if n < MIN_RESOLUTION {
                return Err(Error::InvalidDomain(format!(
                    "resolution {n} on {axis} axis below minimum {MIN_RESOLUTION}"
                )));
            }
        }
        Ok(())
    }

    fn check_extents(&self) -> Result<()> {
        match self {
            DomainSpec::Interval { bounds: [a, b], .. } => {
                if !(b > a) {
                    return Err(Error::InvalidDomain(format!("degenerate interval [{a}, {b}]")));
                }
            }
            DomainSpec::Rectangle { extents, .. } => {
                for [a, b] in extents {
                    if !(b > a) {
                        return Err(Error::InvalidDomain(format!("degenerate extent [{a}, {b}]")));
                    }
                }
            }
            DomainSpec::Disk { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidDomain(format!("nonpositive radius {radius}")));
                }
            }
        }
        Ok(())
    }

    fn axis_resolutions(&self) -> Vec<(&'static str, usize)> {
        match self {
            DomainSpec::Interval { resolution, .. } => vec![("x", *resolution)],
            DomainSpec::Rectangle { resolution: [nx, ny], .. } => vec![("x", *nx), ("y", *ny)],
            DomainSpec::Disk { resolution: [nr, nt], .. } => vec![("radial", *nr), ("angular", *nt)],
        }
    }

    /// Short comma-free label used in report rows.
    pub fn label(&self) -> String {
        match self {
            DomainSpec::Interval { bounds: [a, b], resolution } => {
                format!("interval[{a};{b}]/{resolution}")
            }
            DomainSpec::Rectangle { extents: [[x0, x1], [y0, y1]], resolution: [nx, ny] } => {
                format!("rectangle[{x0};{x1}]x[{y0};{y1}]/{nx}x{ny}")
            }
            DomainSpec::Disk { radius, resolution: [nr, nt] } => {
                format!("disk(R={radius})/{nr}x{nt}")
            }
        }
    }

    /// Rescale all lengths by `s` about the shape's center. Potential sweeps
    /// use this for the scaling-covariance property.
    pub fn scaled(&self, s: f64) -> DomainSpec {
        match self {
            DomainSpec::Interval { bounds: [a, b], resolution } => {
                let m = 0.5 * (a + b);
                DomainSpec::Interval {
                    bounds: [m + s * (a - m), m + s * (b - m)],
                    resolution: *resolution,
                }
            }
            DomainSpec::Rectangle { extents, resolution } => {
                let sc = |[a, b]: &[f64; 2]| {
                    let m = 0.5 * (a + b);
                    [m + s * (a - m), m + s * (b - m)]
                };
                DomainSpec::Rectangle {
                    extents: [sc(&extents[0]), sc(&extents[1])],
                    resolution: *resolution,
                }
            }
            DomainSpec::Disk { radius, resolution } => DomainSpec::Disk {
                radius: s * radius,
                resolution: *resolution,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeClass {
    Interior,
    Boundary,
}

/// Lattice parameters of the built grid, kept exact for analytic geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    Interval { a: f64, b: f64, n: usize, h: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize, hx: f64, hy: f64 },
    Disk { radius: f64, nr: usize, ntheta: usize, dr: f64, dtheta: f64 },
}

/// A discretized domain: node coordinates, interior/boundary classification,
/// outward unit normals, and index maps between flat ids and lattice indices.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub kind: GridKind,
    coords: Vec<[f64; 2]>,
    class: Vec<NodeClass>,
    normals: Vec<Option<[f64; 2]>>,
}

/// Lattice axes. For disks axis 0 is radial and axis 1 angular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    A0,
    A1,
}

impl DomainGrid {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, id: usize) -> [f64; 2] {
        self.coords[id]
    }

    pub fn class(&self, id: usize) -> NodeClass {
        self.class[id]
    }

    pub fn is_interior(&self, id: usize) -> bool {
        self.class[id] == NodeClass::Interior
    }

    pub fn normal(&self, id: usize) -> Option<[f64; 2]> {
        self.normals[id]
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            GridKind::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.kind, GridKind::Disk { .. })
    }

    pub fn interior_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.is_interior(i))
    }

    pub fn boundary_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.is_interior(i))
    }

    /// Largest lattice spacing; tolerances of the form `C*h^2` use this.
    pub fn h_max(&self) -> f64 {
        match self.kind {
            GridKind::Interval { h, .. } => h,
            GridKind::Rectangle { hx, hy, .. } => hx.max(hy),
            GridKind::Disk { radius, dr, dtheta, .. } => dr.max(radius * dtheta),
        }
    }

    /// Lattice spacing along an axis. For disks axis 1 returns the angular
    /// step in radians; arc lengths need the local radius.
    pub fn spacing(&self, axis: Axis) -> f64 {
        match (&self.kind, axis) {
            (GridKind::Interval { h, .. }, _) => *h,
            (GridKind::Rectangle { hx, .. }, Axis::A0) => *hx,
            (GridKind::Rectangle { hy, .. }, Axis::A1) => *hy,
            (GridKind::Disk { dr, .. }, Axis::A0) => *dr,
            (GridKind::Disk { dtheta, .. }, Axis::A1) => *dtheta,
        }
    }

    /// Polar radius of a node (disks only; 0 at the center node).
    pub fn radius_of(&self, id: usize) -> f64 {
        let [x, y] = self.coords[id];
        (x * x + y * y).sqrt()
    }

    /// Ring/angular lattice index of a disk node; `None` for the center.
    pub fn disk_index(&self, id: usize) -> Option<(usize, usize)> {
        match self.kind {
            GridKind::Disk { ntheta, .. } => {
                if id == 0 {
                    None
                } else {
                    let k = id - 1;
                    Some((k / ntheta + 1, k % ntheta))
                }
            }
            _ => None,
        }
    }

    pub fn disk_id(&self, ring: usize, j: usize) -> usize {
        match self.kind {
            GridKind::Disk { ntheta, .. } => {
                debug_assert!(ring >= 1);
                1 + (ring - 1) * ntheta + (j % ntheta)
            }
            _ => panic!("disk_id on non-disk grid"),
        }
    }

    pub fn rect_id(&self, ix: usize, iy: usize) -> usize {
        match self.kind {
            GridKind::Rectangle { nx, .. } => iy * nx + ix,
            _ => panic!("rect_id on non-rectangle grid"),
        }
    }

    /// Neighbor one step along `axis` in direction `dir` (+1/-1), or `None`
    /// past the lattice edge. Angular neighbors wrap; the inward radial
    /// neighbor of ring 1 is the shared center node. The center itself has
    /// no single axis neighbor.
    pub fn axis_neighbor(&self, id: usize, axis: Axis, dir: i64) -> Option<usize> {
        match self.kind {
            GridKind::Interval { n, .. } => {
                if axis == Axis::A1 {
                    return None;
                }
                let i = id as i64 + dir;
                (i >= 0 && (i as usize) < n).then(|| i as usize)
            }
            GridKind::Rectangle { nx, ny, .. } => {
                let (ix, iy) = (id % nx, id / nx);
                match axis {
                    Axis::A0 => {
                        let i = ix as i64 + dir;
                        (i >= 0 && (i as usize) < nx).then(|| iy * nx + i as usize)
                    }
                    Axis::A1 => {
                        let i = iy as i64 + dir;
                        (i >= 0 && (i as usize) < ny).then(|| (i as usize) * nx + ix)
                    }
                }
            }
            GridKind::Disk { nr, ntheta, .. } => {
                let (ring, j) = self.disk_index(id)?;
                match axis {
                    Axis::A0 => {
                        let r = ring as i64 + dir;
                        if r == 0 {
                            Some(0)
                        } else if r >= 1 && (r as usize) <= nr {
                            Some(self.disk_id(r as usize, j))
                        } else {
                            None
                        }
                    }
                    Axis::A1 => {
                        let j2 = (j as i64 + dir).rem_euclid(ntheta as i64) as usize;
                        Some(self.disk_id(ring, j2))
                    }
                }
            }
        }
    }

    /// Exact distance from a node to the continuous boundary of the shape.
    pub fn distance_to_boundary(&self, id: usize) -> f64 {
        let [x, y] = self.coords[id];
        match self.kind {
            GridKind::Interval { a, b, .. } => (x - a).min(b - x),
            GridKind::Rectangle { x0, x1, y0, y1, .. } => {
                (x - x0).min(x1 - x).min(y - y0).min(y1 - y)
            }
            GridKind::Disk { radius, .. } => radius - (x * x + y * y).sqrt(),
        }
    }
}

/// Builds the lattice for a spec. Rejects degenerate extents and fewer than
/// 3 nodes per axis (no interior nodes exist below that); the stricter
/// production floor of 8 lives in [`DomainSpec::validate`].
pub fn build_grid(spec: &DomainSpec) -> Result<DomainGrid> {
    spec.check_extents()?;
    for (axis, n) in spec.axis_resolutions() {
        if n < 3 {
            return Err(Error::InvalidDomain(format!(
                "resolution {n} on {axis} axis leaves no interior nodes"
            )));
        }
    }
    match *spec {
        DomainSpec::Interval { bounds: [a, b], resolution: n } => {
            let h = (b - a) / (n - 1) as f64;
            let mut coords = Vec::with_capacity(n);
            let mut class = Vec::with_capacity(n);
            let mut normals = vec![None; n];
            for i in 0..n {
                coords.push([a + i as f64 * h, 0.0]);
                class.push(if i == 0 || i == n - 1 { NodeClass::Boundary } else { NodeClass::Interior });
            }
            normals[0] = Some([-1.0, 0.0]);
            normals[n - 1] = Some([1.0, 0.0]);
            Ok(DomainGrid {
                kind: GridKind::Interval { a, b, n, h },
                coords,
                class,
                normals,
            })
        }
        DomainSpec::Rectangle { extents: [[x0, x1], [y0, y1]], resolution: [nx, ny] } => {
            let hx = (x1 - x0) / (nx - 1) as f64;
            let hy = (y1 - y0) / (ny - 1) as f64;
            let n = nx * ny;
            let mut coords = Vec::with_capacity(n);
            let mut class = Vec::with_capacity(n);
            let mut normals = vec![None; n];
            for iy in 0..ny {
                for ix in 0..nx {
                    coords.push([x0 + ix as f64 * hx, y0 + iy as f64 * hy]);
                    let on_x = ix == 0 || ix == nx - 1;
                    let on_y = iy == 0 || iy == ny - 1;
                    class.push(if on_x || on_y { NodeClass::Boundary } else { NodeClass::Interior });
                    if on_x || on_y {
                        let mut nvec = [0.0f64, 0.0];
                        if ix == 0 {
                            nvec[0] -= 1.0;
                        }
                        if ix == nx - 1 {
                            nvec[0] += 1.0;
                        }
                        if iy == 0 {
                            nvec[1] -= 1.0;
                        }
                        if iy == ny - 1 {
                            nvec[1] += 1.0;
                        }
                        let norm = (nvec[0] * nvec[0] + nvec[1] * nvec[1]).sqrt();
                        normals[iy * nx + ix] = Some([nvec[0] / norm, nvec[1] / norm]);
                    }
                }
            }
            Ok(DomainGrid {
                kind: GridKind::Rectangle { x0, x1, y0, y1, nx, ny, hx, hy },
                coords,
                class,
                normals,
            })
        }
        DomainSpec::Disk { radius, resolution: [nr, ntheta] } => {
            let dr = radius / nr as f64;
            let dtheta = std::f64::consts::TAU / ntheta as f64;
            let n = nr * ntheta + 1;
            let mut coords = Vec::with_capacity(n);
            let mut class = Vec::with_capacity(n);
            let mut normals = vec![None; n];
            coords.push([0.0, 0.0]);
            class.push(NodeClass::Interior);
            for ring in 1..=nr {
                let r = ring as f64 * dr;
                for j in 0..ntheta {
                    let theta = j as f64 * dtheta;
                    let (s, c) = theta.sin_cos();
                    coords.push([r * c, r * s]);
                    if ring == nr {
                        class.push(NodeClass::Boundary);
                        normals[coords.len() - 1] = Some([c, s]);
                    } else {
                        class.push(NodeClass::Interior);
                    }
                }
            }
            Ok(DomainGrid {
                kind: GridKind::Disk { radius, nr, ntheta, dr, dtheta },
                coords,
                class,
                normals,
            })
        }
    }
}

/// Analytic geometry consumed by the gap bounds: diameter, the lower bound
/// on the principal curvature of the boundary, and mean curvature per
/// boundary node (undefined at rectangle corners).
#[derive(Debug, Clone, Serialize)]
pub struct DomainMetrics {
    pub diameter: f64,
    pub curvature_min: f64,
    /// Indexed by node id; `Some` on smooth boundary nodes only.
    #[serde(skip)]
    pub mean_curvature: Vec<Option<f64>>,
}

/// Rectangle corners count as boundary but carry no curvature data.
pub fn is_corner(grid: &DomainGrid, id: usize) -> bool {
    match grid.kind {
        GridKind::Rectangle { nx, ny, .. } => {
            let (ix, iy) = (id % nx, id / nx);
            (ix == 0 || ix == nx - 1) && (iy == 0 || iy == ny - 1)
        }
        _ => false,
    }
}

/// Diameter is computed from the exact shape, not from sampled nodes.
pub fn metrics(grid: &DomainGrid) -> DomainMetrics {
    let (diameter, curvature_min) = match grid.kind {
        GridKind::Interval { a, b, .. } => (b - a, 0.0),
        GridKind::Rectangle { x0, x1, y0, y1, .. } => {
            (((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt(), 0.0)
        }
        GridKind::Disk { radius, .. } => (2.0 * radius, 1.0 / radius),
    };
    let mut mean_curvature = vec![None; grid.len()];
    for id in grid.boundary_ids() {
        if is_corner(grid, id) {
            continue;
        }
        mean_curvature[id] = Some(match grid.kind {
            GridKind::Disk { radius, .. } => 1.0 / radius,
            _ => 0.0,
        });
    }
    DomainMetrics { diameter, curvature_min, mean_curvature }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_lattice_and_classes() {
        let grid = build_grid(&DomainSpec::Interval { bounds: [0.0, 1.0], resolution: 7 }).unwrap();
        assert_eq!(grid.len(), 7);
        for i in 0..7 {
            assert!((grid.coord(i)[0] - i as f64 / 6.0).abs() < 1e-15);
        }
        assert_eq!(grid.class(0), NodeClass::Boundary);
        assert_eq!(grid.class(6), NodeClass::Boundary);
        assert_eq!(grid.interior_ids().count(), 5);
    }

    #[test]
    fn rectangle_counts() {
        let grid = build_grid(&DomainSpec::Rectangle {
            extents: [[0.0, 1.0], [0.0, 1.0]],
            resolution: [9, 9],
        })
        .unwrap();
        assert_eq!(grid.len(), 81);
        assert_eq!(grid.boundary_ids().count(), 32);
        assert_eq!(grid.interior_ids().count(), 49);
    }

    #[test]
    fn disk_counts_and_normals() {
        let grid = build_grid(&DomainSpec::Disk { radius: 1.0, resolution: [16, 32] }).unwrap();
        assert_eq!(grid.len(), 16 * 32 + 1);
        let boundary: Vec<usize> = grid.boundary_ids().collect();
        assert_eq!(boundary.len(), 32);
        for id in boundary {
            let n = grid.normal(id).unwrap();
            let [x, y] = grid.coord(id);
            let r = (x * x + y * y).sqrt();
            assert!((n[0] - x / r).abs() < 1e-14 && (n[1] - y / r).abs() < 1e-14);
        }
    }

    #[test]
    fn normals_are_unit_and_classes_partition() {
        for spec in [
            DomainSpec::Interval { bounds: [-2.0, 5.0], resolution: 11 },
            DomainSpec::Rectangle { extents: [[0.0, 1.0], [0.0, 2.0]], resolution: [9, 13] },
            DomainSpec::Disk { radius: 2.0, resolution: [8, 16] },
        ] {
            let grid = build_grid(&spec).unwrap();
            let mut interior = 0;
            let mut boundary = 0;
            for id in 0..grid.len() {
                match grid.class(id) {
                    NodeClass::Interior => {
                        interior += 1;
                        assert!(grid.normal(id).is_none());
                    }
                    NodeClass::Boundary => {
                        boundary += 1;
                        let [nx, ny] = grid.normal(id).unwrap();
                        assert!(((nx * nx + ny * ny).sqrt() - 1.0).abs() <= 1e-12);
                    }
                }
            }
            assert_eq!(interior + boundary, grid.len());
        }
    }

    #[test]
    fn disk_angular_spacings_close_up() {
        let grid = build_grid(&DomainSpec::Disk { radius: 1.0, resolution: [8, 24] }).unwrap();
        let dtheta = grid.spacing(Axis::A1);
        assert!((24.0 * dtheta - std::f64::consts::TAU).abs() <= 1e-12);
    }

    #[test]
    fn corner_normals_are_diagonal() {
        let grid = build_grid(&DomainSpec::Rectangle {
            extents: [[0.0, 1.0], [0.0, 1.0]],
            resolution: [9, 9],
        })
        .unwrap();
        let n = grid.normal(0).unwrap();
        let s = 0.5f64.sqrt();
        assert!((n[0] + s).abs() < 1e-15 && (n[1] + s).abs() < 1e-15);
        assert!(is_corner(&grid, 0) && is_corner(&grid, 8) && !is_corner(&grid, 4));
    }

    #[test]
    fn metric_examples() {
        let g1 = build_grid(&DomainSpec::Interval { bounds: [0.0, 1.0], resolution: 9 }).unwrap();
        let m1 = metrics(&g1);
        assert_eq!(m1.diameter, 1.0);
        assert_eq!(m1.curvature_min, 0.0);

        let g2 = build_grid(&DomainSpec::Rectangle {
            extents: [[0.0, 1.0], [0.0, 2.0]],
            resolution: [9, 9],
        })
        .unwrap();
        let m2 = metrics(&g2);
        assert!((m2.diameter - 5.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(m2.curvature_min, 0.0);
        for id in g2.boundary_ids() {
            if !is_corner(&g2, id) {
                assert_eq!(m2.mean_curvature[id], Some(0.0));
            } else {
                assert_eq!(m2.mean_curvature[id], None);
            }
        }

        let g3 = build_grid(&DomainSpec::Disk { radius: 2.0, resolution: [8, 16] }).unwrap();
        let m3 = metrics(&g3);
        assert_eq!(m3.diameter, 4.0);
        assert_eq!(m3.curvature_min, 0.5);
        for id in g3.boundary_ids() {
            assert_eq!(m3.mean_curvature[id], Some(0.5));
        }
    }

    #[test]
    fn rejects_degenerate_and_too_coarse() {
        assert!(build_grid(&DomainSpec::Interval { bounds: [1.0, 1.0], resolution: 9 }).is_err());
        assert!(build_grid(&DomainSpec::Interval { bounds: [0.0, 1.0], resolution: 2 }).is_err());
        assert!(build_grid(&DomainSpec::Disk { radius: -1.0, resolution: [8, 8] }).is_err());
        // Production validation is stricter.
        assert!(DomainSpec::Interval { bounds: [0.0, 1.0], resolution: 7 }.validate().is_err());
        assert!(DomainSpec::Interval { bounds: [0.0, 1.0], resolution: 8 }.validate().is_ok());
    }

    #[test]
    fn disk_neighbors_wrap_and_reach_center() {
        let grid = build_grid(&DomainSpec::Disk { radius: 1.0, resolution: [4, 8] }).unwrap();
        let first_ring0 = grid.disk_id(1, 0);
        assert_eq!(grid.axis_neighbor(first_ring0, Axis::A0, -1), Some(0));
        assert_eq!(grid.axis_neighbor(first_ring0, Axis::A1, -1), Some(grid.disk_id(1, 7)));
        let outer = grid.disk_id(4, 3);
        assert_eq!(grid.axis_neighbor(outer, Axis::A0, 1), None);
    }
}
