//! Central-difference calculus for nodal functions on a [`DomainGrid`].
//!
//! All stencils are second order. On disks the derivatives are taken in
//! polar coordinates (the lattice axes) and converted to Cartesian with the
//! chain rule; the center node is excluded because the conversion has a
//! 1/r factor.

use crate::geometry::{Axis, DomainGrid, GridKind};

/// A scalar function given by one value per grid node.
#[derive(Clone, Copy)]
pub struct ScalarField<'a> {
    pub grid: &'a DomainGrid,
    pub values: &'a [f64],
}

impl<'a> ScalarField<'a> {
    pub fn new(grid: &'a DomainGrid, values: &'a [f64]) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        ScalarField { grid, values }
    }

    fn at(&self, id: usize) -> f64 {
        self.values[id]
    }

    /// Central first derivative along a lattice axis.
    pub fn d1(&self, id: usize, axis: Axis) -> Option<f64> {
        let m = self.grid.axis_neighbor(id, axis, -1)?;
        let p = self.grid.axis_neighbor(id, axis, 1)?;
        Some((self.at(p) - self.at(m)) / (2.0 * self.grid.spacing(axis)))
    }

    /// Central second derivative along a lattice axis.
    pub fn d2(&self, id: usize, axis: Axis) -> Option<f64> {
        let m = self.grid.axis_neighbor(id, axis, -1)?;
        let p = self.grid.axis_neighbor(id, axis, 1)?;
        let h = self.grid.spacing(axis);
        Some((self.at(p) - 2.0 * self.at(id) + self.at(m)) / (h * h))
    }

    /// Mixed second derivative (4-point cross stencil) in lattice axes.
    pub fn cross(&self, id: usize) -> Option<f64> {
        let xp = self.grid.axis_neighbor(id, Axis::A0, 1)?;
        let xm = self.grid.axis_neighbor(id, Axis::A0, -1)?;
        let pp = self.grid.axis_neighbor(xp, Axis::A1, 1)?;
        let pm = self.grid.axis_neighbor(xp, Axis::A1, -1)?;
        let mp = self.grid.axis_neighbor(xm, Axis::A1, 1)?;
        let mm = self.grid.axis_neighbor(xm, Axis::A1, -1)?;
        let h0 = self.grid.spacing(Axis::A0);
        let h1 = self.grid.spacing(Axis::A1);
        Some((self.at(pp) - self.at(pm) - self.at(mp) + self.at(mm)) / (4.0 * h0 * h1))
    }

    /// Polar derivative bundle (f_r, f_theta, f_rr, f_rtheta, f_thetatheta).
    /// `None` at the center or when a radial neighbor is missing.
    fn polar(&self, id: usize) -> Option<[f64; 5]> {
        self.grid.disk_index(id)?;
        Some([
            self.d1(id, Axis::A0)?,
            self.d1(id, Axis::A1)?,
            self.d2(id, Axis::A0)?,
            self.cross(id)?,
            self.d2(id, Axis::A1)?,
        ])
    }

    /// Cartesian gradient.
    pub fn grad(&self, id: usize) -> Option<[f64; 2]> {
        match self.grid.kind {
            GridKind::Interval { .. } => Some([self.d1(id, Axis::A0)?, 0.0]),
            GridKind::Rectangle { .. } => Some([self.d1(id, Axis::A0)?, self.d1(id, Axis::A1)?]),
            GridKind::Disk { .. } => {
                let r = self.grid.radius_of(id);
                if r == 0.0 {
                    return None;
                }
                let [x, y] = self.grid.coord(id);
                let (c, s) = (x / r, y / r);
                let fr = self.d1(id, Axis::A0)?;
                let ft = self.d1(id, Axis::A1)?;
                Some([c * fr - s * ft / r, s * fr + c * ft / r])
            }
        }
    }

    pub fn grad_sq(&self, id: usize) -> Option<f64> {
        let [gx, gy] = self.grad(id)?;
        Some(gx * gx + gy * gy)
    }

    /// Laplacian; on disks f_rr + f_r/r + f_tt/r^2.
    pub fn laplacian(&self, id: usize) -> Option<f64> {
        match self.grid.kind {
            GridKind::Interval { .. } => self.d2(id, Axis::A0),
            GridKind::Rectangle { .. } => {
                Some(self.d2(id, Axis::A0)? + self.d2(id, Axis::A1)?)
            }
            GridKind::Disk { .. } => {
                let r = self.grid.radius_of(id);
                if r == 0.0 {
                    return None;
                }
                let fr = self.d1(id, Axis::A0)?;
                let frr = self.d2(id, Axis::A0)?;
                let ftt = self.d2(id, Axis::A1)?;
                Some(frr + fr / r + ftt / (r * r))
            }
        }
    }

    /// Full Cartesian Hessian, row-major symmetric 2x2 (the (0,0) entry is
    /// the only meaningful one on intervals).
    pub fn hessian(&self, id: usize) -> Option<[[f64; 2]; 2]> {
        match self.grid.kind {
            GridKind::Interval { .. } => {
                let d = self.d2(id, Axis::A0)?;
                Some([[d, 0.0], [0.0, 0.0]])
            }
            GridKind::Rectangle { .. } => {
                let fxx = self.d2(id, Axis::A0)?;
                let fyy = self.d2(id, Axis::A1)?;
                let fxy = self.cross(id)?;
                Some([[fxx, fxy], [fxy, fyy]])
            }
            GridKind::Disk { .. } => {
                let r = self.grid.radius_of(id);
                if r == 0.0 {
                    return None;
                }
                let [x, y] = self.grid.coord(id);
                let (c, s) = (x / r, y / r);
                let [fr, ft, frr, frt, ftt] = self.polar(id)?;
                let a = frr;
                let b = frt / r - ft / (r * r);
                let d = fr / r + ftt / (r * r);
                let fxx = c * c * a - 2.0 * c * s * b + s * s * d;
                let fyy = s * s * a + 2.0 * c * s * b + c * c * d;
                let fxy = c * s * (a - d) + (c * c - s * s) * b;
                Some([[fxx, fxy], [fxy, fyy]])
            }
        }
    }

    /// Smallest eigenvalue of the Hessian (1x1 on intervals).
    pub fn hessian_min_eig(&self, id: usize) -> Option<f64> {
        let h = self.hessian(id)?;
        Some(match self.grid.dim() {
            1 => h[0][0],
            _ => sym2_min_eig(h[0][0], h[0][1], h[1][1]),
        })
    }

    /// Diagonal Hessian entries along the Cartesian axes.
    pub fn hessian_diag(&self, id: usize) -> Option<Vec<f64>> {
        let h = self.hessian(id)?;
        Some(match self.grid.dim() {
            1 => vec![h[0][0]],
            _ => vec![h[0][0], h[1][1]],
        })
    }

    /// One-sided second-order normal derivative at a boundary node:
    /// (3 f(b) - 4 f(b-h) + f(b-2h)) / (2h) along the outward lattice line.
    /// Corners (no single lattice normal) return `None`.
    pub fn normal_derivative(&self, id: usize) -> Option<f64> {
        let (axis, dir) = boundary_line(self.grid, id)?;
        let n1 = self.grid.axis_neighbor(id, axis, -dir)?;
        let n2 = self.grid.axis_neighbor(n1, axis, -dir)?;
        let h = self.grid.spacing(axis);
        Some((3.0 * self.at(id) - 4.0 * self.at(n1) + self.at(n2)) / (2.0 * h))
    }
}

/// The inward lattice line at a boundary node: (axis, outward direction).
pub fn boundary_line(grid: &DomainGrid, id: usize) -> Option<(Axis, i64)> {
    match grid.kind {
        GridKind::Interval { n, .. } => {
            if id == 0 {
                Some((Axis::A0, -1))
            } else if id == n - 1 {
                Some((Axis::A0, 1))
            } else {
                None
            }
        }
        GridKind::Rectangle { nx, ny, .. } => {
            let (ix, iy) = (id % nx, id / nx);
            let on_x = ix == 0 || ix == nx - 1;
            let on_y = iy == 0 || iy == ny - 1;
            match (on_x, on_y) {
                (true, false) => Some((Axis::A0, if ix == 0 { -1 } else { 1 })),
                (false, true) => Some((Axis::A1, if iy == 0 { -1 } else { 1 })),
                _ => None, // corner or interior
            }
        }
        GridKind::Disk { nr, .. } => match grid.disk_index(id) {
            Some((ring, _)) if ring == nr => Some((Axis::A0, 1)),
            _ => None,
        },
    }
}

/// Smaller eigenvalue of the symmetric 2x2 matrix [[a, b], [b, d]].
pub fn sym2_min_eig(a: f64, b: f64, d: f64) -> f64 {
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    mean - rad
}
