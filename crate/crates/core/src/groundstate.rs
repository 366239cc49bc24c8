//! The log ground state φ = -log u1, its discrete derivative fields, and
//! the Laplacian, Hessian, polar and growth estimates on it.
//!
//! Every derivative field lives on an interior mask: nodes where the
//! sup-normalized u1 is at least delta, at least 2h from the boundary, and
//! whose stencil stays strictly inside the positivity region of u1. At a
//! Dirichlet boundary φ diverges, so boundary-adjacent second differences
//! carry no information; the estimates checked here are interior and
//! one-sided, so the exclusion cannot manufacture a false pass. The disk
//! center node is excluded as well (the polar derivative formulas have a
//! 1/r factor there).

use serde::Serialize;

use crate::eigen::SpectrumResult;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geometry::{is_corner, Axis, DomainGrid, DomainMetrics, GridKind};
use crate::operator::BoundaryCondition;
use crate::potential::PotentialField;

/// Tolerance used by the pass/fail bound checks: discretization allowance
/// plus a floating-point floor.
pub fn tol_check(h: f64) -> f64 {
    20.0 * h * h + 1e-6
}

/// φ = -log u1 with u1 sup-normalized, plus central-difference fields on
/// the interior mask.
#[derive(Debug, Clone)]
pub struct GroundStateLog {
    /// Sup-normalized ground state per node (0 on a Dirichlet boundary).
    pub u1: Vec<f64>,
    /// φ per node; +inf where u1 is not positive.
    pub phi: Vec<f64>,
    pub grad: Vec<Option<[f64; 2]>>,
    pub grad_sq: Vec<Option<f64>>,
    pub laplacian: Vec<Option<f64>>,
    pub hessian: Vec<Option<[[f64; 2]; 2]>>,
    pub mask: Vec<bool>,
    pub delta: f64,
    pub h_max: f64,
    pub bc: BoundaryCondition,
    pub dim: usize,
}

impl GroundStateLog {
    pub fn masked_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mask.len()).filter(|&i| self.mask[i])
    }
}

/// Builds φ and its derivative fields from a solved spectrum.
pub fn log_ground_state(
    spectrum: &SpectrumResult,
    grid: &DomainGrid,
    delta: f64,
) -> Result<GroundStateLog> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta {delta} must lie in (0, 1)")));
    }
    let raw = spectrum.node_values(grid, &spectrum.u1);
    let sup = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(sup > 0.0) {
        return Err(Error::InvalidConfig("ground state has no positive values".into()));
    }
    let u1: Vec<f64> = raw.iter().map(|v| v / sup).collect();
    let phi: Vec<f64> = u1
        .iter()
        .map(|&v| if v > 0.0 { -v.ln() } else { f64::INFINITY })
        .collect();

    let axes: &[Axis] = match grid.kind {
        GridKind::Interval { .. } => &[Axis::A0],
        _ => &[Axis::A0, Axis::A1],
    };
    let offset = 2.0 * grid.h_max() - 1e-12;
    let mut mask = vec![false; grid.len()];
    for id in 0..grid.len() {
        if !grid.is_interior(id) || u1[id] < delta {
            continue;
        }
        if grid.is_disk() && grid.disk_index(id).is_none() {
            continue; // center node
        }
        if grid.distance_to_boundary(id) < offset {
            continue;
        }
        let stencil_ok = axes.iter().all(|&ax| {
            [-1i64, 1].iter().all(|&dir| {
                grid.axis_neighbor(id, ax, dir)
                    .map_or(false, |nbr| u1[nbr] > 0.0)
            })
        });
        if stencil_ok {
            mask[id] = true;
        }
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask);
    }

    let f = ScalarField::new(grid, &phi);
    let mut grad = vec![None; grid.len()];
    let mut grad_sq = vec![None; grid.len()];
    let mut laplacian = vec![None; grid.len()];
    let mut hessian = vec![None; grid.len()];
    for id in 0..grid.len() {
        if !mask[id] {
            continue;
        }
        grad[id] = f.grad(id);
        grad_sq[id] = f.grad_sq(id);
        laplacian[id] = f.laplacian(id);
        hessian[id] = f.hessian(id);
    }

    Ok(GroundStateLog {
        u1,
        phi,
        grad,
        grad_sq,
        laplacian,
        hessian,
        mask,
        delta,
        h_max: grid.h_max(),
        bc: spectrum.bc,
        dim: grid.dim(),
    })
}

/// Max over the mask of |Δφ - |∇φ|² + V - λ1|; O(h²) for smooth u1.
pub fn phi_identity_residual(gsl: &GroundStateLog, field: &PotentialField, lambda1: f64) -> f64 {
    let mut worst = 0.0f64;
    for id in gsl.masked_ids() {
        if let (Some(lap), Some(gsq)) = (gsl.laplacian[id], gsl.grad_sq[id]) {
            worst = worst.max((lap - gsq + field.values[id] - lambda1).abs());
        }
    }
    worst
}

/// Minimum over the mask of the smallest Hessian eigenvalue of φ and of
/// its diagonal entries. Both minima run over the same node set, so
/// hess_min <= hess_diag_min always.
pub fn hessian_extrema(gsl: &GroundStateLog) -> Result<(f64, f64)> {
    let mut hess_min = f64::INFINITY;
    let mut diag_min = f64::INFINITY;
    for id in gsl.masked_ids() {
        if let Some(h) = gsl.hessian[id] {
            if gsl.dim == 1 {
                hess_min = hess_min.min(h[0][0]);
                diag_min = diag_min.min(h[0][0]);
            } else {
                hess_min = hess_min.min(crate::fields::sym2_min_eig(h[0][0], h[0][1], h[1][1]));
                diag_min = diag_min.min(h[0][0].min(h[1][1]));
            }
        }
    }
    if !hess_min.is_finite() {
        return Err(Error::EmptyMask);
    }
    Ok((hess_min, diag_min))
}

/// The Δφ disjunction of the Neumann estimate: interior branch B1 from
/// (Δφ)² <= n sup(ΔV)/2 and boundary branch B2 from the curvature
/// inequality. On flat boundaries B2 is unavailable and the disjunction
/// degenerates to the interior branch, flagged.
#[derive(Debug, Clone, Serialize)]
pub struct LaplacianBoundCheck {
    pub max_laplacian_phi: f64,
    pub boundary_grad_sq_max: f64,
    /// sqrt(n sup(ΔV)+ / 2), the derivation's constant.
    pub b1: f64,
    /// (n/2) sqrt(sup(ΔV)+), the theorem statement's differing prefactor,
    /// recorded for comparison.
    pub b1_theorem_form: f64,
    pub b2: Option<f64>,
    pub curvature_unavailable: bool,
    pub bound: f64,
    pub margin: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn laplacian_bounds_check(
    gsl: &GroundStateLog,
    field: &PotentialField,
    metrics: &DomainMetrics,
    grid: &DomainGrid,
    lambda1: f64,
) -> Result<LaplacianBoundCheck> {
    if gsl.bc != BoundaryCondition::Neumann {
        return Err(Error::WrongBoundaryCondition("neumann"));
    }
    let mut max_lap = f64::NEG_INFINITY;
    for id in gsl.masked_ids() {
        if let Some(l) = gsl.laplacian[id] {
            max_lap = max_lap.max(l);
        }
    }
    if !max_lap.is_finite() {
        return Err(Error::EmptyMask);
    }

    let f = ScalarField::new(grid, &gsl.phi);
    let mut bgrad = 0.0f64;
    for id in grid.boundary_ids() {
        if is_corner(grid, id) {
            continue;
        }
        let Some(nd) = f.normal_derivative(id) else { continue };
        let tang_sq = match grid.kind {
            GridKind::Interval { .. } => 0.0,
            GridKind::Rectangle { .. } => {
                let (axis, _) = crate::fields::boundary_line(grid, id).unwrap();
                let t_axis = if axis == Axis::A0 { Axis::A1 } else { Axis::A0 };
                f.d1(id, t_axis).map_or(0.0, |t| t * t)
            }
            GridKind::Disk { radius, .. } => {
                f.d1(id, Axis::A1).map_or(0.0, |t| (t / radius) * (t / radius))
            }
        };
        bgrad = bgrad.max(nd * nd + tang_sq);
    }

    let n = gsl.dim as f64;
    let sup_dv_plus = field.sup_laplacian.max(0.0);
    let b1 = (n * sup_dv_plus / 2.0).sqrt();
    let b1_theorem_form = 0.5 * n * sup_dv_plus.sqrt();

    let (b2, curvature_unavailable) = if metrics.curvature_min > 0.0 {
        let mut sup = f64::NEG_INFINITY;
        for id in grid.boundary_ids() {
            if let Some(vn) = field.boundary_normal_derivative[id] {
                sup = sup.max(vn / metrics.curvature_min - field.values[id]);
            }
        }
        (Some(sup + lambda1), false)
    } else {
        (None, true)
    };

    let bound = match b2 {
        Some(b2) => b1.max(b2),
        None => b1,
    };
    let tol = tol_check(gsl.h_max);
    let margin = bound - max_lap;
    Ok(LaplacianBoundCheck {
        max_laplacian_phi: max_lap,
        boundary_grad_sq_max: bgrad,
        b1,
        b1_theorem_form,
        b2,
        curvature_unavailable,
        bound,
        margin,
        tol,
        passed: margin >= -tol,
    })
}

/// Polar estimates on the disk: the spherical Hessian bound and the
/// disjunction for the radial quantity r d/dr (r dφ/dr). Both are
/// recorded with margins and not asserted (the additive constant of the
/// spherical bound has no visible derivation and the radial right side is
/// implemented as printed).
#[derive(Debug, Clone, Serialize)]
pub struct PolarDiagnostics {
    /// max over the mask of Δ_θ φ (= φ_θθ for a planar disk).
    pub max_theta_laplacian: f64,
    /// max over the mask of ∂²φ/∂θ².
    pub max_theta_hessian: f64,
    pub bound_theta: f64,
    pub margin_theta: f64,
    /// max over the mask of r d/dr (r dφ/dr).
    pub max_radial: f64,
    pub bound_interior: f64,
    pub bound_boundary: f64,
    pub radial_margin: f64,
}

pub fn polar_diagnostics(
    gsl: &GroundStateLog,
    field: &PotentialField,
    grid: &DomainGrid,
    lambda1: f64,
) -> Result<PolarDiagnostics> {
    let GridKind::Disk { radius, nr, ntheta, dr, .. } = grid.kind else {
        return Err(Error::NotADisk);
    };
    if gsl.bc != BoundaryCondition::Neumann {
        return Err(Error::WrongBoundaryCondition("neumann"));
    }

    let f = ScalarField::new(grid, &gsl.phi);
    let mut max_theta = f64::NEG_INFINITY;
    for id in gsl.masked_ids() {
        if let Some(t2) = f.d2(id, Axis::A1) {
            max_theta = max_theta.max(t2);
        }
    }

    // psi = r dφ/dr wherever the radial central difference exists; 0 at the
    // center by continuity.
    let mut psi = vec![f64::NAN; grid.len()];
    psi[0] = 0.0;
    for id in 1..grid.len() {
        if let Some((ring, _)) = grid.disk_index(id) {
            if ring < nr {
                if let Some(fr) = f.d1(id, Axis::A0) {
                    if fr.is_finite() {
                        psi[id] = grid.radius_of(id) * fr;
                    }
                }
            }
        }
    }
    let mut max_radial = f64::NEG_INFINITY;
    for id in gsl.masked_ids() {
        let Some((ring, j)) = grid.disk_index(id) else { continue };
        let inward = if ring == 1 { 0 } else { grid.disk_id(ring - 1, j) };
        let outward = if ring + 1 <= nr { grid.disk_id(ring + 1, j) } else { continue };
        if psi[inward].is_nan() || psi[outward].is_nan() {
            continue;
        }
        let dpsi_dr = (psi[outward] - psi[inward]) / (2.0 * dr);
        max_radial = max_radial.max(grid.radius_of(id) * dpsi_dr);
    }
    if !max_theta.is_finite() || !max_radial.is_finite() {
        return Err(Error::EmptyMask);
    }

    // Right-hand sides, from the analytic potential data.
    let mut sup_theta_v = 0.0f64;
    let mut sup_interior = 0.0f64;
    for id in 0..grid.len() {
        let p = grid.coord(id);
        let r = grid.radius_of(id);
        let vtt = field.theta_second_at(p);
        sup_theta_v = sup_theta_v.max((r * vtt).max(0.0).sqrt());
        let vr = field.radial_first_at(p);
        let vrr = field.radial_second_at(p);
        let expr = 0.5 * r * vrr + 2.0 * r * vr + 2.0 * field.values[id] - lambda1;
        sup_interior = sup_interior.max(expr.max(0.0).sqrt());
    }
    let bound_theta = 0.125 + radius * sup_theta_v;

    let n = 2.0;
    let mut sup_boundary = f64::NEG_INFINITY;
    for id in grid.boundary_ids() {
        let p = grid.coord(id);
        let vr = field.radial_first_at(p);
        let r = radius;
        sup_boundary = sup_boundary
            .max((-r.powi(3) * vr - 2.0 * r * r * (field.values[id] - lambda1)) / n);
    }

    let _ = ntheta;
    Ok(PolarDiagnostics {
        max_theta_laplacian: max_theta,
        max_theta_hessian: max_theta,
        bound_theta,
        margin_theta: bound_theta - max_theta,
        max_radial,
        bound_interior: sup_interior,
        bound_boundary: sup_boundary,
        radial_margin: sup_interior.max(sup_boundary) - max_radial,
    })
}

/// The growth estimate with f = 0: when dV/dr >= 0 on the disk,
/// r dφ/dr - 2φ is maximized on the boundary, where it equals -2φ.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    /// max over the boundary of -2φ.
    pub boundary_max: f64,
    /// max over the mask of r dφ/dr - 2φ.
    pub interior_max: f64,
    /// boundary_max - interior_max; nonnegative within 10 h² when the
    /// hypothesis holds.
    pub margin: f64,
}

pub fn growth_check(
    gsl: &GroundStateLog,
    field: &PotentialField,
    grid: &DomainGrid,
) -> Result<GrowthCheck> {
    if !grid.is_disk() {
        return Err(Error::NotADisk);
    }
    if gsl.bc != BoundaryCondition::Neumann {
        return Err(Error::WrongBoundaryCondition("neumann"));
    }
    let Some(rdv) = &field.radial_derivative else {
        return Err(Error::NotADisk);
    };
    let scale = field.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if rdv.iter().any(|&v| v < -1e-12 * scale) {
        return Err(Error::HypothesisFailed(
            "dV/dr < 0 somewhere on the disk; growth estimate skipped".into(),
        ));
    }

    let boundary_max = grid
        .boundary_ids()
        .map(|id| -2.0 * gsl.phi[id])
        .fold(f64::NEG_INFINITY, f64::max);

    let f = ScalarField::new(grid, &gsl.phi);
    let mut interior_max = f64::NEG_INFINITY;
    for id in gsl.masked_ids() {
        if let Some(fr) = f.d1(id, Axis::A0) {
            interior_max = interior_max.max(grid.radius_of(id) * fr - 2.0 * gsl.phi[id]);
        }
    }
    if !interior_max.is_finite() || !boundary_max.is_finite() {
        return Err(Error::EmptyMask);
    }
    Ok(GrowthCheck {
        boundary_max,
        interior_max,
        margin: boundary_max - interior_max,
    })
}

/// Qualitative record for the cutoff bound on ρ²Δφ (Dirichlet runs).
/// ρ is the analytic distance to the boundary; the four controlling
/// quantities are reported without asserting a constant, since the source
/// states none.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffRecord {
    pub sup_rho2_lap_phi: f64,
    pub sup_rho_lap_rho_minus_3grad2: f64,
    pub sup_grad_rho_sq: f64,
    pub sup_rho2_sqrt_lap_v_plus: f64,
    pub sup_grad_rho_sqrt_v_minus_lambda_plus: f64,
}

pub fn cutoff_diagnostic(
    gsl: &GroundStateLog,
    grid: &DomainGrid,
    field: &PotentialField,
    lambda1: f64,
) -> Result<CutoffRecord> {
    if gsl.bc != BoundaryCondition::Dirichlet {
        return Err(Error::WrongBoundaryCondition("dirichlet"));
    }
    let rho: Vec<f64> = (0..grid.len()).map(|id| grid.distance_to_boundary(id)).collect();
    let rf = ScalarField::new(grid, &rho);

    let mut sup_rho2_lap_phi = f64::NEG_INFINITY;
    let mut sup_ridge = f64::NEG_INFINITY;
    let mut sup_grad_rho = f64::NEG_INFINITY;
    let mut sup_rho2_dv = f64::NEG_INFINITY;
    let mut sup_grad_v = f64::NEG_INFINITY;
    for id in gsl.masked_ids() {
        let r = rho[id];
        if let Some(lap_phi) = gsl.laplacian[id] {
            sup_rho2_lap_phi = sup_rho2_lap_phi.max(r * r * lap_phi);
        }
        if let (Some(lap_rho), Some(g2)) = (rf.laplacian(id), rf.grad_sq(id)) {
            sup_ridge = sup_ridge.max(r * lap_rho - 3.0 * g2);
            sup_grad_rho = sup_grad_rho.max(g2);
            let dv = field.laplacian_at(grid.coord(id)).max(0.0);
            sup_rho2_dv = sup_rho2_dv.max(r * r * dv.sqrt());
            let vml = (field.values[id] - lambda1).max(0.0);
            sup_grad_v = sup_grad_v.max(g2.sqrt() * vml.sqrt());
        }
    }
    if !sup_rho2_lap_phi.is_finite() {
        return Err(Error::EmptyMask);
    }
    Ok(CutoffRecord {
        sup_rho2_lap_phi,
        sup_rho_lap_rho_minus_3grad2: sup_ridge,
        sup_grad_rho_sq: sup_grad_rho,
        sup_rho2_sqrt_lap_v_plus: sup_rho2_dv,
        sup_grad_rho_sqrt_v_minus_lambda_plus: sup_grad_v,
    })
}

/// Union of the φ diagnostics a run can produce.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PhiDiagnostics {
    pub hess_min: Option<f64>,
    pub hess_diag_min: Option<f64>,
    pub identity_residual: Option<f64>,
    pub laplacian_bound: Option<LaplacianBoundCheck>,
    pub polar: Option<PolarDiagnostics>,
    pub growth: Option<GrowthCheck>,
    pub cutoff: Option<CutoffRecord>,
}
