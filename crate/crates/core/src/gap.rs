//! The quotient u = u2/u1, its boundary behavior, and every gap lower
//! bound: the universal bound sqrt(2c), the theta/diameter bound maximized
//! over beta, and the barrier bound 2 d^-2 exp(-a d^2). Also the
//! proof-level gradient estimates on u.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{boundary_line, ScalarField};
use crate::geometry::{is_corner, Axis, DomainGrid, DomainMetrics};
use crate::groundstate::{tol_check, GroundStateLog};
use crate::eigen::SpectrumResult;
use crate::operator::BoundaryCondition;

/// Reliability threshold for quotient values: nodes with u1 below this
/// fraction of its sup carry no usable ratio (matches the default mask
/// parameter of the ground-state log).
pub const QUOTIENT_DELTA: f64 = 1e-6;

/// u = u2/u1 per node. Under Dirichlet conditions the boundary values are
/// one-sided quadratic extrapolations along the inward lattice line (the
/// limit exists and is smooth up to the boundary).
#[derive(Debug, Clone)]
pub struct QuotientField {
    /// Ratio per node; NaN where unavailable.
    pub u: Vec<f64>,
    pub valid: Vec<bool>,
    pub sup_abs: f64,
    /// Lattice edges across which u changes sign.
    pub sign_changes: Vec<(usize, usize)>,
    /// Boundary nodes skipped because u1 was below threshold there.
    pub skipped_boundary: usize,
    pub bc: BoundaryCondition,
}

pub fn quotient(spectrum: &SpectrumResult, grid: &DomainGrid) -> Result<QuotientField> {
    let u1 = spectrum.node_values(grid, &spectrum.u1);
    let u2 = spectrum.node_values(grid, &spectrum.u2);
    let sup_u1 = u1.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = QUOTIENT_DELTA * sup_u1;

    let mut u = vec![f64::NAN; grid.len()];
    let mut valid = vec![false; grid.len()];
    for id in 0..grid.len() {
        let interior_value = match spectrum.bc {
            BoundaryCondition::Neumann => true,
            BoundaryCondition::Dirichlet => grid.is_interior(id),
        };
        if interior_value && u1[id] >= floor {
            u[id] = u2[id] / u1[id];
            valid[id] = true;
        }
    }

    let sup_interior = u
        .iter()
        .zip(&valid)
        .filter(|(_, &v)| v)
        .map(|(x, _)| x.abs())
        .fold(0.0f64, f64::max);

    let mut skipped_boundary = 0usize;
    if spectrum.bc == BoundaryCondition::Dirichlet {
        for id in grid.boundary_ids() {
            let Some((axis, dir)) = boundary_line(grid, id) else {
                skipped_boundary += 1; // corner
                continue;
            };
            let n1 = grid.axis_neighbor(id, axis, -dir);
            let n2 = n1.and_then(|n| grid.axis_neighbor(n, axis, -dir));
            let n3 = n2.and_then(|n| grid.axis_neighbor(n, axis, -dir));
            let (Some(n1), Some(n2), Some(n3)) = (n1, n2, n3) else {
                skipped_boundary += 1;
                continue;
            };
            if !(valid[n1] && valid[n2] && valid[n3]) {
                skipped_boundary += 1;
                continue;
            }
            let quad = 3.0 * u[n1] - 3.0 * u[n2] + u[n3];
            let lin = 2.0 * u[n1] - u[n2];
            if (quad - lin).abs() > 0.1 * sup_interior {
                return Err(Error::ExtrapolationUnstable {
                    node: id,
                    disagreement: (quad - lin).abs(),
                });
            }
            u[id] = quad;
            valid[id] = true;
        }
    }

    // Sign convention: positive at the largest-magnitude valid node.
    // Symmetric quotients have equal-magnitude extrema at both ends, so
    // ties within a small relative window go to the lowest node id to
    // keep the convention deterministic.
    let mut sup_abs = 0.0f64;
    for id in 0..grid.len() {
        if valid[id] {
            sup_abs = sup_abs.max(u[id].abs());
        }
    }
    let at_max = (0..grid.len())
        .find(|&id| valid[id] && u[id].abs() >= sup_abs * (1.0 - 1e-6))
        .map(|id| u[id])
        .unwrap_or(0.0);
    if at_max < 0.0 {
        for v in &mut u {
            *v = -*v;
        }
    }

    let mut sign_changes = Vec::new();
    let axes: &[Axis] = if grid.dim() == 1 { &[Axis::A0] } else { &[Axis::A0, Axis::A1] };
    for id in 0..grid.len() {
        if !valid[id] {
            continue;
        }
        for &axis in axes {
            if let Some(nbr) = grid.axis_neighbor(id, axis, 1) {
                if nbr != id && valid[nbr] && u[id] * u[nbr] < 0.0 {
                    sign_changes.push((id, nbr));
                }
            }
        }
    }

    Ok(QuotientField {
        u,
        valid,
        sup_abs,
        sign_changes,
        skipped_boundary,
        bc: spectrum.bc,
    })
}

/// Result of the boundary Neumann-condition check on u.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaOneCheck {
    /// max over evaluable boundary nodes of |du/dnu|; None if every node
    /// was gated off (e.g. u1 decayed below threshold near an artificial
    /// truncation boundary).
    pub max_normal_derivative: Option<f64>,
    pub evaluated: usize,
    pub skipped: usize,
}

pub fn lemma1_check(q: &QuotientField, grid: &DomainGrid) -> LemmaOneCheck {
    let f = ScalarField::new(grid, &q.u);
    let mut max_nd: Option<f64> = None;
    let mut evaluated = 0;
    let mut skipped = 0;
    for id in grid.boundary_ids() {
        if is_corner(grid, id) || !q.valid[id] {
            skipped += 1;
            continue;
        }
        let Some((axis, dir)) = boundary_line(grid, id) else {
            skipped += 1;
            continue;
        };
        let ok = grid
            .axis_neighbor(id, axis, -dir)
            .and_then(|n1| grid.axis_neighbor(n1, axis, -dir).map(|n2| (n1, n2)))
            .filter(|&(n1, n2)| q.valid[n1] && q.valid[n2])
            .is_some();
        if !ok {
            skipped += 1;
            continue;
        }
        if let Some(nd) = f.normal_derivative(id) {
            if nd.is_finite() {
                evaluated += 1;
                max_nd = Some(max_nd.map_or(nd.abs(), |m: f64| m.max(nd.abs())));
            }
        }
    }
    LemmaOneCheck { max_normal_derivative: max_nd, evaluated, skipped }
}

/// Max over the mask of |Δu + (λ2-λ1) u - 2 ∇φ·∇u|. The gradient of φ is
/// taken in logarithmic-derivative form -∇u1/u1, which keeps the residual
/// uniformly second order up to the mask edge (differences of log u1
/// amplify the curvature blowup at a Dirichlet boundary).
pub fn quotient_residual(q: &QuotientField, gsl: &GroundStateLog, grid: &DomainGrid, gap: f64) -> f64 {
    let fu = ScalarField::new(grid, &q.u);
    let f1 = ScalarField::new(grid, &gsl.u1);
    let mut worst = 0.0f64;
    for id in gsl.masked_ids() {
        let (Some(lap_u), Some(grad_u), Some(grad_u1)) =
            (fu.laplacian(id), fu.grad(id), f1.grad(id))
        else {
            continue;
        };
        let phi_grad = [-grad_u1[0] / gsl.u1[id], -grad_u1[1] / gsl.u1[id]];
        let r = lap_u + gap * q.u[id]
            - 2.0 * (phi_grad[0] * grad_u[0] + phi_grad[1] * grad_u[1]);
        if r.is_finite() {
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// theta(beta) = arcsin 1/sqrt(1 + beta/(sqrt(2)-beta)) on (0, sqrt(2)).
pub fn theta(beta: f64) -> Result<f64> {
    let sqrt2 = 2.0f64.sqrt();
    if !(beta > 0.0 && beta < sqrt2) {
        return Err(Error::BetaOutOfDomain(beta));
    }
    Ok((1.0 / (1.0 + beta / (sqrt2 - beta))).sqrt().asin())
}

/// Golden-section maximization on [a, b] to an interval of width `tol`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// One evaluated lower bound with its applicability and margin against
/// the measured gap.
#[derive(Debug, Clone, Serialize)]
pub struct BoundEvaluation {
    pub applicable: bool,
    /// Evaluated outside its home setting (the barrier bound on a
    /// Dirichlet run); recorded but not counted against the run.
    pub advisory: bool,
    pub value: f64,
    pub margin: f64,
}

impl BoundEvaluation {
    fn inapplicable() -> Self {
        BoundEvaluation { applicable: false, advisory: false, value: f64::NAN, margin: f64::NAN }
    }
}

/// The three gap lower bounds.
#[derive(Debug, Clone, Serialize)]
pub struct GapBounds {
    pub universal: BoundEvaluation,
    pub thm1: BoundEvaluation,
    pub beta_star: f64,
    pub thm32: BoundEvaluation,
    /// Hessian deficit a = max(0, -hess_min) entering the barrier bound.
    pub a_measured: f64,
}

/// The theta/diameter objective theta(beta)^2/d^2 + beta sqrt(c).
pub fn thm1_objective(beta: f64, diameter: f64, c: f64) -> f64 {
    let t = theta(beta).unwrap_or(0.0);
    t * t / (diameter * diameter) + beta * c.sqrt()
}

/// The barrier bound 2 d^-2 exp(-a d^2).
pub fn thm32_bound(a: f64, diameter: f64) -> f64 {
    2.0 / (diameter * diameter) * (-a * diameter * diameter).exp()
}

/// Evaluates all three bounds. `c` is the potential's Hessian lower bound
/// and `hess_min` the measured Hessian minimum of -log u1. The theta
/// bound is maximized over beta by golden-section search on 8 sub-brackets
/// of (0, sqrt(2)) to bracket width 1e-10.
pub fn gap_lower_bounds(
    metrics: &DomainMetrics,
    c: f64,
    hess_min: f64,
    bc: BoundaryCondition,
    gap_measured: f64,
) -> GapBounds {
    let d = metrics.diameter;

    let universal = if c > 0.0 {
        let value = (2.0 * c).sqrt();
        BoundEvaluation { applicable: true, advisory: false, value, margin: gap_measured - value }
    } else {
        BoundEvaluation::inapplicable()
    };

    let (thm1, beta_star) = if c > 0.0 {
        let sqrt2 = 2.0f64.sqrt();
        let eps = 1e-9;
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for k in 0..8 {
            let lo = eps + (sqrt2 - 2.0 * eps) * k as f64 / 8.0;
            let hi = eps + (sqrt2 - 2.0 * eps) * (k + 1) as f64 / 8.0;
            let (x, fx) = golden_max(|b| thm1_objective(b, d, c), lo, hi, 1e-10);
            if fx > best.1 {
                best = (x, fx);
            }
        }
        (
            BoundEvaluation {
                applicable: true,
                advisory: false,
                value: best.1,
                margin: gap_measured - best.1,
            },
            best.0,
        )
    } else {
        (BoundEvaluation::inapplicable(), f64::NAN)
    };

    let a_measured = (-hess_min).max(0.0);
    let value = thm32_bound(a_measured, d);
    let thm32 = BoundEvaluation {
        applicable: true,
        advisory: bc == BoundaryCondition::Dirichlet,
        value,
        margin: gap_measured - value,
    };

    GapBounds { universal, thm1, beta_star, thm32, a_measured }
}

/// One proof-level pointwise gradient estimate.
#[derive(Debug, Clone, Serialize)]
pub struct GradientEstimateCheck {
    pub applicable: bool,
    pub reason: Option<String>,
    /// max over the evaluated nodes of (left side - right side).
    pub margin: f64,
    pub tol: f64,
    pub passed: bool,
}

impl GradientEstimateCheck {
    fn gated(reason: &str) -> Self {
        GradientEstimateCheck {
            applicable: false,
            reason: Some(reason.into()),
            margin: f64::NAN,
            tol: f64::NAN,
            passed: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientChecks {
    pub eq_1_36: GradientEstimateCheck,
    pub thm_3_1: GradientEstimateCheck,
}

/// Checks the two pointwise gradient estimates on u over the mask.
///
/// The first (convex-potential) estimate bounds |∇u| by
/// sqrt(alpha (1 + beta/(sqrt2-beta)) sup u^2 - alpha u^2) with
/// alpha = gap - beta sqrt(c); it needs c > 0.
///
/// The second (barrier) estimate bounds |∇ sqrt(log(cb/(cb-u)))| by
/// sqrt(alpha)/2 with cb = (1+eps) sup u and
/// alpha = 2 gap (1 + 1/eps) - 4 min(hess_min, 0); it is stated for the
/// Neumann problem on a convex domain and is evaluated where the left
/// side is real (u >= 0).
pub fn proof_gradient_checks(
    q: &QuotientField,
    gsl: &GroundStateLog,
    grid: &DomainGrid,
    gap: f64,
    c: f64,
    hess_min: f64,
    beta: f64,
    eps: f64,
) -> GradientChecks {
    let tol = tol_check(gsl.h_max);
    let sup = q.sup_abs;

    let eq_1_36 = if c <= 0.0 {
        GradientEstimateCheck::gated("requires a positive Hessian lower bound c")
    } else {
        let alpha = gap - beta * c.sqrt();
        if alpha <= 0.0 {
            GradientEstimateCheck::gated("alpha = gap - beta sqrt(c) not positive")
        } else {
            let b_ratio = beta / (2.0f64.sqrt() - beta);
            let fu = ScalarField::new(grid, &q.u);
            let mut margin = f64::NEG_INFINITY;
            for id in gsl.masked_ids() {
                if !q.valid[id] {
                    continue;
                }
                let Some(g2) = fu.grad_sq(id) else { continue };
                if !g2.is_finite() {
                    continue;
                }
                let un = q.u[id] / sup;
                let denom_sq = alpha * (1.0 + b_ratio) - alpha * un * un;
                if denom_sq <= 0.0 {
                    continue;
                }
                let lhs = (g2.sqrt() / sup) / denom_sq.sqrt();
                margin = margin.max(lhs - 1.0);
            }
            GradientEstimateCheck {
                applicable: margin.is_finite(),
                reason: None,
                margin,
                tol,
                passed: margin <= tol,
            }
        }
    };

    let thm_3_1 = if gsl.bc != BoundaryCondition::Neumann {
        GradientEstimateCheck::gated("stated for the Neumann problem")
    } else {
        let cb = (1.0 + eps) * sup;
        let alpha = 2.0 * gap * (1.0 + 1.0 / eps) - 4.0 * hess_min.min(0.0);
        let rhs = 0.5 * alpha.sqrt();
        let g: Vec<f64> = q
            .u
            .iter()
            .map(|&v| {
                if v.is_finite() && v >= 0.0 && v < cb {
                    (cb / (cb - v)).ln().max(0.0).sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect();
        let gf = ScalarField::new(grid, &g);
        let mut margin = f64::NEG_INFINITY;
        for id in gsl.masked_ids() {
            let Some(gr2) = gf.grad_sq(id) else { continue };
            if gr2.is_finite() {
                margin = margin.max(gr2.sqrt() - rhs);
            }
        }
        GradientEstimateCheck {
            applicable: margin.is_finite(),
            reason: None,
            margin,
            tol,
            passed: margin <= tol,
        }
    };

    GradientChecks { eq_1_36, thm_3_1 }
}

/// Everything the gap analysis produced for one run.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub gap: f64,
    pub bounds: GapBounds,
    pub residual_eq15: Option<f64>,
    pub lemma1: LemmaOneCheck,
    pub gradients: GradientChecks,
    pub tol: f64,
    /// True when any applicable, non-advisory bound is violated beyond
    /// tolerance (or an applicable convex-potential gradient estimate
    /// fails). The barrier gradient estimate is recorded, not asserted.
    pub failed: bool,
}

pub fn assemble_report(
    gap: f64,
    bounds: GapBounds,
    residual_eq15: Option<f64>,
    lemma1: LemmaOneCheck,
    gradients: GradientChecks,
    h_max: f64,
) -> GapReport {
    let tol = tol_check(h_max);
    let bound_failed = |b: &BoundEvaluation| b.applicable && !b.advisory && b.margin < -tol;
    let failed = bound_failed(&bounds.universal)
        || bound_failed(&bounds.thm1)
        || bound_failed(&bounds.thm32)
        || (gradients.eq_1_36.applicable && !gradients.eq_1_36.passed);
    GapReport { gap, bounds, residual_eq15, lemma1, gradients, tol, failed }
}
