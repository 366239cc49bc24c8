//! Potential families, their sampling on grids, and the analytic metadata
//! (Hessian lower bound, sup of the Laplacian, normal and radial
//! derivatives) that the gap and ground-state estimates consume.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{sym2_min_eig, ScalarField};
use crate::geometry::{DomainGrid, GridKind};

/// Threshold above which sampled values signal a grid/spec mismatch.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// V(x) = (c/2) |x|^2, Hessian = c I.
    Harmonic { c: f64 },
    /// V(x) = (c/2) |x - center|^2.
    ShiftedHarmonic { c: f64, center: Vec<f64> },
    /// Separable quartic well, V(x) = sum_i a4 x_i^4 + a2 x_i^2 with a2 < 0.
    DoubleWell { a4: f64, a2: f64 },
    /// Affine potential V(x) = slope . x.
    Tilted { slope: Vec<f64> },
    /// Seeded finite sum of cosines with integer wave vectors of sup-norm
    /// at most `wavenumber`; smooth with closed-form derivatives.
    RandomSmooth { seed: u64, amplitude: f64, wavenumber: u32 },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Zero | PotentialSpec::Tilted { .. } => Ok(()),
            PotentialSpec::Harmonic { c } | PotentialSpec::ShiftedHarmonic { c, .. } => {
                if *c > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential(format!("harmonic c = {c} must be > 0")))
                }
            }
            PotentialSpec::DoubleWell { a4, a2 } => {
                if *a4 > 0.0 && *a2 < 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential(format!(
                        "double well needs a4 > 0 and a2 < 0, got a4 = {a4}, a2 = {a2}"
                    )))
                }
            }
            PotentialSpec::RandomSmooth { amplitude, wavenumber, .. } => {
                if *amplitude < 0.0 {
                    Err(Error::InvalidPotential(format!("amplitude {amplitude} must be >= 0")))
                } else if *wavenumber == 0 {
                    Err(Error::InvalidPotential("wavenumber must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Short comma-free label used in report rows.
    pub fn label(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        match self {
            PotentialSpec::Zero => "zero".into(),
            PotentialSpec::Harmonic { c } => format!("harmonic(c={c})"),
            PotentialSpec::ShiftedHarmonic { c, center } => {
                format!("shifted_harmonic(c={c};center={})", join(center))
            }
            PotentialSpec::DoubleWell { a4, a2 } => format!("double_well(a4={a4};a2={a2})"),
            PotentialSpec::Tilted { slope } => format!("tilted({})", join(slope)),
            PotentialSpec::RandomSmooth { seed, amplitude, wavenumber } => {
                format!("random_smooth(seed={seed};amp={amplitude};k={wavenumber})")
            }
        }
    }

    /// Hessian lower bound `c` of the bound statements, when closed-form.
    pub fn analytic_c(&self) -> Option<f64> {
        match self {
            PotentialSpec::Zero | PotentialSpec::Tilted { .. } => Some(0.0),
            PotentialSpec::Harmonic { c } | PotentialSpec::ShiftedHarmonic { c, .. } => Some(*c),
            PotentialSpec::DoubleWell { .. } => None, // depends on the domain, see sample()
            PotentialSpec::RandomSmooth { .. } => None,
        }
    }

    fn evaluator(&self, dim: usize) -> Result<Evaluator> {
        let fix = |v: &Vec<f64>, what: &str| -> Result<[f64; 2]> {
            if v.len() != dim {
                return Err(Error::InvalidPotential(format!(
                    "{what} has {} components but the domain is {dim}-dimensional",
                    v.len()
                )));
            }
            Ok([v[0], if dim > 1 { v[1] } else { 0.0 }])
        };
        Ok(match self {
            PotentialSpec::Zero => Evaluator::Zero,
            PotentialSpec::Harmonic { c } => Evaluator::Quadratic { c: *c, center: [0.0, 0.0] },
            PotentialSpec::ShiftedHarmonic { c, center } => Evaluator::Quadratic {
                c: *c,
                center: fix(center, "center")?,
            },
            PotentialSpec::DoubleWell { a4, a2 } => Evaluator::DoubleWell { a4: *a4, a2: *a2, dim },
            PotentialSpec::Tilted { slope } => Evaluator::Tilted { slope: fix(slope, "slope")? },
            PotentialSpec::RandomSmooth { seed, amplitude, wavenumber } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let w = *wavenumber as i64;
                let mut terms = Vec::with_capacity(COSINE_TERMS);
                while terms.len() < COSINE_TERMS {
                    let kx = rng.gen_range(-w..=w) as f64;
                    let ky = if dim > 1 { rng.gen_range(-w..=w) as f64 } else { 0.0 };
                    let coeff = rng.gen_range(-1.0..1.0);
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    if kx == 0.0 && ky == 0.0 {
                        continue;
                    }
                    terms.push(CosTerm { k: [kx, ky], coeff, phase });
                }
                Evaluator::Cosines { amplitude: *amplitude, terms }
            }
        })
    }
}

const COSINE_TERMS: usize = 8;

#[derive(Debug, Clone)]
struct CosTerm {
    k: [f64; 2],
    coeff: f64,
    phase: f64,
}

#[derive(Debug, Clone)]
enum Evaluator {
    Zero,
    Quadratic { c: f64, center: [f64; 2] },
    DoubleWell { a4: f64, a2: f64, dim: usize },
    Tilted { slope: [f64; 2] },
    Cosines { amplitude: f64, terms: Vec<CosTerm> },
}

impl Evaluator {
    fn value(&self, p: [f64; 2]) -> f64 {
        match self {
            Evaluator::Zero => 0.0,
            Evaluator::Quadratic { c, center } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                0.5 * c * (dx * dx + dy * dy)
            }
            Evaluator::DoubleWell { a4, a2, dim } => {
                let mut v = a4 * p[0].powi(4) + a2 * p[0] * p[0];
                if *dim > 1 {
                    v += a4 * p[1].powi(4) + a2 * p[1] * p[1];
                }
                v
            }
            Evaluator::Tilted { slope } => slope[0] * p[0] + slope[1] * p[1],
            Evaluator::Cosines { amplitude, terms } => {
                amplitude
                    * terms
                        .iter()
                        .map(|t| t.coeff * (t.k[0] * p[0] + t.k[1] * p[1] + t.phase).cos())
                        .sum::<f64>()
            }
        }
    }

    fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            Evaluator::Zero => [0.0, 0.0],
            Evaluator::Quadratic { c, center } => {
                [c * (p[0] - center[0]), c * (p[1] - center[1])]
            }
            Evaluator::DoubleWell { a4, a2, dim } => {
                let g0 = 4.0 * a4 * p[0].powi(3) + 2.0 * a2 * p[0];
                let g1 = if *dim > 1 { 4.0 * a4 * p[1].powi(3) + 2.0 * a2 * p[1] } else { 0.0 };
                [g0, g1]
            }
            Evaluator::Tilted { slope } => *slope,
            Evaluator::Cosines { amplitude, terms } => {
                let mut g = [0.0, 0.0];
                for t in terms {
                    let s = (t.k[0] * p[0] + t.k[1] * p[1] + t.phase).sin();
                    g[0] -= amplitude * t.coeff * t.k[0] * s;
                    g[1] -= amplitude * t.coeff * t.k[1] * s;
                }
                g
            }
        }
    }

    fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            Evaluator::Zero | Evaluator::Tilted { .. } => [[0.0; 2]; 2],
            Evaluator::Quadratic { c, .. } => [[*c, 0.0], [0.0, *c]],
            Evaluator::DoubleWell { a4, a2, dim } => {
                let h0 = 12.0 * a4 * p[0] * p[0] + 2.0 * a2;
                let h1 = if *dim > 1 { 12.0 * a4 * p[1] * p[1] + 2.0 * a2 } else { 0.0 };
                [[h0, 0.0], [0.0, h1]]
            }
            Evaluator::Cosines { amplitude, terms } => {
                let mut h = [[0.0; 2]; 2];
                for t in terms {
                    let c = (t.k[0] * p[0] + t.k[1] * p[1] + t.phase).cos();
                    let w = -amplitude * t.coeff * c;
                    h[0][0] += w * t.k[0] * t.k[0];
                    h[0][1] += w * t.k[0] * t.k[1];
                    h[1][1] += w * t.k[1] * t.k[1];
                }
                h[1][0] = h[0][1];
                h
            }
        }
    }
}

/// A potential sampled on a grid, with the analytic quantities the paper's
/// hypotheses consume.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub spec: PotentialSpec,
    pub values: Vec<f64>,
    /// Lower bound c on the smallest Hessian eigenvalue over the domain.
    pub hessian_lb: f64,
    /// sup over the domain of the Laplacian of V.
    pub sup_laplacian: f64,
    /// dV/dnu per node (`Some` on boundary nodes).
    pub boundary_normal_derivative: Vec<Option<f64>>,
    /// r dV/dr per node; disks only.
    pub radial_derivative: Option<Vec<f64>>,
    /// Whether hessian_lb came from a closed form (false: sampled estimate).
    pub analytic_metadata: bool,
    dim: usize,
    eval: Evaluator,
}

impl PotentialField {
    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        self.eval.value(p)
    }

    pub fn gradient_at(&self, p: [f64; 2]) -> [f64; 2] {
        self.eval.gradient(p)
    }

    pub fn laplacian_at(&self, p: [f64; 2]) -> f64 {
        let h = self.eval.hessian(p);
        if self.dim == 1 {
            h[0][0]
        } else {
            h[0][0] + h[1][1]
        }
    }

    /// dV/dr at a point (0 at the origin, where the direction degenerates).
    pub fn radial_first_at(&self, p: [f64; 2]) -> f64 {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let g = self.eval.gradient(p);
        (g[0] * p[0] + g[1] * p[1]) / r
    }

    /// d²V/dr² at a point.
    pub fn radial_second_at(&self, p: [f64; 2]) -> f64 {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let e = [p[0] / r, p[1] / r];
        let h = self.eval.hessian(p);
        e[0] * e[0] * h[0][0] + 2.0 * e[0] * e[1] * h[0][1] + e[1] * e[1] * h[1][1]
    }

    /// d²V/dθ² at a point: r² t.H.t - r dV/dr with t the unit tangent.
    pub fn theta_second_at(&self, p: [f64; 2]) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 == 0.0 {
            return 0.0;
        }
        let t = [-p[1], p[0]]; // r * tangent
        let h = self.eval.hessian(p);
        let tht = t[0] * t[0] * h[0][0] + 2.0 * t[0] * t[1] * h[0][1] + t[1] * t[1] * h[1][1];
        tht - r2.sqrt() * self.radial_first_at(p)
    }
}

/// Continuous minimum of the smallest Hessian eigenvalue over the domain,
/// for families where that is closed-form.
fn closed_form_hessian_lb(spec: &PotentialSpec, grid: &DomainGrid) -> Option<f64> {
    match spec {
        PotentialSpec::Zero | PotentialSpec::Tilted { .. } => Some(0.0),
        PotentialSpec::Harmonic { c } | PotentialSpec::ShiftedHarmonic { c, .. } => Some(*c),
        PotentialSpec::DoubleWell { a4, a2 } => {
            // Per-axis V'' = 12 a4 t^2 + 2 a2, minimized at the admissible t nearest 0.
            let axis_min = |lo: f64, hi: f64| {
                let t = if lo <= 0.0 && hi >= 0.0 {
                    0.0
                } else if lo > 0.0 {
                    lo
                } else {
                    hi
                };
                12.0 * a4 * t * t + 2.0 * a2
            };
            Some(match grid.kind {
                GridKind::Interval { a, b, .. } => axis_min(a, b),
                GridKind::Rectangle { x0, x1, y0, y1, .. } => {
                    axis_min(x0, x1).min(axis_min(y0, y1))
                }
                GridKind::Disk { radius, .. } => axis_min(-radius, radius),
            })
        }
        PotentialSpec::RandomSmooth { .. } => None,
    }
}

/// Samples a potential on a grid and fills all metadata fields. Closed
/// forms are used wherever the family admits them; the random family falls
/// back to a node-sampled Hessian bound and is flagged as such.
pub fn sample(spec: &PotentialSpec, grid: &DomainGrid) -> Result<PotentialField> {
    spec.validate()?;
    let dim = grid.dim();
    let eval = spec.evaluator(dim)?;

    let values: Vec<f64> = (0..grid.len()).map(|i| eval.value(grid.coord(i))).collect();
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs > OVERFLOW_THRESHOLD {
        return Err(Error::PotentialOverflow { max_abs });
    }

    let node_min_eig = (0..grid.len())
        .map(|i| {
            let h = eval.hessian(grid.coord(i));
            if dim == 1 {
                h[0][0]
            } else {
                sym2_min_eig(h[0][0], h[0][1], h[1][1])
            }
        })
        .fold(f64::INFINITY, f64::min);
    let (hessian_lb, analytic_metadata) = match closed_form_hessian_lb(spec, grid) {
        Some(c) => (c, true),
        None => (node_min_eig, false),
    };

    let sup_laplacian = (0..grid.len())
        .map(|i| {
            let h = eval.hessian(grid.coord(i));
            if dim == 1 {
                h[0][0]
            } else {
                h[0][0] + h[1][1]
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let mut boundary_normal_derivative = vec![None; grid.len()];
    for id in grid.boundary_ids() {
        if let Some(nu) = grid.normal(id) {
            let g = eval.gradient(grid.coord(id));
            boundary_normal_derivative[id] = Some(g[0] * nu[0] + g[1] * nu[1]);
        }
    }

    // r dV/dr = x . grad V, well defined at the origin too.
    let radial_derivative = grid.is_disk().then(|| {
        (0..grid.len())
            .map(|i| {
                let p = grid.coord(i);
                let g = eval.gradient(p);
                g[0] * p[0] + g[1] * p[1]
            })
            .collect()
    });

    Ok(PotentialField {
        spec: spec.clone(),
        values,
        hessian_lb,
        sup_laplacian,
        boundary_normal_derivative,
        radial_derivative,
        analytic_metadata,
        dim,
        eval,
    })
}

/// Minimum over interior nodes of the smallest eigenvalue of the
/// central-difference Hessian of the sampled values. Exact on quadratics.
pub fn hessian_lb_numeric(field: &PotentialField, grid: &DomainGrid) -> f64 {
    let f = ScalarField::new(grid, &field.values);
    grid.interior_ids()
        .filter_map(|id| f.hessian_min_eig(id))
        .fold(f64::INFINITY, f64::min)
}
