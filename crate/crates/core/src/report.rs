//! Configuration-driven experiment pipeline: single runs, parameter
//! sweeps, and grid-refinement convergence studies, with machine-readable
//! JSON and CSV reports.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eigen::{dense_oracle, smallest_two, SpectrumResult};
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::gap::{
    assemble_report, gap_lower_bounds, lemma1_check, proof_gradient_checks, quotient,
    quotient_residual, GapReport,
};
use crate::geometry::{build_grid, metrics, DomainSpec};
use crate::groundstate::{
    cutoff_diagnostic, growth_check, hessian_extrema, laplacian_bounds_check, log_ground_state,
    phi_identity_residual, polar_diagnostics, tol_check, PhiDiagnostics,
};
use crate::operator::{assemble, BoundaryCondition, DiscreteOperator};
use crate::potential::{sample, PotentialSpec};

/// Names of the run-level checks a config may select.
pub const CHECK_NAMES: &[&str] = &[
    "universal_bound",
    "thm1_bound",
    "thm32_bound",
    "log_concavity_2_1",
    "laplacian_disjunction_2_2",
    "polar_hessian_2_13",
    "polar_radial_2_17_2_20",
    "growth_2_30",
    "gradient_1_36",
    "gradient_3_1",
    "lemma1_neumann",
    "identity_2_1",
    "eq_1_5_residual",
    "cutoff_4_1",
];

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    10_000
}
fn default_seed() -> u64 {
    24029
}
fn default_delta() -> f64 {
    1e-6
}
fn default_beta() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    1.0
}

/// One experiment: a domain, a potential, boundary conditions, and solver
/// parameters. Unknown JSON keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub potential: PotentialSpec,
    pub bc: BoundaryCondition,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// beta for the convex-potential gradient estimate.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// epsilon for the barrier gradient estimate.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Checks to run; None means all applicable.
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.potential.validate()?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta {} must lie in (0,1)", self.delta)));
        }
        if !(self.beta > 0.0 && self.beta < 2.0f64.sqrt()) {
            return Err(Error::InvalidConfig(format!(
                "beta {} must lie in (0, sqrt(2))",
                self.beta
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon {} must be positive", self.epsilon)));
        }
        if let Some(names) = &self.checks {
            for n in names {
                if !CHECK_NAMES.contains(&n.as_str()) {
                    return Err(Error::InvalidConfig(format!("unknown check name '{n}'")));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    /// Whether a FAIL here fails the run. Recorded-only diagnostics and
    /// advisory evaluations do not block.
    pub blocking: bool,
    pub note: Option<String>,
}

impl CheckResult {
    fn skipped(name: &'static str, note: &str) -> CheckResult {
        CheckResult {
            name,
            status: CheckStatus::Skipped,
            measured: None,
            bound: None,
            margin: None,
            blocking: false,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    pub residual1: f64,
    pub residual2: f64,
    pub iterations: usize,
    pub near_degenerate: bool,
    pub positive_interior: bool,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Timings {
    pub assemble_ms: f64,
    pub solve_ms: f64,
    pub groundstate_ms: f64,
    pub gap_ms: f64,
    pub total_ms: f64,
}

/// Full report of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub diameter: f64,
    pub hessian_lb: f64,
    pub h_max: f64,
    pub spectrum: SpectrumSummary,
    pub diagnostics: PhiDiagnostics,
    pub gap_report: GapReport,
    pub checks: Vec<CheckResult>,
    pub status: CheckStatus,
    pub timings: Timings,
}

struct Pipeline {
    grid: crate::geometry::DomainGrid,
    field: crate::potential::PotentialField,
    op: DiscreteOperator,
    spectrum: SpectrumResult,
}

fn solve_pipeline(config: &RunConfig) -> Result<(Pipeline, f64, f64)> {
    let t0 = Instant::now();
    let grid = build_grid(&config.domain)?;
    let field = sample(&config.potential, &grid)?;
    let op = assemble(&grid, &field, config.bc)?;
    let assemble_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let spectrum = smallest_two(&op, config.tol, config.max_iter, config.seed)?;
    let solve_ms = t1.elapsed().as_secs_f64() * 1e3;
    Ok((Pipeline { grid, field, op, spectrum }, assemble_ms, solve_ms))
}

/// Executes the assemble -> solve -> ground-state -> gap pipeline and
/// evaluates every applicable check.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let total0 = Instant::now();
    let (pipe, assemble_ms, solve_ms) = solve_pipeline(config)?;
    let Pipeline { grid, field, spectrum, .. } = pipe;
    let m = metrics(&grid);
    let h = grid.h_max();
    let tol = tol_check(h);

    let t2 = Instant::now();
    let gsl = log_ground_state(&spectrum, &grid, config.delta)?;
    let (hess_min, hess_diag_min) = hessian_extrema(&gsl)?;
    let identity_res = phi_identity_residual(&gsl, &field, spectrum.lambda1);

    let mut diagnostics = PhiDiagnostics {
        hess_min: Some(hess_min),
        hess_diag_min: Some(hess_diag_min),
        identity_residual: Some(identity_res),
        ..Default::default()
    };
    if config.bc == BoundaryCondition::Neumann {
        diagnostics.laplacian_bound =
            laplacian_bounds_check(&gsl, &field, &m, &grid, spectrum.lambda1).ok();
        if grid.is_disk() {
            diagnostics.polar = polar_diagnostics(&gsl, &field, &grid, spectrum.lambda1).ok();
        }
    }
    let growth = if grid.is_disk() && config.bc == BoundaryCondition::Neumann {
        Some(growth_check(&gsl, &field, &grid))
    } else {
        None
    };
    if let Some(Ok(g)) = &growth {
        diagnostics.growth = Some(g.clone());
    }
    if config.bc == BoundaryCondition::Dirichlet {
        diagnostics.cutoff = cutoff_diagnostic(&gsl, &grid, &field, spectrum.lambda1).ok();
    }
    let groundstate_ms = t2.elapsed().as_secs_f64() * 1e3;

    let t3 = Instant::now();
    let q = quotient(&spectrum, &grid)?;
    let lemma1 = lemma1_check(&q, &grid);
    let res15 = quotient_residual(&q, &gsl, &grid, spectrum.gap());
    let bounds = gap_lower_bounds(&m, field.hessian_lb, hess_min, config.bc, spectrum.gap());
    let gradients = proof_gradient_checks(
        &q,
        &gsl,
        &grid,
        spectrum.gap(),
        field.hessian_lb,
        hess_min,
        config.beta,
        config.epsilon,
    );
    let gap_report =
        assemble_report(spectrum.gap(), bounds, Some(res15), lemma1.clone(), gradients, h);
    let gap_ms = t3.elapsed().as_secs_f64() * 1e3;

    // Check table.
    let mut checks: Vec<CheckResult> = Vec::new();
    let margin_check = |name: &'static str,
                        b: &crate::gap::BoundEvaluation,
                        gap: f64|
     -> CheckResult {
        if !b.applicable {
            return CheckResult::skipped(name, "inapplicable (requires c > 0)");
        }
        CheckResult {
            name,
            status: if b.margin >= -tol { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(gap),
            bound: Some(b.value),
            margin: Some(b.margin),
            blocking: !b.advisory,
            note: b.advisory.then(|| "advisory under Dirichlet conditions".into()),
        }
    };
    checks.push(margin_check("universal_bound", &gap_report.bounds.universal, spectrum.gap()));
    checks.push(margin_check("thm1_bound", &gap_report.bounds.thm1, spectrum.gap()));
    checks.push(margin_check("thm32_bound", &gap_report.bounds.thm32, spectrum.gap()));

    checks.push(if config.bc == BoundaryCondition::Dirichlet && field.hessian_lb > 0.0 {
        let bound = (field.hessian_lb / 2.0).sqrt();
        let margin = hess_diag_min - bound;
        CheckResult {
            name: "log_concavity_2_1",
            status: if margin >= -tol { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(hess_diag_min),
            bound: Some(bound),
            margin: Some(margin),
            blocking: true,
            note: None,
        }
    } else {
        CheckResult::skipped("log_concavity_2_1", "requires Dirichlet conditions and c > 0")
    });

    checks.push(match &diagnostics.laplacian_bound {
        Some(lb) => CheckResult {
            name: "laplacian_disjunction_2_2",
            status: if lb.passed { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(lb.max_laplacian_phi),
            bound: Some(lb.bound),
            margin: Some(lb.margin),
            blocking: true,
            note: lb
                .curvature_unavailable
                .then(|| "flat boundary: disjunction degenerates to the interior branch".into()),
        },
        None => CheckResult::skipped("laplacian_disjunction_2_2", "requires Neumann conditions"),
    });

    checks.push(match &diagnostics.polar {
        Some(p) => CheckResult {
            name: "polar_hessian_2_13",
            status: if p.margin_theta >= -tol { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(p.max_theta_hessian),
            bound: Some(p.bound_theta),
            margin: Some(p.margin_theta),
            blocking: false,
            note: Some("recorded only (additive constant has no visible derivation)".into()),
        },
        None => CheckResult::skipped("polar_hessian_2_13", "requires a Neumann disk run"),
    });
    checks.push(match &diagnostics.polar {
        Some(p) => CheckResult {
            name: "polar_radial_2_17_2_20",
            status: if p.radial_margin >= -tol { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(p.max_radial),
            bound: Some(p.bound_interior.max(p.bound_boundary)),
            margin: Some(p.radial_margin),
            blocking: false,
            note: Some("recorded only (right side implemented as printed)".into()),
        },
        None => CheckResult::skipped("polar_radial_2_17_2_20", "requires a Neumann disk run"),
    });

    checks.push(match &growth {
        Some(Ok(g)) => {
            let tol_growth = 10.0 * h * h;
            CheckResult {
                name: "growth_2_30",
                status: if g.margin >= -tol_growth { CheckStatus::Pass } else { CheckStatus::Fail },
                measured: Some(g.interior_max),
                bound: Some(g.boundary_max),
                margin: Some(g.margin),
                blocking: true,
                note: None,
            }
        }
        Some(Err(Error::HypothesisFailed(msg))) => CheckResult::skipped("growth_2_30", msg),
        Some(Err(e)) => CheckResult::skipped("growth_2_30", &e.to_string()),
        None => CheckResult::skipped("growth_2_30", "requires a Neumann disk run"),
    });

    checks.push(match (&gap_report.gradients.eq_1_36.applicable, &gap_report.gradients.eq_1_36) {
        (true, g) => CheckResult {
            name: "gradient_1_36",
            status: if g.passed { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(g.margin),
            bound: Some(0.0),
            margin: Some(-g.margin),
            blocking: true,
            note: None,
        },
        (false, g) => {
            CheckResult::skipped("gradient_1_36", g.reason.as_deref().unwrap_or("gated"))
        }
    });
    checks.push(match (&gap_report.gradients.thm_3_1.applicable, &gap_report.gradients.thm_3_1) {
        (true, g) => CheckResult {
            name: "gradient_3_1",
            status: if g.passed { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(g.margin),
            bound: Some(0.0),
            margin: Some(-g.margin),
            blocking: false,
            note: Some(
                "recorded only: the pointwise estimate fails near nodal sets under refinement"
                    .into(),
            ),
        },
        (false, g) => CheckResult::skipped("gradient_3_1", g.reason.as_deref().unwrap_or("gated")),
    });

    checks.push(match lemma1.max_normal_derivative {
        Some(v) => {
            let bound = 20.0 * h * h;
            CheckResult {
                name: "lemma1_neumann",
                status: if v <= bound { CheckStatus::Pass } else { CheckStatus::Fail },
                measured: Some(v),
                bound: Some(bound),
                margin: Some(bound - v),
                // The 20 h^2 threshold carries a benchmark-calibrated
                // constant; the derivative is O(h^2) with a
                // potential-dependent prefactor, so this records rather
                // than blocks.
                blocking: false,
                note: Some("threshold constant calibrated on the closed-form benchmarks".into()),
            }
        }
        None => CheckResult::skipped(
            "lemma1_neumann",
            "boundary gated (u1 below threshold at every boundary line)",
        ),
    });

    checks.push(CheckResult {
        name: "identity_2_1",
        status: CheckStatus::Pass,
        measured: Some(identity_res),
        bound: None,
        margin: None,
        blocking: false,
        note: Some("residual recorded; convergence order is checked by `converge`".into()),
    });
    checks.push(CheckResult {
        name: "eq_1_5_residual",
        status: CheckStatus::Pass,
        measured: Some(res15),
        bound: None,
        margin: None,
        blocking: false,
        note: Some("residual recorded; convergence order is checked by `converge`".into()),
    });

    checks.push(match &diagnostics.cutoff {
        Some(c) => CheckResult {
            name: "cutoff_4_1",
            status: CheckStatus::Pass,
            measured: Some(c.sup_rho2_lap_phi),
            bound: None,
            margin: None,
            blocking: false,
            note: Some("qualitative record; no sharp constant is asserted".into()),
        },
        None => CheckResult::skipped("cutoff_4_1", "requires Dirichlet conditions"),
    });

    if let Some(wanted) = &config.checks {
        checks.retain(|c| wanted.iter().any(|w| w == c.name));
    }

    let status = if checks
        .iter()
        .any(|c| c.blocking && c.status == CheckStatus::Fail)
    {
        CheckStatus::Fail
    } else {
        CheckStatus::Pass
    };

    Ok(RunReport {
        config: config.clone(),
        diameter: m.diameter,
        hessian_lb: field.hessian_lb,
        h_max: h,
        spectrum: SpectrumSummary {
            lambda1: spectrum.lambda1,
            lambda2: spectrum.lambda2,
            gap: spectrum.gap(),
            residual1: spectrum.residual1,
            residual2: spectrum.residual2,
            iterations: spectrum.iterations,
            near_degenerate: spectrum.near_degenerate,
            positive_interior: spectrum.positive_interior,
        },
        diagnostics,
        gap_report,
        checks,
        status,
        timings: Timings {
            assemble_ms,
            solve_ms,
            groundstate_ms,
            gap_ms,
            total_ms: total0.elapsed().as_secs_f64() * 1e3,
        },
    })
}

pub const CSV_HEADER: &str = "run_id,domain,bc,potential,c,d,lambda1,lambda2,gap,bound_universal,bound_thm1,beta_star,bound_thm32,a_measured,hess_min,res_eq15,res_eq21,lemma1_norm,status";

/// One CSV row in the fixed column set; errors become an ERROR row.
pub fn csv_row(run_id: usize, config: &RunConfig, outcome: &Result<RunReport>) -> String {
    match outcome {
        Ok(r) => {
            let b = &r.gap_report.bounds;
            let status = match r.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIPPED",
            };
            format!(
                "{run_id},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{status}",
                config.domain.label(),
                config.bc,
                config.potential.label(),
                g17(r.hessian_lb),
                g17(r.diameter),
                g17(r.spectrum.lambda1),
                g17(r.spectrum.lambda2),
                g17(r.spectrum.gap),
                g17(b.universal.value),
                g17(b.thm1.value),
                g17(b.beta_star),
                g17(b.thm32.value),
                g17(b.a_measured),
                g17(r.diagnostics.hess_min.unwrap_or(f64::NAN)),
                g17(r.gap_report.residual_eq15.unwrap_or(f64::NAN)),
                g17(r.diagnostics.identity_residual.unwrap_or(f64::NAN)),
                g17(r.gap_report.lemma1.max_normal_derivative.unwrap_or(f64::NAN)),
            )
        }
        Err(e) => {
            let nan = "nan";
            format!(
                "{run_id},{},{},{},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},{nan},ERROR: {}",
                config.domain.label(),
                config.bc,
                config.potential.label(),
                e.to_string().replace(',', ";"),
            )
        }
    }
}

/// A parameter sweep: one independent run per value, rows ordered by value.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub run_id: usize,
    pub value: f64,
    pub config: RunConfig,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub csv: String,
}

/// Applies a named numeric axis to a copy of the base config.
pub fn apply_axis(base: &RunConfig, axis: &str, value: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    match axis {
        "c" => match &mut cfg.potential {
            PotentialSpec::Harmonic { c } | PotentialSpec::ShiftedHarmonic { c, .. } => *c = value,
            _ => {
                return Err(Error::InvalidConfig(
                    "axis 'c' needs a harmonic or shifted_harmonic potential".into(),
                ))
            }
        },
        "a4" => match &mut cfg.potential {
            PotentialSpec::DoubleWell { a4, .. } => *a4 = value,
            _ => return Err(Error::InvalidConfig("axis 'a4' needs a double_well potential".into())),
        },
        "a2" => match &mut cfg.potential {
            PotentialSpec::DoubleWell { a2, .. } => *a2 = value,
            _ => return Err(Error::InvalidConfig("axis 'a2' needs a double_well potential".into())),
        },
        "amplitude" => match &mut cfg.potential {
            PotentialSpec::RandomSmooth { amplitude, .. } => *amplitude = value,
            _ => {
                return Err(Error::InvalidConfig(
                    "axis 'amplitude' needs a random_smooth potential".into(),
                ))
            }
        },
        "length" => match &mut cfg.domain {
            DomainSpec::Interval { bounds, .. } => {
                let mid = 0.5 * (bounds[0] + bounds[1]);
                *bounds = [mid - 0.5 * value, mid + 0.5 * value];
            }
            _ => return Err(Error::InvalidConfig("axis 'length' needs an interval domain".into())),
        },
        "radius" => match &mut cfg.domain {
            DomainSpec::Disk { radius, .. } => *radius = value,
            _ => return Err(Error::InvalidConfig("axis 'radius' needs a disk domain".into())),
        },
        other => return Err(Error::InvalidConfig(format!("unknown sweep axis '{other}'"))),
    }
    Ok(cfg)
}

/// Runs the sweep; per-run errors are recorded in their row and the sweep
/// continues. Rows are sorted by value.
pub fn sweep(base: &RunConfig, axis: &str, values: &[f64]) -> Result<SweepResult> {
    base.validate()?;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rows = Vec::new();
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (run_id, &value) in sorted.iter().enumerate() {
        let cfg = apply_axis(base, axis, value)?;
        let outcome = run(&cfg);
        csv.push_str(&csv_row(run_id, &cfg, &outcome));
        csv.push('\n');
        let (report, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        rows.push(SweepRow { run_id, value, config: cfg, report, error });
    }
    Ok(SweepResult { axis: axis.to_string(), rows, csv })
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergeLevel {
    pub h: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// |lambda - extrapolated limit|.
    pub err1: f64,
    pub err2: f64,
    pub res_identity: f64,
    pub res_eq15: f64,
    pub lemma1: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeTable {
    pub levels: Vec<ConvergeLevel>,
    /// Richardson-extrapolated eigenvalue limits from the two finest grids.
    pub lambda1_limit: f64,
    pub lambda2_limit: f64,
    /// Orders from successive eigenvalue differences
    /// log2((l_k - l_{k+1}) / (l_{k+1} - l_{k+2})).
    pub order_lambda1: Vec<f64>,
    pub order_lambda2: Vec<f64>,
    /// Orders from successive residual ratios.
    pub order_identity: Vec<f64>,
    pub order_eq15: Vec<f64>,
    pub order_lemma1: Vec<f64>,
}

fn refine(spec: &DomainSpec) -> DomainSpec {
    match spec {
        DomainSpec::Interval { bounds, resolution } => DomainSpec::Interval {
            bounds: *bounds,
            resolution: 2 * resolution - 1,
        },
        DomainSpec::Rectangle { extents, resolution: [nx, ny] } => DomainSpec::Rectangle {
            extents: *extents,
            resolution: [2 * nx - 1, 2 * ny - 1],
        },
        DomainSpec::Disk { radius, resolution: [nr, nt] } => DomainSpec::Disk {
            radius: *radius,
            resolution: [2 * nr, 2 * nt],
        },
    }
}

/// Halves h `refinements` times (so `refinements + 1` solves) and reports
/// eigenvalue errors against the Richardson limit plus measured orders for
/// the eigenvalues and the residual diagnostics.
pub fn converge(base: &RunConfig, refinements: usize) -> Result<ConvergeTable> {
    if refinements < 2 {
        return Err(Error::InvalidConfig(format!(
            "refinements {refinements} must be at least 2"
        )));
    }
    base.validate()?;
    let mut levels = Vec::new();
    let mut cfg = base.clone();
    for _ in 0..=refinements {
        let report = run(&cfg)?;
        levels.push(ConvergeLevel {
            h: report.h_max,
            lambda1: report.spectrum.lambda1,
            lambda2: report.spectrum.lambda2,
            err1: f64::NAN,
            err2: f64::NAN,
            res_identity: report.diagnostics.identity_residual.unwrap_or(f64::NAN),
            res_eq15: report.gap_report.residual_eq15.unwrap_or(f64::NAN),
            lemma1: report.gap_report.lemma1.max_normal_derivative,
        });
        cfg.domain = refine(&cfg.domain);
    }

    let k = levels.len();
    let lf = &levels[k - 1];
    let lc = &levels[k - 2];
    let lambda1_limit = lf.lambda1 + (lf.lambda1 - lc.lambda1) / 3.0;
    let lambda2_limit = lf.lambda2 + (lf.lambda2 - lc.lambda2) / 3.0;
    for l in &mut levels {
        l.err1 = (l.lambda1 - lambda1_limit).abs();
        l.err2 = (l.lambda2 - lambda2_limit).abs();
    }

    let diff_orders = |vals: &[f64]| -> Vec<f64> {
        vals.windows(3)
            .map(|w| ((w[0] - w[1]) / (w[1] - w[2])).abs().log2())
            .collect()
    };
    let ratio_orders = |vals: &[f64]| -> Vec<f64> {
        vals.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    };
    let l1: Vec<f64> = levels.iter().map(|l| l.lambda1).collect();
    let l2: Vec<f64> = levels.iter().map(|l| l.lambda2).collect();
    let ri: Vec<f64> = levels.iter().map(|l| l.res_identity).collect();
    let r15: Vec<f64> = levels.iter().map(|l| l.res_eq15).collect();
    let lm: Vec<f64> = levels.iter().map(|l| l.lemma1.unwrap_or(f64::NAN)).collect();

    Ok(ConvergeTable {
        lambda1_limit,
        lambda2_limit,
        order_lambda1: diff_orders(&l1),
        order_lambda2: diff_orders(&l2),
        order_identity: ratio_orders(&ri),
        order_eq15: ratio_orders(&r15),
        order_lemma1: ratio_orders(&lm),
        levels,
    })
}

/// Compares the iterative eigenpairs against the dense Jacobi oracle.
#[derive(Debug, Serialize)]
pub struct OracleComparison {
    pub n: usize,
    pub lambda1_iterative: f64,
    pub lambda2_iterative: f64,
    pub lambda1_oracle: f64,
    pub lambda2_oracle: f64,
    pub diff1: f64,
    pub diff2: f64,
    pub agreed: bool,
}

pub fn oracle_compare(config: &RunConfig) -> Result<OracleComparison> {
    config.validate()?;
    let (pipe, _, _) = solve_pipeline(config)?;
    let eig = dense_oracle(&pipe.op)?;
    let diff1 = (pipe.spectrum.lambda1 - eig[0]).abs();
    let diff2 = (pipe.spectrum.lambda2 - eig[1]).abs();
    let agreed = diff1 <= 1e-8 * eig[0].abs().max(1.0) && diff2 <= 1e-8 * eig[1].abs().max(1.0);
    Ok(OracleComparison {
        n: pipe.op.n(),
        lambda1_iterative: pipe.spectrum.lambda1,
        lambda2_iterative: pipe.spectrum.lambda2,
        lambda1_oracle: eig[0],
        lambda2_oracle: eig[1],
        diff1,
        diff2,
        agreed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn base_config(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn run_v0_benchmark_all_pass() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":513},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#,
        );
        let r = run(&cfg).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        assert!((r.spectrum.gap - 3.0 * PI * PI).abs() / (3.0 * PI * PI) < 5e-4);
        for c in &r.checks {
            assert_ne!(c.status, CheckStatus::Fail, "check {} failed", c.name);
        }
    }

    #[test]
    fn run_harmonic_universal_margin_near_zero() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[-8.0,8.0],"resolution":1025},
                "potential":{"family":"harmonic","c":2.0},"bc":"dirichlet"}"#,
        );
        let r = run(&cfg).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        let u = r.checks.iter().find(|c| c.name == "universal_bound").unwrap();
        assert_eq!(u.status, CheckStatus::Pass);
        assert!(u.margin.unwrap().abs() < 0.01);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_json(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet","typo_key":1}"#
        )
        .is_err());
        assert!(RunConfig::from_json(
            r#"{"domain":{"kind":"interval","bounds":[1.0,0.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#
        )
        .is_err());
        assert!(RunConfig::from_json(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":7},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#
        )
        .is_err());
        assert!(RunConfig::from_json(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet","checks":["no_such_check"]}"#
        )
        .is_err());
    }

    #[test]
    fn sweep_c_matches_oscillator_gap() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[-8.0,8.0],"resolution":1025},
                "potential":{"family":"harmonic","c":1.0},"bc":"dirichlet"}"#,
        );
        let s = sweep(&cfg, "c", &[2.0, 0.5, 4.0, 1.0]).unwrap();
        assert_eq!(s.rows.len(), 4);
        // sorted by value
        let vals: Vec<f64> = s.rows.iter().map(|r| r.value).collect();
        assert_eq!(vals, vec![0.5, 1.0, 2.0, 4.0]);
        for row in &s.rows {
            let rep = row.report.as_ref().unwrap();
            let want = (2.0 * row.value).sqrt();
            assert!(
                (rep.spectrum.gap - want).abs() / want < 0.01,
                "c={}: gap {} vs sqrt(2c) {}",
                row.value,
                rep.spectrum.gap,
                want
            );
        }
        let lines: Vec<&str> = s.csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn sweep_length_scales_gap() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":257},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#,
        );
        let s = sweep(&cfg, "length", &[1.0, 2.0, 4.0]).unwrap();
        for row in &s.rows {
            let want = 3.0 * PI * PI / (row.value * row.value);
            let gap = row.report.as_ref().unwrap().spectrum.gap;
            assert!((gap - want).abs() / want < 1e-3);
        }
    }

    #[test]
    fn sweep_empty_values() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#,
        );
        let s = sweep(&cfg, "length", &[]).unwrap();
        assert_eq!(s.rows.len(), 0);
        assert_eq!(s.csv, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn converge_orders_near_two() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#,
        );
        let t = converge(&cfg, 4).unwrap();
        assert_eq!(t.levels.len(), 5);
        for o in &t.order_lambda1 {
            assert!((o - 2.0).abs() <= 0.2, "lambda1 order {o}");
        }
        assert!((t.lambda1_limit - PI * PI).abs() < 1e-6);
    }

    #[test]
    fn converge_residual_orders_on_oscillator() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[-8.0,8.0],"resolution":513},
                "potential":{"family":"harmonic","c":2.0},"bc":"dirichlet"}"#,
        );
        let t = converge(&cfg, 2).unwrap();
        for o in t.order_identity.iter().chain(&t.order_eq15) {
            assert!(*o >= 1.8, "residual order {o}");
        }
        assert!((t.lambda1_limit - 1.0).abs() < 1e-5);
    }

    #[test]
    fn converge_rejects_single_refinement() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#,
        );
        assert!(converge(&cfg, 1).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[-3.0,3.0],"resolution":129},
                "potential":{"family":"double_well","a4":1.0,"a2":-4.0},"bc":"neumann"}"#,
        );
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.spectrum.lambda1.to_bits(), b.spectrum.lambda1.to_bits());
        assert_eq!(a.spectrum.lambda2.to_bits(), b.spectrum.lambda2.to_bits());
        assert_eq!(
            a.gap_report.bounds.thm32.value.to_bits(),
            b.gap_report.bounds.thm32.value.to_bits()
        );
        assert_eq!(
            csv_row(0, &cfg, &Ok(a.clone())),
            csv_row(0, &cfg, &Ok(b))
        );
    }

    #[test]
    fn oracle_compare_small_config() {
        let cfg = base_config(
            r#"{"domain":{"kind":"interval","bounds":[0.0,1.0],"resolution":65},
                "potential":{"family":"zero"},"bc":"dirichlet"}"#,
        );
        let o = oracle_compare(&cfg).unwrap();
        assert!(o.agreed, "diffs {} {}", o.diff1, o.diff2);
    }
}
