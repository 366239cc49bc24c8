//! Command-line runner: single runs, sweeps, convergence studies, and the
//! dense-oracle comparison. Exit codes: 0 all checks pass, 1 a check
//! failed, 2 configuration or solver error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gaplab::fmt::g17;
use gaplab::operator::{assemble, dump_matrix};
use gaplab::report::{
    converge, csv_row, oracle_compare, run, sweep, CheckStatus, RunConfig, RunReport, CSV_HEADER,
};

#[derive(Parser)]
#[command(name = "gaplab", about = "Spectral-gap laboratory for -\u{394} + V on convex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    config: PathBuf,
    /// Directory for report.json / report.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the human-readable summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configuration and evaluate every applicable check.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the assembled matrix as "row col value" lines.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Run one configuration per value of a numeric axis.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Config field to vary: c, a4, a2, amplitude, length, radius.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Halve h repeatedly and report convergence orders.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of refinements (at least 2).
        #[arg(long)]
        steps: usize,
    },
    /// Compare the iterative eigenpairs against the dense Jacobi oracle.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_config(path: &Path) -> Result<RunConfig, gaplab::Error> {
    let text = fs::read_to_string(path)?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Ok(seed) = std::env::var("GAPLAB_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|_| gaplab::Error::InvalidConfig(format!("GAPLAB_SEED '{seed}' not a u64")))?;
    }
    Ok(cfg)
}

fn write_reports(out: &Path, json: &str, csv: Option<&str>) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), json)?;
    if let Some(csv) = csv {
        fs::write(out.join("report.csv"), csv)?;
    }
    Ok(())
}

fn print_run_summary(report: &RunReport) {
    println!(
        "domain {}  potential {}  bc {}",
        report.config.domain.label(),
        report.config.potential.label(),
        report.config.bc
    );
    println!(
        "lambda1 = {}  lambda2 = {}  gap = {}  (residuals {:.2e}, {:.2e}; {} iterations)",
        g17(report.spectrum.lambda1),
        g17(report.spectrum.lambda2),
        g17(report.spectrum.gap),
        report.spectrum.residual1,
        report.spectrum.residual2,
        report.spectrum.iterations,
    );
    if report.spectrum.near_degenerate {
        println!("warning: near-degenerate gap; bounds below are suspect");
    }
    for c in &report.checks {
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        let detail = match (c.measured, c.bound, c.margin) {
            (Some(m), Some(b), Some(mg)) => {
                format!("measured {} vs bound {} (margin {})", g17(m), g17(b), g17(mg))
            }
            (Some(m), None, None) => format!("value {}", g17(m)),
            _ => String::new(),
        };
        let note = c.note.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default();
        println!("[{tag}] {:<26} {detail}{note}", c.name);
    }
    println!("overall: {:?}", report.status);
}

fn run_cmd(common: &CommonArgs, dump: Option<&Path>) -> Result<ExitCode, gaplab::Error> {
    let cfg = load_config(&common.config)?;
    if let Some(path) = dump {
        let grid = gaplab::geometry::build_grid(&cfg.domain)?;
        let field = gaplab::potential::sample(&cfg.potential, &grid)?;
        let op = assemble(&grid, &field, cfg.bc)?;
        let mut file = fs::File::create(path)?;
        dump_matrix(&op, &mut file)?;
    }
    let report = run(&cfg)?;
    if !common.quiet {
        print_run_summary(&report);
    }
    if let Some(out) = &common.out {
        let json = serde_json::to_string_pretty(&report)?;
        let csv = format!("{CSV_HEADER}\n{}\n", csv_row(0, &cfg, &Ok(report.clone())));
        write_reports(out, &json, Some(&csv))?;
    }
    Ok(if report.status == CheckStatus::Pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn sweep_cmd(common: &CommonArgs, axis: &str, values: &[f64]) -> Result<ExitCode, gaplab::Error> {
    let cfg = load_config(&common.config)?;
    let result = sweep(&cfg, axis, values)?;
    if !common.quiet {
        print!("{}", result.csv);
    }
    if let Some(out) = &common.out {
        let json = serde_json::to_string_pretty(&result)?;
        write_reports(out, &json, Some(&result.csv))?;
    }
    let mut worst = ExitCode::SUCCESS;
    for row in &result.rows {
        match &row.report {
            Some(r) if r.status == CheckStatus::Pass => {}
            Some(_) => {
                if worst == ExitCode::SUCCESS {
                    worst = ExitCode::from(1);
                }
            }
            None => worst = ExitCode::from(2),
        }
    }
    Ok(worst)
}

fn converge_cmd(common: &CommonArgs, steps: usize) -> Result<ExitCode, gaplab::Error> {
    let cfg = load_config(&common.config)?;
    let table = converge(&cfg, steps)?;
    let level_csv = |t: &gaplab::report::ConvergeTable| {
        let mut csv = String::from("h,lambda1,err1,lambda2,err2,res_eq21,res_eq15,lemma1\n");
        for l in &t.levels {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                g17(l.h),
                g17(l.lambda1),
                g17(l.err1),
                g17(l.lambda2),
                g17(l.err2),
                g17(l.res_identity),
                g17(l.res_eq15),
                g17(l.lemma1.unwrap_or(f64::NAN)),
            ));
        }
        csv
    };
    if !common.quiet {
        print!("{}", level_csv(&table));
        let fmt_orders =
            |o: &[f64]| o.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ");
        println!("orders lambda1: {}", fmt_orders(&table.order_lambda1));
        println!("orders lambda2: {}", fmt_orders(&table.order_lambda2));
        println!("orders identity residual: {}", fmt_orders(&table.order_identity));
        println!("orders eq(1.5) residual: {}", fmt_orders(&table.order_eq15));
        println!("orders lemma1 derivative: {}", fmt_orders(&table.order_lemma1));
    }
    if let Some(out) = &common.out {
        let json = serde_json::to_string_pretty(&table)?;
        write_reports(out, &json, Some(&level_csv(&table)))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_cmd(common: &CommonArgs) -> Result<ExitCode, gaplab::Error> {
    let cfg = load_config(&common.config)?;
    let o = oracle_compare(&cfg)?;
    if !common.quiet {
        println!("N = {}", o.n);
        println!(
            "lambda1: iterative {} oracle {} (diff {:.2e})",
            g17(o.lambda1_iterative),
            g17(o.lambda1_oracle),
            o.diff1
        );
        println!(
            "lambda2: iterative {} oracle {} (diff {:.2e})",
            g17(o.lambda2_iterative),
            g17(o.lambda2_oracle),
            o.diff2
        );
        println!("agreement: {}", if o.agreed { "PASS" } else { "FAIL" });
    }
    if let Some(out) = &common.out {
        let json = serde_json::to_string_pretty(&o)?;
        write_reports(out, &json, None)?;
    }
    Ok(if o.agreed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, dump_matrix } => run_cmd(common, dump_matrix.as_deref()),
        Command::Sweep { common, axis, values } => sweep_cmd(common, axis, values),
        Command::Converge { common, steps } => converge_cmd(common, *steps),
        Command::Oracle { common } => oracle_cmd(common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
