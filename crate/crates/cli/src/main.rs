//! `vpm`: runs the verification suites and writes their reports.

mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vpm_core::experiments::{build_summary, write_atomic, Context, ExperimentReport, Suite};

use config::{ensure_writable, read_file, resolve, ConfigError, RunConfig, OUT_DIR_ENV};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "vpm", version, about = "Verification suites for de la Vallée Poussin means on the sphere")]
struct Cli {
    /// multipliers, lemmas, voronovskaya, converse, delayed-max, modulus, selftest or all
    suite: String,
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated operator degrees
    #[arg(long = "n-list")]
    n_list: Option<String>,
    /// Comma-separated subset of 1,2,inf
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated corpus ids
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory (default: $VPM_OUT_DIR, else ./vpm-out)
    #[arg(long)]
    out: Option<String>,
    /// Node count or `auto`
    #[arg(long = "quad-order")]
    quad_order: Option<String>,
    /// Largest n of the multiplier identity suite
    #[arg(long = "n-max")]
    n_max: Option<String>,
    /// Largest k of the delayed maximum
    #[arg(long = "k-cap")]
    k_cap: Option<String>,
    #[arg(long = "theta-grid-size")]
    theta_grid_size: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("d", &self.d),
            ("n_list", &self.n_list),
            ("p_list", &self.p),
            ("corpus", &self.corpus),
            ("seed", &self.seed),
            ("out_dir", &self.out),
            ("quadrature_order", &self.quad_order),
            ("n_max", &self.n_max),
            ("k_cap", &self.k_cap),
            ("theta_grid_size", &self.theta_grid_size),
        ]
    }
}

fn load(cli: &Cli) -> Result<(Vec<Suite>, RunConfig), ConfigError> {
    let suites = Suite::parse(&cli.suite)?;
    let mut values = match &cli.config {
        Some(path) => read_file(path)?,
        None => BTreeMap::new(),
    };
    for (key, value) in cli.overrides() {
        if let Some(v) = value {
            values.insert(key.to_string(), v.clone());
        }
    }
    let rc = resolve(&values, std::env::var(OUT_DIR_ENV).ok())?;
    ensure_writable(&rc.out_dir)?;
    Ok((suites, rc))
}

fn run(suites: &[Suite], rc: &RunConfig) -> bool {
    let mut ctx = match Context::new(rc.experiment.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return false;
        }
    };
    let mut reports: Vec<ExperimentReport> = Vec::new();
    let mut ok = true;
    for &suite in suites {
        let report = match ctx.run(suite) {
            Ok(r) => r,
            Err(e) => {
                let mut r = ExperimentReport::new(suite.name(), &[], ctx.metadata());
                r.fail(format!("suite aborted: {e}"));
                r
            }
        };
        let path = rc.out_dir.join(format!("{}.csv", suite.name()));
        let written = report.to_csv().and_then(|csv| write_atomic(&path, csv.as_bytes()));
        if let Err(e) = written {
            eprintln!("error: writing {}: {e}", path.display());
            ok = false;
        }
        eprintln!(
            "{:<13} {}  {} rows -> {}",
            suite.name(),
            if report.passed { "PASS" } else { "FAIL" },
            report.rows.len(),
            path.display()
        );
        for note in &report.notes {
            eprintln!("    {note}");
        }
        ok &= report.passed;
        reports.push(report);
    }
    let summary_path = rc.out_dir.join("summary.json");
    let previous =
        std::fs::read_to_string(&summary_path).ok().and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok());
    let snapshot = serde_json::to_value(&rc.experiment).unwrap_or(serde_json::Value::Null);
    let summary = build_summary(previous.as_ref(), ctx.config_hash(), &snapshot, &reports);
    let text = serde_json::to_string_pretty(&summary).expect("summary is plain JSON");
    if let Err(e) = write_atomic(&summary_path, format!("{text}\n").as_bytes()) {
        eprintln!("error: writing {}: {e}", summary_path.display());
        ok = false;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suites, rc) = match load(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if run(&suites, &rc) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
