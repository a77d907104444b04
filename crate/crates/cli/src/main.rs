//! `noma`: generate instances, run experiment sweeps, plot results, export
//! ILPs and solve small instances exactly.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use noma_core::exact::{
    opt_bruteforce_frame, opt_bruteforce_horizon, opt_matching_m1, OracleGuard,
};
use noma_core::harness::{
    emit_report, load_results_csv, nsd_series, render_svg, run_experiment, Algorithm,
    ExperimentSpec,
};
use noma_core::model::{export_ilp, PowerMode};
use noma_core::{generate_instance, load_instance, save_instance, Error, ScenarioParams};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "noma",
    version,
    about = "Uplink NOMA grouping, scheduling and power allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config: scenario parameters for `gen`, an experiment spec for `run`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base seed; overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Lift the exact oracle's size guards.
    #[arg(long, global = true)]
    guard_override: bool,

    /// Exit nonzero if any experiment cell fails.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write generated instances as JSON.
    Gen {
        /// Number of instances; instance `i` uses seed `seed + i`.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Run an experiment spec and write CSV and SVG results.
    Run,
    /// Plot a results CSV as SVG.
    Report {
        input: PathBuf,
        #[arg(long)]
        title: Option<String>,
        #[arg(long, default_value = "axis value")]
        x_label: String,
    },
    /// Write the binary-power ILP of an instance in LP format.
    ExportLp {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Power::Binary)]
        power: Power,
    },
    /// Solve an instance exactly.
    Oracle { instance: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Power {
    Binary,
    General,
}

/// Failure reported as one JSON object on stderr.
struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
    details: serde_json::Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Dimension(_) => "dimension",
            Error::InvalidInstance(_) => "invalid_instance",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GroupCap { .. } => "group_cap",
            Error::PowerExceeded { .. } => "power_exceeded",
            Error::GuardExceeded(_) => "guard_exceeded",
            Error::Unsupported(_) => "unsupported",
            Error::Parse { .. } => "parse",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Io { .. } => "io",
            Error::Experiment(_) => "experiment",
        };
        Failure {
            kind,
            message: e.to_string(),
            code: 1,
            details: serde_json::Value::Null,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let mut body = json!({ "error": f.kind, "message": f.message });
            if !f.details.is_null() {
                body["details"] = f.details;
            }
            eprintln!("{body}");
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen { count } => gen(cli, *count),
        Command::Run => run(cli),
        Command::Report {
            input,
            title,
            x_label,
        } => report(cli, input, title.as_deref(), x_label),
        Command::ExportLp { instance, power } => export_lp(cli, instance, *power),
        Command::Oracle { instance } => oracle(cli, instance),
    }
}

fn read_scenario(path: &Path) -> CliResult<ScenarioParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::from(Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    })
}

fn write_output(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            Failure::from(Error::Io {
                path: path.clone(),
                source: e,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn guard(cli: &Cli) -> OracleGuard {
    if cli.guard_override {
        OracleGuard::unbounded()
    } else {
        OracleGuard::default()
    }
}

fn gen(cli: &Cli, count: u64) -> CliResult<()> {
    let mut params = match &cli.config {
        Some(path) => read_scenario(path)?,
        None => ScenarioParams::new(20, 10, 1, 2),
    };
    if let Some(seed) = cli.seed {
        params.seed = seed;
    }
    params.validate()?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    for i in 0..count {
        let seed = params.seed.wrapping_add(i);
        let instance = generate_instance(&params.clone().with_seed(seed))?;
        let path = dir.join(format!("instance-{seed}.json"));
        save_instance(&instance, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let path = cli.config.as_ref().ok_or_else(|| Failure {
        kind: "usage",
        message: "`run` needs --config <experiment spec>".into(),
        code: 2,
        details: serde_json::Value::Null,
    })?;
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(seed) = cli.seed {
        spec.scenario.seed = seed;
    }
    if cli.guard_override {
        spec.guard = OracleGuard::unbounded();
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| spec.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let table = run_experiment(&spec, cli.jobs)?;

    for e in &table.errors {
        eprintln!(
            "{}",
            json!({
                "cell_error": e.message,
                "axis_value": e.axis_value,
                "algorithm": e.algorithm.name(),
                "seed": e.seed,
            })
        );
    }
    if !table.rows.is_empty() {
        let report = emit_report(&table, &dir)?;
        println!("{}", report.csv.display());
        println!("{}", report.svg.display());
        for p in [&report.power_csv, &report.power_mean_csv, &report.power_svg]
            .into_iter()
            .flatten()
        {
            println!("{}", p.display());
        }
        for &v in &spec.sweep.values {
            for &a in &spec.algorithms {
                if let Some((mean, std)) = table.summary(a, v) {
                    println!("{}={v} {a}: {mean:.3} ± {std:.3}", axis_key(&spec));
                }
            }
        }
    }
    if (cli.strict && !table.errors.is_empty()) || table.rows.is_empty() {
        let cells: Vec<_> = table
            .errors
            .iter()
            .map(|e| json!({ "axis_value": e.axis_value, "algorithm": e.algorithm.name(), "seed": e.seed }))
            .collect();
        return Err(Failure {
            kind: "cell_failures",
            message: format!(
                "{} of {} cells failed",
                table.errors.len(),
                table.errors.len() + table.rows.len()
            ),
            code: 3,
            details: serde_json::Value::Array(cells),
        });
    }
    Ok(())
}

fn axis_key(spec: &ExperimentSpec) -> String {
    serde_json::to_value(spec.sweep.axis)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn report(cli: &Cli, input: &Path, title: Option<&str>, x_label: &str) -> CliResult<()> {
    let rows = load_results_csv(input)?;
    if rows.is_empty() {
        return Err(Error::Experiment(format!("{} has no rows", input.display())).into());
    }
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    let svg = render_svg(title.unwrap_or(stem), x_label, "NSD", &nsd_series(&rows));
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| input.with_extension("svg"));
    std::fs::write(&out, svg).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    println!("{}", out.display());
    Ok(())
}

fn export_lp(cli: &Cli, path: &Path, power: Power) -> CliResult<()> {
    let instance = load_instance(path)?;
    let mode = match power {
        Power::Binary => PowerMode::Binary,
        Power::General => PowerMode::General,
    };
    write_output(cli, &export_ilp(&instance, mode)?)
}

fn oracle(cli: &Cli, path: &Path) -> CliResult<()> {
    let instance = load_instance(path)?;
    let guard = guard(cli);
    let body = if instance.num_frames() == 1 {
        let assignment = if instance.group_cap() == 1 {
            opt_matching_m1(&instance, 0)?
        } else {
            opt_bruteforce_frame(&instance, 0, &instance.full_budgets(), &guard)?.assignment
        };
        json!({
            "algorithm": Algorithm::Opt.name(),
            "served": assignment.served_count(),
            "assignments": [assignment],
        })
    } else {
        let o = opt_bruteforce_horizon(&instance, &guard)?;
        json!({
            "algorithm": Algorithm::Opt.name(),
            "served": o.served,
            "levels": o.levels,
            "assignments": o.assignments,
        })
    };
    let mut text = serde_json::to_string_pretty(&body).map_err(Error::from)?;
    text.push('\n');
    write_output(cli, &text)
}
