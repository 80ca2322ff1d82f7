//! Command-line front end. Exit codes: 0 ok, 1 infeasible, 2 input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use solarsim_core::strategies::StrategyKind;
use solarsim_core::weather::WeatherError;
use solarsim_core::SimTime;

use crate::formats::{self, FormatError, PlanFile};
use crate::report::{self, JourneyExport};
use crate::scenario::{RunConfig, Scenario, ScenarioError, StrategyRun};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Missing weather hours listed by `validate` before summarizing.
const GAPS_LISTED: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "solarsim", version, about = "Solar vehicle journey simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one or all strategies over the whole route.
    Run(RunArgs),
    /// Plan daily average speeds.
    Plan(PlanArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
    /// Check input files and report every problem found.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub route: PathBuf,
    #[arg(long)]
    pub weather: PathBuf,
    #[arg(long)]
    pub vehicle: PathBuf,
    /// Scenario TOML with [sim], [physics], [planner] and [strategies] tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beam_width: Option<usize>,
    /// Accepted for compatibility; every command is deterministic.
    #[arg(long)]
    pub seedless: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Min,
    Max,
    Avg,
    DailyAvg,
    Soc,
    All,
}

impl StrategyArg {
    pub fn kinds(self) -> Vec<StrategyKind> {
        match self {
            StrategyArg::Min => vec![StrategyKind::Min],
            StrategyArg::Max => vec![StrategyKind::Max],
            StrategyArg::Avg => vec![StrategyKind::Avg],
            StrategyArg::DailyAvg => vec![StrategyKind::DailyAvg],
            StrategyArg::Soc => vec![StrategyKind::Soc],
            StrategyArg::All => StrategyKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl Format {
    fn from_extension(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            "txt" => Some(Format::Table),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_enum, default_value = "all")]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Also write the report here; the extension picks json, csv or txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the plan JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "SOLARSIM_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: String,
    #[arg(long, env = "SOLARSIM_DATA_DIR", default_value = "solarsim-data")]
    pub data_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub route: Option<PathBuf>,
    #[arg(long)]
    pub weather: Option<PathBuf>,
    #[arg(long)]
    pub vehicle: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError {
            code: if e.is_infeasible() { EXIT_INFEASIBLE } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message,
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Plan(a) => cmd_plan(&a, out),
        Command::Serve(a) => cmd_serve(&a),
        Command::Validate(a) => cmd_validate(&a, out),
    }
}

pub fn load_scenario(inputs: &Inputs) -> Result<Scenario, CliError> {
    for p in [&inputs.route, &inputs.weather, &inputs.vehicle].into_iter().chain(inputs.config.as_ref()) {
        if !p.exists() {
            return Err(input_error(format!("{}: file not found", p.display())));
        }
    }
    let mut s = Scenario::load(&inputs.route, &inputs.weather, &inputs.vehicle, inputs.config.as_deref())?;
    if let Some(w) = inputs.beam_width {
        let mut config = s.config.clone();
        config.planner.beam_width = w;
        s = Scenario::new(s.spec.clone(), config, s.route.clone(), s.weather.clone())?;
    }
    Ok(s)
}

/// Runs the selected strategies in order, stopping at the first failure.
pub fn run_strategies(s: &Scenario, kinds: &[StrategyKind]) -> Result<Vec<StrategyRun>, ScenarioError> {
    kinds.iter().map(|&k| s.run(k)).collect()
}

fn render_runs(s: &Scenario, runs: &[StrategyRun], format: Format) -> String {
    match format {
        Format::Table => report::text_report(runs),
        Format::Csv => report::steps_csv(runs),
        Format::Json => {
            let len = s.route.total_length();
            let exports: Vec<JourneyExport> = runs.iter().map(|r| JourneyExport::new(r, len)).collect();
            match exports.as_slice() {
                [one] => report::journey_json(one),
                many => report::journeys_json(many),
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = load_scenario(&a.inputs)?;
    let runs = run_strategies(&s, &a.strategy.kinds())?;
    out.write_all(render_runs(&s, &runs, a.format).as_bytes())?;
    if let Some(path) = &a.out {
        let format = Format::from_extension(path).unwrap_or(a.format);
        write_file(path, &render_runs(&s, &runs, format))?;
    }
    Ok(())
}

fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = load_scenario(&a.inputs)?;
    let state = s.initial_state()?;
    let plan = s.plan(&state, &s.config.planner)?;
    let file = PlanFile::from_plan(&plan);
    let json = serde_json::to_string_pretty(&file).expect("plan serializes") + "\n";
    match a.format {
        Format::Json => out.write_all(json.as_bytes())?,
        _ => {
            writeln!(out, "{:<6}{:>8}{:>14}", "Day", "km/h", "predicted km")?;
            for (i, v) in plan.daily_speeds_kmh.iter().enumerate() {
                let km = plan.predicted_daily_distances_km.get(i).copied().unwrap_or(0.0);
                writeln!(out, "{:<6}{:>8}{:>14.1}", plan.start_day + i as u32, v, km)?;
            }
            match &plan.predicted_arrival {
                Some(arr) => writeln!(out, "arrival: day {} at {}", arr.day, formats::format_instant(arr.time_s))?,
                None => writeln!(out, "arrival: beyond the planning horizon")?,
            }
        }
    }
    if let Some(path) = &a.out {
        write_file(path, &json)?;
    }
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> Result<(), CliError> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(crate::service::serve(&a.listen, &a.data_dir))
        .map_err(|e| input_error(e.to_string()))
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut problems = Vec::new();
    let mut check = |label: &str, path: &Option<PathBuf>, f: &dyn Fn(&Path) -> Result<String, String>| {
        if let Some(p) = path {
            match f(p) {
                Ok(summary) => {
                    let _ = writeln!(out, "ok      {label} {}: {summary}", p.display());
                }
                Err(msg) => {
                    let _ = writeln!(out, "invalid {label} {}: {msg}", p.display());
                    problems.push(label.to_string());
                }
            }
        }
    };
    check("route", &a.route, &|p| {
        formats::load_route(p)
            .map(|r| format!("{} nodes, {:.1} km", r.nodes().len(), r.total_length() / 1000.0))
            .map_err(|e| e.to_string())
    });
    check("weather", &a.weather, &|p| {
        formats::load_weather(p)
            .map(|w| {
                format!(
                    "{} zones, {} to {}",
                    w.zones().len(),
                    formats::format_time(w.first_time()),
                    formats::format_time(w.last_time())
                )
            })
            .map_err(|e| match &e {
                FormatError::Weather(WeatherError::Sparse { gaps }) => {
                    let listed: Vec<String> = gaps
                        .iter()
                        .take(GAPS_LISTED)
                        .map(|(zone, hour)| format!("{zone} {}", formats::format_time(SimTime::from_hours(*hour))))
                        .collect();
                    let more = gaps.len().saturating_sub(GAPS_LISTED);
                    let tail = if more > 0 { format!(" and {more} more") } else { String::new() };
                    format!("{e}: {}{tail}", listed.join(", "))
                }
                _ => e.to_string(),
            })
    });
    check("vehicle", &a.vehicle, &|p| {
        formats::load_vehicle(p)
            .map(|v| format!("{} Wh battery", v.battery_capacity))
            .map_err(|e| e.to_string())
    });
    check("config", &a.config, &|p| {
        RunConfig::load(p).map(|_| "parsed".to_string()).map_err(|e| e.to_string())
    });
    if problems.is_empty() {
        Ok(())
    } else {
        Err(input_error(format!("invalid input: {}", problems.join(", "))))
    }
}
