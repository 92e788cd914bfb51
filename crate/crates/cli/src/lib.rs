//! Command-line front end: `run` executes a prequential experiment from a
//! JSON config plus flag overrides, `list` prints the registry, `compare`
//! re-renders a comparison plot from record files.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};
use streamlearn::evaluate::{
    model_entries, resolve, run_jobs, strategy_entries, stream_entries, ComponentEntry,
    ExperimentConfig, DETECTORS,
};
use streamlearn::report::{
    comparison_from_records, format_summary_table, read_records_csv, render_comparison_svg,
    write_run,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_JOB_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Window of the trailing accuracy curves.
pub const DEFAULT_WINDOW: usize = 1000;

pub const OUT_ENV: &str = "AWESOME_OL_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Run(_) => EXIT_JOB_FAILURE,
        }
    }
}

impl From<streamlearn::Error> for CliError {
    fn from(e: streamlearn::Error) -> Self {
        use streamlearn::Error as E;
        match e {
            e @ (E::Config(_) | E::Registry { .. }) => CliError::Config(e.to_string()),
            e => CliError::Run(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "streamlearn",
    version,
    about = "Prequential experiments on drifting data streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write records, summary, plots and manifest.
    Run(RunArgs),
    /// List registered models, streams, strategies and detectors.
    List,
    /// Render a comparison plot from record CSV files or directories.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config `out_dir`, then $AWESOME_OL_OUT, then `results`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stream length cap (`n_samples`).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Pretraining instances (`n_pretrain`).
    #[arg(long)]
    pub pretrain: Option<u64>,
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
    /// Comma-separated stream names.
    #[arg(long, value_delimiter = ',')]
    pub streams: Option<Vec<String>>,
    /// Strategy name, or a JSON component such as
    /// '{"name":"VariableUncertainty","params":{"budget":0.2}}'.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Jobs run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Record CSV files, or directories searched for `*.csv`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output SVG path.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value = "Prequential comparison")]
    pub title: String,
}

/// An effective configuration and the directory it writes to.
#[derive(Debug, Clone, PartialEq)]
pub struct Effective {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
}

fn read_config_object(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Config(format!(
            "{}: top level must be a JSON object",
            path.display()
        ))),
        Err(e) => Err(CliError::Config(format!(
            "{}: malformed JSON at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))),
    }
}

/// Merges the config file (if any) with flag overrides, applies defaults and
/// validates. Flags win over file values; the output directory falls back to
/// `env_out` and then to `results`.
pub fn parse_config(args: &RunArgs, env_out: Option<PathBuf>) -> Result<Effective, CliError> {
    let mut obj = match &args.config {
        Some(path) => read_config_object(path)?,
        None => Map::new(),
    };
    let mut set = |key: &str, v: Value| {
        obj.insert(key.to_string(), v);
    };
    if let Some(v) = args.seed {
        set("seed", v.into());
    }
    if let Some(v) = args.samples {
        set("n_samples", v.into());
    }
    if let Some(v) = args.pretrain {
        set("n_pretrain", v.into());
    }
    if let Some(v) = args.rounds {
        set("n_rounds", v.into());
    }
    if let Some(v) = &args.models {
        set("models", v.iter().map(|s| Value::from(s.trim())).collect());
    }
    if let Some(v) = &args.streams {
        set("streams", v.iter().map(|s| Value::from(s.trim())).collect());
    }
    if let Some(v) = &args.strategy {
        let v = v.trim();
        let value = if v.starts_with('{') {
            serde_json::from_str(v)
                .map_err(|e| CliError::Config(format!("--strategy: malformed JSON: {e}")))?
        } else {
            Value::from(v)
        };
        set("strategy", value);
    }
    for key in ["n_samples", "n_pretrain", "models", "streams"] {
        if !obj.contains_key(key) {
            return Err(CliError::Config(format!("missing required key `{key}`")));
        }
    }
    let mut config: ExperimentConfig =
        serde_json::from_value(Value::Object(obj)).map_err(|e| CliError::Config(e.to_string()))?;
    if args.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    config.validate()?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .or(env_out)
        .unwrap_or_else(|| PathBuf::from("results"));
    config.out_dir = Some(out_dir.clone());
    Ok(Effective { config, out_dir })
}

/// Resolves every component before touching the output directory, runs
/// the jobs and writes the reports.
pub fn cmd_run(effective: &Effective, jobs: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let resolved = resolve(&effective.config)?;
    let dir = &effective.out_dir;
    if dir.exists() && !dir.is_dir() {
        return Err(CliError::Config(format!(
            "out_dir {} is not a directory",
            dir.display()
        )));
    }
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create out_dir {}: {e}", dir.display())))?;
    let outcomes = run_jobs(resolved, jobs)?;
    let outputs = write_run(dir, &effective.config, &outcomes, DEFAULT_WINDOW)?;
    let io = |e: std::io::Error| CliError::Run(format!("writing to stdout: {e}"));
    write!(out, "{}", format_summary_table(&outputs.summary)).map_err(io)?;
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.succeeded()).collect();
    for o in &failed {
        writeln!(
            out,
            "job {} ({} / {} / round {}) failed after {} records: {}",
            o.spec.index,
            o.spec.model,
            o.spec.stream,
            o.spec.round,
            o.records.len(),
            o.failure.as_deref().unwrap_or("")
        )
        .map_err(io)?;
    }
    writeln!(
        out,
        "wrote {} files to {}",
        outputs.files.len(),
        dir.display()
    )
    .map_err(io)?;
    Ok(if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_JOB_FAILURE
    })
}

/// Capability flags; `drift` names the drift capability in this section
/// (learners adapt to drift, streams can contain it).
fn flags(entry: &ComponentEntry, with_classes: bool, drift: &str) -> String {
    let mut f = vec!["classification"];
    if entry.caps.supports_regression {
        f.push("regression");
    }
    if with_classes {
        f.push(if entry.caps.supports_multiclass {
            "multiclass"
        } else {
            "binary"
        });
    }
    if entry.caps.drift_adaptive {
        f.push(drift);
    }
    f.join(",")
}

/// The registry listing, one component per line in a fixed order.
pub fn cmd_list() -> String {
    let mut lines = Vec::new();
    let section = |lines: &mut Vec<String>,
                   title: &str,
                   entries: &[ComponentEntry],
                   classes: bool,
                   drift: &str| {
        lines.push(format!("{title}:"));
        let w = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        let fw = entries
            .iter()
            .map(|e| flags(e, classes, drift).len())
            .max()
            .unwrap_or(0);
        for e in entries {
            let f = flags(e, classes, drift);
            lines.push(format!("  {:<w$}  {f:<fw$}  {}", e.name, e.summary));
        }
    };
    section(
        &mut lines,
        "models",
        model_entries(),
        true,
        "drift-adaptive",
    );
    section(&mut lines, "streams", stream_entries(), true, "drift");
    section(&mut lines, "strategies", strategy_entries(), false, "drift");
    lines.push("detectors:".into());
    for (name, summary) in DETECTORS {
        lines.push(format!("  {name:<11}  {summary}"));
    }
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

fn collect_csvs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else if input.is_file() {
            files.push(input.clone());
        } else {
            return Err(CliError::Config(format!(
                "no such file or directory: {}",
                input.display()
            )));
        }
    }
    if files.is_empty() {
        return Err(CliError::Config("no record files found".into()));
    }
    Ok(files)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32, CliError> {
    let mut records = Vec::new();
    for path in collect_csvs(&args.inputs)? {
        records.extend(
            read_records_csv(&path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        );
    }
    if args.window == 0 {
        return Err(CliError::Config("--window must be at least 1".into()));
    }
    let spec = comparison_from_records(&records, args.window, &args.title)?;
    render_comparison_svg(&spec, &args.out)?;
    Ok(EXIT_OK)
}

/// Runs a parsed command line and returns the process exit code. Errors are
/// reported on stderr.
pub fn dispatch(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Run(args) => {
            let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
            parse_config(&args, env_out).and_then(|eff| cmd_run(&eff, args.jobs, out))
        }
        Command::List => out
            .write_all(cmd_list().as_bytes())
            .map(|_| EXIT_OK)
            .map_err(|e| CliError::Run(e.to_string())),
        Command::Compare(args) => cmd_compare(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Ships with the crate: JSON experiment configs under `demos/`.
pub fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("demos")
}
