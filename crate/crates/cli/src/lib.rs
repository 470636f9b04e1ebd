//! The `chembench` command line.
//!
//! Subcommands are thin adapters over `chembench-core` and
//! `chembench-harness`. Data goes to stdout or files, diagnostics to stderr.
//! Exit codes: 0 success, 1 input error, 2 usage or configuration error.
//!
//! Settings resolve as flags, then the TOML file named by `--config` or
//! `CHEMBENCH_CONFIG`, then built-in defaults.

mod config;

use chembench_core::fingerprint::{tanimoto, FingerprintKind};
use chembench_core::scaffold::scaffold_split;
use chembench_core::taskgen::{
    build_md, build_mna, build_mpp, build_rc_with, build_tbmd, mix_datasets, read_jsonl, read_pairs_csv,
    read_pairs_jsonl, read_reactions, write_jsonl, LabeledTable, MixRatio, MnaDirection, TaskFamily, TaskgenError, TemplatePool,
    DEFAULT_MAX_MASKED,
};
use chembench_core::{canonical_smiles, molecular_formula, parse_smiles, Molecule};
use chembench_harness::report::{render_report, BenchReport, ReportFormat};
use chembench_harness::run::{records_to_jsonl, run_benchmark, score_inputs, write_run_dir};
use chembench_harness::{BenchmarkTask, ModelClient, ResponseCache, ScoreInput, TaskKind};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use config::FileConfig;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use config::CONFIG_ENV;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "chembench", version, about = "Chemistry toolkit and language-model benchmark harness")]
struct Cli {
    /// TOML configuration file (also read from CHEMBENCH_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Diagnostic verbosity on stderr.
    #[arg(long, global = true, value_enum)]
    log_level: Option<LogLevel>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    Error,
    Warn,
    Info,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical SMILES, one per input line.
    Canon(LinesArgs),
    /// Hill-order molecular formula, one per input line.
    Formula(LinesArgs),
    /// Fingerprint as hex (least significant byte first) or on-bit list.
    Fp {
        #[command(flatten)]
        lines: LinesArgs,
        #[arg(long, value_enum, default_value = "morgan")]
        kind: FpKind,
        #[arg(long, value_enum, default_value = "hex")]
        format: FpFormat,
    },
    /// Tanimoto similarity of line i of FILE_A with line i of FILE_B.
    Tanimoto {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value = "morgan")]
        kind: FpKind,
    },
    /// Scaffold-grouped train/test split of a CSV with id and smiles columns.
    ScaffoldSplit {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Instruction-tuning JSONL from raw records.
    BuildDataset {
        #[arg(long, value_enum)]
        family: Family,
        /// Template file: JSON pool or one template per line.
        #[arg(long)]
        templates: PathBuf,
        /// Records: CSV or JSONL pairs, a labelled CSV (mpp), or reaction lines (rc).
        #[arg(long)]
        input: PathBuf,
        /// Notation direction for mna.
        #[arg(long)]
        direction: Option<String>,
        /// Dataset name recorded by mpp; defaults to the input file stem.
        #[arg(long)]
        dataset_name: Option<String>,
        #[arg(long)]
        max_masked: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mix chemistry and general instruction JSONL at a count ratio.
    Mix {
        #[arg(long)]
        chem: PathBuf,
        #[arg(long)]
        general: PathBuf,
        #[arg(long)]
        ratio: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        allow_upsample: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Benchmark a chat-completion endpoint.
    RunBench(BenchArgs),
    /// Score predictions (JSONL of id, task, prediction, reference) into a report.
    Score {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        /// Also write records.jsonl, report.json and report.md here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render report JSON (one report or a list) as markdown or JSON.
    Report {
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: OutFormat,
    },
}

#[derive(Args, Debug)]
struct LinesArgs {
    /// Read from this file instead of stdin.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct BenchArgs {
    /// Task kind, e.g. s2mf or property:bace; pairs with --dataset in order.
    #[arg(long = "task")]
    tasks: Vec<String>,
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    /// Instances sampled per task.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    shots: Option<usize>,
    /// Training split for few-shot exemplars; pairs with --dataset in order.
    #[arg(long = "train")]
    train: Vec<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    #[arg(long)]
    max_retries: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FpKind {
    Morgan,
    Path,
    Keys,
}

impl From<FpKind> for FingerprintKind {
    fn from(k: FpKind) -> Self {
        match k {
            FpKind::Morgan => FingerprintKind::Morgan,
            FpKind::Path => FingerprintKind::Path,
            FpKind::Keys => FingerprintKind::Keys,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FpFormat {
    Hex,
    Bits,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Md,
    Tbmd,
    Mpp,
    Rc,
    Mna,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Markdown,
    Json,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    level: LogLevel,
}

impl Io<'_> {
    fn out(&mut self, text: &str) -> Result<(), CliError> {
        self.stdout.write_all(text.as_bytes()).map_err(input_err)
    }

    fn warn(&mut self, msg: &str) {
        if self.level >= LogLevel::Warn {
            let _ = writeln!(self.stderr, "warning: {msg}");
        }
    }

    fn info(&mut self, msg: &str) {
        if self.level >= LogLevel::Info {
            let _ = writeln!(self.stderr, "{msg}");
        }
    }

    fn read_input(&mut self, path: Option<&Path>) -> Result<String, CliError> {
        match path {
            Some(p) => read_file(p),
            None => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s).map_err(input_err)?;
                Ok(s)
            }
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = writeln!(stderr, "{text}");
                let _ = write!(stderr, "{}", usage_help(&argv));
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    let file_config = match FileConfig::resolve(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let level = cli.log_level.or(file_config.log_level).unwrap_or(LogLevel::Warn);
    let mut io = Io {
        stdin,
        stdout,
        stderr,
        level,
    };
    match dispatch(cli.command, &file_config, &mut io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Help of the subcommand named in `argv`, or of the whole program.
fn usage_help(argv: &[OsString]) -> String {
    let mut cmd = Cli::command();
    let name = argv
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .map(String::from);
    match name.and_then(|n| cmd.find_subcommand_mut(&n).cloned()) {
        Some(mut sub) => sub.render_help().to_string(),
        None => cmd.render_help().to_string(),
    }
}

fn dispatch(command: Command, cfg: &FileConfig, io: &mut Io) -> Result<(), CliError> {
    match command {
        Command::Canon(a) => per_line(io, a.input.as_deref(), |m| canonical_smiles(m)),
        Command::Formula(a) => per_line(io, a.input.as_deref(), molecular_formula),
        Command::Fp { lines, kind, format } => {
            let kind = FingerprintKind::from(kind);
            per_line(io, lines.input.as_deref(), |m| {
                let fp = kind.compute(m);
                match format {
                    FpFormat::Hex => fp.to_hex(),
                    FpFormat::Bits => fp.ones().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
                }
            })
        }
        Command::Tanimoto { file_a, file_b, kind } => tanimoto_cmd(io, &file_a, &file_b, kind.into()),
        Command::ScaffoldSplit {
            input,
            out_dir,
            fraction,
            seed,
        } => {
            let fraction = fraction.or(cfg.split.fraction).unwrap_or(0.8);
            let seed = seed.or(cfg.split.seed).unwrap_or(0);
            scaffold_split_cmd(io, input.as_deref(), &out_dir, fraction, seed)
        }
        Command::BuildDataset {
            family,
            templates,
            input,
            direction,
            dataset_name,
            max_masked,
            seed,
            output,
        } => {
            let seed = seed.or(cfg.build.seed).unwrap_or(0);
            let text = build_dataset(family, &templates, &input, direction, dataset_name, max_masked, seed)?;
            emit(io, output.as_deref(), &text)
        }
        Command::Mix {
            chem,
            general,
            ratio,
            seed,
            allow_upsample,
            output,
        } => {
            let ratio: MixRatio = match ratio.or_else(|| cfg.mix.ratio.clone()) {
                Some(r) => r.parse().map_err(|e: TaskgenError| CliError::Config(e.to_string()))?,
                None => MixRatio::default(),
            };
            let seed = seed.or(cfg.mix.seed).unwrap_or(0);
            let chem = read_jsonl(&read_file(&chem)?).map_err(input_err)?;
            let general = read_jsonl(&read_file(&general)?).map_err(input_err)?;
            let upsample = allow_upsample || cfg.mix.allow_upsample.unwrap_or(false);
            let mixed = mix_datasets(&chem, &general, ratio, seed, upsample).map_err(input_err)?;
            emit(io, output.as_deref(), &write_jsonl(&mixed))
        }
        Command::RunBench(args) => run_bench(io, cfg, args),
        Command::Score { input, model, out } => {
            let text = io.read_input(input.as_deref())?;
            let mut inputs = Vec::new();
            for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let i: ScoreInput =
                    serde_json::from_str(line).map_err(|e| CliError::Input(format!("line {}: {e}", n + 1)))?;
                inputs.push(i);
            }
            let model = model.or_else(|| cfg.endpoint.as_ref().map(|e| e.model_name.clone()));
            let (records, report) = score_inputs(&inputs, model.as_deref().unwrap_or("model"));
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(input_err)?;
                write_file(&dir.join("records.jsonl"), &records_to_jsonl(&records))?;
                write_file(&dir.join("report.json"), &report.to_json())?;
                write_file(
                    &dir.join("report.md"),
                    &render_report(std::slice::from_ref(&report), ReportFormat::Markdown),
                )?;
            }
            io.out(&report.to_json())
        }
        Command::Report { inputs, format } => {
            let mut reports = Vec::new();
            for p in &inputs {
                reports.extend(parse_reports(&read_file(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?);
            }
            if inputs.is_empty() {
                let text = io.read_input(None)?;
                reports = parse_reports(&text).map_err(input_err)?;
            }
            let format = match format {
                OutFormat::Markdown => ReportFormat::Markdown,
                OutFormat::Json => ReportFormat::Json,
            };
            io.out(&render_report(&reports, format))
        }
    }
}

/// One report object or a list of them.
pub fn parse_reports(text: &str) -> Result<Vec<BenchReport>, serde_json::Error> {
    if text.trim_start().starts_with('[') {
        serde_json::from_str(text)
    } else {
        serde_json::from_str::<BenchReport>(text).map(|r| vec![r])
    }
}

fn emit(io: &mut Io, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => io.out(text),
    }
}

/// Applies `f` to each non-blank SMILES line. Unparsable lines produce an
/// empty output line, a diagnostic, and exit code 1 at the end.
fn per_line(io: &mut Io, input: Option<&Path>, f: impl Fn(&Molecule) -> String) -> Result<(), CliError> {
    let text = io.read_input(input)?;
    let mut out = String::new();
    let mut failures = 0usize;
    for (n, line) in text.lines().enumerate() {
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        match parse_smiles(s) {
            Ok(m) => out.push_str(&f(&m)),
            Err(e) => {
                failures += 1;
                io.warn(&format!("line {}: {e}", n + 1));
            }
        }
        out.push('\n');
    }
    io.out(&out)?;
    if failures > 0 {
        return Err(CliError::Input(format!("{failures} line(s) could not be parsed")));
    }
    Ok(())
}

fn smiles_lines(path: &Path) -> Result<Vec<String>, CliError> {
    Ok(read_file(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn tanimoto_cmd(io: &mut Io, a: &Path, b: &Path, kind: FingerprintKind) -> Result<(), CliError> {
    let (la, lb) = (smiles_lines(a)?, smiles_lines(b)?);
    if la.len() != lb.len() {
        return Err(CliError::Input(format!(
            "{} has {} molecules, {} has {}",
            a.display(),
            la.len(),
            b.display(),
            lb.len()
        )));
    }
    let mut out = String::new();
    for (i, (x, y)) in la.iter().zip(&lb).enumerate() {
        let parse = |s: &str| parse_smiles(s).map_err(|e| CliError::Input(format!("pair {}: {s:?}: {e}", i + 1)));
        let (mx, my) = (parse(x)?, parse(y)?);
        let t = tanimoto(&kind.compute(&mx), &kind.compute(&my)).map_err(input_err)?;
        out.push_str(&format!("{t}\n"));
    }
    io.out(&out)
}

fn scaffold_split_cmd(io: &mut Io, input: Option<&Path>, out_dir: &Path, fraction: f64, seed: u64) -> Result<(), CliError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Config(format!("--fraction {fraction} must lie strictly between 0 and 1")));
    }
    let text = io.read_input(input)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(input_err)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let smiles_col = col("smiles").ok_or_else(|| CliError::Input("CSV has no smiles column".into()))?;
    let id_col = col("id");
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(input_err)?;
        let id = id_col.and_then(|c| rec.get(c)).map(String::from).unwrap_or_else(|| n.to_string());
        let smiles = rec.get(smiles_col).unwrap_or("");
        let mol = parse_smiles(smiles).map_err(|e| CliError::Input(format!("row {} ({id}): {e}", n + 1)))?;
        records.push((id, mol));
        rows.push(rec);
    }
    let split = scaffold_split(&records, fraction, seed).map_err(input_err)?;
    let train: std::collections::HashSet<&str> = split.train.iter().map(String::as_str).collect();
    std::fs::create_dir_all(out_dir).map_err(input_err)?;
    let mut train_w = csv::Writer::from_writer(Vec::new());
    let mut test_w = csv::Writer::from_writer(Vec::new());
    train_w.write_record(&headers).map_err(input_err)?;
    test_w.write_record(&headers).map_err(input_err)?;
    for ((id, _), row) in records.iter().zip(&rows) {
        let w = if train.contains(id.as_str()) { &mut train_w } else { &mut test_w };
        w.write_record(row).map_err(input_err)?;
    }
    let bytes = |w: csv::Writer<Vec<u8>>| String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8");
    write_file(&out_dir.join("train.csv"), &bytes(train_w))?;
    write_file(&out_dir.join("test.csv"), &bytes(test_w))?;
    let manifest = serde_json::to_string_pretty(&split).expect("split serialises") + "\n";
    write_file(&out_dir.join("split.json"), &manifest)?;
    io.info(&format!(
        "{} train / {} test over {} scaffold groups",
        split.train.len(),
        split.test.len(),
        split.group_count
    ));
    io.out(&manifest)
}

fn read_pairs(path: &Path, first: &str, second: &str) -> Result<Vec<(String, String)>, CliError> {
    let text = read_file(path)?;
    let is_jsonl = path.extension().is_some_and(|e| e == "jsonl" || e == "json");
    if is_jsonl {
        read_pairs_jsonl(&text, first, second)
    } else {
        read_pairs_csv(text.as_bytes(), first, second)
    }
    .map_err(input_err)
}

fn build_dataset(
    family: Family,
    templates: &Path,
    input: &Path,
    direction: Option<String>,
    dataset_name: Option<String>,
    max_masked: Option<usize>,
    seed: u64,
) -> Result<String, CliError> {
    let mut mna_direction = None;
    let task_family = match family {
        Family::Md => TaskFamily::Md,
        Family::Tbmd => TaskFamily::Tbmd,
        Family::Mpp => TaskFamily::Mpp,
        Family::Rc => TaskFamily::Rc,
        Family::Mna => {
            let d = direction.as_deref().ok_or_else(|| CliError::Config("mna needs --direction s2i|i2s|s2mf|i2mf".into()))?;
            let d: MnaDirection = d.parse().map_err(|e: TaskgenError| CliError::Config(e.to_string()))?;
            mna_direction = Some(d);
            d.family()
        }
    };
    let pool = TemplatePool::load(task_family, &read_file(templates)?).map_err(|e| CliError::Config(e.to_string()))?;
    let instances = match family {
        Family::Md => build_md(&read_pairs(input, "smiles", "description")?, &pool, seed),
        Family::Tbmd => build_tbmd(&read_pairs(input, "smiles", "description")?, &pool, seed),
        Family::Mna => build_mna(
            &read_pairs(input, "smiles", "iupac")?,
            &pool,
            seed,
            mna_direction.expect("set for mna"),
        ),
        Family::Mpp => {
            let name = dataset_name.unwrap_or_else(|| {
                input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            });
            let table = LabeledTable::from_csv(&name, read_file(input)?.as_bytes()).map_err(input_err)?;
            build_mpp(&table, &pool, seed)
        }
        Family::Rc => {
            let reactions = read_reactions(&read_file(input)?).map_err(input_err)?;
            build_rc_with(&reactions, &pool, seed, max_masked.unwrap_or(DEFAULT_MAX_MASKED))
        }
    }
    .map_err(input_err)?;
    Ok(write_jsonl(&instances))
}

fn run_bench(io: &mut Io, cfg: &FileConfig, args: BenchArgs) -> Result<(), CliError> {
    let mut endpoint = cfg.endpoint.clone().unwrap_or_default();
    if let Some(v) = args.endpoint {
        endpoint.base_url = v;
    }
    if let Some(v) = args.model {
        endpoint.model_name = v;
    }
    if let Some(v) = args.parallelism {
        endpoint.parallelism = v;
    }
    if let Some(v) = args.api_key_env {
        endpoint.api_key_env = Some(v);
    }
    if let Some(v) = args.max_tokens {
        endpoint.max_tokens = v;
    }
    if let Some(v) = args.temperature {
        endpoint.temperature = v;
    }
    if let Some(v) = args.timeout_secs {
        endpoint.timeout_secs = v;
    }
    if let Some(v) = args.max_retries {
        endpoint.max_retries = v;
    }
    if endpoint.parallelism == 0 {
        return Err(CliError::Config("--parallelism must be at least 1".into()));
    }

    let bench = &cfg.bench;
    let mut tasks: Vec<BenchmarkTask> = if args.tasks.is_empty() {
        bench.tasks.clone()
    } else {
        if args.tasks.len() != args.datasets.len() {
            return Err(CliError::Config(format!(
                "{} --task flags but {} --dataset flags",
                args.tasks.len(),
                args.datasets.len()
            )));
        }
        if !args.train.is_empty() && args.train.len() != args.tasks.len() {
            return Err(CliError::Config("--train must be given once per --task or not at all".into()));
        }
        let mut tasks = Vec::new();
        for (i, (t, d)) in args.tasks.iter().zip(&args.datasets).enumerate() {
            let kind: TaskKind = t.parse().map_err(|e: chembench_harness::task::TaskError| CliError::Config(e.to_string()))?;
            let mut task = BenchmarkTask::new(kind, d.clone());
            task.train_path = args.train.get(i).cloned();
            tasks.push(task);
        }
        tasks
    };
    if tasks.is_empty() {
        return Err(CliError::Config("no tasks: pass --task/--dataset or list [[bench.tasks]] in the config".into()));
    }
    for t in &mut tasks {
        if let Some(n) = args.n.or(bench.n) {
            t.sample_size = n;
        }
        if let Some(s) = args.seed.or(bench.seed) {
            t.seed = s;
        }
        if let Some(k) = args.shots.or(bench.shots) {
            t.shots = k;
        }
        t.metrics().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out = args
        .out
        .or_else(|| bench.out.clone())
        .ok_or_else(|| CliError::Config("run-bench needs --out".into()))?;
    let cache = match args.cache_dir.or_else(|| bench.cache_dir.clone()) {
        Some(dir) => Some(ResponseCache::open(dir).map_err(input_err)?),
        None => None,
    };
    let client = ModelClient::new(endpoint, cache).map_err(|e| CliError::Config(e.to_string()))?;
    let result = run_benchmark(&tasks, &client).map_err(input_err)?;
    for r in result.records.iter().filter(|r| r.error.is_some()) {
        io.info(&format!("{}: {}", r.id, r.error.as_deref().unwrap_or_default()));
    }
    let errors = result.records.iter().filter(|r| r.error.is_some()).count();
    if errors > 0 {
        io.warn(&format!("{errors} of {} records have errors", result.records.len()));
    }
    write_run_dir(&out, &result).map_err(input_err)?;
    io.info(&format!("wrote {}", out.display()));
    io.out(&render_report(std::slice::from_ref(&result.report), ReportFormat::Markdown))
}
