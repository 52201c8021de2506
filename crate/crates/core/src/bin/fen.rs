//! `fen`: generate instances, check them exactly, run the testers, repair,
//! and sweep parameters.
//!
//! Exit codes: 0 stable / accept-dominant / success, 1 unstable /
//! reject-dominant, 2 usage, IO or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fen_core::exact::{exact_perfect_exists, exact_verify};
use fen_core::experiment::{bench_csv, run_bench, run_trials, BenchConfig, SweepParam, TestMode};
use fen_core::generate::{generate, Family, InstanceSpec, Planted, UtilityPreset};
use fen_core::{CoalitionStructure, Epsilon, FenError, FenGame, SizeBound, StabilityConcept};

#[derive(Parser)]
#[command(name = "fen", version, about = "Property testers for stability in friends/enemies hedonic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game (and partition and certificate) from a family.
    Gen(GenArgs),
    /// Decide stability exactly and print the certificate.
    VerifyExact(VerifyArgs),
    /// Run seeded tester trials.
    Test(TestArgs),
    /// Repair every witness and re-verify.
    Repair(RepairArgs),
    /// Sweep n, epsilon or c and report query counts.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verify,
    Exist,
}

impl From<ModeArg> for TestMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Verify => TestMode::Verify,
            ModeArg::Exist => TestMode::Exist,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value = "unbounded")]
    c: SizeBound,
    /// friends-appreciation, enemies-aversion, or `f,e`.
    #[arg(long, default_value = "1,1")]
    utility: UtilityPreset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of planted gadgets, or `max`.
    #[arg(long)]
    planted: Option<Planted>,
    #[arg(long)]
    cluster_size: Option<usize>,
    /// Writes `<out>.game`, `<out>.partition` and `<out>.cert.json`; prints JSON otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    game: PathBuf,
    /// Required unless `--mode exist`.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "verify")]
    mode: ModeArg,
    #[arg(long, default_value = "nash")]
    concept: StabilityConcept,
    /// Defaults to the bound in the partition file.
    #[arg(long)]
    c: Option<SizeBound>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "verify")]
    mode: ModeArg,
    #[arg(long, default_value = "nash")]
    concept: StabilityConcept,
    #[arg(long, default_value = "0.1")]
    epsilon: Epsilon,
    #[arg(long)]
    c: Option<SizeBound>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Record wall-clock time per trial.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long, default_value = "nash")]
    concept: StabilityConcept,
    #[arg(long)]
    c: Option<SizeBound>,
    /// Also write the edit script to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    sweep: SweepParam,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[arg(long, default_value = "friend-clusters-perfect")]
    family: Family,
    #[arg(long, value_enum, default_value = "verify")]
    mode: ModeArg,
    #[arg(long, default_value = "nash")]
    concept: StabilityConcept,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value = "3")]
    c: SizeBound,
    #[arg(long, default_value = "0.1")]
    epsilon: Epsilon,
    #[arg(long, default_value = "1,1")]
    utility: UtilityPreset,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Debug)]
enum Failure {
    Fen(FenError),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<FenError> for Failure {
    fn from(e: FenError) -> Self {
        Failure::Fen(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Fen(e) => write!(f, "{e}"),
            Failure::Io(path, e) => write!(f, "{}: {e}", path.display()),
            Failure::Usage(msg) => f.write_str(msg),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_game(path: &Path) -> Result<FenGame, Failure> {
    Ok(FenGame::parse(&read(path)?)?)
}

fn load_partition(path: &Path) -> Result<CoalitionStructure, Failure> {
    Ok(CoalitionStructure::parse(&read(path)?)?)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn cmd_gen(args: GenArgs) -> Outcome {
    let spec = InstanceSpec {
        utility: args.utility,
        planted: args.planted,
        cluster_size: args.cluster_size,
        ..InstanceSpec::new(args.family, args.n, args.d, args.c, args.seed)
    };
    let instance = generate(&spec)?;
    let certificate = &instance.certificate;
    match args.out {
        Some(prefix) => {
            let mut files = vec![with_suffix(&prefix, ".game")];
            write(&files[0], &instance.game.to_text())?;
            if let Some(p) = &instance.partition {
                files.push(with_suffix(&prefix, ".partition"));
                write(&files[1], &p.to_text())?;
            }
            let cert_path = with_suffix(&prefix, ".cert.json");
            write(&cert_path, &(serde_json::to_string_pretty(certificate).expect("serializable") + "\n"))?;
            files.push(cert_path);
            let names: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
            print_json(&json!({ "files": names }));
        }
        None => print_json(&json!({
            "game": instance.game.to_text(),
            "partition": instance.partition.as_ref().map(|p| p.to_text()),
            "certificate": certificate,
        })),
    }
    Ok(true)
}

fn resolve_bound(explicit: Option<SizeBound>, partition: Option<&CoalitionStructure>) -> SizeBound {
    explicit.or(partition.map(|p| p.bound())).unwrap_or(SizeBound::Unbounded)
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let game = load_game(&args.game)?;
    match args.mode {
        ModeArg::Exist => {
            let c = args.c.unwrap_or(SizeBound::Unbounded);
            let cert = exact_perfect_exists(&game, c);
            print_json(&cert);
            Ok(cert.stable)
        }
        ModeArg::Verify => {
            let path = args.partition.ok_or_else(|| Failure::Usage("--partition is required in verify mode".into()))?;
            let partition = load_partition(&path)?;
            let c = resolve_bound(args.c, Some(&partition));
            let cert = exact_verify(&game, &partition, args.concept, c)?;
            print_json(&cert);
            Ok(cert.stable)
        }
    }
}

fn cmd_test(args: TestArgs) -> Outcome {
    let game = load_game(&args.game)?;
    let partition = args.partition.as_deref().map(load_partition).transpose()?;
    let mode: TestMode = args.mode.into();
    if mode == TestMode::Verify && partition.is_none() {
        return Err(Failure::Usage("--partition is required in verify mode".into()));
    }
    let c = resolve_bound(args.c, partition.as_ref());
    let result = run_trials(
        &game,
        partition.as_ref(),
        mode,
        args.concept,
        args.epsilon,
        c,
        args.seed,
        args.trials,
        args.timing,
    )?;
    match args.format {
        Format::Json => print_json(&result),
        Format::Csv => print!("{}", result.to_csv()),
    }
    Ok(!result.reject_dominant())
}

fn cmd_repair(args: RepairArgs) -> Outcome {
    let game = load_game(&args.game)?;
    let partition = load_partition(&args.partition)?;
    let c = resolve_bound(args.c, Some(&partition));
    let plan = fen_core::repair_all_witnesses(&game, &partition, args.concept, c)?;
    let bound = plan.length_bound(game.degree_bound());
    if plan.script.cost() > bound {
        return Err(Failure::Usage(format!("repair used {} edits, more than k·d = {bound}", plan.script.cost())));
    }
    let repaired = game.apply_edits(&plan.script)?;
    let after = exact_verify(&repaired, &partition, args.concept, c)?;
    if let Some(path) = &args.out {
        write(path, &plan.script.to_text())?;
    }
    print_json(&json!({
        "concept": args.concept,
        "c": c,
        "witnesses": plan.witnesses,
        "k": plan.witnesses.len(),
        "length": plan.script.cost(),
        "length_bound": bound,
        "script": plan.script.to_text(),
        "stable_after": after.stable,
    }));
    if !after.stable {
        return Err(Failure::Usage("repaired game is still unstable".into()));
    }
    Ok(true)
}

fn cmd_bench(args: BenchArgs) -> Outcome {
    let config = BenchConfig {
        sweep: args.sweep,
        values: args.values,
        family: args.family,
        mode: args.mode.into(),
        concept: args.concept,
        n: args.n,
        d: args.d,
        c: args.c,
        epsilon: args.epsilon,
        utility: args.utility,
        trials: args.trials,
        seed: args.seed,
    };
    let rows = run_bench(&config, args.timing)?;
    let text = match args.format {
        Format::Csv => bench_csv(&rows),
        Format::Json => {
            serde_json::to_string_pretty(&json!({ "config": config, "rows": rows })).expect("serializable") + "\n"
        }
    };
    match &args.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::VerifyExact(a) => cmd_verify(a),
        Command::Test(a) => cmd_test(a),
        Command::Repair(a) => cmd_repair(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
