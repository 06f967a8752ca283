use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use nnpda::grammars::{anbn_fixture, DatasetSpec};
use nnpda::training::{init_weights, TrainResult};
use nnpda::{
    build_dataset, classify, construct_from_pda, enumerate_strings, export_dot, extract_pda,
    reduce_pda, run_pda, run_sequence, Alphabet, ClassifyRule, ConstructOptions, DiscretePda,
    ExtractOptions, Grammar, Label, LabeledDataset, NetworkShape, Order, StateQuantizer,
    TrainingConfig, TrapMode, WeightSet,
};

mod manifest;

use manifest::{sha256_hex, RunManifest};

#[derive(Parser)]
#[command(
    name = "nnpda",
    version,
    about = "Neural network pushdown automata: train, evaluate, extract"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a labelled dataset (`y`/`n` prefix per line).
    GenData(GenDataArgs),
    /// Train a model from a config and one dataset per stage.
    Train(TrainArgs),
    /// Accuracy of a model or PDA on a dataset or all strings up to a length.
    Eval(EvalArgs),
    /// Step-by-step TSV trace of a model on one string.
    Trace(TraceArgs),
    /// Extract a discrete PDA from a model.
    Extract(ExtractArgs),
    /// Build a model that emulates a PDA file.
    Construct(ConstructArgs),
    /// Merge equivalent states of a PDA file.
    Minimize(PdaInOut),
    /// Graphviz rendering of a PDA file.
    ExportDot(PdaInOut),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(value_parser = parse_grammar)]
    grammar: Grammar,
    /// Every non-empty string up to this length.
    #[arg(long, default_value_t = 0)]
    exhaustive: usize,
    /// COUNTxMAXLEN random strings, half legal; lengths start above `--exhaustive`.
    #[arg(long)]
    random: Option<String>,
    /// Every legal string of this length.
    #[arg(long)]
    legal_of_length: Option<usize>,
    /// The fixed 27-string starter set (anbn only).
    #[arg(long)]
    fixture: bool,
    /// Palindrome staged set (1 or 2).
    #[arg(long)]
    stage: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// One dataset per stage, in order.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// Model output; with `--seeds` the seed is inserted before the extension.
    #[arg(short, long)]
    out: PathBuf,
    /// Seed range `a..b` (exclusive end) trained concurrently; overrides the config seed.
    #[arg(long)]
    seeds: Option<String>,
    /// Start from these weights instead of a random draw.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Needed when the config does not name a grammar.
    #[arg(long, value_parser = parse_grammar)]
    grammar: Option<Grammar>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, conflicts_with = "pda", required_unless_present = "pda")]
    model: Option<PathBuf>,
    #[arg(long)]
    pda: Option<PathBuf>,
    #[arg(
        long,
        conflicts_with = "exhaustive",
        required_unless_present = "exhaustive"
    )]
    data: Option<PathBuf>,
    /// All non-empty strings up to this length, labelled by `--grammar`.
    #[arg(long, num_args = 0..=1, default_missing_value = "0")]
    exhaustive: Option<usize>,
    #[arg(long, value_parser = parse_grammar)]
    grammar: Option<Grammar>,
    #[arg(long, value_enum, default_value_t = Rule::HMeasure)]
    rule: Rule,
    #[arg(long, default_value_t = nnpda::stack::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Pop-empty deficit at which an analog run is rejected.
    #[arg(long, default_value_t = nnpda::training::DEFAULT_POP_EMPTY_TOLERANCE)]
    pop_empty_tolerance: f64,
    /// Print one line per string.
    #[arg(long)]
    per_string: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input string; tokens are single characters or whitespace separated.
    string: String,
    #[arg(long, default_value_t = nnpda::stack::DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = Quant::Binary)]
    quant: Quant,
    /// Cluster count for `--quant kmeans`.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Strings up to this length provide the k-means sample.
    #[arg(long, default_value_t = 6)]
    kmeans_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_reduce: bool,
    #[arg(long, value_enum, default_value_t = Trap::Off)]
    trap: Trap,
    #[arg(long, default_value_t = 4096)]
    max_states: usize,
    #[arg(long, default_value_t = 0.5)]
    action_threshold: f64,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    pda: PathBuf,
    /// State neurons; defaults to one per PDA state plus an accept indicator.
    #[arg(long)]
    n_state: Option<usize>,
    #[arg(long, value_enum, default_value_t = ConstructOrder::Third)]
    order: ConstructOrder,
    #[arg(long, default_value_t = 20.0)]
    gain: f64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PdaInOut {
    pda: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    HMeasure,
    StateAndStack,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quant {
    Five,
    Binary,
    Kmeans,
}

#[derive(Clone, Copy, ValueEnum)]
enum Trap {
    Off,
    Absorbing,
    Leaky,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructOrder {
    Third,
    Full,
}

/// Errors that map to a specific exit status.
#[derive(Debug)]
enum Exit {
    Usage(String),
    NotConverged,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exit::Usage(m) => write!(f, "{m}"),
            Exit::NotConverged => write!(f, "training did not converge"),
        }
    }
}

impl std::error::Error for Exit {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Exit::Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Exit>() {
        return match e {
            Exit::Usage(_) => 2,
            Exit::NotConverged => 4,
        };
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<nnpda::Error>() {
            return match e {
                nnpda::Error::NonFinite(_) => 5,
                nnpda::Error::Config(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

fn parse_grammar(s: &str) -> Result<Grammar, String> {
    Grammar::from_name(s).map_err(|e| e.to_string())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<(WeightSet, Alphabet)> {
    let w = WeightSet::from_text(&read(path)?)
        .with_context(|| format!("parsing model {}", path.display()))?;
    let a = w
        .alphabet()
        .cloned()
        .ok_or_else(|| anyhow!("model {} has no alphabet", path.display()))?;
    Ok((w, a))
}

fn load_pda(path: &Path) -> anyhow::Result<DiscretePda> {
    DiscretePda::parse(&read(path)?).with_context(|| format!("parsing PDA {}", path.display()))
}

fn tokenize(alphabet: &Alphabet, s: &str) -> anyhow::Result<Vec<usize>> {
    let s = s.trim();
    let toks = if s.contains(char::is_whitespace) {
        s.split_whitespace()
            .map(|t| {
                alphabet
                    .index_of(t)
                    .ok_or_else(|| nnpda::Error::UnknownSymbol(t.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        alphabet.tokenize(s)?
    };
    Ok(toks)
}

fn with_seed(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.seed{seed}.{ext}"),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn parse_range(s: &str) -> anyhow::Result<std::ops::Range<u64>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| usage(format!("seed range `{s}` is not of the form a..b")))?;
    let a: u64 = a.parse().map_err(|_| usage(format!("bad seed `{a}`")))?;
    let b: u64 = b.parse().map_err(|_| usage(format!("bad seed `{b}`")))?;
    if a >= b {
        return Err(usage(format!("empty seed range `{s}`")));
    }
    Ok(a..b)
}

fn gen_data(args: GenDataArgs) -> anyhow::Result<()> {
    let ds = if args.fixture {
        if args.grammar != Grammar::Anbn {
            return Err(usage("--fixture is only defined for anbn"));
        }
        anbn_fixture()
    } else {
        let spec = if let Some(stage) = args.stage {
            if args.grammar != Grammar::Palindrome {
                return Err(usage("--stage is only defined for palindrome"));
            }
            DatasetSpec::palindrome_stage(stage)
        } else {
            let (random_count, random_len) = match &args.random {
                None => (0, (0, 0)),
                Some(r) => {
                    let (c, l) = r
                        .split_once('x')
                        .ok_or_else(|| usage(format!("--random `{r}` is not COUNTxMAXLEN")))?;
                    let c: usize = c.parse().map_err(|_| usage(format!("bad count `{c}`")))?;
                    let l: usize = l.parse().map_err(|_| usage(format!("bad length `{l}`")))?;
                    (c, (args.exhaustive + 1, l))
                }
            };
            DatasetSpec {
                exhaustive_up_to: args.exhaustive,
                random_count,
                random_len,
                legal_of_length: args.legal_of_length,
            }
        };
        build_dataset(args.grammar, &spec, args.seed)?
    };
    write(&args.out, &ds.to_text())?;
    eprintln!(
        "wrote {} strings ({} legal) to {}",
        ds.len(),
        ds.count(Label::Legal),
        args.out.display()
    );
    Ok(())
}

struct SeedRun {
    seed: u64,
    model: PathBuf,
    result: TrainResult,
}

fn train_cmd(args: TrainArgs) -> anyhow::Result<()> {
    let config_text = read(&args.config)?;
    let config = TrainingConfig::parse(&config_text)
        .with_context(|| format!("config {}", args.config.display()))?;
    let grammar = args
        .grammar
        .or(config.grammar)
        .ok_or_else(|| usage("no grammar: set `grammar` in the config or pass --grammar"))?;
    let alphabet = grammar.alphabet();
    let mut stages = Vec::new();
    let mut digests = Vec::new();
    for p in &args.data {
        let text = read(p)?;
        digests.push(sha256_hex(text.as_bytes()));
        stages.push(
            LabeledDataset::parse(&text, &alphabet)
                .with_context(|| format!("dataset {}", p.display()))?,
        );
    }
    let resume = match &args.resume {
        Some(p) => Some(load_model(p)?.0),
        None => None,
    };
    let seeds: Vec<u64> = match &args.seeds {
        Some(r) => parse_range(r)?.collect(),
        None => vec![config.seed],
    };
    let sweep = args.seeds.is_some();

    let runs: Vec<anyhow::Result<SeedRun>> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = TrainingConfig {
                seed,
                ..config.clone()
            };
            let w = match &resume {
                Some(w) => w.clone(),
                None => init_weights(&cfg, &alphabet)?,
            };
            let result = nnpda::train(&w, &stages, &cfg)?;
            let model = if sweep {
                with_seed(&args.out, seed)
            } else {
                args.out.clone()
            };
            Ok(SeedRun {
                seed,
                model,
                result,
            })
        })
        .collect();

    let mut any_converged = false;
    for run in runs {
        let run = run?;
        let metrics_path = sibling(&run.model, ".metrics.tsv");
        write(&run.model, &run.result.weights.to_text())?;
        let fresh = args.resume.is_none() || !metrics_path.exists();
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(!fresh)
            .write(true)
            .truncate(fresh)
            .open(&metrics_path)
            .with_context(|| format!("writing {}", metrics_path.display()))?;
        if fresh {
            writeln!(f, "epoch\tmean_error\ttrain_accuracy\tpop_empty_count")?;
        }
        for m in &run.result.metrics {
            writeln!(f, "{m}")?;
        }
        let cfg = TrainingConfig {
            seed: run.seed,
            ..config.clone()
        };
        let last = run.result.final_metrics();
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.to_text(),
            seed: run.seed,
            dataset_sha256: digests.clone(),
            dataset_paths: args.data.iter().map(|p| p.display().to_string()).collect(),
            model_path: run.model.display().to_string(),
            metrics_path: metrics_path.display().to_string(),
            converged: run.result.converged,
            epochs: last.map_or(0, |m| m.epoch),
            final_accuracy: last.map_or(0.0, |m| m.accuracy),
            final_error: last.map_or(0.0, |m| m.mean_error),
        };
        write(&sibling(&run.model, ".manifest.json"), &manifest.to_json()?)?;
        println!(
            "seed {}\tconverged {}\tepochs {}\taccuracy {:.4}\terror {:.6}\t{}",
            run.seed,
            manifest.converged,
            manifest.epochs,
            manifest.final_accuracy,
            manifest.final_error,
            run.model.display()
        );
        any_converged |= run.result.converged;
    }
    if any_converged {
        Ok(())
    } else {
        Err(Exit::NotConverged.into())
    }
}

fn default_cap(alphabet: &Alphabet) -> usize {
    if alphabet.string_symbols().len() <= 2 {
        16
    } else {
        9
    }
}

enum Classifier {
    Model(WeightSet),
    Pda(DiscretePda),
}

fn eval_cmd(args: EvalArgs) -> anyhow::Result<()> {
    let (clf, alphabet) = match (&args.model, &args.pda) {
        (Some(m), _) => {
            let (w, a) = load_model(m)?;
            (Classifier::Model(w), a)
        }
        (None, Some(p)) => {
            let pda = load_pda(p)?;
            let a = pda.alphabet().clone();
            (Classifier::Pda(pda), a)
        }
        (None, None) => return Err(usage("--model or --pda is required")),
    };
    let rule = match args.rule {
        Rule::HMeasure => ClassifyRule::HMeasure,
        Rule::StateAndStack => ClassifyRule::StateAndStack,
    };
    let entries: Vec<(Vec<usize>, Label)> = match (&args.data, args.exhaustive) {
        (Some(p), _) => LabeledDataset::parse(&read(p)?, &alphabet)?.entries,
        (None, Some(n)) => {
            let g = args
                .grammar
                .ok_or_else(|| usage("--exhaustive needs --grammar"))?;
            let n = if n == 0 { default_cap(&alphabet) } else { n };
            enumerate_strings(&alphabet, n)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let l = g.label(&s);
                    (s, l)
                })
                .collect()
        }
        (None, None) => return Err(usage("--data or --exhaustive is required")),
    };
    let predicted: Vec<anyhow::Result<Label>> = entries
        .par_iter()
        .map(|(s, _)| match &clf {
            Classifier::Model(w) => Ok(classify(
                &run_sequence(w, &alphabet, s, args.epsilon)?,
                rule,
                args.pop_empty_tolerance,
            )),
            Classifier::Pda(p) => Ok(Label::from_bool(run_pda(p, s).is_legal())),
        })
        .collect();
    let mut correct = 0usize;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for ((s, truth), pred) in entries.iter().zip(predicted) {
        let pred = pred?;
        if pred == *truth {
            correct += 1;
        }
        if args.per_string {
            writeln!(
                out,
                "{}\t{}\t{}",
                alphabet.render(s),
                truth.flag(),
                pred.flag()
            )?;
        }
    }
    let total = entries.len();
    let acc = if total == 0 {
        1.0
    } else {
        correct as f64 / total as f64
    };
    writeln!(out, "correct {correct}/{total}\taccuracy {acc:.6}")?;
    Ok(())
}

fn trace_cmd(args: TraceArgs) -> anyhow::Result<()> {
    let (w, a) = load_model(&args.model)?;
    let toks = tokenize(&a, &args.string)?;
    let run = run_sequence(&w, &a, &toks, args.epsilon)?;
    print!("{}", run.to_tsv(&a));
    Ok(())
}

fn extract_cmd(args: ExtractArgs) -> anyhow::Result<()> {
    let (w, a) = load_model(&args.model)?;
    let quantizer = match args.quant {
        Quant::Five => StateQuantizer::five_levels(),
        Quant::Binary => StateQuantizer::Binary,
        Quant::Kmeans => {
            let strings: Vec<Vec<usize>> = enumerate_strings(&a, args.kmeans_len).collect();
            let mut points = vec![w.initial_state().to_vec()];
            for s in &strings {
                let run = run_sequence(&w, &a, s, nnpda::stack::DEFAULT_EPSILON)?;
                points.extend(run.steps.into_iter().map(|st| st.state));
            }
            let (q, dist) = StateQuantizer::fit_kmeans(&points, args.k, args.seed)?;
            eprintln!("k-means: k = {}, mean distance {dist:.6}", args.k);
            q
        }
    };
    let opts = ExtractOptions {
        quantizer,
        action_threshold: args.action_threshold,
        max_states: args.max_states,
        trap_mode: match args.trap {
            Trap::Off => TrapMode::Off,
            Trap::Absorbing => TrapMode::Absorbing,
            Trap::Leaky => TrapMode::Leaky,
        },
    };
    let raw = extract_pda(&w, &a, &opts)?;
    let pda = if args.no_reduce {
        raw
    } else {
        reduce_pda(&raw)
    };
    write(&args.out, &pda.to_text())?;
    if let Some(d) = &args.dot {
        write(d, &export_dot(&pda))?;
    }
    eprintln!("extracted {} states", pda.n_states());
    Ok(())
}

fn construct_cmd(args: ConstructArgs) -> anyhow::Result<()> {
    let pda = load_pda(&args.pda)?;
    let ns = args.n_state.unwrap_or(pda.n_states() + 1);
    let shape = NetworkShape::new(ns, pda.alphabet().len(), true)?;
    let opts = ConstructOptions {
        gain: args.gain,
        order: match args.order {
            ConstructOrder::Third => Order::Third,
            ConstructOrder::Full => Order::FullOrderAction,
        },
    };
    let w = construct_from_pda(&pda, &shape, &opts)?;
    write(&args.out, &w.to_text())?;
    Ok(())
}

fn minimize_cmd(args: PdaInOut) -> anyhow::Result<()> {
    let pda = reduce_pda(&load_pda(&args.pda)?);
    emit(args.out.as_deref(), &pda.to_text())
}

fn export_dot_cmd(args: PdaInOut) -> anyhow::Result<()> {
    let pda = load_pda(&args.pda)?;
    emit(args.out.as_deref(), &export_dot(&pda))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::GenData(a) => gen_data(a),
        Cmd::Train(a) => train_cmd(a),
        Cmd::Eval(a) => eval_cmd(a),
        Cmd::Trace(a) => trace_cmd(a),
        Cmd::Extract(a) => extract_cmd(a),
        Cmd::Construct(a) => construct_cmd(a),
        Cmd::Minimize(a) => minimize_cmd(a),
        Cmd::ExportDot(a) => export_dot_cmd(a),
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("NNPDA_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| usage(format!("NNPDA_THREADS=`{v}` is not a number")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
