//! The `jointparse` command line.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jointparse_core::eval::Report;
use jointparse_core::model::Model;
use jointparse_core::rst::skeleton_to_rst;
use jointparse_core::splice::splice_edus;
use jointparse_core::stats::{corpus_stats, CorpusStats};
use jointparse_core::synth::{generate_aligned, generate_synthetic, SynthParams};
use jointparse_core::train::{evaluate_one, train, EpochStats, TrainError, TrainHooks, TrainMode};
use jointparse_core::transition::DecodeMode;
use jointparse_core::tree::{extract_edus, EduSpan};
use jointparse_core::verify::{check_gradients, check_oracle, GradCheckConfig};
use jointparse_core::JointTree;
use rayon::prelude::*;

use crate::checkpoint;
use crate::config::RunConfig;
use crate::convert::{convert_dirs, write_dropped};
use crate::formats::dis::write_rst;
use crate::formats::joint::{read_joint, write_node, write_treebank};
use crate::formats::plain::{read_edus, read_tokens};
use crate::report::{table, EvalReport};

#[derive(Debug, Parser)]
#[command(name = "jointparse", version, about = "Joint syntacto-discourse treebanks and parsing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merge RST discourse trees with PTB constituency trees.
    Convert(ConvertArgs),
    /// Write a synthetic joint treebank.
    Generate(GenerateArgs),
    /// Train a parser.
    Train(TrainArgs),
    /// Parse tokenized documents.
    Parse(ParseArgs),
    /// Score predicted trees against gold trees.
    Eval(EvalArgs),
    /// Run the oracle and gradient verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_name = "DIR")]
    pub ptb: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub rst: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Where to list documents that could not be converted.
    #[arg(long, value_name = "FILE")]
    pub dropped: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub bucket: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub count: usize,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub max_tokens: usize,
    #[arg(long, default_value_t = 6)]
    pub max_edus: usize,
    /// Also write the trees as source corpora: DIR/ptb/*.mrg and DIR/rst/*.dis.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Joint treebank; overrides `data.treebank` of the config.
    #[arg(long, value_name = "FILE")]
    pub treebank: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Train once per value, into DIR/beta-<value>.
    #[arg(long, value_delimiter = ',')]
    pub beta_sweep: Vec<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long, value_name = "CKPT")]
    pub model: PathBuf,
    /// Tokenized documents separated by blank lines.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// One line of start:end EDU ranges per document.
    #[arg(long, value_name = "FILE")]
    pub gold_edus: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    End2end,
    Goldedu,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalMode::End2end)]
    pub mode: EvalMode,
    /// Write the per-document and corpus report as JSON.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub gradcheck: bool,
    #[arg(long, default_value_t = 1000)]
    pub states: usize,
    #[arg(long, default_value_t = 6)]
    pub max_tokens: usize,
    #[arg(long, default_value_t = 3)]
    pub documents: usize,
    #[arg(long, default_value_t = 8)]
    pub slices: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A failed command: bad input (exit 1) or a failure while running (exit 2).
#[derive(Debug)]
pub enum CliError {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(e) | CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

fn invalid(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Invalid(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

type CliResult<T = ()> = Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(runtime)
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(runtime)
}

fn read_treebank(path: &Path) -> CliResult<Vec<JointTree>> {
    let text = read_file(path)?;
    read_joint(&text)
        .with_context(|| format!("{}", path.display()))
        .map_err(invalid)
}

fn pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(invalid(anyhow!("--jobs must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(runtime)
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Convert(a) => cmd_convert(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Parse(a) => cmd_parse(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

pub fn format_stats(s: &CorpusStats) -> String {
    let mut out = format!(
        "trees {}\ntokens {}\nlength {}-{}\n",
        s.trees, s.tokens, s.min_len, s.max_len
    );
    for (start, count) in &s.histogram {
        out.push_str(&format!("  [{start}, {}) {count}\n", start + s.bucket_width));
    }
    out
}

fn cmd_convert(a: &ConvertArgs) -> CliResult {
    let conversion = pool(a.jobs)?
        .install(|| convert_dirs(&a.ptb, &a.rst))
        .map_err(|failures| {
            let lines: Vec<String> = failures.iter().map(ToString::to_string).collect();
            runtime(anyhow!("unreadable input:\n{}", lines.join("\n")))
        })?;
    let trees: Vec<JointTree> = conversion.trees.iter().map(|(_, t)| t.clone()).collect();
    write_file(&a.out, &write_treebank(&trees))?;
    if let Some(path) = &a.dropped {
        write_file(path, &write_dropped(&conversion.dropped))?;
    }
    print!("{}", format_stats(&corpus_stats(&trees, a.bucket)));
    println!("dropped {}", conversion.dropped.len());
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> CliResult {
    let params = SynthParams {
        max_tokens: a.max_tokens,
        max_edus: a.max_edus,
        ..SynthParams::default()
    };
    let seeds = (0..a.count as u64).map(|k| a.seed.wrapping_add(k));
    let trees: Vec<JointTree> = match &a.corpus {
        None => seeds
            .map(|s| generate_synthetic(s, &params))
            .collect::<Result<_, _>>()
            .map_err(invalid)?,
        Some(dir) => {
            let (ptb_dir, rst_dir) = (dir.join("ptb"), dir.join("rst"));
            for d in [&ptb_dir, &rst_dir] {
                fs::create_dir_all(d)
                    .with_context(|| format!("cannot create {}", d.display()))
                    .map_err(runtime)?;
            }
            let mut trees = Vec::with_capacity(a.count);
            for (k, seed) in seeds.enumerate() {
                let inst = generate_aligned(seed, &params).map_err(invalid)?;
                let tree = splice_edus(&inst.skeleton, &inst.edus, &inst.forest).map_err(runtime)?;
                let rst = skeleton_to_rst(&inst.skeleton, &inst.edu_texts)
                    .ok_or_else(|| runtime(anyhow!("generated skeleton does not match its EDUs")))?;
                let name = format!("synth_{k:05}");
                let ptb: String = inst
                    .forest
                    .sentences()
                    .iter()
                    .map(|s| format!("( {} )\n", write_node(s, inst.forest.tokens())))
                    .collect();
                write_file(&ptb_dir.join(format!("{name}.mrg")), &ptb)?;
                write_file(&rst_dir.join(format!("{name}.out.dis")), &write_rst(&rst))?;
                trees.push(tree);
            }
            trees
        }
    };
    write_file(&a.out, &write_treebank(&trees))?;
    print!("{}", format_stats(&corpus_stats(&trees, 10)));
    Ok(())
}

/// Dev evaluation on a worker pool, checkpoints and a log line per epoch.
pub struct RunHooks {
    pub dir: PathBuf,
    pub pool: rayon::ThreadPool,
    pub keep_epochs: bool,
    pub log: Option<fs::File>,
    pub started: Instant,
}

impl RunHooks {
    pub fn new(dir: &Path, jobs: Option<usize>, keep_epochs: bool) -> CliResult<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(runtime)?;
        let log_path = dir.join("train.log");
        let log = fs::File::create(&log_path)
            .with_context(|| format!("cannot write {}", log_path.display()))
            .map_err(runtime)?;
        Ok(RunHooks {
            dir: dir.to_path_buf(),
            pool: pool(jobs)?,
            keep_epochs,
            log: Some(log),
            started: Instant::now(),
        })
    }
}

/// `epoch 3 loss 812.4411 struct 41.18 nuc 30.07 rel 22.10 overall 70.41 time 2.3s`
pub fn epoch_line(stats: &EpochStats, seconds: f64) -> String {
    let d = stats.dev.discourse;
    format!(
        "epoch {} loss {:.4} struct {:.2} nuc {:.2} rel {:.2} overall {:.2} time {:.1}s{}",
        stats.epoch,
        stats.loss,
        d.structure.prf().f1 * 100.0,
        d.nuclearity.prf().f1 * 100.0,
        d.relation.prf().f1 * 100.0,
        stats.dev.overall.prf().f1 * 100.0,
        seconds,
        if stats.is_best { " best" } else { "" }
    )
}

impl TrainHooks for RunHooks {
    fn evaluate(&mut self, model: &Model, dev: &[JointTree], mode: TrainMode) -> Result<Report, TrainError> {
        let reports: Vec<Report> = self
            .pool
            .install(|| dev.par_iter().map(|d| evaluate_one(model, d, mode)).collect::<Result<_, _>>())?;
        Ok(Report::micro(&reports))
    }

    fn on_epoch(&mut self, stats: &EpochStats, model: &Model) -> Result<(), TrainError> {
        let hook_err = |e: &dyn std::fmt::Display| TrainError::Hook(e.to_string());
        let line = epoch_line(stats, self.started.elapsed().as_secs_f64());
        eprintln!("{line}");
        if let Some(log) = &mut self.log {
            writeln!(log, "{line}").map_err(|e| hook_err(&e))?;
        }
        if self.keep_epochs {
            checkpoint::save(model, &self.dir.join(format!("epoch-{}.ckpt", stats.epoch))).map_err(|e| hook_err(&e))?;
        }
        if stats.is_best {
            checkpoint::save(model, &self.dir.join("best.ckpt")).map_err(|e| hook_err(&e))?;
        }
        Ok(())
    }
}

fn train_error(e: TrainError) -> CliError {
    match e {
        TrainError::Beta(_) | TrainError::Dropout(_) | TrainError::DevSize { .. } | TrainError::Empty => invalid(e),
        _ => runtime(e),
    }
}

fn cmd_train(a: &TrainArgs) -> CliResult {
    let config = match &a.config {
        Some(path) => RunConfig::from_json(&read_file(path)?)
            .with_context(|| format!("{}", path.display()))
            .map_err(invalid)?,
        None => RunConfig::default(),
    };
    let treebank_path = a
        .treebank
        .clone()
        .or_else(|| config.data.treebank.clone())
        .ok_or_else(|| invalid(anyhow!("no treebank given (--treebank or data.treebank)")))?;
    let mut docs = read_treebank(&treebank_path)?;
    if let Some(limit) = config.data.limit {
        docs.truncate(limit);
    }
    for (k, d) in docs.iter().enumerate() {
        d.validate()
            .with_context(|| format!("{} tree {k}", treebank_path.display()))
            .map_err(invalid)?;
    }
    config.train.validate(docs.len()).map_err(train_error)?;
    let jobs = a.jobs.or(config.eval.jobs);

    let runs: Vec<(Option<f64>, PathBuf)> = if a.beta_sweep.is_empty() {
        vec![(None, a.out.clone())]
    } else {
        a.beta_sweep.iter().map(|&b| (Some(b), a.out.join(format!("beta-{b}")))).collect()
    };
    let mut summary = Vec::new();
    for (beta, dir) in runs {
        let mut train_cfg = config.train;
        if let Some(b) = beta {
            train_cfg.beta = b;
            train_cfg.validate(docs.len()).map_err(train_error)?;
        }
        let mut hooks = RunHooks::new(&dir, jobs, config.eval.keep_epochs)?;
        let config_text = serde_json::to_string_pretty(&RunConfig {
            train: train_cfg,
            ..config.clone()
        })
        .map_err(runtime)?;
        write_file(&dir.join("config.json"), &config_text)?;
        let outcome = train(&docs, &train_cfg, config.model, &mut hooks).map_err(train_error)?;
        checkpoint::save(&outcome.best, &dir.join("best.ckpt")).map_err(runtime)?;
        let score = outcome
            .history
            .iter()
            .find(|s| s.epoch == outcome.best_epoch)
            .map_or(0.0, |s| s.dev_score * 100.0);
        summary.push((train_cfg.beta, outcome.best_epoch, score));
    }
    for (beta, epoch, score) in summary {
        println!("beta {beta} best epoch {epoch} dev {score:.2}");
    }
    Ok(())
}

fn cmd_parse(a: &ParseArgs) -> CliResult {
    let model = checkpoint::load(&a.model)
        .with_context(|| format!("{}", a.model.display()))
        .map_err(|e| match e.downcast_ref::<checkpoint::CheckpointError>() {
            Some(checkpoint::CheckpointError::Io { .. }) => runtime(e),
            _ => invalid(e),
        })?;
    let docs = read_tokens(&read_file(&a.input)?);
    let edus: Option<Vec<Vec<EduSpan>>> = match &a.gold_edus {
        Some(path) => {
            let e = read_edus(&read_file(path)?)
                .with_context(|| format!("{}", path.display()))
                .map_err(invalid)?;
            if e.len() != docs.len() {
                return Err(invalid(anyhow!("{} documents but {} EDU lines", docs.len(), e.len())));
            }
            Some(e)
        }
        None => None,
    };
    let trees: Vec<String> = pool(a.jobs)?.install(|| {
        docs.par_iter()
            .enumerate()
            .map(|(k, toks)| {
                let mode = match &edus {
                    Some(e) => DecodeMode::GoldEdus(&e[k]),
                    None => DecodeMode::EndToEnd,
                };
                model
                    .parse(toks, mode)
                    .map(|out| write_node(out.tree.root(), out.tree.tokens()))
                    .with_context(|| format!("document {}", k + 1))
                    .map_err(invalid)
            })
            .collect::<CliResult<_>>()
    })?;
    let mut stdout = std::io::stdout().lock();
    for t in trees {
        writeln!(stdout, "{t}\n").map_err(runtime)?;
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> CliResult {
    let gold = read_treebank(&a.gold)?;
    let pred = read_treebank(&a.pred)?;
    if gold.len() != pred.len() {
        return Err(invalid(anyhow!("{} gold trees but {} predicted", gold.len(), pred.len())));
    }
    let mut reports = Vec::with_capacity(gold.len());
    for (k, (g, p)) in gold.iter().zip(&pred).enumerate() {
        if a.mode == EvalMode::Goldedu && extract_edus(g) != extract_edus(p) {
            return Err(invalid(anyhow!("document {}: prediction does not use the gold EDUs", k + 1)));
        }
        let r = Report::new(g, p)
            .with_context(|| format!("document {}", k + 1))
            .map_err(invalid)?;
        reports.push(r);
    }
    let report = EvalReport::new(&reports);
    if let Some(path) = &a.json {
        write_file(path, &serde_json::to_string_pretty(&report).map_err(runtime)?)?;
    }
    print!("{}", table(&report.micro));
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    if !a.oracle && !a.gradcheck {
        return Err(invalid(anyhow!("pass --oracle, --gradcheck or both")));
    }
    let mut failed = Vec::new();
    if a.oracle {
        let r = check_oracle(a.states, a.max_tokens, a.seed);
        println!(
            "oracle: {} states ({} structural, {} label), {} failures",
            r.states,
            r.structural,
            r.label,
            r.failures.len()
        );
        for f in r.failures.iter().take(20) {
            println!("  {f}");
        }
        if !r.passed() {
            failed.push("oracle");
        }
    }
    if a.gradcheck {
        let cfg = GradCheckConfig {
            documents: a.documents,
            slices: a.slices,
            seed: a.seed,
            ..GradCheckConfig::default()
        };
        let r = check_gradients(&cfg);
        println!(
            "gradcheck: {} coordinates, {} skipped at kinks, max relative error {:.3e}, {} failures",
            r.checked,
            r.kinks,
            r.max_relative,
            r.failures.len()
        );
        for f in r.failures.iter().take(20) {
            println!("  {f}");
        }
        if !r.passed() {
            failed.push("gradcheck");
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(invalid(anyhow!("verification failed: {}", failed.join(", "))))
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
