//! The `tweetmood` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Debug;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::aggregation::{
    write_countries, write_distinctive, write_series, write_words, AggregateError,
};
use crate::annotation::{
    amalgamate_all, build_agreement_report, build_dissident_report, group_by_tweet, read_ballots,
    read_gold, write_ballots, write_gold, Ballot, VoteError,
};
use crate::classify::{ClassifyError, ModelBundle, Task};
use crate::config::{Config, ConfigError, ResourceError, Resources};
use crate::evaluation::{format_reports, EvalError};
use crate::ingest::{
    ingest_lines_sharded, ingest_stream, read_corpus, write_corpus, Corpus, CorpusReadError,
    RawTweet,
};
use crate::labels::{Language, Typeface};
use crate::pipeline::{
    aggregate, classify_corpus, evaluate_stage, evaluate_typeface, join_classified,
    read_classifications, stage_data, train_stage, write_classifications, PipelineError,
    MODEL_LANGUAGES,
};
use crate::synth::{archive_lines, generate, noisy_gold, simulate_ballots, true_gold, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_MISSING: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tweetmood",
    version,
    about = "Opinion mining over hashtag-filtered tweet archives"
)]
pub struct Cli {
    /// Flat JSON config file; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a raw JSONL archive by hashtag, dedup and split by language.
    Ingest(IngestArgs),
    /// Label tweets interactively, appending to a ballot CSV.
    Label(LabelArgs),
    /// Amalgamate ballots into gold labels.
    Vote(VoteArgs),
    /// Train cascade stages and store them in a model bundle.
    Train(TrainArgs),
    /// Run the cascade over a corpus.
    Classify(ClassifyArgs),
    /// Score the bundle on the held-out part of the gold labels.
    Evaluate(EvaluateArgs),
    /// Hourly series, country scores and word lists from classified tweets.
    Aggregate(AggregateArgs),
    /// Annotator agreement and dissident tables from ballots.
    Report(ReportArgs),
    /// Write a synthetic archive, ballots and ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw archive, one JSON object per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Output corpus (JSONL).
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Corpus written by `ingest`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Ballot CSV; created if absent, appended to otherwise.
    #[arg(long)]
    pub out: PathBuf,
    /// Labeler id, 1 to 4.
    #[arg(long)]
    pub labeler: u8,
    /// Label a seeded random sample of this many tweets instead of all.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Sampling seed; the config seed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    /// Ballot CSV.
    #[arg(long)]
    pub ballots: PathBuf,
    /// Tie-break seed; the config seed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gold CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Gold CSV written by `vote`.
    #[arg(long)]
    pub gold: PathBuf,
    /// Bundle to write. Stages already in it are kept unless retrained.
    #[arg(long)]
    pub bundle: PathBuf,
    /// relevance, subjectivity or polarity; all three when omitted.
    #[arg(long)]
    pub task: Option<Task>,
    /// en or zh; both when omitted.
    #[arg(long)]
    pub lang: Option<Language>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Classification CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// Also write the reports as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Classification CSV written by `classify`.
    #[arg(long)]
    pub classified: PathBuf,
    /// Directory for the series, country and word CSVs.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub ballots: PathBuf,
    /// Tie-break seed; the config seed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dissident tables for these labelers; every labeler when omitted.
    #[arg(long)]
    pub labeler: Vec<u8>,
    /// Also write the tables as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 2019)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub english: usize,
    #[arg(long, default_value_t = 1000)]
    pub chinese: usize,
    #[arg(long, default_value_t = 0)]
    pub other: usize,
    /// Labelers per tweet in the simulated ballots.
    #[arg(long, default_value_t = 4)]
    pub panel: u8,
    /// Chance that a simulated labeler gets a decision wrong.
    #[arg(long, default_value_t = 0.1)]
    pub error_rate: f64,
    /// Label noise in `noisy_gold.csv`.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
}

/// A failure reduced to what the user sees: kind, one-line message, exit
/// status.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    fn new(kind: impl Into<String>, message: impl Into<String>, exit: i32) -> Self {
        Self {
            kind: kind.into(),
            message: message.into(),
            exit,
        }
    }

    pub fn line(&self) -> String {
        let msg = self.message.replace('\n', " ");
        format!("error: {}: {}", self.kind, msg)
    }
}

fn variant<T: Debug>(e: &T) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or_default()
        .to_string()
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    let exit = if e.kind() == io::ErrorKind::NotFound {
        EXIT_MISSING
    } else {
        EXIT_DATA
    };
    CliError::new("Io", format!("{}: {e}", path.display()), exit)
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(variant(&e), e.to_string(), EXIT_DATA)
            }
        }
    )*};
}

data_error!(
    VoteError,
    EvalError,
    AggregateError,
    CorpusReadError,
    csv::Error,
    serde_json::Error
);

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        let exit = match &e {
            ClassifyError::MissingModel { .. } => EXIT_MISSING,
            ClassifyError::Io(io) if io.kind() == io::ErrorKind::NotFound => EXIT_MISSING,
            _ => EXIT_DATA,
        };
        CliError::new(variant(&e), e.to_string(), exit)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Classify(c) => c.into(),
            PipelineError::Eval(x) => x.into(),
            PipelineError::Aggregate(x) => x.into(),
            PipelineError::Csv(x) => x.into(),
            other => CliError::new(variant(&other), other.to_string(), EXIT_DATA),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let exit = match e {
            ConfigError::Missing(_) => EXIT_MISSING,
            _ => EXIT_DATA,
        };
        CliError::new(variant(&e), e.to_string(), exit)
    }
}

impl From<ResourceError> for CliError {
    fn from(e: ResourceError) -> Self {
        CliError::new("ResourceError", e.to_string(), EXIT_DATA)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_error(path, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> CliResult {
    w.flush().map_err(|e| io_error(path, e))
}

fn load_corpus(path: &Path) -> CliResult<Corpus> {
    Ok(read_corpus(open(path)?)?)
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Shared state of one invocation.
struct Context {
    config: Config,
}

impl Context {
    fn resources(&self) -> CliResult<Resources> {
        Ok(Resources::load(&self.config)?)
    }

    /// Writes `<output>.meta.json` next to an output file.
    fn sidecar(
        &self,
        command: &str,
        output: &Path,
        inputs: &[&Path],
        extra: serde_json::Value,
    ) -> CliResult {
        let mut ins = Vec::new();
        for p in inputs {
            ins.push(json!({
                "file": p.file_name().map(|n| n.to_string_lossy().into_owned()),
                "sha256": sha256_file(p)?,
            }));
        }
        let meta = json!({
            "tool": format!("tweetmood {}", env!("CARGO_PKG_VERSION")),
            "command": command,
            "config_sha256": self.config.fingerprint(),
            "seed": self.config.seed,
            "inputs": ins,
            "output_sha256": sha256_file(output)?,
            "details": extra,
        });
        let mut name = output.as_os_str().to_owned();
        name.push(".meta.json");
        let path = PathBuf::from(name);
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_error(&path, e))
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// exit status; errors go to `err` as one line.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli, input, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit
        }
    }
}

pub fn execute(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ctx = Context { config };
    match cli.command {
        Command::Ingest(a) => ingest(&ctx, &a, out),
        Command::Label(a) => label(&ctx, &a, input, out),
        Command::Vote(a) => vote(&ctx, &a, out),
        Command::Train(a) => train(&ctx, &a, out),
        Command::Classify(a) => classify(&ctx, &a, out),
        Command::Evaluate(a) => evaluate(&ctx, &a, out),
        Command::Aggregate(a) => aggregate_cmd(&ctx, &a, out),
        Command::Report(a) => report(&ctx, &a, out),
        Command::Synth(a) => synth(&ctx, &a, out),
    }
}

fn say(out: &mut dyn Write, text: impl std::fmt::Display) -> CliResult {
    writeln!(out, "{text}").map_err(|e| CliError::new("Io", e.to_string(), EXIT_DATA))
}

fn ingest(ctx: &Context, a: &IngestArgs, out: &mut dyn Write) -> CliResult {
    let res = ctx.resources()?;
    let th = &ctx.config.language;
    let (corpus, stats) = if a.threads > 1 {
        let lines = open(&a.input)?
            .lines()
            .collect::<io::Result<Vec<String>>>()
            .map_err(|e| io_error(&a.input, e))?;
        ingest_lines_sharded(&lines, &res.hashtags, th, a.threads)
    } else {
        ingest_stream(open(&a.input)?, &res.hashtags, th).map_err(|e| io_error(&a.input, e))?
    };
    let mut w = create(&a.out)?;
    write_corpus(&mut w, &corpus).map_err(|e| io_error(&a.out, e))?;
    finish(&a.out, w)?;
    ctx.sidecar("ingest", &a.out, &[&a.input], serde_json::to_value(&stats)?)?;
    say(out, stats)
}

/// Appends one ballot to a CSV that already has its header.
fn ballot_line(b: &Ballot) -> String {
    format!(
        "{},{},{},{},{}\n",
        b.tweet_id,
        b.labeler_id,
        b.relevant,
        b.score.map(|s| s.to_string()).unwrap_or_default(),
        b.typeface.map(|t| t.code().to_string()).unwrap_or_default()
    )
}

enum Answer<T> {
    Value(T),
    Skip,
    Quit,
}

fn ask<T>(
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    prompt: &str,
    parse: impl Fn(&str) -> Option<T>,
) -> io::Result<Answer<T>> {
    loop {
        write!(out, "{prompt} ")?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Ok(Answer::Quit);
        }
        match line.trim() {
            "q" | "quit" => return Ok(Answer::Quit),
            "skip" | "-" => return Ok(Answer::Skip),
            s => match parse(s) {
                Some(v) => return Ok(Answer::Value(v)),
                None => writeln!(out, "  not understood: `{s}`")?,
            },
        }
    }
}

/// Prompts for each tweet in turn and returns the ballots given, stopping
/// at `q` or end of input. `skip` leaves a tweet for a later session.
pub fn label_loop(
    tweets: &[&RawTweet],
    labeler: u8,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    mut record: impl FnMut(&Ballot) -> io::Result<()>,
) -> io::Result<Vec<Ballot>> {
    let mut done = Vec::new();
    'tweets: for (i, t) in tweets.iter().enumerate() {
        writeln!(
            out,
            "\n[{}/{}] tweet {} ({})",
            i + 1,
            tweets.len(),
            t.id,
            t.language.code()
        )?;
        writeln!(out, "{}", t.text)?;
        let relevant = match ask(input, out, "relevant? [y/n, skip, q]", |s| match s {
            "y" | "yes" => Some(true),
            "n" | "no" => Some(false),
            _ => None,
        })? {
            Answer::Value(v) => v,
            Answer::Skip => continue,
            Answer::Quit => break,
        };
        let mut score = None;
        if relevant {
            match ask(input, out, "score -2..2?", |s| {
                s.trim_start_matches('+')
                    .parse::<i8>()
                    .ok()
                    .filter(|x| (-2..=2).contains(x))
            })? {
                Answer::Value(v) => score = Some(v),
                Answer::Skip => continue 'tweets,
                Answer::Quit => break,
            }
        }
        let mut typeface = None;
        if t.language == Language::Chinese {
            match ask(input, out, "typeface [s/t]?", |s| {
                s.parse::<Typeface>().ok()
            })? {
                Answer::Value(v) => typeface = Some(v),
                Answer::Skip => continue 'tweets,
                Answer::Quit => break,
            }
        }
        let b = Ballot::new(t.id, labeler, relevant, score, typeface)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        record(&b)?;
        done.push(b);
    }
    Ok(done)
}

fn label(ctx: &Context, a: &LabelArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    if !(1..=4).contains(&a.labeler) {
        return Err(CliError::new(
            "Usage",
            "--labeler must be between 1 and 4",
            EXIT_USAGE,
        ));
    }
    let corpus = load_corpus(&a.corpus)?;
    let existing = if a.out.exists() {
        read_ballots(open(&a.out)?)?
    } else {
        Vec::new()
    };
    let seen: BTreeSet<u64> = existing
        .iter()
        .filter(|b| b.labeler_id == a.labeler)
        .map(|b| b.tweet_id)
        .collect();
    let mut pool: Vec<&RawTweet> = corpus.tweets.iter().collect();
    if let Some(n) = a.sample {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(ctx.config.seed));
        pool.shuffle(&mut rng);
        pool.truncate(n);
    }
    pool.retain(|t| !seen.contains(&t.id));
    say(
        out,
        format!(
            "{} tweets to label, {} already done",
            pool.len(),
            seen.len()
        ),
    )?;

    let needs_header = fs::metadata(&a.out).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&a.out)
        .map_err(|e| io_error(&a.out, e))?;
    if needs_header {
        file.write_all(b"tweet_id,labeler_id,relevant,score,typeface\n")
            .map_err(|e| io_error(&a.out, e))?;
    }
    let done = label_loop(&pool, a.labeler, input, out, |b| {
        file.write_all(ballot_line(b).as_bytes())?;
        file.flush()
    })
    .map_err(|e| io_error(&a.out, e))?;
    say(
        out,
        format!("\nrecorded {} ballots in {}", done.len(), a.out.display()),
    )
}

fn vote(ctx: &Context, a: &VoteArgs, out: &mut dyn Write) -> CliResult {
    let seed = a.seed.unwrap_or(ctx.config.seed);
    let ballots = read_ballots(open(&a.ballots)?)?;
    let gold = amalgamate_all(&ballots, seed)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            write_gold(&mut w, &gold)?;
            finish(path, w)?;
            let ties = gold.iter().filter(|g| g.tie_broken).count();
            ctx.sidecar(
                "vote",
                path,
                &[&a.ballots],
                json!({"vote_seed": seed, "tweets": gold.len(), "tie_broken": ties}),
            )?;
            say(
                out,
                format!(
                    "{} gold labels ({} tie-broken) written to {}",
                    gold.len(),
                    ties,
                    path.display()
                ),
            )
        }
        None => {
            write_gold(&mut *out, &gold)?;
            Ok(())
        }
    }
}

fn read_gold_file(path: &Path) -> CliResult<Vec<crate::annotation::GoldLabel>> {
    Ok(read_gold(open(path)?)?)
}

fn train(ctx: &Context, a: &TrainArgs, out: &mut dyn Write) -> CliResult {
    let res = ctx.resources()?;
    let corpus = load_corpus(&a.corpus)?;
    let gold = read_gold_file(&a.gold)?;
    let mut bundle = if a.bundle.exists() {
        ModelBundle::load(&a.bundle)?
    } else {
        ModelBundle::new()
    };
    let langs: Vec<Language> = match a.lang {
        Some(l) if MODEL_LANGUAGES.contains(&l) => vec![l],
        Some(l) => return Err(ClassifyError::UnsupportedLanguage(l).into()),
        None => MODEL_LANGUAGES.to_vec(),
    };
    let tasks: Vec<Task> = a.task.map_or_else(|| Task::ALL.to_vec(), |t| vec![t]);
    let mut trained = Vec::new();
    for &lang in &langs {
        for &task in &tasks {
            let data = stage_data(&corpus, &gold, lang, task);
            let clf = train_stage(&data, &res, &ctx.config)?;
            say(
                out,
                format!(
                    "{} {}: {} labeled, {} nonzero weights",
                    lang.code(),
                    task,
                    data.docs.len(),
                    clf.model.weights.len()
                ),
            )?;
            trained.push(format!("{}/{}", lang.code(), task));
            bundle.insert(lang, task, clf);
        }
    }
    if let Some(dir) = a.bundle.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    bundle.save(&a.bundle)?;
    ctx.sidecar(
        "train",
        &a.bundle,
        &[&a.corpus, &a.gold],
        json!({"stages": trained}),
    )
}

fn load_bundle(path: &Path) -> CliResult<ModelBundle> {
    if !path.exists() {
        return Err(CliError::new(
            "MissingModel",
            format!("no model bundle at {}; run `train` first", path.display()),
            EXIT_MISSING,
        ));
    }
    Ok(ModelBundle::load(path)?)
}

fn classify(ctx: &Context, a: &ClassifyArgs, out: &mut dyn Write) -> CliResult {
    let bundle = load_bundle(&a.bundle)?;
    let res = ctx.resources()?;
    let corpus = load_corpus(&a.corpus)?;
    let (rows, skipped) = classify_corpus(&corpus, &bundle, &res.typeface)?;
    let mut w = create(&a.out)?;
    write_classifications(&mut w, &rows)?;
    finish(&a.out, w)?;
    ctx.sidecar(
        "classify",
        &a.out,
        &[&a.bundle, &a.corpus],
        json!({"classified": rows.len(), "skipped_other_language": skipped}),
    )?;
    say(
        out,
        format!(
            "{} tweets classified, {} other-language skipped",
            rows.len(),
            skipped
        ),
    )
}

fn evaluate(ctx: &Context, a: &EvaluateArgs, out: &mut dyn Write) -> CliResult {
    let bundle = load_bundle(&a.bundle)?;
    let res = ctx.resources()?;
    let corpus = load_corpus(&a.corpus)?;
    let gold = read_gold_file(&a.gold)?;
    let mut reports = Vec::new();
    for (lang, task, clf) in bundle.stages() {
        let data = stage_data(&corpus, &gold, lang, task);
        reports.push(evaluate_stage(&data, clf, &ctx.config)?);
    }
    if gold.iter().any(|g| g.typeface.is_some()) {
        reports.push(evaluate_typeface(
            &corpus,
            &gold,
            &res.typeface,
            &ctx.config,
        )?);
    }
    write!(out, "{}", format_reports(&reports))
        .map_err(|e| CliError::new("Io", e.to_string(), EXIT_DATA))?;
    if let Some(path) = &a.json {
        let mut text = serde_json::to_string_pretty(&reports)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| io_error(path, e))?;
        ctx.sidecar(
            "evaluate",
            path,
            &[&a.bundle, &a.corpus, &a.gold],
            json!({}),
        )?;
    }
    Ok(())
}

fn aggregate_cmd(ctx: &Context, a: &AggregateArgs, out: &mut dyn Write) -> CliResult {
    let res = ctx.resources()?;
    let corpus = load_corpus(&a.corpus)?;
    let rows = read_classifications(open(&a.classified)?)?;
    let tweets = join_classified(&corpus, &rows);
    let agg = aggregate(&tweets, &res, &ctx.config)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| io_error(&a.out_dir, e))?;
    let inputs: [&Path; 2] = [&a.corpus, &a.classified];
    let mut written = Vec::new();

    for (key, series) in &agg.series {
        let path = a.out_dir.join(format!("series_{key}.csv"));
        let mut w = create(&path)?;
        write_series(&mut w, series)?;
        finish(&path, w)?;
        written.push(path);
    }
    let path = a.out_dir.join("countries.csv");
    let mut w = create(&path)?;
    write_countries(&mut w, &agg.countries)?;
    finish(&path, w)?;
    written.push(path);

    let words: Vec<(&str, &crate::aggregation::WordFreqReport)> =
        agg.words.iter().map(|(l, r)| (l.code(), r)).collect();
    let path = a.out_dir.join("words.csv");
    let mut w = create(&path)?;
    write_words(&mut w, &words, ctx.config.top_k)?;
    finish(&path, w)?;
    written.push(path);
    let path = a.out_dir.join("distinctive.csv");
    let mut w = create(&path)?;
    write_distinctive(&mut w, &words, ctx.config.top_k)?;
    finish(&path, w)?;
    written.push(path);

    for p in &written {
        ctx.sidecar(
            "aggregate",
            p,
            &inputs,
            json!({"utc_offset_minutes": ctx.config.utc_offset_minutes, "top_k": ctx.config.top_k}),
        )?;
    }
    let c = &agg.countries;
    say(
        out,
        format!(
            "{} tweets aggregated; {} countries, {} positive and {} negative unlocated, {} neutral/irrelevant excluded",
            tweets.len(),
            c.countries.len(),
            c.unknown_positive,
            c.unknown_negative,
            c.excluded
        ),
    )
}

fn report(ctx: &Context, a: &ReportArgs, out: &mut dyn Write) -> CliResult {
    let seed = a.seed.unwrap_or(ctx.config.seed);
    let ballots = read_ballots(open(&a.ballots)?)?;
    let groups = group_by_tweet(&ballots);
    let agreement = build_agreement_report(&groups, seed)?;
    say(out, format!("Agreement over {} tweets", agreement.tweets))?;
    say(out, &agreement)?;
    let labelers: Vec<u8> = if a.labeler.is_empty() {
        ballots
            .iter()
            .map(|b| b.labeler_id)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    } else {
        a.labeler.clone()
    };
    let mut dissident = Vec::new();
    for l in labelers {
        match build_dissident_report(l, &groups, seed) {
            Ok(r) => {
                say(out, &r)?;
                dissident.push(r);
            }
            Err(VoteError::NoContestedVotes(_)) => {
                say(out, format!("Labeler {l}: no contested votes\n"))?
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = &a.json {
        let doc = json!({"seed": seed, "agreement": agreement, "dissident": dissident});
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| io_error(path, e))?;
        ctx.sidecar("report", path, &[&a.ballots], json!({}))?;
    }
    Ok(())
}

fn synth(ctx: &Context, a: &SynthArgs, out: &mut dyn Write) -> CliResult {
    let res = ctx.resources()?;
    let cfg = SynthConfig {
        seed: a.seed,
        english: a.english,
        chinese: a.chinese,
        other: a.other,
        ..SynthConfig::default()
    };
    let tweets = generate(&cfg, &res.typeface);
    fs::create_dir_all(&a.out_dir).map_err(|e| io_error(&a.out_dir, e))?;
    let details = json!({
        "synth_seed": a.seed, "english": a.english, "chinese": a.chinese, "other": a.other,
        "panel": a.panel, "error_rate": a.error_rate, "noise": a.noise,
    });

    let path = a.out_dir.join("archive.jsonl");
    let mut w = create(&path)?;
    for line in archive_lines(&tweets, a.seed) {
        writeln!(w, "{line}").map_err(|e| io_error(&path, e))?;
    }
    finish(&path, w)?;
    ctx.sidecar("synth", &path, &[], details.clone())?;

    let path = a.out_dir.join("ballots.csv");
    let mut w = create(&path)?;
    write_ballots(
        &mut w,
        &simulate_ballots(&tweets, a.panel, a.error_rate, a.seed),
    )?;
    finish(&path, w)?;
    ctx.sidecar("synth", &path, &[], details.clone())?;

    for (name, gold) in [
        ("truth.csv", true_gold(&tweets)),
        ("noisy_gold.csv", noisy_gold(&tweets, a.noise, a.seed)),
    ] {
        let path = a.out_dir.join(name);
        let mut w = create(&path)?;
        write_gold(&mut w, &gold)?;
        finish(&path, w)?;
        ctx.sidecar("synth", &path, &[], details.clone())?;
    }
    say(
        out,
        format!(
            "{} synthetic tweets written to {}",
            tweets.len(),
            a.out_dir.display()
        ),
    )
}
