use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use blankcrack_core::annotation_log::{read_log, write_log};
use blankcrack_core::corpus::{read_snapshot, write_snapshot, CorpusBuilder, CorpusIndex};
use blankcrack_core::cstp::{
    agreement_report, CoinFlipOracle, Continuation, CountOracle, Judge, Model, SubprocessOracle,
};
use blankcrack_core::pairgen::{manual_series_pairs, mine_pairs, parse_series, EmbeddingTable};
use blankcrack_core::stats::{breakdown, histogram, DEFAULT_BINS, DEFAULT_MIN_ANNOTATIONS};
use blankcrack_core::{Genre, IdSequence, Language, Riddle, RiddleId, WordPair};
use blankcrack_service::journal::parse_events;
use blankcrack_service::{load_corpora, Event, Game, GameState, ServiceConfig, SystemClock};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "blankcrack", version, about = "Corpus, pair and evaluation tools for the blankcrack game")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tokenize and index sentence-per-line text into a corpus snapshot.
    Ingest(IngestArgs),
    /// Rank random word pairs from an embedding table by cosine similarity.
    MinePairs(MineArgs),
    /// Expand a series file into within-series pairs valid for a corpus.
    SeriesPairs(SeriesArgs),
    /// Compare a language model with human answers on logged riddles.
    CstpEval(EvalArgs),
    /// Success-rate breakdown and per-pair histogram of an annotation log.
    Stats(StatsArgs),
    /// Write the annotation log of a journal as CSV.
    ExportLog(ExportArgs),
    /// Run the game server.
    Serve(ServeArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    lang: Language,
    /// wikipedia, books, parliamentary or subtitles.
    #[arg(long)]
    genre: Genre,
    /// UTF-8 text, one sentence per line.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Add to an existing snapshot instead of starting empty.
    #[arg(long)]
    append: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    lang: Language,
    /// Text embeddings: `<count> <dim>` header, then `word x1 .. xd` lines.
    #[arg(long)]
    embeddings: PathBuf,
    /// Random pairs to draw.
    #[arg(long, default_value_t = blankcrack_core::pairgen::DEFAULT_SAMPLE_N)]
    sample: usize,
    /// Pairs to keep.
    #[arg(long, default_value_t = blankcrack_core::pairgen::DEFAULT_TOP_K)]
    top: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON lines of pairs; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long)]
    series: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Direct,
    Bayes,
    Membership,
    Autoregressive,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContinuationArg {
    Final,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    /// Smoothed corpus counts.
    Counts,
    /// Seeded coin flip, a random baseline.
    Coin,
    /// A child process speaking the line protocol, see `--oracle-cmd`.
    External,
}

#[derive(Args)]
struct EvalArgs {
    /// Game journal; supplies the riddles, and the records unless `--log` is given.
    #[arg(long)]
    journal: PathBuf,
    /// Annotation log CSV to evaluate instead of the journal's records.
    #[arg(long)]
    log: Option<PathBuf>,
    /// `LANG=SNAPSHOT`, repeatable.
    #[arg(long = "corpus", required = true, value_parser = parse_corpus)]
    corpora: Vec<(Language, PathBuf)>,
    #[arg(long, value_enum, default_value = "counts")]
    oracle: OracleArg,
    #[arg(long, value_enum, default_value = "bayes")]
    rule: RuleArg,
    /// Restrict to one language. The count oracle needs one when several corpora are given.
    #[arg(long)]
    lang: Option<Language>,
    /// Smoothing constant of the count oracle.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, required_if_eq("oracle", "external"))]
    oracle_cmd: Option<String>,
    #[arg(long, default_value_t = 30)]
    oracle_timeout_secs: u64,
    #[arg(long, value_enum, default_value = "final")]
    continuation: ContinuationArg,
    #[arg(long)]
    tie_tolerance: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    /// Annotation log CSV.
    log: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_ANNOTATIONS)]
    min_annotations: usize,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    journal: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `listen` from the config.
    #[arg(long)]
    listen: Option<SocketAddr>,
}

fn parse_corpus(s: &str) -> Result<(Language, PathBuf), String> {
    let (lang, path) = s.split_once('=').ok_or("expected LANG=SNAPSHOT")?;
    Ok((lang.parse().map_err(|e| format!("{e}"))?, PathBuf::from(path)))
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    match Cli::parse().command {
        Cmd::Ingest(a) => ingest(a),
        Cmd::MinePairs(a) => mine(a),
        Cmd::SeriesPairs(a) => series(a),
        Cmd::CstpEval(a) => eval(a),
        Cmd::Stats(a) => stats(a),
        Cmd::ExportLog(a) => export(a),
        Cmd::Serve(a) => serve(a),
    }
}

fn now_ms() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as i64)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_snapshot(path: &Path) -> Result<CorpusIndex> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_snapshot(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn write_pairs(pairs: &[WordPair], out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    for p in pairs {
        serde_json::to_writer(&mut w, p)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let mut builder = match &a.append {
        Some(path) => {
            let index = open_snapshot(path)?;
            if index.language() != a.lang {
                bail!("{} holds a {} corpus, not {}", path.display(), index.language(), a.lang);
            }
            CorpusBuilder::from_index(index)
        }
        None => CorpusBuilder::new(a.lang),
    };
    for path in &a.files {
        let added = builder.ingest_files(&[path], a.genre)?;
        eprintln!("{}: {added} sentences", path.display());
    }
    let index = builder.build();
    let mut out = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    write_snapshot(&index, &mut out)?;
    out.flush()?;
    println!(
        "{} sentences, {} tokens, {} types -> {}",
        index.len(),
        index.total_tokens(),
        index.vocabulary().len(),
        a.out.display()
    );
    for (genre, n) in index.genre_counts() {
        println!("  {genre}: {n}");
    }
    Ok(())
}

fn mine(a: MineArgs) -> Result<()> {
    let file = File::open(&a.embeddings).with_context(|| format!("opening {}", a.embeddings.display()))?;
    let table = EmbeddingTable::read(a.lang, BufReader::new(file))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mined = mine_pairs(&table, a.sample, a.top, &mut rng, &IdSequence::default(), now_ms());
    eprintln!(
        "{} words, {} distinct pairs sampled, {} kept, shortfall {}",
        table.len(),
        mined.sampled,
        mined.pairs.len(),
        mined.shortfall
    );
    write_pairs(&mined.pairs, a.out.as_deref())
}

fn series(a: SeriesArgs) -> Result<()> {
    let index = open_snapshot(&a.snapshot)?;
    let text = std::fs::read_to_string(&a.series).with_context(|| format!("reading {}", a.series.display()))?;
    let series = parse_series(&text)?;
    let out = manual_series_pairs(&series, &index, &IdSequence::default(), now_ms());
    for (x, y, reasons) in &out.dropped {
        let reasons: Vec<String> = reasons.iter().map(ToString::to_string).collect();
        eprintln!("dropped {x}/{y}: {}", reasons.join("; "));
    }
    eprintln!("{} series, {} pairs, {} dropped", series.len(), out.pairs.len(), out.dropped.len());
    write_pairs(&out.pairs, a.out.as_deref())
}

fn read_journal(path: &Path) -> Result<Vec<Event>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_events(&text).with_context(|| format!("parsing {}", path.display()))
}

fn eval(a: EvalArgs) -> Result<()> {
    let events = read_journal(&a.journal)?;
    let riddles: HashMap<RiddleId, Riddle> = events
        .iter()
        .filter_map(|e| match e {
            Event::RiddleServed { riddle, .. } => Some((riddle.id, riddle.clone())),
            _ => None,
        })
        .collect();
    let mut records = match &a.log {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let log = read_log(BufReader::new(file))?;
            for r in &log.rejects {
                eprintln!("{} line {}: {}", path.display(), r.line, r.reason);
            }
            log.records
        }
        None => GameState::replay(&events)?.records,
    };
    let mut corpora: HashMap<Language, CorpusIndex> = HashMap::new();
    for (lang, path) in &a.corpora {
        let index = open_snapshot(path)?;
        if index.language() != *lang {
            bail!("{} holds a {} corpus, not {lang}", path.display(), index.language());
        }
        corpora.insert(*lang, index);
    }
    let lang = match (a.lang, a.oracle) {
        (Some(l), _) => Some(l),
        (None, OracleArg::Counts) if corpora.len() == 1 => corpora.keys().next().copied(),
        (None, OracleArg::Counts) => bail!("the count oracle needs --lang with several corpora"),
        (None, _) => None,
    };
    if let Some(l) = lang {
        records.retain(|r| r.language == l);
    }

    let mut judge = Judge {
        continuation: match a.continuation {
            ContinuationArg::Final => Continuation::FinalToken,
            ContinuationArg::Full => Continuation::FullContinuation,
        },
        ..Judge::default()
    };
    if let Some(t) = a.tie_tolerance {
        judge.tie_tolerance = t;
    }

    let coin;
    let counts;
    let external;
    let model = match a.oracle {
        OracleArg::Coin => {
            coin = CoinFlipOracle::new(a.seed);
            pick(a.rule, &coin)
        }
        OracleArg::External => {
            let mut command = Command::new("sh");
            command.arg("-c").arg(a.oracle_cmd.as_deref().unwrap_or_default());
            external = SubprocessOracle::spawn(command, Duration::from_secs(a.oracle_timeout_secs))?;
            pick(a.rule, &external)
        }
        OracleArg::Counts => {
            let lang = lang.expect("resolved above");
            let corpus = corpora.get(&lang).with_context(|| format!("no {lang} corpus given"))?;
            counts = CountOracle::new(corpus, a.alpha)?;
            pick(a.rule, &counts)
        }
    };
    let report = agreement_report(&judge, model, &records, &riddles, &corpora);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn pick<'a, O>(rule: RuleArg, oracle: &'a O) -> Model<'a>
where
    O: blankcrack_core::cstp::ConditionalOracle
        + blankcrack_core::cstp::ContextGenerativeOracle
        + blankcrack_core::cstp::MembershipOracle
        + blankcrack_core::cstp::AutoregressiveOracle,
{
    match rule {
        RuleArg::Direct => Model::Direct(oracle),
        RuleArg::Bayes => Model::Bayes(oracle),
        RuleArg::Membership => Model::Membership(oracle),
        RuleArg::Autoregressive => Model::Autoregressive(oracle),
    }
}

fn stats(a: StatsArgs) -> Result<()> {
    let file = File::open(&a.log).with_context(|| format!("opening {}", a.log.display()))?;
    let log = read_log(BufReader::new(file))?;
    for r in &log.rejects {
        eprintln!("line {}: {}", r.line, r.reason);
    }
    let report = breakdown(&log);
    let hist = histogram(&log.records, a.min_annotations, a.bins)?;
    if a.json {
        let body = serde_json::json!({ "breakdown": report, "histogram": hist });
        println!("{}", serde_json::to_string_pretty(&body)?);
    } else {
        println!("{report}");
        print!("{hist}");
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let events = read_journal(&a.journal)?;
    let state = GameState::replay(&events)?;
    let mut out = output(a.out.as_deref())?;
    write_log(&state.records, &mut out)?;
    out.flush()?;
    eprintln!("{} annotations", state.records.len());
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut config = ServiceConfig::load(&a.config)?;
    if let Some(addr) = a.listen {
        config.listen = addr;
    }
    let addr = config.listen;
    let corpora = load_corpora(&config)?;
    let game = Game::open(config, corpora, Arc::new(SystemClock))?;
    let added = game.seed_pairs()?;
    eprintln!("{added} pairs seeded, {} events in the journal", game.event_count());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(blankcrack_service::http::serve(Arc::new(game), addr))?;
    Ok(())
}
