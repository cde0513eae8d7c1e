//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 I/O error, 3 invalid data.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    encode_with, for_each_normalized_chunk, read_corpus, read_normalized, NormalizationOptions,
    Separators, CHUNK_SIZE,
};
use crate::embed::{export_vectors, import_vectors, train_skipgram, EmbedCorpus, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{
    analogy_suite, nearest_neighbors, read_analogy_suite, read_similarity_pairs, similarity_suite,
};
use crate::grammar::segmented::{
    escape, escape_into, read_segmented, unescape, Item, SegmentedWriter,
};
use crate::grammar::{self, Grammar};
use crate::repair::{Slot, StopCriteria, Trainer};
use crate::stats::{
    checkpoint_curves, compression_ratio, flatness, flatness_row, rank_frequency, replay_curves,
    write_curves_tsv, write_ranked_tsv, Curve, FLATNESS_HEADER,
};

#[derive(Debug, Parser)]
#[command(
    name = "rgram",
    version,
    about = "Learn, apply and analyse pair-merge segmentations of text, and train embeddings over the tokens"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a grammar from a corpus.
    Train(TrainArgs),
    /// Segment text with a learned grammar, writing a segmented corpus.
    Apply(ApplyArgs),
    /// Turn a segmented corpus back into text.
    Decode(DecodeArgs),
    /// Ranked token frequencies at merge checkpoints, as TSV.
    Stats(StatsArgs),
    /// Train skipgram vectors over a segmented corpus.
    Embed(EmbedArgs),
    /// Evaluate token vectors.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    /// Keep letter case.
    #[arg(long)]
    pub no_lowercase: bool,
    /// Replace the digits 0-9 with N.
    #[arg(long)]
    pub digits_to_n: bool,
}

impl NormArgs {
    pub fn options(&self) -> NormalizationOptions {
        NormalizationOptions {
            lowercase: !self.no_lowercase,
            digits_to_n: self.digits_to_n,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SepArgs {
    /// Boundary character; repeatable. Accepts a single character or one of
    /// `\n`, `\t`, `\r`, `newline`, `tab`, `space`. Default: newline.
    #[arg(long = "separator", value_name = "CHAR", value_parser = parse_char)]
    pub separators: Vec<char>,
    /// Treat the whole input as one sequence.
    #[arg(long, conflicts_with = "separators")]
    pub no_separators: bool,
}

impl SepArgs {
    pub fn separators(&self) -> Separators {
        if self.no_separators {
            Separators::none()
        } else if self.separators.is_empty() {
            Separators::default()
        } else {
            Separators::new(self.separators.iter().copied())
        }
    }
}

fn parse_char(s: &str) -> std::result::Result<char, String> {
    match s {
        "\\n" | "newline" => Ok('\n'),
        "\\t" | "tab" => Ok('\t'),
        "\\r" => Ok('\r'),
        "space" => Ok(' '),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(format!("expected a single character, got {s:?}")),
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StopArgs {
    /// Merge only pairs occurring at least this often.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    pub min_freq: u64,
    /// Stop once terminals plus rules reach this size.
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Stop after this many merges.
    #[arg(long)]
    pub max_merges: Option<usize>,
}

impl StopArgs {
    pub fn criteria(&self) -> StopCriteria {
        StopCriteria {
            min_frequency: self.min_freq,
            max_vocabulary: self.max_vocab,
            max_merges: self.max_merges,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// UTF-8 corpus.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Grammar file to write.
    #[arg(long, short)]
    pub grammar: PathBuf,
    /// Also write the compressed training corpus as a segmented corpus.
    #[arg(long)]
    pub segmented: Option<PathBuf>,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub norm: NormArgs,
    #[command(flatten)]
    pub sep: SepArgs,
    /// Merge counts (comma separated, ascending) at which to dump the start
    /// of the segmented stream.
    #[arg(long, value_delimiter = ',', requires = "checkpoint_dump")]
    pub checkpoints: Vec<usize>,
    /// Where checkpoint dumps go: `checkpoint<TAB>merges<TAB>tokens`.
    #[arg(long, requires = "checkpoints")]
    pub checkpoint_dump: Option<PathBuf>,
    /// Write one TSV line per merge: id, left, right, count, token text.
    #[arg(long)]
    pub merge_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    /// Grammar file written by `train`.
    #[arg(long, short)]
    pub grammar: PathBuf,
    /// UTF-8 text to segment.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Segmented corpus to write; standard output if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub norm: NormArgs,
    #[command(flatten)]
    pub sep: SepArgs,
    /// Fail if the input has characters the grammar has never seen.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Segmented corpus.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Text file to write; standard output if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Check that every token is a symbol of this grammar or a single
    /// character.
    #[arg(long, short)]
    pub grammar: Option<PathBuf>,
    /// Character written for each boundary.
    #[arg(long, default_value = "\\n", value_parser = parse_char)]
    pub separator: char,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Raw corpus; trained on unless `--grammar` is given.
    #[arg(long, required_unless_present = "segmented")]
    pub corpus: Option<PathBuf>,
    /// Replay this grammar over the corpus instead of training.
    #[arg(long, requires = "corpus")]
    pub grammar: Option<PathBuf>,
    /// Count the tokens of a segmented corpus.
    #[arg(long, conflicts_with = "corpus")]
    pub segmented: Option<PathBuf>,
    /// Merge counts (comma separated, ascending).
    #[arg(long, value_delimiter = ',', default_value = "0,100,1000,10000")]
    pub checkpoints: Vec<usize>,
    /// Ranks per checkpoint.
    #[arg(long, default_value_t = 100)]
    pub top: usize,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub norm: NormArgs,
    #[command(flatten)]
    pub sep: SepArgs,
    /// TSV output; standard output if omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Flatness summary TSV; standard error if omitted.
    #[arg(long)]
    pub flatness: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Segmented corpus.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Vector file to write.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to 0.
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Subsampling threshold; 0 disables.
    #[arg(long, default_value_t = 1e-4)]
    pub subsample: f64,
    /// Shortest character n-gram; enables subword features.
    #[arg(long, requires = "subword_max")]
    pub subword_min: Option<usize>,
    /// Longest character n-gram.
    #[arg(long, requires = "subword_min")]
    pub subword_max: Option<usize>,
    /// Hash buckets for character n-grams.
    #[arg(long, default_value_t = 1 << 21)]
    pub buckets: u32,
    /// Drop tokens rarer than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// No per-epoch progress on standard error.
    #[arg(long)]
    pub quiet: bool,
}

impl EmbedArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            initial_lr: self.lr,
            subsample_threshold: self.subsample,
            subword_ngrams: self.subword_min.zip(self.subword_max),
            buckets: self.buckets,
            min_token_count: self.min_count,
            seed: self.seed,
            verbose: !self.quiet,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Nearest neighbors of query tokens (`_` stands for a space).
    Neighbors {
        #[arg(long, short)]
        vectors: PathBuf,
        /// Query token; repeatable.
        #[arg(long, short, required = true)]
        query: Vec<String>,
        /// Neighbors per query.
        #[arg(short, default_value_t = 5)]
        k: usize,
    },
    /// Score an analogy suite.
    Analogy {
        #[arg(long, short)]
        vectors: PathBuf,
        /// Lines of `a b c gold`; `:` lines open sections.
        #[arg(long, short)]
        suite: PathBuf,
    },
    /// Spearman correlation against a word-similarity file.
    Similarity {
        #[arg(long, short)]
        vectors: PathBuf,
        /// Lines of `first<TAB>second<TAB>score`.
        #[arg(long, short)]
        pairs: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(&a),
        Command::Apply(a) => cmd_apply(&a),
        Command::Decode(a) => cmd_decode(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Embed(a) => cmd_embed(&a),
        Command::Eval(c) => cmd_eval(&c),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn out_err(path: Option<&Path>) -> impl Fn(io::Error) -> Error + '_ {
    move |e| Error::io(path.unwrap_or(Path::new("<stdout>")), e)
}

fn check_ascending(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Validation(
            "checkpoints must be in ascending order".into(),
        ));
    }
    Ok(())
}

/// Boundary marker in checkpoint dumps.
const DUMP_BOUNDARY: char = '¶';
const DUMP_CHARS: usize = 80;

/// Tokens covering the first `limit` characters of the current sequence,
/// escaped and joined by spaces.
fn dump_prefix(trainer: &Trainer, grammar: &Grammar, limit: usize) -> Result<String> {
    let mut out = String::new();
    let mut text = String::new();
    let mut covered = 0;
    for slot in trainer.slots() {
        if covered >= limit {
            break;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        match slot {
            Slot::Boundary => {
                out.push(DUMP_BOUNDARY);
                covered += 1;
            }
            Slot::Symbol(id) => {
                text.clear();
                grammar.expand_into(id, &mut text)?;
                covered += text.chars().count();
                escape_into(&text, &mut out);
            }
        }
    }
    Ok(out)
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    check_ascending(&a.checkpoints)?;
    let stop = a.stop.criteria();
    stop.validate()?;
    let encoded = read_corpus(&a.input, a.norm.options(), &a.sep.separators())?;
    let original_len = encoded.seq.len();
    let mut trainer = Trainer::new(encoded.table, &encoded.seq, stop);
    drop(encoded.seq);

    if let Some(path) = &a.checkpoint_dump {
        let mut w = create(path)?;
        for &checkpoint in &a.checkpoints {
            if !trainer.run_to(checkpoint) {
                eprintln!(
                    "warning: checkpoint {checkpoint} not reached, training stopped after {} merges",
                    trainer.merges()
                );
            }
            let line = dump_prefix(&trainer, &trainer.grammar(), DUMP_CHARS)?;
            writeln!(w, "{checkpoint}\t{}\t{line}", trainer.merges())
                .map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }

    let training = trainer.finish();
    let g = &training.grammar;
    grammar::save(g, &a.grammar)?;
    if let Some(path) = &a.segmented {
        let mut w = SegmentedWriter::new(create(path)?);
        g.write_segmented(&training.compressed, &[], &mut w)?;
        w.finish().map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &a.merge_log {
        let io = |e| Error::io(path, e);
        let mut w = create(path)?;
        writeln!(w, "id\tleft\tright\tcount\ttoken").map_err(io)?;
        for ev in &training.events {
            let text = escape(&g.expand(ev.new_id)?);
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{text}",
                ev.new_id, ev.left, ev.right, ev.count
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    let rules = g.rules().len();
    eprintln!("{rules} rules, stopped by {}", training.stop_reason);
    if original_len > 0 {
        let (seq, net) = compression_ratio(original_len, training.compressed.len(), rules)?;
        eprintln!(
            "{original_len} -> {} symbols (ratio {seq:.4}, with rules {net:.4})",
            training.compressed.len()
        );
    }
    Ok(())
}

/// Segment size for streaming application; pieces are cut at separators.
const APPLY_PIECE: usize = 1 << 20;

/// Byte offset where the last separator run of `text` starts, if that is
/// not the very beginning.
fn last_run_start(text: &str, seps: &Separators) -> Option<usize> {
    let mut start = None;
    for (i, c) in text.char_indices().rev() {
        if seps.contains(c) {
            start = Some(i);
        } else if start.is_some() {
            break;
        }
    }
    start.filter(|&i| i > 0)
}

#[derive(Default)]
struct UnknownChars {
    chars: Vec<char>,
    occurrences: usize,
}

fn segment_piece<W: Write>(
    g: &Grammar,
    text: &str,
    seps: &Separators,
    out: &mut SegmentedWriter<W>,
    unknown: &mut UnknownChars,
) -> Result<()> {
    let seg = g.apply_text(text, seps);
    for &c in &seg.unknown {
        if !unknown.chars.contains(&c) {
            unknown.chars.push(c);
        }
    }
    unknown.occurrences += seg.unknown_occurrences;
    g.write_segmented(&seg.seq, &seg.unknown, out)
}

fn cmd_apply(a: &ApplyArgs) -> Result<()> {
    let g = grammar::load(&a.grammar)?;
    let seps = a.sep.separators();
    let opts = a.norm.options();
    if a.strict {
        let mut first = None;
        let file = File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
        for_each_normalized_chunk(file, opts, CHUNK_SIZE, |s| {
            if first.is_none() {
                first = s
                    .chars()
                    .find(|&c| !seps.contains(c) && g.table().id(c).is_none());
            }
        })?;
        if let Some(c) = first {
            return Err(Error::Validation(format!(
                "character {c:?} (U+{:04X}) is not in the grammar alphabet",
                c as u32
            )));
        }
    }

    let mut writer = SegmentedWriter::new(output(a.output.as_deref())?);
    let mut unknown = UnknownChars::default();
    let mut pending = String::new();
    let mut failure = None;
    let file = File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
    for_each_normalized_chunk(file, opts, CHUNK_SIZE, |s| {
        if failure.is_some() {
            return;
        }
        pending.push_str(s);
        if pending.len() >= APPLY_PIECE {
            if let Some(cut) = last_run_start(&pending, &seps) {
                let tail = pending.split_off(cut);
                if let Err(e) = segment_piece(&g, &pending, &seps, &mut writer, &mut unknown) {
                    failure = Some(e);
                }
                pending = tail;
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    segment_piece(&g, &pending, &seps, &mut writer, &mut unknown)?;
    writer.finish().map_err(out_err(a.output.as_deref()))?;
    if unknown.occurrences > 0 {
        let listed: String = unknown.chars.iter().collect();
        eprintln!(
            "warning: {} occurrences of {} characters outside the grammar alphabet passed through: {listed:?}",
            unknown.occurrences,
            unknown.chars.len()
        );
    }
    Ok(())
}

fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let known = match &a.grammar {
        Some(path) => {
            let g = grammar::load(path)?;
            let mut set = std::collections::HashSet::new();
            for id in 0..g.symbol_count() {
                set.insert(g.expand(crate::SymbolId(id as u32))?);
            }
            Some(set)
        }
        None => None,
    };
    let reader = open(&a.input)?;
    let mut w = output(a.output.as_deref())?;
    let io = out_err(a.output.as_deref());
    for (i, item) in read_segmented(reader).enumerate() {
        match item? {
            Item::Token(t) => {
                if let Some(set) = &known {
                    if t.chars().nth(1).is_some() && !set.contains(&t) {
                        return Err(Error::Validation(format!(
                            "line {}: token {t:?} is not a symbol of the grammar",
                            i + 1
                        )));
                    }
                }
                w.write_all(t.as_bytes()).map_err(&io)?;
            }
            Item::Boundary => {
                let mut buf = [0u8; 4];
                w.write_all(a.separator.encode_utf8(&mut buf).as_bytes())
                    .map_err(&io)?;
            }
        }
    }
    w.flush().map_err(&io)
}

fn warn_unreached(curves: &[Curve]) {
    for c in curves.iter().filter(|c| !c.reached()) {
        eprintln!(
            "warning: checkpoint {} not reached, reporting the state after {} merges",
            c.checkpoint, c.merges
        );
    }
}

fn cmd_stats(a: &StatsArgs) -> Result<()> {
    check_ascending(&a.checkpoints)?;
    let stop = a.stop.criteria();
    stop.validate()?;
    let out_path = a.output.as_deref();

    let flatness_rows: Vec<String> = if let Some(path) = &a.segmented {
        let mut tokens = Vec::new();
        for item in read_segmented(open(path)?) {
            if let Item::Token(t) = item? {
                tokens.push(t);
            }
        }
        let dist = rank_frequency(tokens);
        write_ranked_tsv("-", &dist, a.top, output(out_path)?)?;
        vec![flatness_row("-", None, &flatness(&dist)?)]
    } else {
        let corpus = a
            .corpus
            .as_deref()
            .expect("clap requires corpus or segmented");
        let seps = a.sep.separators();
        let curves = match &a.grammar {
            Some(path) => {
                let g = grammar::load(path)?;
                let text = read_normalized(corpus, a.norm.options())?;
                let (seq, unknown) = encode_with(g.table(), g.symbol_count() as u32, &text, &seps);
                drop(text);
                let curves = replay_curves(&g, &seq, &a.checkpoints, a.top)?;
                write_curves_tsv(
                    &curves,
                    |id, s| g.token_into(id, &unknown, s),
                    output(out_path)?,
                )?;
                curves
            }
            None => {
                let e = read_corpus(corpus, a.norm.options(), &seps)?;
                let c = checkpoint_curves(&e.table, &e.seq, stop, &a.checkpoints, a.top)?;
                write_curves_tsv(
                    &c.curves,
                    |id, s| c.grammar.expand_into(id, s),
                    output(out_path)?,
                )?;
                c.curves
            }
        };
        warn_unreached(&curves);
        curves
            .iter()
            .map(|c| flatness_row(&c.checkpoint.to_string(), Some(c.merges), &c.flatness))
            .collect()
    };

    match &a.flatness {
        Some(path) => {
            let io = |e| Error::io(path, e);
            let mut w = create(path)?;
            writeln!(w, "{FLATNESS_HEADER}").map_err(io)?;
            for row in &flatness_rows {
                writeln!(w, "{row}").map_err(io)?;
            }
            w.flush().map_err(io)
        }
        None => {
            eprintln!("{FLATNESS_HEADER}");
            for row in &flatness_rows {
                eprintln!("{row}");
            }
            Ok(())
        }
    }
}

fn cmd_embed(a: &EmbedArgs) -> Result<()> {
    let config = a.config();
    config.validate()?;
    let corpus = EmbedCorpus::read(open(&a.input)?, config.min_token_count)?;
    if !a.quiet {
        eprintln!(
            "{} tokens, vocabulary {}",
            corpus.token_count(),
            corpus.vocab.len()
        );
    }
    let (matrix, _) = train_skipgram(&corpus, &config)?;
    export_vectors(&matrix.to_vectors(), &a.output)
}

fn cmd_eval(c: &EvalCommand) -> Result<()> {
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    let io = |e| Error::io("<stdout>", e);
    match c {
        EvalCommand::Neighbors { vectors, query, k } => {
            let v = import_vectors(vectors)?;
            writeln!(w, "query\trank\tneighbor\tcosine").map_err(io)?;
            for q in query {
                let token = unescape(q, 0)?;
                match nearest_neighbors(&v, &token, *k) {
                    Ok(list) => {
                        for (rank, (t, cos)) in list.iter().enumerate() {
                            writeln!(w, "{q}\t{}\t{}\t{cos:.6}", rank + 1, escape(t))
                                .map_err(io)?;
                        }
                    }
                    Err(Error::OutOfVocabulary(_)) => {
                        writeln!(w, "{q}\t-\t<oov>\t-").map_err(io)?;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        EvalCommand::Analogy { vectors, suite } => {
            let v = import_vectors(vectors)?;
            let suite = read_analogy_suite(open(suite)?)?;
            let r = analogy_suite(&v, &suite)?;
            writeln!(w, "section\tcorrect\tattempted\ttotal\tscore\tcoverage").map_err(io)?;
            for s in &r.sections {
                let name = if s.name.is_empty() { "-" } else { &s.name };
                writeln!(
                    w,
                    "{name}\t{}\t{}\t{}\t{:.6}\t{:.6}",
                    s.correct,
                    s.attempted,
                    s.total,
                    ratio(s.correct, s.attempted),
                    ratio(s.attempted, s.total)
                )
                .map_err(io)?;
            }
            writeln!(
                w,
                "all\t{}\t{}\t{}\t{:.6}\t{:.6}",
                r.correct, r.attempted, r.total, r.score, r.coverage
            )
            .map_err(io)?;
            for m in &r.near_misses {
                let q = &m.query;
                eprintln!(
                    "near miss: {} {} {} {} -> {}",
                    escape(&q.a),
                    escape(&q.b),
                    escape(&q.c),
                    escape(&q.gold),
                    escape(&m.predicted)
                );
            }
        }
        EvalCommand::Similarity { vectors, pairs } => {
            let v = import_vectors(vectors)?;
            let pairs = read_similarity_pairs(open(pairs)?)?;
            let r = similarity_suite(&v, &pairs)?;
            writeln!(w, "spearman\t{:.6}", r.spearman).map_err(io)?;
            writeln!(w, "coverage\t{:.6}", r.coverage).map_err(io)?;
            writeln!(w, "scored\t{}", r.scored).map_err(io)?;
            writeln!(w, "total\t{}", r.total).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
