//! `polyseg` command-line driver. Every subcommand is a thin wrapper over a
//! library operation; [`run_main`] is the whole program minus the process.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use polyseg::aligner::{align_corpus, train_ibm1_traced, AlignerConfig};
use polyseg::corpus::{corpus_stats, load_corpus, write_corpus, Corpus, CorpusFormat, StatsRecord};
use polyseg::eval::{
    boundary_prf, extract_lexicon, lexicon_tsv, parse_gold_lexicon, token_prf, type_prf, SCORE_HEADER,
};
use polyseg::matrix::{read_matrices_file, write_matrices_file};
use polyseg::multilingual::{combine_corpus, CombineMode};
use polyseg::pipeline::{run_pipeline, PipelineConfig};
use polyseg::segfile::{read_records, write_records};
use polyseg::segmenter::{segment_corpus, Segmentation};
use polyseg::synth::{generate_synthetic, SyntheticSpec};
use polyseg::{AlignmentMatrix, PipelineOutput, PrfScore, SegRecord};

#[derive(Parser, Debug)]
#[command(name = "polyseg", version, about = "Multilingual word discovery from soft alignments")]
struct Cli {
    /// Worker threads for parallel steps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-language corpus statistics as TSV.
    Stats {
        corpus: PathBuf,
        /// Language code; repeat for several (default: all).
        #[arg(long = "lang")]
        langs: Vec<String>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Train IBM Model 1 and write posterior matrices.
    Align {
        corpus: PathBuf,
        #[arg(long)]
        lang: String,
        #[command(flatten)]
        aligner: AlignerArgs,
        #[command(flatten)]
        format: FormatArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Segment every matrix of a matrices file.
    Segment {
        matrices: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Combine per-language segmentations by boundary voting.
    Vote {
        #[arg(required = true, num_args = 2..)]
        segs: Vec<PathBuf>,
        #[arg(long, short = 't')]
        threshold: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Pick each utterance's segmentation from its lowest-ANE language.
    Select {
        #[arg(required = true)]
        segs: Vec<PathBuf>,
        /// Tie-break order; languages not present among the inputs are ignored.
        #[arg(long, value_delimiter = ',')]
        priority: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Boundary, token and type scores against a gold corpus.
    Eval {
        hyp: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[command(flatten)]
        format: FormatArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Ranked (type, translation) lexicon from an aligned segmentation.
    Lexicon {
        segs: PathBuf,
        #[arg(long, default_value_t = 50)]
        top: usize,
        #[arg(long)]
        gold_lexicon: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a seeded synthetic corpus with gold boundaries.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        vocab: Option<usize>,
        #[arg(long)]
        sentences: Option<usize>,
        #[arg(long)]
        langs: Option<usize>,
        /// Any other generator setting, as key=value; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        settings: Vec<String>,
        /// Also write the true lexicon here.
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Full run: align, segment, vote, select, score and extract lexicons.
    #[command(group(clap::ArgGroup::new("source").required(true).args(["corpus", "synthetic"])))]
    Pipeline {
        corpus: Option<PathBuf>,
        /// Generate the corpus instead, from key=value settings.
        #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
        synthetic: Option<Vec<String>>,
        /// A language count, or a comma-separated priority list.
        #[arg(long)]
        langs: Option<String>,
        #[arg(long = "vote", default_value_t = 0.5)]
        vote_threshold: f64,
        #[arg(long, default_value_t = 50)]
        top: usize,
        #[command(flatten)]
        aligner: AlignerArgs,
        #[command(flatten)]
        format: FormatArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct AlignerArgs {
    #[arg(long, default_value_t = AlignerConfig::default().iterations)]
    iters: usize,
    #[arg(long, default_value_t = AlignerConfig::default().convergence_epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = AlignerConfig::default().prob_floor)]
    floor: f64,
    #[arg(long)]
    no_null: bool,
}

impl AlignerArgs {
    fn config(&self) -> AlignerConfig {
        AlignerConfig {
            iterations: self.iters,
            convergence_epsilon: self.epsilon,
            prob_floor: self.floor,
            use_null: !self.no_null,
            ..AlignerConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct FormatArg {
    /// Corpus format, `tsv` or `jsonl` (default: by extension).
    #[arg(long = "format")]
    format: Option<String>,
}

impl FormatArg {
    fn load(&self, path: &Path) -> Result<Corpus> {
        let format = match &self.format {
            Some(f) => f.parse()?,
            None => CorpusFormat::from_path(path),
        };
        Ok(load_corpus(path, format)?)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Reads several single-language segmentation files keyed by their label,
/// in argument order.
type Runs = BTreeMap<String, Vec<SegRecord>>;

fn read_runs(paths: &[PathBuf]) -> Result<(Runs, Vec<String>)> {
    let mut runs = BTreeMap::new();
    let mut order = Vec::new();
    for path in paths {
        let records: Vec<SegRecord> = read_records(path)?;
        let Some(first) = records.first() else {
            bail!("{} holds no segmentations", path.display());
        };
        let label = first.segmentation.language.clone();
        if records.iter().any(|r| r.segmentation.language != label) {
            bail!("{} mixes several labels", path.display());
        }
        if runs.insert(label.clone(), records).is_some() {
            bail!("label `{label}` given twice");
        }
        order.push(label);
    }
    Ok((runs, order))
}

fn segmentations(records: &[SegRecord]) -> Vec<Segmentation> {
    records.iter().map(|r| r.segmentation.clone()).collect()
}

fn score_report(rows: &[(&str, PrfScore)]) -> String {
    let mut out = format!("{SCORE_HEADER}\n");
    for (metric, s) in rows {
        out.push_str(&s.tsv_row(metric));
        out.push('\n');
    }
    out
}

fn pipeline_corpus(
    corpus: Option<&Path>,
    synthetic: Option<&[String]>,
    langs: Option<&str>,
    format: &FormatArg,
) -> Result<(Corpus, Vec<String>, Option<String>)> {
    let count = langs.and_then(|l| l.parse::<usize>().ok());
    let list: Vec<String> = match (langs, count) {
        (Some(l), None) => l.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        _ => Vec::new(),
    };
    if let Some(settings) = synthetic {
        let mut spec = SyntheticSpec::parse(&settings.join(" "))?;
        if let Some(k) = count {
            spec.langs = k;
        }
        let syn = generate_synthetic(&spec)?;
        let lexicon = syn.lexicon_tsv();
        return Ok((syn.corpus, list, Some(lexicon)));
    }
    let path = corpus.expect("clap requires a corpus or --synthetic");
    let corpus = format.load(path)?;
    let languages = match count {
        Some(k) if k == 0 || k > corpus.languages.len() => {
            bail!("corpus has {} languages, {k} requested", corpus.languages.len())
        }
        Some(k) => corpus.languages[..k].to_vec(),
        None => list,
    };
    Ok((corpus, languages, None))
}

fn write_pipeline(out: &PipelineOutput, corpus: &Corpus, lexicon: Option<&str>, dir: &Path) -> Result<()> {
    out.write_to(dir)?;
    let mut buf = Vec::new();
    write_corpus(corpus, CorpusFormat::Tsv, &mut buf)?;
    fs::write(dir.join("corpus.tsv"), buf)?;
    if let Some(lex) = lexicon {
        write_text(&dir.join("gold_lexicon.tsv"), lex)?;
    }
    Ok(())
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Stats { corpus, langs, format } => {
            let corpus = format.load(&corpus)?;
            let langs = if langs.is_empty() { corpus.languages.clone() } else { langs };
            writeln!(out, "{}", StatsRecord::TSV_HEADER)?;
            for lang in &langs {
                writeln!(out, "{}", corpus_stats(&corpus, lang)?.to_tsv_row())?;
            }
        }
        Command::Align { corpus, lang, aligner, format, output } => {
            let corpus = format.load(&corpus)?;
            let cfg = aligner.config();
            let training = train_ibm1_traced::<f64>(&corpus, &lang, &cfg)?;
            let matrices = align_corpus(&training.table, &corpus, &lang, &cfg)?;
            write_matrices_file(&matrices, &output)?;
            eprintln!(
                "{lang}: {} EM rounds, log-likelihood {:.6}{}",
                training.rounds(),
                training.log_likelihoods.last().copied().unwrap_or_default(),
                if training.converged { "" } else { " (not converged)" }
            );
        }
        Command::Segment { matrices, output } => {
            let matrices: Vec<AlignmentMatrix> = read_matrices_file(&matrices)?;
            let records: Vec<SegRecord> = segment_corpus(&matrices)?.into_iter().map(SegRecord::from).collect();
            write_records(&records, &output)?;
        }
        Command::Vote { segs, threshold, output } => {
            let (runs, order) = read_runs(&segs)?;
            let voted = combine_corpus(&runs, CombineMode::Vote(threshold), &order)?;
            write_records(&voted, &output)?;
        }
        Command::Select { segs, priority, output } => {
            let (runs, order) = read_runs(&segs)?;
            let priority: Vec<String> = if priority.is_empty() {
                order
            } else {
                if let Some(extra) = order.iter().find(|l| !priority.contains(l)) {
                    bail!("language `{extra}` is missing from --priority");
                }
                priority.into_iter().filter(|l| runs.contains_key(l)).collect()
            };
            let selected = combine_corpus(&runs, CombineMode::Select, &priority)?;
            write_records(&selected, &output)?;
        }
        Command::Eval { hyp, gold, format, output } => {
            let gold = format.load(&gold)?;
            let hyp: Vec<SegRecord> = read_records(&hyp)?;
            let hyp = segmentations(&hyp);
            let report = score_report(&[
                ("boundary", boundary_prf(&hyp, &gold)?),
                ("token", token_prf(&hyp, &gold)?),
                ("type", type_prf(&hyp, &gold)?),
            ]);
            emit(output.as_deref(), &report, out)?;
        }
        Command::Lexicon { segs, top, gold_lexicon, output } => {
            let records: Vec<SegRecord> = read_records(&segs)?;
            let lexicon = extract_lexicon(records.iter().map(|r| (&r.segmentation, r.ane.unwrap_or(1.0))))?;
            let gold: Option<BTreeSet<Vec<String>>> = match gold_lexicon {
                Some(p) => Some(parse_gold_lexicon(
                    &fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?,
                )),
                None => None,
            };
            let top: Vec<_> = lexicon.into_iter().take(top).collect();
            emit(output.as_deref(), &lexicon_tsv(&top, gold.as_ref()), out)?;
        }
        Command::Synth { seed, vocab, sentences, langs, settings, lexicon_out, output } => {
            let mut spec = SyntheticSpec::parse(&settings.join(" "))?;
            spec.seed = seed.unwrap_or(spec.seed);
            spec.vocab = vocab.unwrap_or(spec.vocab);
            spec.sentences = sentences.unwrap_or(spec.sentences);
            spec.langs = langs.unwrap_or(spec.langs);
            let syn = generate_synthetic(&spec)?;
            let mut buf = Vec::new();
            write_corpus(&syn.corpus, CorpusFormat::from_path(&output), &mut buf)?;
            fs::write(&output, buf).with_context(|| format!("cannot write {}", output.display()))?;
            if let Some(p) = lexicon_out {
                write_text(&p, &syn.lexicon_tsv())?;
            }
        }
        Command::Pipeline { corpus, synthetic, langs, vote_threshold, top, aligner, format, output } => {
            let (corpus, languages, lexicon) =
                pipeline_corpus(corpus.as_deref(), synthetic.as_deref(), langs.as_deref(), &format)?;
            let cfg = PipelineConfig {
                languages,
                aligner: aligner.config(),
                vote_threshold,
                lexicon_top: top,
            };
            let result: PipelineOutput = run_pipeline(&corpus, &cfg)?;
            if let Some(dir) = output {
                write_pipeline(&result, &corpus, lexicon.as_deref(), &dir)?;
            }
            out.write_all(result.score_report().as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// exit code: 0 on success, 1 for data errors, 2 for usage errors.
pub fn run_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return e.exit_code() as u8;
        }
    };
    let result = match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot set up the worker pool")
            .and_then(|pool| {
                let mut buf = Vec::new();
                let r = pool.install(|| run(cli.command, &mut buf));
                out.write_all(&buf)?;
                r
            }),
        None => run(cli.command, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}
