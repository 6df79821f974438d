//! `alignseg` command-line front-end.
//!
//! Exit status: 0 on success, 1 when an input fails validation or an
//! operation errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::align::{average_runs, corpus_ane_from_reports, corpus_ane_weighted, corpus_reports, select_head, CorpusWeighting};
use crate::corpus::{attach_gold, AlignmentRecord, Run, RunSet, DEFAULT_SILENCE_TOKEN};
use crate::error::Error;
use crate::eval::{
    ane_sweep, boundary_prf, correlate_runs, gold_lexicon, type_ane_sweep, type_prf, RunScore, SweepBy, SweepRow,
};
use crate::io::{
    fmt_float, load_gold, load_lexicon, load_run, load_segmentation, type_label, write_ane_report, write_file,
    write_gold, write_lexicon, write_run, write_segmentation, LoadOptions,
};
use crate::lexicon::{
    build_lexicon, filter_by_ane, filter_types_by_ane, rank_types, types_from_pairs, Direction, FilterRule, Threshold,
};
use crate::segment::segment_corpus;
use crate::synth::{generate, temperature_sweep, MixSpec, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "alignseg", version, about = "Word segmentation and ANE analysis of soft-alignment matrices")]
pub struct Cli {
    /// Spelling of the silence marker in target sequences.
    #[arg(long, global = true, default_value = DEFAULT_SILENCE_TOKEN)]
    pub silence_token: String,

    /// Layout of tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check run files (and optionally a gold file) for well-formedness.
    Validate {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Average the matrices of several runs into one run file.
    Average {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Divide every averaged row by its sum.
        #[arg(long)]
        renormalize: bool,
    },
    /// Pick the head (run) with minimum corpus ANE.
    SelectHead {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Copy the selected head's run to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-sentence and corpus ANE report.
    Ane {
        #[command(flatten)]
        input: RunInput,
        #[arg(long, value_enum, default_value_t = Weighting::Sentence)]
        weighting: Weighting,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Segment target phone sequences by alignment peaks.
    Segment {
        #[command(flatten)]
        input: RunInput,
        #[arg(long)]
        out: PathBuf,
        /// Also write the discovered lexicon (TSV).
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Boundary precision, recall and F-score of a segmentation.
    EvalBoundary {
        #[arg(long)]
        seg: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Type retrieval scores of a lexicon at one ANE threshold.
    EvalTypes {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "all")]
        threshold: Threshold,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Type retrieval scores over a grid of ANE thresholds.
    SweepAne {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Comma-separated values, `start:stop:step` ranges and `all`.
        #[arg(long, default_value = "0.1:0.9:0.1,all")]
        thresholds: String,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pearson correlation between corpus ANE and boundary F across runs.
    Correlate {
        #[arg(long, num_args = 2.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List alignment pairs ranked by Alignment ANE.
    RankTypes {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::Asc)]
        order: Order,
        #[arg(long, default_value_t = 5)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with gold segmentation.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct RunInput {
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    /// Average all runs before processing.
    #[arg(long, conflicts_with = "select_head")]
    pub average: bool,
    /// Use only the run with minimum corpus ANE.
    #[arg(long)]
    pub select_head: bool,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Which ANE decides whether a type is kept.
    #[arg(long, value_enum, default_value_t = By::Alignment)]
    pub by: By,
    /// With `--by alignment`: keep a type when any, or all, of its pairs pass.
    #[arg(long, value_enum, default_value_t = PairRule::Any)]
    pub rule: PairRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weighting {
    Sentence,
    Phone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum By {
    Alignment,
    Type,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairRule {
    Any,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Asc,
    Desc,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for run and gold files.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_sentences: Option<usize>,
    #[arg(long)]
    pub source_vocab: Option<usize>,
    /// `min:max` phones per word.
    #[arg(long, value_parser = parse_range)]
    pub word_len: Option<(usize, usize)>,
    /// `min:max` words per sentence.
    #[arg(long, value_parser = parse_range)]
    pub sent_len: Option<(usize, usize)>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub silence_prob: Option<f64>,
    #[arg(long)]
    pub ambiguous: bool,
    #[arg(long, requires_all = ["mix_temperature", "mix_noise"])]
    pub mix_fraction: Option<f64>,
    #[arg(long, requires = "mix_fraction")]
    pub mix_temperature: Option<f64>,
    #[arg(long, requires = "mix_fraction")]
    pub mix_noise: Option<f64>,
    /// Temperature grid; writes one run file per temperature.
    #[arg(long)]
    pub temps: Option<String>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected min:max, got '{s}'"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("invalid integer '{x}'"));
    Ok((parse(a)?, parse(b)?))
}

fn round_grid(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// Expands `0.1:0.9:0.1,all`-style lists. `all` is only accepted when
/// `allow_all` is set.
pub fn parse_grid(text: &str, allow_all: bool) -> Result<Vec<Threshold>, String> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.eq_ignore_ascii_case("all") {
            if !allow_all {
                return Err("'all' is not allowed here".to_owned());
            }
            out.push(Threshold::All);
            continue;
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("invalid number '{x}'"));
        let parts: Vec<&str> = item.split(':').collect();
        match parts[..] {
            [v] => out.push(Threshold::Value(num(v)?)),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
                    return Err(format!("invalid range '{item}'"));
                }
                let mut k = 0u32;
                loop {
                    let v = round_grid(start + f64::from(k) * step);
                    if v > stop + 1e-9 {
                        break;
                    }
                    out.push(Threshold::Value(v));
                    k += 1;
                }
            }
            _ => return Err(format!("invalid grid item '{item}'")),
        }
    }
    Ok(out)
}

enum Failure {
    Usage(String),
    Invalid(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

type CliResult = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Invalid(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Invalid(Error::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

fn load_runs(paths: &[PathBuf], opts: &LoadOptions) -> Result<RunSet, Error> {
    let runs = paths
        .iter()
        .map(|p| Ok(Run::new(label(p), load_run(p, opts)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    RunSet::new(runs)
}

fn resolve_input(input: &RunInput, opts: &LoadOptions) -> Result<Vec<AlignmentRecord>, Failure> {
    if input.runs.len() > 1 && !input.average && !input.select_head {
        return Err(Failure::Usage(
            "several --runs need --average or --select-head".to_owned(),
        ));
    }
    let runs = load_runs(&input.runs, opts)?;
    if input.average {
        return Ok(average_runs(&runs)?);
    }
    let chosen = if input.select_head { select_head(&runs)?.0 } else { 0 };
    Ok(runs.into_runs().swap_remove(chosen).records)
}

/// Aligned text columns or TSV.
fn table(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    match format {
        Format::Tsv => {
            out.push_str(&header.join("\t"));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        Format::Text => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: Vec<&str>| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:>w$}"))
                    .collect();
                padded.join("  ").trim_end().to_owned() + "\n"
            };
            out.push_str(&line(header.to_vec()));
            for row in rows {
                out.push_str(&line(row.iter().map(String::as_str).collect()));
            }
        }
    }
    out
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

fn sweep_cells(row: &SweepRow) -> Vec<String> {
    vec![
        row.threshold.to_string(),
        row.kept.to_string(),
        format!("{:.2}", row.precision),
        format!("{:.2}", row.recall),
        format!("{:.2}", row.f_score),
    ]
}

fn rule(filter: &FilterArgs) -> FilterRule {
    match filter.rule {
        PairRule::Any => FilterRule::AnyPair,
        PairRule::All => FilterRule::AllPairs,
    }
}

fn sweep_by(filter: &FilterArgs) -> SweepBy {
    match filter.by {
        By::Alignment => SweepBy::Alignment,
        By::Type => SweepBy::Type,
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult {
    let opts = LoadOptions {
        silence_token: cli.silence_token.clone(),
    };
    let format = cli.format;
    match &cli.command {
        Command::Validate { runs, gold } => {
            let set = load_runs(runs, &opts)?;
            let gold = gold.as_deref().map(load_gold).transpose()?;
            let mut rows = Vec::new();
            for run in set.runs() {
                let ane = corpus_ane_weighted(&run.records, CorpusWeighting::Sentence)?;
                let phones: usize = run.records.iter().map(|r| r.matrix().n_rows()).sum();
                if let Some(gold) = &gold {
                    attach_gold(run.records.clone(), gold)?;
                }
                rows.push(vec![
                    run.label.clone(),
                    run.records.len().to_string(),
                    phones.to_string(),
                    fmt_float(ane),
                ]);
            }
            emit(None, stdout, &table(format, &["run", "sentences", "phones", "corpus_ane"], &rows))
        }
        Command::Average { runs, out, renormalize } => {
            let mut averaged = average_runs(&load_runs(runs, &opts)?)?;
            if *renormalize {
                averaged = averaged
                    .into_iter()
                    .map(|r| {
                        let (pair, matrix) = r.into_parts();
                        AlignmentRecord::new(pair, matrix.renormalized())
                    })
                    .collect::<Result<_, _>>()?;
            }
            Ok(write_file(out, |w| write_run(w, &averaged, &cli.silence_token))?)
        }
        Command::SelectHead { runs, out } => {
            let set = load_runs(runs, &opts)?;
            let (chosen, _) = select_head(&set)?;
            let rows = set
                .runs()
                .iter()
                .enumerate()
                .map(|(k, run)| {
                    Ok(vec![
                        k.to_string(),
                        run.label.clone(),
                        fmt_float(corpus_ane_weighted(&run.records, CorpusWeighting::Sentence)?),
                        if k == chosen { "*" } else { "" }.to_owned(),
                    ])
                })
                .collect::<Result<Vec<_>, Error>>()?;
            if let Some(out) = out {
                write_file(out, |w| write_run(w, &set.runs()[chosen].records, &cli.silence_token))?;
            }
            emit(None, stdout, &table(format, &["head", "run", "corpus_ane", "selected"], &rows))
        }
        Command::Ane { input, weighting, out } => {
            let records = resolve_input(input, &opts)?;
            let reports = corpus_reports(&records)?;
            let weighting = match weighting {
                Weighting::Sentence => CorpusWeighting::Sentence,
                Weighting::Phone => CorpusWeighting::Phone,
            };
            let corpus = corpus_ane_from_reports(&reports, weighting)?;
            let mut buf = Vec::new();
            write_ane_report(&mut buf, &reports, corpus).map_err(io_err(Path::new("<buffer>")))?;
            emit(out.as_deref(), stdout, &String::from_utf8_lossy(&buf))
        }
        Command::Segment { input, out, lexicon } => {
            let records = resolve_input(input, &opts)?;
            let segs = segment_corpus(&records)?;
            write_file(out, |w| write_segmentation(w, &segs))?;
            if let Some(path) = lexicon {
                let lex = build_lexicon(&segs);
                write_file(path, |w| write_lexicon(w, &lex.pairs))?;
            }
            Ok(())
        }
        Command::EvalBoundary { seg, gold, out } => {
            let score = boundary_prf(&load_segmentation(seg)?, &load_gold(gold)?)?;
            let row = vec![
                pct(score.prf.precision),
                pct(score.prf.recall),
                pct(score.prf.f_score),
                score.counts.hits.to_string(),
                score.counts.hyp_total.to_string(),
                score.counts.gold_total.to_string(),
            ];
            let text = table(format, &["precision", "recall", "f_score", "hits", "hyp_total", "gold_total"], &[row]);
            emit(out.as_deref(), stdout, &text)
        }
        Command::EvalTypes { pairs, gold, threshold, filter, out } => {
            let pairs = load_lexicon(pairs)?;
            let gold = gold_lexicon(&load_gold(gold)?);
            let kept = match sweep_by(filter) {
                SweepBy::Alignment => filter_by_ane(&pairs, *threshold, rule(filter))?,
                SweepBy::Type => filter_types_by_ane(&types_from_pairs(&pairs), *threshold)?,
            };
            let prf = type_prf(&kept, &gold);
            let row = vec![
                threshold.to_string(),
                kept.len().to_string(),
                pct(prf.precision),
                pct(prf.recall),
                pct(prf.f_score),
            ];
            emit(out.as_deref(), stdout, &table(format, &["ane", "types", "P", "R", "F"], &[row]))
        }
        Command::SweepAne { pairs, gold, thresholds, filter, out } => {
            let grid = parse_grid(thresholds, true).map_err(Failure::Usage)?;
            let pairs = load_lexicon(pairs)?;
            let gold = gold_lexicon(&load_gold(gold)?);
            let rows = match sweep_by(filter) {
                SweepBy::Alignment => ane_sweep(&pairs, &gold, &grid, rule(filter))?,
                SweepBy::Type => type_ane_sweep(&types_from_pairs(&pairs), &gold, &grid)?,
            };
            let cells: Vec<Vec<String>> = rows.iter().map(sweep_cells).collect();
            emit(out.as_deref(), stdout, &table(format, &["ane", "types", "P", "R", "F"], &cells))
        }
        Command::Correlate { runs, gold, out } => {
            let gold = load_gold(gold)?;
            let set = load_runs(runs, &opts)?;
            let scores = set
                .runs()
                .iter()
                .map(|run| {
                    let segs = segment_corpus(&run.records)?;
                    Ok(RunScore {
                        label: run.label.clone(),
                        corpus_ane: corpus_ane_weighted(&run.records, CorpusWeighting::Sentence)?,
                        boundary_f: boundary_prf(&segs, &gold)?.prf.f_score,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let report = correlate_runs(scores)?;
            let rows: Vec<Vec<String>> = report
                .runs
                .iter()
                .map(|r| vec![r.label.clone(), fmt_float(r.corpus_ane), pct(r.boundary_f)])
                .collect();
            let mut text = table(format, &["run", "corpus_ane", "boundary_f"], &rows);
            text.push_str(&format!("\npearson_rho{}{}\n", if format == Format::Tsv { "\t" } else { " " }, fmt_float(report.rho)));
            emit(out.as_deref(), stdout, &text)
        }
        Command::RankTypes { pairs, order, limit, out } => {
            let direction = match order {
                Order::Asc => Direction::Ascending,
                Order::Desc => Direction::Descending,
            };
            let ranked = rank_types(&load_lexicon(pairs)?, direction, *limit);
            let rows: Vec<Vec<String>> = ranked
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    vec![
                        (k + 1).to_string(),
                        type_label(&p.type_form),
                        p.translation.clone(),
                        fmt_float(p.alignment_ane),
                        p.count.to_string(),
                    ]
                })
                .collect();
            emit(
                out.as_deref(),
                stdout,
                &table(format, &["rank", "type", "translation", "alignment_ane", "count"], &rows),
            )
        }
        Command::Synth(args) => synth(args, cli),
    }
}

fn synth_config(args: &SynthArgs, silence_token: &str) -> Result<SynthConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str::<SynthConfig>(&text).map_err(|e| {
                Failure::Invalid(Error::InFile {
                    path: path.clone(),
                    source: Box::new(Error::InvalidConfig(e.to_string())),
                })
            })?
        }
        None => SynthConfig::default(),
    };
    cfg.silence_token = silence_token.to_owned();
    macro_rules! apply {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag { cfg.$field = v; })*
        };
    }
    apply!(seed => seed, n_sentences => n_sentences, source_vocab => source_vocab,
        word_len => word_len_range, sent_len => sent_len_range, temperature => temperature,
        noise => distractor_noise, silence_prob => silence_prob);
    cfg.ambiguous |= args.ambiguous;
    if let (Some(fraction), Some(temperature), Some(distractor_noise)) =
        (args.mix_fraction, args.mix_temperature, args.mix_noise)
    {
        cfg.mix = Some(MixSpec {
            fraction,
            temperature,
            distractor_noise,
        });
    }
    Ok(cfg)
}

fn synth(args: &SynthArgs, cli: &Cli) -> CliResult {
    let cfg = synth_config(args, &cli.silence_token)?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let gold_path = args.out.join("gold.jsonl");
    match &args.temps {
        None => {
            let corpus = generate(&cfg)?;
            write_file(args.out.join("run.jsonl"), |w| write_run(w, &corpus.records, &cfg.silence_token))?;
            write_file(&gold_path, |w| write_gold(w, &corpus.gold))?;
        }
        Some(grid) => {
            let temps: Vec<f64> = parse_grid(grid, false)
                .map_err(Failure::Usage)?
                .into_iter()
                .map(|t| match t {
                    Threshold::Value(v) => v,
                    Threshold::All => unreachable!("'all' rejected by parse_grid"),
                })
                .collect();
            let (runs, gold, _) = temperature_sweep(&cfg, &temps)?;
            for (k, run) in runs.runs().iter().enumerate() {
                let name = format!("run_{k:02}_{}.jsonl", run.label.replace('=', ""));
                write_file(args.out.join(name), |w| write_run(w, &run.records, &cfg.silence_token))?;
            }
            write_file(&gold_path, |w| write_gold(w, &gold))?;
        }
    }
    Ok(())
}
