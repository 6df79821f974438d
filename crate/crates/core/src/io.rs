//! Line-oriented file formats.
//!
//! Run, gold, segmentation and ANE report files hold one JSON object per
//! line. Blank lines and lines starting with `#` are ignored. Lexicons are
//! tab-separated with a header row. Every float is written with 6 decimals.
//!
//! ```text
//! run:          {"id":"s1","source":["il","dort"],"target":["D","AO1","R","T"],"matrix":[[...],...]}
//! gold:         {"id":"s1","words":[["D","AO1"],["R","T"]]}
//! segmentation: {"id":"s1","tokens":[{"phones":["D","AO1"],"span":[0,2],"aligned_word":"il",
//!                "aligned_word_index":0,"token_ane":0.000000},...]}
//! ane report:   {"id":"s1","sentence_ane":0.000000,"per_phone":[...]}  then  {"corpus_ane":0.000000}
//! lexicon:      type<TAB>translation<TAB>count<TAB>alignment_ane
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::align::{AlignmentMatrix, AneReport};
use crate::corpus::{AlignmentRecord, GoldMap, SentencePair, TargetSymbol, DEFAULT_SILENCE_TOKEN};
use crate::error::{Error, Result};
use crate::lexicon::{sort_pairs, AlignmentEntry};
use crate::segment::{Segmentation, Token};

pub const SEGMENTATION_HEADER: &str = "# alignseg segmentation v1";
pub const LEXICON_HEADER: &str = "type\ttranslation\tcount\talignment_ane";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub silence_token: String,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            silence_token: DEFAULT_SILENCE_TOKEN.to_owned(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    id: String,
    source: Vec<String>,
    target: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGold {
    id: String,
    words: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToken {
    phones: Vec<String>,
    span: (usize, usize),
    aligned_word: String,
    aligned_word_index: usize,
    token_ane: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegmentation {
    id: String,
    tokens: Vec<RawToken>,
}

/// Numbered content lines of a reader.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| {
            line.map(|l| (i + 1, l)).map_err(|e| Error::Malformed {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .filter(|item| match item {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

fn parse_line<T: DeserializeOwned>(line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed {
        line,
        message: e.to_string(),
    })
}

fn check_symbols<'a>(line: usize, id: &str, field: &str, tokens: impl IntoIterator<Item = &'a String>) -> Result<()> {
    for token in tokens {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidRecord {
                line,
                id: id.to_owned(),
                message: format!("{field} token {token:?} is empty or contains whitespace"),
            });
        }
    }
    Ok(())
}

fn invalid(line: usize, id: &str, err: Error) -> Error {
    Error::InvalidRecord {
        line,
        id: id.to_owned(),
        message: err.to_string(),
    }
}

fn record_from_raw(line: usize, raw: RawRun, opts: &LoadOptions) -> Result<AlignmentRecord> {
    check_symbols(line, &raw.id, "source", &raw.source)?;
    check_symbols(line, &raw.id, "target", &raw.target)?;
    let target = raw
        .target
        .iter()
        .map(|t| TargetSymbol::from_token(t, &opts.silence_token))
        .collect();
    let pair = SentencePair::new(raw.id.clone(), raw.source, target).map_err(|e| invalid(line, &raw.id, e))?;
    let matrix = AlignmentMatrix::from_rows(raw.matrix).map_err(|e| invalid(line, &raw.id, e.into()))?;
    AlignmentRecord::new(pair, matrix).map_err(|e| invalid(line, &raw.id, e))
}

/// Parses a run from any reader; records come back in file order.
pub fn read_run<R: BufRead>(reader: R, opts: &LoadOptions) -> Result<Vec<AlignmentRecord>> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for item in content_lines(reader) {
        let (line, text) = item?;
        let raw: RawRun = parse_line(line, &text)?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId { line, id: raw.id });
        }
        records.push(record_from_raw(line, raw, opts)?);
    }
    Ok(records)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn load_run(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Vec<AlignmentRecord>> {
    let path = path.as_ref();
    read_run(open(path)?, opts).map_err(|e| e.in_file(path))
}

pub fn read_gold<R: BufRead>(reader: R) -> Result<GoldMap> {
    let mut gold = GoldMap::new();
    for item in content_lines(reader) {
        let (line, text) = item?;
        let raw: RawGold = parse_line(line, &text)?;
        if raw.words.is_empty() || raw.words.iter().any(Vec::is_empty) {
            return Err(Error::InvalidRecord {
                line,
                id: raw.id,
                message: "empty word grouping".to_owned(),
            });
        }
        check_symbols(line, &raw.id, "gold", raw.words.iter().flatten())?;
        if gold.contains_key(&raw.id) {
            return Err(Error::DuplicateId { line, id: raw.id });
        }
        gold.insert(raw.id, raw.words);
    }
    Ok(gold)
}

pub fn load_gold(path: impl AsRef<Path>) -> Result<GoldMap> {
    let path = path.as_ref();
    read_gold(open(path)?).map_err(|e| e.in_file(path))
}

pub fn read_segmentation<R: BufRead>(reader: R) -> Result<Vec<Segmentation>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (line, text) = item?;
        let raw: RawSegmentation = parse_line(line, &text)?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId { line, id: raw.id });
        }
        let seg = Segmentation {
            id: raw.id,
            tokens: raw
                .tokens
                .into_iter()
                .map(|t| Token {
                    phones: t.phones,
                    start: t.span.0,
                    end: t.span.1,
                    aligned_word_index: t.aligned_word_index,
                    aligned_word: t.aligned_word,
                    token_ane: t.token_ane,
                })
                .collect(),
        };
        seg.check_tiling().map_err(|message| Error::InvalidRecord {
            line,
            id: seg.id.clone(),
            message,
        })?;
        if let Some(t) = seg.tokens.iter().find(|t| !(0.0..=1.0).contains(&t.token_ane)) {
            return Err(Error::InvalidRecord {
                line,
                id: seg.id.clone(),
                message: format!("token_ane {} outside [0,1]", t.token_ane),
            });
        }
        out.push(seg);
    }
    Ok(out)
}

pub fn load_segmentation(path: impl AsRef<Path>) -> Result<Vec<Segmentation>> {
    let path = path.as_ref();
    read_segmentation(open(path)?).map_err(|e| e.in_file(path))
}

/// Fixed 6-decimal rendering; negative zero prints as zero.
pub fn fmt_float(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

fn json_str_array<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let parts: Vec<String> = items.into_iter().map(json_str).collect();
    format!("[{}]", parts.join(","))
}

fn json_float_array(items: &[f64]) -> String {
    let parts: Vec<String> = items.iter().map(|&x| fmt_float(x)).collect();
    format!("[{}]", parts.join(","))
}

/// Writes records in the given order.
pub fn write_run<W: Write>(mut out: W, records: &[AlignmentRecord], silence_token: &str) -> std::io::Result<()> {
    for record in records {
        let pair = record.pair();
        let target = pair.target.iter().map(|s| match s {
            TargetSymbol::Phone(p) => p.as_str(),
            TargetSymbol::Silence => silence_token,
        });
        let rows: Vec<String> = record.matrix().rows().map(json_float_array).collect();
        writeln!(
            out,
            "{{\"id\":{},\"source\":{},\"target\":{},\"matrix\":[{}]}}",
            json_str(&pair.id),
            json_str_array(pair.source.iter().map(String::as_str)),
            json_str_array(target),
            rows.join(",")
        )?;
    }
    out.flush()
}

/// Writes gold entries in ascending id order.
pub fn write_gold<W: Write>(mut out: W, gold: &GoldMap) -> std::io::Result<()> {
    for (id, words) in gold {
        let words: Vec<String> = words
            .iter()
            .map(|w| json_str_array(w.iter().map(String::as_str)))
            .collect();
        writeln!(out, "{{\"id\":{},\"words\":[{}]}}", json_str(id), words.join(","))?;
    }
    out.flush()
}

/// Writes a header line, then one line per sentence in ascending id order.
pub fn write_segmentation<W: Write>(mut out: W, segmentations: &[Segmentation]) -> std::io::Result<()> {
    writeln!(out, "{SEGMENTATION_HEADER}")?;
    let mut ordered: Vec<&Segmentation> = segmentations.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    for seg in ordered {
        let mut line = format!("{{\"id\":{},\"tokens\":[", json_str(&seg.id));
        for (k, t) in seg.tokens.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let _ = write!(
                line,
                "{{\"phones\":{},\"span\":[{},{}],\"aligned_word\":{},\"aligned_word_index\":{},\"token_ane\":{}}}",
                json_str_array(t.phones.iter().map(String::as_str)),
                t.start,
                t.end,
                json_str(&t.aligned_word),
                t.aligned_word_index,
                fmt_float(t.token_ane)
            );
        }
        line.push_str("]}");
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Per-sentence ANE lines in ascending id order followed by the corpus summary.
pub fn write_ane_report<W: Write>(mut out: W, reports: &[AneReport], corpus_ane: f64) -> std::io::Result<()> {
    let mut ordered: Vec<&AneReport> = reports.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    for r in ordered {
        writeln!(
            out,
            "{{\"id\":{},\"sentence_ane\":{},\"per_phone\":{}}}",
            json_str(&r.id),
            fmt_float(r.sentence_ane),
            json_float_array(&r.per_phone)
        )?;
    }
    writeln!(out, "{{\"corpus_ane\":{}}}", fmt_float(corpus_ane))?;
    out.flush()
}

/// Space-joined phones, as used in the lexicon `type` column.
pub fn type_label(form: &[String]) -> String {
    form.join(" ")
}

/// Lexicon TSV sorted by ascending ANE, then type and translation.
pub fn write_lexicon<W: Write>(mut out: W, pairs: &[AlignmentEntry]) -> std::io::Result<()> {
    let mut sorted = pairs.to_vec();
    sort_pairs(&mut sorted);
    writeln!(out, "{LEXICON_HEADER}")?;
    for p in &sorted {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            type_label(&p.type_form),
            p.translation,
            p.count,
            fmt_float(p.alignment_ane)
        )?;
    }
    out.flush()
}

pub fn read_lexicon<R: BufRead>(reader: R) -> Result<Vec<AlignmentEntry>> {
    let mut pairs = Vec::new();
    let mut header_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line != LEXICON_HEADER {
                return Err(Error::Malformed {
                    line: line_no,
                    message: format!("expected header '{}'", LEXICON_HEADER.replace('\t', "\\t")),
                });
            }
            header_seen = true;
            continue;
        }
        let bad = |message: String| Error::Malformed { line: line_no, message };
        let cols: Vec<&str> = line.split('\t').collect();
        let [form, translation, count, ane] = cols[..] else {
            return Err(bad(format!("expected 4 tab-separated columns, found {}", cols.len())));
        };
        let type_form: Vec<String> = form.split(' ').map(str::to_owned).collect();
        if type_form.iter().any(String::is_empty) || translation.is_empty() {
            return Err(bad("empty type or translation".to_owned()));
        }
        let count: usize = count.parse().map_err(|_| bad(format!("invalid count '{count}'")))?;
        if count == 0 {
            return Err(bad("count must be at least 1".to_owned()));
        }
        let alignment_ane: f64 = ane.parse().map_err(|_| bad(format!("invalid ANE '{ane}'")))?;
        if !(0.0..=1.0).contains(&alignment_ane) {
            return Err(bad(format!("ANE {alignment_ane} outside [0,1]")));
        }
        pairs.push(AlignmentEntry {
            type_form,
            translation: translation.to_owned(),
            count,
            alignment_ane,
        });
    }
    Ok(pairs)
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<AlignmentEntry>> {
    let path = path.as_ref();
    read_lexicon(open(path)?).map_err(|e| e.in_file(path))
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(path: impl AsRef<Path>, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    body(&mut writer).map_err(|e| Error::io(path, e))
}
