//! Sentence pairs, alignment records and run sets.
//!
//! A target sequence keeps its silence markers so the segmenter can use them
//! as forced boundaries, but silences never own a matrix row: row `i` of an
//! [`AlignmentMatrix`] belongs to the `i`-th non-silence phone.

use std::collections::{BTreeMap, HashMap};

use crate::align::AlignmentMatrix;
use crate::error::{Error, Result};

/// Default spelling of the silence marker in target sequences.
pub const DEFAULT_SILENCE_TOKEN: &str = "<sil>";

/// Gold segmentations keyed by sentence id: each word is a run of phones.
pub type GoldMap = BTreeMap<String, Vec<Vec<String>>>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetSymbol {
    Phone(String),
    Silence,
}

impl TargetSymbol {
    pub fn from_token(token: &str, silence_token: &str) -> Self {
        if token == silence_token {
            TargetSymbol::Silence
        } else {
            TargetSymbol::Phone(token.to_owned())
        }
    }

    pub fn as_phone(&self) -> Option<&str> {
        match self {
            TargetSymbol::Phone(p) => Some(p),
            TargetSymbol::Silence => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePair {
    pub id: String,
    pub source: Vec<String>,
    pub target: Vec<TargetSymbol>,
    pub gold_words: Option<Vec<Vec<String>>>,
}

impl SentencePair {
    /// Builds a pair, rejecting an empty source or a target without phones.
    pub fn new(id: impl Into<String>, source: Vec<String>, target: Vec<TargetSymbol>) -> Result<Self> {
        let pair = SentencePair {
            id: id.into(),
            source,
            target,
            gold_words: None,
        };
        if pair.source.is_empty() {
            return Err(pair.invalid("source is empty"));
        }
        if pair.phone_count() == 0 {
            return Err(pair.invalid("target has no phones"));
        }
        Ok(pair)
    }

    fn invalid(&self, message: &str) -> Error {
        Error::InvalidSegmentation {
            id: self.id.clone(),
            message: message.to_owned(),
        }
    }

    /// Attaches a gold segmentation after checking it spells the silence-free target.
    pub fn with_gold(mut self, words: Vec<Vec<String>>) -> Result<Self> {
        if words.iter().any(Vec::is_empty) {
            return Err(self.invalid("gold segmentation contains an empty word"));
        }
        if !gold_matches(words.iter().flatten().map(String::as_str), self.phones()) {
            return Err(Error::GoldMismatch { id: self.id });
        }
        self.gold_words = Some(words);
        Ok(self)
    }

    /// Non-silence phones in order.
    pub fn phones(&self) -> impl Iterator<Item = &str> + '_ {
        self.target.iter().filter_map(TargetSymbol::as_phone)
    }

    pub fn phone_count(&self) -> usize {
        self.phones().count()
    }

    /// One flag per non-silence phone: whether a silence marker sits between
    /// it and the previous phone. Leading silence does not count.
    pub fn silence_before(&self) -> Vec<bool> {
        let mut flags = Vec::with_capacity(self.target.len());
        let mut pending = false;
        for symbol in &self.target {
            match symbol {
                TargetSymbol::Silence => pending = !flags.is_empty(),
                TargetSymbol::Phone(_) => {
                    flags.push(pending);
                    pending = false;
                }
            }
        }
        flags
    }
}

pub(crate) fn gold_matches<'a>(
    gold: impl Iterator<Item = &'a str>,
    phones: impl Iterator<Item = &'a str>,
) -> bool {
    gold.eq(phones)
}

/// A sentence pair together with its phone-by-word alignment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentRecord {
    pair: SentencePair,
    matrix: AlignmentMatrix,
}

impl AlignmentRecord {
    pub fn new(pair: SentencePair, matrix: AlignmentMatrix) -> Result<Self> {
        let expected_rows = pair.phone_count();
        let expected_cols = pair.source.len();
        if matrix.n_rows() != expected_rows || matrix.n_cols() != expected_cols {
            return Err(Error::DimensionMismatch {
                id: pair.id,
                rows: matrix.n_rows(),
                cols: matrix.n_cols(),
                expected_rows,
                expected_cols,
            });
        }
        Ok(AlignmentRecord { pair, matrix })
    }

    pub fn id(&self) -> &str {
        &self.pair.id
    }

    pub fn pair(&self) -> &SentencePair {
        &self.pair
    }

    pub fn matrix(&self) -> &AlignmentMatrix {
        &self.matrix
    }

    pub fn into_parts(self) -> (SentencePair, AlignmentMatrix) {
        (self.pair, self.matrix)
    }

    pub(crate) fn same_sentence(&self, other: &AlignmentRecord) -> bool {
        self.pair.id == other.pair.id
            && self.pair.source == other.pair.source
            && self.pair.target == other.pair.target
            && self.matrix.n_rows() == other.matrix.n_rows()
            && self.matrix.n_cols() == other.matrix.n_cols()
    }
}

/// Checks every record against the gold map and returns records with gold attached.
pub fn attach_gold(records: Vec<AlignmentRecord>, gold: &GoldMap) -> Result<Vec<AlignmentRecord>> {
    records
        .into_iter()
        .map(|record| {
            let words = gold.get(record.id()).ok_or_else(|| Error::MissingGold {
                id: record.id().to_owned(),
            })?;
            let (pair, matrix) = record.into_parts();
            AlignmentRecord::new(pair.with_gold(words.clone())?, matrix)
        })
        .collect()
}

/// One training run (or one attention head) over a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub label: String,
    pub records: Vec<AlignmentRecord>,
}

impl Run {
    pub fn new(label: impl Into<String>, records: Vec<AlignmentRecord>) -> Self {
        Run {
            label: label.into(),
            records,
        }
    }
}

/// Runs over the same sentences. Every run is stored in the sentence order of
/// the first run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSet {
    runs: Vec<Run>,
}

impl RunSet {
    pub fn new(mut runs: Vec<Run>) -> Result<Self> {
        let Some((first, rest)) = runs.split_first_mut() else {
            return Ok(RunSet { runs });
        };
        let order: HashMap<&str, usize> = first
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id(), i))
            .collect();
        for (offset, run) in rest.iter_mut().enumerate() {
            let run_index = offset + 1;
            if run.records.len() != first.records.len() {
                return Err(Error::RunMismatch {
                    run: run_index,
                    message: format!(
                        "has {} sentences, run 0 has {}",
                        run.records.len(),
                        first.records.len()
                    ),
                });
            }
            let mut slots: Vec<Option<AlignmentRecord>> = vec![None; run.records.len()];
            for record in run.records.drain(..) {
                let Some(&pos) = order.get(record.id()) else {
                    return Err(Error::RunMismatch {
                        run: run_index,
                        message: format!("sentence '{}' is not in run 0", record.id()),
                    });
                };
                if !record.same_sentence(&first.records[pos]) {
                    return Err(Error::RunMismatch {
                        run: run_index,
                        message: format!(
                            "sentence '{}' differs from run 0 in tokens or matrix shape",
                            record.id()
                        ),
                    });
                }
                if slots[pos].replace(record).is_some() {
                    return Err(Error::RunMismatch {
                        run: run_index,
                        message: format!("sentence '{}' appears twice", first.records[pos].id()),
                    });
                }
            }
            // Equal lengths and no duplicates means every slot is filled.
            run.records = slots.into_iter().flatten().collect();
        }
        Ok(RunSet { runs })
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn into_runs(self) -> Vec<Run> {
        self.runs
    }
}
