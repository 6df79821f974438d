//! Alignment matrices and normalized-entropy measures.
//!
//! The normalized entropy of phone `t_i` against a source sentence `s` is
//! `-sum_j p_ij * log_|s|(p_ij)`, which lies in `[0,1]`. Averaging it over
//! the phones of a sentence gives the sentence ANE; averaging sentence ANEs
//! gives the corpus ANE.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::corpus::{AlignmentRecord, RunSet};
use crate::error::{Error, MatrixError, Result};

/// Largest accepted distance between a row sum and 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

/// Row-major `|t| x |s|` matrix of phone-to-word alignment probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl AlignmentMatrix {
    /// Validates entries in `[0,1]` and row sums within [`ROW_SUM_TOLERANCE`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> std::result::Result<Self, MatrixError> {
        let n_rows = rows.len();
        let n_cols = rows.first().ok_or(MatrixError::NoRows)?.len();
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(MatrixError::Ragged {
                    row: i,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            validate_row(&row, i)?;
            data.extend(row);
        }
        Ok(AlignmentMatrix {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_cols)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Copy with every row divided by its sum.
    pub fn renormalized(&self) -> AlignmentMatrix {
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.n_cols) {
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
        }
        AlignmentMatrix { data, ..*self }
    }
}

/// Returns the row sum after checking entries and tolerance.
fn validate_row(row: &[f64], index: usize) -> std::result::Result<f64, MatrixError> {
    if row.is_empty() {
        return Err(MatrixError::EmptyRow);
    }
    for (col, &value) in row.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(MatrixError::OutOfRange {
                row: index,
                col,
                value,
            });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(MatrixError::RowSum {
            row: index,
            sum,
            tolerance: ROW_SUM_TOLERANCE,
        });
    }
    Ok(sum)
}

fn row_ne(row: &[f64], index: usize) -> std::result::Result<f64, MatrixError> {
    let sum = validate_row(row, index)?;
    let n = row.len();
    if n == 1 {
        return Ok(0.0);
    }
    let entropy: f64 = row
        .iter()
        .map(|&p| p / sum)
        .filter(|&q| q > 0.0)
        .map(|q| -q * q.ln())
        .sum();
    Ok((entropy / (n as f64).ln()).clamp(0.0, 1.0))
}

/// Normalized entropy of one phone's distribution over the source words.
///
/// Uses `0 * log 0 = 0`, and a single-column row has entropy 0. The row is
/// divided by its sum before evaluation.
pub fn phone_ne(row: &[f64]) -> std::result::Result<f64, MatrixError> {
    row_ne(row, 0)
}

/// Per-phone NE and their mean for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct AneReport {
    pub id: String,
    pub per_phone: Vec<f64>,
    pub sentence_ane: f64,
}

pub fn sentence_ane(id: &str, matrix: &AlignmentMatrix) -> Result<AneReport> {
    let per_phone = matrix
        .rows()
        .enumerate()
        .map(|(i, row)| row_ne(row, i))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|source| Error::Matrix {
            id: id.to_owned(),
            source,
        })?;
    let sentence_ane = per_phone.iter().sum::<f64>() / per_phone.len() as f64;
    Ok(AneReport {
        id: id.to_owned(),
        per_phone,
        sentence_ane,
    })
}

/// ANE reports for a corpus, in input order.
pub fn corpus_reports(records: &[AlignmentRecord]) -> Result<Vec<AneReport>> {
    records
        .par_iter()
        .map(|r| sentence_ane(r.id(), r.matrix()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusWeighting {
    /// Every sentence counts once.
    #[default]
    Sentence,
    /// Every phone counts once.
    Phone,
}

/// Corpus ANE from per-sentence reports, summed in ascending id order.
pub fn corpus_ane_from_reports(reports: &[AneReport], weighting: CorpusWeighting) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ordered: Vec<&AneReport> = reports.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(match weighting {
        CorpusWeighting::Sentence => {
            ordered.iter().map(|r| r.sentence_ane).sum::<f64>() / ordered.len() as f64
        }
        CorpusWeighting::Phone => {
            let total: f64 = ordered.iter().flat_map(|r| r.per_phone.iter()).sum();
            let count: usize = ordered.iter().map(|r| r.per_phone.len()).sum();
            total / count as f64
        }
    })
}

/// Unweighted mean of sentence ANEs.
pub fn corpus_ane(records: &[AlignmentRecord]) -> Result<f64> {
    corpus_ane_weighted(records, CorpusWeighting::Sentence)
}

pub fn corpus_ane_weighted(records: &[AlignmentRecord], weighting: CorpusWeighting) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    corpus_ane_from_reports(&corpus_reports(records)?, weighting)
}

/// Order-independent mean: values are sorted, then the mean is taken as an
/// offset from the minimum so that identical inputs return themselves.
fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let min = values[0];
    let spread: f64 = values.iter().map(|v| v - min).sum();
    min + spread / values.len() as f64
}

/// Element-wise mean of the runs' matrices, sentence by sentence.
///
/// The result is independent of run order and returns the input unchanged
/// when all runs agree. Rows are not renormalized here; use
/// [`AlignmentMatrix::renormalized`] for that.
pub fn average_runs(runs: &RunSet) -> Result<Vec<AlignmentRecord>> {
    let first = runs.runs().first().ok_or(Error::NoRuns)?;
    (0..first.records.len())
        .into_par_iter()
        .map(|s| {
            let base = &first.records[s];
            let matrix = base.matrix();
            let mut column = vec![0.0; runs.len()];
            let rows = (0..matrix.n_rows())
                .map(|i| {
                    (0..matrix.n_cols())
                        .map(|j| {
                            for (slot, run) in column.iter_mut().zip(runs.runs()) {
                                *slot = run.records[s].matrix().row(i)[j];
                            }
                            stable_mean(&mut column)
                        })
                        .collect()
                })
                .collect();
            let averaged = AlignmentMatrix::from_rows(rows).map_err(|source| Error::Matrix {
                id: base.id().to_owned(),
                source,
            })?;
            AlignmentRecord::new(base.pair().clone(), averaged)
        })
        .collect()
}

/// Index and corpus ANE of the head with the lowest corpus ANE; ties go to
/// the lowest index.
pub fn select_head(heads: &RunSet) -> Result<(usize, f64)> {
    let scores = heads
        .runs()
        .iter()
        .map(|run| corpus_ane(&run.records))
        .collect::<Result<Vec<_>>>()?;
    scores
        .into_iter()
        .enumerate()
        .reduce(|best, cand| match cand.1.total_cmp(&best.1) {
            Ordering::Less => cand,
            _ => best,
        })
        .ok_or(Error::EmptyHeadSet)
}
