//! Peak-based segmentation: neighbouring phones whose alignment rows peak at
//! the same source word form one token. A silence marker between two phones
//! always forces a boundary.

use std::ops::Range;

use rayon::prelude::*;

use crate::align::sentence_ane;
use crate::corpus::AlignmentRecord;
use crate::error::{MatrixError, Result};

/// Column of the largest entry, lowest index on ties.
pub fn argmax_row(row: &[f64]) -> std::result::Result<usize, MatrixError> {
    let (first, rest) = row.split_first().ok_or(MatrixError::EmptyRow)?;
    let mut best = (0, *first);
    for (j, &p) in rest.iter().enumerate() {
        if p > best.1 {
            best = (j + 1, p);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub phones: Vec<String>,
    /// Half-open span over silence-free phone positions.
    pub start: usize,
    pub end: usize,
    pub aligned_word_index: usize,
    pub aligned_word: String,
    /// Mean NE of the token's phones.
    pub token_ane: f64,
}

impl Token {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl Segmentation {
    /// Internal boundaries: every token start except 0.
    pub fn boundaries(&self) -> Vec<usize> {
        self.tokens.iter().skip(1).map(|t| t.start).collect()
    }

    pub fn phone_count(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.end)
    }

    pub fn phones(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().flat_map(|t| t.phones.iter().map(String::as_str))
    }

    /// Checks that spans tile `[0, n)` and agree with the phone lists.
    pub fn check_tiling(&self) -> std::result::Result<(), String> {
        let mut expected_start = 0;
        for (k, token) in self.tokens.iter().enumerate() {
            if token.start != expected_start {
                return Err(format!(
                    "token {k} starts at {}, expected {expected_start}",
                    token.start
                ));
            }
            if token.end <= token.start {
                return Err(format!("token {k} has an empty span"));
            }
            if token.phones.len() != token.end - token.start {
                return Err(format!(
                    "token {k} has {} phones but span length {}",
                    token.phones.len(),
                    token.end - token.start
                ));
            }
            expected_start = token.end;
        }
        if self.tokens.is_empty() {
            return Err("no tokens".to_owned());
        }
        Ok(())
    }
}

pub fn segment(record: &AlignmentRecord) -> Result<Segmentation> {
    let report = sentence_ane(record.id(), record.matrix())?;
    let matrix = record.matrix();
    let pair = record.pair();
    let phones: Vec<&str> = pair.phones().collect();
    let silence_before = pair.silence_before();
    // rows are validated non-empty, so argmax cannot fail
    let peaks: Vec<usize> = matrix
        .rows()
        .map(|row| argmax_row(row).unwrap_or(0))
        .collect();

    let mut tokens = Vec::new();
    let mut start = 0;
    for i in 1..=phones.len() {
        let closes = i == phones.len() || peaks[i] != peaks[i - 1] || silence_before[i];
        if !closes {
            continue;
        }
        let column = peaks[start];
        let ne = &report.per_phone[start..i];
        tokens.push(Token {
            phones: phones[start..i].iter().map(|p| p.to_string()).collect(),
            start,
            end: i,
            aligned_word_index: column,
            aligned_word: pair.source[column].clone(),
            token_ane: ne.iter().sum::<f64>() / ne.len() as f64,
        });
        start = i;
    }
    Ok(Segmentation {
        id: record.id().to_owned(),
        tokens,
    })
}

/// Segments every sentence independently, keeping input order.
pub fn segment_corpus(records: &[AlignmentRecord]) -> Result<Vec<Segmentation>> {
    records.par_iter().map(segment).collect()
}
