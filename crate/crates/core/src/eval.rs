//! Boundary and type scoring, ANE threshold sweeps and Pearson correlation.
//!
//! Boundary scoring counts internal boundaries only, over silence-free phone
//! positions, and micro-averages across sentences. Utterance edges are never
//! counted. This approximates the ZRC 2017 track-2 boundary score.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::corpus::{gold_matches, GoldMap};
use crate::error::{Error, Result};
use crate::lexicon::{filter_by_ane, filter_types_by_ane, AlignmentEntry, FilterRule, Threshold, TypeEntry, TypeForm};
use crate::segment::Segmentation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryCounts {
    pub hits: usize,
    pub hyp_total: usize,
    pub gold_total: usize,
}

impl std::ops::Add for BoundaryCounts {
    type Output = BoundaryCounts;

    fn add(self, rhs: Self) -> Self {
        BoundaryCounts {
            hits: self.hits + rhs.hits,
            hyp_total: self.hyp_total + rhs.hyp_total,
            gold_total: self.gold_total + rhs.gold_total,
        }
    }
}

/// Precision, recall and F-score as fractions in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl Prf {
    /// `found` of `predicted` items were correct, out of `relevant`.
    ///
    /// A zero denominator yields 1 when the other total is also zero, else 0.
    pub fn from_counts(found: usize, predicted: usize, relevant: usize) -> Prf {
        let ratio = |num: usize, den: usize, other: usize| match (den, other) {
            (0, 0) => 1.0,
            (0, _) => 0.0,
            _ => num as f64 / den as f64,
        };
        let precision = ratio(found, predicted, relevant);
        let recall = ratio(found, relevant, predicted);
        Prf {
            precision,
            recall,
            f_score: harmonic_mean(precision, recall),
        }
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryScore {
    pub prf: Prf,
    pub counts: BoundaryCounts,
}

/// Internal boundary positions of a gold segmentation.
pub fn gold_boundaries(words: &[Vec<String>]) -> Vec<usize> {
    words
        .iter()
        .scan(0, |pos, w| {
            *pos += w.len();
            Some(*pos)
        })
        .take(words.len().saturating_sub(1))
        .collect()
}

fn sentence_counts(hyp: &Segmentation, gold: &GoldMap) -> Result<BoundaryCounts> {
    let words = gold.get(&hyp.id).ok_or_else(|| Error::MissingGold { id: hyp.id.clone() })?;
    if !gold_matches(words.iter().flatten().map(String::as_str), hyp.phones()) {
        return Err(Error::GoldMismatch { id: hyp.id.clone() });
    }
    let hyp_set: BTreeSet<usize> = hyp.boundaries().into_iter().collect();
    let gold_set: BTreeSet<usize> = gold_boundaries(words).into_iter().collect();
    Ok(BoundaryCounts {
        hits: hyp_set.intersection(&gold_set).count(),
        hyp_total: hyp_set.len(),
        gold_total: gold_set.len(),
    })
}

/// Micro-averaged boundary precision, recall and F over a corpus.
pub fn boundary_prf(hyp: &[Segmentation], gold: &GoldMap) -> Result<BoundaryScore> {
    let per_sentence = hyp
        .par_iter()
        .map(|s| sentence_counts(s, gold))
        .collect::<Result<Vec<_>>>()?;
    let counts = per_sentence.into_iter().fold(BoundaryCounts::default(), |a, b| a + b);
    Ok(BoundaryScore {
        prf: Prf::from_counts(counts.hits, counts.hyp_total, counts.gold_total),
        counts,
    })
}

/// Distinct gold word forms over the corpus.
pub fn gold_lexicon(gold: &GoldMap) -> BTreeSet<TypeForm> {
    gold.values().flatten().cloned().collect()
}

pub fn type_prf(discovered: &BTreeSet<TypeForm>, gold_lexicon: &BTreeSet<TypeForm>) -> Prf {
    let found = discovered.intersection(gold_lexicon).count();
    Prf::from_counts(found, discovered.len(), gold_lexicon.len())
}

/// One row of a threshold sweep. Scores are percentages, unrounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub threshold: Threshold,
    pub kept: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl SweepRow {
    fn new(threshold: Threshold, kept: usize, prf: Prf) -> SweepRow {
        let precision = 100.0 * prf.precision;
        let recall = 100.0 * prf.recall;
        SweepRow {
            threshold,
            kept,
            precision,
            recall,
            f_score: harmonic_mean(precision, recall),
        }
    }
}

/// Which ANE decides whether a type is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepBy {
    #[default]
    Alignment,
    Type,
}

fn check_ascending(thresholds: &[Threshold]) -> Result<()> {
    let mut last = f64::NEG_INFINITY;
    for (k, t) in thresholds.iter().enumerate() {
        match *t {
            Threshold::All if k + 1 != thresholds.len() => return Err(Error::UnsortedThresholds),
            Threshold::All => {}
            Threshold::Value(v) => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidThreshold(v));
                }
                if v < last {
                    return Err(Error::UnsortedThresholds);
                }
                last = v;
            }
        }
    }
    Ok(())
}

/// Type retrieval scores for each threshold, using Alignment ANE.
pub fn ane_sweep(
    pairs: &[AlignmentEntry],
    gold_lexicon: &BTreeSet<TypeForm>,
    thresholds: &[Threshold],
    rule: FilterRule,
) -> Result<Vec<SweepRow>> {
    check_ascending(thresholds)?;
    thresholds
        .iter()
        .map(|&t| {
            let kept = filter_by_ane(pairs, t, rule)?;
            Ok(SweepRow::new(t, kept.len(), type_prf(&kept, gold_lexicon)))
        })
        .collect()
}

/// Same as [`ane_sweep`] but filtering on Type ANE.
pub fn type_ane_sweep(
    types: &[TypeEntry],
    gold_lexicon: &BTreeSet<TypeForm>,
    thresholds: &[Threshold],
) -> Result<Vec<SweepRow>> {
    check_ascending(thresholds)?;
    thresholds
        .iter()
        .map(|&t| {
            let kept = filter_types_by_ane(types, t)?;
            Ok(SweepRow::new(t, kept.len(), type_prf(&kept, gold_lexicon)))
        })
        .collect()
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(Error::ConstantInput);
    }
    if xs.len() == 2 {
        // two distinct points are always perfectly (anti)correlated
        return Ok(((xs[1] - xs[0]) * (ys[1] - ys[0])).signum());
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunScore {
    pub label: String,
    pub corpus_ane: f64,
    pub boundary_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub runs: Vec<RunScore>,
    pub rho: f64,
}

/// Pearson correlation between corpus ANE and boundary F across runs.
pub fn correlate_runs(runs: Vec<RunScore>) -> Result<CorrelationReport> {
    let anes: Vec<f64> = runs.iter().map(|r| r.corpus_ane).collect();
    let fs: Vec<f64> = runs.iter().map(|r| r.boundary_f).collect();
    let rho = pearson(&anes, &fs)?;
    Ok(CorrelationReport { runs, rho })
}
