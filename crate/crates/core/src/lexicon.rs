//! Discovered vocabulary: types, (type, translation) alignment pairs and
//! their ANE-based confidence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::segment::Segmentation;

/// A type is identified by its exact phone sequence.
pub type TypeForm = Vec<String>;

#[derive(Debug, Clone, PartialEq)]
pub struct TypeEntry {
    pub type_form: TypeForm,
    pub count: usize,
    pub type_ane: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentEntry {
    pub type_form: TypeForm,
    pub translation: String,
    pub count: usize,
    pub alignment_ane: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    pub types: Vec<TypeEntry>,
    pub pairs: Vec<AlignmentEntry>,
}

#[derive(Default)]
struct Accumulator {
    count: usize,
    sum: f64,
}

impl Accumulator {
    fn push(&mut self, value: f64) {
        self.count += 1;
        self.sum += value;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

fn by_ane_then_form(a: (f64, &TypeForm, &str), b: (f64, &TypeForm, &str)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1.cmp(b.1))
        .then_with(|| a.2.cmp(b.2))
}

pub(crate) fn sort_pairs(pairs: &mut [AlignmentEntry]) {
    pairs.sort_by(|a, b| {
        by_ane_then_form(
            (a.alignment_ane, &a.type_form, &a.translation),
            (b.alignment_ane, &b.type_form, &b.translation),
        )
    });
}

fn sort_types(types: &mut [TypeEntry]) {
    types.sort_by(|a, b| by_ane_then_form((a.type_ane, &a.type_form, ""), (b.type_ane, &b.type_form, "")));
}

/// Groups tokens into types and alignment pairs.
///
/// Occurrences are accumulated in ascending sentence-id order so the result
/// does not depend on the order of `segmentations`.
pub fn build_lexicon(segmentations: &[Segmentation]) -> Lexicon {
    let mut ordered: Vec<&Segmentation> = segmentations.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    let mut types: BTreeMap<&[String], Accumulator> = BTreeMap::new();
    let mut pairs: BTreeMap<(&[String], &str), Accumulator> = BTreeMap::new();
    for token in ordered.iter().flat_map(|s| s.tokens.iter()) {
        types.entry(&token.phones).or_default().push(token.token_ane);
        pairs
            .entry((&token.phones, &token.aligned_word))
            .or_default()
            .push(token.token_ane);
    }

    let mut types: Vec<TypeEntry> = types
        .into_iter()
        .map(|(form, acc)| TypeEntry {
            type_form: form.to_vec(),
            count: acc.count,
            type_ane: acc.mean(),
        })
        .collect();
    let mut pairs: Vec<AlignmentEntry> = pairs
        .into_iter()
        .map(|((form, translation), acc)| AlignmentEntry {
            type_form: form.to_vec(),
            translation: translation.to_owned(),
            count: acc.count,
            alignment_ane: acc.mean(),
        })
        .collect();
    sort_types(&mut types);
    sort_pairs(&mut pairs);
    Lexicon { types, pairs }
}

/// Type entries recovered from alignment pairs: counts add up and the type
/// ANE is the count-weighted mean of the pair ANEs.
pub fn types_from_pairs(pairs: &[AlignmentEntry]) -> Vec<TypeEntry> {
    let mut grouped: BTreeMap<&TypeForm, (usize, f64)> = BTreeMap::new();
    let mut sorted: Vec<&AlignmentEntry> = pairs.iter().collect();
    sorted.sort_by(|a, b| a.type_form.cmp(&b.type_form).then_with(|| a.translation.cmp(&b.translation)));
    for pair in sorted {
        let slot = grouped.entry(&pair.type_form).or_default();
        slot.0 += pair.count;
        slot.1 += pair.alignment_ane * pair.count as f64;
    }
    let mut types: Vec<TypeEntry> = grouped
        .into_iter()
        .map(|(form, (count, weighted))| TypeEntry {
            type_form: form.clone(),
            count,
            type_ane: weighted / count as f64,
        })
        .collect();
    sort_types(&mut types);
    types
}

/// ANE cutoff, or keep everything.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Value(f64),
    All,
}

impl Threshold {
    pub fn value(v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&v) {
            Ok(Threshold::Value(v))
        } else {
            Err(Error::InvalidThreshold(v))
        }
    }

    pub fn admits(&self, ane: f64) -> bool {
        match *self {
            Threshold::Value(t) => ane <= t,
            Threshold::All => true,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Threshold::Value(v) if !(0.0..=1.0).contains(&v) => Err(Error::InvalidThreshold(v)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Value(v) => write!(f, "{v}"),
            Threshold::All => f.write_str("all"),
        }
    }
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Threshold::All);
        }
        let v: f64 = s.parse().map_err(|_| format!("invalid threshold '{s}'"))?;
        Threshold::value(v).map_err(|e| e.to_string())
    }
}

/// How a type with several alignment pairs passes a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterRule {
    /// At least one of its pairs passes.
    #[default]
    AnyPair,
    /// Every one of its pairs passes.
    AllPairs,
}

/// Types kept at `threshold`.
pub fn filter_by_ane(
    pairs: &[AlignmentEntry],
    threshold: Threshold,
    rule: FilterRule,
) -> Result<BTreeSet<TypeForm>> {
    threshold.check()?;
    let mut verdicts: BTreeMap<&TypeForm, bool> = BTreeMap::new();
    for pair in pairs {
        let pass = threshold.admits(pair.alignment_ane);
        verdicts
            .entry(&pair.type_form)
            .and_modify(|v| match rule {
                FilterRule::AnyPair => *v |= pass,
                FilterRule::AllPairs => *v &= pass,
            })
            .or_insert(pass);
    }
    Ok(verdicts
        .into_iter()
        .filter(|(_, keep)| *keep)
        .map(|(form, _)| form.clone())
        .collect())
}

/// Types whose Type ANE passes `threshold`.
pub fn filter_types_by_ane(types: &[TypeEntry], threshold: Threshold) -> Result<BTreeSet<TypeForm>> {
    threshold.check()?;
    Ok(types
        .iter()
        .filter(|t| threshold.admits(t.type_ane))
        .map(|t| t.type_form.clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

/// The `limit` most (ascending) or least (descending) confident pairs.
/// Equal ANEs are ordered by type form, then translation.
pub fn rank_types(pairs: &[AlignmentEntry], direction: Direction, limit: usize) -> Vec<AlignmentEntry> {
    let mut ranked = pairs.to_vec();
    ranked.sort_by(|a, b| {
        let ane = a.alignment_ane.total_cmp(&b.alignment_ane);
        let ane = match direction {
            Direction::Ascending => ane,
            Direction::Descending => ane.reverse(),
        };
        ane.then_with(|| a.type_form.cmp(&b.type_form))
            .then_with(|| a.translation.cmp(&b.translation))
    });
    ranked.truncate(limit);
    ranked
}
