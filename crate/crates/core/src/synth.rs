//! Seeded synthetic parallel corpora with known gold segmentation.
//!
//! Each synthetic target type is a fixed phone string with one source-side
//! translation. Sentences draw words uniformly from that lexicon; the gold
//! alignment of every phone is its word's source column. Emitted rows blend
//! the one-hot gold row toward uniform by `s = T / (1 + T)` and then mix in a
//! random point of the simplex with weight `noise`:
//!
//! ```text
//! row = normalize((1 - noise) * ((1 - s) * onehot + s * uniform) + noise * dirichlet(1))
//! ```
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with `seed`. Stream 0
//! drives the corpus structure and stream 1 the row noise, so corpora that
//! differ only in temperature or noise share ids, tokens and gold.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::align::AlignmentMatrix;
use crate::corpus::{AlignmentRecord, GoldMap, Run, RunSet, SentencePair, TargetSymbol};
use crate::error::{Error, Result};
use crate::lexicon::TypeForm;

const PHONES: [&str; 39] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER", "EY", "F", "G", "HH", "IH", "IY", "JH",
    "K", "L", "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH", "T", "TH", "UH", "UW", "V", "W", "Y", "Z", "ZH",
];

/// Alternate temperature and noise for a fixed share of the sentences.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSpec {
    pub fraction: f64,
    pub temperature: f64,
    pub distractor_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_sentences: usize,
    /// Number of source words, and of target types.
    pub source_vocab: usize,
    pub word_len_range: (usize, usize),
    pub sent_len_range: (usize, usize),
    pub temperature: f64,
    pub distractor_noise: f64,
    /// Chance of a silence marker at each gold boundary.
    pub silence_prob: f64,
    /// Pairs of types share a translation and no silence is forced between
    /// same-column neighbours.
    pub ambiguous: bool,
    pub mix: Option<MixSpec>,
    pub silence_token: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_sentences: 100,
            source_vocab: 200,
            word_len_range: (2, 6),
            sent_len_range: (3, 8),
            temperature: 0.0,
            distractor_noise: 0.0,
            silence_prob: 0.0,
            ambiguous: false,
            mix: None,
            silence_token: crate::corpus::DEFAULT_SILENCE_TOKEN.to_owned(),
        }
    }
}

fn check(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(message.to_owned()))
    }
}

fn valid_temperature(t: f64) -> bool {
    t.is_finite() && t >= 0.0
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.n_sentences >= 1, "n_sentences must be at least 1")?;
        check(self.source_vocab >= 1, "source_vocab must be at least 1")?;
        let (wmin, wmax) = self.word_len_range;
        check(wmin >= 1 && wmin <= wmax, "word_len_range must satisfy 1 <= min <= max")?;
        let (smin, smax) = self.sent_len_range;
        check(smin >= 1 && smin <= smax, "sent_len_range must satisfy 1 <= min <= max")?;
        check(valid_temperature(self.temperature), "temperature must be finite and >= 0")?;
        check(
            (0.0..1.0).contains(&self.distractor_noise),
            "distractor_noise must be in [0,1)",
        )?;
        check((0.0..=1.0).contains(&self.silence_prob), "silence_prob must be in [0,1]")?;
        if let Some(mix) = &self.mix {
            check((0.0..=1.0).contains(&mix.fraction), "mix fraction must be in [0,1]")?;
            check(valid_temperature(mix.temperature), "mix temperature must be finite and >= 0")?;
            check(
                (0.0..1.0).contains(&mix.distractor_noise),
                "mix distractor_noise must be in [0,1)",
            )?;
        }
        check(
            !self.silence_token.is_empty() && !PHONES.contains(&self.silence_token.as_str()),
            "silence token must be non-empty and not a phone",
        )?;
        let capacity: f64 = (wmin..=wmax).map(|l| (PHONES.len() as f64).powi(l as i32)).sum();
        check(
            (self.source_vocab as f64) <= capacity / 2.0,
            "source_vocab too large for word_len_range",
        )
    }

    /// Temperature and noise used for sentence `i`.
    fn sentence_params(&self, i: usize) -> (f64, f64) {
        match &self.mix {
            Some(mix) if ((i + 1) as f64 * mix.fraction).floor() > (i as f64 * mix.fraction).floor() => {
                (mix.temperature, mix.distractor_noise)
            }
            _ => (self.temperature, self.distractor_noise),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub records: Vec<AlignmentRecord>,
    pub gold: GoldMap,
    /// Distinct gold word forms that occur in the corpus.
    pub lexicon: BTreeSet<TypeForm>,
}

struct SentenceLayout {
    id: String,
    source: Vec<String>,
    target: Vec<TargetSymbol>,
    words: Vec<TypeForm>,
    /// Gold source column of every non-silence phone.
    columns: Vec<usize>,
}

fn draw_types(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<TypeForm>> {
    let mut seen = HashSet::new();
    let mut types = Vec::with_capacity(cfg.source_vocab);
    let mut attempts = 0usize;
    while types.len() < cfg.source_vocab {
        attempts += 1;
        if attempts > 1000 * cfg.source_vocab {
            return Err(Error::InvalidConfig("could not draw enough distinct types".to_owned()));
        }
        let len = rng.random_range(cfg.word_len_range.0..=cfg.word_len_range.1);
        let form: TypeForm = (0..len)
            .map(|_| PHONES[rng.random_range(0..PHONES.len())].to_owned())
            .collect();
        if seen.insert(form.clone()) {
            types.push(form);
        }
    }
    Ok(types)
}

fn translation_of(cfg: &SynthConfig, type_index: usize) -> usize {
    if cfg.ambiguous {
        type_index / 2
    } else {
        type_index
    }
}

fn layouts(cfg: &SynthConfig) -> Result<Vec<SentenceLayout>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let types = draw_types(cfg, &mut rng)?;
    let width = cfg.n_sentences.to_string().len();
    (0..cfg.n_sentences)
        .map(|i| {
            let n_words = rng.random_range(cfg.sent_len_range.0..=cfg.sent_len_range.1);
            let chosen: Vec<usize> = (0..n_words).map(|_| rng.random_range(0..types.len())).collect();

            let mut translations: Vec<usize> = Vec::new();
            for &t in &chosen {
                let tr = translation_of(cfg, t);
                if !translations.contains(&tr) {
                    translations.push(tr);
                }
            }
            translations.shuffle(&mut rng);

            let mut target = Vec::new();
            let mut columns = Vec::new();
            let mut previous_column = None;
            for &t in &chosen {
                let column = translations
                    .iter()
                    .position(|&tr| tr == translation_of(cfg, t))
                    .expect("translation was collected above");
                let random_silence = rng.random_bool(cfg.silence_prob);
                if let Some(prev) = previous_column {
                    let forced = !cfg.ambiguous && prev == column;
                    if forced || random_silence {
                        target.push(TargetSymbol::Silence);
                    }
                }
                for phone in &types[t] {
                    target.push(TargetSymbol::Phone(phone.clone()));
                    columns.push(column);
                }
                previous_column = Some(column);
            }
            Ok(SentenceLayout {
                id: format!("s{i:0width$}"),
                source: translations.iter().map(|tr| format!("w{tr:04}")).collect(),
                target,
                words: chosen.iter().map(|&t| types[t].clone()).collect(),
                columns,
            })
        })
        .collect()
}

fn emit_row(column: usize, n: usize, temperature: f64, noise: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    if n == 1 {
        return vec![1.0];
    }
    let draw_sum: f64 = draws.iter().sum();
    let s = temperature / (1.0 + temperature);
    let uniform = 1.0 / n as f64;
    let mut row: Vec<f64> = draws
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let hot = if j == column { 1.0 } else { 0.0 };
            (1.0 - noise) * ((1.0 - s) * hot + s * uniform) + noise * (d / draw_sum)
        })
        .collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p = (*p / sum).min(1.0));
    row
}

fn build(cfg: &SynthConfig, layouts: &[SentenceLayout]) -> Result<SynthCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut records = Vec::with_capacity(layouts.len());
    let mut gold = GoldMap::new();
    let mut lexicon = BTreeSet::new();
    for (i, layout) in layouts.iter().enumerate() {
        let (temperature, noise) = cfg.sentence_params(i);
        let n = layout.source.len();
        let rows = layout
            .columns
            .iter()
            .map(|&c| emit_row(c, n, temperature, noise, &mut rng))
            .collect();
        let matrix = AlignmentMatrix::from_rows(rows).map_err(|source| Error::Matrix {
            id: layout.id.clone(),
            source,
        })?;
        let pair = SentencePair::new(layout.id.clone(), layout.source.clone(), layout.target.clone())?
            .with_gold(layout.words.clone())?;
        records.push(AlignmentRecord::new(pair, matrix)?);
        gold.insert(layout.id.clone(), layout.words.clone());
        lexicon.extend(layout.words.iter().cloned());
    }
    Ok(SynthCorpus {
        records,
        gold,
        lexicon,
    })
}

/// Generates a corpus; identical configs give identical corpora.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    build(cfg, &layouts(cfg)?)
}

/// One corpus per temperature, sharing everything but the matrices.
/// Runs are labelled `T=<temperature>`.
pub fn temperature_sweep(cfg: &SynthConfig, temps: &[f64]) -> Result<(RunSet, GoldMap, BTreeSet<TypeForm>)> {
    if temps.is_empty() {
        return Err(Error::InvalidConfig("temperature grid is empty".to_owned()));
    }
    if !temps.iter().all(|&t| valid_temperature(t)) || temps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "temperature grid must be strictly ascending, finite and >= 0".to_owned(),
        ));
    }
    cfg.validate()?;
    let layouts = layouts(cfg)?;
    let mut runs = Vec::with_capacity(temps.len());
    let mut shared = None;
    for &t in temps {
        let corpus = build(
            &SynthConfig {
                temperature: t,
                ..cfg.clone()
            },
            &layouts,
        )?;
        runs.push(Run::new(format!("T={t}"), corpus.records));
        shared.get_or_insert((corpus.gold, corpus.lexicon));
    }
    let (gold, lexicon) = shared.expect("grid is non-empty");
    Ok((RunSet::new(runs)?, gold, lexicon))
}
