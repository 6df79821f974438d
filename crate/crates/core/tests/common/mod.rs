//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use alignseg::eval::Prf;
use alignseg::segment::{Segmentation, Token};
use alignseg::{AlignmentMatrix, AlignmentRecord, GoldMap, SentencePair, TargetSymbol};

const DIGITS: u32 = 60;

fn scale() -> BigInt {
    BigInt::from(10).pow(DIGITS)
}

/// ln(num/den) in fixed point with `DIGITS` decimals, via the atanh series.
fn ln_fixed(num: i64, den: i64) -> BigInt {
    let s = scale();
    let z = BigInt::from(num - den) * &s / BigInt::from(num + den);
    let z2 = &z * &z / &s;
    let mut term = z;
    let mut sum = BigInt::from(0);
    let mut k = 0u32;
    while term != BigInt::from(0) {
        sum += &term / BigInt::from(2 * k + 1);
        term = term * &z2 / &s;
        k += 1;
    }
    sum * 2
}

/// Normalized entropy of a row of rationals `weights / total`, evaluated
/// with 60-digit fixed-point arithmetic.
pub fn ne_big(weights: &[i64]) -> f64 {
    let total: i64 = weights.iter().sum();
    let s = scale();
    let mut entropy = BigInt::from(0);
    for &w in weights.iter().filter(|&&w| w > 0) {
        entropy -= BigInt::from(w) * ln_fixed(w, total) / BigInt::from(total);
    }
    let log_n = ln_fixed(weights.len() as i64, 1);
    let value = entropy * &s / log_n;
    // keep 17 significant decimals for the conversion
    let shifted = value / BigInt::from(10).pow(DIGITS - 17);
    shifted.to_string().parse::<f64>().unwrap() / 1e17
}

/// Boundary scoring by walking every candidate position of every sentence.
pub fn brute_force_boundary(hyp: &[Segmentation], gold: &GoldMap) -> (usize, usize, usize, Prf) {
    let (mut hits, mut hyp_total, mut gold_total) = (0, 0, 0);
    for seg in hyp {
        let words = &gold[&seg.id];
        let n: usize = words.iter().map(Vec::len).sum();
        for p in 1..n {
            let in_hyp = seg.tokens.iter().any(|t| t.start == p);
            let mut acc = 0;
            let mut in_gold = false;
            for w in &words[..words.len() - 1] {
                acc += w.len();
                in_gold |= acc == p;
            }
            hyp_total += in_hyp as usize;
            gold_total += in_gold as usize;
            hits += (in_hyp && in_gold) as usize;
        }
    }
    let p = if hyp_total == 0 {
        if gold_total == 0 { 1.0 } else { 0.0 }
    } else {
        hits as f64 / hyp_total as f64
    };
    let r = if gold_total == 0 {
        if hyp_total == 0 { 1.0 } else { 0.0 }
    } else {
        hits as f64 / gold_total as f64
    };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (hits, hyp_total, gold_total, Prf { precision: p, recall: r, f_score: f })
}

/// Lowest index of the minimum, by a plain loop.
pub fn linear_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    best
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut lengths = Vec::new();
    let mut left = n;
    while left > 0 {
        let len = rng.random_range(1..=left);
        lengths.push(len);
        left -= len;
    }
    lengths
}

/// Random hypothesis/gold pair: at most `max_sentences` sentences of at most
/// `max_phones` phones each.
pub fn random_scoring_case(
    rng: &mut ChaCha8Rng,
    max_sentences: usize,
    max_phones: usize,
) -> (Vec<Segmentation>, GoldMap) {
    let n_sentences = rng.random_range(1..=max_sentences);
    let mut hyp = Vec::new();
    let mut gold = GoldMap::new();
    for s in 0..n_sentences {
        let id = format!("s{s}");
        let n = rng.random_range(1..=max_phones);
        let phones: Vec<String> = (0..n).map(|i| format!("p{}", i % 3)).collect();
        let mut start = 0;
        let tokens = random_partition(rng, n)
            .into_iter()
            .map(|len| {
                let t = Token {
                    phones: phones[start..start + len].to_vec(),
                    start,
                    end: start + len,
                    aligned_word_index: 0,
                    aligned_word: "w".into(),
                    token_ane: 0.0,
                };
                start += len;
                t
            })
            .collect();
        let mut start = 0;
        let words = random_partition(rng, n)
            .into_iter()
            .map(|len| {
                let w = phones[start..start + len].to_vec();
                start += len;
                w
            })
            .collect();
        hyp.push(Segmentation { id: id.clone(), tokens });
        gold.insert(id, words);
    }
    (hyp, gold)
}

pub fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Random record with phones `p0..`, words `w0..` and a random matrix.
pub fn random_record(rng: &mut ChaCha8Rng, id: &str, rows: usize, cols: usize) -> AlignmentRecord {
    let pair = SentencePair::new(
        id,
        (0..cols).map(|j| format!("w{j}")).collect(),
        (0..rows).map(|i| TargetSymbol::Phone(format!("p{i}"))).collect(),
    )
    .unwrap();
    let matrix = AlignmentMatrix::from_rows((0..rows).map(|_| random_row(rng, cols)).collect()).unwrap();
    AlignmentRecord::new(pair, matrix).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
