mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use alignseg::align::{average_runs, corpus_ane, phone_ne, select_head, sentence_ane};
use alignseg::eval::{ane_sweep, boundary_prf, harmonic_mean, pearson, type_prf};
use alignseg::io::{read_run, read_segmentation, write_run, write_segmentation, LoadOptions};
use alignseg::lexicon::{build_lexicon, filter_by_ane, rank_types, Direction, FilterRule, Threshold};
use alignseg::segment::{segment, segment_corpus};
use alignseg::synth::{generate, temperature_sweep, SynthConfig};
use alignseg::{AlignmentMatrix, AlignmentRecord, Run, RunSet, SentencePair, TargetSymbol};

fn distribution(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..=max_len).prop_filter_map("zero row", |raw| {
        let sum: f64 = raw.iter().sum();
        (sum > 1e-6).then(|| raw.iter().map(|x| x / sum).collect())
    })
}

fn record_strategy() -> impl Strategy<Value = AlignmentRecord> {
    (1usize..6, 1usize..10, any::<u64>()).prop_map(|(cols, rows, seed)| {
        let mut rng = common::rng(seed);
        common::random_record(&mut rng, &format!("r{seed}"), rows, cols)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ne_bounded_and_permutation_invariant(row in distribution(12), shift in 0usize..12) {
        let ne = phone_ne(&row).unwrap();
        prop_assert!((0.0..=1.0).contains(&ne));
        let mut rotated = row.clone();
        let len = rotated.len();
        rotated.rotate_left(shift % len);
        prop_assert!((phone_ne(&rotated).unwrap() - ne).abs() < 1e-12);
        let mut reversed = row;
        reversed.reverse();
        prop_assert!((phone_ne(&reversed).unwrap() - ne).abs() < 1e-12);
    }

    #[test]
    fn ne_mixing_is_monotone(n in 2usize..20, hot in 0usize..20) {
        let hot = hot % n;
        let mut last = -1.0;
        for step in 0..=50 {
            let lambda = step as f64 / 50.0;
            let row: Vec<f64> = (0..n)
                .map(|j| lambda / n as f64 + (1.0 - lambda) * if j == hot { 1.0 } else { 0.0 })
                .collect();
            let ne = phone_ne(&row).unwrap();
            prop_assert!(ne >= last - 1e-12, "lambda {lambda}: {ne} < {last}");
            last = ne;
        }
        prop_assert!((last - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ne_extremes_only_at_uniform_and_one_hot(row in distribution(8)) {
        let ne = phone_ne(&row).unwrap();
        let n = row.len();
        let uniform = row.iter().all(|&p| (p - 1.0 / n as f64).abs() < 1e-12);
        let one_hot = row.iter().filter(|&&p| p > 1e-12).count() == 1;
        if n > 1 && !uniform {
            prop_assert!(ne < 1.0 - 1e-9);
        }
        if n > 1 && !one_hot {
            prop_assert!(ne > 1e-9);
        }
    }

    #[test]
    fn sentence_ane_is_mean_of_phones(record in record_strategy()) {
        let report = sentence_ane(record.id(), record.matrix()).unwrap();
        let mean = report.per_phone.iter().sum::<f64>() / report.per_phone.len() as f64;
        prop_assert!((report.sentence_ane - mean).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&report.sentence_ane));
    }

    #[test]
    fn averaging_algebra(seed in any::<u64>(), k in 1usize..=5, rot in 0usize..5) {
        let mut rng = common::rng(seed);
        let corpus: Vec<AlignmentRecord> = (0..3)
            .map(|s| common::random_record(&mut rng, &format!("s{s}"), 4, 3))
            .collect();
        let identical = RunSet::new((0..k).map(|i| Run::new(i.to_string(), corpus.clone())).collect()).unwrap();
        prop_assert_eq!(average_runs(&identical).unwrap(), corpus.clone());

        let runs: Vec<Run> = (0..k)
            .map(|i| {
                let recs = (0..3)
                    .map(|s| common::random_record(&mut rng, &format!("s{s}"), 4, 3))
                    .collect();
                Run::new(i.to_string(), recs)
            })
            .collect();
        let mut permuted = runs.clone();
        permuted.rotate_left(rot % k);
        permuted.reverse();
        let a = average_runs(&RunSet::new(runs).unwrap()).unwrap();
        let b = average_runs(&RunSet::new(permuted).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn segmentation_tiles_and_peaks_are_constant(record in record_strategy()) {
        let seg = segment(&record).unwrap();
        prop_assert!(seg.check_tiling().is_ok());
        prop_assert_eq!(seg.phone_count(), record.matrix().n_rows());
        let starts: Vec<usize> = seg.tokens.iter().skip(1).map(|t| t.start).collect();
        prop_assert_eq!(seg.boundaries(), starts);
        for token in &seg.tokens {
            for i in token.span() {
                let row = record.matrix().row(i);
                let max = row.iter().cloned().fold(f64::MIN, f64::max);
                let first_max = row.iter().position(|&p| p == max).unwrap();
                prop_assert_eq!(first_max, token.aligned_word_index);
            }
            prop_assert!((0.0..=1.0).contains(&token.token_ane));
        }
    }

    #[test]
    fn segmentation_is_scale_invariant(record in record_strategy(), scales in prop::collection::vec(0.5f64..2.0, 10)) {
        let rows: Vec<Vec<f64>> = record
            .matrix()
            .rows()
            .zip(scales.iter().cycle())
            .map(|(row, c)| {
                let scaled: Vec<f64> = row.iter().map(|p| p * c).collect();
                let sum: f64 = scaled.iter().sum();
                scaled.iter().map(|p| p / sum).collect()
            })
            .collect();
        let rescaled = AlignmentRecord::new(record.pair().clone(), AlignmentMatrix::from_rows(rows).unwrap()).unwrap();
        let a = segment(&record).unwrap();
        let b = segment(&rescaled).unwrap();
        prop_assert_eq!(a.boundaries(), b.boundaries());
        let words = |s: &alignseg::Segmentation| s.tokens.iter().map(|t| t.aligned_word_index).collect::<Vec<_>>();
        prop_assert_eq!(words(&a), words(&b));
    }

    #[test]
    fn one_hot_rows_recover_gold(lengths in prop::collection::vec(1usize..5, 1..8), cols in prop::collection::vec(0usize..3, 8)) {
        // consecutive words on the same column are separated by silence
        let mut target = Vec::new();
        let mut rows = Vec::new();
        let mut words = Vec::new();
        for (k, &len) in lengths.iter().enumerate() {
            if k > 0 && cols[k] == cols[k - 1] {
                target.push(TargetSymbol::Silence);
            }
            let word: Vec<String> = (0..len).map(|i| format!("{k}_{i}")).collect();
            for phone in &word {
                target.push(TargetSymbol::Phone(phone.clone()));
                let mut row = vec![0.0; 3];
                row[cols[k]] = 1.0;
                rows.push(row);
            }
            words.push(word);
        }
        let pair = SentencePair::new("g", vec!["a".into(), "b".into(), "c".into()], target).unwrap();
        let record = AlignmentRecord::new(pair, AlignmentMatrix::from_rows(rows).unwrap()).unwrap();
        let seg = segment(&record).unwrap();
        let found: Vec<Vec<String>> = seg.tokens.iter().map(|t| t.phones.clone()).collect();
        prop_assert_eq!(found, words);
    }

    #[test]
    fn run_file_round_trip(records in prop::collection::vec(record_strategy(), 0..5)) {
        let mut unique = records;
        unique.dedup_by(|a, b| a.id() == b.id());
        let mut seen = BTreeSet::new();
        unique.retain(|r| seen.insert(r.id().to_owned()));
        let mut buf = Vec::new();
        write_run(&mut buf, &unique, "<sil>").unwrap();
        let back = read_run(buf.as_slice(), &LoadOptions::default()).unwrap();
        prop_assert_eq!(back.len(), unique.len());
        for (a, b) in unique.iter().zip(&back) {
            prop_assert_eq!(a.pair(), b.pair());
            for (ra, rb) in a.matrix().rows().zip(b.matrix().rows()) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((x - y).abs() <= 5e-7);
                }
            }
        }
    }

    #[test]
    fn segmentation_file_round_trip(records in prop::collection::vec(record_strategy(), 1..5)) {
        let segs = segment_corpus(&records).unwrap();
        let mut buf = Vec::new();
        write_segmentation(&mut buf, &segs).unwrap();
        let back = read_segmentation(buf.as_slice()).unwrap();
        let mut sorted = segs.clone();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        prop_assert_eq!(back.len(), sorted.len());
        for (a, b) in sorted.iter().zip(&back) {
            prop_assert_eq!(&a.id, &b.id);
            prop_assert_eq!(a.boundaries(), b.boundaries());
            for (ta, tb) in a.tokens.iter().zip(&b.tokens) {
                prop_assert_eq!(&ta.phones, &tb.phones);
                prop_assert_eq!(&ta.aligned_word, &tb.aligned_word);
                prop_assert_eq!(ta.aligned_word_index, tb.aligned_word_index);
                prop_assert!((ta.token_ane - tb.token_ane).abs() <= 5e-7);
            }
        }
    }

    #[test]
    fn lexicon_conservation_and_order(seed in any::<u64>(), rot in 0usize..20) {
        let cfg = SynthConfig {
            seed,
            n_sentences: 20,
            source_vocab: 15,
            temperature: 1.0,
            distractor_noise: 0.5,
            ..SynthConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        let segs = segment_corpus(&corpus.records).unwrap();
        let lex = build_lexicon(&segs);
        let tokens: usize = segs.iter().map(|s| s.tokens.len()).sum();
        prop_assert_eq!(lex.types.iter().map(|t| t.count).sum::<usize>(), tokens);
        prop_assert_eq!(lex.pairs.iter().map(|p| p.count).sum::<usize>(), tokens);
        for t in &lex.types {
            let pairs: Vec<_> = lex.pairs.iter().filter(|p| p.type_form == t.type_form).collect();
            let count: usize = pairs.iter().map(|p| p.count).sum();
            prop_assert_eq!(count, t.count);
            let weighted = pairs.iter().map(|p| p.alignment_ane * p.count as f64).sum::<f64>() / count as f64;
            prop_assert!((weighted - t.type_ane).abs() < 1e-9);
        }

        // order of sentences must not matter
        let mut shuffled = segs.clone();
        shuffled.rotate_left(rot % segs.len());
        shuffled.reverse();
        prop_assert_eq!(build_lexicon(&shuffled), lex.clone());
        let mut pairs = lex.pairs.clone();
        pairs.reverse();
        prop_assert_eq!(
            rank_types(&pairs, Direction::Descending, 7),
            rank_types(&lex.pairs, Direction::Descending, 7)
        );

        // filter monotonicity
        let mut previous: BTreeSet<Vec<String>> = BTreeSet::new();
        for step in 0..=20 {
            let kept = filter_by_ane(&lex.pairs, Threshold::Value(step as f64 / 20.0), FilterRule::AnyPair).unwrap();
            prop_assert!(previous.is_subset(&kept));
            previous = kept;
        }
        prop_assert_eq!(previous, filter_by_ane(&lex.pairs, Threshold::All, FilterRule::AnyPair).unwrap());
    }

    #[test]
    fn boundary_scores_match_brute_force(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (hyp, gold) = common::random_scoring_case(&mut rng, 10, 12);
        let score = boundary_prf(&hyp, &gold).unwrap();
        let (hits, hyp_total, gold_total, prf) = common::brute_force_boundary(&hyp, &gold);
        prop_assert_eq!((score.counts.hits, score.counts.hyp_total, score.counts.gold_total), (hits, hyp_total, gold_total));
        prop_assert_eq!(score.prf, prf);
        prop_assert!((score.prf.f_score - harmonic_mean(score.prf.precision, score.prf.recall)).abs() < 1e-9);
    }

    #[test]
    fn pearson_affine_behaviour(
        xs in prop::collection::vec(-10.0f64..10.0, 3..20),
        noise in prop::collection::vec(-1.0f64..1.0, 20),
        a in 0.1f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| 0.5 * x + e).collect();
        let Ok(r) = pearson(&xs, &ys) else { return Ok(()); };
        prop_assert!((-1.0..=1.0).contains(&r));
        let shifted: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        prop_assert!((pearson(&shifted, &ys).unwrap() - r).abs() < 1e-9);
        let flipped: Vec<f64> = ys.iter().map(|y| -a * y).collect();
        prop_assert!((pearson(&xs, &flipped).unwrap() + r).abs() < 1e-9);
    }

    #[test]
    fn select_head_is_argmin(seed in any::<u64>(), heads in 1usize..6) {
        let mut rng = common::rng(seed);
        let runs: Vec<Run> = (0..heads)
            .map(|h| {
                let recs = (0..3).map(|s| common::random_record(&mut rng, &format!("s{s}"), 3, 4)).collect();
                Run::new(h.to_string(), recs)
            })
            .collect();
        let scores: Vec<f64> = runs.iter().map(|r| corpus_ane(&r.records).unwrap()).collect();
        let (index, value) = select_head(&RunSet::new(runs).unwrap()).unwrap();
        prop_assert_eq!(index, common::linear_argmin(&scores));
        prop_assert_eq!(value, scores[index]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn synth_is_deterministic_and_gold_is_valid(seed in any::<u64>(), silence in 0.0f64..1.0) {
        let cfg = SynthConfig {
            seed,
            n_sentences: 30,
            source_vocab: 10,
            temperature: 0.5,
            distractor_noise: 0.2,
            silence_prob: silence,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let mut buf_a = Vec::new();
        write_run(&mut buf_a, &a.records, "<sil>").unwrap();
        let mut buf_b = Vec::new();
        write_run(&mut buf_b, &generate(&cfg).unwrap().records, "<sil>").unwrap();
        prop_assert_eq!(buf_a, buf_b);
        for r in &a.records {
            let words = &a.gold[r.id()];
            let spelled: Vec<&str> = words.iter().flatten().map(String::as_str).collect();
            let phones: Vec<&str> = r.pair().phones().collect();
            prop_assert_eq!(spelled, phones);
        }
    }

    #[test]
    fn synth_ane_grows_with_temperature(seed in any::<u64>()) {
        let cfg = SynthConfig { seed, n_sentences: 40, ..SynthConfig::default() };
        let (runs, gold, _) = temperature_sweep(&cfg, &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
        let anes: Vec<f64> = runs.runs().iter().map(|r| corpus_ane(&r.records).unwrap()).collect();
        prop_assert_eq!(anes[0], 0.0);
        for w in anes.windows(2) {
            prop_assert!(w[1] > w[0], "{anes:?}");
        }
        // without noise the peaks never move
        for run in runs.runs() {
            let f = boundary_prf(&segment_corpus(&run.records).unwrap(), &gold).unwrap().prf.f_score;
            prop_assert_eq!(f, 1.0);
        }
    }
}

#[test]
fn boundary_f_degrades_with_temperature() {
    let cfg = SynthConfig {
        seed: 99,
        n_sentences: 300,
        distractor_noise: 0.5,
        ..SynthConfig::default()
    };
    let (runs, gold, _) = temperature_sweep(&cfg, &[0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
    let fs: Vec<f64> = runs
        .runs()
        .iter()
        .map(|r| boundary_prf(&segment_corpus(&r.records).unwrap(), &gold).unwrap().prf.f_score)
        .collect();
    assert_eq!(fs[0], 1.0);
    for w in fs.windows(2) {
        assert!(w[1] <= w[0], "{fs:?}");
    }
}

#[test]
fn large_temperature_approaches_uniform() {
    let cfg = SynthConfig {
        seed: 5,
        n_sentences: 50,
        temperature: 1e6,
        ..SynthConfig::default()
    };
    let ane = corpus_ane(&generate(&cfg).unwrap().records).unwrap();
    assert!(ane > 1.0 - 1e-4, "{ane}");
}

#[test]
fn sweep_recall_non_decreasing() {
    let cfg = SynthConfig {
        seed: 3,
        n_sentences: 200,
        temperature: 1.0,
        distractor_noise: 0.4,
        ..SynthConfig::default()
    };
    let corpus = generate(&cfg).unwrap();
    let lex = build_lexicon(&segment_corpus(&corpus.records).unwrap());
    let grid: Vec<Threshold> = (1..=9)
        .map(|k| Threshold::Value(k as f64 / 10.0))
        .chain([Threshold::All])
        .collect();
    let rows = ane_sweep(&lex.pairs, &corpus.lexicon, &grid, FilterRule::AnyPair).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].recall >= w[0].recall);
    }
    let all = type_prf(
        &filter_by_ane(&lex.pairs, Threshold::All, FilterRule::AnyPair).unwrap(),
        &corpus.lexicon,
    );
    assert_eq!(rows[9].recall, 100.0 * all.recall);
}
