mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use polyseg::aligner::{log_likelihood, posterior_matrix, train_ibm1, train_ibm1_traced, AlignerConfig};
use polyseg::eval::{boundary_prf, token_prf, type_prf};
use polyseg::multilingual::{required_votes, vote};
use polyseg::segmenter::segment_corpus;
use polyseg::{segment_from_matrix, PrfScore, VoteConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(iterations: usize, use_null: bool) -> AlignerConfig {
    AlignerConfig {
        iterations,
        convergence_epsilon: 0.0,
        use_null,
        ..AlignerConfig::default()
    }
}

#[test]
fn em_rounds_match_explicit_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let n = rng.gen_range(1..8);
        let corpus = random_bitext(&mut rng, n, 5);
        let use_null = case % 2 == 0;
        let mut oracle = OracleIbm1::init(&corpus, "src", use_null, 1e-12);
        for rounds in 1..=3 {
            oracle.step(&corpus, "src", use_null);
            let table = train_ibm1::<f64>(&corpus, "src", &cfg(rounds, use_null)).unwrap();
            for e in &oracle.sources {
                for f in &oracle.targets {
                    let (got, want) = (table.prob(e, f), oracle.p(e, f));
                    assert!((got - want).abs() < 1e-12, "case {case} round {rounds} t({f}|{e}) {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn log_likelihood_matches_alignment_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..30 {
        let n = rng.gen_range(1..6);
        let corpus = random_bitext(&mut rng, n, 4);
        let use_null = case % 2 == 1;
        let mut oracle = OracleIbm1::init(&corpus, "src", use_null, 1e-12);
        oracle.step(&corpus, "src", use_null);
        oracle.step(&corpus, "src", use_null);
        let c = cfg(2, use_null);
        let training = train_ibm1_traced::<f64>(&corpus, "src", &c).unwrap();
        let want = oracle.brute_log_likelihood(&corpus, "src", use_null);
        let got = log_likelihood(&training.table, &corpus, "src", &c).unwrap();
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
        let traced = *training.log_likelihoods.last().unwrap();
        assert!((traced - want).abs() < 1e-9 * want.abs().max(1.0));
    }
}

#[test]
fn posterior_rows_are_normalized_table_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let corpus = random_bitext(&mut rng, 10, 5);
    let c = cfg(4, true);
    let table = train_ibm1::<f64>(&corpus, "src", &c).unwrap();
    for u in &corpus.utterances {
        let m = posterior_matrix(&table, u, "src", &c).unwrap();
        let src = source_side(u, "src", true);
        assert_eq!(m.source_tokens(), &src[..]);
        for (t, f) in u.phonemes.iter().enumerate() {
            let z: f64 = src.iter().map(|e| table.prob(e, f)).sum();
            for (j, e) in src.iter().enumerate() {
                assert!((m.row(t)[j] - table.prob(e, f) / z).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn crib_posterior_approaches_identity() {
    let corpus = crib();
    let c = AlignerConfig {
        iterations: 5000,
        convergence_epsilon: 1e-12,
        use_null: false,
        ..AlignerConfig::default()
    };
    let table = train_ibm1::<f64>(&corpus, "src", &c).unwrap();
    let m = posterior_matrix(&table, &corpus.utterances[1], "src", &c).unwrap();
    assert!((m.row(0)[0] - 1.0).abs() < 1e-3 && (m.row(1)[1] - 1.0).abs() < 1e-3);
    let seg = segment_from_matrix(&m);
    assert_eq!(seg.boundaries, BTreeSet::from([1]));
    assert_eq!(seg.words(), vec![Some("a".to_string()), Some("b".to_string())]);
}

#[test]
fn segmenter_matches_run_grouping_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let matrices: Vec<_> = (0..2000).map(|i| random_matrix(&mut rng, &format!("m{i}"), 12)).collect();
    let runs = segment_corpus(&matrices).unwrap();
    for (m, (seg, _)) in matrices.iter().zip(&runs) {
        let (bounds, words) = oracle_segment(m);
        assert_eq!(seg.boundaries, bounds);
        assert_eq!(seg.words(), words);
        assert_eq!(seg.units().flatten().cloned().collect::<Vec<_>>(), m.target_phonemes());
        assert_eq!(seg, &segment_from_matrix(m));
    }
}

#[test]
fn vote_counts_match_subset_enumeration() {
    // Three models over length-6 utterances: a boundary survives iff at
    // least `required` of them propose it.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let langs = s(&["l0", "l1", "l2"]);
    for _ in 0..200 {
        let sets: Vec<BTreeSet<usize>> = (0..3).map(|_| random_boundaries(&mut rng, 6, 0.4)).collect();
        let map: BTreeMap<String, _> = langs
            .iter()
            .zip(&sets)
            .map(|(l, b)| (l.clone(), seg_of("u", l, 6, b.clone())))
            .collect();
        for (t, need) in [(0.0, 1), (0.3, 1), (0.34, 2), (0.5, 2), (2.0 / 3.0, 2), (0.67, 3), (1.0, 3)] {
            assert_eq!(required_votes(t, 3), need, "T={t}");
            let want: BTreeSet<usize> = (1..6)
                .filter(|b| sets.iter().filter(|s| s.contains(b)).count() >= need)
                .collect();
            let got = vote(&map, &VoteConfig::new(t, langs.clone()).unwrap()).unwrap();
            assert_eq!(got.boundaries, want, "T={t}");
        }
    }
}

#[test]
fn scores_match_set_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut golds = Vec::new();
    let mut hyps = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..50 {
        let id = format!("u{i}");
        let len = rng.gen_range(1..15);
        let g = random_boundaries(&mut rng, len, 0.3);
        let h = random_boundaries(&mut rng, len, 0.3);
        hyps.push(seg_of(&id, "x", len, h.clone()));
        pairs.push((h, g.clone()));
        golds.push((id, len, g));
    }
    let gold = gold_corpus(&golds);
    let (hits, hyp, gold_n) = oracle_boundary_counts(&pairs);
    let got: PrfScore = boundary_prf(&hyps, &gold).unwrap();
    assert_eq!((got.hits, got.hyp_count, got.gold_count), (hits, hyp, gold_n));
    assert!((got.precision - hits as f64 / hyp as f64).abs() < 1e-15);
    assert!((got.recall - hits as f64 / gold_n as f64).abs() < 1e-15);

    // Tokens are (utterance, start, end) spans; types are distinct strings.
    let span_set = |b: &BTreeSet<usize>, len: usize, id: &str| -> BTreeSet<(String, usize, usize)> {
        let cuts: Vec<usize> = std::iter::once(0).chain(b.iter().copied()).chain([len]).collect();
        cuts.windows(2).map(|w| (id.to_string(), w[0], w[1])).collect()
    };
    let (mut th, mut tp, mut tg) = (0, 0, 0);
    for ((id, len, g), h) in golds.iter().zip(&hyps) {
        let a = span_set(&h.boundaries, *len, id);
        let b = span_set(g, *len, id);
        th += a.intersection(&b).count();
        tp += a.len();
        tg += b.len();
    }
    let tok: PrfScore = token_prf(&hyps, &gold).unwrap();
    assert_eq!((tok.hits, tok.hyp_count, tok.gold_count), (th, tp, tg));
    let ty: PrfScore = type_prf(&hyps, &gold).unwrap();
    let hyp_types: BTreeSet<Vec<String>> = hyps.iter().flat_map(|h| h.units().map(|u| u.to_vec())).collect();
    let gold_types = gold.gold_types();
    assert_eq!(ty.hits, hyp_types.intersection(&gold_types).count());
    assert_eq!((ty.hyp_count, ty.gold_count), (hyp_types.len(), gold_types.len()));
}
