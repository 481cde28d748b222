//! Acceptance criteria for the toolkit, each a function returning an
//! [`Outcome`]. The `acceptance` test target runs them all. The real-corpus
//! checks run only when `POLYSEG_MBOSHI_CORPUS` points at a corpus file.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use common::*;
use polyseg::aligner::{posterior_matrix, train_ibm1, train_ibm1_traced, AlignerConfig};
use polyseg::corpus::{corpus_stats, load_corpus, CorpusFormat};
use polyseg::eval::{boundary_prf, cross_model_overlap};
use polyseg::multilingual::{ane_select, vote};
use polyseg::pipeline::{run_pipeline, PipelineConfig};
use polyseg::synth::{generate_synthetic, SyntheticSpec};
use polyseg::{ane, segment_from_matrix, AlignmentMatrix, AneScore, PipelineOutput, PrfScore, VoteConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn em_crib() -> Outcome {
    let cfg = AlignerConfig {
        iterations: 50,
        convergence_epsilon: 0.0,
        use_null: false,
        ..AlignerConfig::default()
    };
    let start = Instant::now();
    let training = train_ibm1_traced::<f64>(&crib(), "src", &cfg).unwrap();
    let elapsed = start.elapsed();
    let (txa, tyb) = (training.table.prob("a", "x"), training.table.prob("b", "y"));
    let monotone = training.log_likelihoods.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    check(
        txa >= 0.999 && tyb >= 0.999 && monotone && elapsed < Duration::from_secs(1),
        format!(
            "t(x|a)={txa:.6} t(y|b)={tyb:.6} after {} rounds (need both >= 0.999); LL non-decreasing: {monotone}; {}",
            training.rounds(),
            secs(elapsed)
        ),
    )
}

fn posterior_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut count, mut worst) = (0usize, 0f64);
    for batch in 0..100 {
        let use_null = batch % 2 == 0;
        let cfg = AlignerConfig {
            iterations: rng.gen_range(1..8),
            use_null,
            ..AlignerConfig::default()
        };
        let corpus = random_bitext(&mut rng, 12, 8);
        let table = train_ibm1::<f64>(&corpus, "src", &cfg).unwrap();
        // Half seen utterances, half fresh ones with unseen words.
        let probe = random_bitext(&mut rng, 88, 12);
        for u in corpus.utterances.iter().chain(&probe.utterances) {
            let m = posterior_matrix(&table, u, "src", &cfg).unwrap();
            for row in m.rows() {
                worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
            }
            count += 1;
        }
    }
    check(
        count == 10_000 && worst <= 1e-9,
        format!("{count} matrices, max |row sum - 1| = {worst:.3e} (tolerance 1e-9)"),
    )
}

fn segmenter_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let matrices: Vec<AlignmentMatrix> = (0..10_000).map(|i| random_matrix(&mut rng, &format!("m{i}"), 12)).collect();
    let start = Instant::now();
    let mut mismatches = 0;
    let mut broken = 0;
    for m in &matrices {
        let seg = segment_from_matrix(m);
        let (bounds, words) = oracle_segment(m);
        if seg.boundaries != bounds || seg.words() != words {
            mismatches += 1;
        }
        if seg.units().flatten().ne(m.target_phonemes().iter()) {
            broken += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && broken == 0 && elapsed < Duration::from_secs(10),
        format!(
            "{} matrices: {mismatches} oracle mismatches, {broken} round-trip failures, {}",
            matrices.len(),
            secs(elapsed)
        ),
    )
}

fn ane_anchors() -> Outcome {
    let mut uniform_err = 0f64;
    for s in 2..=12 {
        for l in 1..=12 {
            let m = AlignmentMatrix::new(
                "u",
                "xx",
                (0..s).map(|i| format!("w{i}")).collect(),
                (0..l).map(|i| format!("p{i}")).collect(),
                vec![vec![1.0 / s as f64; s]; l],
            )
            .unwrap();
            uniform_err = uniform_err.max((ane(&m).value - 1.0).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut hot_err = 0f64;
    for _ in 0..500 {
        let (s, l) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let rows = (0..l)
            .map(|_| {
                let c = rng.gen_range(0..s);
                (0..s).map(|i| if i == c { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        let m = AlignmentMatrix::new(
            "u",
            "xx",
            (0..s).map(|i| format!("w{i}")).collect(),
            (0..l).map(|i| format!("p{i}")).collect(),
            rows,
        )
        .unwrap();
        hot_err = hot_err.max(ane(&m).value.abs());
    }
    let half = AlignmentMatrix::new("u", "xx", s(&["a", "b", "c", "d"]), s(&["x"]), vec![vec![0.5, 0.5, 0.0, 0.0]]).unwrap();
    let half_v = ane(&half).value;
    check(
        uniform_err <= 1e-9 && hot_err <= 1e-12 && (half_v - 0.5).abs() <= 1e-9,
        format!("uniform max err {uniform_err:.1e}, one-hot max {hot_err:.1e}, [0.5,0.5,0,0] -> {half_v}"),
    )
}

const GRID: [f64; 7] = [0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0];

fn voting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let langs: Vec<String> = (0..5).map(|i| format!("l{i}")).collect();
    let mut problems = Vec::new();
    for fixture in 0..300 {
        let utts: Vec<(String, usize)> = (0..6).map(|i| (format!("u{i}"), rng.gen_range(1..20))).collect();
        let gold: Vec<_> = utts
            .iter()
            .map(|(id, len)| (id.clone(), *len, random_boundaries(&mut rng, *len, 0.3)))
            .collect();
        let gold = gold_corpus(&gold);
        let models: Vec<BTreeMap<String, _>> = utts
            .iter()
            .map(|(id, len)| {
                langs
                    .iter()
                    .map(|l| {
                        let p = rng.gen_range(0.1..0.7);
                        (l.clone(), seg_of(id, l, *len, random_boundaries(&mut rng, *len, p)))
                    })
                    .collect()
            })
            .collect();
        let mut prev: Option<(Vec<BTreeSet<usize>>, f64)> = None;
        for t in GRID {
            let cfg = VoteConfig::new(t, langs.clone()).unwrap();
            let voted: Vec<_> = models.iter().map(|m| vote(m, &cfg).unwrap()).collect();
            let sets: Vec<BTreeSet<usize>> = voted.iter().map(|v| v.boundaries.clone()).collect();
            for (m, got) in models.iter().zip(&sets) {
                let union: BTreeSet<usize> = m.values().flat_map(|s| s.boundaries.iter().copied()).collect();
                let inter: BTreeSet<usize> =
                    union.iter().copied().filter(|b| m.values().all(|s| s.boundaries.contains(b))).collect();
                if t == 0.0 && *got != union {
                    problems.push(format!("fixture {fixture}: vote(0) is not the union"));
                }
                if t == 1.0 && *got != inter {
                    problems.push(format!("fixture {fixture}: vote(1) is not the intersection"));
                }
            }
            let recall = boundary_prf::<f64>(&voted, &gold).unwrap().recall;
            if let Some((p_sets, p_recall)) = &prev {
                if sets.iter().zip(p_sets).any(|(a, b)| !a.is_subset(b)) {
                    problems.push(format!("fixture {fixture}: sets not nested at T={t}"));
                }
                if recall > *p_recall {
                    problems.push(format!("fixture {fixture}: recall rose at T={t}"));
                }
            }
            prev = Some((sets, recall));
        }
    }
    check(
        problems.is_empty(),
        format!(
            "300 five-model fixtures over T in {GRID:?}: {} violations{}",
            problems.len(),
            problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default()
        ),
    )
}

fn selection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    let mut ties = 0;
    for i in 0..2000 {
        let n = rng.gen_range(1..=5);
        let mut priority: Vec<String> = ["fr", "en", "pt", "es", "de"][..n].iter().map(|x| x.to_string()).collect();
        priority.shuffle(&mut rng);
        let id = format!("u{i}");
        let len = rng.gen_range(1..15);
        let input: BTreeMap<String, _> = priority
            .iter()
            .map(|l| {
                let seg = seg_of(&id, l, len, random_boundaries(&mut rng, len, 0.4));
                let value = rng.gen_range(0..4) as f64 / 8.0;
                (l.clone(), (seg, AneScore { utterance_id: id.clone(), language: l.clone(), value }))
            })
            .collect();
        let min = input.values().map(|(_, a)| a.value).fold(f64::INFINITY, f64::min);
        let tied: Vec<&String> = priority.iter().filter(|l| input[*l].1.value == min).collect();
        if tied.len() > 1 {
            ties += 1;
        }
        let want = tied[0];
        let got = ane_select(&input, &priority).unwrap();
        if &got.chosen_language != want || got.segmentation.boundaries != input[want].0.boundaries {
            bad += 1;
        }
    }
    check(bad == 0, format!("2000 fixtures ({ties} with ANE ties): {bad} wrong choices"))
}

fn synthetic_end_to_end() -> Outcome {
    let args = [
        "pipeline",
        "--synthetic",
        "seed=7",
        "vocab=20",
        "sentences=200",
        "langs=3",
        "--vote",
        "0.5",
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let start = Instant::now();
    let code = polyseg_cli::run_main(std::iter::once("polyseg").chain(args), &mut out, &mut err);
    let elapsed = start.elapsed();
    if code != 0 {
        return Outcome::Fail(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    let report = String::from_utf8(out).unwrap();
    let scores: BTreeMap<&str, (f64, f64, f64)> = report
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0], (f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap()))
        })
        .collect();
    let syn = generate_synthetic(&SyntheticSpec::parse("seed=7 vocab=20 sentences=200 langs=3").unwrap()).unwrap();
    let relabel = syn.relabel_languages();
    let singles: Vec<String> = syn.corpus.languages.iter().map(|l| format!("boundary:{l}")).collect();
    let relabel_f = scores[format!("boundary:{}", relabel[0]).as_str()].2;
    let union = scores["boundary:vote(T=0)"];
    let inter = scores["boundary:vote(T=1)"];
    let recall_ok = singles.iter().all(|k| union.1 >= scores[k.as_str()].1);
    let precision_ok = singles.iter().all(|k| inter.0 >= scores[k.as_str()].0);
    check(
        elapsed < Duration::from_secs(30) && relabel_f >= 0.90 && recall_ok && precision_ok,
        format!(
            "{}: {} F={relabel_f:.4} (need >= 0.90); vote(0) R={:.4} >= singles: {recall_ok}; vote(1) P={:.4} >= singles: {precision_ok}",
            secs(elapsed),
            relabel[0],
            union.1,
            inter.0
        ),
    )
}

fn scoring_arithmetic() -> Outcome {
    let gold = gold_corpus(&[("u".to_string(), 6, BTreeSet::from([2, 3]))]);
    let hyp = [seg_of("u", "x", 6, BTreeSet::from([2, 4]))];
    let same = [seg_of("u", "x", 6, BTreeSet::from([2, 3]))];
    let a: PrfScore = boundary_prf(&hyp, &gold).unwrap();
    let b: PrfScore = boundary_prf(&same, &gold).unwrap();
    check(
        a.precision == 0.5 && a.recall == 0.5 && a.f1 == 0.5 && b.precision == 1.0 && b.recall == 1.0 && b.f1 == 1.0,
        format!(
            "hyp {{2,4}} vs gold {{2,3}}: P={} R={} F={}; hyp = gold: P={} R={} F={}",
            a.precision, a.recall, a.f1, b.precision, b.recall, b.f1
        ),
    )
}

fn real_corpus() -> Outcome {
    let Ok(path) = std::env::var("POLYSEG_MBOSHI_CORPUS") else {
        return Outcome::Skip("set POLYSEG_MBOSHI_CORPUS to a corpus file to run".into());
    };
    let corpus = match load_corpus(&path, CorpusFormat::from_path(path.as_ref())) {
        Ok(c) => c,
        Err(e) => return Outcome::Fail(format!("cannot load {path}: {e}")),
    };
    let types: BTreeMap<String, u64> = corpus
        .languages
        .iter()
        .map(|l| (l.clone(), corpus_stats(&corpus, l).unwrap().type_count))
        .collect();
    let smallest = types.iter().min_by_key(|(_, c)| **c).map(|(l, _)| l.clone()).unwrap_or_default();
    let cfg = PipelineConfig {
        lexicon_top: 50,
        ..PipelineConfig::default()
    };
    let out: PipelineOutput = match run_pipeline(&corpus, &cfg) {
        Ok(o) => o,
        Err(e) => return Outcome::Fail(format!("pipeline failed: {e}")),
    };
    let lexicons: BTreeMap<_, _> = out.runs.iter().map(|r| (r.language.clone(), r.lexicon.clone())).collect();
    let common = cross_model_overlap(&lexicons, 50).all;
    check(
        corpus.len() == 5130 && smallest == "en" && corpus.languages.len() == 5 && !common.is_empty(),
        format!(
            "{} utterances (need 5130); type counts {types:?}, smallest {smallest} (need en); {} types common to all top-50 lexicons",
            corpus.len(),
            common.len()
        ),
    )
}

pub type Criterion = (&'static str, fn() -> Outcome);

pub const CRITERIA: [Criterion; 9] = [
    ("em-crib-convergence", em_crib),
    ("posterior-validity", posterior_validity),
    ("segmenter-oracle", segmenter_oracle),
    ("ane-anchors", ane_anchors),
    ("voting-endpoints-monotonicity", voting),
    ("ane-selection-contract", selection),
    ("synthetic-end-to-end", synthetic_end_to_end),
    ("scoring-arithmetic", scoring_arithmetic),
    ("real-corpus", real_corpus),
];
