//! Independent reference implementations and random fixtures shared by the
//! integration suites. Nothing here calls the code under test except to
//! build inputs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use polyseg::corpus::{Corpus, Utterance};
use polyseg::segmenter::{Origin, Segmentation};
use polyseg::{AlignmentMatrix, NULL_TOKEN};
use rand::Rng;

pub fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Bitext with one translation language `src`; `pairs` are (source words,
/// target phonemes).
pub fn bitext(pairs: &[(Vec<String>, Vec<String>)]) -> Corpus {
    let utts = pairs
        .iter()
        .enumerate()
        .map(|(i, (src, tgt))| {
            Utterance::new(
                format!("u{i:03}"),
                tgt.clone(),
                BTreeMap::from([("src".to_string(), src.clone())]),
                None,
            )
            .unwrap()
        })
        .collect();
    Corpus::new(utts, vec!["src".to_string()]).unwrap()
}

pub fn crib() -> Corpus {
    bitext(&[(s(&["a"]), s(&["x"])), (s(&["a", "b"]), s(&["x", "y"]))])
}

/// Random bitext over small vocabularies so that words recur.
pub fn random_bitext<R: Rng>(rng: &mut R, sentences: usize, max_len: usize) -> Corpus {
    let pairs: Vec<_> = (0..sentences)
        .map(|_| {
            let ls = rng.gen_range(1..=max_len);
            let lt = rng.gen_range(1..=max_len);
            let src = (0..ls).map(|_| format!("w{}", rng.gen_range(0..5))).collect();
            let tgt = (0..lt).map(|_| format!("p{}", rng.gen_range(0..6))).collect();
            (src, tgt)
        })
        .collect();
    bitext(&pairs)
}

pub fn source_side(utt: &Utterance, lang: &str, use_null: bool) -> Vec<String> {
    let mut v = Vec::new();
    if use_null {
        v.push(NULL_TOKEN.to_string());
    }
    v.extend(utt.translations[lang].iter().cloned());
    v
}

/// Textbook IBM Model 1 with a probability floor, written with nested maps.
pub struct OracleIbm1 {
    pub t: HashMap<(String, String), f64>,
    pub targets: BTreeSet<String>,
    pub sources: BTreeSet<String>,
    pub floor: f64,
}

impl OracleIbm1 {
    /// Uniform over co-occurring targets, then floored and renormalized over
    /// the full target vocabulary.
    pub fn init(corpus: &Corpus, lang: &str, use_null: bool, floor: f64) -> Self {
        let mut co: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for u in &corpus.utterances {
            for e in source_side(u, lang, use_null) {
                for f in &u.phonemes {
                    co.entry(e.clone()).or_default().insert(f.clone());
                }
            }
            targets.extend(u.phonemes.iter().cloned());
        }
        let mut t = HashMap::new();
        for (e, fs) in &co {
            for f in &targets {
                let v = if fs.contains(f) { 1.0 / fs.len() as f64 } else { 0.0 };
                t.insert((e.clone(), f.clone()), v);
            }
        }
        let mut o = OracleIbm1 {
            t,
            targets,
            sources: co.keys().cloned().collect(),
            floor,
        };
        o.floor_renormalize();
        o
    }

    fn floor_renormalize(&mut self) {
        for e in self.sources.clone() {
            let mut z = 0.0;
            for f in &self.targets {
                let v = self.t.get_mut(&(e.clone(), f.clone())).unwrap();
                *v = v.max(self.floor);
                z += *v;
            }
            for f in &self.targets {
                *self.t.get_mut(&(e.clone(), f.clone())).unwrap() /= z;
            }
        }
    }

    pub fn p(&self, e: &str, f: &str) -> f64 {
        *self.t.get(&(e.to_string(), f.to_string())).unwrap_or(&self.floor)
    }

    pub fn step(&mut self, corpus: &Corpus, lang: &str, use_null: bool) {
        let mut count: HashMap<(String, String), f64> = HashMap::new();
        let mut total: HashMap<String, f64> = HashMap::new();
        for u in &corpus.utterances {
            let src = source_side(u, lang, use_null);
            for f in &u.phonemes {
                let z: f64 = src.iter().map(|e| self.p(e, f)).sum();
                for e in &src {
                    let c = self.p(e, f) / z;
                    *count.entry((e.clone(), f.clone())).or_default() += c;
                    *total.entry(e.clone()).or_default() += c;
                }
            }
        }
        for e in self.sources.clone() {
            for f in self.targets.clone() {
                let c = count.get(&(e.clone(), f.clone())).copied().unwrap_or(0.0);
                self.t.insert((e.clone(), f), c / total[&e]);
            }
        }
        self.floor_renormalize();
    }

    /// Log-likelihood by explicit enumeration of every alignment vector.
    pub fn brute_log_likelihood(&self, corpus: &Corpus, lang: &str, use_null: bool) -> f64 {
        let mut ll = 0.0;
        for u in &corpus.utterances {
            let src = source_side(u, lang, use_null);
            let (s, l) = (src.len(), u.phonemes.len());
            let mut sum = 0.0;
            let mut a = vec![0usize; l];
            loop {
                sum += (0..l).map(|t| self.p(&src[a[t]], &u.phonemes[t])).product::<f64>();
                let mut k = 0;
                while k < l {
                    a[k] += 1;
                    if a[k] < s {
                        break;
                    }
                    a[k] = 0;
                    k += 1;
                }
                if k == l {
                    break;
                }
            }
            ll += (sum / (s as f64).powi(l as i32)).ln();
        }
        ll
    }
}

/// Random matrix with small integer weights (so ties are frequent) and
/// optionally a NULL column.
pub fn random_matrix<R: Rng>(rng: &mut R, id: &str, max_dim: usize) -> AlignmentMatrix {
    let l = rng.gen_range(1..=max_dim);
    let s = rng.gen_range(1..=max_dim);
    let with_null = s >= 2 && rng.gen_bool(0.5);
    let sources: Vec<String> = (0..s)
        .map(|i| if with_null && i == 0 { NULL_TOKEN.to_string() } else { format!("w{i}") })
        .collect();
    let targets: Vec<String> = (0..l).map(|i| format!("p{i}")).collect();
    let rows = (0..l)
        .map(|_| loop {
            let row: Vec<f64> = (0..s).map(|_| rng.gen_range(0..4) as f64).collect();
            if row.iter().any(|v| *v > 0.0) {
                break row;
            }
        })
        .collect();
    AlignmentMatrix::from_weights(id, "xx", sources, targets, rows).unwrap()
}

/// Per-row argmax by scanning for the maximum and taking its first
/// occurrence, NULL rows resolved to the neighbouring word, runs grouped.
/// Returns (boundaries, per-segment word).
pub fn oracle_segment(m: &AlignmentMatrix) -> (BTreeSet<usize>, Vec<Option<String>>) {
    let rows = m.to_rows();
    let mut cols: Vec<usize> = rows
        .iter()
        .map(|r| {
            let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            r.iter().position(|v| *v == max).unwrap()
        })
        .collect();
    let null = m.source_tokens()[0] == NULL_TOKEN;
    if null {
        match cols.iter().position(|&c| c != 0) {
            None => return (BTreeSet::new(), vec![None]),
            Some(first) => {
                for t in 0..cols.len() {
                    if cols[t] == 0 {
                        cols[t] = if t < first { cols[first] } else { cols[t - 1] };
                    }
                }
            }
        }
    }
    let mut bounds = BTreeSet::new();
    let mut words = vec![Some(m.source_tokens()[cols[0]].clone())];
    for t in 1..cols.len() {
        if cols[t] != cols[t - 1] {
            bounds.insert(t);
            words.push(Some(m.source_tokens()[cols[t]].clone()));
        }
    }
    (bounds, words)
}

pub fn random_boundaries<R: Rng>(rng: &mut R, len: usize, p: f64) -> BTreeSet<usize> {
    (1..len).filter(|_| rng.gen_bool(p)).collect()
}

pub fn seg_of(id: &str, lang: &str, len: usize, bounds: BTreeSet<usize>) -> Segmentation {
    let phonemes = (0..len).map(|i| format!("p{}", i % 7)).collect();
    Segmentation::from_boundaries(id, lang, Origin::Aligned, phonemes, bounds, None).unwrap()
}

/// Gold corpus whose utterances share ids and phonemes with [`seg_of`].
pub fn gold_corpus(golds: &[(String, usize, BTreeSet<usize>)]) -> Corpus {
    let utts = golds
        .iter()
        .map(|(id, len, b)| {
            Utterance::new(
                id.clone(),
                (0..*len).map(|i| format!("p{}", i % 7)).collect(),
                BTreeMap::from([("src".to_string(), s(&["w"]))]),
                Some(b.clone()),
            )
            .unwrap()
        })
        .collect();
    Corpus::new(utts, vec!["src".to_string()]).unwrap()
}

/// Boundary counts by direct set arithmetic: (hits, hyp, gold).
pub fn oracle_boundary_counts(pairs: &[(BTreeSet<usize>, BTreeSet<usize>)]) -> (usize, usize, usize) {
    pairs.iter().fold((0, 0, 0), |(h, p, g), (hyp, gold)| {
        (h + hyp.intersection(gold).count(), p + hyp.len(), g + gold.len())
    })
}
