//! Seeded synthetic parallel corpora with known gold segmentation.
//!
//! A random lexicon of phoneme-string words is sampled, sentences are drawn
//! as word sequences, and every "translation language" is a deterministic
//! relabelling of the word sequence. Language kinds cycle through:
//!
//! * relabel only (one token per word, same order);
//! * relabel with shuffled word order and some word pairs merged into one token;
//! * relabel with shuffled word order and words randomly dropped.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Utterance};
use crate::error::{Error, Result};

const BASE_SYMBOLS: &[&str] = &[
    "a", "e", "i", "o", "u", "ɛ", "ɔ", "á", "é", "í", "ó", "ú", "b", "d", "f", "g", "k", "l", "m",
    "n", "p", "r", "s", "t", "v", "w", "y", "z", "ng", "mb", "nd", "ts", "dz", "ch", "sh", "ny",
    "gb", "kp", "mv", "nz", "bv", "pf", "ŋ", "ɲ", "ʃ", "ʒ", "β", "ɣ",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanguageKind {
    Relabel,
    ShuffleMerge,
    ShuffleDrop,
}

impl LanguageKind {
    pub fn for_index(k: usize) -> Self {
        match k % 3 {
            0 => LanguageKind::Relabel,
            1 => LanguageKind::ShuffleMerge,
            _ => LanguageKind::ShuffleDrop,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub vocab: usize,
    pub sentences: usize,
    pub langs: usize,
    /// Size of the shared phoneme pool.
    pub inventory: usize,
    /// Probability that a word position draws from the shared pool. Other
    /// positions get a symbol private to that word, so at 0 every phoneme
    /// identifies its word.
    pub phoneme_sharing: f64,
    pub min_word_len: usize,
    pub max_word_len: usize,
    pub min_sentence_words: usize,
    pub max_sentence_words: usize,
    /// Probability that a word is omitted by a dropping language.
    pub drop_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 7,
            vocab: 20,
            sentences: 200,
            langs: 3,
            inventory: 48,
            phoneme_sharing: 0.0,
            min_word_len: 2,
            max_word_len: 4,
            min_sentence_words: 2,
            max_sentence_words: 6,
            drop_rate: 0.2,
        }
    }
}

impl SyntheticSpec {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "vocab" => self.vocab = num(key, value)?,
            "sentences" => self.sentences = num(key, value)?,
            "langs" => self.langs = num(key, value)?,
            "inventory" => self.inventory = num(key, value)?,
            "phoneme_sharing" => self.phoneme_sharing = num(key, value)?,
            "min_word_len" => self.min_word_len = num(key, value)?,
            "max_word_len" => self.max_word_len = num(key, value)?,
            "min_sentence_words" => self.min_sentence_words = num(key, value)?,
            "max_sentence_words" => self.max_sentence_words = num(key, value)?,
            "drop_rate" => self.drop_rate = num(key, value)?,
            other => return Err(Error::Config(format!("unknown synthetic setting `{other}`"))),
        }
        Ok(())
    }

    /// Parses whitespace- or comma-separated `key=value` settings over the
    /// defaults.
    pub fn parse(settings: &str) -> Result<Self> {
        let mut spec = SyntheticSpec::default();
        for kv in settings.split([',', ' ']).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{kv}`")))?;
            spec.set(k.trim(), v.trim())?;
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab < 2 {
            return Err(Error::Config("synthetic vocabulary must have at least 2 words".into()));
        }
        if self.sentences == 0 {
            return Err(Error::Config("synthetic corpus needs at least 1 sentence".into()));
        }
        if self.langs == 0 {
            return Err(Error::Config("synthetic corpus needs at least 1 language".into()));
        }
        if self.min_word_len == 0 || self.min_word_len > self.max_word_len {
            return Err(Error::Config("invalid word length range".into()));
        }
        if self.min_sentence_words == 0 || self.min_sentence_words > self.max_sentence_words {
            return Err(Error::Config("invalid sentence length range".into()));
        }
        if self.inventory < 2 {
            return Err(Error::Config("phoneme inventory needs at least 2 symbols".into()));
        }
        if !(0.0..=1.0).contains(&self.phoneme_sharing) {
            return Err(Error::Config("phoneme_sharing must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.drop_rate) {
            return Err(Error::Config("drop_rate must lie in [0, 1)".into()));
        }
        if self.phoneme_sharing >= 1.0 {
            let possible = (self.min_word_len..=self.max_word_len)
                .map(|l| (self.inventory as f64).powi(l as i32))
                .sum::<f64>();
            if possible < self.vocab as f64 {
                return Err(Error::Config("inventory too small for the requested vocabulary".into()));
            }
        }
        Ok(())
    }
}

pub fn language_code(k: usize) -> String {
    format!("syn{}", k + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticWord {
    pub phonemes: Vec<String>,
    /// Token standing for this word in each language.
    pub translations: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub lexicon: Vec<SyntheticWord>,
    pub kinds: BTreeMap<String, LanguageKind>,
}

impl SyntheticCorpus {
    /// Languages whose translations are a pure relabelling of the words.
    pub fn relabel_languages(&self) -> Vec<String> {
        self.kinds
            .iter()
            .filter(|(_, k)| **k == LanguageKind::Relabel)
            .map(|(l, _)| l.clone())
            .collect()
    }

    /// True lexicon as a gold-type set.
    pub fn gold_types(&self) -> BTreeSet<Vec<String>> {
        self.lexicon.iter().map(|w| w.phonemes.clone()).collect()
    }

    /// Gold lexicon file contents: phonemes, then one token per language.
    pub fn lexicon_tsv(&self) -> String {
        let mut out = String::new();
        for w in &self.lexicon {
            out.push_str(&w.phonemes.join(" "));
            for lang in &self.corpus.languages {
                out.push('\t');
                out.push_str(&w.translations[lang]);
            }
            out.push('\n');
        }
        out
    }
}

fn symbol(i: usize) -> String {
    match BASE_SYMBOLS.get(i) {
        Some(s) => s.to_string(),
        None => format!("q{i}"),
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Pool symbols are 0..inventory; private symbols are numbered after it.
    let mut next_private = spec.inventory;
    let mut seen = HashSet::new();
    let mut words: Vec<Vec<String>> = Vec::with_capacity(spec.vocab);
    while words.len() < spec.vocab {
        let len = rng.gen_range(spec.min_word_len..=spec.max_word_len);
        let w: Vec<String> = (0..len)
            .map(|_| {
                if rng.gen_bool(spec.phoneme_sharing) {
                    symbol(rng.gen_range(0..spec.inventory))
                } else {
                    next_private += 1;
                    symbol(next_private - 1)
                }
            })
            .collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }

    let languages: Vec<String> = (0..spec.langs).map(language_code).collect();
    let kinds: BTreeMap<String, LanguageKind> = languages
        .iter()
        .enumerate()
        .map(|(k, l)| (l.clone(), LanguageKind::for_index(k)))
        .collect();
    let lexicon: Vec<SyntheticWord> = words
        .iter()
        .enumerate()
        .map(|(i, phonemes)| SyntheticWord {
            phonemes: phonemes.clone(),
            translations: languages
                .iter()
                .map(|l| {
                    // Merging languages fold every fourth word into its predecessor.
                    let idx = if kinds[l] == LanguageKind::ShuffleMerge && i % 4 == 1 {
                        i - 1
                    } else {
                        i
                    };
                    (l.clone(), format!("{l}w{idx}"))
                })
                .collect(),
        })
        .collect();

    let mut utterances = Vec::with_capacity(spec.sentences);
    for n in 0..spec.sentences {
        let count = rng.gen_range(spec.min_sentence_words..=spec.max_sentence_words);
        // Consecutive words are distinct.
        let mut sentence: Vec<usize> = Vec::with_capacity(count);
        while sentence.len() < count {
            let w = rng.gen_range(0..spec.vocab);
            if sentence.last() != Some(&w) {
                sentence.push(w);
            }
        }
        let mut phonemes = Vec::new();
        let mut gold = BTreeSet::new();
        for &w in &sentence {
            if !phonemes.is_empty() {
                gold.insert(phonemes.len());
            }
            phonemes.extend(words[w].iter().cloned());
        }
        let mut translations = BTreeMap::new();
        for lang in &languages {
            let mut order = sentence.clone();
            let kind = kinds[lang];
            if kind != LanguageKind::Relabel {
                order.shuffle(&mut rng);
            }
            if kind == LanguageKind::ShuffleDrop {
                let kept: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|_| !rng.gen_bool(spec.drop_rate))
                    .collect();
                if !kept.is_empty() {
                    order = kept;
                }
            }
            let tokens = order
                .iter()
                .map(|&w| lexicon[w].translations[lang].clone())
                .collect();
            translations.insert(lang.clone(), tokens);
        }
        utterances.push(Utterance::new(
            format!("syn{n:05}"),
            phonemes,
            translations,
            Some(gold),
        )?);
    }
    Ok(SyntheticCorpus {
        corpus: Corpus::new(utterances, languages)?,
        lexicon,
        kinds,
    })
}
