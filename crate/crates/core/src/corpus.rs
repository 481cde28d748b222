//! Parallel corpus model: utterances with an unsegmented phoneme sequence,
//! word-level translations in one or more languages, and optional gold
//! word boundaries.
//!
//! Boundaries are internal only. Position `i` (1-based) is the gap between
//! phoneme `i` and phoneme `i + 1`, so valid positions are `1..L`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token separating words in a gold transcript.
pub const WORD_SEPARATOR: &str = "|";

/// Characters stripped from both ends of every translation token.
pub const PUNCTUATION: &[char] = &[
    '.', ',', ';', ':', '!', '?', '"', '(', ')', '[', ']', '«', '»',
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub phonemes: Vec<String>,
    pub translations: BTreeMap<String, Vec<String>>,
    pub gold_boundaries: Option<BTreeSet<usize>>,
}

impl Utterance {
    pub fn new(
        id: impl Into<String>,
        phonemes: Vec<String>,
        translations: BTreeMap<String, Vec<String>>,
        gold_boundaries: Option<BTreeSet<usize>>,
    ) -> Result<Self> {
        let utt = Utterance {
            id: id.into(),
            phonemes,
            translations,
            gold_boundaries,
        };
        utt.validate().map_err(Error::invalid)?;
        Ok(utt)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("utterance id is empty".into());
        }
        if self.phonemes.is_empty() {
            return Err(format!("utterance `{}` has no phonemes", self.id));
        }
        if let Some(bad) = self.phonemes.iter().find(|p| !valid_symbol(p)) {
            return Err(format!(
                "utterance `{}`: invalid phoneme symbol {:?}",
                self.id, bad
            ));
        }
        if let Some(gold) = &self.gold_boundaries {
            if let Some(b) = gold.iter().find(|&&b| b == 0 || b >= self.phonemes.len()) {
                return Err(format!(
                    "utterance `{}`: gold boundary {} outside 1..{}",
                    self.id,
                    b,
                    self.phonemes.len()
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn tokens(&self, language: &str) -> Result<&[String]> {
        self.translations
            .get(language)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownLanguage(language.to_string()))
    }

    /// Gold words as phoneme-symbol sequences.
    pub fn gold_words(&self) -> Option<Vec<Vec<String>>> {
        self.gold_boundaries
            .as_ref()
            .map(|b| split_at_boundaries(&self.phonemes, b))
    }
}

fn valid_symbol(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub utterances: Vec<Utterance>,
    pub languages: Vec<String>,
}

impl Corpus {
    pub fn new(utterances: Vec<Utterance>, languages: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, utt) in utterances.iter().enumerate() {
            if !seen.insert(utt.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: utt.id.clone(),
                    line: i + 1,
                });
            }
            for lang in &languages {
                if !utt.translations.contains_key(lang) {
                    return Err(Error::MissingLanguage {
                        id: utt.id.clone(),
                        language: lang.clone(),
                        line: i + 1,
                    });
                }
            }
        }
        Ok(Corpus {
            utterances,
            languages,
        })
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn has_language(&self, language: &str) -> bool {
        self.languages.iter().any(|l| l == language)
    }

    pub fn get(&self, id: &str) -> Option<&Utterance> {
        self.utterances.iter().find(|u| u.id == id)
    }

    /// Index from utterance id to position.
    pub fn index(&self) -> HashMap<&str, usize> {
        self.utterances
            .iter()
            .enumerate()
            .map(|(i, u)| (u.id.as_str(), i))
            .collect()
    }

    /// Distinct gold word types as phoneme-symbol sequences.
    pub fn gold_types(&self) -> BTreeSet<Vec<String>> {
        self.utterances
            .iter()
            .filter_map(Utterance::gold_words)
            .flatten()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizePolicy {
    pub lowercase: bool,
}

impl Default for TokenizePolicy {
    fn default() -> Self {
        TokenizePolicy { lowercase: true }
    }
}

/// Splits raw translation text into word tokens.
///
/// Apostrophes and internal hyphens survive, so French clitics such as
/// `c'est` stay one token.
pub fn tokenize_translation(text: &str, policy: TokenizePolicy) -> Vec<String> {
    let text = if policy.lowercase {
        text.to_lowercase()
    } else {
        text.to_string()
    };
    text.split_whitespace()
        .map(|tok| tok.trim_matches(PUNCTUATION))
        .filter(|tok| !tok.is_empty())
        .map(str::to_string)
        .collect()
}

/// Parses a gold transcript (`a b | c`) into its phonemes and boundaries.
pub fn gold_boundaries_from_segmented(segmented: &str) -> Result<(Vec<String>, BTreeSet<usize>)> {
    let mut phonemes = Vec::new();
    let mut boundaries = BTreeSet::new();
    let mut word_len = 0usize;
    for sym in segmented.split_whitespace() {
        if sym == WORD_SEPARATOR {
            if word_len == 0 {
                return Err(Error::invalid(format!(
                    "empty word in segmented transcript {segmented:?}"
                )));
            }
            boundaries.insert(phonemes.len());
            word_len = 0;
        } else {
            phonemes.push(sym.to_string());
            word_len += 1;
        }
    }
    if phonemes.is_empty() {
        return Err(Error::invalid("empty segmented transcript"));
    }
    if word_len == 0 {
        return Err(Error::invalid(format!(
            "segmented transcript ends with a separator: {segmented:?}"
        )));
    }
    Ok((phonemes, boundaries))
}

/// Renders phonemes with `|` at each boundary, the inverse of
/// [`gold_boundaries_from_segmented`].
pub fn render_segmented(phonemes: &[String], boundaries: &BTreeSet<usize>) -> String {
    let mut out = String::new();
    for (i, p) in phonemes.iter().enumerate() {
        if i > 0 {
            out.push(' ');
            if boundaries.contains(&i) {
                out.push_str(WORD_SEPARATOR);
                out.push(' ');
            }
        }
        out.push_str(p);
    }
    out
}

/// Splits a sequence into the runs delimited by `boundaries`.
pub fn split_at_boundaries<T: Clone>(items: &[T], boundaries: &BTreeSet<usize>) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0;
    for &b in boundaries.iter().filter(|&&b| b > 0 && b < items.len()) {
        out.push(items[start..b].to_vec());
        start = b;
    }
    out.push(items[start..].to_vec());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Tsv,
    Jsonl,
}

impl CorpusFormat {
    /// Picks a format from the file extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => CorpusFormat::Jsonl,
            _ => CorpusFormat::Tsv,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, format, TokenizePolicy::default())
}

pub fn parse_corpus(text: &str, format: CorpusFormat, policy: TokenizePolicy) -> Result<Corpus> {
    match format {
        CorpusFormat::Tsv => parse_tsv(text, policy),
        CorpusFormat::Jsonl => parse_jsonl(text, policy),
    }
}

const TRANS_PREFIX: &str = "trans_";

fn parse_tsv(text: &str, policy: TokenizePolicy) -> Result<Corpus> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "header", "missing header row"))?;
    let columns: Vec<&str> = header.split('\t').collect();
    if columns.len() < 3 || columns[..3] != ["id", "phonemes", "gold"] {
        return Err(Error::parse(
            1,
            "header",
            "expected columns id, phonemes, gold, trans_<lang>...",
        ));
    }
    let mut languages = Vec::new();
    for col in &columns[3..] {
        let lang = col
            .strip_prefix(TRANS_PREFIX)
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::parse(1, *col, "translation columns must be named trans_<lang>"))?;
        if languages.iter().any(|l| l == lang) {
            return Err(Error::parse(1, *col, "duplicate language column"));
        }
        languages.push(lang.to_string());
    }

    let mut utterances = Vec::new();
    let mut seen = HashSet::new();
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::parse(line, "id", "empty id"));
        }
        if fields.len() > columns.len() {
            return Err(Error::parse(
                line,
                "row",
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        if fields.len() < 3 {
            return Err(Error::parse(line, "gold", "missing field"));
        }
        let phonemes: Vec<String> = fields[1].split_whitespace().map(str::to_string).collect();
        if phonemes.is_empty() {
            return Err(Error::parse(line, "phonemes", "empty phoneme sequence"));
        }
        if phonemes.iter().any(|p| p == WORD_SEPARATOR) {
            return Err(Error::parse(
                line,
                "phonemes",
                "word separator `|` is only allowed in the gold field",
            ));
        }
        let gold = if fields[2].trim().is_empty() {
            None
        } else {
            let (gold_phonemes, bounds) = gold_boundaries_from_segmented(fields[2])
                .map_err(|e| Error::parse(line, "gold", e.to_string()))?;
            if gold_phonemes != phonemes {
                return Err(Error::parse(
                    line,
                    "gold",
                    "gold phonemes differ from the phonemes field",
                ));
            }
            Some(bounds)
        };
        let mut translations = BTreeMap::new();
        for (k, lang) in languages.iter().enumerate() {
            match fields.get(3 + k).filter(|f| !f.trim().is_empty()) {
                Some(text) => {
                    translations.insert(lang.clone(), tokenize_translation(text, policy));
                }
                None => {
                    return Err(Error::MissingLanguage {
                        id: id.to_string(),
                        language: lang.clone(),
                        line,
                    })
                }
            }
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId {
                id: id.to_string(),
                line,
            });
        }
        let utt = Utterance {
            id: id.to_string(),
            phonemes,
            translations,
            gold_boundaries: gold,
        };
        utt.validate()
            .map_err(|m| Error::parse(line, "phonemes", m))?;
        utterances.push(utt);
    }
    Ok(Corpus {
        utterances,
        languages,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonUtterance {
    id: String,
    phonemes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_boundaries: Option<Vec<usize>>,
    /// Key order is the corpus language order.
    translations: serde_json::Map<String, serde_json::Value>,
}

fn parse_jsonl(text: &str, policy: TokenizePolicy) -> Result<Corpus> {
    let mut languages: Option<Vec<String>> = None;
    let mut utterances = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: JsonUtterance = serde_json::from_str(raw).map_err(|e| {
            let field = e
                .to_string()
                .split('`')
                .nth(1)
                .unwrap_or("record")
                .to_string();
            Error::parse(line, field, e.to_string())
        })?;
        if rec.id.is_empty() {
            return Err(Error::parse(line, "id", "empty id"));
        }
        let langs = languages.get_or_insert_with(|| rec.translations.keys().cloned().collect());
        for lang in langs.iter() {
            if rec
                .translations
                .get(lang)
                .and_then(|t| t.as_str())
                .is_none_or(|t| t.trim().is_empty())
            {
                return Err(Error::MissingLanguage {
                    id: rec.id.clone(),
                    language: lang.clone(),
                    line,
                });
            }
        }
        if let Some(extra) = rec.translations.keys().find(|k| !langs.contains(k)) {
            return Err(Error::parse(
                line,
                "translations",
                format!("language `{extra}` not declared by the first record"),
            ));
        }
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId { id: rec.id, line });
        }
        let translations = rec
            .translations
            .iter()
            .map(|(l, t)| (l.clone(), tokenize_translation(t.as_str().unwrap_or_default(), policy)))
            .collect();
        let utt = Utterance {
            id: rec.id,
            phonemes: rec.phonemes,
            translations,
            gold_boundaries: rec.gold_boundaries.map(|g| g.into_iter().collect()),
        };
        utt.validate()
            .map_err(|m| Error::parse(line, "phonemes", m))?;
        utterances.push(utt);
    }
    Ok(Corpus {
        utterances,
        languages: languages.unwrap_or_default(),
    })
}

/// Serializes a corpus. Translation tokens are written space-joined, so
/// re-parsing under the default policy yields the same corpus.
pub fn write_corpus<W: Write>(corpus: &Corpus, format: CorpusFormat, mut out: W) -> std::io::Result<()> {
    out.write_all(corpus_to_string(corpus, format).as_bytes())
}

pub fn corpus_to_string(corpus: &Corpus, format: CorpusFormat) -> String {
    let mut s = String::new();
    match format {
        CorpusFormat::Tsv => {
            s.push_str("id\tphonemes\tgold");
            for lang in &corpus.languages {
                let _ = write!(s, "\t{TRANS_PREFIX}{lang}");
            }
            s.push('\n');
            for utt in &corpus.utterances {
                let gold = utt
                    .gold_boundaries
                    .as_ref()
                    .map(|b| render_segmented(&utt.phonemes, b))
                    .unwrap_or_default();
                let _ = write!(s, "{}\t{}\t{}", utt.id, utt.phonemes.join(" "), gold);
                for lang in &corpus.languages {
                    let _ = write!(s, "\t{}", utt.translations[lang].join(" "));
                }
                s.push('\n');
            }
        }
        CorpusFormat::Jsonl => {
            for utt in &corpus.utterances {
                let rec = JsonUtterance {
                    id: utt.id.clone(),
                    phonemes: utt.phonemes.clone(),
                    gold_boundaries: utt
                        .gold_boundaries
                        .as_ref()
                        .map(|b| b.iter().copied().collect()),
                    translations: corpus
                        .languages
                        .iter()
                        .map(|l| (l.clone(), utt.translations[l].join(" ").into()))
                        .collect(),
                };
                s.push_str(&serde_json::to_string(&rec).expect("serializable record"));
                s.push('\n');
            }
        }
    }
    s
}

/// Per-language corpus statistics. Averages are exact ratios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsRecord {
    pub language: String,
    pub sentence_count: u64,
    pub token_count: u64,
    pub type_count: u64,
    pub avg_token_length: Ratio<u64>,
    pub avg_tokens_per_sentence: Ratio<u64>,
}

impl StatsRecord {
    pub const TSV_HEADER: &'static str =
        "language\tsentence_count\ttoken_count\ttype_count\tavg_token_length\tavg_tokens_per_sentence";

    pub fn to_tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
            self.language,
            self.sentence_count,
            self.token_count,
            self.type_count,
            ratio_f64(self.avg_token_length),
            ratio_f64(self.avg_tokens_per_sentence),
        )
    }
}

pub fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn corpus_stats(corpus: &Corpus, language: &str) -> Result<StatsRecord> {
    if !corpus.has_language(language) {
        return Err(Error::UnknownLanguage(language.to_string()));
    }
    let mut tokens = 0u64;
    let mut chars = 0u64;
    let mut types = HashSet::new();
    for utt in &corpus.utterances {
        for tok in &utt.translations[language] {
            tokens += 1;
            chars += tok.chars().count() as u64;
            types.insert(tok.as_str());
        }
    }
    if tokens == 0 {
        return Err(Error::invalid(format!(
            "language `{language}` has no tokens; averages are undefined"
        )));
    }
    let sentences = corpus.len() as u64;
    Ok(StatsRecord {
        language: language.to_string(),
        sentence_count: sentences,
        token_count: tokens,
        type_count: types.len() as u64,
        avg_token_length: Ratio::new(chars, tokens),
        avg_tokens_per_sentence: Ratio::new(tokens, sentences),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn tokenizes_with_default_policy() {
        let p = TokenizePolicy::default();
        assert_eq!(tokenize_translation("Le chien dort.", p), s(&["le", "chien", "dort"]));
        assert!(tokenize_translation("  ", p).is_empty());
        assert_eq!(tokenize_translation("C'est bon", p), s(&["c'est", "bon"]));
        assert_eq!(
            tokenize_translation("« Arc-en-ciel ! »", p),
            s(&["arc-en-ciel"])
        );
        let keep_case = TokenizePolicy { lowercase: false };
        assert_eq!(tokenize_translation("Le (chien)", keep_case), s(&["Le", "chien"]));
    }

    #[test]
    fn gold_from_segmented() {
        let (p, b) = gold_boundaries_from_segmented("a b | c").unwrap();
        assert_eq!(p, s(&["a", "b", "c"]));
        assert_eq!(b, BTreeSet::from([2]));
        let (_, b) = gold_boundaries_from_segmented("a b c").unwrap();
        assert!(b.is_empty());
        let (_, b) = gold_boundaries_from_segmented("a | b | c").unwrap();
        assert_eq!(b, BTreeSet::from([1, 2]));
        assert!(gold_boundaries_from_segmented("").is_err());
        assert!(gold_boundaries_from_segmented("  ").is_err());
        assert!(gold_boundaries_from_segmented("| a").is_err());
        assert!(gold_boundaries_from_segmented("a | | b").is_err());
        assert!(gold_boundaries_from_segmented("a |").is_err());
    }

    #[test]
    fn render_inverts_gold_parse() {
        let (p, b) = gold_boundaries_from_segmented("ng o | b a | i").unwrap();
        assert_eq!(render_segmented(&p, &b), "ng o | b a | i");
    }

    const TWO_ROWS: &str = "id\tphonemes\tgold\ttrans_fr\nu1\ta b c\ta b | c\tLe chien.\nu2\td e\t\tIl dort\n";

    #[test]
    fn loads_tsv() {
        let c = parse_corpus(TWO_ROWS, CorpusFormat::Tsv, TokenizePolicy::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.languages, s(&["fr"]));
        assert_eq!(c.utterances[0].gold_boundaries, Some(BTreeSet::from([2])));
        assert_eq!(c.utterances[1].gold_boundaries, None);
        assert_eq!(c.utterances[0].translations["fr"], s(&["le", "chien"]));
    }

    #[test]
    fn duplicate_id_names_line() {
        let text = format!("{TWO_ROWS}u1\tx\t\tbonjour\n");
        let err = parse_corpus(&text, CorpusFormat::Tsv, TokenizePolicy::default()).unwrap_err();
        assert_eq!(err.to_string(), "duplicate utterance id at line 4: `u1`");
        let text = "id\tphonemes\tgold\ttrans_fr\nu1\ta\t\tx\nu1\tb\t\ty\n";
        let err = parse_corpus(text, CorpusFormat::Tsv, TokenizePolicy::default()).unwrap_err();
        assert!(err.to_string().starts_with("duplicate utterance id at line 3"));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let p = TokenizePolicy::default();
        let missing = "id\tphonemes\tgold\ttrans_fr\ttrans_en\nu1\ta b\t\tbonjour\n";
        assert!(matches!(
            parse_corpus(missing, CorpusFormat::Tsv, p),
            Err(Error::MissingLanguage { line: 2, .. })
        ));
        let bad_gold = "id\tphonemes\tgold\ttrans_fr\nu1\ta b\ta | c\tx\n";
        assert!(matches!(
            parse_corpus(bad_gold, CorpusFormat::Tsv, p),
            Err(Error::Parse { line: 2, ref field, .. }) if field == "gold"
        ));
        let empty_phonemes = "id\tphonemes\tgold\ttrans_fr\nu1\t \t\tx\n";
        assert!(matches!(
            parse_corpus(empty_phonemes, CorpusFormat::Tsv, p),
            Err(Error::Parse { line: 2, ref field, .. }) if field == "phonemes"
        ));
        assert!(parse_corpus("id\tfoo\n", CorpusFormat::Tsv, p).is_err());
    }

    #[test]
    fn loads_jsonl() {
        let text = r#"{"id":"u1","phonemes":["a","b"],"gold_boundaries":[1],"translations":{"fr":"Le chat","en":"The cat"}}
{"id":"u2","phonemes":["c"],"translations":{"fr":"Oui","en":"Yes"}}
"#;
        let c = parse_corpus(text, CorpusFormat::Jsonl, TokenizePolicy::default()).unwrap();
        assert_eq!(c.languages, s(&["fr", "en"]));
        assert_eq!(c.utterances[0].gold_boundaries, Some(BTreeSet::from([1])));
        let bad = r#"{"id":"u1","phonemes":["a","b"],"gold_boundaries":[2],"translations":{"fr":"x"}}"#;
        assert!(parse_corpus(bad, CorpusFormat::Jsonl, TokenizePolicy::default()).is_err());
        let missing = "{\"id\":\"u1\",\"phonemes\":[\"a\"],\"translations\":{\"fr\":\"x\",\"en\":\"y\"}}\n{\"id\":\"u2\",\"phonemes\":[\"a\"],\"translations\":{\"fr\":\"x\"}}";
        assert!(matches!(
            parse_corpus(missing, CorpusFormat::Jsonl, TokenizePolicy::default()),
            Err(Error::MissingLanguage { line: 2, .. })
        ));
    }

    fn tiny(rows: &[&[&str]]) -> Corpus {
        let utts = rows
            .iter()
            .enumerate()
            .map(|(i, toks)| {
                Utterance::new(
                    format!("u{i}"),
                    s(&["p"]),
                    BTreeMap::from([("fr".to_string(), s(toks))]),
                    None,
                )
                .unwrap()
            })
            .collect();
        Corpus::new(utts, s(&["fr"])).unwrap()
    }

    #[test]
    fn stats_hand_counted() {
        let st = corpus_stats(&tiny(&[&["a", "b"], &["b", "c"]]), "fr").unwrap();
        assert_eq!((st.token_count, st.type_count, st.sentence_count), (4, 3, 2));
        assert_eq!(st.avg_token_length, Ratio::from_integer(1));
        assert_eq!(st.avg_tokens_per_sentence, Ratio::from_integer(2));

        let st = corpus_stats(&tiny(&[&["ab"]]), "fr").unwrap();
        assert_eq!((st.token_count, st.type_count), (1, 1));
        assert_eq!(st.avg_token_length, Ratio::from_integer(2));
        assert_eq!(st.to_tsv_row(), "fr\t1\t1\t1\t2.0000\t1.0000");

        assert!(matches!(
            corpus_stats(&tiny(&[&["a"]]), "de"),
            Err(Error::UnknownLanguage(_))
        ));
        assert!(corpus_stats(&tiny(&[&[]]), "fr").is_err());
    }

    #[test]
    fn utterance_invariants() {
        let tr = BTreeMap::new();
        assert!(Utterance::new("", s(&["a"]), tr.clone(), None).is_err());
        assert!(Utterance::new("u", vec![], tr.clone(), None).is_err());
        assert!(Utterance::new("u", s(&["a b"]), tr.clone(), None).is_err());
        assert!(Utterance::new("u", s(&["a", "b"]), tr.clone(), Some(BTreeSet::from([2]))).is_err());
        assert!(Utterance::new("u", s(&["a", "b"]), tr, Some(BTreeSet::from([1]))).is_ok());
    }
}
