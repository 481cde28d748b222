//! Unsupervised word discovery in unsegmented phoneme transcripts, guided by
//! word-level translations.
//!
//! Soft-alignment matrices between translation words and phonemes are either
//! produced by an IBM Model 1 aligner or ingested from the JSON-Lines
//! interchange format. Each matrix is turned into a segmentation by grouping
//! neighbouring phonemes that align to the same word. Segmentations from
//! several translation languages can be combined by boundary voting or by
//! picking the most confident (lowest average normalized entropy) model per
//! sentence, and all of them can be scored against gold boundaries.
//!
//! Numeric code is generic over [`Float`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`.

pub mod aligner;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod multilingual;
pub mod num;
pub mod pipeline;
pub mod segfile;
pub mod segmenter;
pub mod synth;

pub use aligner::{
    align_corpus, log_likelihood, posterior_matrix, train_ibm1, train_ibm1_traced, AlignerConfig,
};
pub use corpus::{
    corpus_stats, gold_boundaries_from_segmented, load_corpus, tokenize_translation, Corpus,
    CorpusFormat, StatsRecord, TokenizePolicy, Utterance,
};
pub use error::{Error, Result};
pub use eval::{boundary_prf, concat_check, cross_model_overlap, extract_lexicon, ConcatStatus};
pub use matrix::{read_matrices, write_matrices, NULL_TOKEN};
pub use multilingual::{ane_select, combine_corpus, vote, CombineMode};
pub use num::Float;
pub use pipeline::{run_pipeline, PipelineConfig};
pub use segmenter::{ane, segment_corpus, segment_from_matrix, Origin, Segment, Segmentation};
pub use synth::{generate_synthetic, SyntheticSpec};

pub type TranslationTable = aligner::TranslationTable<f64>;
pub type AlignmentMatrix = matrix::AlignmentMatrix<f64>;
pub type AneScore = segmenter::AneScore<f64>;
pub type SegRecord = segfile::SegRecord<f64>;
pub type VoteConfig = multilingual::VoteConfig<f64>;
pub type SelectionResult = multilingual::SelectionResult<f64>;
pub type PrfScore = eval::PrfScore<f64>;
pub type LexiconEntry = eval::LexiconEntry<f64>;
pub type PipelineOutput = pipeline::PipelineOutput<f64>;

pub type TranslationTable32 = aligner::TranslationTable<f32>;
pub type AlignmentMatrix32 = matrix::AlignmentMatrix<f32>;
