use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate utterance id at line {line}: `{id}`")]
    DuplicateId { id: String, line: usize },

    #[error("line {line}: utterance `{id}` is missing language `{language}`")]
    MissingLanguage {
        id: String,
        language: String,
        line: usize,
    },

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("utterance `{0}` has no source tokens and the NULL token is disabled")]
    EmptySource(String),

    #[error("matrix `{id}`: {message}")]
    Matrix { id: String, message: String },

    #[error("utterance `{id}`: {message}")]
    Mismatch { id: String, message: String },

    #[error("utterance `{0}` has no gold segmentation")]
    MissingGold(String),

    #[error("duplicate utterance id `{0}` in one language run")]
    DuplicateRun(String),

    #[error("language coverage mismatch; missing ids: {0:?}")]
    Coverage(Vec<String>),

    #[error("voted segmentations carry no aligned words; extract the lexicon from bilingual or ANE-selected runs instead")]
    VotedLexicon,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{message}")]
    Invalid { message: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn matrix(id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Matrix {
            id: id.into(),
            message: message.into(),
        }
    }

    pub(crate) fn mismatch(id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Mismatch {
            id: id.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid {
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
