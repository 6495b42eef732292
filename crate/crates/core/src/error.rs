use thiserror::Error;

use crate::record::PubId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("missing header row")]
    MissingHeader,

    #[error("input is not valid UTF-8 (byte offset {0})")]
    Encoding(usize),

    #[error("unknown publication id {0}")]
    UnknownId(PubId),

    #[error("edge {citing} -> {cited} references unknown publication id {missing}")]
    DanglingEdge {
        citing: PubId,
        cited: PubId,
        missing: PubId,
    },

    #[error("duplicate publication id {0}")]
    DuplicateId(PubId),

    #[error("max depth must be positive")]
    ZeroDepth,

    #[error("invalid block list: {0}")]
    BlockSpec(String),

    #[error("invalid block {start}-{end}: {reason}")]
    InvalidBlocks {
        start: i32,
        end: i32,
        reason: String,
    },

    #[error("publication {0} is missing from the partition")]
    IncompletePartition(PubId),

    #[error("brute-force clustering supports at most {max} nodes, got {got}")]
    TooManyNodes { max: usize, got: usize },

    #[error("query parse error at position {position}: {message}")]
    Query { position: usize, message: String },

    #[error("marked set is empty")]
    EmptyMarkedSet,

    #[error("already at full network")]
    AtBottom,

    #[error(
        "layer {year} holds {count} publications and cannot fit at minimum separation {d_min}"
    )]
    LayerOverflow { year: i32, count: usize, d_min: f64 },

    #[error("invalid layout parameter: {0}")]
    LayoutParams(String),

    #[error("unknown export format {0:?} (supported: tsv, csv, jsonlines)")]
    UnknownFormat(String),

    #[error("{kind} file, line {line}: {message}")]
    Format {
        kind: &'static str,
        line: usize,
        message: String,
    },

    #[error("export error: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn format(kind: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            kind,
            line,
            message: message.into(),
        }
    }
}
