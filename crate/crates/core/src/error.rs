use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("not divisible: {i}-set {set:?} has total {total}, not a multiple of {modulus}")]
    NotDivisible {
        i: usize,
        set: Vec<u32>,
        total: i64,
        modulus: i64,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("search exhausted: {0}")]
    Exhausted(String),
    #[error("stage {stage} failed: {detail}")]
    Stage { stage: String, detail: String },
    #[error("arithmetic overflow in {0}")]
    Overflow(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn stage(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
