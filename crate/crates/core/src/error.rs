use thiserror::Error;

use crate::structure::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {}", format_violations(.0))]
    InvalidStructure(Vec<Violation>),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("empty input")]
    EmptyInput,
    #[error("forbidden structure #{0} is not a tree")]
    NotATree(usize),
    #[error("`{0}` is not a cut")]
    NotACut(String),
    #[error("structure is not F-free: forbidden tree #{tree} maps into it via {map:?}")]
    NotFFree { tree: usize, map: Vec<usize> },
    #[error("tuple {tuple:?} is not in relation `{symbol}`")]
    TupleNotPresent { symbol: String, tuple: Vec<String> },
    #[error("one-element substructure at `{0}` is not known to be in the class")]
    PremiseUnresolved(String),
    #[error("not an embedding: {0}")]
    NotEmbedding(String),
    #[error("membership verification failed: {0}")]
    MembershipFailure(String),
    #[error("structure is not in the class: {0}")]
    NotInClass(String),
    #[error("not a rectified structure: {0}")]
    NotRectified(String),
    #[error("not a partite structure: {0}")]
    NotPartite(String),
    #[error("no partite embedding exists")]
    NoEmbedding,
    #[error("partner search exhausted at size {size} after {colorings} colorings")]
    PartnerSearchExhausted { size: usize, colorings: u64 },
    #[error("construction step {step} would create {size} elements (limit {limit})")]
    SizeLimitExceeded { step: usize, size: u64, limit: u64 },
    #[error("colour count overflow: {0}")]
    ColourOverflow(String),
    #[error("structure has no parts map")]
    MissingParts,
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u64),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name, used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidStructure(_) => "InvalidStructure",
            Error::UnknownElement(_) => "UnknownElement",
            Error::UnknownSymbol(_) => "UnknownSymbol",
            Error::SignatureMismatch(_) => "SignatureMismatch",
            Error::InvalidSignature(_) => "InvalidSignature",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::EmptyInput => "EmptyInput",
            Error::NotATree(_) => "NotATree",
            Error::NotACut(_) => "NotACut",
            Error::NotFFree { .. } => "NotFFree",
            Error::TupleNotPresent { .. } => "TupleNotPresent",
            Error::PremiseUnresolved(_) => "PremiseUnresolved",
            Error::NotEmbedding(_) => "NotEmbedding",
            Error::MembershipFailure(_) => "MembershipFailure",
            Error::NotInClass(_) => "NotInClass",
            Error::NotRectified(_) => "NotRectified",
            Error::NotPartite(_) => "NotPartite",
            Error::NoEmbedding => "NoEmbedding",
            Error::PartnerSearchExhausted { .. } => "PartnerSearchExhausted",
            Error::SizeLimitExceeded { .. } => "SizeLimitExceeded",
            Error::ColourOverflow(_) => "ColourOverflow",
            Error::MissingParts => "MissingParts",
            Error::UnknownSuite(_) => "UnknownSuite",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::Format(_) => "Format",
            Error::Json(_) => "Json",
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
