use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands come from different groups, or an element is not a member.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A combinator lacks the structural support the operation needs.
    #[error("unsupported function structure: {0}")]
    UnsupportedStructure(String),

    #[error("empty enumeration: {0}")]
    EmptyEnumeration(String),

    /// No net element close enough; the enumeration depth is too small.
    #[error("net maximality violation: {0}")]
    NetMaximality(String),

    #[error("cover construction failed: {0}")]
    CoverConstruction(String),

    #[error("quantizer condition violated: {0}")]
    QuantizerCondition(String),

    #[error("refinement exhausted: {0}")]
    RefinementExhausted(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// A certificate that must hold by construction failed.
    #[error("certificate violated: {0}")]
    Certificate(String),
}
