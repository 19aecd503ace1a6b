use thiserror::Error;

/// Errors raised while reading `.moore` / `.subst` text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown {kind} `{token}`")]
    Unknown {
        line: usize,
        kind: &'static str,
        token: String,
    },
    #[error("line {line}: duplicate {what}")]
    Duplicate { line: usize, what: String },
    #[error("missing transition for state `{state}` on input {input}")]
    MissingTransition { state: String, input: String },
    #[error("missing declaration: {0}")]
    Missing(&'static str),
    #[error("line {line}: empty image for letter `{letter}`")]
    EmptyImage { line: usize, letter: String },
    #[error("{0}")]
    Invalid(String),
}

/// Errors raised by operations whose preconditions do not hold.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("input symbol {symbol} out of range (machine has {inputs} inputs)")]
    SymbolOutOfRange { symbol: usize, inputs: usize },
    #[error("invalid state index {0}")]
    InvalidState(usize),
    #[error("input count mismatch: {left} vs {right}")]
    InputCountMismatch { left: usize, right: usize },
    #[error("vector has {got} entries but machine has {expected} states")]
    DomainMismatch { expected: usize, got: usize },
    #[error("output combiner undefined on ({0}, {1})")]
    CombinerNotTotal(String, String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("no fixed point: σ(i) must start with i and grow")]
    NoFixedPoint,
    #[error("substitution is not constant-length")]
    NotConstantLength,
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: u128, len: u128 },
    #[error("empty digit word")]
    EmptyWord,
    #[error("digit {digit} not below base {base}")]
    DigitOutOfRange { digit: usize, base: usize },
    #[error("numeric overflow")]
    Overflow,
    #[error("rank {rank} not reached within {bound} candidates")]
    SearchExhausted { rank: u128, bound: u128 },
    #[error("padding template for `{letter}`: {reason}")]
    TemplateMismatch { letter: String, reason: String },
}

impl Error {
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
