use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("`{name}` at byte {offset} takes exactly one argument")]
    Arity { name: String, offset: usize },

    #[error("domain error: {what} at t = {at}")]
    Domain { what: &'static str, at: f64 },

    #[error("non-smooth point: {what} at t = {at} has no derivatives")]
    NonSmooth { what: &'static str, at: f64 },

    #[error("derivative order {0} is not supported (maximum is 4)")]
    OrderTooHigh(usize),

    #[error("invalid interval [{a}, {b}]: need finite a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("integration did not converge within {panels} panels")]
    NonConvergence { panels: usize },

    #[error("{what} check failed at t = {at} (value {value:e})")]
    ConvexityViolated { what: &'static str, at: f64, value: f64 },

    #[error("refined Hermite-Hadamard brackets do not intersect: lower {lower} > upper {upper}")]
    EmptyIntersection { lower: f64, upper: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
