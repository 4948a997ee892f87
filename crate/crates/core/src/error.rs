use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iterated-log domain failure in {what} at depth {depth}")]
    IteratedLogDomain { what: String, depth: usize },

    #[error("illegal move x = {x} for the {variant} game")]
    IllegalMove { variant: &'static str, x: f64 },

    #[error("collateral duty violated in round {round}: capital {capital} + stake {stake} * move {x} < 0")]
    CollateralViolation { round: u64, capital: f64, stake: f64, x: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("outside the asymptotic range: {0}")]
    OutOfAsymptoticRange(String),

    #[error("internal consistency fault: {0}")]
    ConsistencyFault(String),

    #[error("adversary fault: {0}")]
    AdversaryFault(String),

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
