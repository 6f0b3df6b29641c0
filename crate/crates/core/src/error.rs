use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} out of range for an alphabet of {arity} symbols")]
    InvalidWord { symbol: usize, arity: usize },

    #[error("invalid similarity: {0}")]
    InvalidMap(String),

    #[error("invalid iterated function system: {0}")]
    InvalidIfs(String),

    #[error("{what} = {value} is out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("operation needs {required} items but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("dimension undefined: mean offspring {mean_offspring} does not exceed 1")]
    UndefinedDimension { mean_offspring: f64 },

    #[error("depth mismatch: need depth {required}, have {available}")]
    DepthMismatch { required: usize, available: usize },

    #[error("insufficient data: {usable} usable scales, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("no surviving tree after {attempts} attempts")]
    Extinct { attempts: u64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
