use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: {context} (achieved {achieved:e}, requested {requested:e})")]
    Accuracy {
        context: String,
        achieved: f64,
        requested: f64,
    },
    #[error("path inadmissible: condition (tan/exp) violated at t = {0}")]
    PathInadmissible(f64),
    #[error("no initial exponent: polynomial is zero")]
    ZeroPolynomial,
    #[error("chain not stabilized within {0} derivatives")]
    ChainNotStabilized(usize),
    #[error("monotonicity violation: {0}")]
    Monotonicity(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precision exhausted: attained order {0}")]
    PrecisionExhausted(i64),
}
