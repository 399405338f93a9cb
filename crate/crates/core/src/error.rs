use thiserror::Error;

use crate::exactnum::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: rule has {rule} agents, profile has {profile}")]
    DimensionMismatch { rule: usize, profile: usize },

    #[error("invalid ranking rule: {0}")]
    InvalidRule(String),

    #[error("invalid valuation profile: {0}")]
    InvalidProfile(String),

    #[error("rule is not satisfactorily implementable (balance residual {residual})")]
    NotImplementable { residual: Rational },

    #[error("profile outside the formula's domain: {0}")]
    OutsideDomain(String),

    #[error("{agents} agents exceeds the subset-enumeration limit of {limit}")]
    TooManyAgents { agents: usize, limit: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("malformed linear program: {0}")]
    MalformedLp(String),
}
