use thiserror::Error;

use crate::ordinals::Ordinal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a limit ordinal")]
    NotALimit(Ordinal),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not a member: {0}")]
    NotAMember(String),
    #[error("projection of {node} under tau_({gamma},{beta}) is not a single node")]
    NotSingleton {
        gamma: Ordinal,
        beta: Ordinal,
        node: String,
    },
    #[error("nodes are not comparable in the lexicographic order")]
    Incomparable,
    #[error("subtree is not contained in block {0}")]
    HostMismatch(u32),
    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: u32, found: u32 },
    #[error("the family is infinite for alpha = {0}")]
    InfiniteFamily(Ordinal),
    #[error("blocks of level {0} are infinite and cannot be materialized")]
    InfiniteBlock(Ordinal),
    #[error("relation domain does not match the enumerated domain: {0}")]
    DomainMismatch(String),
    #[error("search needs {needed} candidates, budget is {budget}")]
    Infeasible { needed: String, budget: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("limit construction for {alpha} stalled: {detail}")]
    Stalled { alpha: Ordinal, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
