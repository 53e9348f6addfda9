use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("operation requires a simple graph (no parallel edges)")]
    NotSimple,
    #[error("operation requires a regular graph")]
    NotRegular,
    #[error("operation requires a tree host")]
    NotATree,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no cycle: an endpoint lies outside the tree")]
    NoCycle,
    #[error("empty class: no subtree matches the request")]
    EmptyClass,
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("retry cap exceeded after {attempts} attempts")]
    RetryCap { attempts: u64 },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
