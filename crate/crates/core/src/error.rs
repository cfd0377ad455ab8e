use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("edge value {0} is not in the alphabet")]
    UnknownEdgeValue(i64),
    #[error("node {node} is out of range for a network with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {0} with a nonzero value")]
    SelfLoop(usize),
    #[error("dyad ({i}, {j}) given more than once")]
    DuplicateDyad { i: usize, j: usize },
    #[error("{0} requires a signed {{-1, 0, 1}} alphabet")]
    UnsupportedStatistic(&'static str),
    #[error("{model} requires a {requirement} alphabet")]
    UnsupportedAlphabet {
        model: &'static str,
        requirement: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid probability table: {0}")]
    InvalidProbabilities(String),
    #[error("invalid statistic table: {0}")]
    InvalidStatistics(String),
    #[error("family is not identifiable; null direction {direction:?}")]
    NonIdentifiable { direction: Vec<f64> },
    #[error("target probability for dyad {dyad} in block ({k}, {l}) is zero")]
    ZeroTargetProbability { dyad: usize, k: usize, l: usize },
    #[error("anchor membership is zero at node {node}, component {component}")]
    ZeroAnchor { node: usize, component: usize },
    #[error("{k} components requested for a network with {n} nodes")]
    TooManyComponents { k: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot draw {requested} distinct pairs out of {available}")]
    SampleTooLarge { requested: u64, available: u64 },
    #[error("invalid simulation spec: {0}")]
    InvalidSimSpec(String),
}
