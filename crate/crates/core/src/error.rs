use thiserror::Error;

/// Pipeline stage a failure originated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Plan,
    Schedule,
    Execute,
    Reconstruct,
    Metrics,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Plan => "plan",
            Stage::Schedule => "schedule",
            Stage::Execute => "execute",
            Stage::Reconstruct => "reconstruct",
            Stage::Metrics => "metrics",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported construct at {line}:{column}: {message}")]
    Unsupported {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("empty circuit")]
    EmptyCircuit,
    #[error("inconsistent cut plan: {0}")]
    InconsistentPlan(String),
    #[error("subcircuits {0} and {1} share no cut")]
    NotAdjacent(usize, usize),
    #[error("divergent sampling overhead: error rate {0} >= 0.5")]
    DivergentOverhead(f64),
    #[error("simulation cap exceeded: {needed} qubits > cap {cap}")]
    SimulationCap { needed: usize, cap: usize },
    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),
    #[error("missing variant result: {0}")]
    MissingVariant(String),
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("shape mismatch: {0} vs {1} bits")]
    ShapeMismatch(usize, usize),
    #[error("distribution has no positive mass after clamping")]
    AllZero,
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error, with stage tags stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
