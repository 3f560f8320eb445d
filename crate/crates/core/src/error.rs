use std::path::PathBuf;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("element {element} references node {node}, but the mesh has {n_nodes} nodes")]
    DanglingNode {
        element: usize,
        node: usize,
        n_nodes: usize,
    },
    #[error("element {element} has non-positive measure {measure:e}")]
    InvertedElement { element: usize, measure: f64 },
    #[error("boundary face {face:?} of patch '{patch}' is not a face of exactly one element")]
    BadBoundaryFace { patch: String, face: Vec<usize> },
    #[error("projection onto curved patch '{patch}' failed at node {node}: {msg}")]
    Projection {
        patch: String,
        node: usize,
        msg: String,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("patch '{0}' not found")]
    PatchNotFound(String),
    #[error("patch '{patch}' is {actual}, expected {expected}")]
    PatchKind {
        patch: String,
        expected: String,
        actual: String,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("Bessel function argument out of range: |z| = {0:e}")]
    BesselOverflow(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("linear solver did not converge: {0}")]
    NotConverged(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Wraps the error with the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error below any stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
