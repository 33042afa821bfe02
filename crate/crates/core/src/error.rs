use thiserror::Error;

pub type Result<T> = std::result::Result<T, KdmError>;

#[derive(Debug, Error)]
pub enum KdmError {
    #[error("cosine kernel evaluated on a zero vector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("bad weights: {0}")]
    BadWeights(String),

    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),

    #[error("operation requires a {expected} kernel, found {found}")]
    WrongKernelKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("label shape mismatch: {0}")]
    LabelShapeMismatch(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-finite objective at epoch {epoch}, step {step}: {detail}")]
    NonFiniteLoss {
        epoch: usize,
        step: usize,
        detail: String,
    },

    #[error("metric {0} is not finite")]
    NonFiniteMetric(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("class {class} has {available} instances, a bag needs {needed}")]
    InsufficientClassInstances {
        class: usize,
        needed: usize,
        available: usize,
    },

    #[error("bad split fractions: {0}")]
    BadFractions(String),

    #[error("AUC needs both classes present")]
    SingleClass,

    #[error("model/data mismatch: {0}")]
    ModelDataMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl KdmError {
    /// Short machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            KdmError::ZeroVector => "ZeroVector",
            KdmError::DimMismatch { .. } => "DimMismatch",
            KdmError::InvalidKernel(_) => "InvalidKernel",
            KdmError::BadWeights(_) => "BadWeights",
            KdmError::KernelMismatch(_) => "KernelMismatch",
            KdmError::WrongKernelKind { .. } => "WrongKernelKind",
            KdmError::ShapeMismatch(_) => "ShapeMismatch",
            KdmError::LabelShapeMismatch(_) => "LabelShapeMismatch",
            KdmError::EmptyDataset => "EmptyDataset",
            KdmError::NonFiniteLoss { .. } => "NonFiniteLoss",
            KdmError::NonFiniteMetric(_) => "NonFiniteMetric",
            KdmError::InvalidConfig(_) => "InvalidConfig",
            KdmError::Parse { .. } => "ParseError",
            KdmError::Schema(_) => "SchemaError",
            KdmError::InsufficientClassInstances { .. } => "InsufficientClassInstances",
            KdmError::BadFractions(_) => "BadFractions",
            KdmError::SingleClass => "SingleClass",
            KdmError::ModelDataMismatch(_) => "ModelDataMismatch",
            KdmError::Io(_) => "IoError",
            KdmError::Json(_) => "JsonError",
            KdmError::Csv(_) => "CsvError",
        }
    }

    /// Numerical failures exit with 1, everything caused by input with 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            KdmError::NonFiniteLoss { .. } | KdmError::NonFiniteMetric(_) => 1,
            _ => 2,
        }
    }
}
