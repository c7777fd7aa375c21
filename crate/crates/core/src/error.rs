//! Error type shared by every solver stage.

use thiserror::Error;

use crate::report::SolveReport;

pub type Result<T, E = QmeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QmeError {
    #[error("matrix is singular to working precision (rcond = {rcond:.3e})")]
    SingularMatrix { rcond: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{routine} did not converge (info = {info})")]
    ConvergenceFailure { routine: &'static str, info: i32 },

    #[error("generalized Schur decomposition failed (info = {info})")]
    SchurFailure { info: i32 },

    #[error("eigenvalue reordering failed: swap too ill-conditioned (info = {info})")]
    ReorderFailure { info: i32 },

    #[error("matrix polynomial looks degenerate: A(z) is singular at every probe point (max rcond = {max_rcond:.3e})")]
    DegeneratePolynomial { max_rcond: f64 },

    #[error("cyclic reduction broke down at step {step}: rcond(A1) = {rcond:.3e}")]
    Breakdown {
        step: usize,
        rcond: f64,
        partial: Option<Box<SolveReport>>,
    },

    #[error("matrix power overflow guard tripped at step {step} (norm {norm:.3e})")]
    PowerOverflow { step: usize, norm: f64 },

    #[error("shift hypothesis violated: {what} (defect {defect:.3e})")]
    SpecViolation { what: &'static str, defect: f64 },

    #[error("polynomial is not in QBD form: {0}")]
    NotQbd(String),

    #[error("no singular value gap after {iterations} CR steps (last ratios sigma_l+1/sigma_l: A0 {gap0:.3e}, A2 {gap2:.3e})")]
    NoGap {
        iterations: usize,
        gap0: f64,
        gap2: f64,
        suggested_ell: Option<usize>,
    },

    #[error("no eigenvalue selection gives a well-conditioned Z11 (best rcond = {best_rcond:.3e})")]
    SelectionFailure { best_rcond: f64 },

    #[error("deflated block A122 is singular (rcond = {rcond:.3e})")]
    SingularA122 { rcond: f64 },

    #[error("unknown test case {0} (expected 1, 2 or 3)")]
    BadCase(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<QmeError>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl QmeError {
    pub(crate) fn at(self, stage: &'static str) -> Self {
        QmeError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error once stage labels are peeled off.
    pub fn root(&self) -> &QmeError {
        match self {
            QmeError::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for configuration and I/O problems (as opposed to numerical failures).
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self.root(),
            QmeError::Io(_)
                | QmeError::Json(_)
                | QmeError::Csv(_)
                | QmeError::Parse(_)
                | QmeError::InvalidArgument(_)
                | QmeError::BadCase(_)
                | QmeError::DimensionMismatch(_)
        )
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
