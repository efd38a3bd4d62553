//! Construction-stratified tables, provenance stamps and the release audit.

mod matrix;
mod provenance;
mod release;

pub use matrix::{mean_matrix, parse_cells_csv, parse_matrix_csv, render_matrix, MatrixCellRow, MatrixTable};
pub use provenance::{file_sha256, ProvenanceStamp, StampedInput, TOOL_NAME, TOOL_VERSION};
pub use release::{
    lock_files, release_audit, AuditChecklist, CheckResult, FixedClaimInput, UnavailableCase, WorkspaceDecl,
    WORKSPACE_FILE,
};

use thiserror::Error;

use crate::manifest::ConstructionFamily;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("matrix is missing the cell ({row}, {col})")]
    MissingCell { row: ConstructionFamily, col: ConstructionFamily },
    #[error("line {line}: row carries no construction family")]
    MissingConstruction { line: usize },
    #[error("table {what}: {detail}")]
    Table { what: String, detail: String },
    #[error("workspace declaration {path}: {detail}")]
    Workspace { path: String, detail: String },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
