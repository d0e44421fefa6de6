use thiserror::Error;

use crate::lattice::SiteClass;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("singular 3x3 system: the three planes share no unique point")]
    SingularSystem,

    #[error("invalid refinement plan: {0}")]
    InvalidPlan(String),

    #[error("site class {0} is not present in plan {1}")]
    ClassNotInPlan(SiteClass, String),

    #[error("bisector of coincident points is undefined")]
    CoincidentPoints,

    #[error("clipping left a cell with empty interior")]
    EmptyResult,

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
