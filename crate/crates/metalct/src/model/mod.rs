//! Value types shared by every module: lines, grids, streak reports and file formats.

pub(crate) mod grid;
pub mod io;
mod line;
mod report;

pub use grid::{ImageGrid, ImageSpec, Mask, SinoSpec, SinogramGrid};
pub use line::{canonicalize_line, line_distance, Line, RigidMotion};
pub use report::{StreakEntry, StreakLineClass, StreakReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not measurable: {0}")]
    NotMeasurable(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
