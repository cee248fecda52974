use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::landmarks::ClusterError;
use crate::llm::LlmError;
use crate::memory::MemoryError;
use crate::textsim::{ClassId, TextError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("frame {got} does not follow frame {last}")]
    StalePose { last: u64, got: u64 },
    #[error("no class has reached long-term memory")]
    NoPromotedClasses,
    #[error("map has not been distilled")]
    MapNotDistilled,
    #[error("map holds no landmark with a position")]
    NoLandmarks,
    #[error("long-term class {0} has no text class")]
    MissingClass(ClassId),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no detection could be associated with a pose")]
    EmptyAssociation,
    #[error("unsupported map version {0}")]
    MapVersion(u32),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("config: {0}")]
    Config(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_owned(),
            line,
            message: message.into(),
        }
    }
}
