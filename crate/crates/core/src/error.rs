/*
  Copyright 2026 The a3kit Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/
use std::path::PathBuf;

use thiserror::Error;

use crate::model_io::{AnswerError, TransportError};
use crate::urdf::UrdfError;

/// Failures of pure geometric operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("value out of domain: {0}")]
    Domain(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Urdf(#[from] UrdfError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("link `{0}` is not movable")]
    NotMovable(String),
    #[error("no contact: {0}")]
    Contact(String),
    #[error(transparent)]
    Answer(#[from] AnswerError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("unknown fixture `{0}`")]
    Lookup(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used by the CLI's structured error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Urdf(_) => "urdf",
            Error::Geometry(_) => "geometry",
            Error::NotMovable(_) => "not_movable",
            Error::Contact(_) => "contact",
            Error::Answer(_) => "answer",
            Error::Transport(_) => "transport",
            Error::Lookup(_) => "lookup",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
