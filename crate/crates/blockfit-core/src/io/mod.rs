//! Mesh and point-cloud file I/O: PLY (ASCII and binary little-endian, with
//! optional normals and a viewpoint comment) and OFF meshes.

mod off;
mod ply;

pub use off::{read_off, write_off};
pub use ply::{read_mesh_ply, read_ply, write_cloud_ply, write_mesh_ply, PlyFormat};

use crate::geometry::GeometryError;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at byte {offset}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        message: String,
    },
    #[error("{path}: {source}")]
    Geometry {
        path: PathBuf,
        #[source]
        source: GeometryError,
    },
}

impl IoError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        Self::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, offset: u64, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.to_path_buf(),
            offset,
            message: message.into(),
        }
    }
}

/// Loads a mesh by file extension: `.off`, or `.ply` with a face element.
pub fn read_mesh(path: &Path) -> Result<crate::geometry::TriangleMesh, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("off") | Some("OFF") => read_off(path),
        _ => read_mesh_ply(path),
    }
}
