use std::path::PathBuf;

/// Errors produced anywhere in the tracking pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("projection matrix is singular (normalized |det| = {det:e})")]
    SingularProjection { det: f64 },

    #[error("rotation matrix is not a proper rotation: {0}")]
    InvalidRotation(String),

    #[error("point maps to infinity (homogeneous scale {scale:e})")]
    PointAtInfinity { scale: f64 },

    #[error("invalid box dimension: width {width}, height {height}")]
    InvalidDimension { width: f64, height: f64 },

    #[error("innovation covariance is not invertible (det = {det:e})")]
    DegenerateInnovation { det: f64 },

    #[error("frame {got} arrived after frame {previous}")]
    FrameOrder { previous: u32, got: u32 },

    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("no target layout keeps every trajectory in view after {attempts} attempts")]
    Frustum { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frame ranges do not overlap: {0}")]
    FrameRange(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that stem from an unusable camera description.
    pub fn is_camera_error(&self) -> bool {
        matches!(
            self,
            Error::SingularProjection { .. } | Error::InvalidRotation(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
