use thiserror::Error;

use crate::asymptotics::AsymptoticsError;
use crate::cochain::CochainError;
use crate::exact_sequences::SequenceError;
use crate::lie_algebra::LieError;
use crate::linalg::LinalgError;
use crate::mapping_torus::TorusError;
use crate::spectral_invariants::SpectralError;
use crate::surface_rep::SurfaceError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("fixture not found: {0}")]
    FixtureNotFound(String),
    #[error("fixture {name}: {source}")]
    Fixture {
        name: String,
        #[source]
        source: Box<Error>,
    },
    #[error("{0}")]
    Input(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_fixture(self, name: &str) -> Self {
        Error::Fixture {
            name: name.to_string(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable kind, e.g. `"NotAComplex"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Cochain(CochainError::NotAComplex { .. }) => "NotAComplex",
            Error::Cochain(_) => "CochainError",
            Error::Linalg(_) => "LinalgError",
            Error::Sequence(_) => "SequenceError",
            Error::Torus(_) => "TorusError",
            Error::Surface(_) => "SurfaceError",
            Error::Lie(_) => "LieError",
            Error::Spectral(_) => "SpectralError",
            Error::Asymptotics(_) => "AsymptoticsError",
            Error::FixtureNotFound(_) => "FixtureNotFound",
            Error::Fixture { source, .. } => source.kind(),
            Error::Input(_) => "InputError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({"error": self.kind(), "message": self.to_string()});
        if let Error::Fixture { name, .. } = self {
            v["fixture"] = serde_json::json!(name);
        }
        v
    }
}
