//! Model checkpoints: vocabulary, dimensions and every parameter array in
//! one versioned JSON document.

use std::fs;
use std::path::Path;

use jointparse_core::model::{Model, ModelError, ModelParameters, VocabError, Vocabulary};
use jointparse_core::tree::{Label, LabelError};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "jointparse-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    words: Vec<String>,
    counts: Vec<usize>,
    labels: Vec<String>,
    params: ModelParameters,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed checkpoint: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a checkpoint (format {0:?})")]
    Format(String),
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("bad label in checkpoint: {0}")]
    Label(#[from] LabelError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn to_json(model: &Model) -> String {
    let file = CheckpointFile {
        format: FORMAT.to_string(),
        version: VERSION,
        words: model.vocab.words().to_vec(),
        counts: model.vocab.counts().to_vec(),
        labels: model.vocab.labels().iter().map(ToString::to_string).collect(),
        params: model.params.clone(),
    };
    serde_json::to_string(&file).expect("parameters serialize")
}

/// Parses and validates a checkpoint; every tensor must match the
/// dimensions, the vocabulary size and the label inventory.
pub fn from_json(text: &str) -> Result<Model, CheckpointError> {
    let file: CheckpointFile = serde_json::from_str(text)?;
    if file.format != FORMAT {
        return Err(CheckpointError::Format(file.format));
    }
    if file.version != VERSION {
        return Err(CheckpointError::Version(file.version));
    }
    let labels = file
        .labels
        .iter()
        .map(|l| l.parse::<Label>())
        .collect::<Result<Vec<_>, _>>()?;
    let vocab = Vocabulary::from_parts(file.words, file.counts, labels)?;
    Ok(Model::from_parts(vocab, file.params)?)
}

pub fn save(model: &Model, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, to_json(model)).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Model, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&text)
}
