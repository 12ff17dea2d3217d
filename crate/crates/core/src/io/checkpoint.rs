use std::path::Path;

use serde::{Deserialize, Serialize};

use super::archive::TensorArchive;
use crate::error::{Error, Result};
use crate::model::{Checkpoint, CheckpointMeta, ModelGraph, Network};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    kind: String,
    graph: ModelGraph,
    meta: CheckpointMeta,
}

const KIND: &str = "checkpoint";

pub fn checkpoint_to_archive(c: &Checkpoint) -> Result<TensorArchive> {
    let header = serde_json::to_value(Header {
        kind: KIND.into(),
        graph: c.network.graph.clone(),
        meta: c.meta.clone(),
    })
    .map_err(|e| Error::InvalidInput(format!("checkpoint header: {e}")))?;
    let mut a = TensorArchive::new(header);
    a.tensors = c.network.named_tensors();
    Ok(a)
}

pub fn checkpoint_from_archive(a: &TensorArchive, origin: &Path) -> Result<Checkpoint> {
    let unsupported = |reason: String| Error::UnsupportedFormat {
        path: origin.display().to_string(),
        reason,
    };
    let header: Header =
        serde_json::from_value(a.header.clone()).map_err(|e| unsupported(format!("checkpoint header: {e}")))?;
    if header.kind != KIND {
        return Err(unsupported(format!("archive holds `{}`, not a checkpoint", header.kind)));
    }
    header.graph.validate()?;
    let expected = Network::zeros(&header.graph)?.named_tensors();
    if let Some(extra) = a.tensors.keys().find(|k| !expected.contains_key(*k)) {
        return Err(unsupported(format!("unexpected tensor `{extra}`")));
    }
    let network = Network::from_named(&header.graph, &a.tensors).map_err(|e| unsupported(e.to_string()))?;
    Ok(Checkpoint {
        network,
        meta: header.meta,
    })
}

pub fn save_checkpoint(path: &Path, c: &Checkpoint) -> Result<()> {
    checkpoint_to_archive(c)?.save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    checkpoint_from_archive(&TensorArchive::load(path)?, path)
}
