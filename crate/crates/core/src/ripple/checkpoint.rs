use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RippleConfig, RippleModel};
use crate::corpus::Vocab;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    config: RippleConfig,
    entities: Vec<String>,
    relations: Vec<String>,
    entity_shape: [usize; 2],
    relation_shape: [usize; 3],
    entity_embeddings: Vec<f64>,
    relation_embeddings: Vec<f64>,
}

impl RippleModel {
    /// JSON checkpoint with vocabularies, shapes and flattened parameters.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let d = self.dim();
        let ckpt = Checkpoint {
            format_version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            entities: self.entities.names().to_vec(),
            relations: self.relations.names().to_vec(),
            entity_shape: [self.entities.len(), d],
            relation_shape: [self.relations.len(), d, d],
            entity_embeddings: self.entity_emb.clone(),
            relation_embeddings: self.relation_emb.clone(),
        };
        let json = serde_json::to_string(&ckpt).expect("checkpoint serializes");
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Json {
            context: path.display().to_string(),
            source: e,
        })?;
        if ckpt.format_version != CHECKPOINT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint version {}",
                ckpt.format_version
            )));
        }
        let d = ckpt.config.dim;
        if ckpt.entity_shape != [ckpt.entities.len(), d]
            || ckpt.relation_shape != [ckpt.relations.len(), d, d]
        {
            return Err(Error::InvalidConfig("checkpoint shapes do not match vocabularies".into()));
        }
        RippleModel::from_parts(
            ckpt.config,
            Vocab::from_names(ckpt.entities),
            Vocab::from_names(ckpt.relations),
            ckpt.entity_embeddings,
            ckpt.relation_embeddings,
        )
    }
}
