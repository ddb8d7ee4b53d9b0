//! Text embedders behind one trait, plus engine-side L2 normalization.
//!
//! The engine normalizes every vector itself, no matter what the backend
//! returned, so inner products are cosine similarities in [-1, 1].

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RetrievalError;

/// A unit-norm embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Normalize to unit Euclidean norm; a (near-)zero vector is a hard
    /// error because it cannot rank anything.
    pub fn normalized(values: Vec<f32>) -> Result<Self, RetrievalError> {
        let norm: f64 = values.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(RetrievalError::Normalization { norm });
        }
        let values = values.iter().map(|v| (*v as f64 / norm) as f32).collect();
        Ok(Self { values })
    }

    pub fn dot(&self, other: &Self) -> f32 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

pub trait Embedder: Send + Sync {
    /// Raw (possibly unnormalized) vectors, one per input text, in order.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError>;

    fn dim(&self) -> usize;

    /// Identity stamped into indexes; query-time embedder must match.
    fn id(&self) -> String;

    fn deterministic(&self) -> bool;
}

/// Embed and normalize, enforcing the declared dimension.
pub fn embed_normalized(
    embedder: &dyn Embedder,
    texts: &[String],
) -> Result<Vec<EmbeddingVector>, RetrievalError> {
    if texts.is_empty() {
        return Err(RetrievalError::EmptyInput("no texts to embed".into()));
    }
    let raw = embedder.embed(texts)?;
    if raw.len() != texts.len() {
        return Err(RetrievalError::EmbedderProtocol(format!(
            "asked for {} embeddings, got {}",
            texts.len(),
            raw.len()
        )));
    }
    raw.into_iter()
        .map(|values| {
            if values.len() != embedder.dim() {
                return Err(RetrievalError::DimMismatch {
                    expected: embedder.dim(),
                    got: values.len(),
                });
            }
            EmbeddingVector::normalized(values)
        })
        .collect()
}

/// Deterministic, model-free embedder: SHA-256 of the text seeds a ChaCha20
/// stream that fills the vector. Collisions require colliding hashes.
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub const DEFAULT_DIM: usize = 64;

    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIM)
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        Ok(texts
            .iter()
            .map(|t| {
                let digest = Sha256::digest(t.as_bytes());
                let mut seed = [0u8; 32];
                seed.copy_from_slice(&digest);
                let mut rng = ChaCha20Rng::from_seed(seed);
                (0..self.dim).map(|_| rng.gen_range(-1.0f32..1.0f32)).collect()
            })
            .collect())
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("hash-v1/dim={}", self.dim)
    }

    fn deterministic(&self) -> bool {
        true
    }
}

#[derive(Debug, Deserialize)]
struct ScriptedEmbedderFile {
    dim: usize,
    entries: Vec<ScriptedEmbedderEntry>,
}

#[derive(Debug, Deserialize)]
struct ScriptedEmbedderEntry {
    text: String,
    vector: Vec<f32>,
}

/// Fixture embedder: exact text → pinned vector, hash fallback for anything
/// else. Stands in for a pretrained encoder in golden tests.
pub struct ScriptedEmbedder {
    table: HashMap<String, Vec<f32>>,
    fallback: HashEmbedder,
    id: String,
}

impl ScriptedEmbedder {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        let bytes = std::fs::read(path.as_ref())?;
        let file: ScriptedEmbedderFile =
            serde_json::from_slice(&bytes).map_err(|e| RetrievalError::EmbedderProtocol(
                format!("{}: {e}", path.as_ref().display()),
            ))?;
        if file.dim == 0 {
            return Err(RetrievalError::EmbedderProtocol("dim must be positive".into()));
        }
        let mut table = HashMap::new();
        for entry in file.entries {
            if entry.vector.len() != file.dim {
                return Err(RetrievalError::DimMismatch {
                    expected: file.dim,
                    got: entry.vector.len(),
                });
            }
            table.insert(entry.text, entry.vector);
        }
        let digest = Sha256::digest(&bytes);
        Ok(Self {
            table,
            fallback: HashEmbedder::new(file.dim),
            id: format!("scripted-{}/dim={}", &hex::encode(digest)[..16], file.dim),
        })
    }
}

impl Embedder for ScriptedEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        texts
            .iter()
            .map(|t| match self.table.get(t) {
                Some(v) => Ok(v.clone()),
                None => Ok(self.fallback.embed(std::slice::from_ref(t))?.remove(0)),
            })
            .collect()
    }

    fn dim(&self) -> usize {
        self.fallback.dim()
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn deterministic(&self) -> bool {
        true
    }
}

/// OpenAI-compatible `POST /v1/embeddings` client.
pub struct RemoteEmbedder {
    base_url: String,
    model: String,
    api_key: Option<String>,
    dim: usize,
    client: reqwest::blocking::Client,
}

impl RemoteEmbedder {
    pub fn new(
        base_url: impl Into<String>,
        model: impl Into<String>,
        dim: usize,
        api_key: Option<String>,
        timeout_ms: u64,
    ) -> Result<Self, RetrievalError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_millis(timeout_ms))
            .build()
            .map_err(|e| RetrievalError::EmbedderProtocol(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key,
            dim,
            client,
        })
    }
}

#[derive(Deserialize)]
struct WireEmbeddings {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f32>,
}

impl Embedder for RemoteEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        let url = format!("{}/v1/embeddings", self.base_url.trim_end_matches('/'));
        let body = serde_json::json!({"model": self.model, "input": texts});
        let mut request = self.client.post(url).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| RetrievalError::EmbedderProtocol(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| RetrievalError::EmbedderProtocol(e.to_string()))?;
        if !status.is_success() {
            return Err(RetrievalError::EmbedderProtocol(format!(
                "http {status}: {}",
                text.chars().take(200).collect::<String>()
            )));
        }
        let wire: WireEmbeddings = serde_json::from_str(&text)
            .map_err(|e| RetrievalError::EmbedderProtocol(e.to_string()))?;
        Ok(wire.data.into_iter().map(|d| d.embedding).collect())
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("remote/{}/dim={}", self.model, self.dim)
    }

    fn deterministic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_embedder_is_deterministic_and_order_preserving() {
        let e = HashEmbedder::default();
        let texts = vec!["one".to_string(), "two".to_string(), "three".to_string()];
        let a = embed_normalized(&e, &texts).unwrap();
        let b = embed_normalized(&e, &texts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        // Different texts give different vectors.
        assert_ne!(a[0], a[1]);
        // Batch order matches input order.
        let one_alone = embed_normalized(&e, &["one".to_string()]).unwrap();
        assert_eq!(a[0], one_alone[0]);
    }

    #[test]
    fn vectors_are_unit_norm() {
        let e = HashEmbedder::default();
        let vs = embed_normalized(&e, &["anything".to_string()]).unwrap();
        let norm: f64 = vs[0]
            .values
            .iter()
            .map(|v| (*v as f64) * (*v as f64))
            .sum::<f64>()
            .sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_vector_is_a_normalization_error() {
        struct ZeroEmbedder;
        impl Embedder for ZeroEmbedder {
            fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
                Ok(texts.iter().map(|_| vec![0.0; 4]).collect())
            }
            fn dim(&self) -> usize {
                4
            }
            fn id(&self) -> String {
                "zero".into()
            }
            fn deterministic(&self) -> bool {
                true
            }
        }
        let err = embed_normalized(&ZeroEmbedder, &["x".to_string()]).unwrap_err();
        assert!(matches!(err, RetrievalError::Normalization { .. }));
    }

    #[test]
    fn empty_batch_is_rejected() {
        let e = HashEmbedder::default();
        assert!(embed_normalized(&e, &[]).is_err());
    }
}
