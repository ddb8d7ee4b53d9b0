//! Flat exact inner-product index.
//!
//! Vectors are stored densely (f32, row-major, little-endian on disk) and
//! every search is a full scan: exact ranking, descending score, ties broken
//! by ascending chunk id. At the corpus sizes this engine targets that is
//! both fast enough and the reference behavior the property tests demand.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::chunk::Chunk;
use super::embed::{embed_normalized, Embedder, EmbeddingVector};
use super::RetrievalError;

const MAGIC: &[u8; 6] = b"RGIDX\0";
const VERSION: u16 = 1;

/// Per-chunk metadata kept inside the index so retrieval can hand full
/// passages to the extractor without re-reading the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMeta {
    pub id: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub chunk_id: String,
    pub score: f32,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug)]
pub struct VectorIndex {
    dim: usize,
    embedder_id: String,
    corpus_sha256: [u8; 32],
    build_time_unix_ms: u64,
    chunks: Vec<ChunkMeta>,
    vectors: Vec<f32>,
}

fn corpus_hash(chunks: &[Chunk]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for c in chunks {
        hasher.update(c.id.as_bytes());
        hasher.update([0]);
        hasher.update(c.title.as_bytes());
        hasher.update([0]);
        hasher.update(c.text.as_bytes());
        hasher.update([0x1e]);
    }
    hasher.finalize().into()
}

impl VectorIndex {
    /// Embed every chunk's text and build the index. Duplicate chunk ids and
    /// empty inputs are build errors.
    pub fn build(chunks: &[Chunk], embedder: &dyn Embedder) -> Result<Self, RetrievalError> {
        if chunks.is_empty() {
            return Err(RetrievalError::Build("no chunks to index".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in chunks {
            if !seen.insert(c.id.as_str()) {
                return Err(RetrievalError::Build(format!("duplicate chunk id {:?}", c.id)));
            }
        }
        let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
        let embedded = embed_normalized(embedder, &texts)?;
        let dim = embedder.dim();
        let mut vectors = Vec::with_capacity(chunks.len() * dim);
        for v in &embedded {
            vectors.extend_from_slice(&v.values);
        }
        Ok(Self {
            dim,
            embedder_id: embedder.id(),
            corpus_sha256: corpus_hash(chunks),
            build_time_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            chunks: chunks
                .iter()
                .map(|c| ChunkMeta {
                    id: c.id.clone(),
                    title: c.title.clone(),
                    text: c.text.clone(),
                })
                .collect(),
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn corpus_sha256_hex(&self) -> String {
        hex::encode(self.corpus_sha256)
    }

    pub fn build_time_unix_ms(&self) -> u64 {
        self.build_time_unix_ms
    }

    pub fn chunk(&self, i: usize) -> &ChunkMeta {
        &self.chunks[i]
    }

    pub fn chunk_by_id(&self, id: &str) -> Option<&ChunkMeta> {
        self.chunks.iter().find(|c| c.id == id)
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact top-k by inner product against a unit query vector. Returns
    /// min(k, len) hits ranked by descending score, ties by ascending id.
    pub fn search_vector(
        &self,
        query: &EmbeddingVector,
        k: usize,
    ) -> Result<Vec<SearchHit>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::EmptyInput("k must be at least 1".into()));
        }
        if query.dim() != self.dim {
            return Err(RetrievalError::DimMismatch {
                expected: self.dim,
                got: query.dim(),
            });
        }
        let mut scored: Vec<(f32, usize)> = (0..self.chunks.len())
            .map(|i| {
                let score = self
                    .vector(i)
                    .iter()
                    .zip(&query.values)
                    .map(|(a, b)| a * b)
                    .sum::<f32>();
                (score, i)
            })
            .collect();
        scored.sort_by(|(sa, ia), (sb, ib)| {
            sb.total_cmp(sa)
                .then_with(|| self.chunks[*ia].id.cmp(&self.chunks[*ib].id))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(rank, (score, i))| SearchHit {
                chunk_id: self.chunks[i].id.clone(),
                score,
                rank: rank + 1,
            })
            .collect())
    }

    /// Embed `query` with `embedder` (which must match the one the index was
    /// built with) and run [`Self::search_vector`].
    pub fn search(
        &self,
        query: &str,
        k: usize,
        embedder: &dyn Embedder,
    ) -> Result<Vec<SearchHit>, RetrievalError> {
        if embedder.id() != self.embedder_id {
            return Err(RetrievalError::EmbedderMismatch {
                index: self.embedder_id.clone(),
                query: embedder.id(),
            });
        }
        let q = embed_normalized(embedder, &[query.to_string()])?.remove(0);
        self.search_vector(&q, k)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RetrievalError> {
        let file = std::fs::File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        w.write_u64::<LittleEndian>(self.chunks.len() as u64)?;
        w.write_u64::<LittleEndian>(self.build_time_unix_ms)?;
        write_str(&mut w, &self.embedder_id)?;
        w.write_all(&self.corpus_sha256)?;
        for c in &self.chunks {
            write_str(&mut w, &c.id)?;
            write_str(&mut w, &c.title)?;
            write_str(&mut w, &c.text)?;
        }
        for v in &self.vectors {
            w.write_f32::<LittleEndian>(*v)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        let file = std::fs::File::open(path.as_ref())?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(RetrievalError::Corrupt("bad magic".into()));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(RetrievalError::Corrupt(format!(
                "unsupported index version {version}"
            )));
        }
        let dim = r.read_u32::<LittleEndian>()? as usize;
        let count = r.read_u64::<LittleEndian>()? as usize;
        let build_time_unix_ms = r.read_u64::<LittleEndian>()?;
        let embedder_id = read_str(&mut r)?;
        let mut corpus_sha256 = [0u8; 32];
        r.read_exact(&mut corpus_sha256)?;
        let mut chunks = Vec::with_capacity(count);
        for _ in 0..count {
            let id = read_str(&mut r)?;
            let title = read_str(&mut r)?;
            let text = read_str(&mut r)?;
            chunks.push(ChunkMeta { id, title, text });
        }
        let mut vectors = vec![0f32; count * dim];
        r.read_f32_into::<LittleEndian>(&mut vectors)?;
        // Trailing bytes would mean a corrupt or mismatched file.
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(RetrievalError::Corrupt("trailing bytes".into()));
        }
        Ok(Self {
            dim,
            embedder_id,
            corpus_sha256,
            build_time_unix_ms,
            chunks,
            vectors,
        })
    }
}

fn write_str(w: &mut impl Write, s: &str) -> Result<(), RetrievalError> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str(r: &mut impl Read) -> Result<String, RetrievalError> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    if len > 64 * 1024 * 1024 {
        return Err(RetrievalError::Corrupt(format!("string length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| RetrievalError::Corrupt(e.to_string()))
}
