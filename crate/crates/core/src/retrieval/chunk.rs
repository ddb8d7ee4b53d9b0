//! Corpus ingestion: JSON Lines documents → fixed-width word chunks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RetrievalError;

/// A raw corpus document, one JSON object per line: `{id, title, text}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDoc {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

/// An indexed passage. Chunk ids are `<doc_id>-<window_index>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub id: String,
    pub title: String,
    pub text: String,
    pub n_words: usize,
}

/// The document id a chunk id was derived from (strips the final
/// `-<window>` suffix).
pub fn source_doc_id(chunk_id: &str) -> &str {
    match chunk_id.rfind('-') {
        Some(pos) if chunk_id[pos + 1..].chars().all(|c| c.is_ascii_digit())
            && pos + 1 < chunk_id.len() =>
        {
            &chunk_id[..pos]
        }
        _ => chunk_id,
    }
}

pub fn read_corpus_jsonl(path: impl AsRef<Path>) -> Result<Vec<RawDoc>, RetrievalError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut docs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDoc = serde_json::from_str(line).map_err(|e| RetrievalError::Corpus {
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Slide a `chunk_words`-wide window over each document's whitespace tokens,
/// advancing by `chunk_words - overlap_words`. Every input word lands in at
/// least one chunk; an empty document produces none.
pub fn chunk_corpus(
    docs: impl IntoIterator<Item = RawDoc>,
    chunk_words: usize,
    overlap_words: usize,
) -> Result<Vec<Chunk>, RetrievalError> {
    if chunk_words == 0 || overlap_words >= chunk_words {
        return Err(RetrievalError::BadChunking {
            chunk_words,
            overlap_words,
        });
    }
    let stride = chunk_words - overlap_words;
    let mut chunks = Vec::new();
    for doc in docs {
        let words: Vec<&str> = doc.text.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let mut start = 0usize;
        let mut window = 0usize;
        loop {
            let end = (start + chunk_words).min(words.len());
            let slice = &words[start..end];
            chunks.push(Chunk {
                id: format!("{}-{}", doc.id, window),
                title: doc.title.clone(),
                text: slice.join(" "),
                n_words: slice.len(),
            });
            if end == words.len() {
                break;
            }
            start += stride;
            window += 1;
        }
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, n_words: usize) -> RawDoc {
        let text = (0..n_words)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ");
        RawDoc {
            id: id.to_string(),
            title: String::new(),
            text,
        }
    }

    #[test]
    fn two_hundred_fifty_words_without_overlap() {
        let chunks = chunk_corpus(vec![doc("d", 250)], 100, 0).unwrap();
        assert_eq!(chunks.len(), 3);
        assert_eq!(
            chunks.iter().map(|c| c.n_words).collect::<Vec<_>>(),
            vec![100, 100, 50]
        );
        assert_eq!(chunks[0].id, "d-0");
        assert_eq!(chunks[2].id, "d-2");
    }

    #[test]
    fn exact_fit_yields_one_chunk_and_round_trips() {
        let d = doc("d", 100);
        let chunks = chunk_corpus(vec![d.clone()], 100, 0).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].text, d.text);
        assert_eq!(chunks[0].n_words, 100);
    }

    #[test]
    fn empty_document_yields_zero_chunks() {
        let chunks = chunk_corpus(
            vec![RawDoc {
                id: "e".into(),
                title: String::new(),
                text: "   ".into(),
            }],
            100,
            0,
        )
        .unwrap();
        assert!(chunks.is_empty());
    }

    #[test]
    fn overlap_must_be_smaller_than_window() {
        assert!(chunk_corpus(Vec::<RawDoc>::new(), 100, 100).is_err());
        assert!(chunk_corpus(Vec::<RawDoc>::new(), 0, 0).is_err());
    }

    #[test]
    fn reconstruction_oracle_with_overlap() {
        // Concatenating chunk 0 plus each later chunk minus its first
        // `overlap` words must reproduce the original token sequence.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let n: usize = 10_000;
        let words: Vec<String> = (0..n)
            .map(|_| format!("tok{}", rng.gen_range(0..100_000)))
            .collect();
        let original = words.join(" ");
        let chunks = chunk_corpus(
            vec![RawDoc {
                id: "big".into(),
                title: String::new(),
                text: original.clone(),
            }],
            100,
            20,
        )
        .unwrap();
        let mut rebuilt: Vec<String> = Vec::new();
        for (i, c) in chunks.iter().enumerate() {
            let toks: Vec<&str> = c.text.split_whitespace().collect();
            let skip = if i == 0 { 0 } else { 20 };
            rebuilt.extend(toks[skip..].iter().map(|s| s.to_string()));
        }
        assert_eq!(rebuilt.join(" "), original);
        for c in &chunks {
            assert!(c.n_words <= 100);
        }
    }

    #[test]
    fn source_doc_id_strips_window_suffix() {
        assert_eq!(source_doc_id("129773-0"), "129773");
        assert_eq!(source_doc_id("doc-a-12"), "doc-a");
        assert_eq!(source_doc_id("plain"), "plain");
        assert_eq!(source_doc_id("trailing-"), "trailing-");
    }
}
