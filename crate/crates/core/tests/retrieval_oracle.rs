//! Search exactness against an independent brute-force oracle, plus the
//! orthonormal-construction and tie-break checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ragline_core::retrieval::{Chunk, HashEmbedder, VectorIndex};
use std::time::Instant;

fn chunk(id: String, text: String) -> Chunk {
    let n_words = text.split_whitespace().count();
    Chunk {
        id,
        title: String::new(),
        text,
        n_words,
    }
}

/// Naive full scan, written independently of the index implementation:
/// score every row with a plain loop, sort by (score desc, id asc), take k.
fn brute_force_top_k(index: &VectorIndex, query: &[f32], k: usize) -> Vec<(String, usize)> {
    let mut scored: Vec<(String, f32)> = Vec::new();
    for i in 0..index.len() {
        let row = index.vector(i);
        let mut s = 0f32;
        for (a, b) in row.iter().zip(query) {
            s += a * b;
        }
        scored.push((index.chunk(i).id.clone(), s));
    }
    scored.sort_by(|(ida, sa), (idb, sb)| sb.total_cmp(sa).then_with(|| ida.cmp(idb)));
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(rank, (id, _))| (id, rank + 1))
        .collect()
}

#[test]
fn thousand_vectors_hundred_queries_match_brute_force() {
    let embedder = HashEmbedder::new(64);
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let chunks: Vec<Chunk> = (0..1000)
        .map(|i| {
            chunk(
                format!("c-{i:04}"),
                format!("passage {i} {}", rng.gen::<u64>()),
            )
        })
        .collect();
    let index = VectorIndex::build(&chunks, &embedder).unwrap();

    let started = Instant::now();
    for qi in 0..100 {
        let query = format!("query {qi} {}", rng.gen::<u64>());
        let hits = index.search(&query, 5, &embedder).unwrap();
        let got: Vec<(String, usize)> =
            hits.into_iter().map(|h| (h.chunk_id, h.rank)).collect();

        let q = ragline_core::retrieval::embed_normalized(&embedder, &[query]).unwrap();
        let expected = brute_force_top_k(&index, &q[0].values, 5);
        assert_eq!(got, expected, "query {qi} diverged from the oracle");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 2.0,
        "oracle comparison took {elapsed:?}, budget is 2s"
    );
}

#[test]
fn duplicated_vectors_tie_break_by_id_everywhere() {
    let embedder = HashEmbedder::new(32);
    // Five distinct texts, each duplicated under three ids.
    let mut chunks = Vec::new();
    for t in 0..5 {
        for copy in ["b", "a", "c"] {
            chunks.push(chunk(format!("{copy}-dup{t}"), format!("shared text {t}")));
        }
    }
    let index = VectorIndex::build(&chunks, &embedder).unwrap();
    for t in 0..5 {
        let hits = index.search(&format!("shared text {t}"), 3, &embedder).unwrap();
        let ids: Vec<&str> = hits.iter().map(|h| h.chunk_id.as_str()).collect();
        assert_eq!(
            ids,
            vec![
                format!("a-dup{t}").as_str(),
                format!("b-dup{t}").as_str(),
                format!("c-dup{t}").as_str()
            ]
        );
        assert_eq!(hits[0].score, hits[1].score);
        assert_eq!(hits[1].score, hits[2].score);
    }
}

#[test]
fn full_ranking_is_a_permutation_of_all_ids() {
    let embedder = HashEmbedder::new(32);
    let chunks: Vec<Chunk> = (0..50)
        .map(|i| chunk(format!("p-{i:02}"), format!("item number {i}")))
        .collect();
    let index = VectorIndex::build(&chunks, &embedder).unwrap();
    let hits = index.search("anything", 50, &embedder).unwrap();
    let mut ids: Vec<String> = hits.iter().map(|h| h.chunk_id.clone()).collect();
    ids.sort();
    let mut expected: Vec<String> = chunks.iter().map(|c| c.id.clone()).collect();
    expected.sort();
    assert_eq!(ids, expected);
    // Ranks are 1..=n.
    let ranks: Vec<usize> = hits.iter().map(|h| h.rank).collect();
    assert_eq!(ranks, (1..=50).collect::<Vec<_>>());
}

#[test]
fn orthonormal_basis_recovers_the_matching_chunk() {
    // A scripted embedder mapping five passages to e_1..e_5 and the query to
    // e_3 must put chunk 3 first with score 1.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("embedder.json");
    let mut entries = Vec::new();
    for i in 0..5 {
        let mut v = vec![0.0f32; 8];
        v[i] = 1.0;
        entries.push(serde_json::json!({"text": format!("passage {}", i + 1), "vector": v}));
    }
    let mut q = vec![0.0f32; 8];
    q[2] = 1.0;
    entries.push(serde_json::json!({"text": "the query", "vector": q}));
    std::fs::write(
        &path,
        serde_json::to_string(&serde_json::json!({"dim": 8, "entries": entries})).unwrap(),
    )
    .unwrap();

    let embedder = ragline_core::retrieval::ScriptedEmbedder::from_path(&path).unwrap();
    let chunks: Vec<Chunk> = (1..=5)
        .map(|i| chunk(format!("chunk-{i}"), format!("passage {i}")))
        .collect();
    let index = VectorIndex::build(&chunks, &embedder).unwrap();
    let hits = index.search("the query", 1, &embedder).unwrap();
    assert_eq!(hits[0].chunk_id, "chunk-3");
    assert!((hits[0].score - 1.0).abs() < 1e-6);
}
