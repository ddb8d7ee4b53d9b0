//! Plan-driven retrieval-augmented question answering.
//!
//! The engine decomposes a question into a plan, then per step defines a
//! concrete task, retrieves passages from a dense flat index, extracts
//! per-document evidence notes, and synthesizes a step answer — threading
//! the accumulated history into every later step until the plan completes.
//!
//! Everything model-shaped sits behind two traits: [`backend::ChatBackend`]
//! (remote endpoint, scripted fixture, or recorded cassette) and
//! [`retrieval::Embedder`] (remote endpoint, hash-based test embedder, or
//! pinned fixture vectors), so the full pipeline runs and tests without any
//! live model.

pub mod agents;
pub mod backend;
pub mod clock;
pub mod eval;
pub mod orchestrator;
pub mod retrieval;
pub mod state;

pub use clock::RunClock;
pub use orchestrator::{Engine, EngineConfig, RunOutcome, RunStatus, RunTranscript};
