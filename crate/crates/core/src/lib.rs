//! Scene-text landmark mapping.
//!
//! Camera poses and noisy text detections go in; a map of named landmarks with
//! world positions comes out. Detections are grouped into classes of homologous
//! strings by normalized edit distance, filtered by a scored long/short-term
//! memory, localized by pinhole back-projection and reduced to one position per
//! class by iterative trimmed averaging. A language model (or a deterministic
//! mock) picks each class's name, judges whether it is a landmark, and answers
//! free-form navigation queries.

pub mod config;
mod error;
pub mod geometry;
pub mod io;
pub mod landmarks;
pub mod llm;
pub mod memory;
pub mod pipeline;
pub mod sim;
pub mod svg;
pub mod textsim;

pub use config::{EngineConfig, RunConfig};
pub use error::Error;
pub use geometry::{Intrinsics, PixelPoint, Pose, QuadBox, WorldPoint};
pub use landmarks::{cluster_positions, ClusterConfig, LandmarkRecord, Verdict};
pub use llm::LlmBackend;
pub use memory::{MemoryConfig, MemoryState, MemoryStatus};
pub use pipeline::{FrameInput, MapState, TextObservation};
pub use textsim::{edit_distance, similarity, ClassSet, SimilarityConfig, TextClass};
