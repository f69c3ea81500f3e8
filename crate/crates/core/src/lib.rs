//! Radial pattern keyword search over knowledge graphs.
//!
//! A query is a set of central keywords plus an optional set of marginal
//! keywords. The engine finds central nodes close to every central keyword,
//! then attaches the marginal keywords to each candidate's central keyword
//! nodes and ranks the resulting subgraphs.

pub mod bench;
pub mod error;
pub mod gen;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod output;
pub mod ranking;
pub mod search;
pub mod store;
pub mod text;
pub mod weighting;

pub use error::{RaksError, Result};
pub use graph::{EdgeId, EdgeRef, KnowledgeGraph, LabelId, NodeId, Triple};
pub use ranking::{Combination, ScoreParams};
pub use search::{Engine, Query, QueryResult, ResolvedQuery, SearchOutcome, SearchParams, Termination};
pub use store::{load_index, save_index, IndexBundle};
pub use text::{KeywordMatch, NodeTextIndex};
pub use weighting::{ActivationLevels, CoarseningParams, FineWeights};
