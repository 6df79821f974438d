//! Unsupervised word segmentation from soft-alignment matrices, with
//! Average Normalized Entropy (ANE) as an alignment-confidence measure.
//!
//! The pipeline: load per-sentence phone-by-word alignment matrices
//! ([`io`]), optionally average runs or pick the sharpest attention head
//! ([`align`]), cluster neighbouring phones that peak at the same source word
//! ([`segment`]), collect discovered types and (type, translation) pairs
//! ([`lexicon`]) and score everything against gold ([`eval`]). [`synth`]
//! generates corpora with known answers.

pub mod align;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod lexicon;
pub mod segment;
pub mod synth;

pub use align::{AlignmentMatrix, AneReport};
pub use corpus::{AlignmentRecord, GoldMap, Run, RunSet, SentencePair, TargetSymbol};
pub use error::{Error, MatrixError, Result};
pub use segment::{Segmentation, Token};
