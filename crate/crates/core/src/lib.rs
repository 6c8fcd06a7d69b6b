//! Translate SQuAD 2.0-style extractive QA datasets into another language
//! while recovering exact answer offsets in the translated contexts, and
//! score QA predictions with EM, F1 and BLEU.
//!
//! Offsets everywhere count Unicode code points, matching the SQuAD files.
//!
//! Scores and metrics are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the command-line
//! tool uses.

pub mod align;
pub mod backends;
pub mod jsonl;
pub mod metrics;
pub mod pipeline;
pub mod real;
pub mod segment;
pub mod squad;
pub mod synthetic;
pub mod text;

pub use real::Real;

/// Scalar used by the concrete aliases.
pub type Scalar = f64;
pub type Score = backends::SimilarityScore<Scalar>;
pub type Candidate = align::AlignmentCandidate<Scalar>;
pub type Alignment = align::AlignmentResult<Scalar>;
pub type Trace = align::AlignmentTrace<Scalar>;
pub type Report = metrics::EvalReport<Scalar>;
pub type DynSimilarity = dyn backends::Similarity<Scalar>;
pub type PipelineBackends = pipeline::Backends<Scalar>;
