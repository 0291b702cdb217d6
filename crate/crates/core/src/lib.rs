//! Top-k dominating queries over a dynamic set of 2D points.
//!
//! The engine keeps the first layers of maxima of the point set, each in an
//! augmented (a,b)-tree that tracks lazily updated dominance scores, and
//! answers queries from the top lists of those trees.

pub mod counter;
pub mod engine;
pub mod geometry;
pub mod tree;
