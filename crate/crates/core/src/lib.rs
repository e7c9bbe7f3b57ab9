//! Knowledge-based debugging for a small C subset.
//!
//! Programs are parsed, lowered to an annotated flow graph, and matched against
//! a library of plans (stereotyped code patterns and their buggy variants).
//! Verification against an intended-goal specification yields a diagnostic
//! report that the explanation layer turns into student-facing text.

pub mod acquire;
pub mod cli;
pub mod debugger;
pub mod explain;
pub mod flowgraph;
pub mod frontend;
pub mod matcher;
pub mod planlib;
pub mod span;

pub use span::SourceSpan;
