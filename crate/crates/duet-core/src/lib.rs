//! Finite combinatorics on level products of trees: words with variable
//! supports, spans, largeness, disjoint-union families, and exhaustive
//! theorem verifiers that emit machine-checkable certificates.
//!
//! Everything here is deterministic: searches enumerate candidates in a
//! fixed canonical order and parallel runs merge shard results in that
//! same order, so a certificate is byte-identical no matter how many
//! workers produced it.

pub mod cert;
pub mod color;
pub mod error;
pub mod exec;
pub mod large;
pub mod line;
pub mod shell;
pub mod tree;
pub mod unions;
pub mod word;

pub use error::{Error, Result};
