//! File formats, corpora, benchmarking and the command line for `cl4-core`.

pub mod bench;
pub mod cli;
pub mod corpus;
pub mod formats;
