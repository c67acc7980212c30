//! File formats: the binary embedding container, numeric CSV matrices,
//! JSON-Lines corpora, and the keyed metric report. All of these parse
//! untrusted input and must fail cleanly, never panic.

pub mod corpus;
pub mod csvmat;
pub mod emb;
pub mod report;
