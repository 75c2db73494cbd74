pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod scoring;
pub mod synthetic;
pub mod training;
