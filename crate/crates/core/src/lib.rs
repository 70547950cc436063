pub mod aggregation;
pub mod annotation;
pub mod classify;
pub mod cli;
pub mod config;
pub mod evaluation;
pub mod ingest;
pub mod labels;
pub mod pipeline;
pub mod synth;
pub mod text;
