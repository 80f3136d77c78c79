//! IO, LLM access, HTTP service and CLI around `vispipe-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod fsutil;
pub mod generator;
pub mod io;
pub mod llm;
pub mod planner;
pub mod retriever;
pub mod service;

pub use error::{Error, Result};
