//! Command-line interface and HTTP service for the r3 toolkit.

pub mod cli;
pub mod config;
pub mod response;
pub mod service;
