//! Library surface of the experiment harness: configuration, pipeline and
//! report writers. The `pfr` binary is a thin clap front-end over these.

pub mod config;
pub mod output;
pub mod pipeline;
