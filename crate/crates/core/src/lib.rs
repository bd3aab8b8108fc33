//! Core of the `folkrec` tag-recommendation toolkit.
//!
//! Everything in this crate is a pure function of its inputs and needs only
//! an allocator: dataset cleaning and splitting, the indexed [`Folksonomy`]
//! model, the tag and resource recommenders, the ranking metrics and the
//! offline evaluation loop. File IO, the command line and the HTTP service
//! live in the `folkrec` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod rec;
pub mod resource;
pub mod synth;

pub use dataset::{DatasetSample, Post, SplitSample};
pub use error::{Error, Result};
pub use eval::{Algorithm, AlgorithmConfig, EvalConfig, EvalReport};
pub use model::{DatasetStats, Folksonomy, ResourceId, TagId, UserId};
pub use rec::{RecList, RecRequest, Scored};
