//! Core machinery for unsupervised re-identification training on embedding
//! features: a per-instance feature memory, memory-based contrastive losses
//! with hard-negative truncation, a detection-context quadruplet loss,
//! DBSCAN pseudo-labelling with a scene-level splitting constraint, and a
//! deterministic synthetic-world simulator that ties them together into an
//! epochwise training loop.
//!
//! Everything in this crate is pure computation over `f64` vectors; file
//! formats, configuration, and the command-line front end live in the
//! companion `cgps-cli` crate. The crate is `no_std`-compatible (with
//! `alloc`): disable the default `std` feature to drop the standard
//! library, in which case scalar math routes through `libm`.
//!
//! All similarities are inner products of L2-normalized vectors, i.e.
//! cosine similarities in `[-1, 1]`; every stored feature (memory slots,
//! centroids, batch features) is kept unit-norm so temperature-scaled
//! logits stay in `[-1/tau, 1/tau]`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod clustering;
pub mod error;
pub mod losses;
mod math;
pub mod metrics;
pub mod simulator;
pub mod types;

pub use error::Error;
pub use types::{
    centroid, normalize, BatchSample, ClusterId, ClusterSet, FeatureMemory, Instance,
    InstanceGroup, SceneIndex,
};
