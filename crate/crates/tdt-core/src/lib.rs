//! Forecasting the probability of vulnerability disclosures for a software
//! project and its dependency tree.
//!
//! The pipeline models a root library's release history as a time
//! dependency tree, fits kernel-density models to the grace periods between
//! library releases and the vulnerabilities disclosed for them (pooled per
//! cluster of similar libraries), and propagates per-dependency window
//! probabilities through an attack-tree view of each dependency snapshot to
//! a single root estimate. Joint analytical convolution of cluster models
//! and ecosystem-level graph metrics build on the same pieces.

pub mod ecosystem;
pub mod evidence;
pub mod forecast;
pub mod ingest;
pub mod joint;
pub mod kde;
pub mod model;
