//! Retrieval-grounded, cross-modal early-warning pipeline for student dropout.
//!
//! The crate is organised as a sequence of stages that can be used on their
//! own or chained through [`pipeline`]:
//!
//! | module       | stage                                                        |
//! |--------------|--------------------------------------------------------------|
//! | [`dataset`]  | CSV ingest, cleaning, de-duplication, imputation             |
//! | [`augment`]  | seeded comment corpus and timestamp synthesis                |
//! | [`textpipe`] | embeddings, exact k-NN retrieval, prompts, affect tagging    |
//! | [`features`] | stratified split, tabular encoder, PCA, text vectors         |
//! | [`resample`] | SMOTENC oversampling of the training fold                    |
//! | [`models`]   | logistic regression and tabular MLP baselines                |
//! | [`fusion`]   | gated cross-modal attention classifier with focal loss       |
//! | [`eval`]     | metrics, calibration, bootstrap, McNemar, latency, ablation  |
//! | [`explain`]  | Shapley attribution, rationales, intervention state machine  |
//!
//! Everything that draws random numbers takes an explicit seed; identical
//! inputs and seeds give bit-identical outputs on one thread.

pub mod augment;
pub mod bundle;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod explain;
pub mod features;
pub mod fusion;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod resample;
pub mod textpipe;
pub mod util;

pub use error::{Error, Result};
