//! # scidyn-core
//!
//! Statistics for the dynamic analysis of multivariate longitudinal data.
//!
//! - [`data`]: labeled contingency tensors, probability distributions,
//!   grouping trees, time-sliced graphs, distance matrices and layout tracks.
//! - [`entropy`]: Shannon entropy of any rank, Theil decomposition (flat and
//!   nested), Kullback-Leibler divergence and its decomposition, two- and
//!   three-way mutual information, transition information along a series.
//! - [`layout`]: static and temporally coupled stress majorization, Kruskal
//!   stress-1, eigenvector constructs.
//! - [`metrics`]: betweenness centrality and its time series.
//!
//! All entropies are in bits.

pub mod data;
pub mod entropy;
pub mod error;
pub mod layout;
pub mod metrics;

pub use error::{Error, Result};
