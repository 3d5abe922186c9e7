//! Feature screening plus spectral clustering for high-dimensional data with
//! few samples and many features, most of them uninformative.
//!
//! The pipeline ranks features by a Kolmogorov-Smirnov statistic, picks a
//! cut-off with Higher Criticism, projects the retained features onto their
//! leading left singular vectors and runs k-means on the embedding.
//! A generator for the matching synthetic model lives in [`acm`].

pub mod acm;
pub mod cluster;
pub mod error;
pub mod experiment;
pub mod hc;
pub mod io;
pub mod ks;
pub mod matrix;
pub mod pipeline;
pub mod rng;
pub mod svd;

pub use error::{Error, ExitStatus, Result};
