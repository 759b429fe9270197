//! Graph limits toolkit: graphon kernels, exact and Monte Carlo subgraph
//! densities, spectral and clique invariants, decorated constraints, the
//! universal finitely forcible graphon construction and the small forcing
//! family experiment.

pub mod config;
pub mod constraint;
pub mod density;
pub mod error;
pub mod forcing;
pub mod graph;
pub mod graphon;
pub mod mc;
pub mod rational;
pub mod render;
pub mod spectral;
pub mod universal;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
