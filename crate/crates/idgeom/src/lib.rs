//! Intrinsic-dimension estimation and embedding-geometry diagnostics for
//! point clouds, plus the text-side measurements that go with them:
//! compression ratios, lexical cohesion metrics, seeded text perturbations,
//! prediction-entropy and sparse-autoencoder vector operations, and
//! synthetic manifolds of known dimension for validating all of the above.

pub mod analysis;
pub mod cloud;
pub mod error;
pub mod estimators;
pub mod fit;
pub mod geom;
pub mod io;
pub mod perturb;
pub mod reprops;
pub mod rng;
pub mod spectral;
pub mod synth;
pub mod textstats;

pub use cloud::{DistanceMatrix, PointCloud};
pub use error::{Error, Result};
pub use rng::RngSpec;
