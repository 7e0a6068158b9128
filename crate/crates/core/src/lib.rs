//! Location-choice models for geo-tagged county count data.
//!
//! The crate fits three maximum-likelihood families to a count outcome
//! (a binary-presence logit, a log-link Poisson, and a zero-inflated
//! Poisson with a logistic inflation equation) and runs Getis-Ord G_i*
//! hot-spot detection over distance-band or k-nearest-neighbour weights.
//!
//! Module map:
//!
//! * [`data`]: observations, datasets and design matrices.
//! * [`ingest`]: CSV input/output with derived rate and ratio covariates.
//! * [`glm`]: log-likelihoods, scores, pmf and moments for each family.
//! * [`optimizer`]: Newton maximizer and Wald inference.
//! * [`spatial`]: weights matrices, G_i* scores and hot/cold classes.
//! * [`synth`]: seeded data-generating processes and recovery trials.
//! * [`cli`]: the `fit`, `hotspot`, `simulate` and `report` commands.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod data;
pub mod error;
pub mod glm;
pub mod ingest;
mod linalg;
pub mod optimizer;
pub mod report;
pub mod spatial;
pub mod synth;

pub use data::{binarize_counts, build_design, CountyObservation, Dataset, DesignMatrix};
pub use error::{Error, Result};
pub use glm::{Family, ModelSpec, Params};
pub use optimizer::{fit, maximize, FitResult, OptimOptions};
pub use spatial::{build_weights, getis_ord_gstar, HotspotClass, HotspotResult, WeightScheme};
pub use synth::{generate, DgpSpec};
