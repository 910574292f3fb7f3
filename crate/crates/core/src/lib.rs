//! Distribution-splitting active learning.
//!
//! The pipeline halves the input space by kernel active scoring
//! ([`scoring`]), splits the retained half into `k` dense local balls
//! ([`splitting`]) and emits one query per ball ([`evaluate::da2_query`]).
//! [`perceptron`] holds Monte-Carlo checks of the halfspace-learning theory
//! the method rests on.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod kernel;
pub mod perceptron;
pub mod scoring;
pub mod seed;
pub mod splitting;

pub use config::{DatasetSource, RunConfig};
pub use dataset::{Dataset, Format, NoiseKind, NoiseModel};
pub use error::{Error, Result};
pub use evaluate::{Classifier, ErrorCurve, Method, QuerySet};
pub use kernel::KernelMatrix;
pub use ndarray;
pub use perceptron::{BoundQuery, PerceptronState};
pub use scoring::HalfspaceSelection;
pub use splitting::{Ball, BallPartition, ConstraintReport, Objective, Sphere, SplitConfig};
