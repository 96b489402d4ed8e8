//! Landscape-aware per-instance algorithm selection for black-box optimization.
//!
//! The crate covers the whole pipeline: a seeded 24-function benchmark suite
//! ([`problems`]), Latin hypercube designs and splittable random streams
//! ([`sampling`]), cheap exploratory landscape features ([`ela`]), an
//! instrumented solver portfolio ([`solvers`]), performance tables with
//! capped log-precision ([`perfdata`]), from-scratch tree ensembles under
//! nested leave-one-group-out cross-validation ([`learners`]), the three
//! selection approaches ([`selection`]), VBS/SBS-relative evaluation
//! ([`evaluation`]) and a cached, reproducible stage runner ([`workbench`]).

pub mod ela;
pub mod error;
pub mod evaluation;
pub mod fmt;
pub mod learners;
pub mod perfdata;
pub mod problems;
pub mod sampling;
pub mod selection;
pub mod solvers;
pub mod workbench;

pub use error::{Error, Result};
