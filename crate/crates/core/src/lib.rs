//! Numerical machinery for delay-coordinate embeddings of diffeomorphisms:
//! polynomial bases, structured matrices and their ranks, perturbed maps with
//! first-order sensitivities, transfer-of-volume bounds, covers, and seeded
//! Monte Carlo experiments.

pub mod delay;
pub mod dynsys;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod polybasis;
pub mod prevalence;
pub mod sampling;
pub mod structmat;

pub use error::{Error, Result};
