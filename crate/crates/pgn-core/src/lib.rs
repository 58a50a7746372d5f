//! Template calculus for parametric geometry of numbers, plus a lattice-flow
//! simulator.
//!
//! The exact half of the crate builds and validates piecewise-linear
//! templates over the rationals ([`path`], [`template`], [`builders`]) and
//! scores them ([`score`]). The floating-point half simulates the diagonal
//! flow on unimodular lattices ([`lattice`]), computes successive minima
//! with a brute-force cross-check ([`minima`]), and produces log-minima
//! traces, template comparisons, occupation profiles, and singularity
//! probes ([`trace`], [`singular`]).
//!
//! Sampling loops are data-parallel via rayon under the default `parallel`
//! feature; disabling it leaves the same sequential code the benchmarks
//! compare against.

pub mod builders;
pub mod dims;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod minima;
pub mod mutation;
pub mod path;
pub mod rational;
pub mod score;
pub mod singular;
pub mod template;
pub mod trace;

pub use builders::{build_f1, build_fk, standard_block, TemplateFamily};
pub use dims::Dims;
pub use error::{Error, Result};
pub use lattice::Lattice;
pub use minima::{successive_minima, successive_minima_oracle, DEFAULT_BUDGET};
pub use path::PiecewisePath;
pub use rational::Rat;
pub use score::{average_delta, closed_form_delta, score_report, ScoreReport};
pub use template::{validate_path, Axiom, LinkedTemplate, Template, ValidationReport};
pub use trace::{
    compare_trace_to_template, log_minima_trace, occupation_fraction, time_grid, MinimaTrace,
};
