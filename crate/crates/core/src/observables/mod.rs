//! Asymptotic fragment observables and the convergence metrics used to
//! compare ensemble back-ends.
//!
//! Everything derives from the momentum-space amplitudes on the
//! dissociative surface. Two sources contribute: amplitude banked by the
//! absorber and amplitude still on the grid at the final time. They are
//! added incoherently, which keeps every observable free of the aliasing
//! a coherent sum of the two representations would introduce.

mod convergence;
mod distribution;
mod fragments;

pub use convergence::{
    error_bar, k_ladder, running_means, wootters_distance, ConvergenceRecord, ConvergenceRow,
    ExactReference, RealizationSummary,
};
pub use distribution::{MomentumAngularDistribution, MomentumBins, MomentumDensity, PolarGrid};
pub use fragments::{FragmentBlock, FragmentState};
