//! Minimum-norm interpolating regression and synthetic control.
//!
//! The crate centers on two estimators that stay well defined past the
//! interpolation threshold: the minimum-norm least-squares fit over a feature
//! subset, and the minimum-norm simplex-weighted synthetic control. Both are
//! exact averages of their leave-one-feature-out (or leave-one-donor-out)
//! counterparts, and the [`verify`] module checks those identities, the
//! variance and variation orderings they imply, and the portfolio-style risk
//! bound on concrete instances. [`experiments`] traces in- and out-of-sample
//! risk along nested model families, which is where the double- and
//! single-descent curves come from; [`cli_io`] wires the whole thing to a
//! config-driven command line.

pub mod cli_io;
pub mod error;
pub mod experiments;
pub mod feature_pipeline;
pub mod interp_ols;
pub mod numcore;
pub mod seeding;
pub mod synth_control;
pub mod verify;

pub use error::{Error, Result};
pub use numcore::{
    feature_leverage, feature_leverages, min_norm_least_squares, row_space_projection,
    RankTolerance,
};
