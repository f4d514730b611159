//! Finite-blocklength secrecy bounds for wiretap channels.

// Checks like `!(p > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bsc;
pub mod dmc;
pub mod error;
pub mod gaussian;
pub mod numerics;
pub mod pa;
pub mod probmodel;
pub mod wiretap;

pub use error::{Error, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/metrics.md")]
    struct Metrics;
    #[doc = include_str!("../../../book/src/privacy-amplification.md")]
    struct PrivacyAmplification;
    #[doc = include_str!("../../../book/src/wiretap-bounds.md")]
    struct WiretapBounds;
    #[doc = include_str!("../../../book/src/bsc.md")]
    struct Bsc;
    #[doc = include_str!("../../../book/src/gaussian.md")]
    struct Gaussian;
    #[doc = include_str!("../../../book/src/dmc.md")]
    struct Dmc;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
