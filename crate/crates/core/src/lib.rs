//! Content-based news recommenders and a sentiment/stance bias audit.
//!
//! The crate covers the whole pipeline: loading an annotated corpus
//! ([`corpus`]), four recommenders ([`recommend`] for the text-based ones and
//! [`ripple`] for the knowledge-graph one), click-through-rate evaluation
//! ([`eval`]), the bias audit itself ([`bias`]) and a user simulator
//! ([`sim`]) that produces interaction logs when real study data is not
//! available.
//!
//! ```
//! use newsbias::bias::{classify_bias_case, BiasCase};
//!
//! // user leans against, recommender leans against too
//! assert_eq!(classify_bias_case(-0.2, -0.3, 0.05), BiasCase::C1);
//! ```
//!
//! A longer walk-through lives in the guide under `book/`.

pub mod bias;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod layout;
pub mod recommend;
pub mod ripple;
pub mod sim;
pub mod stats;
pub mod util;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/recommenders.md")]
    mod recommenders {}
    #[doc = include_str!("../../../book/src/ripplenet.md")]
    mod ripplenet {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/bias-audit.md")]
    mod bias_audit {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
