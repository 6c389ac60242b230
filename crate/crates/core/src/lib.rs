//! Boilerplate removal for web pages.
//!
//! A page is parsed into a Collapsed DOM whose text leaves form a sequence of
//! blocks. Two small convolutional networks score every block (unary
//! potentials) and every pair of neighbouring blocks (pairwise potentials);
//! Viterbi decoding then picks the content/boilerplate labeling with the
//! highest joint score.

pub mod aligner;
pub mod blocks;
pub mod cdom;
pub mod cnn;
mod error;
pub mod inference;
pub mod model;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};
