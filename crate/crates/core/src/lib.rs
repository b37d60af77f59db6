//! Desk-scale constructive toolkit for K^r_q-decompositions of complete
//! r-graphs: exchange gadgets, integral decoders, random greedy processes,
//! regularity boosting, the clique removal process and the absorber pipeline.

pub mod absorber;
pub mod algebra;
pub mod boost;
pub mod decode;
pub mod embed;
pub mod error;
pub mod exchange;
pub mod exec;
pub mod hypercore;
pub mod nibble;
pub mod omega;
pub mod process;
pub mod rng;
pub mod steiner;

pub use error::{Error, Result};
