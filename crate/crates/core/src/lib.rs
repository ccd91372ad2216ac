//! Coded placement delivery arrays for caching over combination networks.
//!
//! The modules build, check and exercise arrays whose columns are labelled by
//! the `r`-subsets of `H` relays:
//!
//! - [`combinat`]: binomials, relay subsets and their lexicographic order.
//! - [`model`]: the array type and its symbol index.
//! - [`format`]: the text file format.
//! - [`validate`]: axiom checks with witnesses.
//! - [`construct`]: generators for the known families.
//! - [`sim`]: a byte-level placement and delivery simulator.
//! - [`analysis`]: closed-form parameters and scheme comparison.

pub mod analysis;
pub mod combinat;
pub mod construct;
pub mod fixtures;
pub mod format;
pub mod model;
pub mod sim;
pub mod validate;
