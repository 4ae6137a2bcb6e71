//! Internal-model controllers for robust output regulation with infinite-dimensional
//! exosystems: synthesis, closed-loop simulation and verification on dense truncations.

pub mod analysis;
pub mod bundle;
pub mod cli;
pub mod closedloop;
pub mod error;
pub mod exosystem;
pub mod numerics;
pub mod plant;
pub mod synthesis;
pub mod testbeds;

pub use error::{Error, Result};
pub use numerics::{CMat, CVec, C64};
