pub mod error;
pub mod fparith;
pub mod hp;
pub mod linalg;
pub mod primitives;
pub mod report;
pub mod bench;
pub mod sign;
pub mod analysis;
pub mod deflate;
pub mod eigh;
pub mod cli;

pub use error::{Error, Result};
