//! Reference computations and experiments: high-precision oracles, test
//! matrix generators, the Hadamard lower-bound construction and iteration
//! rasters for the scalar sign iterations.

pub mod gen;
pub mod lower_bound;
pub mod oracle;
pub mod raster;

pub use lower_bound::{hadamard, lower_bound_demo, lower_bound_run, necessary_bits, LowerBoundReport};
pub use oracle::{oracle_eigh, oracle_pseudospectrum_gap, oracle_sign, OracleDecomposition};
pub use raster::{check_claims, convergence_raster, Raster, RasterClaims, Region, Scheme};
