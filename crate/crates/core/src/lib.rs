pub mod error;
pub mod grid;
pub mod lattice;
pub mod partitions;
pub mod decomp;
pub mod norms;
pub mod interp;
pub mod harness;
