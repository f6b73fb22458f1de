pub mod bounds;
pub mod cda;
pub mod cli;
pub mod codebook;
pub mod error;
pub mod fastdecode;
pub mod lattice;
pub mod linalg;
pub mod numberfield;
pub mod sim;
