pub mod analysis;
pub mod cachesim;
pub mod exec;
pub mod grid;
pub mod mapper;
pub mod store;
