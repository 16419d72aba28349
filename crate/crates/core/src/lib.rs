pub mod asymptotics;
pub mod correction;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod ingest;
pub mod models;
pub mod numerics;
pub mod simulation;
pub mod testing;

pub use error::{Error, Result};
