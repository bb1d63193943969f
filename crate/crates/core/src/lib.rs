//! Design-space exploration for a 3D heterogeneous transformer accelerator:
//! analytical workload/NoC/thermal/noise/performance models and a
//! multi-objective placement search.

pub mod error;
pub mod mapping;
pub mod noc;
pub mod noise;
pub mod moo;
pub mod perf;
pub mod pipeline;
pub mod platform;
pub mod thermal;
pub mod util;
pub mod workload;

pub use error::{Error, Result};

/// Version stamp carried in CSV headers and run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
