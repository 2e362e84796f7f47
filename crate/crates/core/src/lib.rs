pub mod config;
pub mod data;
pub mod dist;
pub mod error;
pub mod extremes;
pub mod fingerprint;
pub mod granger;
pub mod io;
pub mod pipeline;
pub mod regress;
pub mod report;
pub mod seeding;
pub mod statcf;
pub mod synth;

pub use error::{Error, Result};
