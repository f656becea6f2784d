//! Underwater glider simulation, recurrent velocity regression and
//! dead-reckoning evaluation.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod net;
pub mod pipeline;
pub mod sensors;

pub use config::Config;
pub use error::{Error, Result};
