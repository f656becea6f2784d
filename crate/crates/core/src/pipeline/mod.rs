//! Dataset files, replay, evaluation, plotting and the command front end.

pub mod commands;
pub mod dataset;
pub mod evaluate;
pub mod io;
pub mod plot;
pub mod replay;
pub mod study;
