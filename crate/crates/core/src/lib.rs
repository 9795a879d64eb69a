pub mod baselines;
pub mod episode;
pub mod error;
pub mod game;
pub mod harness;
pub mod lp;
pub mod planner;
pub mod rearrange;
pub mod stage;

pub use error::{Error, Result};
