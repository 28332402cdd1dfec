#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod classify;
pub mod cli;
pub mod connection;
pub mod constraints;
pub mod curvature;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod residual;
pub mod search;
pub mod report;
pub mod structural;
pub mod suites;
pub mod tensor;

pub use error::{HgError, Result};
pub use residual::{Residual, ResidualMap};
