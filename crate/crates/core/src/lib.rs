pub mod decimal;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod kernels;
pub mod vp;
pub mod numerics;
pub mod reduction;

pub use error::{Result, SogError};
