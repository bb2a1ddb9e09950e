pub mod calculus;
pub mod cli;
pub mod error;
pub mod expr;
pub mod model;
pub mod numoracle;
pub mod opalg;
pub mod randexpr;
pub mod verify;

pub use error::{Error, Result};
pub use expr::Expr;
