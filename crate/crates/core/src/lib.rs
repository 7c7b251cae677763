pub mod audit;
pub mod bisim;
pub mod construction;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod machine;
pub mod pi;
pub mod random;
pub mod reproduce;
pub mod simulate;
pub mod view;
pub mod walks;

pub use error::{Error, Result};
