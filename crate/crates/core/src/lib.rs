pub mod error;
pub mod closed_form;
pub mod config;
pub mod expr;
pub mod fd;
pub mod field;
pub mod grid;
pub mod ode;
pub mod jet;
pub mod profile;
pub mod quad;
pub mod soliton;
pub mod tensor;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};
