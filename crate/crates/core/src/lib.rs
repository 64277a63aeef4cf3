//! Interpreter, normalization backends and equation checker for a typed
//! probabilistic metalanguage with `sample`, `score` and nested `norm`.

pub mod denote;
pub mod dist;
pub mod eqcheck;
pub mod error;
pub mod inference;
pub mod lang;
pub mod opsem;
pub mod parser;
pub mod prims;
pub mod typecheck;

pub use error::{Error, Result, SyntaxError, TypeError};
