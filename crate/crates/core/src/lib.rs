//! Quantitative noninterference for quantum automata.

pub mod access;
pub mod automaton;
pub mod catalog;
pub mod composition;
pub mod config;
pub mod error;
pub mod linalg;
pub mod model;
pub mod random;
pub mod regression;
pub mod security;
pub mod unwinding;

pub use config::Config;
pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/states.md")]
    struct States;
    #[doc = include_str!("../../../book/src/systems.md")]
    struct Systems;
    #[doc = include_str!("../../../book/src/insecurity.md")]
    struct Insecurity;
    #[doc = include_str!("../../../book/src/unwinding.md")]
    struct Unwinding;
    #[doc = include_str!("../../../book/src/composition.md")]
    struct Composition;
    #[doc = include_str!("../../../book/src/access-control.md")]
    struct AccessControl;
    #[doc = include_str!("../../../book/src/model-files.md")]
    struct ModelFiles;
    #[doc = include_str!("../../../book/src/command-line.md")]
    struct CommandLine;
}
