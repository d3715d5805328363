//! Network play, persistence and the command line for blockdrop.

pub mod cli;
pub mod protocol;
pub mod server;
pub mod session;
pub mod store;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/service.md")]
    pub struct Service;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
