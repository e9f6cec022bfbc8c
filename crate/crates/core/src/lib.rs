//! Hybrid quantum tabu search for the capacitated vehicle routing problem.

pub mod bench;
pub mod construct;
pub mod instance;
pub mod qubo;
pub mod sampler;
pub mod solution;
pub mod tabu;

// Every chapter of the guide in `book/` is compiled into a module here so
// that `cargo test --doc` runs its listings and keeps them in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/solutions.md")]
    mod solutions {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/tabu_search.md")]
    mod tabu_search {}
    #[doc = include_str!("../../../book/src/qubo.md")]
    mod qubo {}
    #[doc = include_str!("../../../book/src/resequencing.md")]
    mod resequencing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
