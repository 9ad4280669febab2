pub mod assignment;
pub mod conll;
pub mod delex;
pub mod miner;
pub mod normalize;
pub mod profile;
pub mod registry;
pub mod scorer;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/registry.md")]
    mod registry {}
    #[doc = include_str!("../../../book/src/conll.md")]
    mod conll {}
    #[doc = include_str!("../../../book/src/delexicalization.md")]
    mod delexicalization {}
    #[doc = include_str!("../../../book/src/mining.md")]
    mod mining {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
