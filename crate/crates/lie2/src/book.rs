//! Guide chapters compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/crossed-modules.md")]
pub mod crossed_modules {}
#[doc = include_str!("../../../book/src/bialgebras.md")]
pub mod bialgebras {}
#[doc = include_str!("../../../book/src/poisson.md")]
pub mod poisson {}
#[doc = include_str!("../../../book/src/lax.md")]
pub mod lax {}
#[doc = include_str!("../../../book/src/representations.md")]
pub mod representations {}
#[doc = include_str!("../../../book/src/lattice.md")]
pub mod lattice {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
