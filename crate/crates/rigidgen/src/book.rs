//! The user guide, compiled from the mdbook sources under `book/` in the
//! repository root.
//!
//! Each chapter module below includes its markdown file verbatim, so every
//! code block in the rendered guide also runs as a doc-test: the book
//! cannot drift from the crate. Render the standalone version with
//! `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/framework.md")]
pub mod framework {}

#[doc = include_str!("../../../book/src/orthogonal-arrays.md")]
pub mod orthogonal_arrays {}

#[doc = include_str!("../../../book/src/designs.md")]
pub mod designs {}

#[doc = include_str!("../../../book/src/permutations.md")]
pub mod permutations {}

#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}

#[doc = include_str!("../../../book/src/fourier.md")]
pub mod fourier {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
