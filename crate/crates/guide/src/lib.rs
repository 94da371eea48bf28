//! Guide chapters compiled as doctests, so every snippet in the book runs
//! against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/precoding.md")]
pub mod precoding {}

#[doc = include_str!("../../../book/src/crowding.md")]
pub mod crowding {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/scheduling.md")]
pub mod scheduling {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
