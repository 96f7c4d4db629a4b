//! Runs the code blocks of the guide in `book/` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/channel-model.md")]
pub mod channel_model {}

#[doc = include_str!("../../../book/src/correlation.md")]
pub mod correlation {}

#[doc = include_str!("../../../book/src/large-arrays.md")]
pub mod large_arrays {}

#[doc = include_str!("../../../book/src/circular-cells.md")]
pub mod circular_cells {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
