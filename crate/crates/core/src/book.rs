#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/maps.md")]
mod maps {}
#[doc = include_str!("../../../book/src/induced.md")]
mod induced {}
#[doc = include_str!("../../../book/src/operators.md")]
mod operators {}
#[doc = include_str!("../../../book/src/spectral.md")]
mod spectral {}
#[doc = include_str!("../../../book/src/escape.md")]
mod escape {}
#[doc = include_str!("../../../book/src/monte-carlo.md")]
mod monte_carlo {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
