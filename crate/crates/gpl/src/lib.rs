//! Phase retrieval from lattice samples of the Gaussian-window spectrogram.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod signal;
pub mod transforms;
pub mod spectrogram;
pub mod lattice;
pub mod linalg;
pub mod reconstruction;
pub mod io;
pub mod experiments;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signals.md")]
    mod signals {}
    #[doc = include_str!("../../../book/src/gabor.md")]
    mod gabor {}
    #[doc = include_str!("../../../book/src/frft.md")]
    mod frft {}
    #[doc = include_str!("../../../book/src/sampling-sets.md")]
    mod sampling_sets {}
    #[doc = include_str!("../../../book/src/compact.md")]
    mod compact {}
    #[doc = include_str!("../../../book/src/shift-invariant.md")]
    mod shift_invariant {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
