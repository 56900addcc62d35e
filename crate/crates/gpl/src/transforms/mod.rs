//! Fourier, Gabor, ambiguity, Hermite and fractional Fourier transforms.

pub mod fourier;
pub mod frft;
pub mod gabor;
pub mod hermite;

pub use fourier::{fourier_at, fourier_grid, fourier_on};
pub use frft::{frft, frft_chirp_unreduced, hermite_expand, rotate, FrftMethod, HermiteExpansion, RotationAngle};
pub use gabor::{ambiguity, gabor, gabor_at, gabor_gaussian_closed, gabor_sis_series, TFMatrix};
pub use hermite::{hermite_eval, hermite_table, N_MAX};
