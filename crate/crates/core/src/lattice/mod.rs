//! Grids, complex fields, discrete norms and quadrature, shifted-lattice
//! space-time Fourier analysis on the periodic box, and rotation/extension
//! resampling. This is the numerical substrate shared by every other module.

mod grid;
mod field;
pub mod fftutil;
mod modes;
mod interp;
mod rotate;
mod norms;

pub use grid::{CrossSection, Face, SpaceTimeGrid};
pub use field::{ComplexField, Layout};
pub use modes::{
    basis_field, box_fourier_forward, box_fourier_inverse, BoxCoefficients, ModeIndex,
    SobolevWeight,
};
pub use interp::{cubic_weights, fold_even, ExtendedWaveguide};
pub use rotate::{extend_and_cutoff, rotate_resample, CutoffSpec, RotateDirection, Rotation2};
pub use norms::{sobolev_norm, NormTag};
